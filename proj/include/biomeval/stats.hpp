#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "biomeval/similarity.hpp"

namespace biomeval {

struct ScoreDistribution {
    PairKind kind = PairKind::Mated;
    std::vector<SimilarityScore> scores;

    std::size_t count() const noexcept { return scores.size(); }
};

enum class ScoreAxis { Raw, Standardized };

// Population (divide by N) is the default; Sample (divide by N-1) is exposed
// as an alternative convention.
enum class StdConvention { Population, Sample };

struct DistributionSummary {
    double mean = 0.0;
    double std = 0.0;
    std::size_t count = 0;
};

// Mean and standard deviation with compensated (Neumaier) accumulation, so
// results are identical regardless of how callers chunk their data.
DistributionSummary summarize(std::span<const double> values,
                              StdConvention convention = StdConvention::Population);

DistributionSummary summarize(const ScoreDistribution& dist, ScoreAxis axis,
                              StdConvention convention = StdConvention::Population);

// B uniform bins over [0, 1]. Masses are raw counts until normalized.
struct Histogram {
    std::uint32_t bin_count = 0;
    double lower = 0.0;
    double upper = 1.0;
    std::vector<double> masses;
};

// Bin index is floor(s * B); s == 1.0 (and any floating-point overshoot of
// the top edge) lands in the last bin. Scores must lie in [0, 1].
Histogram build_histogram(std::span<const double> standardized_scores, std::uint32_t bin_count);

// Divides every mass by the total; the result sums to 1 within 1e-12.
Histogram normalize_histogram(const Histogram& h);

// Plot-ready CSV: bin_lower, bin_upper, mass.
void write_histogram_csv(std::ostream& out, const Histogram& h);

// Projects one score axis out of a distribution.
std::vector<double> project_axis(const ScoreDistribution& dist, ScoreAxis axis);

} // namespace biomeval
