#include "biomeval/stats.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "biomeval/error.hpp"

namespace biomeval {

namespace {

// Neumaier-compensated accumulator; results do not depend on how callers
// chunk the data, which keeps parallel evaluation bit-stable.
struct CompensatedSum {
    double sum = 0.0;
    double compensation = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x))
            compensation += (sum - t) + x;
        else
            compensation += (x - t) + sum;
        sum = t;
    }

    double value() const { return sum + compensation; }
};

} // namespace

DistributionSummary summarize(std::span<const double> values, StdConvention convention) {
    if (values.empty()) raise(ErrorCode::EmptyDistribution, "no scores to summarize");

    CompensatedSum total;
    for (const double v : values) total.add(v);
    const double mean = total.value() / static_cast<double>(values.size());

    CompensatedSum squares;
    for (const double v : values) {
        const double d = v - mean;
        squares.add(d * d);
    }
    const double divisor = convention == StdConvention::Population
                               ? static_cast<double>(values.size())
                               : static_cast<double>(values.size() > 1 ? values.size() - 1 : 1);
    const double variance = std::max(squares.value() / divisor, 0.0);

    return {mean, std::sqrt(variance), values.size()};
}

DistributionSummary summarize(const ScoreDistribution& dist, ScoreAxis axis,
                              StdConvention convention) {
    const auto values = project_axis(dist, axis);
    return summarize(values, convention);
}

std::vector<double> project_axis(const ScoreDistribution& dist, ScoreAxis axis) {
    std::vector<double> values;
    values.reserve(dist.scores.size());
    for (const auto& score : dist.scores)
        values.push_back(axis == ScoreAxis::Raw ? score.raw : score.standardized);
    return values;
}

Histogram build_histogram(std::span<const double> standardized_scores, std::uint32_t bin_count) {
    if (bin_count == 0) raise(ErrorCode::ZeroBins, "histogram needs at least one bin");
    if (standardized_scores.empty()) raise(ErrorCode::EmptyScores, "no scores to bin");

    Histogram h;
    h.bin_count = bin_count;
    h.masses.assign(bin_count, 0.0);
    for (const double s : standardized_scores) {
        if (!(s >= 0.0 && s <= 1.0))
            raise(ErrorCode::OutOfRange,
                  "standardized score " + std::to_string(s) + " outside [0, 1]");
        // floor(s * B), with s == 1.0 (and any floating-point overshoot of
        // the top edge) assigned to the last bin.
        auto idx = static_cast<std::uint32_t>(s * bin_count);
        if (idx >= bin_count) idx = bin_count - 1;
        h.masses[idx] += 1.0;
    }
    return h;
}

Histogram normalize_histogram(const Histogram& h) {
    CompensatedSum total;
    for (const double m : h.masses) {
        if (m < 0.0) raise(ErrorCode::OutOfRange, "negative histogram mass");
        total.add(m);
    }
    const double sum = total.value();
    if (sum <= 0.0) raise(ErrorCode::ZeroTotalMass, "histogram has no mass");

    Histogram out = h;
    for (double& m : out.masses) m /= sum;
    return out;
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
    out << "bin_lower,bin_upper,mass\n";
    const double width = (h.upper - h.lower) / h.bin_count;
    char buf[64];
    for (std::uint32_t i = 0; i < h.bin_count; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", h.lower + width * i);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g",
                      i + 1 == h.bin_count ? h.upper : h.lower + width * (i + 1));
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", h.masses[i]);
        out << buf << '\n';
    }
}

} // namespace biomeval
