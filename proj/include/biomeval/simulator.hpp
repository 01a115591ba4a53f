#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biomeval/dataset.hpp"
#include "biomeval/rng.hpp"

namespace biomeval {

struct DemographicPlanEntry {
    Ethnicity ethnicity = Ethnicity::Unknown;
    Gender gender = Gender::Unknown;
    std::uint32_t count = 0;
};

struct SimulationConfig {
    std::string name = "simulated";
    std::uint32_t identity_count = 0;
    std::uint32_t variations_per_identity = 0;
    std::uint32_t dimension = 0;
    // Per-coordinate Gaussian noise scale applied around the identity's mean
    // direction before re-normalization. Zero collapses all variations onto
    // the mean, so every mated cosine similarity is exactly 1.
    double intra_spread = 0.0;
    std::uint64_t seed = 0;
    // Optional; entry counts must sum to identity_count. Identities are
    // assigned plan entries in order. Without a plan all attributes are
    // Unknown.
    std::vector<DemographicPlanEntry> demographic_plan;
};

// Unit-sphere cluster model: identity i draws a mean direction uniformly on
// the unit sphere in `dimension` dims (normalized standard Gaussian vector),
// and each variation re-normalizes mean + intra_spread * gaussian_vector.
// Identity i consumes only the sub-stream derive(seed, i) (mean first, then
// variations in ascending order), so generation is schedule-independent.
// Identity ids are "id" + zero-padded index, which makes canonical order
// equal generation order. Vectors are quantized to 32-bit floats for storage.
Dataset simulate_dataset(const SimulationConfig& config);

// Raw scores from normal(mean, std) with rejection outside [-1, 1], on the
// sub-stream derive(seed, fnv1a64("scores")). Throws ImpossibleTruncation
// when the acceptance probability of the rejection loop is below 1e-6.
std::vector<double> simulate_scores(double mean, double std, std::size_t count, std::uint64_t seed);

// Building blocks, exposed for direct testing. Both return unit-norm vectors
// (64-bit precision, norm within 1e-12 of one).
std::vector<double> sample_unit_direction(Rng& rng, std::uint32_t dimension);
std::vector<double> perturb_direction(Rng& rng, const std::vector<double>& mean, double intra_spread);

} // namespace biomeval
