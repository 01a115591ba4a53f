#include "biomeval/simulator.hpp"

#include <cmath>
#include <cstdio>

#include "biomeval/error.hpp"

namespace biomeval {

namespace {

double standard_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

void normalize_in_place(std::vector<double>& v) {
    double norm_sq = 0.0;
    for (const double c : v) norm_sq += c * c;
    const double norm = std::sqrt(norm_sq);
    for (double& c : v) c /= norm;
}

bool is_zero(const std::vector<double>& v) {
    for (const double c : v)
        if (c != 0.0) return false;
    return true;
}

std::string make_identity_id(std::uint32_t index, std::uint32_t identity_count) {
    // Zero-padded so lexicographic (canonical) order equals generation order.
    int width = 1;
    for (std::uint32_t top = identity_count - 1; top >= 10; top /= 10) ++width;
    if (width < 4) width = 4;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "id%0*u", width, index);
    return buf;
}

} // namespace

std::vector<double> sample_unit_direction(Rng& rng, std::uint32_t dimension) {
    std::vector<double> v(dimension);
    do {
        for (double& c : v) c = rng.next_normal();
    } while (is_zero(v));
    normalize_in_place(v);
    return v;
}

std::vector<double> perturb_direction(Rng& rng, const std::vector<double>& mean,
                                      double intra_spread) {
    std::vector<double> v(mean.size());
    do {
        for (std::size_t i = 0; i < mean.size(); ++i)
            v[i] = mean[i] + intra_spread * rng.next_normal();
    } while (is_zero(v));
    normalize_in_place(v);
    return v;
}

Dataset simulate_dataset(const SimulationConfig& config) {
    if (config.identity_count == 0)
        raise(ErrorCode::InvalidPlan, "identity_count must be positive");
    if (config.variations_per_identity == 0)
        raise(ErrorCode::InvalidPlan, "variations_per_identity must be positive");
    if (config.dimension == 0) raise(ErrorCode::InvalidPlan, "dimension must be positive");
    if (!(config.intra_spread >= 0.0) || !std::isfinite(config.intra_spread))
        raise(ErrorCode::InvalidPlan, "intra_spread must be a finite non-negative number");
    if (!config.demographic_plan.empty()) {
        std::uint64_t planned = 0;
        for (const auto& entry : config.demographic_plan) planned += entry.count;
        if (planned != config.identity_count)
            raise(ErrorCode::InvalidPlan, "demographic plan covers " + std::to_string(planned) +
                                              " identities, config declares " +
                                              std::to_string(config.identity_count));
    }

    std::vector<DemographicAttributes> attributes;
    attributes.reserve(config.identity_count);
    if (config.demographic_plan.empty()) {
        attributes.assign(config.identity_count, DemographicAttributes{});
    } else {
        for (const auto& entry : config.demographic_plan)
            for (std::uint32_t i = 0; i < entry.count; ++i)
                attributes.push_back({entry.ethnicity, entry.gender});
    }

    DatasetManifest manifest;
    manifest.name = config.name;
    manifest.embedding_dimension = config.dimension;
    manifest.embedding_file = "embeddings.bev";

    std::vector<EmbeddingRecord> records;
    records.reserve(static_cast<std::size_t>(config.identity_count) *
                    config.variations_per_identity);
    for (std::uint32_t i = 0; i < config.identity_count; ++i) {
        const std::string identity_id = make_identity_id(i, config.identity_count);
        manifest.identities.push_back(
            {identity_id, attributes[i], config.variations_per_identity});

        Rng rng = Rng::derive(config.seed, i);
        const auto mean = sample_unit_direction(rng, config.dimension);
        for (std::uint32_t v = 0; v < config.variations_per_identity; ++v) {
            const auto direction = perturb_direction(rng, mean, config.intra_spread);
            EmbeddingRecord rec;
            rec.identity_id = identity_id;
            rec.variation_id = v;
            rec.vector.reserve(direction.size());
            for (const double c : direction) rec.vector.push_back(static_cast<float>(c));
            records.push_back(std::move(rec));
        }
    }

    return Dataset(std::move(manifest), std::move(records));
}

std::vector<double> simulate_scores(double mean, double std, std::size_t count,
                                    std::uint64_t seed) {
    if (!(std >= 0.0) || !std::isfinite(std) || !std::isfinite(mean))
        raise(ErrorCode::InvalidPlan, "mean must be finite and std non-negative");

    if (std == 0.0) {
        if (mean < -1.0 || mean > 1.0)
            raise(ErrorCode::ImpossibleTruncation,
                  "degenerate distribution at " + std::to_string(mean) + " lies outside [-1, 1]");
        return std::vector<double>(count, mean);
    }

    const double acceptance =
        standard_normal_cdf((1.0 - mean) / std) - standard_normal_cdf((-1.0 - mean) / std);
    if (acceptance < 1e-6)
        raise(ErrorCode::ImpossibleTruncation,
              "acceptance probability " + std::to_string(acceptance) + " below 1e-6");

    Rng rng = Rng::derive(seed, fnv1a64("scores"));
    std::vector<double> scores;
    scores.reserve(count);
    while (scores.size() < count) {
        const double x = mean + std * rng.next_normal();
        if (x >= -1.0 && x <= 1.0) scores.push_back(x);
    }
    return scores;
}

} // namespace biomeval
