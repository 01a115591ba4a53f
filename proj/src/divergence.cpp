#include "biomeval/divergence.hpp"

#include <cmath>

#include "biomeval/error.hpp"

namespace biomeval {

namespace {

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

void require_normalized(const Histogram& h, const char* which) {
    double total = 0.0;
    for (const double m : h.masses) total += m;
    if (std::fabs(total - 1.0) > 1e-9)
        raise(ErrorCode::UnnormalizedInput,
              std::string(which) + " sums to " + std::to_string(total));
}

} // namespace

KlResult kl_divergence(const Histogram& p, const Histogram& q, std::string p_name,
                       std::string q_name) {
    if (p.bin_count != q.bin_count || p.masses.size() != q.masses.size())
        raise(ErrorCode::BinCountMismatch, std::to_string(p.bin_count) + " vs " +
                                               std::to_string(q.bin_count) + " bins");
    require_normalized(p, "P");
    require_normalized(q, "Q");

    // Epsilon is added to every bin of both sides and the masses are not
    // re-normalized afterwards; per-bin terms with p == q are exactly zero,
    // so KL(P, P) is exactly zero.
    CompensatedSum sum;
    for (std::size_t i = 0; i < p.masses.size(); ++i) {
        const double pi = p.masses[i] + kKlEpsilon;
        const double qi = q.masses[i] + kKlEpsilon;
        sum.add(pi * std::log(pi / qi));
    }

    KlResult result;
    result.value = sum.value();
    result.bin_count = p.bin_count;
    result.epsilon = kKlEpsilon;
    result.p_name = std::move(p_name);
    result.q_name = std::move(q_name);
    return result;
}

KlResult compare_datasets(const ScoreDistribution& candidate, const ScoreDistribution& reference,
                          PairKind kind, std::uint32_t bin_count, bool distance_axis,
                          std::string reference_name, std::string candidate_name) {
    if (candidate.kind != kind || reference.kind != kind)
        raise(ErrorCode::Internal, "score distribution kind does not match the comparison kind");
    if (candidate.scores.empty() || reference.scores.empty())
        raise(ErrorCode::EmptyScores, "both score sets must be non-empty");

    auto axis_values = [distance_axis](const ScoreDistribution& dist) {
        auto values = project_axis(dist, ScoreAxis::Standardized);
        if (distance_axis)
            for (double& v : values) v = 1.0 - v;
        return values;
    };

    const auto p = normalize_histogram(build_histogram(axis_values(reference), bin_count));
    const auto q = normalize_histogram(build_histogram(axis_values(candidate), bin_count));

    KlResult result = kl_divergence(p, q, std::move(reference_name), std::move(candidate_name));
    result.axis = distance_axis ? "standardized_distance" : "standardized_similarity";
    return result;
}

} // namespace biomeval
