#pragma once

#include <cstdint>
#include <string>

#include "biomeval/stats.hpp"

namespace biomeval {

// Smoothing constant added to every bin of both histograms before the KL
// accumulation. No re-normalization happens after smoothing; the resulting
// bias is bounded by bin_count * epsilon.
inline constexpr double kKlEpsilon = 1e-10;

struct KlResult {
    double value = 0.0; // nats
    std::uint32_t bin_count = 0;
    double epsilon = kKlEpsilon;
    std::string p_name; // reference distribution P
    std::string q_name; // candidate distribution Q
    std::string axis = "standardized_similarity";
};

// KL(P|Q) = sum_x P(x) ln(P(x)/Q(x)) over per-bin terms, accumulated with
// compensated summation. Inputs must be normalized (sum 1 within 1e-9) and
// share bin_count; epsilon smoothing is applied internally to both sides.
// Direction matters and is recorded in the result; KL(P,P) is exactly zero.
KlResult kl_divergence(const Histogram& p, const Histogram& q,
                       std::string p_name = "p", std::string q_name = "q");

// Histograms both score sets on the standardized axis (or its distance-axis
// reflection 1-s when distance_axis is set), normalizes, and computes KL with
// the reference as P and the candidate as Q. Kinds of the two distributions
// must match.
KlResult compare_datasets(const ScoreDistribution& candidate, const ScoreDistribution& reference,
                          PairKind kind, std::uint32_t bin_count, bool distance_axis = false,
                          std::string reference_name = "reference",
                          std::string candidate_name = "candidate");

} // namespace biomeval
