#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "biomeval/dataset.hpp"
#include "biomeval/divergence.hpp"
#include "biomeval/similarity.hpp"
#include "biomeval/stats.hpp"
#include "biomeval/verification.hpp"

namespace biomeval {

struct EvaluationParams {
    std::uint64_t seed = 0;
    std::uint32_t n_variations = 10;
    std::uint32_t n_mated_pairs = 20;
    std::uint32_t n_non_mated_pairs = 20;
    std::uint32_t bin_count = 50;
    std::optional<GroupKey> group_by;
    bool per_identity = false;  // emit one breakdown row per identity
    bool distance_axis = false; // reflect histogram axes to 1 - s
    unsigned threads = 0;       // 0 = hardware concurrency; output is identical either way
};

// Per-demographic-group slice of the same metrics. Scores are partitioned by
// anchor identity, not re-sampled.
struct GroupBundle {
    std::string label;
    std::vector<std::string> identity_ids;
    DistributionSummary mated_summary;
    DistributionSummary non_mated_summary;
    EerResult eer;
    std::size_t mated_count = 0;
    std::size_t non_mated_count = 0;
};

struct EvaluationResult {
    std::string dataset_name;
    std::size_t identity_count = 0;
    ScoreDistribution mated;     // pooled over identities in canonical order
    ScoreDistribution non_mated;
    std::vector<PairSample> pairs;            // audit trail, aligned with pair_scores
    std::vector<SimilarityScore> pair_scores;
    DistributionSummary mated_summary;     // raw axis
    DistributionSummary non_mated_summary; // raw axis
    VerificationReport verification;
    std::optional<KlResult> kl_mated;     // present after attach_kl
    std::optional<KlResult> kl_non_mated;
    std::vector<GroupBundle> groups;       // empty unless params.group_by is set
    std::vector<GroupBundle> per_identity; // empty unless params.per_identity is set
    EvaluationParams params;
};

// Full pipeline: per-identity pairing and scoring (parallel across
// identities, aggregated in canonical identity order), pooled summaries,
// ROC/EER, optional demographic breakdown.
EvaluationResult evaluate_dataset(const Dataset& dataset, const EvaluationParams& params);

// KL of candidate against reference on the standardized axis (P = reference,
// Q = candidate), for both mated and non-mated pools, at candidate's
// bin_count and axis settings.
void attach_kl(EvaluationResult& candidate, const EvaluationResult& reference);

// Histogram of a score pool on the standardized (or distance) axis,
// normalized; this is the plot-ready density data.
Histogram score_histogram(const ScoreDistribution& dist, std::uint32_t bin_count,
                          bool distance_axis);

// Lossless JSON report: doubles rendered with 17 significant digits, fixed
// key order, so identical inputs give byte-identical output. The parameters
// block is sufficient to reproduce the report exactly.
std::string report_json(const EvaluationResult& result);

// Combined report for a compare run: reference and candidate reports plus the
// two KL results attached to the candidate.
std::string comparison_json(const EvaluationResult& candidate, const EvaluationResult& reference);

// Human-readable summary; numbers rounded to the 2-decimal table convention.
void render_table(std::ostream& out, const EvaluationResult& result);

} // namespace biomeval
