#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "biomeval/dataset.hpp"

namespace biomeval {

enum class PairKind { Mated, NonMated };

std::string_view to_string(PairKind kind);

struct PairRef {
    std::string identity_id;
    std::uint32_t variation_id = 0;
};

struct PairSample {
    PairKind kind = PairKind::Mated;
    PairRef left;
    PairRef right;
};

struct SimilarityScore {
    double raw = 0.0;          // cosine similarity in [-1, 1]
    double standardized = 0.0; // (raw + 1) / 2, in [0, 1]
};

// Cosine similarity (a.b)/(|a||b|) evaluated in 64-bit arithmetic as
// dot / sqrt(normsq(a) * normsq(b)) and clamped to [-1, 1]. The evaluation is
// symmetric in its operands bit-for-bit, and identical operands give exactly 1.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

// Maps [-1, 1] to [0, 1] via (raw + 1) / 2; throws OutOfRange outside [-1, 1].
double standardize(double raw);

inline SimilarityScore make_score(double raw) { return {raw, (raw + 1.0) / 2.0}; }

// Mated pairs for one identity: first selects n_variations variations
// uniformly without replacement from the identity's canonical variation list,
// then selects n_pairs unordered pairs uniformly without replacement from the
// C(n_variations, 2) combinations of the chosen variations (sorted ascending,
// enumerated lexicographically). Both selections are partial Fisher-Yates
// shuffles on the sub-stream derive(seed, fnv1a64("mated|" + identity_id)).
std::vector<PairSample> sample_mated_pairs(const Dataset& dataset, std::string_view identity_id,
                                           std::uint32_t n_variations, std::uint64_t n_pairs,
                                           std::uint64_t rng_seed);

// Non-mated pairs anchored at one identity: the combination space is every
// (anchor variation, other identity, other variation) triple, enumerated
// anchor-variation-major with other identities in canonical order, and
// n_pairs are selected uniformly without replacement via partial
// Fisher-Yates on derive(seed, fnv1a64("nonmated|" + identity_id)).
std::vector<PairSample> sample_non_mated_pairs(const Dataset& dataset, std::string_view identity_id,
                                               std::uint64_t n_pairs, std::uint64_t rng_seed);

// Alternative to the per-identity anchoring: draws from the global pool of
// all cross-identity pairs (each unordered pair enumerated once, identities
// in canonical order). Stream: derive(seed, fnv1a64("nonmated-global")).
std::vector<PairSample> sample_non_mated_pairs_global(const Dataset& dataset, std::uint64_t n_pairs,
                                                      std::uint64_t rng_seed);

// Scores in pair order; throws UnknownReference on dangling references.
std::vector<SimilarityScore> score_pairs(const Dataset& dataset, std::span<const PairSample> pairs);

// Audit CSV: kind, left_identity, left_variation, right_identity,
// right_variation, raw_score, standardized_score. pairs and scores must be
// aligned.
void write_pairs_csv(std::ostream& out, std::span<const PairSample> pairs,
                     std::span<const SimilarityScore> scores);

} // namespace biomeval
