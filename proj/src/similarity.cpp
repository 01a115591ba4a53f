#include "biomeval/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "biomeval/error.hpp"
#include "biomeval/rng.hpp"

namespace biomeval {

namespace {

// First k entries of a uniformly shuffled [0, n) index enumeration
// (partial Fisher-Yates), in selection order. Exactly uniform without
// replacement, valid up to k == n.
std::vector<std::uint64_t> select_without_replacement(Rng& rng, std::uint64_t n, std::uint64_t k) {
    std::vector<std::uint64_t> indices(n);
    std::iota(indices.begin(), indices.end(), std::uint64_t{0});
    for (std::uint64_t i = 0; i < k; ++i) {
        const std::uint64_t j = i + rng.next_below(n - i);
        std::swap(indices[i], indices[j]);
    }
    indices.resize(k);
    return indices;
}

double norm_squared(std::span<const float> v) {
    double sum = 0.0;
    for (const float c : v) {
        if (!std::isfinite(c)) raise(ErrorCode::NonFiniteComponent, "embedding component");
        sum += static_cast<double>(c) * static_cast<double>(c);
    }
    return sum;
}

} // namespace

std::string_view to_string(PairKind kind) {
    return kind == PairKind::Mated ? "mated" : "non_mated";
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size())
        raise(ErrorCode::DimensionMismatch, std::to_string(a.size()) + " vs " +
                                                std::to_string(b.size()) + " components");
    const double norm_sq_a = norm_squared(a);
    const double norm_sq_b = norm_squared(b);
    if (norm_sq_a == 0.0 || norm_sq_b == 0.0)
        raise(ErrorCode::ZeroNormVector, "cosine similarity of a zero vector");

    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);

    // sqrt(|a|^2 * |b|^2) instead of sqrt(|a|^2) * sqrt(|b|^2): the product
    // commutes bit-for-bit, and identical operands yield exactly 1.
    const double value = dot / std::sqrt(norm_sq_a * norm_sq_b);
    return std::clamp(value, -1.0, 1.0);
}

double standardize(double raw) {
    if (!(raw >= -1.0 && raw <= 1.0))
        raise(ErrorCode::OutOfRange, "raw score " + std::to_string(raw) + " outside [-1, 1]");
    return (raw + 1.0) / 2.0;
}

std::vector<PairSample> sample_mated_pairs(const Dataset& dataset, std::string_view identity_id,
                                           std::uint32_t n_variations, std::uint64_t n_pairs,
                                           std::uint64_t rng_seed) {
    const auto records = dataset.records_of(identity_id);
    if (records.size() < n_variations)
        raise(ErrorCode::InsufficientVariations,
              "identity '" + std::string(identity_id) + "' has " +
                  std::to_string(records.size()) + " variations, needs " +
                  std::to_string(n_variations));
    if (n_variations < 2)
        raise(ErrorCode::InsufficientVariations,
              "mated pairing needs at least 2 variations per identity");
    const std::uint64_t combination_count =
        static_cast<std::uint64_t>(n_variations) * (n_variations - 1) / 2;
    if (n_pairs > combination_count)
        raise(ErrorCode::TooManyPairs, std::to_string(n_pairs) + " pairs requested from " +
                                           std::to_string(combination_count) + " combinations");

    Rng rng = Rng::derive(rng_seed, fnv1a64("mated|" + std::string(identity_id)));

    auto chosen = select_without_replacement(rng, records.size(), n_variations);
    std::vector<std::uint32_t> variations(chosen.size());
    for (std::size_t i = 0; i < chosen.size(); ++i)
        variations[i] = records[chosen[i]].variation_id;
    std::sort(variations.begin(), variations.end());

    std::vector<std::pair<std::uint32_t, std::uint32_t>> combinations;
    combinations.reserve(combination_count);
    for (std::size_t i = 0; i < variations.size(); ++i)
        for (std::size_t j = i + 1; j < variations.size(); ++j)
            combinations.emplace_back(variations[i], variations[j]);

    auto picked = select_without_replacement(rng, combination_count, n_pairs);
    std::vector<PairSample> pairs;
    pairs.reserve(n_pairs);
    for (const std::uint64_t idx : picked) {
        const auto& [v0, v1] = combinations[idx];
        pairs.push_back({PairKind::Mated,
                         {std::string(identity_id), v0},
                         {std::string(identity_id), v1}});
    }
    return pairs;
}

std::vector<PairSample> sample_non_mated_pairs(const Dataset& dataset,
                                               std::string_view identity_id, std::uint64_t n_pairs,
                                               std::uint64_t rng_seed) {
    if (dataset.identity_count() < 2)
        raise(ErrorCode::SingleIdentityDataset, "non-mated pairing needs at least 2 identities");
    const auto anchor_records = dataset.records_of(identity_id);

    // Cross-pair space involving the anchor, enumerated anchor-variation-major
    // with the other identities in canonical order.
    struct Other {
        std::span<const EmbeddingRecord> records;
        std::uint64_t prefix; // variations before this identity in the enumeration
    };
    std::vector<Other> others;
    std::uint64_t other_total = 0;
    for (const auto& identity : dataset.manifest().identities) {
        if (identity.identity_id == identity_id) continue;
        const auto recs = dataset.records_of(identity.identity_id);
        others.push_back({recs, other_total});
        other_total += recs.size();
    }
    const std::uint64_t space = anchor_records.size() * other_total;
    if (n_pairs > space)
        raise(ErrorCode::TooManyPairs, std::to_string(n_pairs) +
                                           " pairs requested from a cross-pair space of " +
                                           std::to_string(space));
    if (n_pairs == 0) return {};

    Rng rng = Rng::derive(rng_seed, fnv1a64("nonmated|" + std::string(identity_id)));
    auto picked = select_without_replacement(rng, space, n_pairs);

    std::vector<PairSample> pairs;
    pairs.reserve(n_pairs);
    for (const std::uint64_t idx : picked) {
        const std::uint64_t anchor_idx = idx / other_total;
        const std::uint64_t rest = idx % other_total;
        auto it = std::upper_bound(others.begin(), others.end(), rest,
                                   [](std::uint64_t value, const Other& o) {
                                       return value < o.prefix;
                                   });
        const Other& other = *(it - 1);
        const auto& right = other.records[rest - other.prefix];
        pairs.push_back({PairKind::NonMated,
                         {std::string(identity_id), anchor_records[anchor_idx].variation_id},
                         {right.identity_id, right.variation_id}});
    }
    return pairs;
}

std::vector<PairSample> sample_non_mated_pairs_global(const Dataset& dataset,
                                                      std::uint64_t n_pairs,
                                                      std::uint64_t rng_seed) {
    if (dataset.identity_count() < 2)
        raise(ErrorCode::SingleIdentityDataset, "non-mated pairing needs at least 2 identities");

    // Every unordered cross-identity pair exactly once: record i from an
    // earlier identity, record j from a later one, records in canonical order.
    const auto& records = dataset.records();
    std::vector<std::uint64_t> suffix(records.size() + 1, 0);
    std::vector<std::uint64_t> cross_after(records.size(), 0); // records of later identities
    {
        // suffix[i] = number of records at index >= i
        for (std::size_t i = records.size(); i-- > 0;) suffix[i] = suffix[i + 1] + 1;
        std::size_t block_end = records.size();
        for (std::size_t i = records.size(); i-- > 0;) {
            if (i + 1 < records.size() && records[i].identity_id != records[i + 1].identity_id)
                block_end = i + 1;
            cross_after[i] = suffix[block_end];
        }
    }
    std::vector<std::uint64_t> prefix(records.size() + 1, 0);
    for (std::size_t i = 0; i < records.size(); ++i) prefix[i + 1] = prefix[i] + cross_after[i];
    const std::uint64_t space = prefix[records.size()];
    if (n_pairs > space)
        raise(ErrorCode::TooManyPairs, std::to_string(n_pairs) +
                                           " pairs requested from a global cross-pair space of " +
                                           std::to_string(space));

    Rng rng = Rng::derive(rng_seed, fnv1a64("nonmated-global"));
    auto picked = select_without_replacement(rng, space, n_pairs);

    std::vector<PairSample> pairs;
    pairs.reserve(n_pairs);
    for (const std::uint64_t idx : picked) {
        auto it = std::upper_bound(prefix.begin(), prefix.end(), idx);
        const std::size_t left_idx = static_cast<std::size_t>(it - prefix.begin()) - 1;
        const std::uint64_t offset = idx - prefix[left_idx];
        const std::size_t right_idx = records.size() - cross_after[left_idx] + offset;
        const auto& left = records[left_idx];
        const auto& right = records[right_idx];
        pairs.push_back({PairKind::NonMated,
                         {left.identity_id, left.variation_id},
                         {right.identity_id, right.variation_id}});
    }
    return pairs;
}

std::vector<SimilarityScore> score_pairs(const Dataset& dataset,
                                         std::span<const PairSample> pairs) {
    std::vector<SimilarityScore> scores;
    scores.reserve(pairs.size());
    for (const auto& pair : pairs) {
        const auto& left = dataset.record(pair.left.identity_id, pair.left.variation_id);
        const auto& right = dataset.record(pair.right.identity_id, pair.right.variation_id);
        scores.push_back(make_score(cosine_similarity(left.vector, right.vector)));
    }
    return scores;
}

void write_pairs_csv(std::ostream& out, std::span<const PairSample> pairs,
                     std::span<const SimilarityScore> scores) {
    if (pairs.size() != scores.size())
        raise(ErrorCode::Internal, "pair/score lists are misaligned");
    out << "kind,left_identity,left_variation,right_identity,right_variation,raw_score,"
           "standardized_score\n";
    char buf[64];
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        out << to_string(p.kind) << ',' << p.left.identity_id << ',' << p.left.variation_id << ','
            << p.right.identity_id << ',' << p.right.variation_id << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", scores[i].raw);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", scores[i].standardized);
        out << buf << '\n';
    }
}

} // namespace biomeval
