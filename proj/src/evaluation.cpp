#include "biomeval/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <concepts>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "biomeval/error.hpp"

namespace biomeval {

namespace {

// Minimal JSON emitter with a fixed field order and doubles rendered via
// %.17g, so equal inputs always produce byte-identical reports that
// round-trip every f64 exactly.
class JsonWriter {
public:
    void begin_object() {
        prefix();
        out_ += '{';
        stack_.push_back(true);
    }

    void end_object() {
        stack_.pop_back();
        newline();
        out_ += '}';
    }

    void begin_array() {
        prefix();
        out_ += '[';
        stack_.push_back(true);
    }

    void end_array() {
        stack_.pop_back();
        newline();
        out_ += ']';
    }

    void key(std::string_view name) {
        prefix();
        append_string(name);
        out_ += ": ";
        pending_key_ = true;
    }

    void value(double v) {
        prefix();
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out_ += buf;
    }

    template <typename Integer>
        requires std::unsigned_integral<Integer>
    void value(Integer v) {
        prefix();
        out_ += std::to_string(static_cast<std::uint64_t>(v));
    }

    void value(bool v) {
        prefix();
        out_ += v ? "true" : "false";
    }

    void value(std::string_view v) {
        prefix();
        append_string(v);
    }

    std::string take() {
        out_ += '\n';
        return std::move(out_);
    }

private:
    void prefix() {
        if (pending_key_) {
            pending_key_ = false;
            return;
        }
        if (stack_.empty()) return;
        if (!stack_.back()) out_ += ',';
        stack_.back() = false;
        newline_raw();
    }

    void newline() {
        if (pending_key_) return;
        newline_raw();
    }

    void newline_raw() {
        out_ += '\n';
        out_.append(2 * stack_.size(), ' ');
    }

    void append_string(std::string_view s) {
        out_ += '"';
        for (const char c : s) {
            switch (c) {
                case '"': out_ += "\\\""; break;
                case '\\': out_ += "\\\\"; break;
                case '\n': out_ += "\\n"; break;
                case '\r': out_ += "\\r"; break;
                case '\t': out_ += "\\t"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                        out_ += buf;
                    } else {
                        out_ += c;
                    }
            }
        }
        out_ += '"';
    }

    std::string out_;
    std::vector<bool> stack_; // true while the open scope is still empty
    bool pending_key_ = false;
};

std::string_view to_string(GroupKey key) {
    switch (key) {
        case GroupKey::Ethnicity: return "ethnicity";
        case GroupKey::Gender: return "gender";
        case GroupKey::EthnicityGender: return "ethnicity-gender";
    }
    return "ethnicity";
}

struct IdentityScores {
    std::vector<PairSample> mated_pairs;
    std::vector<PairSample> non_mated_pairs;
    std::vector<SimilarityScore> mated_scores;
    std::vector<SimilarityScore> non_mated_scores;
};

IdentityScores evaluate_identity(const Dataset& dataset, const std::string& identity_id,
                                 const EvaluationParams& params) {
    IdentityScores out;
    out.mated_pairs = sample_mated_pairs(dataset, identity_id, params.n_variations,
                                         params.n_mated_pairs, params.seed);
    out.non_mated_pairs =
        sample_non_mated_pairs(dataset, identity_id, params.n_non_mated_pairs, params.seed);
    out.mated_scores = score_pairs(dataset, out.mated_pairs);
    out.non_mated_scores = score_pairs(dataset, out.non_mated_pairs);
    return out;
}

void write_summary(JsonWriter& json, const DistributionSummary& summary) {
    json.begin_object();
    json.key("mean");
    json.value(summary.mean);
    json.key("std");
    json.value(summary.std);
    json.key("count");
    json.value(summary.count);
    json.end_object();
}

void write_eer(JsonWriter& json, const EerResult& eer) {
    json.begin_object();
    json.key("eer");
    json.value(eer.eer);
    json.key("threshold");
    json.value(eer.threshold);
    json.key("tpr_at_eer");
    json.value(eer.tpr_at_eer);
    json.key("far_at_eer");
    json.value(eer.far_at_eer);
    json.key("frr_at_eer");
    json.value(eer.frr_at_eer);
    json.end_object();
}

void write_kl(JsonWriter& json, const KlResult& kl) {
    json.begin_object();
    json.key("value");
    json.value(kl.value);
    json.key("bin_count");
    json.value(kl.bin_count);
    json.key("epsilon");
    json.value(kl.epsilon);
    json.key("direction");
    json.begin_object();
    json.key("p");
    json.value(std::string_view(kl.p_name));
    json.key("q");
    json.value(std::string_view(kl.q_name));
    json.end_object();
    json.key("axis");
    json.value(std::string_view(kl.axis));
    json.end_object();
}

void write_report_body(JsonWriter& json, const EvaluationResult& result) {
    json.begin_object();
    json.key("dataset_name");
    json.value(std::string_view(result.dataset_name));
    json.key("identity_count");
    json.value(result.identity_count);
    json.key("mated_summary");
    write_summary(json, result.mated_summary);
    json.key("non_mated_summary");
    write_summary(json, result.non_mated_summary);
    json.key("eer");
    write_eer(json, result.verification.eer);
    if (result.kl_mated) {
        json.key("kl_mated");
        write_kl(json, *result.kl_mated);
    }
    if (result.kl_non_mated) {
        json.key("kl_non_mated");
        write_kl(json, *result.kl_non_mated);
    }
    const auto write_bundles = [&json](const std::vector<GroupBundle>& bundles) {
        json.begin_object();
        for (const auto& bundle : bundles) {
            json.key(bundle.label);
            json.begin_object();
            json.key("identity_ids");
            json.begin_array();
            for (const auto& id : bundle.identity_ids) json.value(std::string_view(id));
            json.end_array();
            json.key("mated_summary");
            write_summary(json, bundle.mated_summary);
            json.key("non_mated_summary");
            write_summary(json, bundle.non_mated_summary);
            json.key("eer");
            write_eer(json, bundle.eer);
            json.end_object();
        }
        json.end_object();
    };
    if (!result.groups.empty()) {
        json.key("per_group");
        write_bundles(result.groups);
    }
    if (!result.per_identity.empty()) {
        json.key("per_identity");
        write_bundles(result.per_identity);
    }
    json.key("parameters");
    json.begin_object();
    json.key("seed");
    json.value(result.params.seed);
    json.key("n_variations");
    json.value(result.params.n_variations);
    json.key("n_mated_pairs");
    json.value(result.params.n_mated_pairs);
    json.key("n_non_mated_pairs");
    json.value(result.params.n_non_mated_pairs);
    json.key("bin_count");
    json.value(result.params.bin_count);
    json.key("kl_epsilon");
    json.value(kKlEpsilon);
    json.key("roc_epsilon");
    json.value(kRocEpsilon);
    json.key("distance_axis");
    json.value(result.params.distance_axis);
    json.key("group_by");
    json.value(result.params.group_by ? to_string(*result.params.group_by)
                                      : std::string_view("none"));
    json.key("per_identity");
    json.value(result.params.per_identity);
    json.key("std_convention");
    json.value(std::string_view("population"));
    json.key("mated_score_count");
    json.value(result.mated.count());
    json.key("non_mated_score_count");
    json.value(result.non_mated.count());
    json.end_object();
    json.end_object();
}

void append_scores(ScoreDistribution& pool, const std::vector<SimilarityScore>& scores) {
    pool.scores.insert(pool.scores.end(), scores.begin(), scores.end());
}

} // namespace

EvaluationResult evaluate_dataset(const Dataset& dataset, const EvaluationParams& params) {
    if (params.n_variations < 2)
        raise(ErrorCode::OutOfRange, "n_variations must be at least 2");
    if (params.n_mated_pairs == 0 || params.n_non_mated_pairs == 0)
        raise(ErrorCode::OutOfRange, "pair counts must be positive");
    if (params.bin_count == 0) raise(ErrorCode::ZeroBins, "bin_count must be positive");
    if (dataset.identity_count() < 2)
        raise(ErrorCode::SingleIdentityDataset, "evaluation needs at least 2 identities");

    const auto& identities = dataset.manifest().identities;
    const std::size_t n = identities.size();
    std::vector<IdentityScores> identity_scores(n);

    unsigned thread_count = params.threads;
    if (thread_count == 0) {
        thread_count = std::thread::hardware_concurrency();
        if (thread_count == 0) thread_count = 1;
    }
    thread_count = static_cast<unsigned>(std::min<std::size_t>(thread_count, n));

    if (thread_count <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            identity_scores[i] = evaluate_identity(dataset, identities[i].identity_id, params);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    identity_scores[i] =
                        evaluate_identity(dataset, identities[i].identity_id, params);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> threads;
        threads.reserve(thread_count);
        for (unsigned t = 0; t < thread_count; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    EvaluationResult result;
    result.dataset_name = dataset.manifest().name;
    result.identity_count = n;
    result.params = params;
    result.mated.kind = PairKind::Mated;
    result.non_mated.kind = PairKind::NonMated;

    // Aggregation order is the canonical identity order, so the output is
    // independent of the thread schedule.
    for (const auto& scores : identity_scores) {
        append_scores(result.mated, scores.mated_scores);
        append_scores(result.non_mated, scores.non_mated_scores);
        result.pairs.insert(result.pairs.end(), scores.mated_pairs.begin(),
                            scores.mated_pairs.end());
        result.pair_scores.insert(result.pair_scores.end(), scores.mated_scores.begin(),
                                  scores.mated_scores.end());
        result.pairs.insert(result.pairs.end(), scores.non_mated_pairs.begin(),
                            scores.non_mated_pairs.end());
        result.pair_scores.insert(result.pair_scores.end(), scores.non_mated_scores.begin(),
                                  scores.non_mated_scores.end());
    }

    result.mated_summary = summarize(result.mated, ScoreAxis::Raw);
    result.non_mated_summary = summarize(result.non_mated, ScoreAxis::Raw);
    result.verification = verification_report(result.mated, result.non_mated);

    const auto bundle_of = [&](std::string label, std::vector<std::string> ids) {
        GroupBundle bundle;
        bundle.label = std::move(label);
        bundle.identity_ids = std::move(ids);
        ScoreDistribution mated{PairKind::Mated, {}};
        ScoreDistribution non_mated{PairKind::NonMated, {}};
        for (const auto& id : bundle.identity_ids) {
            const auto& scores = identity_scores[dataset.identity_index(id)];
            append_scores(mated, scores.mated_scores);
            append_scores(non_mated, scores.non_mated_scores);
        }
        bundle.mated_summary = summarize(mated, ScoreAxis::Raw);
        bundle.non_mated_summary = summarize(non_mated, ScoreAxis::Raw);
        bundle.eer = verification_report(mated, non_mated).eer;
        bundle.mated_count = mated.count();
        bundle.non_mated_count = non_mated.count();
        return bundle;
    };

    if (params.group_by) {
        for (const auto& [label, ids] : stratify(dataset, *params.group_by))
            result.groups.push_back(bundle_of(label, ids));
    }
    if (params.per_identity) {
        for (const auto& identity : identities)
            result.per_identity.push_back(
                bundle_of(identity.identity_id, {identity.identity_id}));
    }

    return result;
}

void attach_kl(EvaluationResult& candidate, const EvaluationResult& reference) {
    candidate.kl_mated = compare_datasets(candidate.mated, reference.mated, PairKind::Mated,
                                          candidate.params.bin_count,
                                          candidate.params.distance_axis,
                                          reference.dataset_name, candidate.dataset_name);
    candidate.kl_non_mated = compare_datasets(candidate.non_mated, reference.non_mated,
                                              PairKind::NonMated, candidate.params.bin_count,
                                              candidate.params.distance_axis,
                                              reference.dataset_name, candidate.dataset_name);
}

Histogram score_histogram(const ScoreDistribution& dist, std::uint32_t bin_count,
                          bool distance_axis) {
    auto values = project_axis(dist, ScoreAxis::Standardized);
    if (distance_axis)
        for (double& v : values) v = 1.0 - v;
    return normalize_histogram(build_histogram(values, bin_count));
}

std::string report_json(const EvaluationResult& result) {
    JsonWriter json;
    write_report_body(json, result);
    return json.take();
}

std::string comparison_json(const EvaluationResult& candidate, const EvaluationResult& reference) {
    JsonWriter json;
    json.begin_object();
    json.key("reference");
    write_report_body(json, reference);
    json.key("candidate");
    write_report_body(json, candidate);
    json.end_object();
    return json.take();
}

void render_table(std::ostream& out, const EvaluationResult& result) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "Dataset   %s  (%zu identities)\n",
                  result.dataset_name.c_str(), result.identity_count);
    out << buf;
    std::snprintf(buf, sizeof(buf), "Mated     %.2f ± %.2f  (n=%zu)\n",
                  result.mated_summary.mean, result.mated_summary.std,
                  result.mated_summary.count);
    out << buf;
    std::snprintf(buf, sizeof(buf), "Non-mated %.2f ± %.2f  (n=%zu)\n",
                  result.non_mated_summary.mean, result.non_mated_summary.std,
                  result.non_mated_summary.count);
    out << buf;
    const auto& eer = result.verification.eer;
    std::snprintf(buf, sizeof(buf), "EER       %.2f%%   threshold %.4f   TPR %.4f\n",
                  eer.eer * 100.0, eer.threshold, eer.tpr_at_eer);
    out << buf;
    if (result.kl_mated) {
        std::snprintf(buf, sizeof(buf), "KL mated     %.2f  (P=%s, Q=%s)\n",
                      result.kl_mated->value, result.kl_mated->p_name.c_str(),
                      result.kl_mated->q_name.c_str());
        out << buf;
    }
    if (result.kl_non_mated) {
        std::snprintf(buf, sizeof(buf), "KL non-mated %.2f  (P=%s, Q=%s)\n",
                      result.kl_non_mated->value, result.kl_non_mated->p_name.c_str(),
                      result.kl_non_mated->q_name.c_str());
        out << buf;
    }
    if (!result.groups.empty()) {
        out << "Group breakdown:\n";
        for (const auto& group : result.groups) {
            std::snprintf(buf, sizeof(buf),
                          "  %-24s mated %.2f ± %.2f   non-mated %.2f ± %.2f   EER %.2f%%\n",
                          group.label.c_str(), group.mated_summary.mean, group.mated_summary.std,
                          group.non_mated_summary.mean, group.non_mated_summary.std,
                          group.eer.eer * 100.0);
            out << buf;
        }
    }
}

} // namespace biomeval
