#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "biomeval/error.hpp"
#include "biomeval/evaluation.hpp"
#include "biomeval/simulator.hpp"

namespace {

namespace fs = std::filesystem;
using namespace biomeval;

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out << content;
    if (!out) raise(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

template <typename WriterFn>
void write_csv(const fs::path& path, WriterFn&& writer) {
    std::ostringstream buffer;
    writer(buffer);
    write_file(path, buffer.str());
}

std::uint64_t seed_from_env_or(std::uint64_t fallback) {
    const char* env = std::getenv("BIOMEVAL_SEED");
    if (env == nullptr || *env == '\0') return fallback;
    try {
        std::size_t consumed = 0;
        const std::uint64_t value = std::stoull(env, &consumed);
        if (consumed != std::string(env).size())
            raise(ErrorCode::OutOfRange, "BIOMEVAL_SEED is not an unsigned integer");
        return value;
    } catch (const std::logic_error&) {
        raise(ErrorCode::OutOfRange, "BIOMEVAL_SEED is not an unsigned integer");
    }
}

struct CommonOptions {
    std::uint64_t seed = 0;
    bool seed_given = false;
    EvaluationParams params;
    std::string group_by;
    std::string output_dir = ".";
    bool json_to_stdout = false;
};

void add_evaluation_options(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--seed", opts.seed, "RNG seed (BIOMEVAL_SEED is the fallback)")
        ->each([&opts](const std::string&) { opts.seed_given = true; });
    cmd->add_option("--variations", opts.params.n_variations,
                    "Variations sub-sampled per identity before pairing")
        ->capture_default_str();
    cmd->add_option("--mated-pairs", opts.params.n_mated_pairs, "Mated pairs per identity")
        ->capture_default_str();
    cmd->add_option("--non-mated-pairs", opts.params.n_non_mated_pairs,
                    "Non-mated pairs per identity")
        ->capture_default_str();
    cmd->add_option("--bins", opts.params.bin_count, "Histogram bin count over [0, 1]")
        ->capture_default_str();
    cmd->add_option("--group-by", opts.group_by, "Demographic breakdown")
        ->check(CLI::IsMember({"ethnicity", "gender", "ethnicity-gender"}));
    cmd->add_flag("--per-identity", opts.params.per_identity,
                  "Add one breakdown row per identity to the report");
    cmd->add_flag("--distance-axis", opts.params.distance_axis,
                  "Histogram the distance axis 1-s instead of similarity");
    cmd->add_option("--output", opts.output_dir, "Directory for report and CSV sidecars")
        ->capture_default_str();
    cmd->add_option("--threads", opts.params.threads,
                    "Worker threads (0 = hardware); output is identical either way")
        ->capture_default_str();
    cmd->add_flag("--json", opts.json_to_stdout, "Print the JSON report to stdout");
}

EvaluationParams finalize_params(CommonOptions& opts) {
    opts.params.seed = opts.seed_given ? opts.seed : seed_from_env_or(opts.seed);
    if (opts.group_by == "ethnicity")
        opts.params.group_by = GroupKey::Ethnicity;
    else if (opts.group_by == "gender")
        opts.params.group_by = GroupKey::Gender;
    else if (opts.group_by == "ethnicity-gender")
        opts.params.group_by = GroupKey::EthnicityGender;
    return opts.params;
}

void write_sidecars(const fs::path& dir, const EvaluationResult& result,
                    const std::string& prefix = "") {
    const auto& p = result.params;
    write_csv(dir / (prefix + "mated_hist.csv"), [&](std::ostream& out) {
        write_histogram_csv(out, score_histogram(result.mated, p.bin_count, p.distance_axis));
    });
    write_csv(dir / (prefix + "nonmated_hist.csv"), [&](std::ostream& out) {
        write_histogram_csv(out, score_histogram(result.non_mated, p.bin_count, p.distance_axis));
    });
    write_csv(dir / (prefix + "roc.csv"),
              [&](std::ostream& out) { write_roc_csv(out, result.verification.roc); });
    write_csv(dir / (prefix + "pairs_audit.csv"),
              [&](std::ostream& out) { write_pairs_csv(out, result.pairs, result.pair_scores); });
}

int cmd_evaluate(const std::string& dataset_path, CommonOptions& opts) {
    const auto params = finalize_params(opts);
    const auto dataset = load_dataset(dataset_path);
    auto result = evaluate_dataset(dataset, params);

    const fs::path dir(opts.output_dir);
    write_file(dir / "report.json", report_json(result));
    write_sidecars(dir, result);

    if (opts.json_to_stdout)
        std::cout << report_json(result);
    else
        render_table(std::cout, result);
    return 0;
}

template <typename Fn>
auto with_dataset_context(const std::string& which, const std::string& path, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.code(), which + " dataset '" + path + "': " + e.message());
    }
}

int cmd_compare(const std::string& candidate_path, const std::string& reference_path,
                CommonOptions& opts) {
    const auto params = finalize_params(opts);
    const auto candidate_dataset = with_dataset_context(
        "candidate", candidate_path, [&] { return load_dataset(candidate_path); });
    const auto reference_dataset = with_dataset_context(
        "reference", reference_path, [&] { return load_dataset(reference_path); });

    auto candidate = with_dataset_context("candidate", candidate_path, [&] {
        return evaluate_dataset(candidate_dataset, params);
    });
    auto reference = with_dataset_context("reference", reference_path, [&] {
        return evaluate_dataset(reference_dataset, params);
    });
    attach_kl(candidate, reference);

    const fs::path dir(opts.output_dir);
    write_file(dir / "report.json", comparison_json(candidate, reference));
    write_sidecars(dir, candidate, "candidate_");
    write_sidecars(dir, reference, "reference_");

    if (opts.json_to_stdout) {
        std::cout << comparison_json(candidate, reference);
    } else {
        std::cout << "== reference ==\n";
        render_table(std::cout, reference);
        std::cout << "== candidate ==\n";
        render_table(std::cout, candidate);
    }
    return 0;
}

int cmd_roc(const std::string& dataset_path, CommonOptions& opts) {
    const auto params = finalize_params(opts);
    const auto dataset = load_dataset(dataset_path);
    const auto result = evaluate_dataset(dataset, params);

    const fs::path dir(opts.output_dir);
    write_csv(dir / "roc.csv",
              [&](std::ostream& out) { write_roc_csv(out, result.verification.roc); });
    write_file(dir / "eer.json", report_json(result));

    if (opts.json_to_stdout)
        std::cout << report_json(result);
    else
        render_table(std::cout, result);
    return 0;
}

struct SimulateOptions {
    SimulationConfig config;
    std::string plan_text;
    std::string config_file;
    std::string output_dir;
};

std::vector<DemographicPlanEntry> parse_plan(const std::string& text) {
    std::vector<DemographicPlanEntry> plan;
    std::stringstream stream(text);
    std::string entry;
    while (std::getline(stream, entry, ',')) {
        const auto first = entry.find(':');
        const auto second = entry.find(':', first + 1);
        if (first == std::string::npos || second == std::string::npos)
            raise(ErrorCode::InvalidPlan, "plan entry '" + entry + "' is not Ethnicity:Gender:count");
        DemographicPlanEntry parsed;
        parsed.ethnicity = parse_ethnicity(entry.substr(0, first));
        parsed.gender = parse_gender(entry.substr(first + 1, second - first - 1));
        try {
            parsed.count = static_cast<std::uint32_t>(std::stoul(entry.substr(second + 1)));
        } catch (const std::logic_error&) {
            raise(ErrorCode::InvalidPlan, "plan count in '" + entry + "' is not a number");
        }
        plan.push_back(parsed);
    }
    return plan;
}

void load_simulation_config(const std::string& path, SimulationConfig& config) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::MissingFile, "config '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
        if (doc.contains("name")) config.name = doc["name"].get<std::string>();
        if (doc.contains("identity_count"))
            config.identity_count = doc["identity_count"].get<std::uint32_t>();
        if (doc.contains("variations_per_identity"))
            config.variations_per_identity = doc["variations_per_identity"].get<std::uint32_t>();
        if (doc.contains("dimension")) config.dimension = doc["dimension"].get<std::uint32_t>();
        if (doc.contains("intra_spread")) config.intra_spread = doc["intra_spread"].get<double>();
        if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("demographic_plan")) {
            for (const auto& entry : doc["demographic_plan"]) {
                DemographicPlanEntry parsed;
                parsed.ethnicity = parse_ethnicity(entry.at("ethnicity").get<std::string>());
                parsed.gender = parse_gender(entry.at("gender").get<std::string>());
                parsed.count = entry.at("count").get<std::uint32_t>();
                config.demographic_plan.push_back(parsed);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::InvalidPlan, path + ": " + e.what());
    }
}

int cmd_simulate(SimulateOptions& opts, bool seed_given) {
    if (!seed_given) opts.config.seed = seed_from_env_or(opts.config.seed);
    if (!opts.plan_text.empty()) opts.config.demographic_plan = parse_plan(opts.plan_text);

    const auto dataset = simulate_dataset(opts.config);
    const fs::path manifest_path = fs::path(opts.output_dir) / "manifest.json";
    write_dataset(dataset, manifest_path);
    std::cout << "wrote " << manifest_path.string() << " (" << dataset.identity_count()
              << " identities, " << dataset.records().size() << " embeddings)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quality metrics for identity-labelled embedding datasets"};
    app.require_subcommand(1);

    CommonOptions eval_opts;
    std::string eval_dataset;
    auto* evaluate = app.add_subcommand(
        "evaluate", "Mated/non-mated score summaries, histograms, and EER for one dataset");
    evaluate->add_option("dataset", eval_dataset, "Path to manifest.json")->required();
    add_evaluation_options(evaluate, eval_opts);

    CommonOptions compare_opts;
    std::string compare_candidate, compare_reference;
    auto* compare = app.add_subcommand(
        "compare", "Evaluate two datasets and report KL divergence of candidate vs reference");
    compare->add_option("candidate", compare_candidate, "Candidate dataset manifest")->required();
    compare->add_option("reference", compare_reference, "Reference dataset manifest (acts as P)")
        ->required();
    add_evaluation_options(compare, compare_opts);

    CommonOptions roc_opts;
    std::string roc_dataset;
    auto* roc = app.add_subcommand("roc", "ROC curve CSV and EER report for one dataset");
    roc->add_option("dataset", roc_dataset, "Path to manifest.json")->required();
    add_evaluation_options(roc, roc_opts);

    SimulateOptions sim_opts;
    bool sim_seed_given = false;
    auto* simulate =
        app.add_subcommand("simulate", "Generate a deterministic synthetic embedding dataset");
    simulate->add_option("--output", sim_opts.output_dir, "Directory for manifest + embeddings")
        ->required();
    simulate->add_option("--name", sim_opts.config.name, "Dataset name")->capture_default_str();
    simulate->add_option("--identities", sim_opts.config.identity_count, "Identity count");
    simulate->add_option("--variations", sim_opts.config.variations_per_identity,
                         "Variations per identity");
    simulate->add_option("--dimension", sim_opts.config.dimension, "Embedding dimension");
    simulate->add_option("--intra-spread", sim_opts.config.intra_spread,
                         "Per-coordinate noise scale around each identity mean");
    simulate->add_option("--seed", sim_opts.config.seed, "RNG seed (BIOMEVAL_SEED is the fallback)")
        ->each([&sim_seed_given](const std::string&) { sim_seed_given = true; });
    simulate->add_option("--plan", sim_opts.plan_text,
                         "Demographic plan, e.g. EastAsian:Male:3,EastAsian:Female:3");
    simulate->add_option("--config", sim_opts.config_file,
                         "JSON config file; explicit flags override its fields");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) {
            if (!sim_opts.config_file.empty()) {
                SimulationConfig from_file;
                load_simulation_config(sim_opts.config_file, from_file);
                // flags given on the command line win over the file
                if (simulate->count("--name") == 0) sim_opts.config.name = from_file.name;
                if (simulate->count("--identities") == 0)
                    sim_opts.config.identity_count = from_file.identity_count;
                if (simulate->count("--variations") == 0)
                    sim_opts.config.variations_per_identity = from_file.variations_per_identity;
                if (simulate->count("--dimension") == 0)
                    sim_opts.config.dimension = from_file.dimension;
                if (simulate->count("--intra-spread") == 0)
                    sim_opts.config.intra_spread = from_file.intra_spread;
                if (simulate->count("--seed") == 0) {
                    sim_opts.config.seed = from_file.seed;
                    sim_seed_given = true;
                }
                if (sim_opts.plan_text.empty())
                    sim_opts.config.demographic_plan = from_file.demographic_plan;
            }
            return cmd_simulate(sim_opts, sim_seed_given);
        }
        if (evaluate->parsed()) return cmd_evaluate(eval_dataset, eval_opts);
        if (compare->parsed()) return cmd_compare(compare_candidate, compare_reference, compare_opts);
        if (roc->parsed()) return cmd_roc(roc_dataset, roc_opts);
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (...) {
        std::cerr << "internal error\n";
        return 3;
    }
}
