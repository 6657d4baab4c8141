// evalab -- command-line front end for the evaluability laboratory.
//
// Subcommands: metric, score, dims, construct, trial, probe. All file inputs
// and outputs are JSON documents (see the library's io module); every output
// file gets a <name>.manifest.json sidecar recording how it was produced.
//
// Exit codes: 0 success, 2 invalid input, 3 infeasible computation.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "evalab/constructions.hpp"
#include "evalab/experiments.hpp"
#include "evalab/io.hpp"
#include "evalab/version.hpp"

namespace fs = std::filesystem;
using namespace evalab;

namespace {

fs::path base_dir_of(const std::string& file) {
    return fs::path(file).parent_path();
}

DiscreteDistribution load_distribution(const std::string& file) {
    return io::distribution_from_json(io::load_json_file(file), base_dir_of(file));
}

/// `dims` accepts either a family file or a builder name such as
/// all_binary_4, thresholds_5, singletons_3, no_taxonomy_2_3.
FunctionFamily load_family_or_builtin(const std::string& spec) {
    if (fs::exists(spec)) {
        return io::family_from_json(io::load_json_file(spec), base_dir_of(spec));
    }
    auto tail_number = [](const std::string& s, const std::string& prefix) -> std::optional<std::size_t> {
        if (s.rfind(prefix, 0) != 0) {
            return std::nullopt;
        }
        try {
            std::size_t pos = 0;
            const auto n = std::stoul(s.substr(prefix.size()), &pos);
            if (prefix.size() + pos != s.size()) {
                return std::nullopt;
            }
            return n;
        } catch (...) {
            return std::nullopt;
        }
    };
    if (auto n = tail_number(spec, "all_binary_")) {
        return FunctionFamily::all_binary(indexed_labels("x", *n));
    }
    if (auto n = tail_number(spec, "threshold_")) {
        return FunctionFamily::thresholds(indexed_labels("x", *n));
    }
    if (auto n = tail_number(spec, "thresholds_")) {
        return FunctionFamily::thresholds(indexed_labels("x", *n));
    }
    if (auto n = tail_number(spec, "singleton_")) {
        return FunctionFamily::singletons(indexed_labels("x", *n));
    }
    if (auto n = tail_number(spec, "singletons_")) {
        return FunctionFamily::singletons(indexed_labels("x", *n));
    }
    if (spec.rfind("no_taxonomy_", 0) == 0) {
        const auto rest = spec.substr(12);
        const auto sep = rest.find('_');
        if (sep != std::string::npos) {
            try {
                return FunctionFamily::no_taxonomy(std::stoul(rest.substr(0, sep)),
                                                   std::stoul(rest.substr(sep + 1)));
            } catch (const Error&) {
                throw;
            } catch (...) {
            }
        }
    }
    throw ValidationError("no such family file or builder name: " + spec);
}

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("EVALAB_SEED");
    if (raw == nullptr || *raw == '\0') {
        return std::nullopt;
    }
    try {
        return std::stoull(raw);
    } catch (...) {
        throw ValidationError("EVALAB_SEED is not a valid seed");
    }
}

struct SeedResolution {
    std::optional<std::uint64_t> config, env, flag;
    std::uint64_t resolved = 0;
};

/// --seed beats EVALAB_SEED beats the config's master_seed.
SeedResolution resolve_seed(std::uint64_t config_seed, const std::optional<std::uint64_t>& flag) {
    SeedResolution r;
    r.config = config_seed;
    r.env = env_seed();
    r.flag = flag;
    r.resolved = flag ? *flag : (r.env ? *r.env : config_seed);
    return r;
}

void fill_seed(io::RunManifest& manifest, const SeedResolution& seed) {
    manifest.config_seed = seed.config;
    manifest.env_seed = seed.env;
    manifest.flag_seed = seed.flag;
    manifest.resolved_seed = seed.resolved;
}

int cmd_metric(const std::string& kind, const std::string& p_file, const std::string& q_file,
               std::optional<double> alpha, std::optional<double> n, std::optional<double> beta,
               const std::string& family_file, const std::string& g_file) {
    auto p = load_distribution(p_file);
    auto q = load_distribution(q_file);
    auto need = [&](std::optional<double> v, const char* flag) {
        if (!v) {
            throw ValidationError(std::string("this metric needs ") + flag);
        }
        return *v;
    };
    double value = 0.0;
    if (kind == "tv") {
        value = tv(p, q);
    } else if (kind == "kl") {
        value = kl(p, q);
    } else if (kind == "renyi") {
        value = renyi(p, q, need(alpha, "--alpha"));
    } else if (kind == "hellinger2") {
        value = hellinger_sq(p, q);
    } else if (kind == "coverage") {
        value = coverage_profile(p, q, need(n, "--n"));
    } else if (kind == "rkl") {
        value = restricted_kl(p, q, need(beta, "--beta"));
    } else if (kind == "ipm") {
        if (family_file.empty()) {
            throw ValidationError("--kind ipm needs --family");
        }
        value = ipm_exact(p, q, load_family_or_builtin(family_file)).value;
    } else if (kind == "fixed") {
        if (g_file.empty()) {
            throw ValidationError("--kind fixed needs --g");
        }
        auto g = io::test_function_from_json(io::load_json_file(g_file), base_dir_of(g_file));
        value = fixed_test_metric(p, q, g);
    } else {
        throw ValidationError("unknown metric kind: " + kind);
    }
    std::cout << io::format_fixed(value) << "\n";
    return 0;
}

int cmd_score(const std::string& spec_file, const std::string& q_file, const std::string& sample_file) {
    const auto spec_json = io::load_json_file(spec_file);
    const auto spec = io::score_spec_from_json(spec_json, base_dir_of(spec_file));
    auto q = load_distribution(q_file);
    auto s = io::dataset_from_json(io::load_json_file(sample_file), q.domain(), base_dir_of(sample_file));

    double value = 0.0;
    if (spec.kind == ScoreSpec::Kind::ScheffeIpm) {
        // the Scheffe score is defined against a candidate pair; the spec
        // document carries it
        if (!spec_json.contains("q1") || !spec_json.contains("q2")) {
            throw ValidationError("a scheffe_ipm spec needs embedded candidates q1 and q2");
        }
        auto q1 = io::distribution_from_json(spec_json["q1"], base_dir_of(spec_file));
        auto q2 = io::distribution_from_json(spec_json["q2"], base_dir_of(spec_file));
        value = evaluate_score(spec, q, s, q1, q2);
    } else {
        value = evaluate_score(spec, q, s, q, q);
    }
    std::cout << io::format_fixed(value) << "\n";
    return 0;
}

int cmd_dims(const std::string& family_spec, std::optional<double> gamma) {
    auto family = load_family_or_builtin(family_spec);
    if (family.is_binary()) {
        std::cout << "vc=" << vc_dimension(family) << "\n";
    }
    if (gamma) {
        std::cout << "fat=" << fat_shattering_dim(family, *gamma) << "\n";
    } else if (!family.is_binary()) {
        throw ValidationError("a real-valued family needs --gamma");
    }
    return 0;
}

int cmd_construct(const std::string& recipe, const std::string& params_file, const std::string& out_file) {
    const auto params = io::load_json_file(params_file);
    auto get = [&](const char* key) {
        return io::from_json_number(params.contains(key) ? params[key] : io::json(),
                                    std::string("construct parameter ") + key);
    };
    ConstructionBundle bundle = [&] {
        if (recipe == "renyi") {
            return renyi_pair(get("alpha"), get("M"));
        }
        if (recipe == "kl") {
            return kl_pair(get("M"));
        }
        if (recipe == "coverage") {
            return coverage_triple(get("N"), get("gamma"), get("eta"));
        }
        if (recipe == "fixedtest") {
            return fixed_test_pair(get("B"), get("g2"));
        }
        if (recipe == "tvnll") {
            std::optional<double> m;
            if (params.contains("M")) {
                m = get("M");
            }
            return tv_nll_triple(get("c"), get("eps"), m);
        }
        if (recipe == "rkl") {
            return restricted_kl_triple(get("beta"), get("M"));
        }
        throw ValidationError("unknown recipe: " + recipe);
    }();

    io::write_text_file(out_file, io::bundle_to_json(bundle).dump(2) + "\n");
    io::RunManifest manifest;
    manifest.command = "construct";
    manifest.inputs = {params_file};
    manifest.parameters = {{"recipe", recipe}};
    for (const auto& [key, value] : bundle.parameters) {
        manifest.parameters.emplace_back(key, io::number_to_string(value));
    }
    manifest.outputs = {out_file};
    io::write_manifest(manifest, out_file);
    return 0;
}

int cmd_trial(const std::string& config_file, const std::string& report_file, const std::string& csv_file,
              unsigned threads, std::optional<std::uint64_t> seed_flag) {
    auto config = io::trial_config_from_json(io::load_json_file(config_file), base_dir_of(config_file));
    const auto seed = resolve_seed(config.master_seed, seed_flag);
    config.master_seed = seed.resolved;

    const auto report = run_trials(config, threads);
    io::write_text_file(report_file, io::trial_report_to_json(report).dump(2) + "\n");
    io::write_text_file(csv_file, io::trial_rows_to_csv(report));

    io::RunManifest manifest;
    manifest.command = "trial";
    manifest.inputs = {config_file};
    manifest.parameters = {{"threads", std::to_string(threads)}};
    fill_seed(manifest, seed);
    manifest.outputs = {report_file, csv_file};
    io::write_manifest(manifest, report_file);
    io::write_manifest(manifest, csv_file);
    return 0;
}

int cmd_probe(const std::string& config_file, const std::string& grid_text, const std::string& out_file,
              unsigned threads, std::optional<std::uint64_t> seed_flag, std::optional<std::string> mode_flag,
              std::optional<double> delta_flag) {
    const auto config_json = io::load_json_file(config_file);
    auto config = io::trial_config_from_json(config_json, base_dir_of(config_file));
    const auto seed = resolve_seed(config.master_seed, seed_flag);
    config.master_seed = seed.resolved;

    std::vector<std::uint64_t> grid;
    std::string token;
    for (char ch : grid_text + ",") {
        if (ch == ',' || ch == ' ') {
            if (!token.empty()) {
                try {
                    grid.push_back(std::stoull(token));
                } catch (...) {
                    throw ValidationError("bad grid entry: " + token);
                }
                token.clear();
            }
        } else {
            token += ch;
        }
    }

    std::string mode_text = mode_flag.value_or(
        config_json.contains("probe_mode") ? config_json["probe_mode"].get<std::string>() : "evaluability");
    ProbeMode mode;
    if (mode_text == "evaluability") {
        mode = ProbeMode::Evaluability;
    } else if (mode_text == "estimability") {
        mode = ProbeMode::Estimability;
    } else {
        throw ValidationError("unknown probe mode: " + mode_text);
    }
    const double delta = delta_flag.value_or(
        config_json.contains("probe_delta") ? io::from_json_number(config_json["probe_delta"], "probe_delta")
                                            : 0.05);

    const auto report = sample_complexity_probe(mode, config, delta, grid, threads);
    io::write_text_file(out_file, io::probe_report_to_json(report).dump(2) + "\n");

    io::RunManifest manifest;
    manifest.command = "probe";
    manifest.inputs = {config_file};
    manifest.parameters = {{"m_grid", grid_text},
                           {"mode", mode_text},
                           {"delta", io::number_to_string(delta)},
                           {"threads", std::to_string(threads)}};
    fill_seed(manifest, seed);
    manifest.outputs = {out_file};
    io::write_manifest(manifest, out_file);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"evalab: metrics, scores, adversarial constructions and Monte-Carlo "
                 "evaluability experiments over finite discrete distributions"};
    app.set_version_flag("--version", version_string);
    app.require_subcommand(1);

    // metric
    auto* metric = app.add_subcommand("metric", "evaluate a divergence or test-based metric");
    std::string kind, p_file, q_file, family_file, g_file;
    std::optional<double> alpha, cov_n, beta;
    metric->add_option("--kind", kind, "tv|kl|renyi|hellinger2|coverage|rkl|ipm|fixed")->required();
    metric->add_option("--p", p_file, "first distribution file")->required();
    metric->add_option("--q", q_file, "second distribution file")->required();
    metric->add_option("--alpha", alpha, "Renyi order");
    metric->add_option("--n", cov_n, "coverage threshold N");
    metric->add_option("--beta", beta, "restricted-KL beta");
    metric->add_option("--family", family_file, "function family file (ipm)");
    metric->add_option("--g", g_file, "test function file (fixed)");

    // score
    auto* score = app.add_subcommand("score", "evaluate a score function on a sample");
    std::string spec_file, model_file, sample_file;
    score->add_option("--spec", spec_file, "score spec file")->required();
    score->add_option("--q", model_file, "model distribution file")->required();
    score->add_option("--sample", sample_file, "evaluation sample file")->required();

    // dims
    auto* dims = app.add_subcommand("dims", "VC and fat-shattering dimensions of a family");
    std::string family_spec;
    std::optional<double> gamma;
    dims->add_option("--family", family_spec, "family file or builder name (e.g. all_binary_4)")->required();
    dims->add_option("--gamma", gamma, "fat-shattering margin");

    // construct
    auto* construct = app.add_subcommand("construct", "build an adversarial construction bundle");
    std::string recipe, params_file, bundle_out;
    construct->add_option("--recipe", recipe, "renyi|kl|coverage|fixedtest|tvnll|rkl")->required();
    construct->add_option("--params", params_file, "recipe parameter file")->required();
    construct->add_option("--out", bundle_out, "bundle output file")->required();

    // trial
    auto* trial = app.add_subcommand("trial", "run a Monte-Carlo evaluability experiment");
    std::string trial_config, report_out, csv_out;
    unsigned trial_threads = 1;
    std::optional<std::uint64_t> trial_seed;
    trial->add_option("--config", trial_config, "trial config file")->required();
    trial->add_option("--out-report", report_out, "report output file")->required();
    trial->add_option("--out-csv", csv_out, "per-trial CSV output file")->required();
    trial->add_option("--threads", trial_threads, "worker count (never changes results)");
    trial->add_option("--seed", trial_seed, "master seed override");

    // probe
    auto* probe = app.add_subcommand("probe", "sweep failure rates over sample sizes");
    std::string probe_config, grid_text, probe_out;
    unsigned probe_threads = 1;
    std::optional<std::uint64_t> probe_seed;
    std::optional<std::string> probe_mode;
    std::optional<double> probe_delta;
    probe->add_option("--config", probe_config, "trial config file")->required();
    probe->add_option("--m-grid", grid_text, "comma-separated ascending sample sizes")->required();
    probe->add_option("--out", probe_out, "probe report output file")->required();
    probe->add_option("--threads", probe_threads, "worker count (never changes results)");
    probe->add_option("--seed", probe_seed, "master seed override");
    probe->add_option("--mode", probe_mode, "evaluability|estimability");
    probe->add_option("--delta", probe_delta, "target failure rate (default 0.05)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (metric->parsed()) {
            return cmd_metric(kind, p_file, q_file, alpha, cov_n, beta, family_file, g_file);
        }
        if (score->parsed()) {
            return cmd_score(spec_file, model_file, sample_file);
        }
        if (dims->parsed()) {
            return cmd_dims(family_spec, gamma);
        }
        if (construct->parsed()) {
            return cmd_construct(recipe, params_file, bundle_out);
        }
        if (trial->parsed()) {
            return cmd_trial(trial_config, report_out, csv_out, trial_threads, trial_seed);
        }
        if (probe->parsed()) {
            return cmd_probe(probe_config, grid_text, probe_out, probe_threads, probe_seed, probe_mode,
                             probe_delta);
        }
    } catch (const InfeasibleError& e) {
        std::cerr << "evalab: infeasible: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "evalab: error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
