#include "evalab/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "evalab/version.hpp"

namespace evalab::io {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void bad(const std::string& msg) {
    throw ValidationError(msg);
}

const json& expect(const json& j, const char* key, const std::string& what) {
    auto it = j.find(key);
    if (it == j.end()) {
        bad(what + " is missing field '" + key + "'");
    }
    return *it;
}

std::vector<std::string> string_list(const json& j, const std::string& what) {
    if (!j.is_array()) {
        bad(what + " must be an array of strings");
    }
    std::vector<std::string> out;
    out.reserve(j.size());
    for (const auto& item : j) {
        if (!item.is_string()) {
            bad(what + " must contain strings only");
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

std::vector<double> number_list(const json& j, const std::string& what) {
    if (!j.is_array()) {
        bad(what + " must be an array of numbers");
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& item : j) {
        out.push_back(from_json_number(item, what));
    }
    return out;
}

/// Resolves "path indirection": a string where a document is expected loads
/// the referenced file.
json resolve(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_string()) {
        return j;
    }
    std::filesystem::path p = j.get<std::string>();
    if (p.is_relative() && !base_dir.empty()) {
        p = base_dir / p;
    }
    return load_json_file(p);
}

std::uint64_t seed_from_json(const json& j, const std::string& what) {
    if (j.is_number_unsigned()) {
        return j.get<std::uint64_t>();
    }
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(j.get<std::int64_t>());
    }
    bad(what + " must be a non-negative integer");
}

json rate_to_json(const RateEstimate& r) {
    json j;
    j["count"] = r.count;
    j["total"] = r.total;
    j["rate"] = to_json_number(r.rate);
    j["wilson95_lo"] = to_json_number(r.lo);
    j["wilson95_hi"] = to_json_number(r.hi);
    return j;
}

json stats_to_json(const ScoreStats& s) {
    json j;
    j["mean_finite"] = to_json_number(s.mean_finite);
    j["min"] = to_json_number(s.min);
    j["max_finite"] = to_json_number(s.max_finite);
    j["inf_count"] = s.inf_count;
    return j;
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') {
            out += '"';
        }
        out += ch;
    }
    out += '"';
    return out;
}

} // namespace

json to_json_number(double v) {
    if (std::isinf(v)) {
        return json(v > 0 ? "inf" : "-inf");
    }
    return json(v);
}

double from_json_number(const json& j, const std::string& what) {
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf" || s == "Infinity") {
            return kInf;
        }
        if (s == "-inf" || s == "-Infinity") {
            return -kInf;
        }
    }
    bad(what + " must be a number or 'inf'");
}

std::string number_to_string(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string format_fixed(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12f", v);
    return buf;
}

json distribution_to_json(const DiscreteDistribution& d) {
    json j;
    j["schema_version"] = schema_version;
    j["labels"] = d.labels();
    json probs = json::array();
    for (double p : d.probs()) {
        probs.push_back(p);
    }
    j["probs"] = std::move(probs);
    return j;
}

DiscreteDistribution distribution_from_json(const json& raw, const std::filesystem::path& base_dir) {
    const json j = resolve(raw, base_dir);
    auto labels = string_list(expect(j, "labels", "distribution"), "distribution labels");
    auto probs = number_list(expect(j, "probs", "distribution"), "distribution probs");
    return DiscreteDistribution::make(std::move(labels), std::move(probs));
}

json dataset_to_json(const Dataset& s) {
    json j;
    j["schema_version"] = schema_version;
    j["points"] = s.point_labels();
    return j;
}

Dataset dataset_from_json(const json& raw, const DomainPtr& domain, const std::filesystem::path& base_dir) {
    const json j = resolve(raw, base_dir);
    auto points = string_list(expect(j, "points", "dataset"), "dataset points");
    return Dataset::from_labels(domain, points);
}

json family_to_json(const FunctionFamily& f) {
    json j;
    j["schema_version"] = schema_version;
    j["labels"] = f.domain()->labels;
    json rows = json::array();
    for (const auto& row : f.row_vectors()) {
        json r = json::array();
        for (double v : row) {
            r.push_back(v);
        }
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j;
}

FunctionFamily family_from_json(const json& raw, const std::filesystem::path& base_dir) {
    const json j = resolve(raw, base_dir);
    auto labels = string_list(expect(j, "labels", "family"), "family labels");
    const auto& rows_json = expect(j, "rows", "family");
    if (!rows_json.is_array()) {
        bad("family rows must be an array");
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(rows_json.size());
    for (const auto& row : rows_json) {
        rows.push_back(number_list(row, "family row"));
    }
    return FunctionFamily::make(std::move(labels), std::move(rows));
}

json test_function_to_json(const TestFunction& g) {
    json j;
    j["schema_version"] = schema_version;
    j["labels"] = g.domain()->labels;
    json values = json::array();
    for (double v : g.values()) {
        values.push_back(v);
    }
    j["values"] = std::move(values);
    return j;
}

TestFunction test_function_from_json(const json& raw, const std::filesystem::path& base_dir) {
    const json j = resolve(raw, base_dir);
    auto labels = string_list(expect(j, "labels", "test function"), "test function labels");
    auto values = number_list(expect(j, "values", "test function"), "test function values");
    return TestFunction::make(std::move(labels), std::move(values));
}

json score_spec_to_json(const ScoreSpec& s) {
    json j;
    j["schema_version"] = schema_version;
    switch (s.kind) {
    case ScoreSpec::Kind::Nll:
        j["kind"] = "nll";
        break;
    case ScoreSpec::Kind::EmpiricalIpm:
        j["kind"] = "empirical_ipm";
        j["family"] = family_to_json(*s.family);
        break;
    case ScoreSpec::Kind::ScheffeIpm:
        j["kind"] = "scheffe_ipm";
        j["family"] = family_to_json(*s.family);
        break;
    case ScoreSpec::Kind::Coverage:
        j["kind"] = "coverage";
        j["N"] = s.coverage_n;
        break;
    case ScoreSpec::Kind::FixedTest:
        j["kind"] = "fixed_test";
        j["g"] = test_function_to_json(*s.g);
        break;
    }
    return j;
}

ScoreSpec score_spec_from_json(const json& raw, const std::filesystem::path& base_dir) {
    const json j = resolve(raw, base_dir);
    const auto kind = expect(j, "kind", "score spec").get<std::string>();
    if (kind == "nll") {
        return ScoreSpec::nll();
    }
    if (kind == "empirical_ipm") {
        return ScoreSpec::empirical_ipm(family_from_json(expect(j, "family", "score spec"), base_dir));
    }
    if (kind == "scheffe_ipm") {
        return ScoreSpec::scheffe_ipm(family_from_json(expect(j, "family", "score spec"), base_dir));
    }
    if (kind == "coverage") {
        return ScoreSpec::coverage(from_json_number(expect(j, "N", "score spec"), "coverage N"));
    }
    if (kind == "fixed_test") {
        return ScoreSpec::fixed_test(test_function_from_json(expect(j, "g", "score spec"), base_dir));
    }
    bad("unknown score kind: " + kind);
}

json metric_spec_to_json(const MetricSpec& m) {
    json j;
    switch (m.kind) {
    case MetricSpec::Kind::Tv:
        j["kind"] = "tv";
        break;
    case MetricSpec::Kind::Kl:
        j["kind"] = "kl";
        break;
    case MetricSpec::Kind::Renyi:
        j["kind"] = "renyi";
        j["alpha"] = m.alpha;
        break;
    case MetricSpec::Kind::Hellinger2:
        j["kind"] = "hellinger2";
        break;
    case MetricSpec::Kind::Coverage:
        j["kind"] = "coverage";
        j["N"] = m.coverage_n;
        break;
    case MetricSpec::Kind::RestrictedKl:
        j["kind"] = "restricted_kl";
        j["beta"] = m.beta;
        break;
    case MetricSpec::Kind::Ipm:
        j["kind"] = "ipm";
        j["family"] = family_to_json(*m.family);
        break;
    case MetricSpec::Kind::FixedTest:
        j["kind"] = "fixed_test";
        j["g"] = test_function_to_json(*m.g);
        break;
    }
    return j;
}

MetricSpec metric_spec_from_json(const json& raw, const std::filesystem::path& base_dir) {
    const json j = resolve(raw, base_dir);
    const auto kind = expect(j, "kind", "metric spec").get<std::string>();
    if (kind == "tv") {
        return MetricSpec::tv();
    }
    if (kind == "kl") {
        return MetricSpec::kl();
    }
    if (kind == "renyi") {
        return MetricSpec::renyi(from_json_number(expect(j, "alpha", "metric spec"), "alpha"));
    }
    if (kind == "hellinger2") {
        return MetricSpec::hellinger2();
    }
    if (kind == "coverage") {
        return MetricSpec::coverage(from_json_number(expect(j, "N", "metric spec"), "coverage N"));
    }
    if (kind == "restricted_kl") {
        return MetricSpec::restricted_kl(from_json_number(expect(j, "beta", "metric spec"), "beta"));
    }
    if (kind == "ipm") {
        return MetricSpec::ipm(family_from_json(expect(j, "family", "metric spec"), base_dir));
    }
    if (kind == "fixed_test") {
        return MetricSpec::fixed_test(test_function_from_json(expect(j, "g", "metric spec"), base_dir));
    }
    bad("unknown metric kind: " + kind);
}

json selector_to_json(const GroundTruthSelector& s) {
    json j;
    if (s.kind == GroundTruthSelector::Kind::Fixed) {
        j["kind"] = "fixed";
        j["q"] = distribution_to_json(s.options.front());
    } else {
        j["kind"] = "uniform_over";
        json opts = json::array();
        for (const auto& opt : s.options) {
            opts.push_back(distribution_to_json(opt));
        }
        j["options"] = std::move(opts);
    }
    return j;
}

GroundTruthSelector selector_from_json(const json& raw, const std::filesystem::path& base_dir) {
    const json j = resolve(raw, base_dir);
    const auto kind = expect(j, "kind", "selector").get<std::string>();
    if (kind == "fixed") {
        return GroundTruthSelector::fixed(distribution_from_json(expect(j, "q", "selector"), base_dir));
    }
    if (kind == "uniform_over") {
        const auto& opts = expect(j, "options", "selector");
        if (!opts.is_array() || opts.empty()) {
            bad("selector options must be a non-empty array");
        }
        std::vector<DiscreteDistribution> options;
        options.reserve(opts.size());
        for (const auto& opt : opts) {
            options.push_back(distribution_from_json(opt, base_dir));
        }
        return GroundTruthSelector::uniform_over(std::move(options));
    }
    bad("unknown selector kind: " + kind);
}

json trial_config_to_json(const TrialConfig& c) {
    json j;
    j["schema_version"] = schema_version;
    j["q1"] = distribution_to_json(c.q1);
    j["q2"] = distribution_to_json(c.q2);
    j["selector"] = selector_to_json(c.selector);
    j["metric"] = metric_spec_to_json(c.metric);
    j["score"] = score_spec_to_json(c.score);
    j["m"] = c.m;
    j["trials"] = c.trials;
    j["c"] = c.c;
    j["eps"] = c.eps;
    j["master_seed"] = c.master_seed;
    return j;
}

TrialConfig trial_config_from_json(const json& raw, const std::filesystem::path& base_dir) {
    const json j = resolve(raw, base_dir);
    TrialConfig c{distribution_from_json(expect(j, "q1", "trial config"), base_dir),
                  distribution_from_json(expect(j, "q2", "trial config"), base_dir),
                  selector_from_json(expect(j, "selector", "trial config"), base_dir),
                  metric_spec_from_json(expect(j, "metric", "trial config"), base_dir),
                  score_spec_from_json(expect(j, "score", "trial config"), base_dir),
                  expect(j, "m", "trial config").get<std::uint64_t>(),
                  expect(j, "trials", "trial config").get<std::uint64_t>(),
                  from_json_number(expect(j, "c", "trial config"), "c"),
                  from_json_number(expect(j, "eps", "trial config"), "eps"),
                  seed_from_json(expect(j, "master_seed", "trial config"), "master_seed")};
    c.validate();
    return c;
}

json bundle_to_json(const ConstructionBundle& b) {
    json j;
    j["schema_version"] = schema_version;
    j["recipe"] = b.recipe;
    json params;
    for (const auto& [key, value] : b.parameters) {
        params[key] = value;
    }
    j["parameters"] = std::move(params);
    json dists;
    if (b.qstar) {
        dists["qstar"] = distribution_to_json(*b.qstar);
    }
    if (b.q1) {
        dists["q1"] = distribution_to_json(*b.q1);
    }
    if (b.q2) {
        dists["q2"] = distribution_to_json(*b.q2);
    }
    if (b.q3) {
        dists["q3"] = distribution_to_json(*b.q3);
    }
    j["distributions"] = std::move(dists);
    if (b.g) {
        j["g"] = test_function_to_json(*b.g);
    }
    json facts = json::array();
    for (const auto& fact : b.facts) {
        json f;
        f["id"] = fact.id;
        f["description"] = fact.description;
        f["kind"] = fact.kind == AnalyticFact::Bound::Exact   ? "exact"
                    : fact.kind == AnalyticFact::Bound::Lower ? "lower"
                                                              : "upper";
        f["value"] = to_json_number(fact.value);
        facts.push_back(std::move(f));
    }
    j["analytic_facts"] = std::move(facts);
    return j;
}

ConstructionBundle bundle_from_json(const json& raw, const std::filesystem::path& base_dir) {
    const json j = resolve(raw, base_dir);
    ConstructionBundle b;
    b.recipe = expect(j, "recipe", "bundle").get<std::string>();
    for (const auto& [key, value] : expect(j, "parameters", "bundle").items()) {
        b.parameters.emplace_back(key, from_json_number(value, "bundle parameter " + key));
    }
    const auto& dists = expect(j, "distributions", "bundle");
    if (dists.contains("qstar")) {
        b.qstar = distribution_from_json(dists["qstar"], base_dir);
    }
    if (dists.contains("q1")) {
        b.q1 = distribution_from_json(dists["q1"], base_dir);
    }
    if (dists.contains("q2")) {
        b.q2 = distribution_from_json(dists["q2"], base_dir);
    }
    if (dists.contains("q3")) {
        b.q3 = distribution_from_json(dists["q3"], base_dir);
    }
    if (j.contains("g")) {
        b.g = test_function_from_json(j["g"], base_dir);
    }
    for (const auto& f : expect(j, "analytic_facts", "bundle")) {
        AnalyticFact fact;
        fact.id = expect(f, "id", "analytic fact").get<std::string>();
        fact.description = expect(f, "description", "analytic fact").get<std::string>();
        const auto kind = expect(f, "kind", "analytic fact").get<std::string>();
        if (kind == "exact") {
            fact.kind = AnalyticFact::Bound::Exact;
        } else if (kind == "lower") {
            fact.kind = AnalyticFact::Bound::Lower;
        } else if (kind == "upper") {
            fact.kind = AnalyticFact::Bound::Upper;
        } else {
            bad("unknown fact kind: " + kind);
        }
        fact.value = from_json_number(expect(f, "value", "analytic fact"), "fact value");
        b.facts.push_back(std::move(fact));
    }
    return b;
}

json trial_report_to_json(const TrialReport& r) {
    json j;
    j["schema_version"] = schema_version;
    j["config"] = trial_config_to_json(r.config);
    json rates;
    rates["implication_failure"] = rate_to_json(r.implication_failure);
    rates["misrank"] = rate_to_json(r.misrank);
    rates["tie"] = rate_to_json(r.tie);
    rates["prefer_q1"] = rate_to_json(r.prefer_q1);
    j["rates"] = std::move(rates);
    json per_gt = json::array();
    for (const auto& [f1, f2] : r.metric_by_ground_truth) {
        json entry;
        entry["metric_q1"] = to_json_number(f1);
        entry["metric_q2"] = to_json_number(f2);
        per_gt.push_back(std::move(entry));
    }
    j["metric_by_ground_truth"] = std::move(per_gt);
    json stats;
    stats["q1"] = stats_to_json(r.score1);
    stats["q2"] = stats_to_json(r.score2);
    j["score_stats"] = std::move(stats);
    return j;
}

json probe_report_to_json(const ProbeReport& r) {
    json j;
    j["schema_version"] = schema_version;
    j["delta"] = r.delta;
    if (r.m_star) {
        j["m_star"] = *r.m_star;
    } else {
        j["m_star"] = nullptr;
    }
    json sweep = json::array();
    for (const auto& entry : r.sweep) {
        json e;
        e["m"] = entry.m;
        e["failure"] = rate_to_json(entry.failure);
        sweep.push_back(std::move(e));
    }
    j["sweep"] = std::move(sweep);
    return j;
}

std::string trial_rows_to_csv(const TrialReport& r) {
    std::string out = "trial,ground_truth,score_q1,score_q2,metric_q1,metric_q2,"
                      "implication_failure,misrank,tie\n";
    for (const auto& row : r.rows) {
        out += std::to_string(row.trial);
        out += ',';
        out += csv_quote("gt" + std::to_string(row.ground_truth));
        out += ',';
        out += number_to_string(row.score1);
        out += ',';
        out += number_to_string(row.score2);
        out += ',';
        out += number_to_string(row.metric1);
        out += ',';
        out += number_to_string(row.metric2);
        out += ',';
        out += row.implication_failure ? '1' : '0';
        out += ',';
        out += row.misrank ? '1' : '0';
        out += ',';
        out += row.tie ? '1' : '0';
        out += '\n';
    }
    return out;
}

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        bad("cannot open file: " + path.string());
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        bad("malformed JSON in " + path.string());
    }
    return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        bad("cannot write file: " + path.string());
    }
    out << text;
}

json manifest_to_json(const RunManifest& m) {
    json j;
    j["schema_version"] = schema_version;
    j["tool"] = "evalab";
    j["version"] = version_string;
    j["command"] = m.command;
    j["inputs"] = m.inputs;
    json params;
    for (const auto& [key, value] : m.parameters) {
        params[key] = value;
    }
    j["parameters"] = std::move(params);
    json seed;
    seed["config"] = m.config_seed ? json(*m.config_seed) : json(nullptr);
    seed["env"] = m.env_seed ? json(*m.env_seed) : json(nullptr);
    seed["flag"] = m.flag_seed ? json(*m.flag_seed) : json(nullptr);
    seed["resolved"] = m.resolved_seed ? json(*m.resolved_seed) : json(nullptr);
    j["seed"] = std::move(seed);
    j["outputs"] = m.outputs;
    return j;
}

void write_manifest(const RunManifest& m, const std::filesystem::path& next_to_output) {
    auto path = next_to_output;
    path += ".manifest.json";
    write_text_file(path, manifest_to_json(m).dump(2) + "\n");
}

} // namespace evalab::io
