#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "evalab/constructions.hpp"
#include "evalab/distribution.hpp"
#include "evalab/experiments.hpp"
#include "evalab/function_family.hpp"
#include "evalab/scores.hpp"

namespace evalab::io {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

/// "inf" is the literal serialization of +infinity in every document.
json to_json_number(double v);
double from_json_number(const json& j, const std::string& what);

/// Shortest round-trip decimal form, "inf" for +infinity. Used in CSV cells.
std::string number_to_string(double v);

/// Fixed 12-decimal form, "inf" for +infinity. Used on standard output.
std::string format_fixed(double v);

// Document encoders. Every document carries schema_version.
json distribution_to_json(const DiscreteDistribution& d);
json dataset_to_json(const Dataset& s);
json family_to_json(const FunctionFamily& f);
json test_function_to_json(const TestFunction& g);
json score_spec_to_json(const ScoreSpec& s);
json metric_spec_to_json(const MetricSpec& m);
json selector_to_json(const GroundTruthSelector& s);
json trial_config_to_json(const TrialConfig& c);
json bundle_to_json(const ConstructionBundle& b);
json trial_report_to_json(const TrialReport& r);
json probe_report_to_json(const ProbeReport& r);

// Decoders. A sub-document may be given inline or as a path string relative
// to base_dir; path indirection is resolved before decoding.
DiscreteDistribution distribution_from_json(const json& j, const std::filesystem::path& base_dir = {});
Dataset dataset_from_json(const json& j, const DomainPtr& domain, const std::filesystem::path& base_dir = {});
FunctionFamily family_from_json(const json& j, const std::filesystem::path& base_dir = {});
TestFunction test_function_from_json(const json& j, const std::filesystem::path& base_dir = {});
ScoreSpec score_spec_from_json(const json& j, const std::filesystem::path& base_dir = {});
MetricSpec metric_spec_from_json(const json& j, const std::filesystem::path& base_dir = {});
GroundTruthSelector selector_from_json(const json& j, const std::filesystem::path& base_dir = {});
TrialConfig trial_config_from_json(const json& j, const std::filesystem::path& base_dir = {});
ConstructionBundle bundle_from_json(const json& j, const std::filesystem::path& base_dir = {});

/// One CSV row per trial, fixed header, RFC-style quoting.
std::string trial_rows_to_csv(const TrialReport& r);

/// Reads and parses a JSON document; throws ValidationError on failure.
json load_json_file(const std::filesystem::path& path);

/// Writes text, creating parent directories as needed.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Provenance sidecar written next to every CLI output file.
struct RunManifest {
    std::string command;
    std::vector<std::string> inputs;
    std::vector<std::pair<std::string, std::string>> parameters;
    std::optional<std::uint64_t> config_seed;
    std::optional<std::uint64_t> env_seed;
    std::optional<std::uint64_t> flag_seed;
    std::optional<std::uint64_t> resolved_seed;
    std::vector<std::string> outputs;
};

json manifest_to_json(const RunManifest& m);
void write_manifest(const RunManifest& m, const std::filesystem::path& next_to_output);

} // namespace evalab::io
