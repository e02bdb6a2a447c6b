#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetlink/eval.hpp"
#include "hetlink/heuristics.hpp"
#include "hetlink/model.hpp"
#include "hetlink/training.hpp"

namespace hetlink {

using json = nlohmann::json;

struct DataConfig {
  std::string graph_path;
  std::string features_path;
  std::array<double, 3> split_ratio{0.8, 0.1, 0.1};
  std::uint64_t split_seed = 17;
};

struct RunConfig {
  DataConfig data;
  ModelSpec model;  // in_dim filled in after features load
  TrainConfig train;
  EvalConfig eval;
  std::string out_dir;
  std::vector<std::uint64_t> seeds{1};
};

// Parses and validates; the error message lists every violated field.
RunConfig parse_run_config(const json& j);
RunConfig load_run_config(const std::string& path);
json run_config_to_json(const RunConfig& cfg);

ModelSpec model_spec_from_json(const json& j);
json model_spec_to_json(const ModelSpec& spec);
TrainConfig train_config_from_json(const json& j);
EvalConfig eval_config_from_json(const json& j);

json eval_report_to_json(const EvalReport& rep);
EvalReport eval_report_from_json(const json& j);

json train_trace_to_json(const TrainTrace& trace);
void write_trace_csv(const TrainTrace& trace, const std::string& path);

// Minimal JSON-schema checker covering the subset the shipped schemas use:
// type, properties, required, items, enum, minimum, maximum. Returns a list
// of violations (empty when valid).
std::vector<std::string> validate_against_schema(const json& doc, const json& schema);

// Loads the named schema from the schema directory and throws InputError
// when the document does not validate.
void require_schema_valid(const json& doc, const std::string& schema_name);

// Schema directory resolution: HETLINK_SCHEMA_DIR env var, else the path
// baked at build time.
std::string schema_dir();

void write_json_file(const json& j, const std::string& path);
json read_json_file(const std::string& path);

// Machine-readable error envelope written by the CLI on failure.
json error_json(const std::string& type, const std::string& message);

std::string checksum_hex(std::uint64_t h);

}  // namespace hetlink
