#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hetlink/heuristics.hpp"
#include "hetlink/io_json.hpp"

namespace hetlink {

// Command entry points backing the CLI subcommands. They throw on failure;
// the CLI wrapper maps exceptions to a machine-readable error JSON and a
// nonzero exit code. Tests call them in-process.

struct SynthgenArgs {
  std::size_t n = 2000;
  // "gaussian:<dim>:<seed>" or a feature file path.
  std::string features = "gaussian:32:99";
  std::size_t n_quantiles = 50;
  std::size_t index = 0;
  double edge_subsample_rate = 1.0;
  std::uint64_t seed = 1;
  std::size_t pair_budget = 50'000'000;
  std::string out_prefix;
};

// Writes <prefix>.graph, <prefix>.featb, <prefix>.meta.json.
void cmd_synthgen(const SynthgenArgs& args);

struct SimstatsArgs {
  std::string graph_path;
  std::string features_path;
  std::size_t n_neg_samples = 100000;
  std::uint64_t seed = 3;
  double epsilon = 0.05;
  std::string out_dir;
};

// Writes simstats.json and sim_hist.csv (64 bins over [-1,1]).
void cmd_simstats(const SimstatsArgs& args);

// Trains per the config; writes checkpoint.hlpp, trace.json, trace.csv.
void cmd_train(const RunConfig& cfg);

// Evaluates a checkpoint on the test split; writes report.json.
void cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path);

// Same evaluation plus buckets.csv with the per-bucket grid.
void cmd_buckets(const RunConfig& cfg, const std::string& checkpoint_path);

// Bucket-grid difference of two reports, written as diff.csv.
void cmd_buckets_diff(const std::string& report_a, const std::string& report_b,
                      const std::string& out_csv);

// Heuristic baseline producing the same report.json schema as models.
void cmd_heuristic(const RunConfig& cfg, HeuristicKind method);

struct VerifyArgs {
  int theorem = 1;
  std::string out_dir;
  std::uint64_t seed = 1;
  std::size_t n_nodes = 400;
  double M = 0.5;        // fig2.csv threshold (theorem 1)
  double M1 = -0.3, M2 = 0.3;  // gated bounds (theorem 2)
};

// Writes thm<N>_report.json (+ fig2.csv for theorem 1). Returns true when
// every assertion passed.
bool cmd_verify(const VerifyArgs& args);

struct SweepMethod {
  bool is_heuristic = false;
  HeuristicKind heuristic = HeuristicKind::CN;
  EncoderKind encoder = EncoderKind::NoGNN;
  DecoderKind decoder = DecoderKind::MLP;

  std::string name() const;
};

struct SweepConfig {
  std::size_t n_nodes = 2000;
  std::string features = "gaussian:32:99";  // or file path
  std::size_t n_quantiles = 50;
  std::vector<std::size_t> indices;  // empty -> default 10-quantile sweep
  double edge_subsample_rate = 1.0;
  std::size_t pair_budget = 50'000'000;
  std::uint64_t graph_seed = 5;
  std::array<double, 3> split_ratio{0.8, 0.1, 0.1};
  std::uint64_t split_seed = 17;
  std::vector<SweepMethod> methods;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  ModelSpec model;      // defaults shared by learned methods
  TrainConfig train;
  EvalConfig eval;
  std::string out_dir;
};

SweepConfig parse_sweep_config(const json& j);

struct SweepCellResult {
  std::size_t graph_index = 0;   // position in the sweep (0..9)
  std::size_t quantile = 0;
  double realized_K = 0.0;
  std::string method;
  double metric_mean = 0.0;
  double metric_std = 0.0;
  std::vector<double> per_seed;
};

// Runs the graph x method x seed matrix; writes per-cell report.json files,
// table2_style.csv and ucurve.csv. Returns the aggregated cells.
std::vector<SweepCellResult> cmd_sweep(const SweepConfig& cfg);

// Resolves "gaussian:<dim>:<seed>" or a file path into features of size n.
FeatureMatrix resolve_features(const std::string& source, std::size_t n);

}  // namespace hetlink
