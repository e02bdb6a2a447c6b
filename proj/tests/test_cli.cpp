#include <doctest.h>

#include <filesystem>
#include <cstdlib>
#include <fstream>

#include "hetlink/commands.hpp"
#include "hetlink/common.hpp"
#include "hetlink/synthgen.hpp"

using namespace hetlink;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& sub = "") const {
    return sub.empty() ? path.string() : (path / sub).string();
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

RunConfig small_run_config(const TempDir& dir, const std::string& out_sub) {
  // A small pipeline: 120-node quantile graph at a positive index.
  SynthgenArgs sg;
  sg.n = 120;
  sg.features = "gaussian:8:21";
  sg.index = 49;
  sg.out_prefix = dir.str("data");
  if (!fs::exists(dir.str("data.graph"))) cmd_synthgen(sg);

  json j;
  j["data"] = {{"graph", dir.str("data.graph")},
               {"features", dir.str("data.featb")},
               {"split_ratio", {0.8, 0.1, 0.1}},
               {"split_seed", 5}};
  j["model"] = {{"encoder", "sage"}, {"decoder", "distmult"}, {"layers", 2}, {"hidden", 8}};
  j["train"] = {{"epochs", 15}, {"learning_rate", 0.01}, {"seed", 3}, {"eval_every", 5}};
  j["eval"] = {{"metric", "mrr"}, {"n_neg", 30}, {"seed", 11}};
  j["out_dir"] = dir.str(out_sub);
  return parse_run_config(j);
}

}  // namespace

TEST_CASE("synthgen writes graph, features and schema-valid metadata") {
  TempDir dir("hetlink_cli_sg");
  SynthgenArgs sg;
  sg.n = 100;
  sg.features = "gaussian:6:7";
  sg.index = 0;
  sg.out_prefix = dir.str("out");
  cmd_synthgen(sg);
  CHECK(fs::exists(dir.str("out.graph")));
  CHECK(fs::exists(dir.str("out.featb")));
  json meta = read_json_file(dir.str("out.meta.json"));
  require_schema_valid(meta, "meta.schema.json");
  CHECK(meta.at("edge_count").get<std::size_t>() == 99);  // 2% of 4950

  Graph g = load_graph(dir.str("out.graph"));
  CHECK(g.n_edges() == 99);
  FeatureMatrix fm = load_features(dir.str("out.featb"));
  CHECK(fm.n() == 100);
}

TEST_CASE("simstats emits schema-valid JSON and the histogram CSV") {
  TempDir dir("hetlink_cli_ss");
  SynthgenArgs sg;
  sg.n = 150;
  sg.features = "gaussian:8:9";
  sg.index = 49;
  sg.out_prefix = dir.str("d");
  cmd_synthgen(sg);

  SimstatsArgs ss;
  ss.graph_path = dir.str("d.graph");
  ss.features_path = dir.str("d.featb");
  ss.n_neg_samples = 5000;
  ss.out_dir = dir.str("stats");
  cmd_simstats(ss);
  json j = read_json_file(dir.str("stats/simstats.json"));
  require_schema_valid(j, "simstats.schema.json");
  CHECK(j.at("kind").get<std::string>() == "homophilic");
  CHECK(j.at("pos_histogram").size() == 64);
  const std::string csv = read_file(dir.str("stats/sim_hist.csv"));
  CHECK(csv.starts_with("bin_lo,bin_hi,pos_count,neg_count"));
}

TEST_CASE("train -> eval -> buckets pipeline produces schema-valid reports") {
  TempDir dir("hetlink_cli_pipe");
  RunConfig cfg = small_run_config(dir, "run");
  cmd_train(cfg);
  CHECK(fs::exists(dir.str("run/checkpoint.hlpp")));
  json trace = read_json_file(dir.str("run/trace.json"));
  require_schema_valid(trace, "trace.schema.json");
  CHECK(!trace.at("epoch_loss").empty());

  cmd_eval(cfg, dir.str("run/checkpoint.hlpp"));
  json report = read_json_file(dir.str("run/report.json"));
  require_schema_valid(report, "report.schema.json");
  const double overall = report.at("overall").get<double>();
  CHECK(overall > 0.0);
  CHECK(overall <= 1.0);

  cmd_buckets(cfg, dir.str("run/checkpoint.hlpp"));
  const std::string csv = read_file(dir.str("run/buckets.csv"));
  CHECK(csv.starts_with("deg_bucket,sim_bucket,value,count"));

  // Bucket counts sum to the test-edge count.
  std::size_t total = 0;
  for (const auto& c : report.at("buckets").at("count")) total += c.get<std::size_t>();
  Graph g = load_graph(dir.str("data.graph"));
  EdgeSplit split = split_edges(g, {0.8, 0.1, 0.1}, 5);
  CHECK(total == split.test.size());
}

TEST_CASE("pipeline reruns are byte-identical") {
  TempDir dir("hetlink_cli_det");
  RunConfig cfg_a = small_run_config(dir, "a");
  cmd_train(cfg_a);
  cmd_eval(cfg_a, dir.str("a/checkpoint.hlpp"));
  RunConfig cfg_b = small_run_config(dir, "b");
  cmd_train(cfg_b);
  cmd_eval(cfg_b, dir.str("b/checkpoint.hlpp"));
  CHECK(read_file(dir.str("a/report.json")) == read_file(dir.str("b/report.json")));
  CHECK(read_file(dir.str("a/checkpoint.hlpp")) == read_file(dir.str("b/checkpoint.hlpp")));
}

TEST_CASE("heuristic command emits the same report schema") {
  TempDir dir("hetlink_cli_heur");
  RunConfig cfg = small_run_config(dir, "h");
  cmd_heuristic(cfg, HeuristicKind::CN);
  json report = read_json_file(dir.str("h/report.json"));
  require_schema_valid(report, "report.schema.json");
  CHECK(report.at("metadata").at("model").get<std::string>() == "cn");
}

TEST_CASE("buckets diff marks missing cells") {
  TempDir dir("hetlink_cli_diff");
  RunConfig cfg = small_run_config(dir, "r1");
  cmd_train(cfg);
  cmd_eval(cfg, dir.str("r1/checkpoint.hlpp"));
  cmd_buckets_diff(dir.str("r1/report.json"), dir.str("r1/report.json"), dir.str("diff.csv"));
  const std::string csv = read_file(dir.str("diff.csv"));
  CHECK(csv.starts_with("deg_bucket,sim_bucket,diff,missing,count_a,count_b"));
}

TEST_CASE("eval on a missing checkpoint raises an input error") {
  TempDir dir("hetlink_cli_missing");
  RunConfig cfg = small_run_config(dir, "x");
  CHECK_THROWS_AS(cmd_eval(cfg, dir.str("nope.hlpp")), InputError);
}

TEST_CASE("config validation reports every violated field") {
  json j;
  j["data"] = {{"graph", ""}, {"split_ratio", {0.5, 0.2, 0.2}}};
  j["train"] = {{"epochs", 0}, {"learning_rate", -1.0}};
  j["seeds"] = json::array();
  try {
    parse_run_config(j);
    CHECK(false);
  } catch (const InputError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("data.graph") != std::string::npos);
    CHECK(msg.find("data.features") != std::string::npos);
    CHECK(msg.find("split_ratio") != std::string::npos);
    CHECK(msg.find("epochs") != std::string::npos);
    CHECK(msg.find("out_dir") != std::string::npos);
    CHECK(msg.find("seeds") != std::string::npos);
  }
}

TEST_CASE("verify --theorem 3 passes and writes a schema-valid report") {
  TempDir dir("hetlink_cli_thm3");
  VerifyArgs va;
  va.theorem = 3;
  va.out_dir = dir.str();
  CHECK(cmd_verify(va));
  json rep = read_json_file(dir.str("thm3_report.json"));
  require_schema_valid(rep, "thm_report.schema.json");
  CHECK(rep.at("pass").get<bool>());
}

TEST_CASE("error envelope validates against its schema") {
  json err = error_json("input", "something broke");
  require_schema_valid(err, "error.schema.json");
}

TEST_CASE("sweep on a miniature spectrum produces the table and curve files") {
  TempDir dir("hetlink_cli_sweep");
  json j;
  j["n_nodes"] = 120;
  j["features"] = "gaussian:8:31";
  j["indices"] = {0, 25, 49};
  j["seeds"] = {1, 2};
  j["methods"] = json::array({"cn", json{{"encoder", "sage"}, {"decoder", "distmult"}}});
  j["model"] = {{"hidden", 8}};
  j["train"] = {{"epochs", 10}, {"learning_rate", 0.01}, {"eval_every", 5}};
  j["eval"] = {{"n_neg", 20}, {"seed", 2}};
  j["out_dir"] = dir.str("sweep");
  SweepConfig cfg = parse_sweep_config(j);
  auto cells = cmd_sweep(cfg);
  CHECK(cells.size() == 6);  // 3 graphs x 2 methods
  CHECK(fs::exists(dir.str("sweep/table2_style.csv")));
  CHECK(fs::exists(dir.str("sweep/ucurve.csv")));
  CHECK(fs::exists(dir.str("sweep/g0/cn/seed1/report.json")));
  CHECK(fs::exists(dir.str("sweep/g2/sage+distmult/seed2/report.json")));
  for (const auto& c : cells) {
    CHECK(c.per_seed.size() == 2);
    CHECK(c.metric_mean >= 0.0);
    CHECK(c.metric_mean <= 1.0);
  }
  // Realized K increases across the three indices for each method.
  CHECK(cells[0].realized_K < cells[2].realized_K);
  CHECK(cells[2].realized_K < cells[4].realized_K);
}

TEST_CASE("CLI binary: missing checkpoint yields nonzero exit and error JSON") {
  TempDir dir("hetlink_cli_bin");
  RunConfig cfg = small_run_config(dir, "y");
  json cj = run_config_to_json(cfg);
  write_json_file(cj, dir.str("cfg.json"));

  const std::string cli = std::string(HETLINK_CLI_PATH);
  const std::string cmd = cli + " eval --config " + dir.str("cfg.json") + " --checkpoint " +
                          dir.str("ghost.hlpp") + " > " + dir.str("out.json") + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  CHECK(rc != 0);
  json err = read_json_file(dir.str("out.json"));
  require_schema_valid(err, "error.schema.json");
  CHECK(err.at("error").at("type").get<std::string>() == "input");
}
