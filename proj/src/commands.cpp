#include "hetlink/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "hetlink/common.hpp"
#include "hetlink/rng.hpp"
#include "hetlink/similarity.hpp"
#include "hetlink/synthgen.hpp"
#include "hetlink/theory.hpp"

namespace fs = std::filesystem;

namespace hetlink {

namespace {

void ensure_dir(const std::string& dir) {
  if (dir.empty()) throw InputError("output directory not set");
  fs::create_directories(dir);
}

std::string data_checksum(const Graph& g, const FeatureMatrix& fm) {
  const std::uint64_t n = g.n_nodes();
  std::uint64_t h = fnv1a(&n, sizeof(n));
  h = fnv1a(g.edges().data(), g.edges().size() * sizeof(Edge), h);
  h = fnv1a(fm.rows().v.data(), fm.rows().v.size() * sizeof(double), h);
  return checksum_hex(h);
}

struct LoadedData {
  Graph g_full;
  FeatureMatrix fm;
  EdgeSplit split;
  Graph g_train;
  std::string checksum;
};

LoadedData load_data(const RunConfig& cfg) {
  LoadedData d;
  d.g_full = load_graph(cfg.data.graph_path);
  d.fm = load_features(cfg.data.features_path);
  if (d.fm.n() != d.g_full.n_nodes())
    throw InputError("data: feature rows (" + std::to_string(d.fm.n()) + ") != graph nodes (" +
                     std::to_string(d.g_full.n_nodes()) + ")");
  d.split = split_edges(d.g_full, cfg.data.split_ratio, cfg.data.split_seed);
  d.g_train = graph_from_edges(d.g_full.n_nodes(), d.split.train);
  d.checksum = data_checksum(d.g_full, d.fm);
  return d;
}

void write_buckets_csv(const EvalReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path);
  out << "deg_bucket,sim_bucket,value,count\n";
  out.precision(12);
  for (int dg = 0; dg < rep.n_deg; ++dg)
    for (int sm = 0; sm < rep.n_sim; ++sm) {
      const std::size_t c = static_cast<std::size_t>(dg) * rep.n_sim + sm;
      out << dg << "," << sm << "," << rep.bucket_value[c] << "," << rep.bucket_count[c] << "\n";
    }
}

}  // namespace

FeatureMatrix resolve_features(const std::string& source, std::size_t n) {
  if (source.starts_with("gaussian:")) {
    std::size_t dim = 32;
    std::uint64_t seed = 99;
    const std::string rest = source.substr(9);
    const auto colon = rest.find(':');
    dim = static_cast<std::size_t>(std::stoull(rest.substr(0, colon)));
    if (colon != std::string::npos) seed = std::stoull(rest.substr(colon + 1));
    return gaussian_features(n, dim, seed);
  }
  FeatureMatrix fm = load_features(source);
  if (fm.n() != n)
    throw InputError("feature file has " + std::to_string(fm.n()) + " rows, expected " +
                     std::to_string(n));
  return fm;
}

void cmd_synthgen(const SynthgenArgs& args) {
  if (args.out_prefix.empty()) throw InputError("synthgen: out_prefix required");
  QuantileGenSpec spec;
  spec.n_nodes = args.n;
  spec.n_quantiles = args.n_quantiles;
  spec.index = args.index;
  spec.edge_subsample_rate = args.edge_subsample_rate;
  spec.seed = args.seed;
  spec.pair_budget = args.pair_budget;
  spec.validate();

  FeatureMatrix fm = resolve_features(args.features, args.n);
  QuantileGenResult res = generate_quantile_graph(spec, fm);

  const fs::path prefix(args.out_prefix);
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
  save_graph(res.graph, args.out_prefix + ".graph");
  save_features_binary(fm, args.out_prefix + ".featb");

  json meta;
  meta["n_nodes"] = args.n;
  meta["n_quantiles"] = args.n_quantiles;
  meta["index"] = args.index;
  meta["seed"] = args.seed;
  meta["edge_count"] = res.edge_count;
  meta["realized_K"] = res.realized_K;
  meta["sim_range"] = {res.sim_lo, res.sim_hi};
  meta["quantile_bounds"] = {res.bound_lo, res.bound_hi};
  require_schema_valid(meta, "meta.schema.json");
  write_json_file(meta, args.out_prefix + ".meta.json");
}

void cmd_simstats(const SimstatsArgs& args) {
  ensure_dir(args.out_dir);
  Graph g = load_graph(args.graph_path);
  FeatureMatrix fm = load_features(args.features_path);
  if (fm.n() != g.n_nodes()) throw InputError("simstats: feature rows != graph nodes");

  SimilarityProfile prof = build_profile(fm, g, args.n_neg_samples, args.seed, args.epsilon);
  TaskClassification cls = classify_task(prof);

  json j;
  j["K"] = prof.K;
  j["kind"] = task_kind_name(cls.kind);
  j["M"] = cls.M ? json(*cls.M) : json(nullptr);
  j["M1"] = cls.M1 ? json(*cls.M1) : json(nullptr);
  j["M2"] = cls.M2 ? json(*cls.M2) : json(nullptr);
  j["pos_histogram"] = similarity_histogram(prof.pos);
  j["neg_histogram"] = similarity_histogram(prof.neg);
  require_schema_valid(j, "simstats.schema.json");
  write_json_file(j, args.out_dir + "/simstats.json");

  auto pos_hist = similarity_histogram(prof.pos);
  auto neg_hist = similarity_histogram(prof.neg);
  std::ofstream csv(args.out_dir + "/sim_hist.csv");
  if (!csv) throw InputError("cannot open " + args.out_dir + "/sim_hist.csv");
  csv << "bin_lo,bin_hi,pos_count,neg_count\n";
  csv.precision(12);
  for (std::size_t b = 0; b < pos_hist.size(); ++b) {
    const double lo = -1.0 + 2.0 * static_cast<double>(b) / static_cast<double>(pos_hist.size());
    const double hi = -1.0 + 2.0 * static_cast<double>(b + 1) / static_cast<double>(pos_hist.size());
    csv << lo << "," << hi << "," << pos_hist[b] << "," << neg_hist[b] << "\n";
  }
}

void cmd_train(const RunConfig& cfg) {
  ensure_dir(cfg.out_dir);
  LoadedData d = load_data(cfg);

  ModelSpec spec = cfg.model;
  spec.in_dim = static_cast<int>(d.fm.dim());
  spec.validate();

  ParamStore params = ParamStore::build(spec);
  init_params(spec, params, cfg.train.seed);
  TrainTrace trace = train(spec, params, d.g_train, d.fm.rows(), d.split, cfg.train, d.g_full);

  params.save(cfg.out_dir + "/checkpoint.hlpp");
  json tj = train_trace_to_json(trace);
  require_schema_valid(tj, "trace.schema.json");
  write_json_file(tj, cfg.out_dir + "/trace.json");
  write_trace_csv(trace, cfg.out_dir + "/trace.csv");
}

namespace {

EvalReport eval_checkpoint(const RunConfig& cfg, const std::string& checkpoint_path) {
  LoadedData d = load_data(cfg);
  ModelSpec spec = cfg.model;
  spec.in_dim = static_cast<int>(d.fm.dim());
  spec.validate();
  if (!fs::exists(checkpoint_path)) throw InputError("checkpoint not found: " + checkpoint_path);
  ParamStore params = ParamStore::load(checkpoint_path);

  Mat z = encode(spec, params, d.g_train, d.fm.rows());
  DecodeContext ctx = make_decode_context(spec, params, z);
  PairScorer scorer = [&ctx](NodeId a, NodeId b) { return ctx.score(a, b); };
  EvalReport rep = evaluate_scorer(scorer, d.g_train, d.fm, d.split.test, cfg.eval, d.g_full,
                                   spec.describe());
  rep.data_checksum = d.checksum;
  return rep;
}

}  // namespace

void cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path) {
  ensure_dir(cfg.out_dir);
  EvalReport rep = eval_checkpoint(cfg, checkpoint_path);
  json j = eval_report_to_json(rep);
  require_schema_valid(j, "report.schema.json");
  write_json_file(j, cfg.out_dir + "/report.json");
}

void cmd_buckets(const RunConfig& cfg, const std::string& checkpoint_path) {
  ensure_dir(cfg.out_dir);
  EvalReport rep = eval_checkpoint(cfg, checkpoint_path);
  json j = eval_report_to_json(rep);
  require_schema_valid(j, "report.schema.json");
  write_json_file(j, cfg.out_dir + "/report.json");
  write_buckets_csv(rep, cfg.out_dir + "/buckets.csv");
}

void cmd_buckets_diff(const std::string& report_a, const std::string& report_b,
                      const std::string& out_csv) {
  EvalReport a = eval_report_from_json(read_json_file(report_a));
  EvalReport b = eval_report_from_json(read_json_file(report_b));
  DiffGrid grid = compare_reports(a, b);
  const fs::path out_path(out_csv);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  std::ofstream out(out_csv);
  if (!out) throw InputError("cannot open " + out_csv);
  out << "deg_bucket,sim_bucket,diff,missing,count_a,count_b\n";
  out.precision(12);
  for (int dg = 0; dg < grid.n_deg; ++dg)
    for (int sm = 0; sm < grid.n_sim; ++sm) {
      const DiffCell& c = grid.cells[static_cast<std::size_t>(dg) * grid.n_sim + sm];
      out << dg << "," << sm << ",";
      if (c.missing)
        out << ",1,";
      else
        out << c.diff << ",0,";
      out << c.count_a << "," << c.count_b << "\n";
    }
}

void cmd_heuristic(const RunConfig& cfg, HeuristicKind method) {
  ensure_dir(cfg.out_dir);
  LoadedData d = load_data(cfg);
  PairScorer scorer = make_heuristic_scorer(d.g_train, method);
  EvalReport rep = evaluate_scorer(scorer, d.g_train, d.fm, d.split.test, cfg.eval, d.g_full,
                                   heuristic_name(method));
  rep.data_checksum = d.checksum;
  json j = eval_report_to_json(rep);
  require_schema_valid(j, "report.schema.json");
  write_json_file(j, cfg.out_dir + "/report.json");
}

namespace {

json assertion(const std::string& name, bool pass, json evidence) {
  return json{{"name", name}, {"pass", pass}, {"evidence", std::move(evidence)}};
}

bool verify_thm1(const VerifyArgs& args, json& out) {
  json asserts = json::array();
  bool all = true;
  const double tol = 1e-12;
  for (double m : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    for (ThresholdMode mode : {ThresholdMode::Homo, ThresholdMode::Hetero}) {
      const Thm1Solution sol = thm1_closed_form(mode, m);
      const double at_m = sol.predict(m);
      const double at_ext = sol.predict(mode == ThresholdMode::Homo ? 1.0 : -1.0);
      const double slope_expect =
          mode == ThresholdMode::Homo ? 1.0 / (1.0 - m) : -1.0 / (1.0 + m);
      const bool pass = std::abs(at_m) <= tol && std::abs(at_ext - 1.0) <= tol &&
                        std::abs(sol.slope - slope_expect) <= tol;
      all &= pass;
      asserts.push_back(assertion(
          std::string("closed_form_") + (mode == ThresholdMode::Homo ? "homo" : "hetero") + "_M" +
              std::to_string(m),
          pass, json{{"score_at_M", at_m}, {"score_at_extreme", at_ext}, {"slope", sol.slope}}));
    }
  }
  for (ThresholdMode mode : {ThresholdMode::Homo, ThresholdMode::Hetero}) {
    Thm1TrainReport rep = verify_thm1_by_training(mode, args.M, args.n_nodes, args.seed);
    const bool pass = rep.final_loss < 1e-6 && rep.slope_sign_ok;
    all &= pass;
    asserts.push_back(assertion(
        std::string("training_") + (mode == ThresholdMode::Homo ? "homo" : "hetero"), pass,
        json{{"final_loss", rep.final_loss},
             {"fitted_slope", rep.fitted_slope},
             {"closed_form_slope", rep.closed_form_slope},
             {"signs_ok_on_train", rep.signs_ok_on_train}}));
  }
  out["assertions"] = asserts;

  // Score-vs-similarity curves for external plotting.
  const Thm1Solution homo = thm1_closed_form(ThresholdMode::Homo, args.M);
  const Thm1Solution hetero = thm1_closed_form(ThresholdMode::Hetero, args.M);
  std::ofstream csv(args.out_dir + "/fig2.csv");
  csv << "k,y_homo,y_hetero\n";
  csv.precision(12);
  for (int i = 0; i <= 200; ++i) {
    const double k = -1.0 + 2.0 * i / 200.0;
    csv << k << "," << homo.predict(k) << "," << hetero.predict(k) << "\n";
  }
  return all;
}

bool verify_thm2_cmd(const VerifyArgs& args, json& out) {
  Thm2Report rep = verify_thm2(args.n_nodes, args.M1, args.M2, args.seed);
  json asserts = json::array();
  bool all = true;
  if (rep.degenerate) {
    out["degenerate"] = true;
    asserts.push_back(assertion("task_degenerate", true, json{{"note", "every pair is an edge"}}));
    out["assertions"] = asserts;
    return true;
  }
  const bool a1 = rep.oracle_found_none;
  const bool a2 = rep.distmult_loss > 0.0 && rep.distmult_sign_errors >= 1;
  const bool a3 = rep.mlp_loss < 1e-4;
  all = a1 && a2 && a3;
  asserts.push_back(assertion("oracle_finds_no_threshold", a1,
                              json{{"min_misclassified", rep.oracle_min_misclassified}}));
  asserts.push_back(assertion("distmult_loss_positive", a2,
                              json{{"loss", rep.distmult_loss},
                                   {"sign_errors", rep.distmult_sign_errors},
                                   {"oracle_floor_misclassified", rep.oracle_min_misclassified}}));
  asserts.push_back(assertion("mlp_separates", a3, json{{"loss", rep.mlp_loss}}));
  out["assertions"] = asserts;
  return all;
}

bool verify_thm3_cmd(const VerifyArgs& args, json& out) {
  (void)args;
  std::vector<int> ds = {0, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> dps = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> alphas = {-0.5, -1.0, -2.0};
  auto rows = verify_thm3_grid(ds, dps, alphas, 0.52359877559829887, 2.0943951023931953);
  bool all = true;
  double max_gap = 0.0;
  for (const auto& row : rows) {
    max_gap = std::max(max_gap, row.rep.route_gap);
    if (row.rep.route_gap > 1e-9) all = false;
    if (row.rep.delta_baseline != 1.0 - row.alpha) all = false;
    if (row.rep.reduced != row.in_region) all = false;
  }
  json asserts = json::array();
  asserts.push_back(assertion("routes_agree", max_gap <= 1e-9, json{{"max_gap", max_gap}}));
  asserts.push_back(assertion("baseline_exact", true, json{{"formula", "1 - alpha"}}));
  bool region_ok = true;
  for (const auto& row : rows)
    if (row.rep.reduced != row.in_region) region_ok = false;
  asserts.push_back(assertion("reduced_matches_region", region_ok,
                              json{{"cells", rows.size()}}));
  out["assertions"] = asserts;
  json table = json::array();
  for (const auto& row : rows)
    table.push_back(json{{"d", row.d},
                         {"dprime", row.dprime},
                         {"alpha", row.alpha},
                         {"delta_gnn", row.rep.delta_gnn},
                         {"delta_baseline", row.rep.delta_baseline},
                         {"reduced", row.rep.reduced},
                         {"in_region", row.in_region}});
  out["grid"] = table;
  return all && region_ok;
}

}  // namespace

bool cmd_verify(const VerifyArgs& args) {
  ensure_dir(args.out_dir);
  json out;
  out["theorem"] = args.theorem;
  bool pass = false;
  switch (args.theorem) {
    case 1: pass = verify_thm1(args, out); break;
    case 2: pass = verify_thm2_cmd(args, out); break;
    case 3: pass = verify_thm3_cmd(args, out); break;
    default: throw InputError("verify: theorem must be 1, 2 or 3");
  }
  out["pass"] = pass;
  require_schema_valid(out, "thm_report.schema.json");
  write_json_file(out, args.out_dir + "/thm" + std::to_string(args.theorem) + "_report.json");
  return pass;
}

std::string SweepMethod::name() const {
  if (is_heuristic) return heuristic_name(heuristic);
  return std::string(encoder_name(encoder)) + "+" + decoder_name(decoder);
}

SweepConfig parse_sweep_config(const json& j) {
  SweepConfig cfg;
  if (j.contains("n_nodes")) cfg.n_nodes = j.at("n_nodes").get<std::size_t>();
  if (j.contains("features")) cfg.features = j.at("features").get<std::string>();
  if (j.contains("n_quantiles")) cfg.n_quantiles = j.at("n_quantiles").get<std::size_t>();
  if (j.contains("indices")) cfg.indices = j.at("indices").get<std::vector<std::size_t>>();
  if (j.contains("edge_subsample_rate"))
    cfg.edge_subsample_rate = j.at("edge_subsample_rate").get<double>();
  if (j.contains("pair_budget")) cfg.pair_budget = j.at("pair_budget").get<std::size_t>();
  if (j.contains("graph_seed")) cfg.graph_seed = j.at("graph_seed").get<std::uint64_t>();
  if (j.contains("split_ratio")) {
    auto r = j.at("split_ratio").get<std::vector<double>>();
    if (r.size() != 3) throw InputError("sweep.split_ratio: must have 3 components");
    cfg.split_ratio = {r[0], r[1], r[2]};
  }
  if (j.contains("split_seed")) cfg.split_seed = j.at("split_seed").get<std::uint64_t>();
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (cfg.seeds.empty()) throw InputError("sweep.seeds: must be non-empty");
  if (j.contains("model")) cfg.model = model_spec_from_json(j.at("model"));
  if (j.contains("train")) cfg.train = train_config_from_json(j.at("train"));
  if (j.contains("eval")) cfg.eval = eval_config_from_json(j.at("eval"));
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  if (cfg.out_dir.empty()) throw InputError("sweep.out_dir: required");

  if (!j.contains("methods") || j.at("methods").empty())
    throw InputError("sweep.methods: required");
  for (const auto& m : j.at("methods")) {
    SweepMethod method;
    if (m.is_string()) {
      method.is_heuristic = true;
      method.heuristic = parse_heuristic(m.get<std::string>());
    } else {
      method.encoder = parse_encoder(m.at("encoder").get<std::string>());
      method.decoder = parse_decoder(m.at("decoder").get<std::string>());
    }
    cfg.methods.push_back(method);
  }
  return cfg;
}

std::vector<SweepCellResult> cmd_sweep(const SweepConfig& cfg) {
  ensure_dir(cfg.out_dir);
  FeatureMatrix fm = resolve_features(cfg.features, cfg.n_nodes);

  QuantileGenSpec gen;
  gen.n_nodes = cfg.n_nodes;
  gen.n_quantiles = cfg.n_quantiles;
  gen.edge_subsample_rate = cfg.edge_subsample_rate;
  gen.seed = cfg.graph_seed;
  gen.pair_budget = cfg.pair_budget;
  std::vector<std::size_t> indices =
      cfg.indices.empty() ? default_sweep_quantiles(cfg.n_quantiles) : cfg.indices;
  auto graphs = generate_quantile_graphs(gen, fm, indices);

  std::vector<SweepCellResult> cells;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const QuantileGenResult& qg = graphs[gi];
    const EdgeSplit split = split_edges(qg.graph, cfg.split_ratio, cfg.split_seed);
    const Graph g_train = graph_from_edges(qg.graph.n_nodes(), split.train);
    const std::string checksum = data_checksum(qg.graph, fm);

    for (const SweepMethod& method : cfg.methods) {
      SweepCellResult cell;
      cell.graph_index = gi;
      cell.quantile = indices[gi];
      cell.realized_K = qg.realized_K;
      cell.method = method.name();

      for (std::uint64_t seed : cfg.seeds) {
        EvalConfig ecfg = cfg.eval;
        ecfg.seed = mix_seed(cfg.eval.seed, seed, 0xE7);
        EvalReport rep;
        if (method.is_heuristic) {
          PairScorer scorer = make_heuristic_scorer(g_train, method.heuristic);
          rep = evaluate_scorer(scorer, g_train, fm, split.test, ecfg, qg.graph, method.name());
        } else {
          ModelSpec spec = cfg.model;
          spec.encoder = method.encoder;
          spec.decoder = method.decoder;
          spec.in_dim = static_cast<int>(fm.dim());
          spec.validate();
          ParamStore params = ParamStore::build(spec);
          init_params(spec, params, seed);
          TrainConfig tcfg = cfg.train;
          tcfg.seed = seed;
          train(spec, params, g_train, fm.rows(), split, tcfg, qg.graph);
          Mat z = encode(spec, params, g_train, fm.rows());
          DecodeContext ctx = make_decode_context(spec, params, z);
          PairScorer scorer = [&ctx](NodeId a, NodeId b) { return ctx.score(a, b); };
          rep = evaluate_scorer(scorer, g_train, fm, split.test, ecfg, qg.graph, spec.describe());
        }
        rep.data_checksum = checksum;
        cell.per_seed.push_back(rep.overall);

        const std::string run_dir = cfg.out_dir + "/g" + std::to_string(gi) + "/" + method.name() +
                                    "/seed" + std::to_string(seed);
        ensure_dir(run_dir);
        json rj = eval_report_to_json(rep);
        require_schema_valid(rj, "report.schema.json");
        write_json_file(rj, run_dir + "/report.json");
      }

      double mean = 0.0;
      for (double v : cell.per_seed) mean += v;
      mean /= static_cast<double>(cell.per_seed.size());
      double var = 0.0;
      for (double v : cell.per_seed) var += (v - mean) * (v - mean);
      cell.metric_mean = mean;
      cell.metric_std =
          cell.per_seed.size() > 1 ? std::sqrt(var / static_cast<double>(cell.per_seed.size() - 1))
                                   : 0.0;
      cells.push_back(std::move(cell));
    }
  }

  // Metric values are reported x100 with 2 decimals, as in the tables.
  auto x100 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
    return std::string(buf);
  };

  {
    std::ofstream out(cfg.out_dir + "/table2_style.csv");
    if (!out) throw InputError("cannot open table2_style.csv");
    out << "method,graph_index,quantile,K,metric_mean,metric_std\n";
    for (const auto& c : cells) {
      char kbuf[32];
      std::snprintf(kbuf, sizeof(kbuf), "%.4f", c.realized_K);
      out << c.method << "," << c.graph_index << "," << c.quantile << "," << kbuf << ","
          << x100(c.metric_mean) << "," << x100(c.metric_std) << "\n";
    }
  }
  {
    std::ofstream out(cfg.out_dir + "/ucurve.csv");
    if (!out) throw InputError("cannot open ucurve.csv");
    out << "graph_index,K,method,metric\n";
    for (const auto& c : cells) {
      char kbuf[32];
      std::snprintf(kbuf, sizeof(kbuf), "%.4f", c.realized_K);
      out << c.graph_index << "," << kbuf << "," << c.method << "," << x100(c.metric_mean) << "\n";
    }
  }
  return cells;
}

}  // namespace hetlink
