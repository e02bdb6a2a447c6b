// Acceptance suite: one pass/fail line per criterion.
//
// The theory criteria (1-6) are exact and fast. The trend criteria (7-13)
// run the desk-scale similarity sweep (n=2000, hidden 64, 3 seeds) and
// check directional claims with generous margins; exact paper values are
// not reproducible without the original features and hyperparameters.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hetlink/commands.hpp"
#include "hetlink/common.hpp"
#include "hetlink/rng.hpp"
#include "hetlink/similarity.hpp"
#include "hetlink/synthgen.hpp"
#include "hetlink/theory.hpp"
#include "hetlink/training.hpp"

using namespace hetlink;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& evidence,
            double seconds) {
  std::printf("C%02d %-4s %-52s %s [%.1fs]\n", id, pass ? "PASS" : "FAIL", what.c_str(),
              evidence.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

template <class F>
void criterion(int id, const std::string& what, F&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string evidence;
  try {
    pass = fn(evidence);
  } catch (const std::exception& e) {
    evidence = std::string("exception: ") + e.what();
  }
  report(id, pass, what, evidence,
         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------- theory --

bool c1_closed_form(std::string& ev) {
  const double tol = 1e-12;
  double worst = 0.0;
  for (double m : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    for (ThresholdMode mode : {ThresholdMode::Homo, ThresholdMode::Hetero}) {
      const Thm1Solution sol = thm1_closed_form(mode, m);
      const double extreme = mode == ThresholdMode::Homo ? 1.0 : -1.0;
      const double slope_expect = mode == ThresholdMode::Homo ? 1.0 / (1.0 - m) : -1.0 / (1.0 + m);
      worst = std::max({worst, std::abs(sol.predict(m)), std::abs(sol.predict(extreme) - 1.0),
                        std::abs(sol.slope - slope_expect)});
    }
  }
  // The M = 0.5 homophilic curve is score(k) = 2k - 1.
  const Thm1Solution half = thm1_closed_form(ThresholdMode::Homo, 0.5);
  for (double k : {-1.0, -0.25, 0.0, 0.6, 1.0})
    worst = std::max(worst, std::abs(half.predict(k) - (2.0 * k - 1.0)));
  ev = fmt("max deviation %.2e", worst);
  return worst <= tol;
}

bool c2_thm1_training(std::string& ev) {
  double worst_loss = 0.0;
  bool signs_ok = true;
  for (ThresholdMode mode : {ThresholdMode::Homo, ThresholdMode::Hetero}) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
      const Thm1TrainReport rep = verify_thm1_by_training(mode, 0.5, 400, seed);
      worst_loss = std::max(worst_loss, rep.final_loss);
      if (!rep.slope_sign_ok) signs_ok = false;
    }
  }
  ev = fmt("worst final loss %.2e, slope signs %s", worst_loss, signs_ok ? "ok" : "WRONG");
  return worst_loss < 1e-6 && signs_ok;
}

bool c3_thm2(std::string& ev) {
  const Thm2Report rep = verify_thm2(400, -0.3, 0.3, 1);
  ev = fmt("oracle none=%d (min misclassified %zu), distmult loss %.2e (%zu sign errors), mlp loss %.2e",
           rep.oracle_found_none ? 1 : 0, rep.oracle_min_misclassified, rep.distmult_loss,
           rep.distmult_sign_errors, rep.mlp_loss);
  return rep.oracle_found_none && rep.distmult_loss > 0.0 && rep.distmult_sign_errors >= 1 &&
         rep.mlp_loss < 1e-4;
}

bool c4_thm3_grid(std::string& ev) {
  std::vector<int> ds = {0, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> dps = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> alphas = {-0.5, -1.0, -2.0};
  auto rows = verify_thm3_grid(ds, dps, alphas, 0.52359877559829887, 2.0943951023931953);
  double max_gap = 0.0;
  bool baseline_exact = true, region_exact = true;
  for (const auto& row : rows) {
    max_gap = std::max(max_gap, row.rep.route_gap);
    if (row.rep.delta_baseline != 1.0 - row.alpha) baseline_exact = false;
    if (row.rep.reduced != row.in_region) region_exact = false;
  }
  ev = fmt("%zu cells, max route gap %.2e, baseline exact=%d, region exact=%d", rows.size(),
           max_gap, baseline_exact ? 1 : 0, region_exact ? 1 : 0);
  return max_gap <= 1e-9 && baseline_exact && region_exact;
}

Graph random_graph(std::size_t n, double p, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (rng.uniform01() < p) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  return Graph::build(n, edges);
}

Mat random_mat(std::size_t r, std::size_t c, std::uint64_t seed) {
  Mat m(r, c);
  SplitMix64 rng(seed);
  for (auto& x : m.v) x = rng.normal();
  return m;
}

bool c5_gradient_checks(std::string& ev) {
  const Graph g = random_graph(8, 0.45, 101);
  const Mat x = random_mat(8, 4, 102);
  Batch batch;
  batch.pairs = g.edges();
  batch.labels.assign(batch.pairs.size(), 1);
  auto negs = sample_negatives(g, g.edges(), 1, 103);
  batch.pairs.insert(batch.pairs.end(), negs.begin(), negs.end());
  batch.labels.insert(batch.labels.end(), negs.size(), 0);

  double worst = 0.0;
  std::string worst_combo;
  for (EncoderKind enc : {EncoderKind::NoGNN, EncoderKind::GCN, EncoderKind::SAGE,
                          EncoderKind::SIGN, EncoderKind::LinearGNN}) {
    for (DecoderKind dec : {DecoderKind::DOT, DecoderKind::DistMult, DecoderKind::MLP}) {
      for (LossKind loss : {LossKind::Hinge, LossKind::Logistic}) {
        ModelSpec spec;
        spec.encoder = enc;
        spec.decoder = dec;
        spec.in_dim = 4;
        spec.hidden = 5;
        spec.layers = 2;
        spec.powers = 2;
        spec.embed_dim = 4;
        ParamStore params = ParamStore::build(spec);
        if (params.size() == 0) continue;

        // Central differences need a margin from the hinge/ReLU kinks;
        // pick the first init seed whose scores stay clear of zero.
        bool generic = false;
        for (std::uint64_t seed = 777; seed < 877; ++seed) {
          init_params(spec, params, seed);
          auto scores = score_pairs(spec, params, g, x, batch.pairs);
          double min_abs = 1e9;
          for (double s : scores) min_abs = std::min(min_abs, std::abs(s));
          if (min_abs > 5e-4) {
            generic = true;
            break;
          }
        }
        if (!generic) {
          ev = std::string("no kink-free init for ") + encoder_name(enc) + "+" + decoder_name(dec);
          return false;
        }

        backward(spec, params, g, x, batch, loss);
        std::vector<double> analytic(params.grad().begin(), params.grad().end());
        const double step = 1e-5;
        for (std::size_t i = 0; i < params.size(); ++i) {
          const double saved = params.values()[i];
          params.values()[i] = saved + step;
          const double up = backward(spec, params, g, x, batch, loss);
          params.values()[i] = saved - step;
          const double down = backward(spec, params, g, x, batch, loss);
          params.values()[i] = saved;
          const double numeric = (up - down) / (2.0 * step);
          const double err = std::abs(analytic[i] - numeric) /
                             std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
          if (err > worst) {
            worst = err;
            worst_combo = std::string(encoder_name(enc)) + "+" + decoder_name(dec) +
                          (loss == LossKind::Hinge ? "+hinge" : "+logistic");
          }
        }
      }
    }
  }
  ev = fmt("max relative error %.2e (%s)", worst, worst_combo.c_str());
  return worst < 1e-4;
}

bool c6_oracle_equivalences(std::string& ev) {
  // Normalized adjacency vs the densely constructed operator, all n <= 6.
  double worst_adj = 0.0;
  for (std::size_t n = 1; n <= 6; ++n) {
    std::vector<Edge> all_pairs;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v)
        all_pairs.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    const std::size_t m = all_pairs.size();
    const std::uint64_t limit = 1ull << m;
    for (std::uint64_t mask = 0; mask < limit; ++mask) {
      std::vector<Edge> edges;
      for (std::size_t i = 0; i < m; ++i)
        if (mask & (1ull << i)) edges.push_back(all_pairs[i]);
      Graph g = Graph::build(n, edges);
      Mat x = random_mat(n, 3, mask * 7919 + n);
      Mat fast = normalized_adjacency_apply(g, x);
      Mat dense(n, n);
      for (std::size_t v = 0; v < n; ++v) {
        const double dv = static_cast<double>(g.degree(static_cast<NodeId>(v)));
        dense(v, v) = 1.0 / (dv + 1.0);
        for (NodeId u : g.neighbors(static_cast<NodeId>(v)))
          dense(v, u) = 1.0 / (std::sqrt(dv + 1.0) *
                               std::sqrt(static_cast<double>(g.degree(u)) + 1.0));
      }
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
          double s = 0.0;
          for (std::size_t k = 0; k < n; ++k) s += dense(i, k) * x(k, j);
          worst_adj = std::max(worst_adj,
                               std::abs(fast(i, j) - s) / std::max(1.0, std::abs(s)));
        }
    }
  }

  // Reciprocal rank vs exhaustive tie-aware ranking on lists <= 12.
  double worst_rr = 0.0;
  {
    SplitMix64 rng(61);
    const double alphabet[4] = {-0.5, 0.0, 0.25, 0.5};
    for (int rep = 0; rep < 4000; ++rep) {
      std::vector<double> neg(rng.uniform_index(13));
      for (auto& s : neg) s = alphabet[rng.uniform_index(4)];
      const double pos = alphabet[rng.uniform_index(4)];
      double above = 0.0, ties = 0.0;
      for (double s : neg) {
        if (s > pos) above += 1.0;
        if (s == pos) ties += 1.0;
      }
      const double oracle = 1.0 / (1.0 + above + 0.5 * ties);
      worst_rr = std::max(worst_rr, std::abs(reciprocal_rank(pos, neg) - oracle));
    }
  }

  // Threshold oracle vs the exhaustive O(P*N*T) misclassification scan.
  bool oracle_ok = true;
  {
    SplitMix64 rng(62);
    const double alphabet[5] = {-0.9, -0.3, 0.0, 0.4, 0.8};
    for (int rep = 0; rep < 4000; ++rep) {
      std::vector<double> pos(rng.uniform_index(7) + 1), neg(rng.uniform_index(6));
      for (auto& s : pos) s = alphabet[rng.uniform_index(5)];
      for (auto& s : neg) s = alphabet[rng.uniform_index(5)];
      std::vector<double> merged = pos;
      merged.insert(merged.end(), neg.begin(), neg.end());
      std::sort(merged.begin(), merged.end());
      std::vector<double> cands = {merged.front() - 1.0, merged.back() + 1.0};
      for (std::size_t i = 1; i < merged.size(); ++i)
        cands.push_back(0.5 * (merged[i - 1] + merged[i]));
      std::size_t best = pos.size() + neg.size() + 1;
      for (double t : cands) {
        std::size_t above = 0, below = 0;
        for (double p : pos) {
          if (p < t) ++above;
          if (p >= t) ++below;
        }
        for (double ng : neg) {
          if (ng >= t) ++above;
          if (ng < t) ++below;
        }
        best = std::min({best, above, below});
      }
      auto fast = single_threshold_oracle(pos, neg);
      if (fast.min_misclassified != best || fast.exists != (best == 0)) oracle_ok = false;
    }
  }

  ev = fmt("adjacency max rel err %.2e, rr max err %.2e, threshold oracle %s", worst_adj, worst_rr,
           oracle_ok ? "agrees" : "DISAGREES");
  return worst_adj <= 1e-12 && worst_rr <= 1e-12 && oracle_ok;
}

// ----------------------------------------------------------------- trend --

struct TrendState {
  fs::path dir;
  std::map<std::string, std::vector<SweepCellResult>> sweeps;  // by label
  FeatureMatrix fm;
  std::vector<std::size_t> indices;
  std::vector<QuantileGenResult> graphs;
};

SweepConfig base_sweep_config(const TrendState& st, const std::string& sub) {
  SweepConfig cfg;
  cfg.n_nodes = 2000;
  cfg.features = "gaussian:32:99";
  cfg.graph_seed = 5;
  cfg.split_seed = 17;
  cfg.seeds = {1, 2, 3};
  cfg.model.hidden = 64;
  cfg.model.layers = 2;
  cfg.train.loss = LossKind::Logistic;
  cfg.train.epochs = 150;
  cfg.train.learning_rate = 3e-3;
  cfg.train.eval_every = 10;
  cfg.eval.metric = MetricKind::MRR;
  cfg.eval.n_neg = 1000;
  cfg.eval.seed = 7;
  cfg.out_dir = (st.dir / sub).string();
  return cfg;
}

double cell_mean(const TrendState& st, const std::string& sweep, std::size_t graph_index,
                 const std::string& method) {
  for (const auto& c : st.sweeps.at(sweep))
    if (c.graph_index == graph_index && c.method == method) return c.metric_mean;
  throw InputError("acceptance: missing sweep cell " + method + " g" +
                   std::to_string(graph_index));
}

void run_trend_sweeps(TrendState& st) {
  st.dir = fs::temp_directory_path() / "hetlink_acceptance";
  fs::remove_all(st.dir);
  fs::create_directories(st.dir);

  std::printf("-- trend sweeps into %s\n", st.dir.string().c_str());
  std::fflush(stdout);

  {  // criterion 7 (+12, 13): SAGE+MLP across the full 10-graph sweep
    SweepConfig cfg = base_sweep_config(st, "sage_mlp");
    cfg.methods = {SweepMethod{false, HeuristicKind::CN, EncoderKind::SAGE, DecoderKind::MLP}};
    st.sweeps["sage_mlp"] = cmd_sweep(cfg);
  }
  {  // criteria 8, 9: the other learned methods at the negative extreme
    SweepConfig cfg = base_sweep_config(st, "extreme");
    cfg.indices = {0};
    cfg.methods = {SweepMethod{false, HeuristicKind::CN, EncoderKind::SAGE, DecoderKind::DOT},
                   SweepMethod{false, HeuristicKind::CN, EncoderKind::SAGE, DecoderKind::DistMult},
                   SweepMethod{false, HeuristicKind::CN, EncoderKind::GCN, DecoderKind::MLP}};
    st.sweeps["extreme"] = cmd_sweep(cfg);
  }
  {  // criterion 10: heuristics across the sweep (deterministic scorers)
    SweepConfig cfg = base_sweep_config(st, "heuristics");
    cfg.seeds = {1};
    cfg.methods = {SweepMethod{true, HeuristicKind::CN}, SweepMethod{true, HeuristicKind::AA},
                   SweepMethod{true, HeuristicKind::RA}, SweepMethod{true, HeuristicKind::PPR}};
    st.sweeps["heuristics"] = cmd_sweep(cfg);
  }

  st.fm = gaussian_features(2000, 32, 99);
  QuantileGenSpec gen;
  gen.n_nodes = 2000;
  gen.seed = 5;
  st.indices = default_sweep_quantiles(50);
  st.graphs = generate_quantile_graphs(gen, st.fm, st.indices);
}

bool c7_ushape(TrendState& st, std::string& ev) {
  const double m0 = cell_mean(st, "sage_mlp", 0, "sage+mlp");
  const double m9 = cell_mean(st, "sage_mlp", 9, "sage+mlp");
  double mid_min = 1e9;
  for (std::size_t gi = 3; gi <= 6; ++gi)
    mid_min = std::min(mid_min, cell_mean(st, "sage_mlp", gi, "sage+mlp"));
  ev = fmt("mrr x100: idx0 %.2f, idx9 %.2f, mid min %.2f", m0 * 100, m9 * 100, mid_min * 100);
  return m0 >= 2.0 * mid_min && m9 >= 2.0 * mid_min;
}

bool c8_decoder_ordering(TrendState& st, std::string& ev) {
  const double dot = cell_mean(st, "extreme", 0, "sage+dot");
  const double distmult = cell_mean(st, "extreme", 0, "sage+distmult");
  const double mlp = cell_mean(st, "sage_mlp", 0, "sage+mlp");
  ev = fmt("mrr x100 at idx0: dot %.2f, distmult %.2f, mlp %.2f", dot * 100, distmult * 100,
           mlp * 100);
  return distmult >= 1.5 * dot && mlp >= 1.5 * dot;
}

bool c9_encoder_ordering(TrendState& st, std::string& ev) {
  const double sage = cell_mean(st, "sage_mlp", 0, "sage+mlp");
  const double gcn = cell_mean(st, "extreme", 0, "gcn+mlp");
  ev = fmt("mrr x100 at idx0: sage+mlp %.2f, gcn+mlp %.2f", sage * 100, gcn * 100);
  return sage >= 1.2 * gcn;
}

bool c10_heuristics(TrendState& st, std::string& ev) {
  bool low_at_0 = true;
  for (const char* h : {"cn", "aa", "ra"})
    if (cell_mean(st, "heuristics", 0, h) * 100.0 >= 5.0) low_at_0 = false;
  bool max_at_9 = true;
  for (const char* h : {"cn", "aa", "ra", "ppr"}) {
    const double at9 = cell_mean(st, "heuristics", 9, h);
    for (std::size_t gi = 0; gi < 9; ++gi)
      if (cell_mean(st, "heuristics", gi, h) > at9) max_at_9 = false;
  }
  ev = fmt("x100 at idx0: cn %.2f aa %.2f ra %.2f ppr %.2f; at idx9: cn %.2f ppr %.2f",
           cell_mean(st, "heuristics", 0, "cn") * 100, cell_mean(st, "heuristics", 0, "aa") * 100,
           cell_mean(st, "heuristics", 0, "ra") * 100, cell_mean(st, "heuristics", 0, "ppr") * 100,
           cell_mean(st, "heuristics", 9, "cn") * 100, cell_mean(st, "heuristics", 9, "ppr") * 100);
  return low_at_0 && max_at_9;
}

bool c11_classification(TrendState& st, std::string& ev) {
  std::vector<std::string> kinds;
  for (const auto& qg : st.graphs) {
    SimilarityProfile prof = build_profile(st.fm, qg.graph, 200000, 77);
    kinds.push_back(task_kind_name(classify_task(prof).kind));
  }
  bool increasing = true;
  for (std::size_t i = 1; i < st.graphs.size(); ++i)
    if (!(st.graphs[i].realized_K > st.graphs[i - 1].realized_K)) increasing = false;
  const bool extremes = kinds.front() == "heterophilic" && kinds.back() == "homophilic";
  bool mid_gated = true;
  for (std::size_t gi = 3; gi <= 6; ++gi)
    if (kinds[gi] != "gated") mid_gated = false;
  std::string listing;
  for (std::size_t gi = 0; gi < kinds.size(); ++gi)
    listing += fmt("%zu:%s ", gi, kinds[gi].c_str());
  ev = fmt("%sK increasing=%d", listing.c_str(), increasing ? 1 : 0);
  return extremes && mid_gated && increasing;
}

bool c12_bucket_plumbing(TrendState& st, std::string& ev) {
  const json rj = read_json_file((st.dir / "sage_mlp/g0/sage+mlp/seed1/report.json").string());
  EvalReport rep = eval_report_from_json(rj);
  std::size_t total = 0;
  for (auto c : rep.bucket_count) total += c;
  const bool grid3x3 = rep.n_deg == 3 && rep.n_sim == 3;
  DiffGrid self = compare_reports(rep, rep);
  bool zero_grid = true;
  for (const auto& cell : self.cells)
    if (!cell.missing && cell.diff != 0.0) zero_grid = false;
  ev = fmt("counts sum %zu (test 3998), grid %dx%d, self-diff zero=%d", total, rep.n_deg,
           rep.n_sim, zero_grid ? 1 : 0);
  return total == 3998 && grid3x3 && zero_grid;
}

bool c13_determinism(TrendState& st, std::string& ev) {
  auto run_once = [&](const std::string& sub) {
    SweepConfig cfg = base_sweep_config(st, sub);
    cfg.indices = {0};
    cfg.seeds = {1};
    cfg.methods = {SweepMethod{false, HeuristicKind::CN, EncoderKind::SAGE, DecoderKind::MLP}};
    cmd_sweep(cfg);
    std::ifstream in(st.dir / sub / "g0/sage+mlp/seed1/report.json", std::ios::binary);
    return std::string{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  };
  const std::string a = run_once("det_a");
  const std::string b = run_once("det_b");
  std::ifstream orig(st.dir / "sage_mlp/g0/sage+mlp/seed1/report.json", std::ios::binary);
  const std::string c{std::istreambuf_iterator<char>(orig), std::istreambuf_iterator<char>()};
  ev = fmt("rerun bytes equal=%d, equal to sweep run=%d", a == b ? 1 : 0, a == c ? 1 : 0);
  return !a.empty() && a == b && a == c;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap_from_env();
  std::string suite = "all";
  for (int i = 1; i + 1 < argc; i += 2)
    if (std::strcmp(argv[i], "--suite") == 0) suite = argv[i + 1];
  const bool theory = suite == "all" || suite == "theory";
  const bool trend = suite == "all" || suite == "trend";

  if (theory) {
    criterion(1, "thm1 closed form (exact)", c1_closed_form);
    criterion(2, "thm1 training: zero loss + slope signs", c2_thm1_training);
    criterion(3, "thm2 gated: oracle none, distmult stuck, mlp separates", c3_thm2);
    criterion(4, "thm3 grid: routes, baseline, region", c4_thm3_grid);
    criterion(5, "gradient checks across the model matrix", c5_gradient_checks);
    criterion(6, "oracle equivalences (adjacency, rr, threshold)", c6_oracle_equivalences);
  }
  if (trend) {
    TrendState st;
    const auto t0 = std::chrono::steady_clock::now();
    run_trend_sweeps(st);
    std::printf("-- sweeps done in %.0fs\n",
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    criterion(7, "U-shape for sage+mlp across the sweep",
              [&](std::string& ev) { return c7_ushape(st, ev); });
    criterion(8, "decoder ordering at the negative extreme",
              [&](std::string& ev) { return c8_decoder_ordering(st, ev); });
    criterion(9, "encoder ordering at the negative extreme",
              [&](std::string& ev) { return c9_encoder_ordering(st, ev); });
    criterion(10, "heuristics: blind at idx0, peak at idx9",
              [&](std::string& ev) { return c10_heuristics(st, ev); });
    criterion(11, "task classification across the sweep",
              [&](std::string& ev) { return c11_classification(st, ev); });
    criterion(12, "bucketized analysis plumbing",
              [&](std::string& ev) { return c12_bucket_plumbing(st, ev); });
    criterion(13, "end-to-end determinism (byte-identical reports)",
              [&](std::string& ev) { return c13_determinism(st, ev); });
  }

  std::printf("%s: %d criterion failure(s)\n",
              g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL", g_failures);
  return g_failures == 0 ? 0 : 1;
}
