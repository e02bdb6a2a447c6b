#include "hetlink/eval.hpp"

#include <algorithm>
#include <cmath>

#include "hetlink/common.hpp"
#include "hetlink/kernels.hpp"
#include "hetlink/rng.hpp"
#include "hetlink/similarity.hpp"

namespace hetlink {

MetricKind parse_metric(const std::string& s) {
  if (s == "mrr") return MetricKind::MRR;
  if (s == "hits" || s == "hits_at_k") return MetricKind::HitsAtK;
  throw InputError("unknown metric: " + s);
}

void EvalConfig::validate() const {
  std::string bad;
  auto flag = [&](const char* f) {
    if (!bad.empty()) bad += ", ";
    bad += f;
  };
  if (n_neg < 1) flag("n_neg");
  if (hits_k < 1) flag("hits_k");
  if (shared_neg_size < 1) flag("shared_neg_size");
  if (deg_buckets < 1) flag("deg_buckets");
  if (sim_buckets < 1) flag("sim_buckets");
  if (!bad.empty()) throw InputError("invalid EvalConfig fields: " + bad);
}

double reciprocal_rank(double pos_score, std::span<const double> neg_scores) {
  double above = 0.0;
  for (double s : neg_scores) {
    if (s > pos_score)
      above += 1.0;
    else if (s == pos_score)
      above += 0.5;
  }
  return 1.0 / (1.0 + above);
}

namespace {

constexpr std::uint64_t kTagMrr = 0xE1;
constexpr std::uint64_t kTagHits = 0xE2;
constexpr int kRetryCap = 10000;

// One corruption of (u,v); by default replaces v.
Edge sample_corruption(const Graph& reject, NodeId u, NodeId v, SplitMix64& rng, bool corrupt_both,
                       bool& ok) {
  const std::size_t n = reject.n_nodes();
  for (int attempt = 0; attempt < kRetryCap; ++attempt) {
    const bool flip = corrupt_both && (rng.next() & 1u);
    const NodeId fixed = flip ? v : u;
    const NodeId cand = static_cast<NodeId>(rng.uniform_index(n));
    if (cand == fixed || reject.has_edge(fixed, cand)) continue;
    ok = true;
    return flip ? Edge{cand, fixed} : Edge{fixed, cand};
  }
  ok = false;
  return {0, 0};
}

}  // namespace

std::vector<double> per_positive_rr(const PairScorer& scorer, const Graph& reject,
                                    std::span<const Edge> positives, const EvalConfig& cfg) {
  cfg.validate();
  std::vector<double> rr(positives.size(), 0.0);
  const std::int64_t m = static_cast<std::int64_t>(positives.size());
  bool cap_exceeded = false;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < m; ++i) {
    const auto [u, v] = positives[static_cast<std::size_t>(i)];
    SplitMix64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(i), kTagMrr));
    std::vector<double> neg(static_cast<std::size_t>(cfg.n_neg));
    bool ok_all = true;
    for (int t = 0; t < cfg.n_neg; ++t) {
      bool ok = false;
      Edge e = sample_corruption(reject, u, v, rng, cfg.corrupt_both, ok);
      if (!ok) {
        ok_all = false;
        break;
      }
      neg[static_cast<std::size_t>(t)] = scorer(e.first, e.second);
    }
    if (!ok_all) {
#pragma omp atomic write
      cap_exceeded = true;
      continue;
    }
    rr[static_cast<std::size_t>(i)] = reciprocal_rank(scorer(u, v), neg);
  }
  if (cap_exceeded)
    throw ResourceError("per_positive_rr: corruption sampling exceeded retry cap (graph too dense)");
  return rr;
}

double mrr_with_scorer(const PairScorer& scorer, const Graph& reject,
                       std::span<const Edge> positives, const EvalConfig& cfg) {
  if (positives.empty()) throw DomainError("mrr: no test positives");
  auto rr = per_positive_rr(scorer, reject, positives, cfg);
  return kernels::fixed_order_sum(rr) / static_cast<double>(rr.size());
}

namespace {

// Per-edge 0/1 hits against one shared negative set. When K covers the whole
// negative pool every positive is a hit by convention.
std::vector<double> per_positive_hits(const PairScorer& scorer, const Graph& reject,
                                      std::span<const Edge> positives, const EvalConfig& cfg) {
  if (cfg.hits_k >= cfg.shared_neg_size) return std::vector<double>(positives.size(), 1.0);

  std::vector<double> neg_scores(static_cast<std::size_t>(cfg.shared_neg_size));
  const std::size_t n = reject.n_nodes();
  bool cap_exceeded = false;
  const std::int64_t s = static_cast<std::int64_t>(cfg.shared_neg_size);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < s; ++i) {
    SplitMix64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(i), kTagHits));
    bool ok = false;
    for (int attempt = 0; attempt < kRetryCap; ++attempt) {
      NodeId a = static_cast<NodeId>(rng.uniform_index(n));
      NodeId b = static_cast<NodeId>(rng.uniform_index(n));
      if (a == b || reject.has_edge(a, b)) continue;
      neg_scores[static_cast<std::size_t>(i)] = scorer(a, b);
      ok = true;
      break;
    }
    if (!ok) {
#pragma omp atomic write
      cap_exceeded = true;
    }
  }
  if (cap_exceeded) throw ResourceError("hits_at_k: negative sampling exceeded retry cap");

  std::vector<double> sorted = neg_scores;
  std::nth_element(sorted.begin(), sorted.begin() + (cfg.hits_k - 1), sorted.end(),
                   std::greater<double>());
  const double threshold = sorted[static_cast<std::size_t>(cfg.hits_k - 1)];

  std::vector<double> hits(positives.size());
  const std::int64_t m = static_cast<std::int64_t>(positives.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i) {
    const auto [u, v] = positives[static_cast<std::size_t>(i)];
    hits[static_cast<std::size_t>(i)] = scorer(u, v) > threshold ? 1.0 : 0.0;
  }
  return hits;
}

}  // namespace

double hits_at_k_with_scorer(const PairScorer& scorer, const Graph& reject,
                             std::span<const Edge> positives, const EvalConfig& cfg) {
  cfg.validate();
  if (positives.empty()) throw DomainError("hits_at_k: no test positives");
  auto hits = per_positive_hits(scorer, reject, positives, cfg);
  return kernels::fixed_order_sum(hits) / static_cast<double>(positives.size());
}

namespace {

PairScorer model_scorer(const ModelSpec& spec, const ParamStore& params, const Graph& g_train,
                        const Mat& X, Mat& z_out, DecodeContext& ctx_out) {
  z_out = encode(spec, params, g_train, X);
  ctx_out = make_decode_context(spec, params, z_out);
  const DecodeContext* ctx = &ctx_out;
  return [ctx](NodeId a, NodeId b) { return ctx->score(a, b); };
}

}  // namespace

double mrr(const ModelSpec& spec, const ParamStore& params, const Graph& g_train, const Mat& X,
           std::span<const Edge> test_pairs, const EvalConfig& cfg, const Graph& reject) {
  Mat z;
  DecodeContext ctx;
  auto scorer = model_scorer(spec, params, g_train, X, z, ctx);
  return mrr_with_scorer(scorer, reject, test_pairs, cfg);
}

double hits_at_k(const ModelSpec& spec, const ParamStore& params, const Graph& g_train,
                 const Mat& X, std::span<const Edge> test_pairs, const EvalConfig& cfg,
                 const Graph& reject) {
  Mat z;
  DecodeContext ctx;
  auto scorer = model_scorer(spec, params, g_train, X, z, ctx);
  return hits_at_k_with_scorer(scorer, reject, test_pairs, cfg);
}

namespace {

// Boundaries t_k = sorted[floor(k*m/parts)], k = 1..parts-1; bucket of x is
// the first k with x < t_k, else parts-1.
std::vector<double> quantile_boundaries(std::vector<double> values, int parts) {
  std::sort(values.begin(), values.end());
  std::vector<double> bounds;
  const std::size_t m = values.size();
  for (int k = 1; k < parts; ++k)
    bounds.push_back(values[std::min(m - 1, k * m / static_cast<std::size_t>(parts))]);
  return bounds;
}

int bucket_of(double x, std::span<const double> bounds) {
  for (std::size_t k = 0; k < bounds.size(); ++k)
    if (x < bounds[k]) return static_cast<int>(k);
  return static_cast<int>(bounds.size());
}

}  // namespace

BucketAssignment bucketize(const Graph& g_train, const FeatureMatrix& fm,
                           std::span<const Edge> test_pairs, const EvalConfig& cfg) {
  cfg.validate();
  if (test_pairs.size() < static_cast<std::size_t>(std::max(cfg.deg_buckets, cfg.sim_buckets)))
    throw DomainError("bucketize: fewer test edges than buckets");

  std::vector<double> degs(test_pairs.size()), sims(test_pairs.size());
  for (std::size_t i = 0; i < test_pairs.size(); ++i) {
    const auto [u, v] = test_pairs[i];
    degs[i] = static_cast<double>(std::min(g_train.degree(u), g_train.degree(v)));
    sims[i] = pair_similarity(fm, u, v);
  }

  BucketAssignment out;

  // Degree bucket count auto-reduces when one degree value dominates.
  int deg_parts = cfg.deg_buckets;
  {
    std::vector<double> sorted = degs;
    std::sort(sorted.begin(), sorted.end());
    std::size_t best_run = 0, run = 1;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      run = (sorted[i] == sorted[i - 1]) ? run + 1 : 1;
      best_run = std::max(best_run, run);
    }
    best_run = std::max(best_run, run);
    if (deg_parts > 2 && best_run * 2 > sorted.size()) {
      deg_parts = 2;
      out.warnings.push_back("degree buckets reduced to 2: one degree value covers >50% of test edges");
    }
  }

  auto constant = [](std::span<const double> xs) {
    for (double x : xs)
      if (x != xs[0]) return false;
    return true;
  };

  int sim_parts = cfg.sim_buckets;
  if (constant(sims) && sim_parts > 1) {
    sim_parts = 1;
    out.warnings.push_back("similarity collapsed to 1 bucket: all test-edge similarities equal");
  }
  if (constant(degs) && deg_parts > 1) {
    deg_parts = 1;
    out.warnings.push_back("degree collapsed to 1 bucket: all test-edge degrees equal");
  }

  out.n_deg = deg_parts;
  out.n_sim = sim_parts;
  out.deg_boundaries = deg_parts > 1 ? quantile_boundaries(degs, deg_parts) : std::vector<double>{};
  out.sim_boundaries = sim_parts > 1 ? quantile_boundaries(sims, sim_parts) : std::vector<double>{};

  out.deg_bucket.resize(test_pairs.size());
  out.sim_bucket.resize(test_pairs.size());
  for (std::size_t i = 0; i < test_pairs.size(); ++i) {
    out.deg_bucket[i] = deg_parts > 1 ? bucket_of(degs[i], out.deg_boundaries) : 0;
    out.sim_bucket[i] = sim_parts > 1 ? bucket_of(sims[i], out.sim_boundaries) : 0;
  }
  return out;
}

EvalReport evaluate_scorer(const PairScorer& scorer, const Graph& g_train, const FeatureMatrix& fm,
                           std::span<const Edge> test_pairs, const EvalConfig& cfg,
                           const Graph& reject, const std::string& model_desc) {
  EvalReport rep;
  rep.model = model_desc;
  rep.seed = cfg.seed;

  if (test_pairs.empty()) throw DomainError("evaluate_scorer: no test positives");
  std::vector<double> per_edge;
  if (cfg.metric == MetricKind::MRR) {
    rep.metric = "mrr";
    per_edge = per_positive_rr(scorer, reject, test_pairs, cfg);
  } else {
    rep.metric = "hits@" + std::to_string(cfg.hits_k);
    per_edge = per_positive_hits(scorer, reject, test_pairs, cfg);
  }
  rep.overall = kernels::fixed_order_sum(per_edge) / static_cast<double>(per_edge.size());

  BucketAssignment buckets = bucketize(g_train, fm, test_pairs, cfg);
  rep.n_deg = buckets.n_deg;
  rep.n_sim = buckets.n_sim;
  rep.deg_boundaries = buckets.deg_boundaries;
  rep.sim_boundaries = buckets.sim_boundaries;
  rep.warnings = buckets.warnings;
  const std::size_t cells = static_cast<std::size_t>(rep.n_deg) * rep.n_sim;
  rep.bucket_value.assign(cells, 0.0);
  rep.bucket_count.assign(cells, 0);
  for (std::size_t i = 0; i < test_pairs.size(); ++i) {
    const std::size_t c =
        static_cast<std::size_t>(buckets.deg_bucket[i]) * rep.n_sim + buckets.sim_bucket[i];
    rep.bucket_value[c] += per_edge[i];
    rep.bucket_count[c] += 1;
  }
  for (std::size_t c = 0; c < cells; ++c)
    if (rep.bucket_count[c] > 0) rep.bucket_value[c] /= static_cast<double>(rep.bucket_count[c]);
  return rep;
}

DiffGrid compare_reports(const EvalReport& a, const EvalReport& b) {
  if (a.n_deg != b.n_deg || a.n_sim != b.n_sim)
    throw InputError("compare_reports: bucket grids have different shapes");
  DiffGrid grid;
  grid.n_deg = a.n_deg;
  grid.n_sim = a.n_sim;
  grid.cells.resize(a.bucket_value.size());
  for (std::size_t c = 0; c < grid.cells.size(); ++c) {
    DiffCell& cell = grid.cells[c];
    cell.count_a = a.bucket_count[c];
    cell.count_b = b.bucket_count[c];
    if (a.bucket_count[c] == 0 || b.bucket_count[c] == 0) {
      cell.missing = true;
    } else {
      cell.diff = a.bucket_value[c] - b.bucket_value[c];
    }
  }
  return grid;
}

}  // namespace hetlink
