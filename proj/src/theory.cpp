#include "hetlink/theory.hpp"

#include <algorithm>
#include <cmath>

#include "hetlink/common.hpp"
#include "hetlink/rng.hpp"
#include "hetlink/training.hpp"

namespace hetlink {

Thm1Solution thm1_closed_form(ThresholdMode mode, double M) {
  Thm1Solution sol;
  sol.mode = mode;
  sol.M = M;
  if (mode == ThresholdMode::Homo) {
    // Constraints score(M)=0, score(1)=1 pin the line; M=1 collapses them.
    if (!(M >= -1.0 && M < 1.0))
      throw DomainError("thm1_closed_form: homophilic threshold must lie in [-1,1)");
    sol.w1 = sol.w2 = 1.0 / (1.0 - M);
    sol.b = 1.0 / (M - 1.0) + 1.0;
    sol.slope = 1.0 / (1.0 - M);
  } else {
    // Constraints score(M)=0, score(-1)=1; M=-1 collapses them.
    if (!(M > -1.0 && M <= 1.0))
      throw DomainError("thm1_closed_form: heterophilic threshold must lie in (-1,1]");
    sol.w1 = sol.w2 = -1.0 / (1.0 + M);
    sol.b = 1.0 - 1.0 / (1.0 + M);
    sol.slope = -1.0 / (1.0 + M);
  }
  return sol;
}

namespace {

EdgeSplit all_train_split(const Graph& g) {
  EdgeSplit split;
  split.train = g.edges();
  split.ratio = {1.0, 0.0, 0.0};
  return split;
}

// Least-squares slope of scores over a similarity probe grid. Probe pairs
// put both angles symmetric around 0, so the DistMult score is an exact
// linear function of k even when w1 != w2.
double fitted_probe_slope(const ModelSpec& spec, const ParamStore& params) {
  const int grid = 201;
  std::vector<double> ks(grid), ys(grid);
  for (int i = 0; i < grid; ++i) {
    const double k = -1.0 + 2.0 * i / (grid - 1);
    const double half = 0.5 * std::acos(std::clamp(k, -1.0, 1.0));
    const double zu[2] = {std::cos(half), std::sin(half)};
    const double zv[2] = {std::cos(half), -std::sin(half)};
    ks[i] = k;
    ys[i] = decode(spec, params, std::span<const double>(zu, 2), std::span<const double>(zv, 2));
  }
  double km = 0.0, ym = 0.0;
  for (int i = 0; i < grid; ++i) {
    km += ks[i];
    ym += ys[i];
  }
  km /= grid;
  ym /= grid;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < grid; ++i) {
    num += (ks[i] - km) * (ys[i] - ym);
    den += (ks[i] - km) * (ks[i] - km);
  }
  return num / den;
}

Batch training_batch(const Graph& g, const TrainConfig& cfg) {
  Batch batch;
  batch.pairs = g.edges();
  auto negs = sample_negatives(g, batch.pairs, cfg.k_neg, mix_seed(cfg.seed, 0, 0xB0));
  batch.labels.assign(g.edges().size(), 1);
  batch.pairs.insert(batch.pairs.end(), negs.begin(), negs.end());
  batch.labels.insert(batch.labels.end(), negs.size(), 0);
  return batch;
}

}  // namespace

Thm1TrainReport verify_thm1_by_training(ThresholdMode mode, double M, std::size_t n_nodes,
                                        std::uint64_t seed) {
  Thm1TrainReport rep;
  rep.closed_form_slope = thm1_closed_form(mode, M).slope;

  auto [g, ucf] = generate_threshold_graph({M, mode, n_nodes, seed});
  if (g.n_edges() == 0) {
    rep.skipped_no_positives = true;
    return rep;
  }
  if (g.n_edges() >= g.max_possible_edges()) {
    // No negatives exist; hinge loss on positives alone is trivially
    // reachable and the slope claim has no contrast to verify.
    rep.skipped_no_negatives = true;
    return rep;
  }

  ModelSpec spec;
  spec.encoder = EncoderKind::NoGNN;
  spec.decoder = DecoderKind::DistMult;
  spec.in_dim = 2;
  ParamStore params = ParamStore::build(spec);
  init_params(spec, params, seed);

  TrainConfig cfg;
  cfg.loss = LossKind::Hinge;
  cfg.optimizer = OptimizerKind::Adam;
  cfg.learning_rate = 0.02;
  cfg.epochs = 4000;
  cfg.seed = seed;
  cfg.stop_below_loss = 0.0;  // hinge reaches an exact zero-loss region
  train(spec, params, g, ucf.rows, all_train_split(g), cfg, g);

  const Batch batch = training_batch(g, cfg);
  rep.final_loss = backward(spec, params, g, ucf.rows, batch, cfg.loss);
  rep.fitted_slope = fitted_probe_slope(spec, params);
  rep.slope_sign_ok = (rep.fitted_slope > 0) == (rep.closed_form_slope > 0);

  auto scores = score_pairs(spec, params, g, ucf.rows, batch.pairs);
  rep.signs_ok_on_train = true;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool ok = batch.labels[i] == 1 ? scores[i] >= 0.0 : scores[i] <= 0.0;
    if (!ok) rep.signs_ok_on_train = false;
  }
  return rep;
}

ThresholdOracleResult single_threshold_oracle(std::span<const double> pos,
                                              std::span<const double> neg) {
  ThresholdOracleResult out;
  if (pos.empty() && neg.empty()) {
    out.exists = true;
    out.min_misclassified = 0;
    return out;
  }

  std::vector<double> merged(pos.begin(), pos.end());
  merged.insert(merged.end(), neg.begin(), neg.end());
  std::sort(merged.begin(), merged.end());
  // Candidate thresholds: below everything, every midpoint between distinct
  // consecutive values, above everything.
  std::vector<double> candidates;
  candidates.push_back(merged.front() - 1.0);
  for (std::size_t i = 1; i < merged.size(); ++i)
    if (merged[i] > merged[i - 1]) candidates.push_back(0.5 * (merged[i - 1] + merged[i]));
  candidates.push_back(merged.back() + 1.0);

  std::vector<double> pos_sorted(pos.begin(), pos.end());
  std::vector<double> neg_sorted(neg.begin(), neg.end());
  std::sort(pos_sorted.begin(), pos_sorted.end());
  std::sort(neg_sorted.begin(), neg_sorted.end());
  auto count_below = [](const std::vector<double>& xs, double t) {
    return static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), t) - xs.begin());
  };

  out.min_misclassified = merged.size() + 1;
  for (double t : candidates) {
    // pos-above: predict positive iff s >= t.
    const std::size_t err_above = count_below(pos_sorted, t) +
                                  (neg_sorted.size() - count_below(neg_sorted, t));
    // pos-below: predict positive iff s < t.
    const std::size_t err_below = (pos_sorted.size() - count_below(pos_sorted, t)) +
                                  count_below(neg_sorted, t);
    if (err_above < out.min_misclassified) {
      out.min_misclassified = err_above;
      out.threshold = t;
      out.pos_above = true;
    }
    if (err_below < out.min_misclassified) {
      out.min_misclassified = err_below;
      out.threshold = t;
      out.pos_above = false;
    }
  }
  out.exists = out.min_misclassified == 0;
  return out;
}

Thm2Report verify_thm2(std::size_t n_nodes, double M1, double M2, std::uint64_t seed) {
  Thm2Report rep;
  auto [g, ucf] = generate_gated_graph(M1, M2, n_nodes, seed);
  if (g.n_edges() >= g.max_possible_edges()) {
    rep.degenerate = true;  // no negatives to separate from
    rep.oracle_found_none = false;
    return rep;
  }
  if (g.n_edges() == 0) {
    rep.degenerate = true;
    rep.oracle_found_none = false;
    return rep;
  }

  TrainConfig dm_cfg;
  dm_cfg.loss = LossKind::Hinge;
  dm_cfg.optimizer = OptimizerKind::Adam;
  dm_cfg.learning_rate = 0.02;
  dm_cfg.epochs = 1500;
  dm_cfg.seed = seed;

  const Batch batch = training_batch(g, dm_cfg);
  std::vector<double> pos_k, neg_k;
  for (std::size_t i = 0; i < batch.pairs.size(); ++i) {
    const double k = std::cos(ucf.angles[batch.pairs[i].first] - ucf.angles[batch.pairs[i].second]);
    (batch.labels[i] == 1 ? pos_k : neg_k).push_back(k);
  }
  auto oracle = single_threshold_oracle(pos_k, neg_k);
  rep.oracle_found_none = !oracle.exists;
  rep.oracle_min_misclassified = oracle.min_misclassified;

  {
    ModelSpec spec;
    spec.encoder = EncoderKind::NoGNN;
    spec.decoder = DecoderKind::DistMult;
    spec.in_dim = 2;
    ParamStore params = ParamStore::build(spec);
    init_params(spec, params, seed);
    train(spec, params, g, ucf.rows, all_train_split(g), dm_cfg, g);
    rep.distmult_loss = backward(spec, params, g, ucf.rows, batch, LossKind::Hinge);
    auto scores = score_pairs(spec, params, g, ucf.rows, batch.pairs);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const bool ok = batch.labels[i] == 1 ? scores[i] >= 0.0 : scores[i] <= 0.0;
      if (!ok) ++rep.distmult_sign_errors;
    }
  }

  {
    ModelSpec spec;
    spec.encoder = EncoderKind::NoGNN;
    spec.decoder = DecoderKind::MLP;
    spec.in_dim = 2;
    spec.decoder_hidden = 64;
    ParamStore params = ParamStore::build(spec);
    init_params(spec, params, seed);
    TrainConfig mlp_cfg = dm_cfg;
    mlp_cfg.learning_rate = 0.005;
    mlp_cfg.epochs = 6000;
    mlp_cfg.stop_below_loss = 1e-5;
    train(spec, params, g, ucf.rows, all_train_split(g), mlp_cfg, g);
    rep.mlp_loss = backward(spec, params, g, ucf.rows, batch, LossKind::Hinge);
  }
  return rep;
}

void Thm3Config::validate() const {
  std::string bad;
  auto flag = [&](const char* f) {
    if (!bad.empty()) bad += ", ";
    bad += f;
  };
  if (d < 0) flag("d");
  if (d == 1) flag("d (the closed forms are undefined at d=1)");
  if (dprime < 0) flag("dprime");
  if (!(alpha < 0.0)) flag("alpha");
  if (!bad.empty()) throw InputError("invalid Thm3Config fields: " + bad);
}

namespace {

// Solves a 3x3 linear system by Gaussian elimination with partial pivoting.
void solve3(double a[3][4]) {
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-12)
      throw DomainError("thm3_separation: singular fit system (theta1 and theta2 too close)");
    for (int c = 0; c < 4; ++c) std::swap(a[col][c], a[pivot][c]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double factor = a[r][col] / a[col][col];
      for (int c = col; c < 4; ++c) a[r][c] -= factor * a[col][c];
    }
  }
  for (int r = 0; r < 3; ++r) a[r][3] /= a[r][r];
}

}  // namespace

SeparationReport thm3_separation(const Thm3Config& cfg) {
  cfg.validate();
  const double d = cfg.d, dp = cfg.dprime, alpha = cfg.alpha;

  SeparationReport rep;
  const double denom = (d - 1.0) * (d - 1.0) * (dp + 1.0) * (dp + 1.0);
  rep.y_edge = (2.0 * alpha * (d - dp) * (d * dp - 1.0) - 4.0 * d * dp + dp * dp +
                d * d * (dp * dp + 1.0) + 1.0) /
               denom;
  rep.y_self = (alpha * (-4.0 * d * dp + dp * dp + d * d * (dp * dp + 1.0) + 1.0) +
                2.0 * (d - dp) * (d * dp - 1.0)) /
               denom;
  rep.delta_gnn = std::abs(rep.y_edge - rep.y_self);
  rep.delta_baseline = 1.0 - alpha;
  rep.reduced = rep.delta_gnn < rep.delta_baseline;

  // Explicit route: fit DistMult on train-degree representations, apply at
  // test degree.
  const double x1[2] = {std::cos(cfg.theta1), std::sin(cfg.theta1)};
  const double x2[2] = {std::cos(cfg.theta2), std::sin(cfg.theta2)};
  auto rep_at = [&](const double* self, const double* other, double deg, double* out) {
    out[0] = (self[0] + deg * other[0]) / (deg + 1.0);
    out[1] = (self[1] + deg * other[1]) / (deg + 1.0);
  };
  double r1[2], r2[2], r1p[2], r2p[2];
  rep_at(x1, x2, d, r1);
  rep_at(x2, x1, d, r2);
  rep_at(x1, x2, dp, r1p);
  rep_at(x2, x1, dp, r2p);

  double sys[3][4] = {
      {r1[0] * r2[0], r1[1] * r2[1], 1.0, 1.0},
      {r1[0] * r1[0], r1[1] * r1[1], 1.0, alpha},
      {r2[0] * r2[0], r2[1] * r2[1], 1.0, alpha},
  };
  solve3(sys);
  const double w1 = sys[0][3], w2 = sys[1][3], b = sys[2][3];
  rep.y_edge_fit = w1 * r1p[0] * r2p[0] + w2 * r1p[1] * r2p[1] + b;
  rep.y_self_fit = w1 * r1p[0] * r1p[0] + w2 * r1p[1] * r1p[1] + b;
  rep.route_gap =
      std::max(std::abs(rep.y_edge - rep.y_edge_fit), std::abs(rep.y_self - rep.y_self_fit));
  return rep;
}

std::vector<Thm3GridRow> verify_thm3_grid(std::span<const int> d_values,
                                          std::span<const int> dprime_values,
                                          std::span<const double> alpha_values, double theta1,
                                          double theta2) {
  std::vector<Thm3GridRow> rows;
  for (int d : d_values)
    for (int dp : dprime_values)
      for (double alpha : alpha_values) {
        Thm3GridRow row;
        row.d = d;
        row.dprime = dp;
        row.alpha = alpha;
        Thm3Config cfg;
        cfg.d = d;
        cfg.dprime = dp;
        cfg.alpha = alpha;
        cfg.theta1 = theta1;
        cfg.theta2 = theta2;
        row.rep = thm3_separation(cfg);
        row.in_region = (d == 0 && dp > 0) || (d >= 2 && dp >= 1 && dp < d);
        rows.push_back(row);
      }
  return rows;
}

}  // namespace hetlink
