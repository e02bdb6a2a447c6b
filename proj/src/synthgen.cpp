#include "hetlink/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "hetlink/common.hpp"
#include "hetlink/rng.hpp"
#include "hetlink/similarity.hpp"

namespace hetlink {

void QuantileGenSpec::validate() const {
  std::string bad;
  auto flag = [&](const char* f) {
    if (!bad.empty()) bad += ", ";
    bad += f;
  };
  if (n_nodes < 2) flag("n_nodes");
  if (n_quantiles < 1) flag("n_quantiles");
  if (index >= n_quantiles) flag("index");
  if (!(edge_subsample_rate > 0.0 && edge_subsample_rate <= 1.0)) flag("edge_subsample_rate");
  if (!bad.empty()) throw InputError("invalid QuantileGenSpec fields: " + bad);
}

namespace {

// Start of row u in flat row-major upper-triangle order: the pair (u,v) with
// u < v sits at row_start(u) + (v - u - 1).
inline std::size_t row_start(std::size_t u, std::size_t n) {
  return u * (n - 1) - u * (u - 1) / 2;
}

}  // namespace

std::vector<QuantileGenResult> generate_quantile_graphs(const QuantileGenSpec& spec,
                                                        const FeatureMatrix& fm,
                                                        const std::vector<std::size_t>& indices) {
  spec.validate();
  if (fm.n() != spec.n_nodes)
    throw InputError("generate_quantile_graph: feature rows != n_nodes");
  const std::size_t n = spec.n_nodes;
  const std::size_t total = n * (n - 1) / 2;
  if (total > spec.pair_budget)
    throw ResourceError("generate_quantile_graph: " + std::to_string(total) +
                        " node pairs exceed the pair budget of " + std::to_string(spec.pair_budget) +
                        "; lower n_nodes or raise the budget");
  const std::size_t q = spec.n_quantiles;

  // Pass 1: all pair similarities, rows in parallel into disjoint slices.
  std::vector<double> sims(total);
  const std::int64_t ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t u = 0; u < ni; ++u) {
    const std::size_t uu = static_cast<std::size_t>(u);
    const std::size_t w = row_start(uu, n);
    for (std::size_t v = uu + 1; v < n; ++v)
      sims[w + (v - uu - 1)] = pair_similarity(fm, static_cast<NodeId>(uu), static_cast<NodeId>(v));
  }

  // Quantile boundaries from the sorted distribution: quantile k covers
  // [sorted[k*T/q], sorted[(k+1)*T/q]) with the last bin upper-inclusive.
  std::vector<double> sorted = sims;
  std::sort(sorted.begin(), sorted.end());
  auto boundary = [&](std::size_t k) {
    const std::size_t idx = k * total / q;
    return sorted[std::min(idx, total - 1)];
  };

  std::vector<QuantileGenResult> results;
  for (std::size_t qi : indices) {
    if (qi >= q) throw InputError("generate_quantile_graph: quantile index out of range");
    const double lo = boundary(qi);
    const bool last = (qi == q - 1);
    const double hi = last ? sorted[total - 1] : boundary(qi + 1);

    std::vector<Edge> edges;
    SplitMix64 sub_rng(mix_seed(spec.seed, qi, /*tag=*/0x5B));
    std::size_t w = 0;
    double k_sum = 0.0;
    double realized_lo = 1.0, realized_hi = -1.0;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v, ++w) {
        const double s = sims[w];
        const bool member = last ? (s >= lo && s <= hi) : (s >= lo && s < hi);
        if (!member) continue;
        if (spec.edge_subsample_rate < 1.0 && sub_rng.uniform01() >= spec.edge_subsample_rate)
          continue;
        edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
        k_sum += s;
        realized_lo = std::min(realized_lo, s);
        realized_hi = std::max(realized_hi, s);
      }

    QuantileGenResult res;
    res.graph = Graph::build(n, edges);
    res.edge_count = edges.size();
    res.realized_K = edges.empty() ? 0.0 : k_sum / static_cast<double>(edges.size());
    res.sim_lo = edges.empty() ? 0.0 : realized_lo;
    res.sim_hi = edges.empty() ? 0.0 : realized_hi;
    res.bound_lo = lo;
    res.bound_hi = hi;
    results.push_back(std::move(res));
  }
  return results;
}

QuantileGenResult generate_quantile_graph(const QuantileGenSpec& spec, const FeatureMatrix& fm) {
  auto res = generate_quantile_graphs(spec, fm, {spec.index});
  return std::move(res.front());
}

std::vector<std::size_t> default_sweep_quantiles(std::size_t n_quantiles) {
  if (n_quantiles < 10) throw InputError("default_sweep_quantiles: need at least 10 quantiles");
  std::vector<std::size_t> out = {0, 1, 2};
  // 4 interior indices spread evenly between the extreme triples.
  const double lo = 3.0, hi = static_cast<double>(n_quantiles - 5);
  for (int k = 0; k < 4; ++k)
    out.push_back(static_cast<std::size_t>(std::llround(lo + k * (hi - lo) / 3.0)));
  out.push_back(n_quantiles - 3);
  out.push_back(n_quantiles - 2);
  out.push_back(n_quantiles - 1);
  return out;
}

std::pair<Graph, FeatureMatrix> generate_two_feature_graph(const TwoFeatureSpec& spec) {
  if (spec.block_size < std::max<std::size_t>(spec.d, 1))
    throw InputError("generate_two_feature_graph: degree exceeds opposite block size");
  const std::size_t b = spec.block_size;
  const std::size_t n = 2 * b;
  Mat rows(n, 2);
  for (std::size_t i = 0; i < b; ++i) {
    rows(i, 0) = std::cos(spec.theta1);
    rows(i, 1) = std::sin(spec.theta1);
    rows(b + i, 0) = std::cos(spec.theta2);
    rows(b + i, 1) = std::sin(spec.theta2);
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t t = 0; t < spec.d; ++t)
      edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(b + (i + t) % b));
  return {Graph::build(n, edges), FeatureMatrix(std::move(rows))};
}

namespace {

std::vector<double> random_angles(std::size_t n, std::uint64_t seed) {
  std::vector<double> angles(n);
  SplitMix64 rng(mix_seed(seed, 0, /*tag=*/0x7C));
  for (std::size_t i = 0; i < n; ++i)
    angles[i] = rng.uniform01() * 6.283185307179586476925286766559;
  return angles;
}

}  // namespace

std::pair<Graph, UnitCircleFeatures> generate_threshold_graph(const ThresholdSpec& spec) {
  if (!(spec.M >= -1.0 && spec.M <= 1.0)) throw InputError("generate_threshold_graph: M outside [-1,1]");
  if (spec.n_nodes < 1) throw InputError("generate_threshold_graph: empty node set");
  auto ucf = unit_circle_features(random_angles(spec.n_nodes, spec.seed));
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < spec.n_nodes; ++u)
    for (std::size_t v = u + 1; v < spec.n_nodes; ++v) {
      const double k = std::cos(ucf.angles[u] - ucf.angles[v]);
      const bool connect = spec.mode == ThresholdMode::Homo ? (k >= spec.M) : (k <= spec.M);
      if (connect) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
  return {Graph::build(spec.n_nodes, edges), std::move(ucf)};
}

std::pair<Graph, UnitCircleFeatures> generate_gated_graph(double M1, double M2, std::size_t n_nodes,
                                                          std::uint64_t seed) {
  if (M1 > M2) throw InputError("generate_gated_graph: M1 > M2");
  if (!(M1 >= -1.0 && M2 <= 1.0)) throw InputError("generate_gated_graph: bounds outside [-1,1]");
  auto ucf = unit_circle_features(random_angles(n_nodes, seed));
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n_nodes; ++u)
    for (std::size_t v = u + 1; v < n_nodes; ++v) {
      const double k = std::cos(ucf.angles[u] - ucf.angles[v]);
      if (k >= M1 && k <= M2) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
  return {Graph::build(n_nodes, edges), std::move(ucf)};
}

}  // namespace hetlink
