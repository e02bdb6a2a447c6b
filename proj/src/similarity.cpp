#include "hetlink/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "hetlink/common.hpp"
#include "hetlink/kernels.hpp"
#include "hetlink/rng.hpp"

namespace hetlink {

double pair_similarity(const FeatureMatrix& fm, NodeId u, NodeId v) {
  if (u >= fm.n() || v >= fm.n()) throw InputError("pair_similarity: node id out of range");
  const double* cu = fm.centered_unit().row(u);
  const double* cv = fm.centered_unit().row(v);
  double dot = 0.0;
  for (std::size_t j = 0; j < fm.dim(); ++j) dot += cu[j] * cv[j];
  // Rows are unit (or zero), so the dot is the cosine; clamp rounding spill.
  return std::clamp(dot, -1.0, 1.0);
}

double graph_similarity(const FeatureMatrix& fm, const Graph& g) {
  if (g.n_edges() == 0) throw DomainError("graph_similarity: empty edge set");
  std::vector<double> sims(g.n_edges());
  const auto& edges = g.edges();
  const std::int64_t m = static_cast<std::int64_t>(edges.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i)
    sims[static_cast<std::size_t>(i)] =
        pair_similarity(fm, edges[static_cast<std::size_t>(i)].first,
                        edges[static_cast<std::size_t>(i)].second);
  return kernels::fixed_order_sum(sims) / static_cast<double>(g.n_edges());
}

SimilarityProfile build_profile(const FeatureMatrix& fm, const Graph& g,
                                std::size_t n_neg_samples, std::uint64_t seed, double epsilon,
                                std::size_t pos_cap) {
  if (n_neg_samples < 1) throw InputError("build_profile: n_neg_samples must be >= 1");
  if (g.n_nodes() < 2 || g.n_edges() >= g.max_possible_edges())
    throw DomainError("build_profile: graph has no non-edges to sample");

  SimilarityProfile prof;
  prof.epsilon = epsilon;
  prof.K = graph_similarity(fm, g);

  const auto& edges = g.edges();
  if (edges.size() <= pos_cap) {
    prof.pos.resize(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i)
      prof.pos[i] = pair_similarity(fm, edges[i].first, edges[i].second);
  } else {
    SplitMix64 rng(mix_seed(seed, 1, /*tag=*/0x90));
    prof.pos.resize(pos_cap);
    for (std::size_t i = 0; i < pos_cap; ++i) {
      const auto& e = edges[rng.uniform_index(edges.size())];
      prof.pos[i] = pair_similarity(fm, e.first, e.second);
    }
  }

  // Uniform random pairs with exact rejection of edges and self-pairs.
  // Exceptions may not cross the parallel region, so cap violations are
  // flagged and rethrown afterwards.
  prof.neg.resize(n_neg_samples);
  const std::int64_t ns = static_cast<std::int64_t>(n_neg_samples);
  bool cap_exceeded = false;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < ns; ++i) {
    SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(i), /*tag=*/0x91));
    const int kRetryCap = 10000;
    bool ok = false;
    for (int attempt = 0; attempt < kRetryCap; ++attempt) {
      NodeId u = static_cast<NodeId>(rng.uniform_index(g.n_nodes()));
      NodeId v = static_cast<NodeId>(rng.uniform_index(g.n_nodes()));
      if (u == v || g.has_edge(u, v)) continue;
      prof.neg[static_cast<std::size_t>(i)] = pair_similarity(fm, u, v);
      ok = true;
      break;
    }
    if (!ok) {
#pragma omp atomic write
      cap_exceeded = true;
    }
  }
  if (cap_exceeded)
    throw ResourceError("build_profile: non-edge rejection sampling exceeded retry cap");

  std::sort(prof.pos.begin(), prof.pos.end());
  std::sort(prof.neg.begin(), prof.neg.end());
  return prof;
}

const char* task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::Homophilic: return "homophilic";
    case TaskKind::Heterophilic: return "heterophilic";
    case TaskKind::Gated: return "gated";
    default: return "unclassified";
  }
}

double empirical_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DomainError("empirical_quantile: empty sample");
  const std::size_t m = sorted.size();
  auto idx = static_cast<std::size_t>(std::floor(p * static_cast<double>(m)));
  if (idx >= m) idx = m - 1;
  return sorted[idx];
}

namespace {

double fraction_strictly_below(std::span<const double> sorted, double x) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

double fraction_strictly_above(std::span<const double> sorted, double x) {
  auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

}  // namespace

TaskClassification classify_task(const SimilarityProfile& profile) {
  if (profile.pos.empty() || profile.neg.empty())
    throw DomainError("classify_task: empty sample list");
  const double e = profile.epsilon;
  const double pos_lo = empirical_quantile(profile.pos, e);
  const double pos_hi = empirical_quantile(profile.pos, 1.0 - e);
  const double neg_lo = empirical_quantile(profile.neg, e);
  const double neg_hi = empirical_quantile(profile.neg, 1.0 - e);

  TaskClassification out;
  if (pos_lo > neg_hi) {
    out.kind = TaskKind::Homophilic;
    out.M = pos_lo;
  } else if (pos_hi < neg_lo) {
    out.kind = TaskKind::Heterophilic;
    out.M = pos_hi;
  } else if (fraction_strictly_below(profile.neg, pos_lo) > e &&
             fraction_strictly_above(profile.neg, pos_hi) > e) {
    out.kind = TaskKind::Gated;
    out.M1 = pos_lo;
    out.M2 = pos_hi;
  } else {
    out.kind = TaskKind::Unclassified;
  }
  return out;
}

std::vector<std::size_t> similarity_histogram(std::span<const double> samples, std::size_t bins) {
  std::vector<std::size_t> hist(bins, 0);
  for (double s : samples) {
    auto b = static_cast<std::size_t>((std::clamp(s, -1.0, 1.0) + 1.0) / 2.0 * static_cast<double>(bins));
    if (b >= bins) b = bins - 1;
    ++hist[b];
  }
  return hist;
}

}  // namespace hetlink
