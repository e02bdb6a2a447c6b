#include "hetlink/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "hetlink/common.hpp"

namespace hetlink {

namespace {

void check_ids(const Graph& g, NodeId u, NodeId v, const char* op) {
  if (u >= g.n_nodes() || v >= g.n_nodes())
    throw InputError(std::string(op) + ": node id out of range");
}

// Visits each common neighbor of u and v (sorted-list intersection).
template <class F>
void for_each_common_neighbor(const Graph& g, NodeId u, NodeId v, F&& f) {
  auto nu = g.neighbors(u);
  auto nv = g.neighbors(v);
  std::size_t i = 0, j = 0;
  while (i < nu.size() && j < nv.size()) {
    if (nu[i] < nv[j])
      ++i;
    else if (nu[i] > nv[j])
      ++j;
    else {
      f(nu[i]);
      ++i;
      ++j;
    }
  }
}

}  // namespace

std::size_t common_neighbors(const Graph& g, NodeId u, NodeId v) {
  check_ids(g, u, v, "common_neighbors");
  std::size_t count = 0;
  for_each_common_neighbor(g, u, v, [&](NodeId) { ++count; });
  return count;
}

double adamic_adar(const Graph& g, NodeId u, NodeId v) {
  check_ids(g, u, v, "adamic_adar");
  double score = 0.0;
  // A common neighbor is adjacent to both endpoints, so d_w >= 2 and
  // ln d_w > 0.
  for_each_common_neighbor(g, u, v,
                           [&](NodeId w) { score += 1.0 / std::log(static_cast<double>(g.degree(w))); });
  return score;
}

double resource_allocation(const Graph& g, NodeId u, NodeId v) {
  check_ids(g, u, v, "resource_allocation");
  double score = 0.0;
  for_each_common_neighbor(g, u, v, [&](NodeId w) { score += 1.0 / static_cast<double>(g.degree(w)); });
  return score;
}

void PPRConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("PPRConfig: alpha must be in (0,1)");
  if (!(tol > 0.0)) throw InputError("PPRConfig: tol must be positive");
  if (max_iterations < 1) throw InputError("PPRConfig: max_iterations must be >= 1");
}

std::vector<double> ppr_vector(const Graph& g, NodeId source, const PPRConfig& cfg) {
  cfg.validate();
  check_ids(g, source, source, "ppr_vector");
  const std::size_t n = g.n_nodes();
  std::vector<double> cur(n, 0.0), next(n, 0.0);
  cur[source] = 1.0;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    double dangling = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      const double mass = cur[v];
      if (mass == 0.0) continue;
      const std::size_t deg = g.degree(static_cast<NodeId>(v));
      if (deg == 0) {
        dangling += mass;
        continue;
      }
      const double share = mass / static_cast<double>(deg);
      for (NodeId w : g.neighbors(static_cast<NodeId>(v))) next[w] += share;
    }
    // Teleport plus full redistribution of dangling mass to the seed.
    for (std::size_t v = 0; v < n; ++v) next[v] *= (1.0 - cfg.alpha);
    next[source] += cfg.alpha + (1.0 - cfg.alpha) * dangling;
    double change = 0.0;
    for (std::size_t v = 0; v < n; ++v) change += std::abs(next[v] - cur[v]);
    cur.swap(next);
    if (change < cfg.tol) return cur;
  }
  throw NumericError("ppr_vector: power iteration did not converge within max_iterations");
}

double ppr_score(const Graph& g, NodeId u, NodeId v, const PPRConfig& cfg) {
  auto pu = ppr_vector(g, u, cfg);
  auto pv = ppr_vector(g, v, cfg);
  return pu[v] + pv[u];
}

PprMatrix::PprMatrix(const Graph& g, const PPRConfig& cfg) : n_(g.n_nodes()), pi_(n_ * n_, 0.0) {
  const std::int64_t n = static_cast<std::int64_t>(n_);
  bool failed = false;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t s = 0; s < n; ++s) {
    try {
      auto vec = ppr_vector(g, static_cast<NodeId>(s), cfg);
      std::copy(vec.begin(), vec.end(), pi_.begin() + static_cast<std::size_t>(s) * n_);
    } catch (const NumericError&) {
#pragma omp atomic write
      failed = true;
    }
  }
  if (failed) throw NumericError("PprMatrix: power iteration did not converge for some seed");
}

double PprMatrix::score(NodeId u, NodeId v) const { return pi_[u * n_ + v] + pi_[v * n_ + u]; }

HeuristicKind parse_heuristic(const std::string& s) {
  if (s == "cn") return HeuristicKind::CN;
  if (s == "aa") return HeuristicKind::AA;
  if (s == "ra") return HeuristicKind::RA;
  if (s == "ppr") return HeuristicKind::PPR;
  throw InputError("unknown heuristic: " + s);
}

const char* heuristic_name(HeuristicKind k) {
  switch (k) {
    case HeuristicKind::CN: return "cn";
    case HeuristicKind::AA: return "aa";
    case HeuristicKind::RA: return "ra";
    default: return "ppr";
  }
}

PairScorer make_heuristic_scorer(const Graph& g_train, HeuristicKind kind, const PPRConfig& cfg) {
  const Graph* g = &g_train;
  switch (kind) {
    case HeuristicKind::CN:
      return [g](NodeId u, NodeId v) { return static_cast<double>(common_neighbors(*g, u, v)); };
    case HeuristicKind::AA:
      return [g](NodeId u, NodeId v) { return adamic_adar(*g, u, v); };
    case HeuristicKind::RA:
      return [g](NodeId u, NodeId v) { return resource_allocation(*g, u, v); };
    case HeuristicKind::PPR: {
      auto matrix = std::make_shared<PprMatrix>(g_train, cfg);
      return [matrix](NodeId u, NodeId v) { return matrix->score(u, v); };
    }
  }
  throw InputError("make_heuristic_scorer: unknown heuristic");
}

}  // namespace hetlink
