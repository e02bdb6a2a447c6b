#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetlink/eval.hpp"
#include "hetlink/graph.hpp"

namespace hetlink {

// Feature-agnostic scoring baselines over the train graph.

std::size_t common_neighbors(const Graph& g, NodeId u, NodeId v);
double adamic_adar(const Graph& g, NodeId u, NodeId v);
double resource_allocation(const Graph& g, NodeId u, NodeId v);

struct PPRConfig {
  double alpha = 0.15;  // teleport probability
  double tol = 1e-8;    // L1 change threshold
  int max_iterations = 1000;

  void validate() const;
};

// Personalized PageRank vector seeded at `source`: pi = alpha*e_s +
// (1-alpha)*W^T pi with W row-stochastic over neighbors; dangling nodes
// teleport their mass fully back to the seed. Power iteration until the L1
// change drops below tol.
std::vector<double> ppr_vector(const Graph& g, NodeId source, const PPRConfig& cfg);

// Symmetrized score pi_u(v) + pi_v(u).
double ppr_score(const Graph& g, NodeId u, NodeId v, const PPRConfig& cfg);

// Dense all-pairs PPR used during evaluation: one vector per seed node,
// precomputed in parallel (each seed's iteration is independent).
class PprMatrix {
 public:
  PprMatrix(const Graph& g, const PPRConfig& cfg);
  double score(NodeId u, NodeId v) const;  // symmetrized

 private:
  std::size_t n_;
  std::vector<double> pi_;  // row-major, pi_[s*n + v]
};

enum class HeuristicKind { CN, AA, RA, PPR };

HeuristicKind parse_heuristic(const std::string& s);
const char* heuristic_name(HeuristicKind k);

// Scorer adapter for the eval module. For PPR the dense matrix is
// precomputed; the returned scorer shares ownership of it.
PairScorer make_heuristic_scorer(const Graph& g_train, HeuristicKind kind,
                                 const PPRConfig& cfg = {});

}  // namespace hetlink
