#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hetlink/features.hpp"
#include "hetlink/graph.hpp"

namespace hetlink {

// Similarity-quantile synthetic graphs: all node pairs are ranked by
// mean-centered cosine similarity, partitioned into n_quantiles equal-count
// bins, and one bin's pairs become the edge set.
struct QuantileGenSpec {
  std::size_t n_nodes = 2000;
  std::size_t n_quantiles = 50;
  std::size_t index = 0;                    // which quantile becomes the graph
  double edge_subsample_rate = 1.0;         // Bernoulli keep-rate within the quantile
  std::uint64_t seed = 1;                   // drives subsampling only
  std::size_t pair_budget = 50'000'000;     // guard for the O(n^2) pass

  void validate() const;
};

struct QuantileGenResult {
  Graph graph;
  double realized_K = 0.0;   // mean similarity over emitted edges
  double sim_lo = 0.0;       // realized similarity range of emitted edges
  double sim_hi = 0.0;
  double bound_lo = 0.0;     // quantile boundaries used
  double bound_hi = 0.0;
  std::size_t edge_count = 0;
};

QuantileGenResult generate_quantile_graph(const QuantileGenSpec& spec, const FeatureMatrix& fm);

// One O(n^2) similarity pass shared across several quantile indices.
std::vector<QuantileGenResult> generate_quantile_graphs(const QuantileGenSpec& spec,
                                                        const FeatureMatrix& fm,
                                                        const std::vector<std::size_t>& indices);

// The default 10-index sweep: the 3 smallest quantiles, the 3 largest, and 4
// spread evenly in between ({3,17,31,45} for 50 quantiles).
std::vector<std::size_t> default_sweep_quantiles(std::size_t n_quantiles = 50);

// Two feature blocks at angles theta1/theta2 wired d-regular bipartite
// (circulant), so every node sees exactly d cross-block neighbors.
struct TwoFeatureSpec {
  std::size_t d = 0;
  double theta1 = 0.0;
  double theta2 = 3.141592653589793238462643383279;
  std::size_t block_size = 4;
};

std::pair<Graph, FeatureMatrix> generate_two_feature_graph(const TwoFeatureSpec& spec);

enum class ThresholdMode { Homo, Hetero };

// Random unit-circle features; (u,v) connected iff cos(theta_u - theta_v)
// >= M (homo) or <= M (hetero). Positive and negative similarity samples are
// strictly separated at M by construction.
struct ThresholdSpec {
  double M = 0.5;
  ThresholdMode mode = ThresholdMode::Homo;
  std::size_t n_nodes = 400;
  std::uint64_t seed = 1;
};

std::pair<Graph, UnitCircleFeatures> generate_threshold_graph(const ThresholdSpec& spec);

// Gated construction: (u,v) connected iff M1 <= cos(theta_u - theta_v) <= M2.
std::pair<Graph, UnitCircleFeatures> generate_gated_graph(double M1, double M2, std::size_t n_nodes,
                                                          std::uint64_t seed);

}  // namespace hetlink
