#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hetlink/dense.hpp"

namespace hetlink {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;  // canonical form u < v

struct BuildStats {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
};

// Immutable undirected simple graph: edges stored once (u < v), adjacency
// expanded both directions in CSR form with neighbor lists sorted ascending.
class Graph {
 public:
  Graph() = default;

  // Canonicalizes, deduplicates and drops self-loops (counted into `stats`).
  static Graph build(std::size_t n_nodes, std::span<const Edge> edge_list,
                     BuildStats* stats = nullptr);

  std::size_t n_nodes() const { return n_nodes_; }
  std::size_t n_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
  }

  bool has_edge(NodeId u, NodeId v) const;

  std::size_t max_possible_edges() const { return n_nodes_ * (n_nodes_ - 1) / 2; }

  const std::uint64_t* offsets() const { return offsets_.data(); }
  const NodeId* adj() const { return adj_.data(); }

 private:
  std::size_t n_nodes_ = 0;
  std::vector<Edge> edges_;            // sorted, u < v
  std::vector<std::uint64_t> offsets_;  // n+1
  std::vector<NodeId> adj_;             // sorted per node
};

struct EdgeSplit {
  std::vector<Edge> train, valid, test;
  std::array<double, 3> ratio{1.0, 0.0, 0.0};
};

// Deterministic shuffle by seed; sizes floor-rounded for valid/test with the
// remainder assigned to train.
EdgeSplit split_edges(const Graph& g, std::array<double, 3> ratio, std::uint64_t seed);

// Graph over the same node set containing only the given edges (the
// message-passing graph for training is built from train edges only).
Graph graph_from_edges(std::size_t n_nodes, std::span<const Edge> edges);

// Normalized-adjacency and neighborhood-mean products. All return a fresh
// matrix; X must have one row per node.
Mat normalized_adjacency_apply(const Graph& g, const Mat& X);
Mat mean_neighbor_apply(const Graph& g, const Mat& X);
Mat selfloop_mean_apply(const Graph& g, const Mat& X);
// Transposed operators, used by reverse-mode differentiation.
Mat mean_neighbor_apply_transpose(const Graph& g, const Mat& X);
Mat selfloop_mean_apply_transpose(const Graph& g, const Mat& X);

// Text format: first line "nodes <n>", then one edge per line "<u> <v>".
// The loader tolerates unordered pairs and '#' comments.
Graph load_graph(const std::string& path);
void save_graph(const Graph& g, const std::string& path);

}  // namespace hetlink
