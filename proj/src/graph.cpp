#include "hetlink/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hetlink/common.hpp"
#include "hetlink/kernels.hpp"
#include "hetlink/rng.hpp"

namespace hetlink {

Graph Graph::build(std::size_t n_nodes, std::span<const Edge> edge_list, BuildStats* stats) {
  BuildStats local;
  std::vector<Edge> canon;
  canon.reserve(edge_list.size());
  for (const auto& [a, b] : edge_list) {
    if (a >= n_nodes || b >= n_nodes)
      throw InputError("build_graph: edge endpoint out of range: (" + std::to_string(a) + "," +
                       std::to_string(b) + ") with n=" + std::to_string(n_nodes));
    if (a == b) {
      ++local.self_loops_dropped;
      continue;
    }
    canon.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(canon.begin(), canon.end());
  const std::size_t before = canon.size();
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
  local.duplicates_dropped = before - canon.size();
  if (stats) *stats = local;

  Graph g;
  g.n_nodes_ = n_nodes;
  g.edges_ = std::move(canon);
  std::vector<std::uint64_t> deg(n_nodes + 1, 0);
  for (const auto& [u, v] : g.edges_) {
    ++deg[u + 1];
    ++deg[v + 1];
  }
  g.offsets_.assign(n_nodes + 1, 0);
  for (std::size_t i = 1; i <= n_nodes; ++i) g.offsets_[i] = g.offsets_[i - 1] + deg[i];
  g.adj_.assign(g.offsets_[n_nodes], 0);
  std::vector<std::uint64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& [u, v] : g.edges_) {
    g.adj_[cursor[u]++] = v;
    g.adj_[cursor[v]++] = u;
  }
  for (std::size_t v = 0; v < n_nodes; ++v)
    std::sort(g.adj_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]),
              g.adj_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]));
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u == v) return false;
  if (degree(u) > degree(v)) std::swap(u, v);
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

EdgeSplit split_edges(const Graph& g, std::array<double, 3> ratio, std::uint64_t seed) {
  double sum = ratio[0] + ratio[1] + ratio[2];
  for (double r : ratio)
    if (r < 0.0) throw InputError("split_edges: negative ratio component");
  if (std::abs(sum - 1.0) > 1e-9) throw InputError("split_edges: ratio components must sum to 1");

  std::vector<Edge> shuffled = g.edges();
  SplitMix64 rng(mix_seed(seed, 0, /*tag=*/0x51));
  for (std::size_t i = shuffled.size(); i > 1; --i)
    std::swap(shuffled[i - 1], shuffled[rng.uniform_index(i)]);

  const std::size_t m = shuffled.size();
  const std::size_t n_valid = static_cast<std::size_t>(std::floor(ratio[1] * static_cast<double>(m)));
  const std::size_t n_test = static_cast<std::size_t>(std::floor(ratio[2] * static_cast<double>(m)));
  const std::size_t n_train = m - n_valid - n_test;

  EdgeSplit split;
  split.ratio = ratio;
  split.train.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.valid.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train),
                     shuffled.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid));
  split.test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid), shuffled.end());
  return split;
}

Graph graph_from_edges(std::size_t n_nodes, std::span<const Edge> edges) {
  return Graph::build(n_nodes, edges);
}

namespace {

void check_rows(const Graph& g, const Mat& X, const char* op) {
  if (X.rows != g.n_nodes())
    throw InputError(std::string(op) + ": X has " + std::to_string(X.rows) + " rows, graph has " +
                     std::to_string(g.n_nodes()) + " nodes");
}

}  // namespace

Mat normalized_adjacency_apply(const Graph& g, const Mat& X) {
  check_rows(g, X, "normalized_adjacency_apply");
  Mat out(X.rows, X.cols);
  kernels::norm_adj_apply(g.n_nodes(), g.offsets(), g.adj(), X, out);
  return out;
}

Mat mean_neighbor_apply(const Graph& g, const Mat& X) {
  check_rows(g, X, "mean_neighbor_apply");
  Mat out(X.rows, X.cols);
  kernels::mean_nb_apply(g.n_nodes(), g.offsets(), g.adj(), X, out);
  return out;
}

Mat selfloop_mean_apply(const Graph& g, const Mat& X) {
  check_rows(g, X, "selfloop_mean_apply");
  Mat out(X.rows, X.cols);
  kernels::selfloop_mean_apply(g.n_nodes(), g.offsets(), g.adj(), X, out);
  return out;
}

Mat mean_neighbor_apply_transpose(const Graph& g, const Mat& X) {
  check_rows(g, X, "mean_neighbor_apply_transpose");
  Mat out(X.rows, X.cols);
  kernels::mean_nb_apply_t(g.n_nodes(), g.offsets(), g.adj(), X, out);
  return out;
}

Mat selfloop_mean_apply_transpose(const Graph& g, const Mat& X) {
  check_rows(g, X, "selfloop_mean_apply_transpose");
  Mat out(X.rows, X.cols);
  kernels::selfloop_mean_apply_t(g.n_nodes(), g.offsets(), g.adj(), X, out);
  return out;
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("load_graph: cannot open " + path);
  std::string line;
  std::size_t n_nodes = 0;
  bool have_header = false;
  std::vector<Edge> edges;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    if (!have_header) {
      std::string tag;
      if (!(ls >> tag)) continue;  // blank line before header
      if (tag != "nodes")
        throw InputError("load_graph: expected 'nodes <n>' header in " + path);
      if (!(ls >> n_nodes)) throw InputError("load_graph: malformed header in " + path);
      have_header = true;
      continue;
    }
    std::uint64_t a, b;
    if (!(ls >> a)) continue;
    if (!(ls >> b))
      throw InputError("load_graph: malformed edge at line " + std::to_string(lineno) + " of " + path);
    if (a >= n_nodes || b >= n_nodes)
      throw InputError("load_graph: endpoint out of range at line " + std::to_string(lineno) + " of " +
                       path);
    edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
  }
  if (!have_header) throw InputError("load_graph: missing 'nodes <n>' header in " + path);
  return Graph::build(n_nodes, edges);
}

void save_graph(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("save_graph: cannot open " + path);
  out << "nodes " << g.n_nodes() << "\n";
  for (const auto& [u, v] : g.edges()) out << u << " " << v << "\n";
  if (!out) throw InputError("save_graph: write failed for " + path);
}

}  // namespace hetlink
