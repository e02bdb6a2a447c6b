#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetlink/features.hpp"
#include "hetlink/graph.hpp"

namespace hetlink {

// Uniform subsampling kicks in above this many positive samples.
inline constexpr std::size_t kPosSampleCap = 1'000'000;

// Mean-centered cosine similarity k(u,v) in [-1,1]; 0 when either centered
// norm is degenerate. Symmetric by construction.
double pair_similarity(const FeatureMatrix& fm, NodeId u, NodeId v);

// K = average k(u,v) over all edges. Domain error on an empty edge set.
double graph_similarity(const FeatureMatrix& fm, const Graph& g);

// Empirical similarity distributions for edges (pos) and sampled non-edges
// (neg), sorted ascending, plus the graph similarity K.
struct SimilarityProfile {
  std::vector<double> pos;  // sorted ascending
  std::vector<double> neg;  // sorted ascending
  double K = 0.0;
  double epsilon = 0.05;  // tolerated violating fraction for "most samples"
};

SimilarityProfile build_profile(const FeatureMatrix& fm, const Graph& g,
                                std::size_t n_neg_samples, std::uint64_t seed,
                                double epsilon = 0.05, std::size_t pos_cap = kPosSampleCap);

enum class TaskKind { Homophilic, Heterophilic, Gated, Unclassified };

const char* task_kind_name(TaskKind k);

struct TaskClassification {
  TaskKind kind = TaskKind::Unclassified;
  std::optional<double> M;   // homophilic / heterophilic threshold
  std::optional<double> M1;  // gated lower bound
  std::optional<double> M2;  // gated upper bound
};

// Empirical lower quantile of a sorted sample: s[min(floor(p*m), m-1)].
double empirical_quantile(std::span<const double> sorted, double p);

// With q_p the empirical quantile and e = profile.epsilon:
//   Homophilic   if q_e(pos) > q_{1-e}(neg), M = q_e(pos);
//   Heterophilic if q_{1-e}(pos) < q_e(neg), M = q_{1-e}(pos);
//   else Gated   if the neg mass strictly below q_e(pos) and strictly above
//                q_{1-e}(pos) each exceed e, (M1,M2) = (q_e(pos), q_{1-e}(pos));
//   else Unclassified.
TaskClassification classify_task(const SimilarityProfile& profile);

// 64-bin histogram over [-1,1] for plot-data emission.
std::vector<std::size_t> similarity_histogram(std::span<const double> samples, std::size_t bins = 64);

}  // namespace hetlink
