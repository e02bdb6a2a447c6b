#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hetlink/features.hpp"
#include "hetlink/graph.hpp"
#include "hetlink/model.hpp"

namespace hetlink {

enum class MetricKind { MRR, HitsAtK };

MetricKind parse_metric(const std::string& s);

struct EvalConfig {
  MetricKind metric = MetricKind::MRR;
  int n_neg = 1000;           // corruption negatives per positive (MRR)
  int hits_k = 50;            // K for Hits@K
  int shared_neg_size = 1000; // shared negative set size (Hits@K)
  int deg_buckets = 3;
  int sim_buckets = 3;
  std::uint64_t seed = 7;
  bool corrupt_both = false;  // default corrupts the second endpoint only

  void validate() const;
};

// Thread-safe scorer over node pairs; both learned models and heuristics
// evaluate through this.
using PairScorer = std::function<double(NodeId, NodeId)>;

// RR = 1/(1 + #{s > pos} + 0.5 * #{s == pos}); ties count half.
double reciprocal_rank(double pos_score, std::span<const double> neg_scores);

// Per-positive reciprocal ranks against n_neg fresh corruption negatives.
// Negative streams derive from (seed, positive index), so parallel and
// serial runs agree bit for bit. `reject` holds every known edge (all
// splits).
std::vector<double> per_positive_rr(const PairScorer& scorer, const Graph& reject,
                                    std::span<const Edge> positives, const EvalConfig& cfg);

double mrr_with_scorer(const PairScorer& scorer, const Graph& reject,
                       std::span<const Edge> positives, const EvalConfig& cfg);

double hits_at_k_with_scorer(const PairScorer& scorer, const Graph& reject,
                             std::span<const Edge> positives, const EvalConfig& cfg);

// Model wrappers: one shared encoding pass, then scoring.
double mrr(const ModelSpec& spec, const ParamStore& params, const Graph& g_train, const Mat& X,
           std::span<const Edge> test_pairs, const EvalConfig& cfg, const Graph& reject);

double hits_at_k(const ModelSpec& spec, const ParamStore& params, const Graph& g_train,
                 const Mat& X, std::span<const Edge> test_pairs, const EvalConfig& cfg,
                 const Graph& reject);

struct BucketAssignment {
  int n_deg = 0, n_sim = 0;
  std::vector<int> deg_bucket;          // per test edge
  std::vector<int> sim_bucket;          // per test edge
  std::vector<double> deg_boundaries;   // ascending interior boundaries
  std::vector<double> sim_boundaries;
  std::vector<std::string> warnings;
};

// Buckets each test edge by (min endpoint degree on the train graph,
// similarity k(u,v)); boundaries are empirical terciles of the test-edge
// distributions. Degree buckets auto-reduce to 2 when more than half the
// test edges share one degree value; a degenerate dimension collapses to a
// single bucket with a warning.
BucketAssignment bucketize(const Graph& g_train, const FeatureMatrix& fm,
                           std::span<const Edge> test_pairs, const EvalConfig& cfg);

struct EvalReport {
  std::string metric;  // "mrr" or "hits@K"
  double overall = 0.0;
  int n_deg = 0, n_sim = 0;
  std::vector<double> bucket_value;        // row-major [deg][sim]; 0 when empty
  std::vector<std::size_t> bucket_count;   // row-major [deg][sim]
  std::vector<double> deg_boundaries, sim_boundaries;
  // metadata
  std::string model;
  std::uint64_t seed = 0;
  std::string data_checksum;
  std::vector<std::string> warnings;
};

// Overall metric plus the bucketized grid for a generic scorer.
EvalReport evaluate_scorer(const PairScorer& scorer, const Graph& g_train, const FeatureMatrix& fm,
                           std::span<const Edge> test_pairs, const EvalConfig& cfg,
                           const Graph& reject, const std::string& model_desc);

struct DiffCell {
  double diff = 0.0;
  bool missing = false;
  std::size_t count_a = 0, count_b = 0;
};

struct DiffGrid {
  int n_deg = 0, n_sim = 0;
  std::vector<DiffCell> cells;  // row-major
};

// Elementwise a - b per bucket; a cell is marked missing (not 0) when either
// side has an empty bucket.
DiffGrid compare_reports(const EvalReport& a, const EvalReport& b);

}  // namespace hetlink
