#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hetlink/graph.hpp"
#include "hetlink/model.hpp"

namespace hetlink {

enum class LossKind { Hinge, Logistic };
enum class OptimizerKind { SGD, Adam };

LossKind parse_loss(const std::string& s);
OptimizerKind parse_optimizer(const std::string& s);

struct LossGrad {
  double loss = 0.0;
  double dscore = 0.0;  // dL/dscore
};

// L = y*ReLU(-s) + (1-y)*ReLU(s); subgradient at s = 0 is 0.
LossGrad hinge_loss(double score, int y);

// L = softplus(s) - y*s (numerically stable); grad = sigmoid(s) - y.
LossGrad logistic_loss(double score, int y);

struct TrainConfig {
  LossKind loss = LossKind::Logistic;
  int epochs = 200;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  int k_neg = 1;
  double l2_weight = 0.0;
  std::uint64_t seed = 1;
  int eval_every = 10;
  // Validation MRR during training uses a lighter protocol than final
  // evaluation; model selection only needs a consistent ordering.
  int val_n_neg = 50;
  int val_max_positives = 1000;
  // Stop once the epoch loss drops to this value or below (negative
  // disables). Used by theory-lab runs chasing exact-zero hinge loss.
  double stop_below_loss = -1.0;

  void validate() const;  // throws InputError listing violated fields
};

struct Batch {
  std::vector<Edge> pairs;
  std::vector<std::int8_t> labels;  // 1 = edge, 0 = non-edge
};

// For each positive (u,v): k_neg corruptions (u,v') with v' uniform over
// nodes, rejected while v'==u or (u,v') is an edge of `reject`. Each
// positive draws from its own (seed, index)-derived stream.
std::vector<Edge> sample_negatives(const Graph& reject, std::span<const Edge> positives, int k_neg,
                                   std::uint64_t seed);

// Mean batch loss plus l2_weight*||params||^2; exact gradient written into
// params.grad (overwriting). Returns the objective value.
double backward(const ModelSpec& spec, ParamStore& params, const Graph& g, const Mat& X,
                const Batch& batch, LossKind loss, double l2_weight = 0.0);

// Glorot-uniform weights; biases zero; DistMult w starts at all-ones/dim
// (DOT-like start) with b = 0.
void init_params(const ModelSpec& spec, ParamStore& params, std::uint64_t seed);

struct TrainTrace {
  std::vector<double> epoch_loss;
  std::vector<std::pair<int, double>> val_mrr;  // (epoch, mrr)
  int best_epoch = -1;
  double best_val_mrr = -1.0;
  double wall_seconds = 0.0;
  std::uint64_t final_checksum = 0;
};

// Full-batch training over train positives plus sampled negatives, one
// optimizer step per epoch. Returns with `params` holding the
// best-validation parameters (last epoch when there is no validation set).
TrainTrace train(const ModelSpec& spec, ParamStore& params, const Graph& g_train, const Mat& X,
                 const EdgeSplit& split, const TrainConfig& cfg, const Graph& g_reject);

}  // namespace hetlink
