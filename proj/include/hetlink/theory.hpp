#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hetlink/synthgen.hpp"

namespace hetlink {

// Closed-form DistMult for a threshold-separable task on unit-circle
// features. Homophilic: w = (1,1)/(1-M), b = 1/(M-1)+1, score rises with
// similarity at slope 1/(1-M). Heterophilic: w = -(1,1)/(1+M),
// b = 1 - 1/(1+M), slope -1/(1+M).
struct Thm1Solution {
  ThresholdMode mode = ThresholdMode::Homo;
  double M = 0.0;
  double w1 = 0.0, w2 = 0.0, b = 0.0;
  double slope = 0.0;

  // Predicted score as a function of pair similarity k.
  double predict(double k) const { return slope * k + b; }
};

Thm1Solution thm1_closed_form(ThresholdMode mode, double M);

struct Thm1TrainReport {
  double final_loss = 0.0;
  double fitted_slope = 0.0;
  double closed_form_slope = 0.0;
  bool slope_sign_ok = false;
  bool signs_ok_on_train = false;  // score >= 0 on positives, <= 0 on negatives
  bool skipped_no_negatives = false;
  bool skipped_no_positives = false;
};

// Trains NoGNN+DistMult with hinge loss on a threshold graph and checks the
// slope/sign claims against the closed form.
Thm1TrainReport verify_thm1_by_training(ThresholdMode mode, double M, std::size_t n_nodes,
                                        std::uint64_t seed);

struct ThresholdOracleResult {
  bool exists = false;
  double threshold = 0.0;
  bool pos_above = true;  // orientation: positives on/above the threshold
  std::size_t min_misclassified = 0;
};

// Brute force over all midpoints of the merged sorted score list and both
// orientations; reports the best separating threshold or the minimal
// misclassification count when none exists.
ThresholdOracleResult single_threshold_oracle(std::span<const double> pos,
                                              std::span<const double> neg);

struct Thm2Report {
  bool degenerate = false;       // every pair is an edge (no negatives exist)
  bool oracle_found_none = false;
  std::size_t oracle_min_misclassified = 0;
  double distmult_loss = 0.0;
  double mlp_loss = 0.0;
  std::size_t distmult_sign_errors = 0;
};

// Gated construction (edges iff M1 <= cos <= M2): the similarity lists admit
// no single threshold, the trained linear decoder keeps positive hinge loss,
// and the MLP decoder separates.
Thm2Report verify_thm2(std::size_t n_nodes, double M1, double M2, std::uint64_t seed);

struct Thm3Config {
  int d = 0;        // train degree (d != 1; the closed forms have (d-1)^2 denominators)
  int dprime = 0;   // test degree
  double alpha = -1.0;  // target self-pair score, < 0
  double theta1 = 0.52359877559829887307710723054658;  // pi/6
  double theta2 = 2.0943951023931954923084289221863;   // 2*pi/3

  void validate() const;
};

struct SeparationReport {
  double y_edge = 0.0;       // closed-form score of a cross-block test pair
  double y_self = 0.0;       // closed-form score of a test self-pair
  double y_edge_fit = 0.0;   // same scores through the explicit 3-equation fit
  double y_self_fit = 0.0;
  double route_gap = 0.0;    // max |formula - fit|
  double delta_gnn = 0.0;
  double delta_baseline = 0.0;  // 1 - alpha exactly
  bool reduced = false;         // delta_gnn < delta_baseline
};

// Evaluates the degree-shift separation both ways: the closed-form
// expressions, and an explicit DistMult fitted on train-degree self-loop
// mean representations then applied at test degree. The routes must agree.
SeparationReport thm3_separation(const Thm3Config& cfg);

struct Thm3GridRow {
  int d = 0, dprime = 0;
  double alpha = 0.0;
  SeparationReport rep;
  bool in_region = false;  // {d=0, d'>0} or {d>=2, 1<=d'<d}
};

std::vector<Thm3GridRow> verify_thm3_grid(std::span<const int> d_values,
                                          std::span<const int> dprime_values,
                                          std::span<const double> alpha_values, double theta1,
                                          double theta2);

}  // namespace hetlink
