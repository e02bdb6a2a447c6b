#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetlink/dense.hpp"

namespace hetlink {

// Centered-feature norms below this are treated as degenerate: the node gets
// a zero centered-unit row and similarity 0 against everything.
inline constexpr double kNormEps = 1e-12;

// n x F feature store with cached column means and mean-centered,
// L2-normalized rows. Immutable after construction.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(Mat rows);

  std::size_t n() const { return rows_.rows; }
  std::size_t dim() const { return rows_.cols; }

  const Mat& rows() const { return rows_; }
  const std::vector<double>& mean() const { return mean_; }

  // Row v is centered_unit[v] = (x_v - mean) / ||x_v - mean||, or zero when
  // the centered norm is below kNormEps.
  const Mat& centered_unit() const { return centered_unit_; }

 private:
  Mat rows_;
  std::vector<double> mean_;
  Mat centered_unit_;
};

// i.i.d. standard normal entries, deterministic by seed.
FeatureMatrix gaussian_features(std::size_t n, std::size_t f, std::uint64_t seed);

struct UnitCircleFeatures {
  std::vector<double> angles;
  Mat rows;  // (cos theta, sin theta) per node
};

UnitCircleFeatures unit_circle_features(std::vector<double> angles);

// Text format: header "feat <n> <F>", then n lines of F decimal floats.
// Binary format: magic "HLPF", u64 LE n and F, then n*F IEEE-754 f32 LE
// values row-major. Binary round-trips are bit-exact once values have been
// quantized to f32; text round-trips are good to 1e-9.
FeatureMatrix load_features(const std::string& path);
void save_features_text(const FeatureMatrix& fm, const std::string& path);
void save_features_binary(const FeatureMatrix& fm, const std::string& path);

}  // namespace hetlink
