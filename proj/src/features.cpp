#include "hetlink/features.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hetlink/common.hpp"
#include "hetlink/rng.hpp"

namespace hetlink {

FeatureMatrix::FeatureMatrix(Mat rows) : rows_(std::move(rows)) {
  const std::size_t n = rows_.rows, f = rows_.cols;
  mean_.assign(f, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = rows_.row(i);
    for (std::size_t j = 0; j < f; ++j) mean_[j] += xi[j];
  }
  if (n > 0)
    for (std::size_t j = 0; j < f; ++j) mean_[j] /= static_cast<double>(n);

  centered_unit_ = Mat(n, f);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = rows_.row(i);
    double* ci = centered_unit_.row(i);
    double norm_sq = 0.0;
    for (std::size_t j = 0; j < f; ++j) {
      ci[j] = xi[j] - mean_[j];
      norm_sq += ci[j] * ci[j];
    }
    const double norm = std::sqrt(norm_sq);
    if (norm < kNormEps) {
      std::memset(ci, 0, f * sizeof(double));
    } else {
      for (std::size_t j = 0; j < f; ++j) ci[j] /= norm;
    }
  }
}

FeatureMatrix gaussian_features(std::size_t n, std::size_t f, std::uint64_t seed) {
  if (n < 1 || f < 1) throw InputError("gaussian_features: n and F must be >= 1");
  Mat rows(n, f);
  // Per-row streams so a row's values depend only on (seed, row index).
  for (std::size_t i = 0; i < n; ++i) {
    SplitMix64 rng(mix_seed(seed, i, /*tag=*/0xF7));
    double* xi = rows.row(i);
    for (std::size_t j = 0; j < f; ++j) xi[j] = rng.normal();
  }
  return FeatureMatrix(std::move(rows));
}

UnitCircleFeatures unit_circle_features(std::vector<double> angles) {
  for (double a : angles)
    if (!std::isfinite(a)) throw InputError("unit_circle_features: non-finite angle");
  UnitCircleFeatures out;
  out.rows = Mat(angles.size(), 2);
  for (std::size_t i = 0; i < angles.size(); ++i) {
    out.rows(i, 0) = std::cos(angles[i]);
    out.rows(i, 1) = std::sin(angles[i]);
  }
  out.angles = std::move(angles);
  return out;
}

namespace {

constexpr char kMagic[4] = {'H', 'L', 'P', 'F'};

std::uint64_t read_u64_le(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t x = 0;
  for (int i = 7; i >= 0; --i) x = (x << 8) | b[i];
  return x;
}

void write_u64_le(std::ostream& out, std::uint64_t x) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((x >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

FeatureMatrix load_features_binary(std::istream& in, const std::string& path) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw InputError("load_features: bad magic in " + path);
  const std::uint64_t n = read_u64_le(in);
  const std::uint64_t f = read_u64_le(in);
  if (!in) throw InputError("load_features: truncated header in " + path);
  Mat rows(n, f);
  std::vector<float> buf(f);
  for (std::uint64_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(f * sizeof(float)));
    if (!in) throw InputError("load_features: row count mismatch in " + path);
    for (std::uint64_t j = 0; j < f; ++j) {
      if (!std::isfinite(buf[j])) throw InputError("load_features: non-finite value in " + path);
      rows(i, j) = static_cast<double>(buf[j]);
    }
  }
  char extra;
  if (in.read(&extra, 1)) throw InputError("load_features: trailing data in " + path);
  return FeatureMatrix(std::move(rows));
}

FeatureMatrix load_features_text(std::istream& in, const std::string& path) {
  std::string tag;
  std::size_t n = 0, f = 0;
  if (!(in >> tag) || tag != "feat" || !(in >> n >> f))
    throw InputError("load_features: expected 'feat <n> <F>' header in " + path);
  Mat rows(n, f);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < f; ++j) {
      double x;
      if (!(in >> x))
        throw InputError("load_features: row count mismatch in " + path + " (expected " +
                         std::to_string(n) + " rows)");
      if (!std::isfinite(x)) throw InputError("load_features: non-finite value in " + path);
      rows(i, j) = x;
    }
  double extra;
  if (in >> extra) throw InputError("load_features: trailing data in " + path);
  return FeatureMatrix(std::move(rows));
}

}  // namespace

FeatureMatrix load_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("load_features: cannot open " + path);
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  in.clear();
  in.seekg(0);
  if (std::memcmp(magic, kMagic, 4) == 0) return load_features_binary(in, path);
  return load_features_text(in, path);
}

void save_features_text(const FeatureMatrix& fm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("save_features: cannot open " + path);
  out << "feat " << fm.n() << " " << fm.dim() << "\n";
  out.precision(12);
  for (std::size_t i = 0; i < fm.n(); ++i) {
    for (std::size_t j = 0; j < fm.dim(); ++j) {
      if (j) out << " ";
      out << fm.rows()(i, j);
    }
    out << "\n";
  }
  if (!out) throw InputError("save_features: write failed for " + path);
}

void save_features_binary(const FeatureMatrix& fm, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("save_features: cannot open " + path);
  out.write(kMagic, 4);
  write_u64_le(out, fm.n());
  write_u64_le(out, fm.dim());
  std::vector<float> buf(fm.dim());
  for (std::size_t i = 0; i < fm.n(); ++i) {
    for (std::size_t j = 0; j < fm.dim(); ++j) buf[j] = static_cast<float>(fm.rows()(i, j));
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!out) throw InputError("save_features: write failed for " + path);
}

}  // namespace hetlink
