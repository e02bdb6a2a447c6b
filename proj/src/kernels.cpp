#include "hetlink/kernels.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace hetlink::kernels {

void gemm_nn(const double* A, std::size_t m, std::size_t k, const double* B, std::size_t n,
             double* C, bool accumulate) {
  const std::int64_t mi = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < mi; ++i) {
    double* ci = C + static_cast<std::size_t>(i) * n;
    if (!accumulate) std::memset(ci, 0, n * sizeof(double));
    const double* ai = A + static_cast<std::size_t>(i) * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double a = ai[p];
      const double* bp = B + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += a * bp[j];
    }
  }
}

void gemm_at_b(const double* A, std::size_t m, std::size_t k, const double* B, std::size_t n,
               double* C, bool accumulate) {
  // Parallel over output rows (columns of A); the m-loop order is fixed, so
  // the result does not depend on the thread count.
  const std::int64_t ki = static_cast<std::int64_t>(k);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < ki; ++i) {
    double* ci = C + static_cast<std::size_t>(i) * n;
    if (!accumulate) std::memset(ci, 0, n * sizeof(double));
    for (std::size_t p = 0; p < m; ++p) {
      const double a = A[p * k + static_cast<std::size_t>(i)];
      const double* bp = B + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += a * bp[j];
    }
  }
}

void gemm_a_bt(const double* A, std::size_t m, std::size_t n, const double* B, std::size_t k,
               double* C, bool accumulate) {
  const std::int64_t mi = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < mi; ++i) {
    const double* ai = A + static_cast<std::size_t>(i) * n;
    double* ci = C + static_cast<std::size_t>(i) * k;
    for (std::size_t j = 0; j < k; ++j) {
      const double* bj = B + j * n;
      double acc = 0.0;
      for (std::size_t p = 0; p < n; ++p) acc += ai[p] * bj[p];
      if (accumulate)
        ci[j] += acc;
      else
        ci[j] = acc;
    }
  }
}

double fixed_order_sum(std::span<const double> x) {
  const std::size_t n = x.size();
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  if (n_chunks == 0) return 0.0;
  std::vector<double> partial(n_chunks, 0.0);
  const std::int64_t nc = static_cast<std::int64_t>(n_chunks);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < nc; ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
    const std::size_t hi = std::min(lo + kChunk, n);
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += x[i];
    partial[static_cast<std::size_t>(c)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

void norm_adj_apply(std::size_t n, const std::uint64_t* offsets, const std::uint32_t* adj,
                    const Mat& X, Mat& out) {
  const std::size_t f = X.cols;
  const std::int64_t ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t v = 0; v < ni; ++v) {
    const std::size_t vu = static_cast<std::size_t>(v);
    const double dv = static_cast<double>(offsets[vu + 1] - offsets[vu]);
    const double inv_self = 1.0 / (dv + 1.0);
    const double inv_sqrt_v = 1.0 / std::sqrt(dv + 1.0);
    double* ov = out.row(vu);
    const double* xv = X.row(vu);
    for (std::size_t j = 0; j < f; ++j) ov[j] = xv[j] * inv_self;
    for (std::uint64_t e = offsets[vu]; e < offsets[vu + 1]; ++e) {
      const std::uint32_t u = adj[e];
      const double du = static_cast<double>(offsets[u + 1] - offsets[u]);
      const double w = inv_sqrt_v / std::sqrt(du + 1.0);
      const double* xu = X.row(u);
      for (std::size_t j = 0; j < f; ++j) ov[j] += w * xu[j];
    }
  }
}

void mean_nb_apply(std::size_t n, const std::uint64_t* offsets, const std::uint32_t* adj,
                   const Mat& X, Mat& out) {
  const std::size_t f = X.cols;
  const std::int64_t ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t v = 0; v < ni; ++v) {
    const std::size_t vu = static_cast<std::size_t>(v);
    const std::uint64_t deg = offsets[vu + 1] - offsets[vu];
    double* ov = out.row(vu);
    std::memset(ov, 0, f * sizeof(double));
    if (deg == 0) continue;
    for (std::uint64_t e = offsets[vu]; e < offsets[vu + 1]; ++e) {
      const double* xu = X.row(adj[e]);
      for (std::size_t j = 0; j < f; ++j) ov[j] += xu[j];
    }
    const double inv = 1.0 / static_cast<double>(deg);
    for (std::size_t j = 0; j < f; ++j) ov[j] *= inv;
  }
}

void mean_nb_apply_t(std::size_t n, const std::uint64_t* offsets, const std::uint32_t* adj,
                     const Mat& X, Mat& out) {
  const std::size_t f = X.cols;
  const std::int64_t ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t u = 0; u < ni; ++u) {
    const std::size_t uu = static_cast<std::size_t>(u);
    double* ou = out.row(uu);
    std::memset(ou, 0, f * sizeof(double));
    for (std::uint64_t e = offsets[uu]; e < offsets[uu + 1]; ++e) {
      const std::uint32_t v = adj[e];
      const double dv = static_cast<double>(offsets[v + 1] - offsets[v]);
      const double w = 1.0 / dv;  // v has u as neighbor, so dv >= 1
      const double* xv = X.row(v);
      for (std::size_t j = 0; j < f; ++j) ou[j] += w * xv[j];
    }
  }
}

void selfloop_mean_apply(std::size_t n, const std::uint64_t* offsets, const std::uint32_t* adj,
                         const Mat& X, Mat& out) {
  const std::size_t f = X.cols;
  const std::int64_t ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t v = 0; v < ni; ++v) {
    const std::size_t vu = static_cast<std::size_t>(v);
    const std::uint64_t deg = offsets[vu + 1] - offsets[vu];
    double* ov = out.row(vu);
    const double* xv = X.row(vu);
    for (std::size_t j = 0; j < f; ++j) ov[j] = xv[j];
    for (std::uint64_t e = offsets[vu]; e < offsets[vu + 1]; ++e) {
      const double* xu = X.row(adj[e]);
      for (std::size_t j = 0; j < f; ++j) ov[j] += xu[j];
    }
    const double inv = 1.0 / static_cast<double>(deg + 1);
    for (std::size_t j = 0; j < f; ++j) ov[j] *= inv;
  }
}

void selfloop_mean_apply_t(std::size_t n, const std::uint64_t* offsets, const std::uint32_t* adj,
                           const Mat& X, Mat& out) {
  const std::size_t f = X.cols;
  const std::int64_t ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t u = 0; u < ni; ++u) {
    const std::size_t uu = static_cast<std::size_t>(u);
    const double du = static_cast<double>(offsets[uu + 1] - offsets[uu]);
    double* ou = out.row(uu);
    const double* xu = X.row(uu);
    const double wu = 1.0 / (du + 1.0);
    for (std::size_t j = 0; j < f; ++j) ou[j] = wu * xu[j];
    for (std::uint64_t e = offsets[uu]; e < offsets[uu + 1]; ++e) {
      const std::uint32_t v = adj[e];
      const double dv = static_cast<double>(offsets[v + 1] - offsets[v]);
      const double w = 1.0 / (dv + 1.0);
      const double* xv = X.row(v);
      for (std::size_t j = 0; j < f; ++j) ou[j] += w * xv[j];
    }
  }
}

namespace ref {

void gemm_nn(const Mat& A, const Mat& B, Mat& C, bool accumulate) {
  if (!accumulate) C.fill(0.0);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < B.cols; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < A.cols; ++p) acc += A(i, p) * B(p, j);
      C(i, j) += acc;
    }
}

void gemm_at_b(const Mat& A, const Mat& B, Mat& C, bool accumulate) {
  if (!accumulate) C.fill(0.0);
  for (std::size_t i = 0; i < A.cols; ++i)
    for (std::size_t j = 0; j < B.cols; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < A.rows; ++p) acc += A(p, i) * B(p, j);
      C(i, j) += acc;
    }
}

void gemm_a_bt(const Mat& A, const Mat& B, Mat& C, bool accumulate) {
  if (!accumulate) C.fill(0.0);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < B.rows; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < A.cols; ++p) acc += A(i, p) * B(j, p);
      C(i, j) += acc;
    }
}

double naive_sum(std::span<const double> x) {
  double s = 0.0;
  for (double xi : x) s += xi;
  return s;
}

void norm_adj_apply(std::size_t n, const std::uint64_t* offsets, const std::uint32_t* adj,
                    const Mat& X, Mat& out) {
  const std::size_t f = X.cols;
  for (std::size_t v = 0; v < n; ++v) {
    const double dv = static_cast<double>(offsets[v + 1] - offsets[v]);
    for (std::size_t j = 0; j < f; ++j) out(v, j) = X(v, j) / (dv + 1.0);
    for (std::uint64_t e = offsets[v]; e < offsets[v + 1]; ++e) {
      const std::uint32_t u = adj[e];
      const double du = static_cast<double>(offsets[u + 1] - offsets[u]);
      for (std::size_t j = 0; j < f; ++j)
        out(v, j) += X(u, j) / (std::sqrt(dv + 1.0) * std::sqrt(du + 1.0));
    }
  }
}

void mean_nb_apply(std::size_t n, const std::uint64_t* offsets, const std::uint32_t* adj,
                   const Mat& X, Mat& out) {
  const std::size_t f = X.cols;
  for (std::size_t v = 0; v < n; ++v) {
    const std::uint64_t deg = offsets[v + 1] - offsets[v];
    for (std::size_t j = 0; j < f; ++j) out(v, j) = 0.0;
    if (deg == 0) continue;
    for (std::uint64_t e = offsets[v]; e < offsets[v + 1]; ++e)
      for (std::size_t j = 0; j < f; ++j) out(v, j) += X(adj[e], j);
    for (std::size_t j = 0; j < f; ++j) out(v, j) /= static_cast<double>(deg);
  }
}

void selfloop_mean_apply(std::size_t n, const std::uint64_t* offsets, const std::uint32_t* adj,
                         const Mat& X, Mat& out) {
  const std::size_t f = X.cols;
  for (std::size_t v = 0; v < n; ++v) {
    const std::uint64_t deg = offsets[v + 1] - offsets[v];
    for (std::size_t j = 0; j < f; ++j) out(v, j) = X(v, j);
    for (std::uint64_t e = offsets[v]; e < offsets[v + 1]; ++e)
      for (std::size_t j = 0; j < f; ++j) out(v, j) += X(adj[e], j);
    for (std::size_t j = 0; j < f; ++j) out(v, j) /= static_cast<double>(deg + 1);
  }
}

}  // namespace ref

}  // namespace hetlink::kernels
