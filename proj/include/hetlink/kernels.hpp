#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "hetlink/dense.hpp"

// Low-level OpenMP kernels. Every kernel is bit-deterministic: the result is
// identical for any thread count because each output element is produced by
// exactly one thread with a fixed accumulation order (row/column ownership),
// or partial sums are merged in a canonical chunk order.
//
// The `ref` namespace keeps naive single-threaded implementations used as
// test oracles and as the baseline in the bench_kernels tool.

namespace hetlink::kernels {

inline constexpr std::size_t kChunk = 1024;

// C(m x n) = A(m x k) * B(k x n), optionally accumulating into C.
void gemm_nn(const double* A, std::size_t m, std::size_t k, const double* B, std::size_t n,
             double* C, bool accumulate = false);

// C(k x n) = A(m x k)^T * B(m x n).
void gemm_at_b(const double* A, std::size_t m, std::size_t k, const double* B, std::size_t n,
               double* C, bool accumulate = false);

// C(m x k) = A(m x n) * B(k x n)^T.
void gemm_a_bt(const double* A, std::size_t m, std::size_t n, const double* B, std::size_t k,
               double* C, bool accumulate = false);

inline void gemm_nn(const Mat& A, const Mat& B, Mat& C, bool accumulate = false) {
  gemm_nn(A.v.data(), A.rows, A.cols, B.v.data(), B.cols, C.v.data(), accumulate);
}
inline void gemm_at_b(const Mat& A, const Mat& B, Mat& C, bool accumulate = false) {
  gemm_at_b(A.v.data(), A.rows, A.cols, B.v.data(), B.cols, C.v.data(), accumulate);
}
inline void gemm_a_bt(const Mat& A, const Mat& B, Mat& C, bool accumulate = false) {
  gemm_a_bt(A.v.data(), A.rows, A.cols, B.v.data(), B.rows, C.v.data(), accumulate);
}

// Deterministic sum of a vector: fixed chunks of kChunk summed left to
// right, chunk totals merged in chunk order. Parallel over chunks.
double fixed_order_sum(std::span<const double> x);

// CSR adjacency applies. `offsets` has n+1 entries; `adj[offsets[v]..offsets[v+1])`
// lists the neighbors of v sorted ascending, excluding v itself.

// out[v] = x[v]/(d_v+1) + sum_{u in N(v)} x[u]/sqrt((d_v+1)(d_u+1))
// (symmetric normalized adjacency with self-loops; symmetric operator).
void norm_adj_apply(std::size_t n, const std::uint64_t* offsets, const std::uint32_t* adj,
                    const Mat& X, Mat& out);

// out[v] = mean_{u in N(v)} x[u]; zero row when N(v) is empty.
void mean_nb_apply(std::size_t n, const std::uint64_t* offsets, const std::uint32_t* adj,
                   const Mat& X, Mat& out);

// Transpose of the neighbor-mean operator: out[u] = sum_{v in N(u)} x[v]/d_v.
void mean_nb_apply_t(std::size_t n, const std::uint64_t* offsets, const std::uint32_t* adj,
                     const Mat& X, Mat& out);

// out[v] = (x[v] + sum_{u in N(v)} x[u]) / (d_v + 1).
void selfloop_mean_apply(std::size_t n, const std::uint64_t* offsets, const std::uint32_t* adj,
                         const Mat& X, Mat& out);

// Transpose of selfloop_mean: out[u] = sum_{v in N(u) ∪ {u}} x[v]/(d_v+1).
void selfloop_mean_apply_t(std::size_t n, const std::uint64_t* offsets, const std::uint32_t* adj,
                           const Mat& X, Mat& out);

namespace ref {

void gemm_nn(const Mat& A, const Mat& B, Mat& C, bool accumulate = false);
void gemm_at_b(const Mat& A, const Mat& B, Mat& C, bool accumulate = false);
void gemm_a_bt(const Mat& A, const Mat& B, Mat& C, bool accumulate = false);
double naive_sum(std::span<const double> x);
void norm_adj_apply(std::size_t n, const std::uint64_t* offsets, const std::uint32_t* adj,
                    const Mat& X, Mat& out);
void mean_nb_apply(std::size_t n, const std::uint64_t* offsets, const std::uint32_t* adj,
                   const Mat& X, Mat& out);
void selfloop_mean_apply(std::size_t n, const std::uint64_t* offsets, const std::uint32_t* adj,
                         const Mat& X, Mat& out);

}  // namespace ref

}  // namespace hetlink::kernels
