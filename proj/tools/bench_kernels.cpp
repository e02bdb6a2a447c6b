// Compares the OpenMP kernels against their serial references on
// synthetic-scale inputs and prints a speedup table.

#include <chrono>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hetlink/common.hpp"
#include "hetlink/graph.hpp"
#include "hetlink/kernels.hpp"
#include "hetlink/rng.hpp"
#include "hetlink/synthgen.hpp"

using namespace hetlink;

namespace {

double time_ms(const std::function<void()>& fn, int reps = 5) {
  fn();  // warm up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

Mat random_mat(std::size_t r, std::size_t c, std::uint64_t seed) {
  Mat m(r, c);
  SplitMix64 rng(seed);
  for (auto& x : m.v) x = rng.normal();
  return m;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-28s serial %9.2f ms   parallel %9.2f ms   speedup %.2fx\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
  apply_thread_cap_from_env();
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#endif

  const std::size_t n = 2000, f = 64, h = 64;
  Mat x = random_mat(n, f, 1);
  Mat w = random_mat(f, h, 2);
  Mat c(n, h);

  report("gemm_nn (2000x64x64)",
         time_ms([&] { kernels::ref::gemm_nn(x, w, c); }),
         time_ms([&] { kernels::gemm_nn(x, w, c); }));

  Mat dz = random_mat(n, h, 3);
  Mat gw(f, h);
  report("gemm_at_b (64x2000x64)",
         time_ms([&] { kernels::ref::gemm_at_b(x, dz, gw); }),
         time_ms([&] { kernels::gemm_at_b(x, dz, gw); }));

  Mat zb = random_mat(h, f, 4);
  Mat dx(n, f);
  report("gemm_a_bt (2000x64x64)",
         time_ms([&] { kernels::ref::gemm_a_bt(dz, zb, dx); }),
         time_ms([&] { kernels::gemm_a_bt(dz, zb, dx); }));

  // Adjacency applies on a mid-similarity quantile graph.
  FeatureMatrix fm = gaussian_features(n, 32, 9);
  QuantileGenSpec spec;
  spec.n_nodes = n;
  spec.index = 25;
  auto qg = generate_quantile_graph(spec, fm);
  const Graph& g = qg.graph;
  std::printf("graph: %zu nodes, %zu edges\n", g.n_nodes(), g.n_edges());

  Mat out(n, f);
  report("norm_adj_apply",
         time_ms([&] { kernels::ref::norm_adj_apply(n, g.offsets(), g.adj(), x, out); }),
         time_ms([&] { kernels::norm_adj_apply(n, g.offsets(), g.adj(), x, out); }));
  report("mean_nb_apply",
         time_ms([&] { kernels::ref::mean_nb_apply(n, g.offsets(), g.adj(), x, out); }),
         time_ms([&] { kernels::mean_nb_apply(n, g.offsets(), g.adj(), x, out); }));
  report("selfloop_mean_apply",
         time_ms([&] { kernels::ref::selfloop_mean_apply(n, g.offsets(), g.adj(), x, out); }),
         time_ms([&] { kernels::selfloop_mean_apply(n, g.offsets(), g.adj(), x, out); }));

  std::vector<double> big(1u << 22);
  SplitMix64 rng(7);
  for (auto& v : big) v = rng.uniform01();
  report("sum (4M doubles)",
         time_ms([&] { volatile double s = kernels::ref::naive_sum(big); (void)s; }),
         time_ms([&] { volatile double s = kernels::fixed_order_sum(big); (void)s; }));
  return 0;
}
