// Serial reference vs OpenMP path for each hot kernel: wall time per call and
// the max deviation between the two results.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>

#include "bakerlab/baker_bv.hpp"
#include "bakerlab/kernels.hpp"
#include "bakerlab/rng.hpp"
#include "bakerlab/walsh.hpp"

using namespace bakerlab;

namespace {

double time_it(const std::function<void()>& f, int reps) {
  f();
  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void row(const char* name, double ts, double tp, double diff) {
  std::printf("%-28s serial %9.4f s  parallel %9.4f s  speedup %5.2f  maxdiff %.2e\n", name, ts, tp, ts / tp, diff);
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
  const int reps = quick ? 1 : 3;
  std::printf("threads: %d\n", omp_get_max_threads());

  {
    const long n = quick ? 128 : 512;
    std::vector<std::pair<torus::PhaseIndex, cplx>> terms;
    for (long a = -3; a <= 3; ++a)
      for (long b = -3; b <= 3; ++b) terms.push_back({{a, b}, cplx(1.0 / (1 + a * a + b * b), 0.1 * a)});
    Matrix s, p;
    double ts = time_it([&] { s = kernels::weyl_fill(terms, TorusDim{n}, Exec::Serial); }, reps);
    double tp = time_it([&] { p = kernels::weyl_fill(terms, TorusDim{n}, Exec::Parallel); }, reps);
    row("weyl_fill", ts, tp, max_abs(s - p));
  }
  {
    const long n = quick ? 256 : 1024;
    rng::Stream st(1, 0);
    Matrix U = st.complex_normal_matrix(n, n / 4);
    std::vector<long> cols;
    std::vector<cplx> w;
    for (long j = 0; j < U.cols(); ++j) {
      cols.push_back(j);
      w.push_back(cplx(1.0 / (1 + j), 0.0));
    }
    Matrix s, p;
    double ts = time_it([&] { s = kernels::weighted_outer(U, cols, w, Exec::Serial); }, reps);
    double tp = time_it([&] { p = kernels::weighted_outer(U, cols, w, Exec::Parallel); }, reps);
    row("weighted_outer", ts, tp, max_abs(s - p));
  }
  {
    const long n = quick ? 256 : 2048;
    bv::BVOperator op(TorusDim{n});
    rng::Stream st(2, 0);
    Matrix X0 = st.complex_normal_matrix(n, 64);
    Matrix s = X0, p = X0;
    double ts = time_it([&] { s = X0; op.apply_columns(s, 3, Exec::Serial); }, reps);
    double tp = time_it([&] { p = X0; op.apply_columns(p, 3, Exec::Parallel); }, reps);
    row("bv apply_columns (B^3)", ts, tp, max_abs(s - p));
  }
  {
    const int k = quick ? 8 : 12;
    rng::Stream st(3, 0);
    Matrix X0 = st.complex_normal_matrix(1L << k, 64);
    Matrix F = walsh::small_dft(2);
    Matrix s = X0, p = X0;
    double ts = time_it([&] { s = X0; for (int pos = 0; pos < k; ++pos) kernels::apply_dit_factor(s, 2, k, pos, F, Exec::Serial); }, reps);
    double tp = time_it([&] { p = X0; for (int pos = 0; pos < k; ++pos) kernels::apply_dit_factor(p, 2, k, pos, F, Exec::Parallel); }, reps);
    row("apply_dit_factor (all dits)", ts, tp, max_abs(s - p));
  }
  {
    const int k = quick ? 8 : 12;
    const long D = 2;
    rng::Stream st(4, 0);
    Matrix X = st.complex_normal_matrix(1L << k, 256);
    Matrix Fa = walsh::small_dft(D).adjoint();
    Matrix s(X.rows(), X.cols()), p(X.rows(), X.cols());
    double ts = time_it([&] { kernels::walsh_step(X, s, D, Fa, Exec::Serial); }, reps);
    double tp = time_it([&] { kernels::walsh_step(X, p, D, Fa, Exec::Parallel); }, reps);
    row("walsh_step D=2", ts, tp, max_abs(s - p));
    Matrix X3 = st.complex_normal_matrix(729, 256);
    Matrix F3 = walsh::small_dft(3).adjoint();
    Matrix s3(729, 256), p3(729, 256);
    ts = time_it([&] { kernels::walsh_step(X3, s3, 3, F3, Exec::Serial); }, reps);
    tp = time_it([&] { kernels::walsh_step(X3, p3, 3, F3, Exec::Parallel); }, reps);
    row("walsh_step D=3", ts, tp, max_abs(s3 - p3));
  }
  return 0;
}
