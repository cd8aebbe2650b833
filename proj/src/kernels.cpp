#include "bakerlab/kernels.hpp"

#include <cmath>

namespace bakerlab::kernels {

namespace {

long mod(long a, long n) {
  long r = a % n;
  return r < 0 ? r + n : r;
}

}  // namespace

Matrix weyl_fill(const std::vector<std::pair<torus::PhaseIndex, cplx>>& terms, TorusDim n, Exec ex) {
  const long N = n;
  if (ex == Exec::Serial) {
    Matrix A = Matrix::Zero(N, N);
    for (const auto& [k, c] : terms) A += c * torus::phase_translation_matrix(k, n);
    return A;
  }
  // table of exp(pi i m / N), m in [0, 2N)
  std::vector<cplx> tab(2 * N);
  for (long m = 0; m < 2 * N; ++m) {
    double t = kPi * static_cast<double>(m) / static_cast<double>(N);
    tab[m] = {std::cos(t), std::sin(t)};
  }
  std::vector<long> base(terms.size());
  for (size_t i = 0; i < terms.size(); ++i) {
    const auto& k = terms[i].first;
    base[i] = mod(-mod(k.k1, 2 * N) * mod(k.k2, 2 * N), 2 * N);
  }
  Matrix A = Matrix::Zero(N, N);
#pragma omp parallel for schedule(static)
  for (long x = 0; x < N; ++x) {
    for (size_t i = 0; i < terms.size(); ++i) {
      const auto& [k, c] = terms[i];
      long row = mod(x + k.k1, N);
      long m = mod(base[i] + 2 * mod(k.k2, N) * row, 2 * N);
      A(row, x) += c * tab[m];
    }
  }
  return A;
}

Matrix weighted_outer(const Matrix& U, const std::vector<long>& cols, const std::vector<cplx>& w, Exec ex) {
  if (cols.size() != w.size()) throw InvalidArgument("weighted_outer: weight count mismatch");
  const long N = U.rows();
  const long r = cols.size();
  if (ex == Exec::Serial) {
    Matrix P = Matrix::Zero(N, N);
    for (long s = 0; s < r; ++s) {
      const long j = cols[s];
      for (long y = 0; y < N; ++y) {
        cplx cy = w[s] * std::conj(U(y, j));
        for (long x = 0; x < N; ++x) P(x, y) += U(x, j) * cy;
      }
    }
    return P;
  }
  Matrix V(N, r), Wt(N, r);
  for (long s = 0; s < r; ++s) {
    V.col(s) = U.col(cols[s]);
    Wt.col(s) = U.col(cols[s]) * std::conj(w[s]);
  }
  Matrix P(N, N);
  const long bs = 64;
  const long nb = (N + bs - 1) / bs;
#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < nb; ++b) {
    long c0 = b * bs, nc = std::min(bs, N - c0);
    P.middleCols(c0, nc).noalias() = V * Wt.middleRows(c0, nc).adjoint();
  }
  return P;
}

void apply_dit_factor(Matrix& X, long D, int k, int pos, const Matrix& G, Exec ex) {
  long dim = 1;
  for (int i = 0; i < k; ++i) dim *= D;
  if (X.rows() != dim) throw InvalidArgument("apply_dit_factor: row count is not D^k");
  if (pos < 0 || pos >= k) throw InvalidArgument("apply_dit_factor: bad factor position");
  long stride = 1;
  for (int i = pos + 1; i < k; ++i) stride *= D;
  const long block = stride * D;
  const long ncols = X.cols();

  if (ex == Exec::Serial) {
    std::vector<cplx> in(D);
    for (long c = 0; c < ncols; ++c)
      for (long hi = 0; hi < dim; hi += block)
        for (long lo = 0; lo < stride; ++lo) {
          for (long a = 0; a < D; ++a) in[a] = X(hi + a * stride + lo, c);
          for (long a = 0; a < D; ++a) {
            cplx s = 0.0;
            for (long b = 0; b < D; ++b) s += G(a, b) * in[b];
            X(hi + a * stride + lo, c) = s;
          }
        }
    return;
  }
#pragma omp parallel
  {
    std::vector<cplx> in(D);
#pragma omp for schedule(static)
    for (long c = 0; c < ncols; ++c) {
      cplx* col = X.col(c).data();
      for (long hi = 0; hi < dim; hi += block)
        for (long lo = 0; lo < stride; ++lo) {
          cplx* base = col + hi + lo;
          for (long a = 0; a < D; ++a) in[a] = base[a * stride];
          for (long a = 0; a < D; ++a) {
            cplx s = 0.0;
            for (long b = 0; b < D; ++b) s += G(a, b) * in[b];
            base[a * stride] = s;
          }
        }
    }
  }
}

void walsh_step(const Matrix& X, Matrix& out, long D, const Matrix& Fa, Exec ex) {
  const long N = X.rows();
  if (N % D != 0 || Fa.rows() != D || Fa.cols() != D) throw InvalidArgument("walsh_step: shape mismatch");
  const long M = N / D;
  out.resize(N, X.cols());
  if (ex == Exec::Serial) {
    for (long c = 0; c < X.cols(); ++c)
      for (long hi = 0; hi < M; ++hi)
        for (long lo = 0; lo < D; ++lo) {
          cplx s = 0.0;
          for (long b = 0; b < D; ++b) s += Fa(lo, b) * X(b * M + hi, c);
          out(hi * D + lo, c) = s;
        }
    return;
  }
  if (D == 2) {
    const cplx f00 = Fa(0, 0), f01 = Fa(0, 1), f10 = Fa(1, 0), f11 = Fa(1, 1);
#pragma omp parallel for schedule(static)
    for (long c = 0; c < X.cols(); ++c) {
      const cplx* a = X.col(c).data();
      const cplx* b = a + M;
      cplx* o = out.col(c).data();
      for (long hi = 0; hi < M; ++hi) {
        o[2 * hi] = f00 * a[hi] + f01 * b[hi];
        o[2 * hi + 1] = f10 * a[hi] + f11 * b[hi];
      }
    }
    return;
  }
#pragma omp parallel for schedule(static)
  for (long c = 0; c < X.cols(); ++c) {
    const cplx* in = X.col(c).data();
    cplx* o = out.col(c).data();
    for (long hi = 0; hi < M; ++hi)
      for (long lo = 0; lo < D; ++lo) {
        cplx s = 0.0;
        for (long b = 0; b < D; ++b) s += Fa(lo, b) * in[b * M + hi];
        o[hi * D + lo] = s;
      }
  }
}

}  // namespace bakerlab::kernels
