#include "bakerlab/walsh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/quadrature/gauss.hpp>
#include <json.hpp>

#include <cblas.h>

#include "bakerlab/kernels.hpp"
#include "bakerlab/random_waves.hpp"
#include "bakerlab/rng.hpp"
#include "bakerlab/torus.hpp"

namespace bakerlab::walsh {

namespace {

long ipow(long b, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

long pmod(long a, long n) {
  long r = a % n;
  return r < 0 ? r + n : r;
}

long from_digits(const std::vector<long>& d, long D) {
  long x = 0;
  for (long e : d) x = x * D + e;
  return x;
}

Matrix permute_rows(const Matrix& X, const std::vector<long>& src) {
  Matrix out(X.rows(), X.cols());
#pragma omp parallel for schedule(static) if (X.cols() > 1)
  for (long c = 0; c < X.cols(); ++c)
    for (long y = 0; y < X.rows(); ++y) out(y, c) = X(src[y], c);
  return out;
}

// out(y) = in(x) where the digits of x are those of y rotated right by r.
std::vector<long> rotation_source(long D, int k, int r) {
  const long N = ipow(D, k), lo_base = ipow(D, r), hi_scale = ipow(D, k - r);
  std::vector<long> src(N);
  for (long y = 0; y < N; ++y) src[y] = (y % lo_base) * hi_scale + y / lo_base;
  return src;
}

// Reverses dits from position `from` (0-based) to the end.
std::vector<long> reversal_source(long D, int k, int from) {
  const long N = ipow(D, k);
  std::vector<long> src(N);
  for (long y = 0; y < N; ++y) {
    auto d = digits(y, D, k);
    std::reverse(d.begin() + from, d.end());
    src[y] = from_digits(d, D);
  }
  return src;
}

Matrix dft_power(long D, long q, bool adjoint) {
  Matrix F = small_dft(D);
  if (adjoint) F.adjointInPlace();
  Matrix G = Matrix::Identity(D, D);
  for (long i = 0; i < q; ++i) G = F * G;
  return G;
}

Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (long i = 0; i < A.rows(); ++i)
    for (long j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

Matrix walsh_dense(long D, int k) {
  Matrix F = small_dft(D), T = F;
  for (int i = 1; i < k; ++i) T = kron(T, F);
  auto src = reversal_source(D, k, 0);
  Matrix R = Matrix::Zero(T.rows(), T.cols());
  for (long y = 0; y < R.rows(); ++y) R(y, src[y]) = 1.0;
  return T * R;
}

cplx root_of_unity(long num, long order) {
  return std::polar(1.0, kTwoPi * static_cast<double>(pmod(num, order)) / static_cast<double>(order));
}

}  // namespace

WalshParams::WalshParams(long D_, int k_, int ell_) : D(D_), k(k_), ell(ell_) {
  if (D < 2) throw InvalidArgument("WalshParams: D must be >= 2");
  if (k < 1) throw InvalidArgument("WalshParams: k must be >= 1");
  if (ell < 0 || ell > k) throw InvalidArgument("WalshParams: ell must lie in [0, k]");
  if (std::log(static_cast<double>(D)) * k > std::log(1 << 26))
    throw InvalidArgument("WalshParams: D^k exceeds 2^26");
}

long WalshParams::dim() const { return ipow(D, k); }

Matrix small_dft(long D) { return torus::build_dft(TorusDim(D)); }

long eta(long k, long j) {
  if (k < 1) throw InvalidArgument("eta: k must be positive");
  const long m4 = pmod(j, 4 * k), m2 = pmod(j, 2 * k);
  bool first = (m4 <= k) || (m4 >= 2 * k && m4 <= 3 * k);
  return first ? m2 : 2 * k - m2;
}

std::vector<long> digits(long index, long D, int k) {
  std::vector<long> d(k);
  for (int m = k - 1; m >= 0; --m) {
    d[m] = index % D;
    index /= D;
  }
  return d;
}

Vector walsh_transform_apply(const WalshParams& p, const Vector& v) {
  if (v.size() != p.dim()) throw InvalidArgument("walsh_transform_apply: dimension is not D^k");
  Matrix X = permute_rows(v, reversal_source(p.D, p.k, 0));
  Matrix F = small_dft(p.D);
  for (int pos = 0; pos < p.k; ++pos) kernels::apply_dit_factor(X, p.D, p.k, pos, F, Exec::Serial);
  return X.col(0);
}

Matrix walsh_transform(const WalshParams& p) {
  Matrix X = permute_rows(Matrix::Identity(p.dim(), p.dim()), reversal_source(p.D, p.k, 0));
  Matrix F = small_dft(p.D);
  for (int pos = 0; pos < p.k; ++pos) kernels::apply_dit_factor(X, p.D, p.k, pos, F, Exec::Parallel);
  return X;
}

Matrix walsh_baker_apply_columns(const WalshParams& p, const Matrix& X, long j, Exec ex) {
  if (X.rows() != p.dim()) throw InvalidArgument("walsh_baker_apply: dimension is not D^k");
  const long jm = pmod(j, p.order());
  if (jm == 1 && p.k > 1) {
    Matrix out;
    kernels::walsh_step(X, out, p.D, small_dft(p.D).adjoint(), ex);
    return out;
  }
  const long q = jm / p.k;
  const int r = static_cast<int>(jm % p.k);
  Matrix Y = X;
  if (q % 4 != 0) {
    Matrix G = dft_power(p.D, q % 4, true);
    for (int pos = 0; pos < p.k; ++pos) kernels::apply_dit_factor(Y, p.D, p.k, pos, G, ex);
  }
  if (r == 0) return Y;
  Matrix Fa = small_dft(p.D).adjoint();
  for (int pos = 0; pos < r; ++pos) kernels::apply_dit_factor(Y, p.D, p.k, pos, Fa, ex);
  return permute_rows(Y, rotation_source(p.D, p.k, r));
}

Vector walsh_baker_apply(const WalshParams& p, const Vector& v, long j) {
  return walsh_baker_apply_columns(p, v, j, Exec::Serial).col(0);
}

Matrix walsh_baker_dense(const WalshParams& p) {
  Matrix Wk = walsh_dense(p.D, p.k);
  Matrix inner = p.k == 1 ? Matrix::Identity(1, 1) : walsh_dense(p.D, p.k - 1);
  Matrix block = kron(Matrix::Identity(p.D, p.D), inner);
  return Wk.adjoint() * block;
}

Vector expand(const ProductState& s) {
  if (s.empty()) return Vector::Ones(1);
  Vector out = s[0];
  for (std::size_t m = 1; m < s.size(); ++m) {
    const Vector& b = s[m];
    Vector next(out.size() * b.size());
    for (long i = 0; i < out.size(); ++i) next.segment(i * b.size(), b.size()) = out(i) * b;
    out.swap(next);
  }
  return out;
}

cplx overlap(const ProductState& a, const ProductState& b) {
  if (a.size() != b.size()) throw InvalidArgument("overlap: factor counts differ");
  cplx r = 1.0;
  for (std::size_t m = 0; m < a.size(); ++m) r *= a[m].dot(b[m]);
  return r;
}

ProductState baker_product(const WalshParams& p, ProductState s, long j) {
  if (static_cast<int>(s.size()) != p.k) throw InvalidArgument("baker_product: need k factors");
  const long jm = pmod(j, p.order());
  const long q = jm / p.k;
  const int r = static_cast<int>(jm % p.k);
  if (q % 4 != 0) {
    Matrix G = dft_power(p.D, q % 4, true);
    for (auto& f : s) f = G * f;
  }
  Matrix Fa = small_dft(p.D).adjoint();
  for (int m = 0; m < r; ++m) s[m] = Fa * s[m];
  std::rotate(s.begin(), s.begin() + r, s.end());
  return s;
}

ProductState coherent_product(const WalshParams& p, long index) {
  auto eps = digits(index, p.D, p.k);
  Matrix Fa = small_dft(p.D).adjoint();
  ProductState s(p.k);
  for (int m = 0; m < p.k; ++m) {
    if (m < p.ell) {
      s[m] = Vector::Unit(p.D, eps[m]);
    } else {
      s[m] = Fa.col(eps[p.k + p.ell - m - 1]);
    }
  }
  return s;
}

Rectangle rectangle(const WalshParams& p, long index) {
  auto eps = digits(index, p.D, p.k);
  Rectangle r;
  double bq = 0.0, bp = 0.0, scale = 1.0;
  for (int m = 0; m < p.ell; ++m) {
    scale /= static_cast<double>(p.D);
    bq += static_cast<double>(eps[m]) * scale;
  }
  r.q0 = bq;
  r.q1 = bq + scale;
  scale = 1.0;
  for (int m = p.ell; m < p.k; ++m) {
    scale /= static_cast<double>(p.D);
    bp += static_cast<double>(eps[m]) * scale;
  }
  r.p0 = bp;
  r.p1 = bp + scale;
  return r;
}

CoherentBasis coherent_basis(const WalshParams& p) {
  const long N = p.dim();
  CoherentBasis cb;
  cb.C.resize(N, N);
  cb.rects.resize(N);
  for (long c = 0; c < N; ++c) {
    cb.C.col(c) = expand(coherent_product(p, c));
    cb.rects[c] = rectangle(p, c);
  }
  return cb;
}

Matrix coherent_coefficients(const WalshParams& p, const Matrix& X, Exec ex) {
  if (X.rows() != p.dim()) throw InvalidArgument("coherent_coefficients: dimension is not D^k");
  Matrix Y = X;
  Matrix F = small_dft(p.D);
  for (int pos = p.ell; pos < p.k; ++pos) kernels::apply_dit_factor(Y, p.D, p.k, pos, F, ex);
  if (p.k - p.ell < 2) return Y;
  return permute_rows(Y, reversal_source(p.D, p.k, p.ell));
}

WalshObservable indicator_q_below(double c) {
  return {"indicator_q_below_" + std::to_string(c), [c](double q, double) { return q < c ? 1.0 : 0.0; }};
}

WalshObservable constant_observable(double c) {
  return {"constant_" + std::to_string(c), [c](double, double) { return c; }};
}

RealVector rectangle_averages(const WalshParams& p, const WalshObservable& a) {
  using GL = boost::math::quadrature::gauss<double, 4>;
  std::vector<double> nodes, weights;
  for (std::size_t i = 0; i < GL::abscissa().size(); ++i) {
    double x = GL::abscissa()[i], w = GL::weights()[i];
    nodes.push_back(x);
    weights.push_back(w);
    if (x != 0.0) {
      nodes.push_back(-x);
      weights.push_back(w);
    }
  }
  const long N = p.dim();
  RealVector out(N);
#pragma omp parallel for schedule(static)
  for (long c = 0; c < N; ++c) {
    Rectangle r = rectangle(p, c);
    double hq = 0.5 * (r.q1 - r.q0), hp = 0.5 * (r.p1 - r.p0);
    double mq = 0.5 * (r.q1 + r.q0), mp = 0.5 * (r.p1 + r.p0);
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t j = 0; j < nodes.size(); ++j)
        acc += weights[i] * weights[j] * a.f(mq + hq * nodes[i], mp + hp * nodes[j]);
    out(c) = 0.25 * acc;  // average over the rectangle
  }
  return out;
}

Matrix walsh_op(const WalshParams& p, const WalshObservable& a) {
  RealVector av = rectangle_averages(p, a);
  CoherentBasis cb = coherent_basis(p);
  return cb.C * av.cast<cplx>().asDiagonal() * cb.C.adjoint();
}

bool CountResult::ok() const {
  bool good = diag_count == diag_pred && total_count == total_pred && max_mag_dev <= 1e-10;
  if (neighbor_pred >= 0) good = good && plus_count == neighbor_pred && minus_count == neighbor_pred;
  return good;
}

CountPrediction predicted_counts(long D, int k, long j) {
  const long e = eta(k, j);
  const long m4 = pmod(j, 4L * k), m2 = pmod(j, 2L * k);
  CountPrediction c;
  c.total = ipow(D, k) * ipow(D, static_cast<int>(e));
  if (m2 != 0) {
    c.diag = ipow(D, static_cast<int>(e));
    c.neighbor = ipow(D, static_cast<int>(e));
  } else if (m4 == 2L * k) {
    c.diag = (D % 2 == 1) ? 1 : ipow(2, k);
    c.neighbor = (D % 2 == 1) ? 1 : 0;
  } else {
    c.diag = ipow(D, k);
    c.neighbor = 0;
  }
  return c;
}

CountResult count_nonzero_entries(const WalshParams& p, long j, double threshold) {
  const long N = p.dim();
  if (N > 4096) throw InvalidArgument("count_nonzero_entries: D^k too large for entry enumeration");
  CountResult res;
  res.D = p.D;
  res.k = p.k;
  res.ell = p.ell;
  res.j = j;
  res.eta = eta(p.k, j);
  auto pred = predicted_counts(p.D, p.k, j);
  res.diag_pred = pred.diag;
  res.total_pred = pred.total;
  res.neighbor_pred = pred.neighbor;
  const double mag = std::pow(static_cast<double>(p.D), -0.5 * static_cast<double>(res.eta));
  Matrix F = small_dft(p.D);

  long diag = 0, total = 0;
  double dev = 0.0;
#pragma omp parallel for schedule(dynamic) reduction(+ : diag, total) reduction(max : dev)
  for (long c = 0; c < N; ++c) {
    ProductState t = baker_product(p, coherent_product(p, c), j);
    // coefficients in the coherent basis are again a product over reordered dits
    ProductState g(p.k);
    for (int m = 0; m < p.k; ++m) {
      if (m < p.ell)
        g[m] = t[m];
      else
        g[p.k + p.ell - 1 - m] = F * t[m];
    }
    Vector col = expand(g);
    for (long r = 0; r < N; ++r) {
      double a = std::abs(col(r));
      if (a > threshold) {
        ++total;
        if (r == c) ++diag;
        dev = std::max(dev, std::abs(a - mag));
      }
    }
  }
  res.diag_count = diag;
  res.total_count = total;
  res.max_mag_dev = dev;

  WalshParams pos(p.D, p.k, p.k);
  long plus = 0, minus = 0;
#pragma omp parallel for schedule(static) reduction(+ : plus, minus)
  for (long x = 0; x < N; ++x) {
    ProductState t = baker_product(pos, coherent_product(pos, x), j);
    if (std::abs(overlap(coherent_product(pos, (x + 1) % N), t)) > threshold) ++plus;
    if (std::abs(overlap(coherent_product(pos, (x + N - 1) % N), t)) > threshold) ++minus;
  }
  res.plus_count = plus;
  res.minus_count = minus;
  return res;
}

Matrix coherent_power_matrix(const WalshParams& p, long j) {
  if (p.dim() > 1024) throw InvalidArgument("coherent_power_matrix: D^k too large for a dense product");
  Matrix B = walsh_baker_dense(p);
  Matrix Bj = Matrix::Identity(p.dim(), p.dim());
  const long jm = pmod(j, p.order());
  for (long i = 0; i < jm; ++i) Bj = B * Bj;
  CoherentBasis cb = coherent_basis(p);
  return cb.C.adjoint() * Bj * cb.C;
}

long linear_system_solutions(long D, int k, int s, int alpha, long b, int a0) {
  if (s < 1 || s > k - 1) throw InvalidArgument("linear_system_solutions: s must lie in [1, k-1]");
  if (alpha != 1 && alpha != -1) throw InvalidArgument("linear_system_solutions: alpha must be +-1");
  const long N = ipow(D, k);
  long count = 0;
  for (long x = 0; x < N; ++x) {
    auto v = digits(x, D, k);
    bool ok = true;
    for (int i = 0; i < k - s && ok; ++i) {
      int m = static_cast<int>(pmod(a0 + i, k));
      ok = pmod(alpha * v[m] + b, D) == v[pmod(m + s, k)];
    }
    if (ok) ++count;
  }
  return count;
}

ProjectorFamily eigenprojectors(const WalshParams& p) {
  const long N = p.dim(), order = p.order();
  if (N > 1024) throw InvalidArgument("eigenprojectors: dense family limited to D^k <= 1024");
  ProjectorFamily fam;
  fam.order = order;
  fam.P.assign(order, Matrix::Zero(N, N));
  Matrix Bm = Matrix::Identity(N, N);
  for (long m = 0; m < order; ++m) {
#pragma omp parallel for schedule(static)
    for (long jj = 0; jj < order; ++jj) fam.P[jj] += root_of_unity(-jj * m, order) / static_cast<double>(order) * Bm;
    Bm = walsh_baker_apply_columns(p, Bm, 1);
  }
  Matrix S = Matrix::Zero(N, N);
  for (const auto& P : fam.P) S += P;
  fam.sum_defect = max_abs(S - Matrix::Identity(N, N));
  double orth = 0.0, eig = 0.0;
#pragma omp parallel for schedule(dynamic) reduction(max : orth, eig)
  for (long a = 0; a < order; ++a) {
    for (long b = a; b < order; ++b) {
      Matrix prod = fam.P[a] * fam.P[b];
      if (a == b) prod -= fam.P[a];
      orth = std::max(orth, max_abs(prod));
    }
    Matrix BP = walsh_baker_apply_columns(p, fam.P[a], 1, Exec::Serial);
    eig = std::max(eig, max_abs(BP - root_of_unity(a, order) * fam.P[a]));
  }
  fam.orth_defect = orth;
  fam.eigen_defect = eig;
  return fam;
}

std::vector<cplx> power_traces(const WalshParams& p) {
  const long N = p.dim(), order = p.order();
  WalshParams pos(p.D, p.k, p.k);
  std::vector<cplx> tr(order, 0.0);
  for (long m = 0; m < order; ++m) {
    double re = 0.0, im = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : re, im)
    for (long x = 0; x < N; ++x) {
      ProductState e = coherent_product(pos, x);
      cplx v = overlap(e, baker_product(pos, e, m));
      re += v.real();
      im += v.imag();
    }
    tr[m] = cplx(re, im);
  }
  return tr;
}

std::vector<long> degeneracies(const WalshParams& p) {
  auto tr = power_traces(p);
  const long order = p.order();
  std::vector<long> d(order);
  for (long jj = 0; jj < order; ++jj) {
    cplx s = 0.0;
    for (long m = 0; m < order; ++m) s += root_of_unity(-jj * m, order) * tr[m];
    s /= static_cast<double>(order);
    double r = std::round(s.real());
    if (std::abs(s - r) > 1e-6)
      throw NumericalFailure("degeneracies: trace of projector " + std::to_string(jj) + " is not an integer");
    d[jj] = static_cast<long>(r);
  }
  return d;
}

double degeneracy_ratio_deviation(const WalshParams& p) {
  auto d = degeneracies(p);
  double dev = 0.0;
  for (long v : d)
    dev = std::max(dev, std::abs(static_cast<double>(v) * static_cast<double>(p.order()) / static_cast<double>(p.dim()) - 1.0));
  return dev;
}

namespace {

// Column jj holds the coherent-basis diagonal of P_jj.
Eigen::MatrixXd projector_diagonals(const WalshParams& p) {
  const long N = p.dim(), order = p.order();
  Eigen::MatrixXd out(N, order);
#pragma omp parallel for schedule(static)
  for (long c = 0; c < N; ++c) {
    ProductState e = coherent_product(p, c);
    ProductState t = e;
    std::vector<cplx> ov(order);
    for (long m = 0; m < order; ++m) {
      ov[m] = overlap(e, t);
      t = baker_product(p, t, 1);
    }
    for (long jj = 0; jj < order; ++jj) {
      cplx s = 0.0;
      for (long m = 0; m < order; ++m) s += root_of_unity(-jj * m, order) * ov[m];
      out(c, jj) = s.real() / static_cast<double>(order);
    }
  }
  return out;
}

}  // namespace

RealVector projector_diagonal(const WalshParams& p, long jj) {
  if (jj < 0 || jj >= p.order()) throw InvalidArgument("projector_diagonal: eigenspace index out of range");
  return projector_diagonals(p).col(jj);
}

double per_eigenspace_weyl(const WalshParams& p, const WalshObservable& a, long jj) {
  RealVector d = projector_diagonal(p, jj);
  RealVector av = rectangle_averages(p, a);
  return static_cast<double>(p.order()) / static_cast<double>(p.dim()) * d.dot(av);
}

Matrix random_eigenspace_basis(const WalshParams& p, long jj, long rank, std::uint64_t seed) {
  const long N = p.dim(), order = p.order();
  if (rank <= 0) return Matrix(N, 0);
  rng::Stream st(seed, static_cast<std::uint64_t>(jj));
  Matrix X = st.complex_normal_matrix(N, rank);
  Matrix Y = X, T;
  const Matrix Fa = small_dft(p.D).adjoint();
  for (long m = 1; m < order; ++m) {
    if (p.k > 1) {
      kernels::walsh_step(X, T, p.D, Fa, Exec::Parallel);
      X.swap(T);
    } else {
      X = Fa * X;
    }
    Y += root_of_unity(-jj * m, order) * X;
  }
  Y /= static_cast<double>(order);

  // CholeskyQR2: Y = Q R with R upper triangular and positive on the diagonal
  const int n = static_cast<int>(N), r = static_cast<int>(rank);
  const cplx one(1.0, 0.0);
  for (int pass = 0; pass < 2; ++pass) {
    Matrix S = Matrix::Zero(rank, rank);
    cblas_zherk(CblasColMajor, CblasUpper, CblasConjTrans, r, n, 1.0, Y.data(), n, 0.0, S.data(), r);
    S.triangularView<Eigen::StrictlyLower>() = S.adjoint();
    if (pass == 1 && max_abs(S - Matrix::Identity(rank, rank)) <= 1e-13) break;
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success)
      throw NumericalFailure("random_eigenspace_basis: projected gaussian block is rank deficient for eigenspace " +
                             std::to_string(jj));
    Matrix R = llt.matrixU();
    double dmin = R.diagonal().cwiseAbs().minCoeff(), dmax = R.diagonal().cwiseAbs().maxCoeff();
    if (dmin <= 1e-7 * dmax)
      throw NumericalFailure("random_eigenspace_basis: projected gaussian block is rank deficient for eigenspace " +
                             std::to_string(jj));
    cblas_ztrsm(CblasColMajor, CblasRight, CblasUpper, CblasNoTrans, CblasNonUnit, n, r, &one, R.data(), r, Y.data(),
                n);
  }
  Matrix& Q = Y;
  return Q;
}

EigenBasis random_eigenbasis(const WalshParams& p, std::uint64_t seed) {
  auto deg = degeneracies(p);
  EigenBasis b;
  b.U.resize(p.dim(), p.dim());
  long col = 0;
  for (long jj = 0; jj < p.order(); ++jj) {
    if (deg[jj] == 0) continue;
    Matrix Q = random_eigenspace_basis(p, jj, deg[jj], seed);
    b.U.middleCols(col, deg[jj]) = Q;
    for (long i = 0; i < deg[jj]; ++i) b.label.push_back(jj);
    col += deg[jj];
  }
  if (col != p.dim()) throw NumericalFailure("random_eigenbasis: degeneracies do not sum to D^k");
  return b;
}

namespace {

struct StatsAccumulator {
  long n = 0;
  double ks_max = 0.0, ks_sum = 0.0, ks_filt = 0.0;
  std::vector<double> que;
  double sc = 0.0, l2 = 0.0, l4 = 0.0, linf = 0.0;
};

void accumulate_block(const WalshParams& p, const Matrix& U, const Eigen::VectorXd& diag,
                      const std::vector<RealVector>& avg, const std::vector<double>& means, StatsAccumulator& acc) {
  const long N = p.dim();
  const double sN = std::sqrt(static_cast<double>(N));
  const double order = static_cast<double>(p.order());
  std::vector<long> keep;
  for (long c = 0; c < N; ++c)
    if (std::abs(order * diag(c) - 1.0) <= 0.5) keep.push_back(c);
  Matrix Cc = coherent_coefficients(p, U);
  const long cols = U.cols();
  const std::size_t nobs = avg.size();
  std::vector<double> ks(cols), ksf(cols), sc(cols), l2(cols), l4(cols), linf(cols);
  std::vector<std::vector<double>> que(nobs, std::vector<double>(cols));
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < cols; ++i) {
    auto k2 = rw::value_statistics(Vector(Cc.col(i)));
    ks[i] = std::max(k2.real, k2.imag);
    std::vector<double> re, im;
    re.reserve(keep.size());
    im.reserve(keep.size());
    for (long c : keep) {
      re.push_back(sN * Cc(c, i).real());
      im.push_back(sN * Cc(c, i).imag());
    }
    ksf[i] = std::max(rw::ks_half_normal(std::move(re)), rw::ks_half_normal(std::move(im)));
    Eigen::VectorXd w = Cc.col(i).cwiseAbs2();
    for (std::size_t o = 0; o < nobs; ++o) que[o][i] = std::abs(w.dot(avg[o]) - means[o]);
    Vector u = U.col(i);
    sc[i] = static_cast<double>(rw::sign_changes(u).real);
    l2[i] = u.squaredNorm();
    l4[i] = u.cwiseAbs2().squaredNorm() * static_cast<double>(N);
    linf[i] = u.cwiseAbs().maxCoeff();
  }
  for (long i = 0; i < cols; ++i) {
    acc.ks_max = std::max(acc.ks_max, ks[i]);
    acc.ks_sum += ks[i];
    acc.ks_filt = std::max(acc.ks_filt, ksf[i]);
    acc.sc += sc[i];
    acc.l2 += l2[i];
    acc.l4 += l4[i];
    acc.linf = std::max(acc.linf, linf[i]);
    for (std::size_t o = 0; o < nobs; ++o) acc.que[o] = std::max(acc.que[o], que[o][i]);
  }
  acc.n += cols;
}

BasisStats finish(const StatsAccumulator& acc) {
  BasisStats s;
  s.n_vectors = acc.n;
  if (acc.n == 0) return s;
  const double n = static_cast<double>(acc.n);
  s.ks_max = acc.ks_max;
  s.ks_mean = acc.ks_sum / n;
  s.ks_max_filtered = acc.ks_filt;
  s.que_max_dev = acc.que;
  s.sign_changes_mean = acc.sc / n;
  s.lp2_mean = acc.l2 / n;
  s.lp4_mean = acc.l4 / n;
  s.lpinf_max = acc.linf;
  return s;
}

void prepare_observables(const WalshParams& p, const std::vector<WalshObservable>& obs, std::vector<RealVector>& avg,
                         std::vector<double>& means) {
  for (const auto& a : obs) {
    avg.push_back(rectangle_averages(p, a));
    means.push_back(avg.back().mean());
  }
}

}  // namespace

BasisStats eigenbasis_statistics(const EigenBasis& basis, const WalshParams& p,
                                 const std::vector<WalshObservable>& obs) {
  if (basis.U.rows() != p.dim() || static_cast<long>(basis.label.size()) != basis.U.cols())
    throw InvalidArgument("eigenbasis_statistics: basis does not match parameters");
  std::vector<RealVector> avg;
  std::vector<double> means;
  prepare_observables(p, obs, avg, means);
  Eigen::MatrixXd diags = projector_diagonals(p);
  StatsAccumulator acc;
  acc.que.assign(obs.size(), 0.0);
  long start = 0;
  while (start < basis.U.cols()) {
    long jj = basis.label[start], len = 0;
    while (start + len < basis.U.cols() && basis.label[start + len] == jj) ++len;
    accumulate_block(p, basis.U.middleCols(start, len), diags.col(jj), avg, means, acc);
    start += len;
  }
  return finish(acc);
}

BasisStats random_eigenbasis_statistics(const WalshParams& p, std::uint64_t seed,
                                        const std::vector<WalshObservable>& obs) {
  auto deg = degeneracies(p);
  std::vector<RealVector> avg;
  std::vector<double> means;
  prepare_observables(p, obs, avg, means);
  Eigen::MatrixXd diags = projector_diagonals(p);
  StatsAccumulator acc;
  acc.que.assign(obs.size(), 0.0);
  for (long jj = 0; jj < p.order(); ++jj) {
    if (deg[jj] == 0) continue;
    Matrix Q = random_eigenspace_basis(p, jj, deg[jj], seed);
    accumulate_block(p, Q, diags.col(jj), avg, means, acc);
  }
  return finish(acc);
}

std::string walsh_report_json(const WalshParams& p, const std::vector<long>& degs, bool count_pass,
                              const std::string& count_detail, const BasisStats& stats) {
  nlohmann::ordered_json j;
  j["D"] = p.D;
  j["k"] = p.k;
  j["ell"] = p.ell;
  j["order"] = p.order();
  j["degeneracies"] = degs;
  j["count_check"] = std::string(count_pass ? "pass" : "fail") + (count_detail.empty() ? "" : ": " + count_detail);
  j["que_max_dev"] = stats.que_max_dev.empty() ? 0.0 : *std::max_element(stats.que_max_dev.begin(), stats.que_max_dev.end());
  j["ks_max"] = stats.ks_max;
  j["ks_mean"] = stats.ks_mean;
  j["ks_max_filtered"] = stats.ks_max_filtered;
  j["sign_changes_mean"] = stats.sign_changes_mean;
  j["lp"] = {{"2", stats.lp2_mean}, {"4", stats.lp4_mean}, {"inf_max", stats.lpinf_max}};
  j["n_vectors"] = stats.n_vectors;
  return j.dump(2);
}

}  // namespace bakerlab::walsh
