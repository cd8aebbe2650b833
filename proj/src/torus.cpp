#include "bakerlab/torus.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bakerlab/kernels.hpp"
#include "bakerlab/rng.hpp"

namespace bakerlab::torus {

namespace {

long mod(long a, long n) {
  long r = a % n;
  return r < 0 ? r + n : r;
}

// exp(2 pi i m / n) with m reduced first, so large integer phases stay exact
cplx unit_root(long m, long n) {
  double t = kTwoPi * static_cast<double>(mod(m, n)) / static_cast<double>(n);
  return {std::cos(t), std::sin(t)};
}

bool is_pow2(long m) { return m > 0 && (m & (m - 1)) == 0; }

}  // namespace

Matrix build_dft(TorusDim n) {
  const long N = n;
  Matrix F(N, N);
  const double s = 1.0 / std::sqrt(static_cast<double>(N));
  for (long k = 0; k < N; ++k)
    for (long j = 0; j < N; ++j) F(j, k) = s * unit_root(-j * k, N);
  return F;
}

Vector apply_phase_translation(PhaseIndex k, const Vector& v) {
  const long N = v.size();
  if (N < 1) throw InvalidArgument("apply_phase_translation: empty vector");
  Vector out = Vector::Zero(N);
  // exponent pi i (-k1 k2 + 2 k2 (x + k1)) / N, tracked modulo 2N
  for (long x = 0; x < N; ++x) {
    long row = mod(x + k.k1, N);
    long m = -k.k1 % (2 * N) * (k.k2 % (2 * N)) + 2 * (k.k2 % N) * mod(x + k.k1, N);
    out(row) += unit_root(m, 2 * N) * v(x);
  }
  return out;
}

Matrix phase_translation_matrix(PhaseIndex k, TorusDim n) {
  const long N = n;
  Matrix T = Matrix::Zero(N, N);
  for (long x = 0; x < N; ++x) {
    long m = -k.k1 % (2 * N) * (k.k2 % (2 * N)) + 2 * (k.k2 % N) * mod(x + k.k1, N);
    T(mod(x + k.k1, N), x) = unit_root(m, 2 * N);
  }
  return T;
}

// ---- Observable ----------------------------------------------------------

Observable Observable::constant(cplx c) {
  Observable f(c.imag() == 0.0);
  f.set({0, 0}, c);
  return f;
}

Observable Observable::cos_q() {
  Observable f(true);
  f.set({0, 1}, 0.5);
  f.set({0, -1}, 0.5);
  return f;
}

Observable& Observable::set(PhaseIndex k, cplx c) {
  if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
    throw InvalidArgument("Observable: non-finite coefficient");
  if (c == cplx(0.0))
    coeffs_.erase(k);
  else
    coeffs_[k] = c;
  return *this;
}

cplx Observable::coeff(PhaseIndex k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? cplx(0.0) : it->second;
}

long Observable::support_radius() const {
  long r = 0;
  for (const auto& [k, c] : coeffs_) r = std::max({r, std::abs(k.k1), std::abs(k.k2)});
  return r;
}

double Observable::l1_norm() const {
  double s = 0.0;
  for (const auto& [k, c] : coeffs_) s += std::abs(c);
  return s;
}

void Observable::check_reality(double tol) const {
  if (!real_) return;
  for (const auto& [k, c] : coeffs_) {
    cplx partner = coeff({-k.k1, -k.k2});
    if (std::abs(partner - std::conj(c)) > tol) {
      std::ostringstream os;
      os << "Observable declared real but coeff(" << -k.k1 << "," << -k.k2
         << ") != conj(coeff(" << k.k1 << "," << k.k2 << "))";
      throw InvalidArgument(os.str());
    }
  }
}

cplx Observable::evaluate(double q, double p) const {
  cplx s = 0.0;
  for (const auto& [k, c] : coeffs_) {
    double t = kTwoPi * (q * static_cast<double>(k.k2) - p * static_cast<double>(k.k1));
    s += c * cplx(std::cos(t), std::sin(t));
  }
  return s;
}

Matrix Observable::evaluate_grid(const std::vector<double>& qs, const std::vector<double>& ps) const {
  std::map<long, long> k1_idx, k2_idx;
  for (const auto& [k, c] : coeffs_) {
    k1_idx.emplace(k.k1, 0);
    k2_idx.emplace(k.k2, 0);
  }
  long a = 0, b = 0;
  for (auto& [k, i] : k1_idx) i = a++;
  for (auto& [k, i] : k2_idx) i = b++;

  const long nq = qs.size(), np = ps.size();
  if (coeffs_.empty()) return Matrix::Zero(nq, np);
  Matrix C = Matrix::Zero(b, a);
  for (const auto& [k, c] : coeffs_) C(k2_idx[k.k2], k1_idx[k.k1]) = c;

  Matrix Eq(nq, b), Ep(np, a);
  for (long i = 0; i < nq; ++i)
    for (const auto& [k2, j] : k2_idx) {
      double t = kTwoPi * qs[i] * static_cast<double>(k2);
      Eq(i, j) = {std::cos(t), std::sin(t)};
    }
  for (long i = 0; i < np; ++i)
    for (const auto& [k1, j] : k1_idx) {
      double t = -kTwoPi * ps[i] * static_cast<double>(k1);
      Ep(i, j) = {std::cos(t), std::sin(t)};
    }
  return Eq * C * Ep.transpose();
}

Observable Observable::operator+(const Observable& o) const {
  Observable r(real_ && o.real_);
  r.coeffs_ = coeffs_;
  for (const auto& [k, c] : o.coeffs_) r.set(k, r.coeff(k) + c);
  return r;
}

Observable Observable::operator*(cplx s) const {
  Observable r(real_ && s.imag() == 0.0);
  for (const auto& [k, c] : coeffs_) r.set(k, c * s);
  return r;
}

// ---- quantization --------------------------------------------------------

Matrix weyl_quantize(const Observable& f, TorusDim n) {
  f.check_reality(1e-12);
  std::vector<std::pair<PhaseIndex, cplx>> terms(f.terms().begin(), f.terms().end());
  return kernels::weyl_fill(terms, n, Exec::Parallel);
}

Vector weyl_apply(const Observable& f, const Vector& v) {
  Vector out = Vector::Zero(v.size());
  for (const auto& [k, c] : f.terms()) out += c * apply_phase_translation(k, v);
  return out;
}

Matrix weyl_apply_columns(const Observable& f, const Matrix& X) {
  const long N = X.rows();
  Matrix out = Matrix::Zero(N, X.cols());
  std::vector<cplx> ph(N);
  std::vector<long> row(N);
  for (const auto& [k, c] : f.terms()) {
    for (long x = 0; x < N; ++x) {
      row[x] = mod(x + k.k1, N);
      long m = -k.k1 % (2 * N) * (k.k2 % (2 * N)) + 2 * (k.k2 % N) * row[x];
      ph[x] = c * unit_root(m, 2 * N);
    }
#pragma omp parallel for schedule(static)
    for (long j = 0; j < X.cols(); ++j)
      for (long x = 0; x < N; ++x) out(row[x], j) += ph[x] * X(x, j);
  }
  return out;
}

Matrix evaluate_on_grid(const Observable& f, long m) {
  if (m < 1) throw InvalidArgument("evaluate_on_grid: M must be positive");
  std::vector<double> pts(m);
  for (long i = 0; i < m; ++i) pts[i] = static_cast<double>(i) / static_cast<double>(m);
  return f.evaluate_grid(pts, pts);
}

Observable observable_from_grid(const Matrix& samples, long cutoff, bool declared_real) {
  const long M = samples.rows();
  if (samples.cols() != M) throw InvalidArgument("observable_from_grid: grid must be square");
  if (!is_pow2(M)) throw InvalidArgument("observable_from_grid: M must be a power of two");
  if (cutoff < 0 || M < 2 * cutoff + 2)
    throw InvalidArgument("observable_from_grid: need M >= 2K+2 (M=" + std::to_string(M) +
                          ", K=" + std::to_string(cutoff) + ")");
  const long w = 2 * cutoff + 1;
  // Eb(b, k1) = e^{+2 pi i b k1 / M}, Ea(a, k2) = e^{-2 pi i a k2 / M}
  Matrix Eb(M, w), Ea(M, w);
  for (long i = 0; i < M; ++i)
    for (long k = -cutoff; k <= cutoff; ++k) {
      Eb(i, k + cutoff) = unit_root(i * k, M);
      Ea(i, k + cutoff) = unit_root(-i * k, M);
    }
  Matrix C = Ea.transpose() * (samples * Eb) / static_cast<double>(M * M);  // C(k2, k1)

  double cmax = C.cwiseAbs().maxCoeff();
  Observable f(declared_real);
  for (long k1 = -cutoff; k1 <= cutoff; ++k1)
    for (long k2 = -cutoff; k2 <= cutoff; ++k2) {
      cplx c = C(k2 + cutoff, k1 + cutoff);
      if (declared_real) c = 0.5 * (c + std::conj(C(-k2 + cutoff, -k1 + cutoff)));
      if (std::abs(c) > 1e-14 * cmax) f.set({k1, k2}, c);
    }
  return f;
}

// ---- classical dynamics --------------------------------------------------

TorusPoint classical_baker(TorusPoint x, long t) {
  double q = x.q, p = x.p;
  for (long s = 0; s < t; ++s) {
    double b = std::floor(2.0 * q);
    q = 2.0 * q - b;
    p = 0.5 * (p + b);
  }
  for (long s = 0; s < -t; ++s) {
    double b = std::floor(2.0 * p);
    p = 2.0 * p - b;
    q = 0.5 * (q + b);
  }
  return TorusPoint(q, p);
}

double theta_phase(TorusPoint x, long k, double delta) {
  if (k < 0) throw InvalidArgument("theta_phase: k must be nonnegative");
  double acc = 0.0;
  TorusPoint y = x;
  for (long l = 0; l < k; ++l) {
    if (y.q > delta && y.q < 0.5 - delta) {
      // Theta = 0
    } else if (y.q > 0.5 + delta && y.q < 1.0 - delta) {
      acc += y.q + 0.5 * (y.p + 1.0);
    } else {
      std::ostringstream os;
      os << "theta_phase: iterate " << l << " at q=" << y.q << " lies within delta=" << delta
         << " of a discontinuity";
      throw InvalidArgument(os.str());
    }
    y = classical_baker(y, 1);
  }
  return acc;
}

Vector coherent_state(const CoherentParams& c, TorusDim n, int trunc) {
  if (trunc < 1) throw InvalidArgument("coherent_state: trunc must be >= 1");
  if (!(c.sigma > 0.0)) throw InvalidArgument("coherent_state: sigma must be positive");
  const long N = n;
  const double Nd = static_cast<double>(N);
  const double q0 = c.center.q, p0 = c.center.p, sg = c.sigma;
  const double amp = std::pow(2.0 * Nd * sg, 0.25) / std::sqrt(Nd);
  Vector psi(N);
  for (long j = 0; j < N; ++j) {
    cplx s = 0.0;
    for (int z = -trunc; z <= trunc; ++z) {
      double q = static_cast<double>(j) / Nd + z;
      double ph = -kPi * Nd * q0 * p0 + kTwoPi * Nd * p0 * q;
      double g = std::exp(-sg * Nd * kPi * (q - q0) * (q - q0));
      s += g * cplx(std::cos(ph), std::sin(ph));
    }
    psi(j) = amp * s;
  }
  return psi;
}

Vector normalized(const Vector& v) {
  double nrm = v.norm();
  if (!(nrm > 0.0)) throw NumericalFailure("normalized: zero vector");
  return v / nrm;
}

// ---- cutoff functions ----------------------------------------------------

namespace {

double bump_raw(double x) {
  double u = 1.0 - 4.0 * x * x;
  return u <= 0.0 ? 0.0 : std::exp(-1.0 / u);
}

double bump_mass() {
  static const double m = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      bump_raw, -0.5, 0.5, 15, 1e-15);
  return m;
}

// cumulative integral of the unit-mass bump from -1/2 to u
double bump_cdf(double u) {
  if (u <= -0.5) return 0.0;
  if (u >= 0.5) return 1.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(bump_raw, -0.5, u, 15, 1e-15);
  return v / bump_mass();
}

}  // namespace

double bump(double x) { return bump_raw(x) / bump_mass(); }

double mollified_indicator(double beta, double q) {
  if (!(beta > 0.0 && beta < 0.25)) throw InvalidArgument("mollified_indicator: need 0 < beta < 1/4");
  double x = wrap_unit(q);
  double v = bump_cdf((x - 1.5 * beta) / beta) - bump_cdf((x - 1.0 + 1.5 * beta) / beta);
  return std::clamp(v, 0.0, 1.0);
}

std::function<double(double, double)> cutoff_function(double beta, int n) {
  if (!(beta > 0.0 && beta < 0.25)) throw InvalidArgument("cutoff_function: need 0 < beta < 1/4");
  if (n < 0) throw InvalidArgument("cutoff_function: n must be nonnegative");
  const double scale = std::ldexp(1.0, n);
  return [beta, scale](double q, double p) {
    return mollified_indicator(beta, scale * q) * mollified_indicator(beta, p);
  };
}

Observable cutoff_observable(double beta, int n, long cutoff, long grid) {
  if (!(beta > 0.0 && beta < 0.25)) throw InvalidArgument("cutoff_observable: need 0 < beta < 1/4");
  if (n < 0) throw InvalidArgument("cutoff_observable: n must be nonnegative");
  const double scale = std::ldexp(1.0, n);
  Eigen::VectorXd cq(grid), cp(grid);
  for (long i = 0; i < grid; ++i) {
    double x = static_cast<double>(i) / static_cast<double>(grid);
    cq(i) = mollified_indicator(beta, scale * x);
    cp(i) = mollified_indicator(beta, x);
  }
  Matrix samples = (cq * cp.transpose()).cast<cplx>();
  return observable_from_grid(samples, cutoff, true);
}

// ---- composition with the classical map ---------------------------------

namespace {

// f at an arbitrary list of points; uses the separable product when the
// distinct coordinates are few (dyadic images of a grid)
std::vector<cplx> evaluate_points(const Observable& f, const std::vector<TorusPoint>& pts) {
  std::map<double, long> qi, pi;
  for (const auto& x : pts) {
    qi.emplace(x.q, 0);
    pi.emplace(x.p, 0);
  }
  std::vector<cplx> out(pts.size());
  const double dense = static_cast<double>(qi.size()) * static_cast<double>(pi.size());
  if (dense <= 8.0 * static_cast<double>(pts.size()) + 1024.0) {
    std::vector<double> qs, ps;
    for (auto& [v, i] : qi) { i = qs.size(); qs.push_back(v); }
    for (auto& [v, i] : pi) { i = ps.size(); ps.push_back(v); }
    Matrix V = f.evaluate_grid(qs, ps);
    for (size_t s = 0; s < pts.size(); ++s) out[s] = V(qi[pts[s].q], pi[pts[s].p]);
  } else {
#pragma omp parallel for schedule(static)
    for (long s = 0; s < static_cast<long>(pts.size()); ++s) out[s] = f.evaluate(pts[s].q, pts[s].p);
  }
  return out;
}

}  // namespace

Observable compose_inverse_baker(const Observable& f, long t, long grid, long cutoff) {
  std::vector<TorusPoint> pts;
  pts.reserve(grid * grid);
  for (long a = 0; a < grid; ++a)
    for (long b = 0; b < grid; ++b) {
      TorusPoint x(static_cast<double>(a) / grid, static_cast<double>(b) / grid);
      pts.push_back(classical_baker(x, -t));
    }
  std::vector<cplx> vals = evaluate_points(f, pts);
  Matrix samples(grid, grid);
  for (long a = 0; a < grid; ++a)
    for (long b = 0; b < grid; ++b) samples(a, b) = vals[a * grid + b];
  return observable_from_grid(samples, cutoff, f.declared_real());
}

double ergodic_average_classical(const Observable& f, long horizon, long grid) {
  if (horizon < 1) throw InvalidArgument("ergodic_average_classical: T must be >= 1");
  if (grid < 2) throw InvalidArgument("ergodic_average_classical: grid too small");
  if (!f.declared_real()) throw InvalidArgument("ergodic_average_classical: f must be declared real");
  const double mean = f.mean().real();
  const long double two64 = 18446744073709551616.0L;
  double acc = 0.0;
  // B^{-1} consumes one binary digit of p per step, so p is carried as a
  // 64-bit fraction whose low digits are refilled from a per-cell stream
  // (jittered grid); a plain double would collapse to p = 0 after ~50 steps.
#pragma omp parallel for reduction(+ : acc) schedule(static)
  for (long a = 0; a < grid; ++a) {
    for (long b = 0; b < grid; ++b) {
      std::uint64_t st = rng::mix_seed(0x5eedULL, static_cast<std::uint64_t>(a * grid + b));
      long double u = static_cast<long double>(rng::splitmix64(st) >> 11) / 9007199254740992.0L;
      std::uint64_t P = static_cast<std::uint64_t>((static_cast<long double>(b) + u) / grid * two64);
      double q = (a + 0.5) / static_cast<double>(grid);
      std::uint64_t fresh = rng::splitmix64(st);
      int left = 64;
      double s = 0.0;
      for (long t = 0; t < horizon; ++t) {
        double p = static_cast<double>(static_cast<long double>(P) / two64);
        s += f.evaluate(q, p).real();
        std::uint64_t bit = P >> 63;
        if (left == 0) { fresh = rng::splitmix64(st); left = 64; }
        P = (P << 1) | (fresh & 1ULL);
        fresh >>= 1;
        --left;
        q = 0.5 * (q + static_cast<double>(bit));
      }
      double d = s / static_cast<double>(horizon) - mean;
      acc += d * d;
    }
  }
  return acc / static_cast<double>(grid * grid);
}

}  // namespace bakerlab::torus
