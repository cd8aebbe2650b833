#include "bakerlab/selberg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "bakerlab/kernels.hpp"
#include "bakerlab/rng.hpp"

namespace bakerlab::selberg {

AngleInterval::AngleInterval(double s, double len) {
  if (!std::isfinite(s)) throw InvalidArgument("AngleInterval: start must be finite");
  if (!(len > 0.0 && len <= kTwoPi + 1e-12))
    throw InvalidArgument("AngleInterval: length must lie in (0, 2 pi]");
  start = wrap_angle(s);
  length = std::min(len, kTwoPi);
}

bool AngleInterval::contains(double theta) const {
  if (is_full()) return true;
  return wrap_angle(theta - start) < length;
}

AngleInterval AngleInterval::complement() const {
  if (is_full()) throw InvalidArgument("AngleInterval: the full circle has an empty complement");
  return AngleInterval(start + length, kTwoPi - length);
}

// ---- Beurling function ---------------------------------------------------

double beurling(double z, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("beurling: tol must be positive");
  if (z == 0.0) return 1.0;
  const double s = std::sin(kPi * z) / kPi;
  if (z > 0.0) return 1.0 + s * s * 2.0 * (1.0 / z - boost::math::trigamma(z + 1.0));
  const double v = -z;
  return -1.0 + s * s * 2.0 * (boost::math::trigamma(v) - 1.0 / v);
}

double beurling_series(double z, long M) {
  if (z == std::round(z)) return z == 0.0 ? 1.0 : (z > 0.0 ? 1.0 : -1.0);
  double acc = 2.0 / z;
  // small terms first
  for (long n = M; n >= 1; --n) acc += 1.0 / ((z - n) * (z - n)) - 1.0 / ((z + n) * (z + n));
  acc += 1.0 / (z * z);
  const double s = std::sin(kPi * z) / kPi;
  return s * s * acc;
}

// ---- periodized majorant ---------------------------------------------------

namespace {

// sum_{m >= m0} R(c + sigma D m) with R(u) = B(u) - sgn(u), from the large-u
// expansion R ~ (sin pi u / pi)^2 (u^-2 - u^-3 / 3 + u^-5 / 15)
double tail_sum(double c, int sigma, double D, long m0, bool integer_degree) {
  using boost::math::polygamma;
  const double z0 = static_cast<double>(m0) + sigma * c / D;
  const double sg = static_cast<double>(sigma);
  const double s2 = polygamma(1, z0) / (D * D);
  const double s3 = sg * (-polygamma(2, z0) / 2.0) / (D * D * D);
  const double s5 = sg * (-polygamma(4, z0) / 24.0) / std::pow(D, 5);
  const double h = s2 - s3 / 3.0 + s5 / 15.0;
  double w;
  if (integer_degree) {
    double sn = std::sin(kPi * c) / kPi;
    w = sn * sn;
  } else {
    w = 0.5 / (kPi * kPi);
  }
  return w * h;
}

double majorant_raw(double a, double len, double D, double theta) {
  const double b = a + len;
  const double s = D / kTwoPi;
  const bool integer_degree = std::abs(D - std::round(D)) < 1e-12;
  const long J = integer_degree ? 64 : 4096;
  double acc = 0.0;
  for (long j = -J; j <= J; ++j) {
    double y = theta - kTwoPi * static_cast<double>(j);
    acc += 0.5 * (beurling(s * (b - y)) + beurling(s * (y - a)));
  }
  // j > J: u1 = s(b - theta) + D j, u2 = s(theta - a) - D j
  // j < -J (j = -m): u1 = s(b - theta) - D m, u2 = s(theta - a) + D m
  const double c1 = s * (b - theta), c2 = s * (theta - a);
  acc += 0.5 * (tail_sum(c1, +1, D, J + 1, integer_degree) + tail_sum(c2, -1, D, J + 1, integer_degree));
  acc += 0.5 * (tail_sum(c1, -1, D, J + 1, integer_degree) + tail_sum(c2, +1, D, J + 1, integer_degree));
  return acc;
}

long mod(long a, long n) {
  long r = a % n;
  return r < 0 ? r + n : r;
}

TrigPoly sample_to_poly(const std::vector<double>& G, double D, double* alias) {
  const long M = G.size();
  const long L = static_cast<long>(std::floor(D));
  std::vector<cplx> tw(M);
  for (long m = 0; m < M; ++m) {
    double t = -kTwoPi * static_cast<double>(m) / static_cast<double>(M);
    tw[m] = {std::cos(t), std::sin(t)};
  }
  auto coeff = [&](long l) {
    cplx s = 0.0;
    for (long m = 0; m < M; ++m) s += G[m] * tw[mod(l * m, M)];
    return s / static_cast<double>(M);
  };
  TrigPoly p;
  p.degree = D;
  p.L = L;
  p.c.assign(2 * L + 1, 0.0);
  for (long l = 0; l <= L; ++l) {
    cplx cl = coeff(l), cm = coeff(-l);
    cplx sym = 0.5 * (cl + std::conj(cm));
    p.c[l + L] = sym;
    p.c[-l + L] = std::conj(sym);
  }
  p.c[L] = p.c[L].real();
  double al = 0.0;
  for (long l = L + 1; l < M / 2; ++l) al = std::max({al, std::abs(coeff(l)), std::abs(coeff(-l))});
  if (alias) *alias = std::max(*alias, al);
  return p;
}

}  // namespace

double TrigPoly::evaluate(double theta) const {
  double s = c.empty() ? 0.0 : c[L].real();
  for (long l = 1; l <= L; ++l) {
    cplx e(std::cos(l * theta), std::sin(l * theta));
    s += 2.0 * (c[l + L] * e).real();
  }
  return s;
}

double periodized_majorant(const AngleInterval& I, double degree, double theta) {
  return majorant_raw(I.start, I.length, degree, theta);
}

SelbergPair selberg_pair(const AngleInterval& I, double degree) {
  if (!(degree / kTwoPi >= 1.0)) throw InvalidArgument("selberg_pair: need K_deg / (2 pi) >= 1");
  const long L = static_cast<long>(std::floor(degree));
  long M = 8;
  while (M < 4 * L + 8) M *= 2;
  std::vector<double> gp(M), gc(M);
  // complement of the full circle is the degenerate arc [start, start]
  const double ca = I.start + I.length;
  const double clen = I.is_full() ? 0.0 : kTwoPi - I.length;
#pragma omp parallel for schedule(static)
  for (long m = 0; m < M; ++m) {
    double th = kTwoPi * static_cast<double>(m) / static_cast<double>(M);
    gp[m] = majorant_raw(I.start, I.length, degree, th);
    gc[m] = 1.0 - majorant_raw(ca, clen, degree, th);
  }
  SelbergPair sp;
  sp.interval = I;
  sp.degree = degree;
  sp.plus = sample_to_poly(gp, degree, &sp.alias_residual);
  sp.minus = sample_to_poly(gc, degree, &sp.alias_residual);
  return sp;
}

// ---- functional calculus ---------------------------------------------------

Matrix functional_calculus(const TrigPoly& g, const std::vector<Matrix>& powers) {
  if (static_cast<long>(powers.size()) < g.L)
    throw InvalidArgument("functional_calculus: need powers up to " + std::to_string(g.L) + ", got " +
                          std::to_string(powers.size()));
  if (powers.empty()) throw InvalidArgument("functional_calculus: dimension unknown without powers");
  const long N = powers.front().rows();
  Matrix F = g.at(0) * Matrix::Identity(N, N);
  for (long l = 1; l <= g.L; ++l) {
    F += g.at(l) * powers[l - 1];
    F += g.at(-l) * powers[l - 1].adjoint();
  }
  return F;
}

Matrix functional_calculus(const TrigPoly& g, const bv::BVOperator& op) {
  const long N = op.dim();
  Matrix F = g.at(0) * Matrix::Identity(N, N);
  Matrix fwd = Matrix::Identity(N, N), bwd = Matrix::Identity(N, N);
  for (long l = 1; l <= g.L; ++l) {
    op.apply_columns(fwd, 1);
    op.apply_columns(bwd, -1);
    F += g.at(l) * fwd;
    F += g.at(-l) * bwd;
  }
  return F;
}

Matrix functional_calculus(const TrigPoly& g, const bv::SpectralData& sd) {
  const long N = sd.dim();
  std::vector<long> cols(N);
  std::vector<cplx> w(N);
  for (long j = 0; j < N; ++j) {
    cols[j] = j;
    w[j] = g.evaluate(sd.angles(j));
  }
  return kernels::weighted_outer(sd.vectors, cols, w, Exec::Parallel);
}

SandwichReport sandwich_check(const Matrix& f_minus, const Matrix& p, const Matrix& f_plus, double slack,
                              long pairs, std::uint64_t seed) {
  const long N = p.rows();
  if (f_minus.rows() != N || f_plus.rows() != N || p.cols() != N)
    throw InvalidArgument("sandwich_check: matrices not conformable");
  SandwichReport r;
  r.n = N;
  for (long x = 0; x < N; ++x) {
    double lo = f_minus(x, x).real() - p(x, x).real();
    double hi = p(x, x).real() - f_plus(x, x).real();
    r.max_lower_violation = std::max(r.max_lower_violation, lo);
    r.max_upper_violation = std::max(r.max_upper_violation, hi);
    if (lo > slack) ++r.lower_violations;
    if (hi > slack) ++r.upper_violations;
  }
  if (N >= 2) {
    rng::Stream st(seed, 0);
    for (long s = 0; s < pairs; ++s) {
      long x = std::min(N - 1, static_cast<long>(st.uniform() * N));
      long y = std::min(N - 1, static_cast<long>(st.uniform() * N));
      if (x == y) continue;
      ++r.offdiag_pairs;
      double dx = std::max(0.0, (f_plus(x, x) - p(x, x)).real());
      double dy = std::max(0.0, (f_plus(y, y) - p(y, y)).real());
      double excess = std::abs(f_plus(x, y) - p(x, y)) - std::sqrt(dx * dy);
      r.offdiag_max_excess = std::max(r.offdiag_max_excess, excess);
      if (excess > slack) ++r.offdiag_violations;
    }
  }
  return r;
}

void write_coeff_csv(const std::string& path, const SelbergPair& sp) {
  std::ofstream os(path);
  if (!os) throw InvalidArgument("write_coeff_csv: cannot open " + path);
  os << "ell,re,im,side\n" << std::setprecision(17);
  for (const auto& [poly, side] : {std::pair{&sp.minus, "minus"}, std::pair{&sp.plus, "plus"}})
    for (long l = -poly->L; l <= poly->L; ++l)
      os << l << ',' << poly->at(l).real() << ',' << poly->at(l).imag() << ',' << side << '\n';
}

}  // namespace bakerlab::selberg
