#pragma once

// Beurling's entire function, the periodized Selberg majorant/minorant of an
// arc indicator, and functional calculus of these trigonometric polynomials
// applied to a unitary.

#include <cstdint>
#include <string>
#include <vector>

#include "bakerlab/baker_bv.hpp"
#include "bakerlab/types.hpp"

namespace bakerlab::selberg {

/// Half-open arc: theta in I iff ((theta - start) mod 2 pi) < length.
struct AngleInterval {
  double start = 0.0;
  double length = kTwoPi;

  AngleInterval() = default;
  AngleInterval(double s, double len);
  static AngleInterval full() { return AngleInterval(0.0, kTwoPi); }
  bool contains(double theta) const;
  bool is_full() const { return length >= kTwoPi; }
  AngleInterval complement() const;
};

/// B(z) via the trigamma closed form of the two lattice sums (the full series,
/// no truncation); tol is accepted for interface symmetry and must be > 0.
double beurling(double z, double tol = 1e-12);
/// Plain truncated series with terms n in [-M, M]; used as an oracle.
double beurling_series(double z, long M);

/// Coefficients c(l), |l| <= L = floor(degree), of a real trigonometric
/// polynomial sum_l c(l) e^{i l theta}.
struct TrigPoly {
  double degree = 0.0;
  long L = 0;
  std::vector<cplx> c;  // index l + L

  cplx at(long l) const { return (l < -L || l > L) ? cplx(0.0) : c[l + L]; }
  double evaluate(double theta) const;
};

struct SelbergPair {
  AngleInterval interval;
  double degree = 0.0;
  TrigPoly minus;
  TrigPoly plus;
  double alias_residual = 0.0;  // largest sampled coefficient above degree
};

/// Periodized majorant sum_j g+(theta - 2 pi j) evaluated directly.
double periodized_majorant(const AngleInterval& I, double degree, double theta);

SelbergPair selberg_pair(const AngleInterval& I, double degree);

/// c(0) Id + sum_{l=1}^{L} (c(l) B^l + c(-l) B^{-l}) from dense powers
/// powers[l - 1] = B^l, l = 1..L; B^{-l} is taken as (B^l)^dagger.
Matrix functional_calculus(const TrigPoly& g, const std::vector<Matrix>& powers);
/// Same polynomial through repeated factorized application.
Matrix functional_calculus(const TrigPoly& g, const bv::BVOperator& op);
/// Eigen-route U diag(g(theta_j)) U^dagger.
Matrix functional_calculus(const TrigPoly& g, const bv::SpectralData& sd);

struct SandwichReport {
  long n = 0;
  long lower_violations = 0;
  long upper_violations = 0;
  double max_lower_violation = 0.0;  // max_x (F-_xx - P_xx), clipped at 0
  double max_upper_violation = 0.0;  // max_x (P_xx - F+_xx), clipped at 0
  long offdiag_pairs = 0;
  long offdiag_violations = 0;
  double offdiag_max_excess = 0.0;   // max |F+_xy - P_xy| - sqrt(...), clipped at 0
  bool ok() const { return lower_violations == 0 && upper_violations == 0; }
};

SandwichReport sandwich_check(const Matrix& f_minus, const Matrix& p, const Matrix& f_plus, double slack = 1e-8,
                              long pairs = 1000, std::uint64_t seed = 7);

/// CSV rows "ell,re,im,side".
void write_coeff_csv(const std::string& path, const SelbergPair& sp);

}  // namespace bakerlab::selberg
