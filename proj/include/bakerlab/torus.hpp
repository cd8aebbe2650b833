#pragma once

// Torus Hilbert space conventions: DFT, phase-space translations, Weyl
// quantization of Fourier-dictionary observables, torus coherent states and
// the classical baker map.

#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "bakerlab/types.hpp"

namespace bakerlab::torus {

/// (F_N)_{jk} = N^{-1/2} exp(-2 pi i j k / N).
Matrix build_dft(TorusDim n);

/// Integer pair (k1, k2) indexing the translation T(k1, k2).
struct PhaseIndex {
  long k1 = 0;
  long k2 = 0;
  auto operator<=>(const PhaseIndex&) const = default;
};

/// T(k)|x> = exp(-pi i k1 k2 / N) exp(2 pi i k2 (x + k1) / N) |x + k1 mod N>.
Vector apply_phase_translation(PhaseIndex k, const Vector& v);
Matrix phase_translation_matrix(PhaseIndex k, TorusDim n);

/// Classical observable on T^2 as a finite Fourier dictionary
///   f(q, p) = sum_k c(k) exp(2 pi i (q k2 - p k1)),
/// so that c(k) = \int f exp(-2 pi i (q k2 - p k1)) dq dp.
class Observable {
 public:
  Observable() = default;
  explicit Observable(bool declared_real) : real_(declared_real) {}

  static Observable constant(cplx c);
  /// cos(2 pi q) = (e^{2 pi i q} + e^{-2 pi i q}) / 2.
  static Observable cos_q();

  Observable& set(PhaseIndex k, cplx c);
  cplx coeff(PhaseIndex k) const;
  const std::map<PhaseIndex, cplx>& terms() const { return coeffs_; }
  bool declared_real() const { return real_; }
  /// Phase-space average, i.e. the (0, 0) coefficient.
  cplx mean() const { return coeff({0, 0}); }
  long support_radius() const;
  double l1_norm() const;

  /// Throws if declared real but c(-k) != conj(c(k)) beyond tol.
  void check_reality(double tol = 1e-12) const;

  cplx evaluate(double q, double p) const;
  /// Values f(qs[i], ps[j]) as a qs.size() x ps.size() matrix.
  Matrix evaluate_grid(const std::vector<double>& qs, const std::vector<double>& ps) const;

  Observable operator+(const Observable& o) const;
  Observable operator*(cplx s) const;

 private:
  std::map<PhaseIndex, cplx> coeffs_;
  bool real_ = false;
};

/// Sum_k c(k) T(k) as a dense N x N matrix.
Matrix weyl_quantize(const Observable& f, TorusDim n);

/// Op^W(f) v without forming the matrix.
Vector weyl_apply(const Observable& f, const Vector& v);
/// Op^W(f) applied to every column of X.
Matrix weyl_apply_columns(const Observable& f, const Matrix& X);

/// Samples f(a / M, b / M) on an M x M grid (rows index q, columns index p).
Matrix evaluate_on_grid(const Observable& f, long m);

/// Fourier dictionary on |k1|, |k2| <= K from M x M grid samples laid out as
/// in evaluate_on_grid. M must be a power of two with M >= 2K + 2.
Observable observable_from_grid(const Matrix& samples, long cutoff, bool declared_real = false);

struct TorusPoint {
  double q = 0.0;
  double p = 0.0;
  TorusPoint() = default;
  TorusPoint(double q_, double p_) : q(wrap_unit(q_)), p(wrap_unit(p_)) {}
};

/// t-fold iterate of B(q, p) = (2q mod 1, (p + floor(2q)) / 2); t < 0 uses
/// B^{-1}(q, p) = ((q + floor(2p)) / 2, 2p mod 1).
TorusPoint classical_baker(TorusPoint x, long t);

/// Accumulated cocycle Theta_k(x) = sum_{l < k} Theta(B^l x) with Theta = 0 on
/// the left half and q + (p + 1) / 2 on the right half. Throws when an iterate
/// falls within delta of q in {0, 1/2, 1}.
double theta_phase(TorusPoint x, long k, double delta);

struct CoherentParams {
  TorusPoint center;
  double sigma = 1.0;
};

/// Torus coherent state (1/sqrt N) sum_{|z| <= trunc} Psi_{x,sigma}(j/N + z).
Vector coherent_state(const CoherentParams& c, TorusDim n, int trunc = 3);
Vector normalized(const Vector& v);

/// Smooth unit-mass bump c exp(-1 / (1 - 4x^2)) on |x| < 1/2.
double bump(double x);
/// Mollified indicator 1_{[3b/2, 1 - 3b/2]} * eta_b on R/Z, for 0 < b < 1/4.
double mollified_indicator(double beta, double q);
/// chi_{beta,n}(q, p) = chi~_beta(2^n q) chi~_beta(p) as a point function.
std::function<double(double, double)> cutoff_function(double beta, int n);
/// Fourier dictionary of chi_{beta,n} via grid sampling.
Observable cutoff_observable(double beta, int n, long cutoff, long grid = 512);

/// Fourier dictionary of f o B^{-t} obtained by grid composition.
Observable compose_inverse_baker(const Observable& f, long t, long grid = 512, long cutoff = 64);

/// Grid L^2 variance of the Birkhoff average (1/T) sum_{t<T} f o B^{-t}.
double ergodic_average_classical(const Observable& f, long horizon, long grid);

}  // namespace bakerlab::torus
