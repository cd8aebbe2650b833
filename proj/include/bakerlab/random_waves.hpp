#pragma once

// Random band-limited waves psi = dim^{-1/2} sum_{theta_j in I} g_j v_j and
// their statistics: value distribution, moments, autocorrelations, l^p norms,
// sign changes and matrix elements.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bakerlab/baker_bv.hpp"
#include "bakerlab/selberg.hpp"
#include "bakerlab/torus.hpp"

namespace bakerlab::rw {

using selberg::AngleInterval;

struct WaveSample {
  Vector psi;
  AngleInterval window;
  long dim_S = 0;
  std::uint64_t seed = 0;
};

/// Eigenvectors of sd with angle in I, as columns (throws on an empty window).
Matrix window_basis(const bv::SpectralData& sd, const AngleInterval& I);

/// Sample `sample` of the stream `seed`; each sample index owns a substream.
WaveSample sample_wave(const bv::SpectralData& sd, const AngleInterval& I, std::uint64_t seed,
                       std::uint64_t sample = 0);
Vector sample_from_basis(const Matrix& V, std::uint64_t seed, std::uint64_t sample);
/// Samples 0..count-1 of `seed` as columns.
Matrix sample_many(const Matrix& V, std::uint64_t seed, long count, Exec ex = Exec::Parallel);

/// One-sample Kolmogorov-Smirnov distance of xs to N(0, 1/2).
double ks_half_normal(std::vector<double> xs);

struct KSPair {
  double real = 0.0;
  double imag = 0.0;
};
/// KS of sqrt(N) Re psi and sqrt(N) Im psi against N(0, 1/2).
KSPair value_statistics(const Vector& psi);
inline KSPair value_statistics(const WaveSample& w) { return value_statistics(w.psi); }

/// |psi|_p^p for finite p and max |psi(x)| for p = infinity.
std::map<double, double> lp_norms(const Vector& psi, const std::vector<double>& ps);

struct SignChanges {
  long real = 0;
  long imag = 0;
};
/// Cyclic count of x with strictly opposite signs at x and x + 1; zeros are skipped.
SignChanges sign_changes(const Vector& psi);
/// Positions x of the real (or imaginary) part sign changes.
std::vector<long> sign_change_positions(const RealVector& f);

struct SignChangeHistogram {
  std::vector<double> real;  // 16 bins of (2/N) E|Z| on [0, 1]
  std::vector<double> imag;
  double mass_real = 0.0;
  double mass_imag = 0.0;
};
/// Columns of `samples` are waves; needs at least 20 of them.
SignChangeHistogram sign_change_distribution(const Matrix& samples, int bins = 16);

struct Autocorrelation {
  double m2 = 0.0;        // E |sqrt N psi(x)|^2
  double m4 = 0.0;        // E |sqrt N psi(x)|^4
  double cross = 0.0;     // E N^2 |psi(x)|^2 |psi(y)|^2
  double m2_se = 0.0;
  double m4_se = 0.0;
  double cross_se = 0.0;
  double m2_exact = 0.0;  // from P / dim
  double m4_exact = 0.0;
  double cross_exact = 0.0;
};
Autocorrelation autocorrelation(const bv::SpectralData& sd, const AngleInterval& I, long x, long y, long n_samples,
                                std::uint64_t seed);

struct ConcentrationReport {
  std::vector<double> deviations;         // <psi|Op(a)|psi> - int a per sample
  std::map<std::string, double> quantiles;  // q05 q25 q50 q75 q95
  double max_abs = 0.0;
  double band = 0.1;
  double frac_within_band = 0.0;
};
ConcentrationReport matrix_element_concentration(const bv::SpectralData& sd, const AngleInterval& I,
                                                 const torus::Observable& a, long n_samples, std::uint64_t seed,
                                                 double band = 0.1);
ConcentrationReport summarize_deviations(std::vector<double> devs, double band);

struct WaveStats {
  long N = 0;
  AngleInterval interval;
  long dim_S = 0;
  long seeds = 0;
  std::uint64_t seed = 0;
  double ks_threshold = 0.05;
  double ks_real_mean = 0.0;
  double ks_imag_mean = 0.0;
  double ks_pass_frac = 0.0;
  double sign_changes_mean = 0.0;
  double sign_changes_imag_mean = 0.0;
  double lp2_mean = 0.0;
  double lp4_mean = 0.0;   // N |psi|_4^4
  double lpinf_mean = 0.0;
  SignChangeHistogram hist;
  ConcentrationReport obs;
};

/// Draws `count` waves from window I and gathers every per-sample statistic;
/// the observable deviations use cos(2 pi q).
WaveStats wave_statistics(const bv::SpectralData& sd, const AngleInterval& I, long count, std::uint64_t seed,
                          double ks_threshold = 0.05, Exec ex = Exec::Parallel);
std::string wave_stats_json(const WaveStats& s);

}  // namespace bakerlab::rw
