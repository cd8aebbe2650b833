#include "bakerlab/random_waves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "bakerlab/rng.hpp"
#include "bakerlab/spectral.hpp"

namespace bakerlab::rw {

Matrix window_basis(const bv::SpectralData& sd, const AngleInterval& I) {
  auto idx = spectral::window_indices(sd, I);
  if (idx.empty()) throw InvalidArgument("random wave: spectral window contains no eigenvalue");
  Matrix V(sd.vectors.rows(), static_cast<long>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) V.col(static_cast<long>(c)) = sd.vectors.col(idx[c]);
  return V;
}

Vector sample_from_basis(const Matrix& V, std::uint64_t seed, std::uint64_t sample) {
  rng::Stream s(seed, sample);
  Vector g(V.cols());
  for (long j = 0; j < g.size(); ++j) g(j) = s.complex_normal();
  return (V * g) / std::sqrt(static_cast<double>(V.cols()));
}

WaveSample sample_wave(const bv::SpectralData& sd, const AngleInterval& I, std::uint64_t seed, std::uint64_t sample) {
  Matrix V = window_basis(sd, I);
  return {sample_from_basis(V, seed, sample), I, V.cols(), seed};
}

Matrix sample_many(const Matrix& V, std::uint64_t seed, long count, Exec ex) {
  // gaussians are drawn per sample so the result does not depend on the path
  Matrix G(V.cols(), count);
  for (long s = 0; s < count; ++s) {
    rng::Stream st(seed, static_cast<std::uint64_t>(s));
    for (long j = 0; j < V.cols(); ++j) G(j, s) = st.complex_normal();
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(V.cols()));
  Matrix out(V.rows(), count);
  if (ex == Exec::Serial) {
    for (long s = 0; s < count; ++s) out.col(s).noalias() = V * G.col(s) * scale;
  } else {
#pragma omp parallel for schedule(dynamic)
    for (long s = 0; s < count; ++s) out.col(s).noalias() = V * G.col(s) * scale;
  }
  return out;
}

double ks_half_normal(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double F = 0.5 * std::erfc(-xs[i]);  // N(0, 1/2)
    d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
  }
  return d;
}

KSPair value_statistics(const Vector& psi) {
  const double s = std::sqrt(static_cast<double>(psi.size()));
  std::vector<double> re(psi.size()), im(psi.size());
  for (long x = 0; x < psi.size(); ++x) {
    re[x] = s * psi(x).real();
    im[x] = s * psi(x).imag();
  }
  return {ks_half_normal(std::move(re)), ks_half_normal(std::move(im))};
}

std::map<double, double> lp_norms(const Vector& psi, const std::vector<double>& ps) {
  std::map<double, double> out;
  for (double p : ps) {
    if (!(p > 0.0)) throw InvalidArgument("lp_norms: p must be positive");
    if (std::isinf(p)) {
      out[p] = psi.size() ? psi.cwiseAbs().maxCoeff() : 0.0;
    } else {
      double acc = 0.0;
      for (long x = 0; x < psi.size(); ++x) acc += std::pow(std::abs(psi(x)), p);
      out[p] = acc;
    }
  }
  return out;
}

std::vector<long> sign_change_positions(const RealVector& f) {
  std::vector<long> pos;
  const long n = f.size();
  for (long x = 0; x < n; ++x) {
    double a = f(x), b = f((x + 1) % n);
    if ((a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0)) pos.push_back(x);
  }
  return pos;
}

SignChanges sign_changes(const Vector& psi) {
  return {static_cast<long>(sign_change_positions(psi.real()).size()),
          static_cast<long>(sign_change_positions(psi.imag()).size())};
}

SignChangeHistogram sign_change_distribution(const Matrix& samples, int bins) {
  if (samples.cols() < 20) throw InvalidArgument("sign_change_distribution: needs at least 20 samples");
  if (bins < 1) throw InvalidArgument("sign_change_distribution: bins must be positive");
  const long n = samples.rows();
  SignChangeHistogram h;
  h.real.assign(bins, 0.0);
  h.imag.assign(bins, 0.0);
  auto bin_of = [&](long x) { return std::min<long>(bins - 1, (x * bins) / n); };
  for (long s = 0; s < samples.cols(); ++s) {
    for (long x : sign_change_positions(samples.col(s).real())) h.real[bin_of(x)] += 1.0;
    for (long x : sign_change_positions(samples.col(s).imag())) h.imag[bin_of(x)] += 1.0;
  }
  const double w = 2.0 / (static_cast<double>(n) * static_cast<double>(samples.cols()));
  for (int b = 0; b < bins; ++b) {
    h.real[b] *= w;
    h.imag[b] *= w;
    h.mass_real += h.real[b];
    h.mass_imag += h.imag[b];
  }
  return h;
}

namespace {

struct MeanSE {
  double mean = 0.0, se = 0.0;
};

MeanSE mean_se(const std::vector<double>& v) {
  MeanSE r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  if (v.size() < 2) return r;
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return r;
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  double pos = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, sorted.size() - 1);
  double t = pos - static_cast<double>(lo);
  return (1.0 - t) * sorted[lo] + t * sorted[hi];
}

}  // namespace

Autocorrelation autocorrelation(const bv::SpectralData& sd, const AngleInterval& I, long x, long y, long n_samples,
                                std::uint64_t seed) {
  if (n_samples < 1000) throw InvalidArgument("autocorrelation: needs at least 1000 samples");
  const long N = sd.dim();
  if (x < 0 || x >= N || y < 0 || y >= N) throw InvalidArgument("autocorrelation: coordinate out of range");
  Matrix V = window_basis(sd, I);
  const double dim = static_cast<double>(V.cols());
  Eigen::RowVectorXcd rx = V.row(x), ry = V.row(y);

  std::vector<double> m2(n_samples), m4(n_samples), cr(n_samples);
#pragma omp parallel for schedule(static)
  for (long s = 0; s < n_samples; ++s) {
    rng::Stream st(seed, static_cast<std::uint64_t>(s));
    Vector g(V.cols());
    for (long j = 0; j < g.size(); ++j) g(j) = st.complex_normal();
    double ax = std::norm((rx * g)(0)) / dim * N;
    double ay = std::norm((ry * g)(0)) / dim * N;
    m2[s] = ax;
    m4[s] = ax * ax;
    cr[s] = ax * ay;
  }
  Autocorrelation a;
  auto r2 = mean_se(m2), r4 = mean_se(m4), rc = mean_se(cr);
  a.m2 = r2.mean;
  a.m2_se = r2.se;
  a.m4 = r4.mean;
  a.m4_se = r4.se;
  a.cross = rc.mean;
  a.cross_se = rc.se;

  const double pxx = rx.squaredNorm() / dim, pyy = ry.squaredNorm() / dim;
  const double pxy = std::norm(rx.dot(ry)) / (dim * dim);  // |P_xy / dim|^2
  const double Nd = static_cast<double>(N);
  a.m2_exact = Nd * pxx;
  a.m4_exact = 2.0 * Nd * Nd * pxx * pxx;
  a.cross_exact = Nd * Nd * (pxx * pyy + pxy);
  return a;
}

ConcentrationReport summarize_deviations(std::vector<double> devs, double band) {
  ConcentrationReport r;
  r.band = band;
  r.deviations = devs;
  if (devs.empty()) return r;
  long within = 0;
  for (double d : devs) {
    r.max_abs = std::max(r.max_abs, std::abs(d));
    if (std::abs(d) <= band) ++within;
  }
  r.frac_within_band = static_cast<double>(within) / static_cast<double>(devs.size());
  std::sort(devs.begin(), devs.end());
  r.quantiles = {{"q05", quantile(devs, 0.05)},
                 {"q25", quantile(devs, 0.25)},
                 {"q50", quantile(devs, 0.50)},
                 {"q75", quantile(devs, 0.75)},
                 {"q95", quantile(devs, 0.95)}};
  return r;
}

ConcentrationReport matrix_element_concentration(const bv::SpectralData& sd, const AngleInterval& I,
                                                 const torus::Observable& a, long n_samples, std::uint64_t seed,
                                                 double band) {
  if (!a.declared_real()) throw InvalidArgument("matrix_element_concentration: observable must be real");
  a.check_reality();
  Matrix V = window_basis(sd, I);
  Matrix W = sample_many(V, seed, n_samples);
  Matrix AW = torus::weyl_apply_columns(a, W);
  const double mean = a.mean().real();
  std::vector<double> devs(n_samples);
  for (long s = 0; s < n_samples; ++s) devs[s] = W.col(s).dot(AW.col(s)).real() - mean;
  return summarize_deviations(std::move(devs), band);
}

WaveStats wave_statistics(const bv::SpectralData& sd, const AngleInterval& I, long count, std::uint64_t seed,
                          double ks_threshold, Exec ex) {
  if (count < 1) throw InvalidArgument("wave_statistics: need at least one sample");
  Matrix V = window_basis(sd, I);
  Matrix W = sample_many(V, seed, count, ex);
  const long N = sd.dim();
  WaveStats st;
  st.N = N;
  st.interval = I;
  st.dim_S = V.cols();
  st.seeds = count;
  st.seed = seed;
  st.ks_threshold = ks_threshold;

  std::vector<double> ksr(count), ksi(count), sc(count), sci(count), l2(count), l4(count), linf(count);
  const std::vector<double> ps{2.0, 4.0, std::numeric_limits<double>::infinity()};
  auto one = [&](long s) {
    Vector psi = W.col(s);
    auto ks = value_statistics(psi);
    ksr[s] = ks.real;
    ksi[s] = ks.imag;
    auto c = sign_changes(psi);
    sc[s] = static_cast<double>(c.real);
    sci[s] = static_cast<double>(c.imag);
    auto lp = lp_norms(psi, ps);
    l2[s] = lp[2.0];
    l4[s] = lp[4.0] * static_cast<double>(N);
    linf[s] = lp[ps[2]];
  };
  if (ex == Exec::Serial) {
    for (long s = 0; s < count; ++s) one(s);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (long s = 0; s < count; ++s) one(s);
  }
  long pass = 0;
  for (long s = 0; s < count; ++s)
    if (ksr[s] <= ks_threshold) ++pass;
  st.ks_real_mean = mean_se(ksr).mean;
  st.ks_imag_mean = mean_se(ksi).mean;
  st.ks_pass_frac = static_cast<double>(pass) / static_cast<double>(count);
  st.sign_changes_mean = mean_se(sc).mean;
  st.sign_changes_imag_mean = mean_se(sci).mean;
  st.lp2_mean = mean_se(l2).mean;
  st.lp4_mean = mean_se(l4).mean;
  st.lpinf_mean = mean_se(linf).mean;
  if (count >= 20) st.hist = sign_change_distribution(W);

  torus::Observable a = torus::Observable::cos_q();
  Matrix AW = torus::weyl_apply_columns(a, W);
  std::vector<double> devs(count);
  for (long s = 0; s < count; ++s) devs[s] = W.col(s).dot(AW.col(s)).real() - a.mean().real();
  st.obs = summarize_deviations(std::move(devs), 0.1);
  return st;
}

std::string wave_stats_json(const WaveStats& s) {
  nlohmann::ordered_json j;
  j["N"] = s.N;
  j["interval"] = {{"start", s.interval.start}, {"length", s.interval.length}};
  j["dim_S"] = s.dim_S;
  j["seeds"] = s.seeds;
  j["ks_real_mean"] = s.ks_real_mean;
  j["ks_imag_mean"] = s.ks_imag_mean;
  j["ks_threshold"] = s.ks_threshold;
  j["ks_pass_frac"] = s.ks_pass_frac;
  j["sign_changes_mean"] = s.sign_changes_mean;
  j["sign_changes_imag_mean"] = s.sign_changes_imag_mean;
  j["lp"] = {{"2", s.lp2_mean}, {"4", s.lp4_mean}, {"inf", s.lpinf_mean}};
  j["hist_sign_changes"] = s.hist.real;
  j["hist_sign_changes_imag"] = s.hist.imag;
  nlohmann::ordered_json q;
  for (const auto& [k, v] : s.obs.quantiles) q[k] = v;
  q["max_abs"] = s.obs.max_abs;
  q["band"] = s.obs.band;
  q["frac_within_band"] = s.obs.frac_within_band;
  j["obs_deviation_quantiles"] = q;
  return j.dump(2);
}

}  // namespace bakerlab::rw
