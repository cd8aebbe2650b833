#include <doctest.h>

#include <json.hpp>

#include "bakerlab/exclusion.hpp"
#include "bakerlab/random_waves.hpp"
#include "bakerlab/spectral.hpp"

using namespace bakerlab;
using namespace bakerlab::rw;

namespace {

const bv::SpectralData& sd_of(long n) {
  static std::map<long, bv::SpectralData> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, bv::spectral_decompose(bv::BVOperator(TorusDim{n}))).first;
  return it->second;
}

const AngleInterval kWindow(2.0, 1.0);

}  // namespace

TEST_CASE("sampling is deterministic and normalized") {
  const auto& sd = sd_of(128);
  auto a = sample_wave(sd, kWindow, 42, 3);
  auto b = sample_wave(sd, kWindow, 42, 3);
  auto c = sample_wave(sd, kWindow, 42, 4);
  CHECK(a.psi == b.psi);
  CHECK(max_abs(a.psi - c.psi) > 1e-3);
  CHECK(a.dim_S == spectral::eigen_count(sd, kWindow));
  Matrix V = window_basis(sd, kWindow);
  CHECK(max_abs(sample_many(V, 42, 6, Exec::Serial) - sample_many(V, 42, 6, Exec::Parallel)) == 0.0);
  CHECK(max_abs(sample_many(V, 42, 6).col(3) - a.psi) <= 1e-15);

  std::vector<double> norms;
  for (int s = 0; s < 1000; ++s) norms.push_back(sample_from_basis(V, 7, s).squaredNorm());
  double m = 0.0, v = 0.0;
  for (double x : norms) m += x;
  m /= norms.size();
  for (double x : norms) v += (x - m) * (x - m);
  const double se = std::sqrt(v / (norms.size() - 1) / norms.size());
  CHECK(std::abs(m - 1.0) <= 3.0 * se);

  CHECK_THROWS_AS(window_basis(sd, AngleInterval(sd.angles(0) + 1e-12, 1e-12)), InvalidArgument);
}

TEST_CASE("covariance matches P / dim") {
  const long n = 128;
  const auto& sd = sd_of(n);
  Matrix V = window_basis(sd, kWindow);
  const double dim = double(V.cols());
  Matrix P = spectral::projector(sd, kWindow).P;
  const long S = 10000;
  Matrix W = sample_many(V, 11, S);
  for (auto [x, y] : std::vector<std::pair<long, long>>{{0, 0}, {3, 17}, {40, 41}, {100, 7}, {64, 64}}) {
    cplx mean = 0.0;
    double m2 = 0.0;
    for (long s = 0; s < S; ++s) {
      const cplx z = W(x, s) * std::conj(W(y, s));
      mean += z;
      m2 += std::norm(z);
    }
    mean /= double(S);
    const double var = m2 / S - std::norm(mean);
    const double se = std::sqrt(var / S);
    CHECK(std::abs(mean - P(x, y) / dim) <= 5.0 * se);
  }
}

TEST_CASE("KS statistic") {
  CHECK(ks_half_normal({0.0}) == doctest::Approx(0.5));
  std::vector<double> big(2000, 10.0);
  CHECK(ks_half_normal(big) > 0.99);
  const auto& sd = sd_of(256);
  auto w = sample_wave(sd, kWindow, 1);
  auto k = value_statistics(w);
  CHECK(k.real >= 0.0);
  CHECK(k.real <= 1.0);
  KSPair rot = value_statistics(Vector(cplx(0, 1) * w.psi));
  CHECK(rot.real == doctest::Approx(k.imag).epsilon(1e-12));
  // single-mode wave, no assertion on the value
  Matrix v1 = sd.vectors.col(0);
  auto single = value_statistics(sample_from_basis(v1, 1, 0));
  CHECK(single.real <= 1.0);
}

TEST_CASE("sign changes") {
  const long n = 10;
  Vector alt(n), pos = Vector::Constant(n, 1.0), zeros(n);
  for (long x = 0; x < n; ++x) alt(x) = (x % 2 == 0) ? 1.0 : -1.0;
  CHECK(sign_changes(alt).real == n);
  CHECK(sign_changes(pos).real == 0);
  CHECK(sign_changes(pos).imag == 0);
  zeros << 1, 0, -1, 0, 0, 2, 2, -3, 0, 1;
  CHECK(sign_changes(zeros).real == 1);  // only 2 | -3; pairs touching a zero are not counted
  RealVector f(4);
  f << 1, -1, -2, 3;
  CHECK(sign_change_positions(f) == std::vector<long>{0, 2});
}

TEST_CASE("norms, sign changes and histogram at N = 1024") {
  const long n = 1024;
  const auto& sd = sd_of(n);
  Matrix V = window_basis(sd, kWindow);
  Matrix W = sample_many(V, 3, 200);
  double l2 = 0.0, l4 = 0.0, linf = 0.0, sc = 0.0;
  for (long s = 0; s < W.cols(); ++s) {
    auto lp = lp_norms(W.col(s), {2.0, 4.0, std::numeric_limits<double>::infinity()});
    l2 += lp[2.0];
    l4 += n * lp[4.0];
    linf += lp[std::numeric_limits<double>::infinity()];
    sc += sign_changes(W.col(s)).real;
  }
  l2 /= W.cols();
  l4 /= W.cols();
  linf /= W.cols();
  sc /= W.cols();
  CHECK(l2 >= 0.98);
  CHECK(l2 <= 1.02);
  CHECK(l4 >= 1.8);
  CHECK(l4 <= 2.2);
  CHECK(linf <= 3.0 * std::sqrt(std::log(double(n))) / std::sqrt(n * kWindow.length));
  CHECK(sc >= 0.45 * n);
  CHECK(sc <= 0.55 * n);
  auto h = sign_change_distribution(W);
  CHECK(h.real.size() == 16);
  CHECK(h.mass_real == doctest::Approx(2.0 * sc / n).epsilon(1e-12));
  for (double b : h.real) CHECK(std::abs(b - 1.0 / 16.0) <= 0.02);
  CHECK_THROWS_AS(sign_change_distribution(W.leftCols(10)), InvalidArgument);
  // splitting the seeds into two halves gives the same histogram within noise
  auto h1 = sign_change_distribution(W.leftCols(100));
  auto h2 = sign_change_distribution(W.rightCols(100));
  for (int b = 0; b < 16; ++b) CHECK(std::abs(h1.real[b] - h2.real[b]) <= 0.02);
}

TEST_CASE("gaussianity away from DA is not worse") {
  const long n = 1024;
  const auto& sd = sd_of(n);
  excl::ExclusionMask mask(excl::desk_params(TorusDim{n}));
  Matrix V = window_basis(sd, kWindow);
  Matrix W = sample_many(V, 9, 50);
  double ks_all = 0.0, ks_kept = 0.0;
  for (long s = 0; s < W.cols(); ++s) {
    std::vector<double> all, kept;
    for (long x = 0; x < n; ++x) {
      const double v = std::sqrt(double(n)) * W(x, s).real();
      all.push_back(v);
      if (!mask.in_DA(x)) kept.push_back(v);
    }
    ks_all += ks_half_normal(all) / W.cols();
    ks_kept += ks_half_normal(kept) / W.cols();
  }
  CHECK(ks_kept <= ks_all + 0.01);
}

TEST_CASE("autocorrelation") {
  const long n = 2048;
  const auto& sd = sd_of(n);
  const auto P = spectral::projector(sd, kWindow);
  const double dim = double(P.rank);
  auto same = autocorrelation(sd, kWindow, 500, 500, 2000, 5);
  const double pxx = P.P(500, 500).real();
  CHECK(same.m4_exact == doctest::Approx(2.0 * std::pow(pxx / dim, 2) * n * n).epsilon(1e-10));
  CHECK(std::abs(same.m2 - same.m2_exact) <= 5.0 * same.m2_se);
  CHECK(std::abs(same.m4 - same.m4_exact) <= 5.0 * same.m4_se);

  excl::ExclusionMask mask(excl::desk_params(TorusDim{n}));
  long x = 700, y = 1300;
  while (y < n && mask.in_Atilde(x, y)) ++y;
  REQUIRE(y < n);
  auto ac = autocorrelation(sd, kWindow, x, y, 4000, 6);
  CHECK(ac.cross >= 0.9);
  CHECK(ac.cross <= 1.1);
  CHECK(std::abs(ac.cross - ac.cross_exact) <= 5.0 * ac.cross_se);
  CHECK_THROWS_AS(autocorrelation(sd, kWindow, 0, 1, 10, 1), InvalidArgument);
}

TEST_CASE("matrix element concentration") {
  const auto& sd = sd_of(1024);
  auto c = matrix_element_concentration(sd, kWindow, torus::Observable::constant(2.0), 50, 3);
  Matrix V = window_basis(sd, kWindow);
  for (long s = 0; s < 50; ++s)
    CHECK(c.deviations[s] == doctest::Approx(2.0 * sample_from_basis(V, 3, s).squaredNorm() - 2.0).epsilon(1e-10));

  auto r2048 = matrix_element_concentration(sd_of(2048), kWindow, torus::Observable::cos_q(), 100, 4);
  CHECK(r2048.frac_within_band >= 0.95);
  auto r1024 = matrix_element_concentration(sd, kWindow, torus::Observable::cos_q(), 100, 4);
  CHECK(r2048.quantiles["q95"] - r2048.quantiles["q05"] < r1024.quantiles["q95"] - r1024.quantiles["q05"]);
}

TEST_CASE("wave statistics report") {
  const auto& sd = sd_of(256);
  auto a = wave_statistics(sd, kWindow, 24, 8);
  auto b = wave_statistics(sd, kWindow, 24, 8, 0.05, Exec::Serial);
  CHECK(a.ks_real_mean == b.ks_real_mean);
  CHECK(a.lp4_mean == b.lp4_mean);
  auto j = nlohmann::json::parse(wave_stats_json(a));
  for (const char* key : {"N", "interval", "dim_S", "seeds", "ks_real_mean", "ks_pass_frac", "sign_changes_mean", "lp",
                          "hist_sign_changes", "obs_deviation_quantiles"})
    CHECK(j.contains(key));
  CHECK(j["hist_sign_changes"].size() == 16);
  CHECK(j["lp"].contains("inf"));
}
