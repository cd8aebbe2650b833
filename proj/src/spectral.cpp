#include "bakerlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "bakerlab/kernels.hpp"

namespace bakerlab::spectral {

std::vector<long> window_indices(const bv::SpectralData& sd, const AngleInterval& I) {
  std::vector<long> idx;
  for (long j = 0; j < sd.dim(); ++j)
    if (I.contains(sd.angles(j))) idx.push_back(j);
  return idx;
}

long eigen_count(const bv::SpectralData& sd, const AngleInterval& I) {
  return static_cast<long>(window_indices(sd, I).size());
}

ProjectorMatrix projector(const bv::SpectralData& sd, const AngleInterval& I, Exec ex) {
  ProjectorMatrix pm;
  pm.window = I;
  auto idx = window_indices(sd, I);
  pm.rank = idx.size();
  std::vector<cplx> w(idx.size(), 1.0);
  pm.P = kernels::weighted_outer(sd.vectors, idx, w, ex);
  return pm;
}

cplx projector_entry(const bv::SpectralData& sd, const AngleInterval& I, long x, long y) {
  if (x < 0 || y < 0 || x >= sd.dim() || y >= sd.dim()) throw InvalidArgument("projector_entry: index out of range");
  cplx s = 0.0;
  for (long j : window_indices(sd, I)) s += sd.vectors(x, j) * std::conj(sd.vectors(y, j));
  return s;
}

ProjectorAxioms check_projector(const Matrix& P, long rank) {
  ProjectorAxioms a;
  a.hermitian_defect = max_abs(P - P.adjoint());
  a.idempotent_defect = max_abs(P * P - P);
  a.trace_defect = std::abs(P.trace() - cplx(static_cast<double>(rank)));
  return a;
}

Matrix q_operator(const bv::SpectralData& sd, const AngleInterval& I, const std::function<cplx(double)>& q) {
  auto idx = window_indices(sd, I);
  std::vector<cplx> w(idx.size());
  for (size_t s = 0; s < idx.size(); ++s) {
    w[s] = q(sd.angles(idx[s]));
    if (!std::isfinite(w[s].real()) || !std::isfinite(w[s].imag()))
      throw InvalidArgument("q_operator: q is not finite on the window");
  }
  return kernels::weighted_outer(sd.vectors, idx, w, Exec::Parallel);
}

// ---- Fourier route -----------------------------------------------------------

Matrix fourier_q_route(const bv::BVOperator& op, const AngleInterval& I, const std::function<cplx(double)>& q,
                       long J) {
  const double D = 0.5 * static_cast<double>(J);
  if (!(D >= kTwoPi)) throw InvalidArgument("fourier_q_route: need J/2 >= 2 pi, got J=" + std::to_string(J));
  auto sp = selberg::selberg_pair(I, D);
  const selberg::TrigPoly& g = sp.plus;
  const long h = g.L;

  long M = 64;
  while (M < 8 * J + 8) M *= 2;
  std::vector<cplx> qs(M);
  for (long m = 0; m < M; ++m) qs[m] = q(kTwoPi * static_cast<double>(m) / static_cast<double>(M));
  std::vector<cplx> qh(2 * h + 1);
  for (long k = -h; k <= h; ++k) {
    cplx s = 0.0;
    for (long m = 0; m < M; ++m) {
      double t = -kTwoPi * static_cast<double>(((k * m) % M + M) % M) / static_cast<double>(M);
      s += qs[m] * cplx(std::cos(t), std::sin(t));
    }
    qh[k + h] = s / static_cast<double>(M);
  }
  selberg::TrigPoly f;
  f.L = 2 * h;
  f.degree = static_cast<double>(f.L);
  f.c.assign(2 * f.L + 1, 0.0);
  for (long k = -h; k <= h; ++k)
    for (long l = -h; l <= h; ++l) f.c[k + l + f.L] += qh[k + h] * g.at(l);
  return selberg::functional_calculus(f, op);
}

FourierQResult fourier_q_compare(const bv::BVOperator& op, const bv::SpectralData& sd, const AngleInterval& I,
                                 const std::function<cplx(double)>& q, long J, const excl::ExclusionParams& params) {
  if (params.N != sd.dim()) throw InvalidArgument("fourier_q_compare: params.N differs from spectral data");
  FourierQResult r;
  r.J = J;
  r.Q = fourier_q_route(op, I, q, J);
  Matrix exact = q_operator(sd, I, q);
  excl::ExclusionMask mask(params);
  double sum = 0.0;
  long cnt = 0;
  for (long x = 0; x < sd.dim(); ++x) {
    double d = std::abs(r.Q(x, x) - exact(x, x));
    r.max_diag_dev_all = std::max(r.max_diag_dev_all, d);
    if (!mask.in_DA(x)) {
      r.max_diag_dev = std::max(r.max_diag_dev, d);
      sum += d;
      ++cnt;
    }
  }
  r.mean_diag_dev = cnt ? sum / cnt : 0.0;
  return r;
}

// ---- reports -------------------------------------------------------------------

SpectralReport projection_stats(const ProjectorMatrix& pm, const excl::ExclusionParams& params, double band) {
  const Matrix& P = pm.P;
  const long N = P.rows();
  if (params.N != N) throw InvalidArgument("projection_stats: params.N differs from projector size");
  excl::ExclusionMask mask(params);
  SpectralReport r;
  r.N = N;
  r.interval = pm.window;
  r.rank = pm.rank;
  r.band = band;
  r.diag_target = pm.window.length / kTwoPi;
  r.weyl_ratio = static_cast<double>(pm.rank) * kTwoPi / (static_cast<double>(N) * pm.window.length);
  r.rate_window = 1.0 / (pm.window.length * params.J);
  r.rate_rN = std::pow(static_cast<double>(N), -1.0 / 12.0) +
              std::exp(-0.5 * kPi * std::pow(static_cast<double>(N), 2.0 * params.epsN));
  r.count_DA = mask.count_DA();
  r.count_Atilde = mask.count_Atilde();

  std::vector<double> d;
  for (long x = 0; x < N; ++x)
    if (!mask.in_DA(x)) d.push_back(P(x, x).real());
  r.n_diag_used = d.size();
  r.diag_hist.assign(50, 0.0);
  if (!d.empty()) {
    r.diag_mean = std::accumulate(d.begin(), d.end(), 0.0) / d.size();
    std::vector<double> s = d;
    std::sort(s.begin(), s.end());
    r.diag_median = s.size() % 2 ? s[s.size() / 2] : 0.5 * (s[s.size() / 2 - 1] + s[s.size() / 2]);
    long in = 0;
    for (double v : d) in += std::abs(v - r.diag_target) <= band ? 1 : 0;
    r.frac_within_band = static_cast<double>(in) / d.size();
    const double hi = 2.0 * r.diag_target;
    for (double v : d) {
      long b = hi > 0 ? static_cast<long>(std::floor(v / hi * 50.0)) : 0;
      b = std::clamp(b, 0L, 49L);
      r.diag_hist[b] += 1.0 / d.size();
    }
  }

  double out_max = 0.0, in_max = 0.0;
#pragma omp parallel for reduction(max : out_max, in_max) schedule(static)
  for (long x = 0; x < N; ++x)
    for (long y = 0; y < N; ++y) {
      if (x == y) continue;
      double v = std::abs(P(x, y));
      if (mask.in_Atilde(x, y))
        in_max = std::max(in_max, v);
      else
        out_max = std::max(out_max, v);
    }
  r.offdiag_max_outside = out_max;
  r.offdiag_max_inside = in_max;
  return r;
}

std::string report_json(const SpectralReport& r) {
  nlohmann::ordered_json j;
  j["N"] = r.N;
  j["interval"] = {{"start", r.interval.start}, {"length", r.interval.length}};
  j["rank"] = r.rank;
  j["diag_mean"] = r.diag_mean;
  j["diag_median"] = r.diag_median;
  j["diag_target"] = r.diag_target;
  j["frac_within_band"] = r.frac_within_band;
  j["band"] = r.band;
  j["n_diag_used"] = r.n_diag_used;
  j["offdiag_max_outside"] = r.offdiag_max_outside;
  j["offdiag_max_inside"] = r.offdiag_max_inside;
  j["weyl_ratio"] = r.weyl_ratio;
  j["rates"] = {{"inv_len_J", r.rate_window}, {"rN", r.rate_rN}, {"heuristic", true}};
  j["count_DA"] = r.count_DA;
  j["count_Atilde"] = r.count_Atilde;
  j["diag_hist"] = r.diag_hist;
  return j.dump(2);
}

void write_heatmap_csv(const std::string& path, const Matrix& A) {
  std::ofstream os(path);
  if (!os) throw InvalidArgument("write_heatmap_csv: cannot open " + path);
  os << "x,y,abs\n";
  char buf[64];
  for (long x = 0; x < A.rows(); ++x)
    for (long y = 0; y < A.cols(); ++y) {
      std::snprintf(buf, sizeof buf, "%ld,%ld,%.10e\n", x, y, std::abs(A(x, y)));
      os << buf;
    }
}

// ---- windowed averages -----------------------------------------------------------

namespace {

std::vector<cplx> window_matrix_elements(const bv::SpectralData& sd, const AngleInterval& I,
                                         const torus::Observable& f) {
  auto idx = window_indices(sd, I);
  if (idx.empty()) throw InvalidArgument("window contains no eigenangles");
  Matrix V(sd.dim(), idx.size());
  for (size_t s = 0; s < idx.size(); ++s) V.col(s) = sd.vectors.col(idx[s]);
  Matrix OV = torus::weyl_apply_columns(f, V);
  std::vector<cplx> me(idx.size());
  for (size_t s = 0; s < idx.size(); ++s) me[s] = V.col(s).dot(OV.col(s));
  return me;
}

}  // namespace

cplx windowed_weyl_sum(const bv::SpectralData& sd, const AngleInterval& I, const torus::Observable& f) {
  auto me = window_matrix_elements(sd, I, f);
  cplx s = 0.0;
  for (auto v : me) s += v;
  return s * kTwoPi / (static_cast<double>(sd.dim()) * I.length);
}

double quantum_variance(const bv::SpectralData& sd, const AngleInterval& I, const torus::Observable& a) {
  if (!a.declared_real()) throw InvalidArgument("quantum_variance: observable must be declared real");
  auto me = window_matrix_elements(sd, I, a);
  const cplx mean = a.mean();
  double s = 0.0;
  for (auto v : me) s += std::norm(v - mean);
  return s * kTwoPi / (static_cast<double>(sd.dim()) * I.length);
}

// ---- defects ---------------------------------------------------------------------

double coherent_evolution_defect(const torus::CoherentParams& c, long k, TorusDim n, double delta, double gamma) {
  if (k < 0) throw InvalidArgument("coherent_evolution_defect: k must be nonnegative");
  if (k == 0) return 0.0;
  const double N = static_cast<double>(n.value());
  if (!excl::in_good_region(c.center, static_cast<double>(k), delta, gamma))
    throw InvalidArgument("coherent_evolution_defect: center outside the good region");
  if (std::ldexp(1.0, static_cast<int>(k)) > std::sqrt(N * c.sigma))
    throw InvalidArgument("coherent_evolution_defect: need 2^k <= sqrt(N sigma)");
  bv::BVOperator op(n);
  Vector psi = torus::normalized(torus::coherent_state(c, n));
  Vector ev = op.apply(psi, k);
  double theta = torus::theta_phase(c.center, k, delta);
  // e^{i N pi Theta}; reduce N Theta modulo 2 first
  double ph = kPi * std::fmod(N * theta, 2.0);
  torus::CoherentParams img{torus::classical_baker(c.center, k), c.sigma / std::ldexp(1.0, 2 * static_cast<int>(k))};
  Vector target = cplx(std::cos(ph), std::sin(ph)) * torus::normalized(torus::coherent_state(img, n));
  return (ev - target).norm();
}

double operator_norm(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Matrix a = A;
  const lapack_int m = a.rows(), nn = a.cols();
  std::vector<double> s(std::min(m, nn));
  lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, nn, a.data(), m, s.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw NumericalFailure("operator_norm: zgesdd failed, info=" + std::to_string(info));
  return s.front();
}

double egorov_defect(const torus::Observable& a, long t, TorusDim n, double delta, double gamma, long grid,
                     long cutoff, double support_tol) {
  if (a.terms().empty()) return 0.0;
  // support check on the sampling grid
  Matrix vals = torus::evaluate_on_grid(a, grid);
  const double amax = vals.cwiseAbs().maxCoeff();
  for (long i = 0; i < grid; ++i)
    for (long j = 0; j < grid; ++j) {
      if (std::abs(vals(i, j)) <= support_tol * amax) continue;
      torus::TorusPoint x(static_cast<double>(i) / grid, static_cast<double>(j) / grid);
      if (!excl::in_good_region(x, static_cast<double>(t), delta, gamma)) {
        std::ostringstream os;
        os << "egorov_defect: observable not supported in the good region (value " << std::abs(vals(i, j))
           << " at q=" << x.q << ", p=" << x.p << ")";
        throw InvalidArgument(os.str());
      }
    }
  bv::BVOperator op(n);
  Matrix A = torus::weyl_quantize(a, n);
  Matrix T1 = A.adjoint();
  op.apply_columns(T1, t);           // B^t A^dagger
  Matrix Y = T1.adjoint();           // A B^{-t}
  op.apply_columns(Y, t);            // B^t A B^{-t}
  torus::Observable comp = torus::compose_inverse_baker(a, t, grid, cutoff);
  Y -= torus::weyl_quantize(comp, n);
  return operator_norm(Y);
}

}  // namespace bakerlab::spectral
