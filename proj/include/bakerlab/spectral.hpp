#pragma once

// Spectral projectors of the quantized baker map and the quantities built on
// them: windowed spectral functions, eigenvalue counts, windowed local Weyl
// sums, quantum variance, and coherent-state / Egorov defects.

#include <functional>
#include <string>
#include <vector>

#include "bakerlab/baker_bv.hpp"
#include "bakerlab/exclusion.hpp"
#include "bakerlab/selberg.hpp"
#include "bakerlab/torus.hpp"

namespace bakerlab::spectral {

using selberg::AngleInterval;

struct ProjectorMatrix {
  Matrix P;
  AngleInterval window;
  long rank = 0;
};

struct ProjectorAxioms {
  double hermitian_defect = 0.0;
  double idempotent_defect = 0.0;
  double trace_defect = 0.0;  // |trace P - rank|
  bool ok(double tol = 1e-8, double trace_tol = 1e-6) const {
    return hermitian_defect <= tol && idempotent_defect <= tol && trace_defect <= trace_tol;
  }
};

/// Indices j with angles(j) in I.
std::vector<long> window_indices(const bv::SpectralData& sd, const AngleInterval& I);
long eigen_count(const bv::SpectralData& sd, const AngleInterval& I);

ProjectorMatrix projector(const bv::SpectralData& sd, const AngleInterval& I, Exec ex = Exec::Parallel);
/// Single entry (P_I)_{xy} without forming P.
cplx projector_entry(const bv::SpectralData& sd, const AngleInterval& I, long x, long y);
ProjectorAxioms check_projector(const Matrix& P, long rank);

/// sum_{theta_j in I} q(theta_j) |v_j><v_j|.
Matrix q_operator(const bv::SpectralData& sd, const AngleInterval& I, const std::function<cplx(double)>& q);

struct FourierQResult {
  Matrix Q;
  long J = 0;
  double max_diag_dev = 0.0;       // against the exact operator, over x not in DA
  double max_diag_dev_all = 0.0;   // over all x
  double mean_diag_dev = 0.0;
};

/// (q_{J/2} G+_{I,J/2})(B) from B powers up to J, where q_{J/2} is the Fourier
/// partial sum of q. Requires J/2 >= 2 pi.
Matrix fourier_q_route(const bv::BVOperator& op, const AngleInterval& I, const std::function<cplx(double)>& q, long J);
FourierQResult fourier_q_compare(const bv::BVOperator& op, const bv::SpectralData& sd, const AngleInterval& I,
                                 const std::function<cplx(double)>& q, long J, const excl::ExclusionParams& params);

struct SpectralReport {
  long N = 0;
  AngleInterval interval;
  long rank = 0;
  double diag_target = 0.0;
  double diag_mean = 0.0;
  double diag_median = 0.0;
  double band = 0.05;
  double frac_within_band = 0.0;
  long n_diag_used = 0;          // x not in DA
  double offdiag_max_outside = 0.0;  // over (x, y) not in A~, x != y
  double offdiag_max_inside = 0.0;   // over A~ minus the diagonal
  double weyl_ratio = 0.0;       // rank 2 pi / (N |I|)
  double rate_window = 0.0;      // 1 / (|I| J), heuristic
  double rate_rN = 0.0;          // N^{-1/12} + exp(-pi/2 N^{2 eps}), heuristic
  long count_DA = 0;
  long count_Atilde = 0;
  std::vector<double> diag_hist;  // 50 bins on [0, 2 * target]
};

SpectralReport projection_stats(const ProjectorMatrix& P, const excl::ExclusionParams& params, double band = 0.05);
std::string report_json(const SpectralReport& r);
void write_heatmap_csv(const std::string& path, const Matrix& A);

/// (2 pi / (N |I|)) sum_{theta_j in I} <v_j|Op(f)|v_j>.
cplx windowed_weyl_sum(const bv::SpectralData& sd, const AngleInterval& I, const torus::Observable& f);
/// (2 pi / (N |I|)) sum_{theta_j in I} |<v_j|Op(a)|v_j> - int a|^2.
double quantum_variance(const bv::SpectralData& sd, const AngleInterval& I, const torus::Observable& a);

/// |B^k Psi_{x,sigma} - e^{i N pi Theta_k(x)} Psi_{B^k x, sigma/4^k}|.
double coherent_evolution_defect(const torus::CoherentParams& c, long k, TorusDim n, double delta, double gamma);

/// Largest singular value.
double operator_norm(const Matrix& A);

/// |B^t Op(a) B^{-t} - Op(a o B^{-t})|_2, with a o B^{-t} by grid composition.
double egorov_defect(const torus::Observable& a, long t, TorusDim n, double delta, double gamma, long grid = 512,
                     long cutoff = 64, double support_tol = 1e-3);

}  // namespace bakerlab::spectral
