#pragma once

// Walsh quantization of the D-baker map on (C^D)^{(x)k}. Position index
// x = sum_m eps_m D^{k-m}, so tensor factor 1 is the most significant dit.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bakerlab/types.hpp"

namespace bakerlab::walsh {

struct WalshParams {
  long D = 2;
  int k = 1;
  int ell = 0;

  WalshParams() = default;
  WalshParams(long D_, int k_, int ell_);
  long dim() const;
  /// 2k for D = 2, 4k otherwise.
  long order() const { return D == 2 ? 2L * k : 4L * k; }
};

/// F_D with (F_D)_{ab} = D^{-1/2} exp(-2 pi i a b / D).
Matrix small_dft(long D);

/// eta_k(j) with the printed branches on [j]_{4k}.
long eta(long k, long j);

/// W = F_D^{(x)k} composed with dit reversal.
Vector walsh_transform_apply(const WalshParams& p, const Vector& v);
Matrix walsh_transform(const WalshParams& p);

/// (B^Wa)^j v through the closed power form; any integer j.
Vector walsh_baker_apply(const WalshParams& p, const Vector& v, long j);
Matrix walsh_baker_apply_columns(const WalshParams& p, const Matrix& X, long j, Exec ex = Exec::Parallel);
/// Dense B^Wa = W_k^{-1} blockdiag(W_{k-1}, ..., W_{k-1}) from Kronecker products.
Matrix walsh_baker_dense(const WalshParams& p);

/// Factored product state v_1 (x) ... (x) v_k.
using ProductState = std::vector<Vector>;
Vector expand(const ProductState& s);
cplx overlap(const ProductState& a, const ProductState& b);
ProductState baker_product(const WalshParams& p, ProductState s, long j);

/// Digits eps_1..eps_k of a basis index.
std::vector<long> digits(long index, long D, int k);

struct Rectangle {
  double q0 = 0.0, q1 = 1.0;
  double p0 = 0.0, p1 = 1.0;
};

/// |eps'.eps> for the basis index whose digits are eps_1..eps_k.
ProductState coherent_product(const WalshParams& p, long index);
Rectangle rectangle(const WalshParams& p, long index);

struct CoherentBasis {
  Matrix C;  // column c is |eps'.eps> for index c
  std::vector<Rectangle> rects;
};
CoherentBasis coherent_basis(const WalshParams& p);

/// Coefficients <eps'.eps|psi> of every column, via tensor factors.
Matrix coherent_coefficients(const WalshParams& p, const Matrix& X, Exec ex = Exec::Parallel);

/// Observable evaluated on rectangles; `f` is integrated with a 4 x 4
/// Gauss-Legendre rule per rectangle, exact for rectangle-constant f.
struct WalshObservable {
  std::string name;
  std::function<double(double, double)> f;
};
WalshObservable indicator_q_below(double c);
WalshObservable constant_observable(double c);
/// D^k int_{rect} a for each basis index.
RealVector rectangle_averages(const WalshParams& p, const WalshObservable& a);
Matrix walsh_op(const WalshParams& p, const WalshObservable& a);

struct CountResult {
  long D = 0;
  int k = 0, ell = 0;
  long j = 0, eta = 0;
  long diag_count = 0, diag_pred = 0;
  long total_count = 0, total_pred = 0;
  double max_mag_dev = 0.0;
  long plus_count = -1, minus_count = -1, neighbor_pred = -1;  // position basis only
  bool ok() const;
};
/// Predicted diagonal count, total count and neighbor count.
struct CountPrediction {
  long diag = 0, total = 0, neighbor = 0;
};
CountPrediction predicted_counts(long D, int k, long j);
/// Entry-by-entry count of nonzero <delta'.delta|(B^Wa)^j|eps'.eps> (threshold
/// 1e-8); neighbor counts use the position basis.
CountResult count_nonzero_entries(const WalshParams& p, long j, double threshold = 1e-8);
/// The same matrix C^dagger B^j C formed densely, for small D^k.
Matrix coherent_power_matrix(const WalshParams& p, long j);

/// Number of v in [0, D)^k with [alpha v_m + b]_D = v_{(m + s) mod k} for m in
/// the cyclic interval of length k - s starting at a0.
long linear_system_solutions(long D, int k, int s, int alpha, long b, int a0);

struct ProjectorFamily {
  long order = 0;
  std::vector<Matrix> P;
  double sum_defect = 0.0;     // |sum P - I|_max
  double orth_defect = 0.0;    // max |P_i P_j - delta_ij P_i|
  double eigen_defect = 0.0;   // max |B P_j - w^j P_j|
};
/// Dense family (1/order) sum_m w^{-jm} B^m, D^k <= 1024.
ProjectorFamily eigenprojectors(const WalshParams& p);

/// tr (B^Wa)^m for m in [0, order), from product-state overlaps.
std::vector<cplx> power_traces(const WalshParams& p);
/// Rounded traces of P_j; throws if a trace is off an integer by more than 1e-6.
std::vector<long> degeneracies(const WalshParams& p);
double degeneracy_ratio_deviation(const WalshParams& p);
/// (P_j)_{eps eps} in the coherent basis, for every index.
RealVector projector_diagonal(const WalshParams& p, long jj);

/// (order / D^k) sum_eps (P_j)_{eps eps} <eps|Op(a)|eps>.
double per_eigenspace_weyl(const WalshParams& p, const WalshObservable& a, long jj);

struct EigenBasis {
  Matrix U;
  std::vector<long> label;  // eigenspace index per column
};
/// Haar-random orthonormal basis of range(P_j) with seed substream j.
Matrix random_eigenspace_basis(const WalshParams& p, long jj, long rank, std::uint64_t seed);
EigenBasis random_eigenbasis(const WalshParams& p, std::uint64_t seed);

struct BasisStats {
  long n_vectors = 0;
  double ks_max = 0.0;          // over vectors and real / imaginary parts
  double ks_mean = 0.0;
  double ks_max_filtered = 0.0; // coordinates with |order P_ee - 1| <= 1/2
  std::vector<double> que_max_dev;  // per observable
  double sign_changes_mean = 0.0;   // real part, position basis
  double lp2_mean = 0.0;
  double lp4_mean = 0.0;            // N |psi|_4^4
  double lpinf_max = 0.0;
};
BasisStats eigenbasis_statistics(const EigenBasis& basis, const WalshParams& p,
                                 const std::vector<WalshObservable>& obs);
/// Same statistics, one eigenspace at a time, without storing the basis.
BasisStats random_eigenbasis_statistics(const WalshParams& p, std::uint64_t seed,
                                        const std::vector<WalshObservable>& obs);

std::string walsh_report_json(const WalshParams& p, const std::vector<long>& degeneracies, bool count_pass,
                              const std::string& count_detail, const BasisStats& stats);

}  // namespace bakerlab::walsh
