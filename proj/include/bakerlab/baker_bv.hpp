#pragma once

// Balazs-Voros quantized baker map B_N = F_N^{-1} diag(F_{N/2}, F_{N/2}),
// applied through FFTs, plus its full spectral decomposition.

#include <memory>
#include <string>

#include "bakerlab/types.hpp"

namespace bakerlab::bv {

class BVOperator {
 public:
  /// Requires N even.
  explicit BVOperator(TorusDim n);

  long dim() const { return n_; }
  /// B^power v by |power| factorized steps (adjoint steps when power < 0).
  Vector apply(const Vector& v, long power) const;
  /// In-place B^power on every column of X.
  void apply_columns(Matrix& X, long power, Exec ex = Exec::Parallel) const;
  /// Dense B_N assembled from the factorized action on unit vectors.
  Matrix materialize() const;

 private:
  struct Plans;
  long n_;
  std::shared_ptr<const Plans> plans_;
};

BVOperator build_bv(TorusDim n);
/// Independent dense route: F_N^dagger * blockdiag(F_{N/2}, F_{N/2}) from build_dft.
Matrix dense_bv_reference(TorusDim n);

Vector apply_bv(const BVOperator& op, const Vector& v, long power);
/// Dense B^k assembled column by column.
Matrix power_matrix(const BVOperator& op, long k);

/// Conjugation F_N A F_N^{-1}.
Matrix to_momentum_basis(const Matrix& a);

struct SpectralData {
  RealVector angles;      // sorted, in [0, 2 pi)
  Matrix vectors;         // column j pairs with angles(j)
  double max_residual = 0.0;
  double orth_defect = 0.0;
  double min_gap = 0.0;   // smallest cyclic gap between consecutive angles

  long dim() const { return angles.size(); }
};

/// Schur factorization of a unitary matrix. Angles within 1e-8 of each other
/// (cyclically) are re-orthonormalized by modified Gram-Schmidt; throws
/// NumericalFailure if some residual |U v - e^{i theta} v| exceeds tol.
/// Schur runs zgees on U. HermitianSplit runs zheevr on (U + U^dagger)/2 and
/// splits nearly equal cosines with the compressed U.
enum class DecompMethod { Schur, HermitianSplit };

SpectralData spectral_decompose_unitary(const Matrix& u, double tol = 1e-8,
                                        DecompMethod method = DecompMethod::Schur);
SpectralData spectral_decompose(const BVOperator& op, double tol = 1e-8,
                                DecompMethod method = DecompMethod::HermitianSplit);

/// Binary dump: "BVSD", uint32 version, uint64 N, N float64 angles, N^2
/// interleaved (re, im) float64 column-major eigenvector entries.
void write_spectral_dump(const std::string& path, const SpectralData& sd);
SpectralData read_spectral_dump(const std::string& path);

}  // namespace bakerlab::bv
