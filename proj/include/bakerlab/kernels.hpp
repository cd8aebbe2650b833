#pragma once

// Hot loops with an OpenMP path and a plain serial reference. The serial
// versions are deliberately naive and exist for cross-checks and the
// benchmark target.

#include <utility>
#include <vector>

#include "bakerlab/torus.hpp"
#include "bakerlab/types.hpp"

namespace bakerlab::kernels {

/// Dense sum_k c(k) T(k). Parallel path fills column by column; serial path
/// accumulates whole translation matrices.
Matrix weyl_fill(const std::vector<std::pair<torus::PhaseIndex, cplx>>& terms, TorusDim n, Exec ex);

/// sum_j w_j u_j u_j^dagger over the selected columns of U.
Matrix weighted_outer(const Matrix& U, const std::vector<long>& cols, const std::vector<cplx>& w, Exec ex);

/// Applies the D x D matrix G to tensor factor `pos` (0 = most significant
/// dit) of every column of X, where X has D^k rows.
void apply_dit_factor(Matrix& X, long D, int k, int pos, const Matrix& G, Exec ex);

/// out = B^Wa X for X with D^k rows: Fa (= F_D^dagger) on the leading dit,
/// then the cyclic shift moving that dit to the end.
void walsh_step(const Matrix& X, Matrix& out, long D, const Matrix& Fa, Exec ex);

}  // namespace bakerlab::kernels
