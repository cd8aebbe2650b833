#pragma once

// Seedable gaussian streams. Each (seed, stream) pair feeds SplitMix64 into a
// mt19937_64 state; uniforms take the top 53 bits, gaussians come from the
// polar-free Box-Muller pair, so samples are bitwise reproducible across
// platforms and thread counts.

#include <cstdint>
#include <random>

#include "bakerlab/types.hpp"

namespace bakerlab::rng {

std::uint64_t splitmix64(std::uint64_t& state);
/// Well-mixed 64-bit seed for substream `stream` of `seed`.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard real normal N(0, 1).
  double normal();
  /// Complex normal with E|g|^2 = 1 (real and imaginary parts iid N(0, 1/2)).
  cplx complex_normal();
  /// rows x cols matrix of iid complex normals, filled column-major.
  Matrix complex_normal_matrix(long rows, long cols);

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bakerlab::rng
