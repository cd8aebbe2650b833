#pragma once

// Coordinate sets avoided near the discontinuities and near the classical
// graph of the doubling map, the good phase-space region, and the parameter
// schedule (J, delta, gamma, W) as a function of N.

#include <cstdint>
#include <string>
#include <vector>

#include "bakerlab/torus.hpp"
#include "bakerlab/types.hpp"

namespace bakerlab::excl {

enum class EpsRule { PowerHalf, LogReciprocal, Custom };

EpsRule parse_eps_rule(const std::string& s);
std::string to_string(EpsRule r);

struct ExclusionParams {
  double J = 1.0;
  double delta = 0.1;
  double gamma = 0.1;
  double W = 1.0;
  double epsN = 1.0;
  long N = 2;
  std::vector<std::string> warnings;

  /// Integer time used in loop bounds (ceiling).
  int J_steps() const;
};

ExclusionParams param_schedule(TorusDim n, double interval_len, EpsRule rule, double custom = 0.0);
/// Explicit parameters (for desk-scale presets), validated and recorded.
ExclusionParams make_params(TorusDim n, double J, double delta, double gamma, double W);

/// Desk preset for the N = 1000, [2.1, 3.0) projection heatmap, frozen after
/// one oracle run.
struct DeskPreset {
  double J, delta, gamma, W;
};
inline constexpr DeskPreset kDeskPreset{3.0, 0.01, 0.02, 8.0};
inline ExclusionParams desk_params(TorusDim n, const DeskPreset& d = kDeskPreset) {
  return make_params(n, d.J, d.delta, d.gamma, d.W);
}

struct CoordPair {
  long x = 0;
  long y = 0;
};

/// |y/N - k/2^J| <= delta for some k, or x/N <= gamma, or x/N >= 1 - gamma.
bool in_discontinuity_set(CoordPair c, const ExclusionParams& p);
/// d_{Z/NZ}(x, 2^k y) <= W.
bool in_classical_set(CoordPair c, long k, double W, TorusDim n);
/// Membership in A = B u C_1 u ... u C_J, or in its symmetrization.
bool excluded(CoordPair c, const ExclusionParams& p, bool symmetrized);
/// DA = {x : (x, x) in A}, sorted.
std::vector<long> diag_exclusions(const ExclusionParams& p);
/// |q - l/2^J| > delta for all l, and gamma < p < 1 - gamma.
bool in_good_region(torus::TorusPoint x, double J, double delta, double gamma);

/// Precomputed membership tables for A, A~ and DA over all N^2 pairs.
class ExclusionMask {
 public:
  ExclusionMask(const ExclusionParams& p, Exec ex = Exec::Parallel);
  long dim() const { return n_; }
  bool in_A(long x, long y) const { return a_[x * n_ + y] != 0; }
  bool in_DA(long x) const { return da_[x] != 0; }
  bool in_Atilde(long x, long y) const { return in_A(x, y) || in_A(y, x) || in_DA(x) || in_DA(y); }
  long count_A() const;
  long count_Atilde() const;
  long count_DA() const;

 private:
  long n_;
  std::vector<std::uint8_t> a_;
  std::vector<std::uint8_t> da_;
};

/// Cardinality bounds with the calibration constant C = 4.
inline constexpr double kBoundConstant = 4.0;
double bound_B(const ExclusionParams& p);
double bound_DA(const ExclusionParams& p);

/// CSV dumps ("x,y" rows / "x" rows) plus a JSON sidecar with the parameters.
void write_exclusion_dump(const std::string& prefix, const ExclusionParams& p, bool symmetrized);
std::string params_json(const ExclusionParams& p);

}  // namespace bakerlab::excl
