#include "bakerlab/exclusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace bakerlab::excl {

namespace {

long mod(long a, long n) {
  long r = a % n;
  return r < 0 ? r + n : r;
}

long pow2_mod(long k, long n) {
  unsigned __int128 r = 1 % n, b = 2 % n;
  long e = k;
  while (e > 0) {
    if (e & 1) r = (r * b) % n;
    b = (b * b) % n;
    e >>= 1;
  }
  return static_cast<long>(r);
}

long cyclic_dist(long a, long b, long n) {
  long d = mod(a - b, n);
  return std::min(d, n - d);
}

// distance from u to the lattice h Z
double lattice_dist(double u, double h) { return std::abs(u - h * std::round(u / h)); }

double below_half() { return std::nextafter(0.5, 0.0); }

}  // namespace

EpsRule parse_eps_rule(const std::string& s) {
  if (s == "power_half") return EpsRule::PowerHalf;
  if (s == "log_reciprocal") return EpsRule::LogReciprocal;
  if (s == "custom") return EpsRule::Custom;
  throw InvalidArgument("unknown eps rule '" + s + "' (expected power_half, log_reciprocal or custom)");
}

std::string to_string(EpsRule r) {
  switch (r) {
    case EpsRule::PowerHalf: return "power_half";
    case EpsRule::LogReciprocal: return "log_reciprocal";
    case EpsRule::Custom: return "custom";
  }
  return "?";
}

int ExclusionParams::J_steps() const { return static_cast<int>(std::ceil(J - 1e-12)); }

ExclusionParams param_schedule(TorusDim n, double interval_len, EpsRule rule, double custom) {
  if (!(interval_len > 0.0)) throw InvalidArgument("param_schedule: interval length must be positive");
  const double N = static_cast<double>(n.value());
  const double lnN = std::log(N);
  const double log2N = std::log2(N);
  ExclusionParams p;
  p.N = n;
  if (interval_len * lnN <= 1.0)
    p.warnings.push_back("|I| ln N <= 1: asymptotic regime not entered");
  switch (rule) {
    case EpsRule::PowerHalf:
      p.epsN = 1.0 / std::sqrt(interval_len * lnN);
      break;
    case EpsRule::LogReciprocal:
      p.epsN = 1.0 / std::log(interval_len * lnN);
      break;
    case EpsRule::Custom:
      p.epsN = custom;
      break;
  }
  if (!(p.epsN > 0.0) || !std::isfinite(p.epsN)) {
    p.warnings.push_back("eps(N) not in (0,1]; clipped to the smallest positive value");
    p.epsN = std::numeric_limits<double>::min();
  }
  if (p.epsN > 1.0) {
    p.warnings.push_back("eps(N) > 1; clipped to 1");
    p.epsN = 1.0;
  }
  p.J = log2N * p.epsN;
  p.delta = 10.0 * std::sqrt(log2N / N);
  p.gamma = std::pow(N, -1.0 / 3.0);
  p.W = std::pow(N, 0.5 + 2.0 * p.epsN);
  if (p.delta >= 0.5) {
    std::ostringstream os;
    os << "delta = " << p.delta << " >= 1/2; clipped below 1/2";
    p.warnings.push_back(os.str());
    p.delta = below_half();
  }
  if (p.gamma >= 0.5) {
    p.warnings.push_back("gamma >= 1/2; clipped below 1/2");
    p.gamma = below_half();
  }
  if (p.W >= N / 2.0) p.warnings.push_back("W >= N/2: every pair lies in the classical sets");
  return p;
}

ExclusionParams make_params(TorusDim n, double J, double delta, double gamma, double W) {
  if (!(J > 0.0)) throw InvalidArgument("make_params: J must be positive");
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidArgument("make_params: delta must lie in (0, 1/2)");
  if (!(gamma > 0.0 && gamma < 0.5)) throw InvalidArgument("make_params: gamma must lie in (0, 1/2)");
  if (!(W > 0.0)) throw InvalidArgument("make_params: W must be positive");
  ExclusionParams p;
  p.N = n;
  p.J = J;
  p.delta = delta;
  p.gamma = gamma;
  p.W = W;
  p.epsN = J / std::log2(static_cast<double>(n.value()));
  return p;
}

bool in_discontinuity_set(CoordPair c, const ExclusionParams& p) {
  const double N = static_cast<double>(p.N);
  const double u = static_cast<double>(c.x) / N;
  if (u <= p.gamma || u >= 1.0 - p.gamma) return true;
  return lattice_dist(static_cast<double>(c.y) / N, std::exp2(-p.J)) <= p.delta;
}

bool in_classical_set(CoordPair c, long k, double W, TorusDim n) {
  const long N = n;
  long img = static_cast<long>((static_cast<unsigned __int128>(pow2_mod(k, N)) * mod(c.y, N)) % N);
  return static_cast<double>(cyclic_dist(c.x, img, N)) <= W;
}

bool excluded(CoordPair c, const ExclusionParams& p, bool symmetrized) {
  auto inA = [&](CoordPair d) {
    if (in_discontinuity_set(d, p)) return true;
    for (int k = 1; k <= p.J_steps(); ++k)
      if (in_classical_set(d, k, p.W, TorusDim(p.N))) return true;
    return false;
  };
  if (inA(c)) return true;
  if (!symmetrized) return false;
  return inA({c.y, c.x}) || inA({c.x, c.x}) || inA({c.y, c.y});
}

std::vector<long> diag_exclusions(const ExclusionParams& p) {
  std::vector<long> out;
  for (long x = 0; x < p.N; ++x)
    if (excluded({x, x}, p, false)) out.push_back(x);
  return out;
}

bool in_good_region(torus::TorusPoint x, double J, double delta, double gamma) {
  if (!(x.p > gamma && x.p < 1.0 - gamma)) return false;
  return lattice_dist(x.q, std::exp2(-J)) > delta;
}

// ---- masks -------------------------------------------------------------------

ExclusionMask::ExclusionMask(const ExclusionParams& p, Exec ex) : n_(p.N), a_(p.N * p.N, 0), da_(p.N, 0) {
  const long N = n_;
  const int steps = p.J_steps();
  std::vector<long> mult(steps + 1);
  for (int k = 1; k <= steps; ++k) mult[k] = pow2_mod(k, N);
  const long wfloor = static_cast<long>(std::floor(p.W));
  auto row = [&](long x) {
    std::uint8_t* r = &a_[x * N];
    for (long y = 0; y < N; ++y) r[y] = in_discontinuity_set({x, y}, p) ? 1 : 0;
    // C_k: x within W of 2^k y, i.e. y in the preimages of a window around x
    for (int k = 1; k <= steps; ++k)
      for (long y = 0; y < N; ++y) {
        if (r[y]) continue;
        long img = static_cast<long>((static_cast<unsigned __int128>(mult[k]) * y) % N);
        if (cyclic_dist(x, img, N) <= wfloor) r[y] = 1;
      }
  };
  if (ex == Exec::Serial) {
    for (long x = 0; x < N; ++x) row(x);
  } else {
#pragma omp parallel for schedule(static)
    for (long x = 0; x < N; ++x) row(x);
  }
  for (long x = 0; x < N; ++x) da_[x] = a_[x * N + x];
}

long ExclusionMask::count_A() const { return std::count(a_.begin(), a_.end(), 1); }
long ExclusionMask::count_DA() const { return std::count(da_.begin(), da_.end(), 1); }
long ExclusionMask::count_Atilde() const {
  long c = 0;
  for (long x = 0; x < n_; ++x)
    for (long y = 0; y < n_; ++y) c += in_Atilde(x, y) ? 1 : 0;
  return c;
}

double bound_B(const ExclusionParams& p) {
  const double N = static_cast<double>(p.N);
  return kBoundConstant * (std::exp2(p.J) * p.delta * N * N + p.gamma * N * N);
}

double bound_DA(const ExclusionParams& p) {
  const double N = static_cast<double>(p.N);
  const double tJ = std::exp2(p.J);
  return kBoundConstant * (p.gamma * N + tJ * p.delta * N + tJ * p.W);
}

std::string params_json(const ExclusionParams& p) {
  nlohmann::ordered_json j;
  j["N"] = p.N;
  j["J"] = p.J;
  j["J_steps"] = p.J_steps();
  j["delta"] = p.delta;
  j["gamma"] = p.gamma;
  j["W"] = p.W;
  j["epsN"] = p.epsN;
  j["warnings"] = p.warnings;
  return j.dump(2);
}

void write_exclusion_dump(const std::string& prefix, const ExclusionParams& p, bool symmetrized) {
  ExclusionMask m(p);
  std::ofstream pairs(prefix + "_pairs.csv");
  std::ofstream diag(prefix + "_diag.csv");
  std::ofstream side(prefix + "_params.json");
  if (!pairs || !diag || !side) throw InvalidArgument("write_exclusion_dump: cannot open output for " + prefix);
  pairs << "x,y\n";
  for (long x = 0; x < m.dim(); ++x)
    for (long y = 0; y < m.dim(); ++y)
      if (symmetrized ? m.in_Atilde(x, y) : m.in_A(x, y)) pairs << x << ',' << y << '\n';
  diag << "x\n";
  for (long x = 0; x < m.dim(); ++x)
    if (m.in_DA(x)) diag << x << '\n';
  side << params_json(p) << '\n';
}

}  // namespace bakerlab::excl
