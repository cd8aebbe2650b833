// Experiment driver. Every subcommand validates its flags, runs one module
// pipeline and writes a JSON (or flat CSV) report with a metadata block.

#include <CLI11.hpp>
#include <omp.h>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "bakerlab/baker_bv.hpp"
#include "bakerlab/exclusion.hpp"
#include "bakerlab/io.hpp"
#include "bakerlab/random_waves.hpp"
#include "bakerlab/spectral.hpp"
#include "bakerlab/walsh.hpp"

using namespace bakerlab;
using io::Json;

namespace {

enum Exit { kOk = 0, kConfig = 2, kCheck = 3, kNumerical = 4 };

struct RunConfig {
  std::string subcommand;
  std::vector<long> n;
  long D = 2;
  int k = 5;
  int ell = -1;
  int k_min = 8;
  int k_max = 13;
  int power_k_max = 3;
  double start = 2.1;
  double len = 0.9;
  std::uint64_t seed = 1;
  long samples = 50;
  std::string out = "-";
  std::string format = "json";
  int threads = 0;
  std::string eps_rule = "power_half";
  std::string exclusion = "desk";
  double band = 0.05;
  double W = 2.0;
  bool stats = true;
  bool check = false;
};

Json config_json(const RunConfig& c) {
  Json j;
  j["subcommand"] = c.subcommand;
  j["n"] = c.n;
  j["D"] = c.D;
  j["k"] = c.k;
  j["ell"] = c.ell;
  j["k_min"] = c.k_min;
  j["k_max"] = c.subcommand == "powers" ? c.power_k_max : c.k_max;
  j["start"] = c.start;
  j["len"] = c.len;
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  j["out"] = c.out;
  j["format"] = c.format;
  j["threads"] = c.threads;
  j["eps_rule"] = c.eps_rule;
  j["exclusion"] = c.exclusion;
  j["band"] = c.band;
  j["W"] = c.W;
  j["stats"] = c.stats;
  j["check"] = c.check;
  return j;
}

void emit(const RunConfig& c, const Json& body, const io::RunClock& clock, const std::string& path) {
  Json doc = io::with_metadata(body, config_json(c), c.seed, clock);
  io::write_text(path, c.format == "csv" ? io::flatten_csv(doc) : doc.dump(2) + "\n");
}

std::string report_path(const RunConfig& c, const std::string& suffix) {
  if (c.out == "-" || c.out.empty()) return "-";
  return c.out + suffix;
}

long single_n(const RunConfig& c) {
  if (c.n.size() != 1) throw InvalidArgument("--n takes exactly one value for '" + c.subcommand + "'");
  return c.n[0];
}

void require_even(long n) {
  if (n < 2 || n % 2 != 0) throw InvalidArgument("--n must be an even integer >= 2, got " + std::to_string(n));
}

selberg::AngleInterval window(const RunConfig& c) {
  if (!(c.len > 0.0) || c.len > kTwoPi) throw InvalidArgument("--len must lie in (0, 2 pi]");
  return selberg::AngleInterval(c.start, c.len);
}

Json interval_json(const selberg::AngleInterval& I) { return {{"start", I.start}, {"length", I.length}}; }

excl::ExclusionParams exclusion_params(const RunConfig& c, long n) {
  if (c.exclusion == "desk") return excl::desk_params(TorusDim(n));
  if (c.exclusion == "schedule") return excl::param_schedule(TorusDim(n), c.len, excl::parse_eps_rule(c.eps_rule));
  throw InvalidArgument("--exclusion must be 'desk' or 'schedule'");
}

int cmd_powers(const RunConfig& c, const io::RunClock& clock) {
  const long n = single_n(c);
  require_even(n);
  if (c.power_k_max < 1) throw InvalidArgument("--k-max must be >= 1");
  if (c.out == "-" || c.out.empty()) throw InvalidArgument("powers writes several files; give --out PREFIX");
  bv::BVOperator op(TorusDim{n});
  Json per_k = Json::array();
  bool ok = true;
  for (int k = 1; k <= c.power_k_max; ++k) {
    Matrix Bk = bv::power_matrix(op, k);
    const std::string csv = c.out + "_k" + std::to_string(k) + ".csv";
    spectral::write_heatmap_csv(csv, Bk);
    double on_max = 0.0, off_max = 0.0, on_sum = 0.0, off_sum = 0.0;
    long on_n = 0;
    for (long x = 0; x < n; ++x)
      for (long y = 0; y < n; ++y) {
        const double a = std::abs(Bk(x, y));
        if (excl::in_classical_set({x, y}, k, c.W, TorusDim{n})) {
          on_max = std::max(on_max, a);
          on_sum += a;
          ++on_n;
        } else {
          off_max = std::max(off_max, a);
          off_sum += a;
        }
      }
    const long off_n = n * n - on_n;
    ok = ok && off_max < on_max;
    per_k.push_back({{"k", k},
                     {"csv", csv},
                     {"on_count", on_n},
                     {"on_max", on_max},
                     {"on_mean", on_n ? on_sum / on_n : 0.0},
                     {"off_count", off_n},
                     {"off_max", off_max},
                     {"off_mean", off_n ? off_sum / off_n : 0.0}});
  }
  Json body{{"N", n}, {"W", c.W}, {"powers", per_k}, {"check", ok ? "pass" : "fail"}};
  emit(c, body, clock, c.out + (c.format == "csv" ? "_summary.csv" : ".json"));
  return (c.check && !ok) ? kCheck : kOk;
}

int cmd_projection(const RunConfig& c, const io::RunClock& clock) {
  const long n = single_n(c);
  require_even(n);
  auto I = window(c);
  auto params = exclusion_params(c, n);
  auto sd = bv::spectral_decompose(bv::BVOperator(TorusDim{n}));
  auto P = spectral::projector(sd, I);
  Json body;
  if (P.rank == 0) {
    std::cerr << "warning: the window contains no eigenangles\n";
    body = {{"N", n}, {"interval", interval_json(I)}, {"rank", 0}, {"empty_window", true}};
  } else {
    auto rep = spectral::projection_stats(P, params, c.band);
    body = Json::parse(spectral::report_json(rep));
    body["empty_window"] = false;
    body["exclusion"] = Json::parse(excl::params_json(params));
  }
  if (c.out != "-" && !c.out.empty()) {
    spectral::write_heatmap_csv(c.out + ".csv", P.P);
    body["heatmap_csv"] = c.out + ".csv";
  }
  const bool ok = P.rank > 0 && body["offdiag_max_outside"].get<double>() < body["offdiag_max_inside"].get<double>();
  body["check"] = ok ? "pass" : "fail";
  emit(c, body, clock, report_path(c, c.format == "csv" ? "_summary.csv" : ".json"));
  return (c.check && !ok) ? kCheck : kOk;
}

int cmd_weyl(const RunConfig& c, const io::RunClock& clock) {
  const long n = single_n(c);
  require_even(n);
  auto I = window(c);
  auto sd = bv::spectral_decompose(bv::BVOperator(TorusDim{n}));
  const long rank = spectral::eigen_count(sd, I);
  const double expected = static_cast<double>(n) * I.length / kTwoPi;
  const double ratio = rank / expected;
  Json body{{"N", n},
            {"interval", interval_json(I)},
            {"count", rank},
            {"expected", expected},
            {"ratio", ratio}};
  if (rank > 0) {
    body["windowed_weyl_cos_q"] = spectral::windowed_weyl_sum(sd, I, torus::Observable::cos_q()).real();
    body["windowed_weyl_one"] = spectral::windowed_weyl_sum(sd, I, torus::Observable::constant(1.0)).real();
  }
  const bool ok = std::abs(ratio - 1.0) <= 0.1;
  body["check"] = ok ? "pass" : "fail";
  emit(c, body, clock, report_path(c, c.format == "csv" ? ".csv" : ".json"));
  return (c.check && !ok) ? kCheck : kOk;
}

int cmd_variance(const RunConfig& c, const io::RunClock& clock) {
  if (c.n.empty()) throw InvalidArgument("--n needs at least one value");
  auto I = window(c);
  auto a = torus::Observable::cos_q();
  Json rows = Json::array();
  bool ok = true;
  double prev = -1.0;
  for (long n : c.n) {
    require_even(n);
    auto sd = bv::spectral_decompose(bv::BVOperator(TorusDim{n}));
    const long rank = spectral::eigen_count(sd, I);
    if (rank == 0) throw InvalidArgument("window holds no eigenangles at N = " + std::to_string(n));
    const double v = spectral::quantum_variance(sd, I, a);
    if (prev >= 0.0 && !(v < prev)) ok = false;
    prev = v;
    rows.push_back({{"N", n}, {"rank", rank}, {"variance", v}});
  }
  Json body{{"observable", "cos(2 pi q)"}, {"interval", interval_json(I)}, {"variance", rows},
            {"check", ok ? "pass" : "fail"}};
  emit(c, body, clock, report_path(c, c.format == "csv" ? ".csv" : ".json"));
  return (c.check && !ok) ? kCheck : kOk;
}

int cmd_randomwave(const RunConfig& c, const io::RunClock& clock) {
  const long n = single_n(c);
  require_even(n);
  auto I = window(c);
  if (c.samples < 1) throw InvalidArgument("--samples must be >= 1");
  auto sd = bv::spectral_decompose(bv::BVOperator(TorusDim{n}));
  if (spectral::eigen_count(sd, I) == 0) throw InvalidArgument("window holds no eigenangles; widen --len");
  auto st = rw::wave_statistics(sd, I, c.samples, c.seed);
  Json body = Json::parse(rw::wave_stats_json(st));
  bool ok = st.ks_pass_frac >= 0.9 && st.sign_changes_mean >= 0.45 * n && st.sign_changes_mean <= 0.55 * n &&
            st.lp2_mean >= 0.98 && st.lp2_mean <= 1.02 && st.lp4_mean >= 1.8 && st.lp4_mean <= 2.2;
  for (double h : st.hist.real) ok = ok && std::abs(h - 1.0 / 16.0) <= 0.02;
  body["check"] = ok ? "pass" : "fail";
  emit(c, body, clock, report_path(c, c.format == "csv" ? ".csv" : ".json"));
  return (c.check && !ok) ? kCheck : kOk;
}

int cmd_walsh(const RunConfig& c, const io::RunClock& clock) {
  const int ell = c.ell < 0 ? c.k / 2 : c.ell;
  walsh::WalshParams p(c.D, c.k, ell);
  auto degs = walsh::degeneracies(p);
  bool count_pass = true;
  std::string detail;
  if (p.dim() <= 4096) {
    long bad = 0;
    for (long j = 1; j < p.order(); ++j) {
      auto r = walsh::count_nonzero_entries(p, j);
      if (!r.ok()) {
        if (bad == 0) detail = "first mismatch at j=" + std::to_string(j);
        ++bad;
      }
    }
    count_pass = bad == 0;
    detail = count_pass ? "exact for all j in [1, " + std::to_string(p.order() - 1) + "]"
                        : std::to_string(bad) + " powers differ; " + detail;
  }
  walsh::BasisStats st;
  if (c.stats) st = walsh::random_eigenbasis_statistics(p, c.seed, {walsh::indicator_q_below(0.5)});
  Json body = Json::parse(walsh::walsh_report_json(p, degs, count_pass, detail, st));
  if (!c.stats) {
    body.erase("que_max_dev");
    body.erase("ks_max");
    body["stats"] = "skipped";
  }
  if (p.dim() > 4096) body["count_check"] = "skipped (D^k > 4096)";
  const bool ok = count_pass;
  body["check"] = ok ? "pass" : "fail";
  emit(c, body, clock, report_path(c, c.format == "csv" ? ".csv" : ".json"));
  return (c.check && !ok) ? kCheck : kOk;
}

int cmd_exceptional(const RunConfig& c, const io::RunClock& clock) {
  if (c.k_min < 1 || c.k_max < c.k_min || c.k_max > 13)
    throw InvalidArgument("need 1 <= --k-min <= --k-max <= 13");
  const selberg::AngleInterval I(1.5 * kPi, kPi);
  Json rows = Json::array();
  double last = 0.0;
  for (int K = c.k_min; K <= c.k_max; ++K) {
    const long n = 1L << K;
    auto sd = bv::spectral_decompose(bv::BVOperator(TorusDim{n}));
    const double p00 = spectral::projector_entry(sd, I, 0, 0).real();
    rows.push_back({{"K", K}, {"N", n}, {"rank", spectral::eigen_count(sd, I)}, {"P00", p00}});
    last = p00;
  }
  const bool ok = last >= 0.85;
  Json body{{"interval", interval_json(I)}, {"bound", 0.89182655}, {"sweep", rows}, {"check", ok ? "pass" : "fail"}};
  emit(c, body, clock, report_path(c, c.format == "csv" ? ".csv" : ".json"));
  return (c.check && !ok) ? kCheck : kOk;
}

void set_threads(const RunConfig& c) {
  int t = c.threads;
  if (t <= 0) {
    if (const char* env = std::getenv("BAKERLAB_THREADS")) {
      try {
        t = std::stoi(env);
      } catch (...) {
        throw InvalidArgument(std::string("BAKERLAB_THREADS must be a positive integer, got '") + env + "'");
      }
      if (t <= 0) throw InvalidArgument("BAKERLAB_THREADS must be a positive integer");
    }
  }
  if (t > 0) omp_set_num_threads(t);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized baker map laboratory.\n"
               "Windows are half-open arcs [start, start + len) in radians on the unit circle."};
  app.require_subcommand(1);
  RunConfig c;

  auto common = [&](CLI::App* s) {
    s->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
    s->add_option("--out", c.out, "output path or prefix ('-' for stdout)")->capture_default_str();
    s->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    s->add_option("--threads", c.threads, "thread budget (0: BAKERLAB_THREADS or OpenMP default)")
        ->check(CLI::NonNegativeNumber);
    s->add_flag("--check", c.check, "exit 3 when the subcommand's acceptance check fails");
  };
  auto windowed = [&](CLI::App* s) {
    s->add_option("--start", c.start, "window start in radians")->capture_default_str();
    s->add_option("--len", c.len, "window length in radians")->capture_default_str();
  };

  auto* powers = app.add_subcommand("powers", "heatmaps of |B^k| for k = 1..k-max");
  powers->add_option("--n", c.n, "dimension N (even)")->required()->expected(1);
  powers->add_option("--k-max", c.power_k_max, "largest power")->capture_default_str();
  powers->add_option("--w", c.W, "classical-set width W")->capture_default_str();
  common(powers);

  auto* proj = app.add_subcommand("projection", "spectral projector heatmap and statistics");
  proj->add_option("--n", c.n, "dimension N (even)")->required()->expected(1);
  proj->add_option("--exclusion", c.exclusion, "desk or schedule")->capture_default_str();
  proj->add_option("--eps-rule", c.eps_rule, "power_half, log_reciprocal or custom")->capture_default_str();
  proj->add_option("--band", c.band, "diagonal band half-width")->capture_default_str();
  windowed(proj);
  common(proj);

  auto* weyl = app.add_subcommand("weyl", "eigenvalue count and windowed Weyl sums");
  weyl->add_option("--n", c.n, "dimension N (even)")->required()->expected(1);
  windowed(weyl);
  common(weyl);

  auto* var = app.add_subcommand("variance", "windowed quantum variance of cos(2 pi q)");
  var->add_option("--n", c.n, "one or more dimensions")->required()->expected(1, 16);
  windowed(var);
  common(var);

  auto* wave = app.add_subcommand("randomwave", "random band-limited wave statistics");
  wave->add_option("--n", c.n, "dimension N (even)")->required()->expected(1);
  wave->add_option("--samples", c.samples, "number of waves")->capture_default_str();
  windowed(wave);
  common(wave);

  auto* wal = app.add_subcommand("walsh", "Walsh quantization: counts, degeneracies, random eigenbasis");
  wal->add_option("--d", c.D, "local dimension D >= 2")->capture_default_str();
  wal->add_option("--k", c.k, "number of dits")->capture_default_str();
  wal->add_option("--ell", c.ell, "coherent split 0..k (default k/2)");
  wal->add_flag("!--no-stats", c.stats, "skip the random eigenbasis statistics");
  common(wal);

  auto* exc = app.add_subcommand("exceptional", "P_00 for the window [-pi/2, pi/2), N = 2^K");
  exc->add_option("--k-min", c.k_min, "smallest K")->capture_default_str();
  exc->add_option("--k-max", c.k_max, "largest K")->capture_default_str();
  common(exc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  for (auto* s : app.get_subcommands()) c.subcommand = s->get_name();
  if (c.subcommand == "randomwave" && wave->count("--start") == 0) c.start = 2.0;
  if (c.subcommand == "randomwave" && wave->count("--len") == 0) c.len = 1.0;

  io::RunClock clock;
  try {
    set_threads(c);
    if (c.subcommand == "powers") return cmd_powers(c, clock);
    if (c.subcommand == "projection") return cmd_projection(c, clock);
    if (c.subcommand == "weyl") return cmd_weyl(c, clock);
    if (c.subcommand == "variance") return cmd_variance(c, clock);
    if (c.subcommand == "randomwave") return cmd_randomwave(c, clock);
    if (c.subcommand == "walsh") return cmd_walsh(c, clock);
    if (c.subcommand == "exceptional") return cmd_exceptional(c, clock);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kConfig;
}
