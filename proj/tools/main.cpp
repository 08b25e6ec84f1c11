// Command-line driver: experiment dispatch, deterministic seeding, CSV/JSON
// emission. Every run writes data.csv plus a manifest.json that is sufficient
// to re-run it bit-identically (`scrambleswap rerun <manifest>`).

#include <scrambleswap/experiments.hpp>
#include <scrambleswap/measproj.hpp>
#include <scrambleswap/version.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace ss = scrambleswap;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_limit = 3;
constexpr int exit_numerical = 4;

struct LimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Grid spec: "a,b,c" or "start:stop:count" (linear) or "start:stop:countlog".
std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::istringstream is(spec);
    std::string a, b, c;
    std::getline(is, a, ':');
    std::getline(is, b, ':');
    std::getline(is, c, ':');
    bool log = false;
    if (c.size() > 3 && c.substr(c.size() - 3) == "log") {
      log = true;
      c = c.substr(0, c.size() - 3);
    }
    const double start = std::stod(a), stop = std::stod(b);
    const int count = std::stoi(c);
    if (count < 1) throw CLI::ValidationError("grid", "count must be >= 1");
    for (int k = 0; k < count; ++k) {
      const double f = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
      out.push_back(log ? start * std::pow(stop / start, f) : start + (stop - start) * f);
    }
    return out;
  }
  std::istringstream is(spec);
  std::string tok;
  while (std::getline(is, tok, ',')) out.push_back(std::stod(tok));
  if (out.empty()) throw CLI::ValidationError("grid", "empty grid");
  return out;
}

std::vector<ss::Index> parse_dims(const std::string& spec) {
  std::vector<ss::Index> out;
  std::istringstream is(spec);
  std::string tok;
  while (std::getline(is, tok, ',')) out.push_back(std::stoll(tok));
  if (out.empty()) throw CLI::ValidationError("dims", "empty list");
  return out;
}

struct OutputSink {
  std::filesystem::path dir;
  ss::RunManifest manifest;

  OutputSink(const std::string& command, std::uint64_t seed) {
    dir = ss::make_output_dir(command, seed);
    manifest.command = command;
    manifest.seed = seed;
    manifest.started_at = ss::iso8601_now();
  }

  std::string csv_path() const { return (dir / "data.csv").string(); }

  void finish(const std::vector<std::string>& columns,
              const std::vector<std::vector<double>>& rows) {
    ss::write_csv(csv_path(), columns, rows);
    manifest.outputs.push_back(csv_path());
    manifest.finished_at = ss::iso8601_now();
    ss::write_manifest((dir / "manifest.json").string(), manifest);
    std::cout << "wrote " << csv_path() << "\n";
  }
};

// ---------------------------------------------------------------------------
// Dicke option block shared by the dicke subcommands

struct DickeOptions {
  int n_spins = 4;
  double alpha = 30.0;
  double window_sigmas = 4.0;
  long fock_min = -1, fock_max = -1;
  double tail_budget = ss::default_tail_budget;
  int n_states = 30;
  std::uint64_t seed = 1;
  std::string metric = "eq5";
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  bool long_run = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--n", n_spins, "spin count N (d_A = N+1)")->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", alpha, "coherent displacement of the boson reference");
    cmd->add_option("--window-sigmas", window_sigmas, "Fock window half-width in units of |alpha|");
    cmd->add_option("--fock-min", fock_min, "explicit window lower edge (overrides sigmas)");
    cmd->add_option("--fock-max", fock_max, "explicit window upper edge (overrides sigmas)");
    cmd->add_option("--tail-budget", tail_budget, "max allowed coherent tail mass");
    cmd->add_option("--states", n_states, "Haar state pairs per cell")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "root seed");
    cmd->add_option("--metric", metric, "fidelity metric: eq5 | uhlmann")
        ->check(CLI::IsMember({"eq5", "uhlmann"}));
    cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_flag("--long", long_run, "allow runs estimated over 10 minutes");
  }

  ss::DickeParams params(double delta, double omega_z) const {
    ss::DickeParams p = ss::DickeParams::make(n_spins, delta, omega_z, alpha, window_sigmas);
    if (fock_min >= 0 && fock_max > fock_min) p.window = ss::FockWindow{fock_min, fock_max};
    p.tail_budget = tail_budget;
    return p;
  }

  ss::FidelityMetric fidelity_metric() const {
    return metric == "uhlmann" ? ss::FidelityMetric::uhlmann_vs_swapped
                               : ss::FidelityMetric::swap_eq5;
  }

  void record(ss::RunManifest& m) const {
    m.config["n"] = std::to_string(n_spins);
    m.config["alpha"] = ss::format_full(alpha);
    m.config["window-sigmas"] = ss::format_full(window_sigmas);
    m.config["fock-min"] = std::to_string(fock_min);
    m.config["fock-max"] = std::to_string(fock_max);
    m.config["tail-budget"] = ss::format_full(tail_budget);
    m.config["states"] = std::to_string(n_states);
    m.config["seed"] = std::to_string(seed);
    m.config["metric"] = metric;
    m.config["long"] = long_run ? "1" : "0";
  }

  /// Crude wall-time estimate: eigendecompositions dominate. n_eigs counts
  /// distinct leg Hamiltonians (ideal reversal shares the forward leg's).
  void gate_runtime(std::size_t n_eigs, const ss::DickeParams& p) const {
    const double dim = static_cast<double>(p.spin_dim() * p.boson_dim());
    const double eig_s = 4.0 * std::pow(dim / 1205.0, 3.0);
    const double est = static_cast<double>(n_eigs) * eig_s / std::max(1, jobs);
    if (est > 600.0 && !long_run)
      throw LimitError("estimated runtime " + std::to_string(static_cast<long>(est)) +
                       " s exceeds 10 min; pass --long to proceed");
  }
};

void note_dicke_warnings(OutputSink& sink, const ss::DickeParams& p, double tail, long failures) {
  sink.manifest.warnings.push_back("fock window [" + std::to_string(p.window.n_min) + ", " +
                                   std::to_string(p.window.n_max) +
                                   "] (default half-width ~4|alpha|, a choice; tail mass " +
                                   ss::format_full(tail) + ")");
  if (failures > 0)
    sink.manifest.warnings.push_back("postselection failures: " + std::to_string(failures));
}

// ---------------------------------------------------------------------------
// Subcommand runners

int run_haar_bench(ss::Index d_a, const std::string& d_b_spec, int draws, std::uint64_t seed) {
  if (draws < 1) throw CLI::ValidationError("--draws", "must be positive");
  OutputSink sink("haar-bench", seed);
  sink.manifest.config = {{"da", std::to_string(d_a)},
                          {"db", d_b_spec},
                          {"draws", std::to_string(draws)},
                          {"seed", std::to_string(seed)}};
  const auto rows = ss::haar_benchmark(d_a, parse_dims(d_b_spec), draws, ss::Seed{seed});
  std::vector<std::vector<double>> data;
  for (const auto& r : rows)
    data.push_back({static_cast<double>(r.d_b), r.f_mc, r.f_se, r.f_theory, r.p_mc, r.p_se,
                    r.p_theory});
  sink.finish({"d_B", "f_mc", "f_se", "f_theory", "p_mc", "p_se", "p_theory"}, data);
  return exit_ok;
}

int run_bounds(ss::Index d, ss::Index m, int pairs, int states, std::uint64_t seed) {
  OutputSink sink("bounds", seed);
  sink.manifest.config = {{"d", std::to_string(d)},
                          {"m", std::to_string(m)},
                          {"pairs", std::to_string(pairs)},
                          {"states", std::to_string(states)},
                          {"seed", std::to_string(seed)}};
  const auto res = ss::dimension_bound_check(d, m, pairs, states, ss::Seed{seed});
  if (res.n_skipped > 0)
    sink.manifest.warnings.push_back("states below p_floor: " + std::to_string(res.n_skipped));
  sink.finish({"d", "m", "min_f", "bound", "max_ratio_mc", "ratio_bound", "skipped"},
              {{static_cast<double>(d), static_cast<double>(m), res.min_f, res.bound,
                res.max_ratio_mc, res.ratio_bound, static_cast<double>(res.n_skipped)}});
  std::cout << "min F = " << res.min_f << " vs bound " << res.bound << "\n";
  return exit_ok;
}

int run_measproj(const std::string& variant_name, int n_max, std::optional<double> eps,
                 std::uint64_t /*seed*/) {
  const ss::MeasVariant variant =
      variant_name == "sinc" ? ss::MeasVariant::sinc : ss::MeasVariant::cosine;
  if (variant == ss::MeasVariant::cosine && !eps)
    throw CLI::ValidationError("--eps", "cosine variant needs a target leakage");
  const ss::MeasConfig cfg =
      ss::required_measurement_spins(eps.value_or(1e-3), n_max, variant);
  OutputSink sink("measproj", 0);
  sink.manifest.config = {{"variant", variant_name},
                          {"nmax", std::to_string(n_max)},
                          {"eps", ss::format_full(eps.value_or(1e-3))}};
  std::vector<std::vector<double>> table;
  double worst = 0.0;
  const double variant_code = variant == ss::MeasVariant::sinc ? 1.0 : 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const double w = ss::projection_weight(cfg, n);
    if (n >= 1) worst = std::max(worst, w);
    table.push_back({static_cast<double>(n), w, variant_code});
  }
  std::cout << "variant=" << variant_name << " N_M=" << cfg.n_meas_spins << " gt=" << cfg.gt
            << " max weight(1..n_max)=" << worst << "\n";
  if (variant == ss::MeasVariant::cosine && worst > *eps)
    throw NumericalError("derived config violates its own leakage target");
  sink.manifest.config["derived-nm"] = std::to_string(cfg.n_meas_spins);
  sink.manifest.config["derived-gt"] = ss::format_full(cfg.gt);
  sink.finish({"n", "weight", "variant"}, table); // variant: 0 cosine, 1 sinc
  return exit_ok;
}

int run_dicke_scan(const DickeOptions& opt, const std::string& dgrid, const std::string& ogrid,
                   double tmin, double tmax, int tsamples) {
  ss::ScanConfig cfg;
  cfg.delta_grid = parse_grid(dgrid);
  cfg.omega_grid = parse_grid(ogrid);
  cfg.time_window = {tmin, tmax, tsamples};
  cfg.n_states = opt.n_states;
  cfg.seed = ss::Seed{opt.seed};
  cfg.metric = opt.fidelity_metric();
  cfg.jobs = opt.jobs;
  const auto base = opt.params(cfg.delta_grid.front(), cfg.omega_grid.front());
  opt.gate_runtime(cfg.delta_grid.size() * cfg.omega_grid.size(), base);

  OutputSink sink("dicke-scan", opt.seed);
  opt.record(sink.manifest);
  sink.manifest.config["delta-grid"] = dgrid;
  sink.manifest.config["omegaz-grid"] = ogrid;
  sink.manifest.config["tmin"] = ss::format_full(tmin);
  sink.manifest.config["tmax"] = ss::format_full(tmax);
  sink.manifest.config["tsamples"] = std::to_string(tsamples);

  const auto result = ss::phase_scan(cfg, base);
  std::vector<std::vector<double>> data;
  long failures = 0;
  for (const auto& r : result.rows) {
    data.push_back({r.delta, r.omega_z, r.f_mean, r.f_std, r.s2_mean, r.p_mean,
                    r.failed_fraction});
    failures += static_cast<long>(r.failed_fraction * cfg.n_states * tsamples + 0.5);
  }
  note_dicke_warnings(sink, base, result.tail_mass, failures);
  if (failures == static_cast<long>(result.rows.size()) * cfg.n_states * tsamples)
    throw NumericalError("postselection failed for every sample");
  sink.finish({"delta", "omega_z", "f_mean", "f_std", "s2_mean", "p_mean", "failed_fraction"},
              data);
  return exit_ok;
}

int run_dicke_trace(const DickeOptions& opt, double delta, double omega_z, double tmin,
                    double tmax, double dt) {
  if (dt <= 0.0) throw CLI::ValidationError("--dt", "must be positive");
  ss::ScanConfig cfg;
  cfg.time_window = {tmin, tmax, static_cast<int>(std::floor((tmax - tmin) / dt)) + 1};
  cfg.n_states = opt.n_states;
  cfg.seed = ss::Seed{opt.seed};
  cfg.metric = opt.fidelity_metric();
  const auto base = opt.params(delta, omega_z);
  opt.gate_runtime(1, base);

  OutputSink sink("dicke-trace", opt.seed);
  opt.record(sink.manifest);
  sink.manifest.config["delta"] = ss::format_full(delta);
  sink.manifest.config["omegaz"] = ss::format_full(omega_z);
  sink.manifest.config["tmin"] = ss::format_full(tmin);
  sink.manifest.config["tmax"] = ss::format_full(tmax);
  sink.manifest.config["dt"] = ss::format_full(dt);

  const auto trace = ss::time_trace(base, cfg);
  std::vector<std::vector<double>> data;
  for (const auto& p : trace) data.push_back({p.t, p.f_mean, p.f_std, p.p_mean});
  note_dicke_warnings(sink, base, ss::run_tail(base), 0);
  sink.finish({"t", "f_mean", "f_std", "p_mean"}, data);
  return exit_ok;
}

int run_dicke_transient(const DickeOptions& opt, const std::string& dgrid,
                        const std::string& ogrid, double tmax, double dt, double tcap,
                        double threshold, int sustain) {
  ss::ScanConfig cfg;
  cfg.delta_grid = parse_grid(dgrid);
  cfg.omega_grid = parse_grid(ogrid);
  cfg.time_window = {0.0, tmax, static_cast<int>(std::floor(tmax / dt)) + 1};
  cfg.n_states = opt.n_states;
  cfg.seed = ss::Seed{opt.seed};
  cfg.metric = opt.fidelity_metric();
  cfg.jobs = opt.jobs;
  const auto base = opt.params(cfg.delta_grid.front(), cfg.omega_grid.front());
  opt.gate_runtime(cfg.delta_grid.size() * cfg.omega_grid.size(), base);

  OutputSink sink("dicke-transient", opt.seed);
  opt.record(sink.manifest);
  sink.manifest.config["delta-grid"] = dgrid;
  sink.manifest.config["omegaz-grid"] = ogrid;
  sink.manifest.config["tmax"] = ss::format_full(tmax);
  sink.manifest.config["dt"] = ss::format_full(dt);
  sink.manifest.config["tcap"] = ss::format_full(tcap);
  sink.manifest.config["threshold"] = ss::format_full(threshold);
  sink.manifest.config["sustain"] = std::to_string(sustain);

  const auto rows = ss::transient_map(cfg, base, tcap, threshold, sustain);
  std::vector<std::vector<double>> data;
  for (const auto& r : rows)
    data.push_back({r.delta, r.omega_z,
                    r.t_star ? *r.t_star : std::numeric_limits<double>::quiet_NaN()});
  note_dicke_warnings(sink, base, ss::run_tail(base), 0);
  sink.finish({"delta", "omega_z", "t_star"}, data);
  return exit_ok;
}

int run_dicke_reversal(const DickeOptions& opt, double delta, double omega_z, double t,
                       const std::string& dfrac_spec, const std::string& zfrac_spec) {
  ss::ScanConfig cfg;
  cfg.n_states = opt.n_states;
  cfg.seed = ss::Seed{opt.seed};
  cfg.metric = opt.fidelity_metric();
  cfg.jobs = opt.jobs;
  const auto base = opt.params(delta, omega_z);

  std::vector<std::pair<double, double>> grid = {{0.0, 0.0}};
  const auto dfracs = parse_grid(dfrac_spec);
  const auto zfracs = parse_grid(zfrac_spec);
  for (double fd : dfracs)
    for (double fz : zfracs)
      if (fd != 0.0 || fz != 0.0) grid.emplace_back(fd, fz);
  opt.gate_runtime(grid.size() + 1, base); // every imperfect point re-decomposes the reverse leg

  OutputSink sink("dicke-reversal", opt.seed);
  opt.record(sink.manifest);
  sink.manifest.config["delta"] = ss::format_full(delta);
  sink.manifest.config["omegaz"] = ss::format_full(omega_z);
  sink.manifest.config["t"] = ss::format_full(t);
  sink.manifest.config["eps-delta-grid"] = dfrac_spec;
  sink.manifest.config["eps-z-grid"] = zfrac_spec;

  const auto rows = ss::reversal_scan(base, t, grid, cfg);
  std::vector<std::vector<double>> data;
  for (const auto& r : rows) data.push_back({r.eps_delta_frac, r.eps_z_frac, r.f_mean, r.p_mean});
  note_dicke_warnings(sink, base, ss::run_tail(base), 0);
  sink.finish({"eps_delta_frac", "eps_z_frac", "f_mean", "p_mean"}, data);
  return exit_ok;
}

int dispatch(int argc, char** argv);

int run_rerun(const std::string& manifest_path) {
  const auto m = ss::load_manifest(manifest_path);
  std::vector<std::string> args;
  args.push_back("scrambleswap");
  if (m.command.rfind("dicke-", 0) == 0) {
    args.push_back("dicke");
    args.push_back(m.command.substr(6));
  } else {
    args.push_back(m.command);
  }
  for (const auto& [k, v] : m.config) {
    if (k.rfind("derived-", 0) == 0) continue; // informational, not a flag
    if (k == "long") {
      if (v == "1") args.push_back("--long");
      continue;
    }
    args.push_back("--" + k + "=" + v);
  }
  std::vector<char*> argv2;
  for (auto& a : args) argv2.push_back(a.data());
  return dispatch(static_cast<int>(argv2.size()), argv2.data());
}

int dispatch(int argc, char** argv) {
  CLI::App app{"scrambling-based postselected SWAP: Haar benchmarks, Dicke-model scans,\n"
               "analytic bounds and the measurement-spin boson projection"};
  app.set_config("--config", "", "flat key=value config file; flags override");
  app.require_subcommand(1);
  app.set_version_flag("--version", ss::version);

  // haar-bench
  auto* hb = app.add_subcommand("haar-bench", "Haar fidelity/probability law benchmark");
  ss::Index hb_da = 2;
  std::string hb_db = "8,32,128";
  int hb_draws = 500;
  std::uint64_t hb_seed = 1;
  hb->add_option("--da", hb_da, "dimension of A (= C)")->check(CLI::PositiveNumber);
  hb->add_option("--db", hb_db, "comma list of B dimensions");
  hb->add_option("--draws", hb_draws, "Haar draws per d_B")->check(CLI::PositiveNumber);
  hb->add_option("--seed", hb_seed, "root seed");

  // bounds
  auto* bd = app.add_subcommand("bounds", "general two-gate dimension bound check");
  ss::Index bd_d = 2, bd_m = 1;
  int bd_pairs = 50, bd_states = 2000;
  std::uint64_t bd_seed = 1;
  bd->add_option("--d", bd_d, "dimension of A and C")->check(CLI::PositiveNumber);
  bd->add_option("--m", bd_m, "dimension of B")->check(CLI::PositiveNumber);
  bd->add_option("--pairs", bd_pairs, "Haar (U, W) pairs")->check(CLI::PositiveNumber);
  bd->add_option("--states", bd_states, "Haar states per pair")->check(CLI::PositiveNumber);
  bd->add_option("--seed", bd_seed, "root seed");

  // measproj
  auto* mp = app.add_subcommand("measproj", "measurement-spin boson projection weights");
  std::string mp_variant = "sinc";
  int mp_nmax = 5;
  double mp_eps = -1.0;
  mp->add_option("--variant", mp_variant, "cosine | sinc")
      ->check(CLI::IsMember({"cosine", "sinc"}));
  mp->add_option("--nmax", mp_nmax, "maximum relevant occupancy")->check(CLI::PositiveNumber);
  mp->add_option("--eps", mp_eps, "target leakage (cosine variant)");

  // dicke with nested subcommands
  auto* dk = app.add_subcommand("dicke", "Dicke-model protocol experiments");
  dk->require_subcommand(1);
  DickeOptions scan_opt, trace_opt, trans_opt, rev_opt;

  auto* dks = dk->add_subcommand("scan", "phase scan over (delta, omega_z)");
  scan_opt.attach(dks);
  std::string dks_dgrid = "0.05:1:8", dks_ogrid = "0.5:5:8";
  double dks_tmin = 700, dks_tmax = 850;
  int dks_tsamples = 64;
  dks->add_option("--delta-grid", dks_dgrid, "grid spec: list or start:stop:count[log]");
  dks->add_option("--omegaz-grid", dks_ogrid, "grid spec");
  dks->add_option("--tmin", dks_tmin, "leg-time window start (units of 1/g)");
  dks->add_option("--tmax", dks_tmax, "leg-time window end");
  dks->add_option("--tsamples", dks_tsamples, "equidistant time samples");

  auto* dkt = dk->add_subcommand("trace", "fidelity time trace at one cell");
  trace_opt.attach(dkt);
  double dkt_delta = 0.40, dkt_omegaz = 3.78, dkt_tmin = 0.0, dkt_tmax = 22.0, dkt_dt = 0.15;
  dkt->add_option("--delta", dkt_delta, "boson detuning / g");
  dkt->add_option("--omegaz", dkt_omegaz, "spin splitting / g");
  dkt->add_option("--tmin", dkt_tmin, "first sample time");
  dkt->add_option("--tmax", dkt_tmax, "last sample time");
  dkt->add_option("--dt", dkt_dt, "sample spacing");

  auto* dkn = dk->add_subcommand("transient", "earliest sustained-threshold map");
  trans_opt.attach(dkn);
  std::string dkn_dgrid = "0.40", dkn_ogrid = "3.78";
  double dkn_tmax = 22.0, dkn_dt = 0.15, dkn_tcap = 22.0, dkn_threshold = 0.9;
  int dkn_sustain = 3;
  dkn->add_option("--delta-grid", dkn_dgrid, "grid spec");
  dkn->add_option("--omegaz-grid", dkn_ogrid, "grid spec");
  dkn->add_option("--tmax", dkn_tmax, "search horizon");
  dkn->add_option("--dt", dkn_dt, "sample spacing");
  dkn->add_option("--tcap", dkn_tcap, "report only t* <= tcap");
  dkn->add_option("--threshold", dkn_threshold, "fidelity threshold");
  dkn->add_option("--sustain", dkn_sustain, "consecutive samples required")
      ->check(CLI::PositiveNumber);

  auto* dkr = dk->add_subcommand("reversal", "reversal-imperfection sensitivity scan");
  rev_opt.attach(dkr);
  double dkr_delta = 0.40, dkr_omegaz = 3.78, dkr_t = 16.8;
  std::string dkr_dfrac = "1e-6:1e-1:21log", dkr_zfrac = "0";
  dkr->add_option("--delta", dkr_delta, "boson detuning / g");
  dkr->add_option("--omegaz", dkr_omegaz, "spin splitting / g");
  dkr->add_option("--t", dkr_t, "operating leg time");
  dkr->add_option("--eps-delta-grid", dkr_dfrac, "fractional eps_delta/delta grid spec");
  dkr->add_option("--eps-z-grid", dkr_zfrac, "fractional eps_z/omega_z grid spec");

  // rerun
  auto* rr = app.add_subcommand("rerun", "re-run a recorded manifest bit-identically");
  std::string rr_path;
  rr->add_option("manifest", rr_path, "path to manifest.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) ? exit_ok : exit_ok;
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e) ? exit_ok : exit_ok;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  if (hb->parsed()) return run_haar_bench(hb_da, hb_db, hb_draws, hb_seed);
  if (bd->parsed()) return run_bounds(bd_d, bd_m, bd_pairs, bd_states, bd_seed);
  if (mp->parsed())
    return run_measproj(mp_variant, mp_nmax,
                        mp_eps > 0 ? std::optional<double>(mp_eps) : std::nullopt, 0);
  if (dk->parsed()) {
    if (dks->parsed())
      return run_dicke_scan(scan_opt, dks_dgrid, dks_ogrid, dks_tmin, dks_tmax, dks_tsamples);
    if (dkt->parsed())
      return run_dicke_trace(trace_opt, dkt_delta, dkt_omegaz, dkt_tmin, dkt_tmax, dkt_dt);
    if (dkn->parsed())
      return run_dicke_transient(trans_opt, dkn_dgrid, dkn_ogrid, dkn_tmax, dkn_dt, dkn_tcap,
                                 dkn_threshold, dkn_sustain);
    if (dkr->parsed())
      return run_dicke_reversal(rev_opt, dkr_delta, dkr_omegaz, dkr_t, dkr_dfrac, dkr_zfrac);
  }
  if (rr->parsed()) return run_rerun(rr_path);
  return exit_usage;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return exit_usage;
  } catch (const LimitError& e) {
    std::cerr << "limit: " << e.what() << "\n";
    return exit_limit;
  } catch (const ss::TailBudgetError& e) {
    std::cerr << "limit: " << e.what() << "\n";
    return exit_limit;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }
}
