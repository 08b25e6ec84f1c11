#pragma once

#include "dicke.hpp"
#include "ensembles.hpp"
#include "io.hpp"
#include "protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

namespace scrambleswap {

// ---------------------------------------------------------------------------
// Configuration

enum class FidelityMetric { swap_eq5, uhlmann_vs_swapped };

struct TimeWindow {
  double t_min = 0.0;
  double t_max = 0.0;
  int n_samples = 64;

  std::vector<double> grid() const {
    if (n_samples < 1 || t_max < t_min) throw std::invalid_argument("TimeWindow: bad window");
    std::vector<double> t(static_cast<size_t>(n_samples));
    for (int k = 0; k < n_samples; ++k)
      t[static_cast<size_t>(k)] =
          n_samples == 1 ? t_min : t_min + (t_max - t_min) * k / (n_samples - 1);
    return t;
  }
};

/// Scan configuration. Per-cell sub-streams: cell i uses seed.derive(i); state
/// pair j within a cell draws psi_A from derive(2j) and chi_C from
/// derive(2j+1). Single-cell drivers (time_trace, reversal_scan) use cell 0.
struct ScanConfig {
  std::vector<double> delta_grid;
  std::vector<double> omega_grid;
  TimeWindow time_window;
  int n_states = 30;
  Seed seed{1};
  FidelityMetric metric = FidelityMetric::swap_eq5;
  int jobs = 1;
};

// ---------------------------------------------------------------------------
// Per-cell computation shared by all Dicke drivers

struct TracePoint {
  double t = 0.0; ///< leg duration in units of 1/g (total protocol duration 2t)
  double f_mean = 0.0;
  double f_std = 0.0;
  double p_mean = 0.0;
};

struct CellData {
  std::vector<TracePoint> per_time;
  double f_mean = 0.0, f_std = 0.0; ///< flat moments over (state x time), failures excluded
  double s2_mean = 0.0;             ///< -log_dA of the flat mean forward purity
  double p_mean = 0.0;              ///< flat mean over all (state x time), failures included
  long n_failed = 0;
  double tail_mass = 0.0;
};

namespace detail {

inline std::vector<Vec> draw_state_ensemble(Index d, Seed cell_seed, int n_states, int offset) {
  std::vector<Vec> states;
  states.reserve(static_cast<size_t>(n_states));
  for (int i = 0; i < n_states; ++i) {
    Rng rng(cell_seed.derive(static_cast<std::uint64_t>(2 * i + offset)));
    states.push_back(haar_state_vector(d, rng));
  }
  return states;
}

} // namespace detail

/// Evaluate one (params, err) cell over a time grid and a Haar state ensemble.
inline CellData run_cell(const DickeParams& params, const ReversalError& err,
                         const std::vector<double>& times, int n_states, Seed cell_seed,
                         FidelityMetric metric, bool want_s2) {
  DickeProtocol proto(params, err);
  const Index da = params.spin_dim();
  const auto psis = detail::draw_state_ensemble(da, cell_seed, n_states, 0);
  const auto chis = detail::draw_state_ensemble(da, cell_seed, n_states, 1);

  CellData cell;
  cell.tail_mass = proto.tail_mass();
  double f_sum = 0.0, f_sq_sum = 0.0, p_sum = 0.0, purity_sum = 0.0;
  long n_ok = 0, n_all = 0;

  const bool want_uhlmann = metric == FidelityMetric::uhlmann_vs_swapped;
  for (double t : times) {
    const Mat cols = proto.forward_columns(t);
    const Mat k = kernel_from_columns(cols, proto.reverse_columns_dag(t), params.boson_dim());
    TracePoint pt;
    pt.t = t;
    double ft_sum = 0.0, ft_sq = 0.0, pt_sum = 0.0;
    long nt_ok = 0;
    for (int i = 0; i < n_states; ++i) {
      const auto out = outcome_from_kernel(k, psis[static_cast<size_t>(i)],
                                           chis[static_cast<size_t>(i)], proto.out_space(),
                                           want_uhlmann);
      pt_sum += out.p;
      ++n_all;
      if (out.postselected) {
        const double f = want_uhlmann ? *out.f_uhlmann : out.f_swap;
        ft_sum += f;
        ft_sq += f * f;
        ++nt_ok;
      } else {
        ++cell.n_failed;
      }
      if (want_s2)
        purity_sum += proto.forward_spin_purity(cols, psis[static_cast<size_t>(i)]);
    }
    pt.p_mean = pt_sum / n_states;
    if (nt_ok > 0) {
      pt.f_mean = ft_sum / nt_ok;
      const double var = std::max(0.0, ft_sq / nt_ok - pt.f_mean * pt.f_mean);
      pt.f_std = std::sqrt(var);
    }
    cell.per_time.push_back(pt);
    f_sum += ft_sum;
    f_sq_sum += ft_sq;
    p_sum += pt_sum;
    n_ok += nt_ok;
  }
  cell.p_mean = p_sum / static_cast<double>(n_all);
  if (n_ok > 0) {
    cell.f_mean = f_sum / static_cast<double>(n_ok);
    cell.f_std = std::sqrt(std::max(0.0, f_sq_sum / static_cast<double>(n_ok) -
                                             cell.f_mean * cell.f_mean));
  }
  if (want_s2)
    cell.s2_mean = renyi2_from_mean_purity(purity_sum / static_cast<double>(n_all), da);
  return cell;
}

// ---------------------------------------------------------------------------
// Phase scan (fidelity / entanglement maps)

struct ScanCell {
  double delta = 0.0, omega_z = 0.0;
  double f_mean = 0.0, f_std = 0.0, s2_mean = 0.0, p_mean = 0.0;
  double failed_fraction = 0.0;
};

struct ScanResult {
  std::vector<ScanCell> rows;
  double tail_mass = 0.0;
  FockWindow window;
};

inline double run_tail(const DickeParams& base) {
  return coherent_state(base.alpha, base.window, base.tail_budget).tail_mass;
}

inline ScanResult phase_scan(const ScanConfig& cfg, const DickeParams& base) {
  if (cfg.delta_grid.empty() || cfg.omega_grid.empty())
    throw std::invalid_argument("phase_scan: empty grid");
  const auto times = cfg.time_window.grid();
  const std::size_t n_cells = cfg.delta_grid.size() * cfg.omega_grid.size();
  ScanResult result;
  result.window = base.window;
  result.rows.resize(n_cells);
  parallel_for(n_cells, cfg.jobs, [&](std::size_t i) {
    DickeParams params = base;
    params.delta = cfg.delta_grid[i / cfg.omega_grid.size()];
    params.omega_z = cfg.omega_grid[i % cfg.omega_grid.size()];
    const CellData cell =
        run_cell(params, {}, times, cfg.n_states, cfg.seed.derive(i), cfg.metric, true);
    ScanCell& row = result.rows[i];
    row.delta = params.delta;
    row.omega_z = params.omega_z;
    row.f_mean = cell.f_mean;
    row.f_std = cell.f_std;
    row.s2_mean = cell.s2_mean;
    row.p_mean = cell.p_mean;
    row.failed_fraction = static_cast<double>(cell.n_failed) /
                          static_cast<double>(cfg.n_states * times.size());
  });
  if (!result.rows.empty()) result.tail_mass = run_tail(base);
  return result;
}

// ---------------------------------------------------------------------------
// Time traces and transients

inline std::vector<TracePoint> time_trace(const DickeParams& base, const ScanConfig& cfg) {
  const auto times = cfg.time_window.grid();
  return run_cell(base, {}, times, cfg.n_states, cfg.seed.derive(0), cfg.metric, false).per_time;
}

struct TransientResult {
  std::optional<double> t_star;
  double threshold = 0.9;
  int sustain = 3;
  std::vector<TracePoint> trace;
};

/// Earliest time with `sustain` consecutive samples of f_mean >= threshold.
inline TransientResult find_transient(const std::vector<TracePoint>& trace,
                                      double threshold = 0.9, int sustain = 3) {
  if (trace.empty()) throw std::invalid_argument("find_transient: empty trace");
  TransientResult res;
  res.threshold = threshold;
  res.sustain = sustain;
  res.trace = trace;
  const std::size_t n = trace.size();
  for (std::size_t i = 0; i + static_cast<size_t>(sustain) <= n; ++i) {
    bool ok = true;
    for (int k = 0; k < sustain; ++k) ok = ok && trace[i + static_cast<size_t>(k)].f_mean >= threshold;
    if (ok) {
      res.t_star = trace[i].t;
      break;
    }
  }
  return res;
}

struct TransientCell {
  double delta = 0.0, omega_z = 0.0;
  std::optional<double> t_star;
};

/// Per-cell earliest sustained crossing, searching leg times <= t_cap.
inline std::vector<TransientCell> transient_map(const ScanConfig& cfg, const DickeParams& base,
                                                double t_cap, double threshold = 0.9,
                                                int sustain = 3) {
  auto times = cfg.time_window.grid();
  times.erase(std::remove_if(times.begin(), times.end(), [&](double t) { return t > t_cap; }),
              times.end());
  const std::size_t n_cells = cfg.delta_grid.size() * cfg.omega_grid.size();
  std::vector<TransientCell> rows(n_cells);
  parallel_for(n_cells, cfg.jobs, [&](std::size_t i) {
    DickeParams params = base;
    params.delta = cfg.delta_grid[i / cfg.omega_grid.size()];
    params.omega_z = cfg.omega_grid[i % cfg.omega_grid.size()];
    TransientCell& row = rows[i];
    row.delta = params.delta;
    row.omega_z = params.omega_z;
    if (times.empty()) return;
    const CellData cell =
        run_cell(params, {}, times, cfg.n_states, cfg.seed.derive(i), cfg.metric, false);
    row.t_star = find_transient(cell.per_time, threshold, sustain).t_star;
  });
  return rows;
}

// ---------------------------------------------------------------------------
// Reversal-imperfection scan

struct ReversalPoint {
  double eps_delta_frac = 0.0;
  double eps_z_frac = 0.0;
  double f_mean = 0.0;
  double p_mean = 0.0;
};

/// F̄ at fixed leg time t for each fractional mismatch (ε_δ/δ, ε_z/ω_z), with
/// the same state ensemble (cell 0 of the seed) across all points.
inline std::vector<ReversalPoint> reversal_scan(const DickeParams& base, double t,
                                                const std::vector<std::pair<double, double>>& eps_grid,
                                                const ScanConfig& cfg) {
  bool has_baseline = false;
  for (const auto& [fd, fz] : eps_grid) has_baseline = has_baseline || (fd == 0.0 && fz == 0.0);
  if (!has_baseline)
    throw std::invalid_argument("reversal_scan: grid must include the (0,0) baseline");
  std::vector<ReversalPoint> rows(eps_grid.size());
  parallel_for(eps_grid.size(), cfg.jobs, [&](std::size_t i) {
    const auto [fd, fz] = eps_grid[i];
    const ReversalError err{fd * base.delta, fz * base.omega_z};
    const CellData cell =
        run_cell(base, err, {t}, cfg.n_states, cfg.seed.derive(0), cfg.metric, false);
    rows[i] = {fd, fz, cell.f_mean, cell.p_mean};
  });
  return rows;
}

// ---------------------------------------------------------------------------
// Haar benchmark against the analytic fidelity/probability laws

struct HaarBenchRow {
  Index d_b = 0;
  double f_mc = 0.0, f_se = 0.0, f_theory = 0.0;
  double p_mc = 0.0, p_se = 0.0, p_theory = 0.0;
};

namespace detail {

/// Batch-means standard error (10 batches).
inline std::pair<double, double> mean_and_batch_se(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  const int n_batches = 10;
  if (n < static_cast<size_t>(2 * n_batches)) return {mean, 0.0};
  std::vector<double> bm;
  const std::size_t per = n / n_batches;
  for (int b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t k = 0; k < per; ++k) s += xs[static_cast<size_t>(b) * per + k];
    bm.push_back(s / static_cast<double>(per));
  }
  double var = 0.0;
  for (double v : bm) var += (v - mean) * (v - mean);
  var /= (n_batches - 1);
  return {mean, std::sqrt(var / n_batches)};
}

} // namespace detail

/// Monte-Carlo mean SWAP fidelity and postselection probability for
/// Haar-random scramblers and Haar pure inputs, against
/// f = 1/(1 + d_A²/d_B) and p = 1/d_B + 1/d_A². Only the φ-columns of U are
/// ever sampled (a Haar isometry), never the full d_A d_B unitary.
inline std::vector<HaarBenchRow> haar_benchmark(Index d_a, const std::vector<Index>& d_b_list,
                                                int n_draws, Seed seed) {
  if (n_draws < 1) throw std::invalid_argument("haar_benchmark: n_draws < 1");
  std::vector<HaarBenchRow> rows;
  const CompositeSpace out_space({{"A", d_a}, {"C", d_a}});
  for (std::size_t bi = 0; bi < d_b_list.size(); ++bi) {
    const Index d_b = d_b_list[bi];
    const Seed block = seed.derive(bi);
    std::vector<double> fs, ps;
    fs.reserve(static_cast<size_t>(n_draws));
    ps.reserve(static_cast<size_t>(n_draws));
    for (int k = 0; k < n_draws; ++k) {
      Rng rng(block.derive(static_cast<std::uint64_t>(k)));
      const Mat g = haar_isometry_matrix(d_a * d_b, d_a, rng);
      const Mat kernel = kernel_from_columns(g, g, d_b);
      const Vec psi = haar_state_vector(d_a, rng);
      const Vec chi = haar_state_vector(d_a, rng);
      const auto out = outcome_from_kernel(kernel, psi, chi, out_space, false);
      ps.push_back(out.p);
      if (out.postselected) fs.push_back(out.f_swap);
    }
    HaarBenchRow row;
    row.d_b = d_b;
    std::tie(row.f_mc, row.f_se) = detail::mean_and_batch_se(fs);
    std::tie(row.p_mc, row.p_se) = detail::mean_and_batch_se(ps);
    const double da2 = static_cast<double>(d_a * d_a);
    row.f_theory = 1.0 / (1.0 + da2 / static_cast<double>(d_b));
    row.p_theory = 1.0 / static_cast<double>(d_b) + 1.0 / da2;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// General two-gate dimension bound

struct DimensionBoundResult {
  double min_f = std::numeric_limits<double>::quiet_NaN();
  double bound = 0.0;       ///< sqrt((m+1)/(d²+1))
  double ratio_bound = 0.0; ///< (m+1)/(d²+1)
  double max_ratio_mc = 0.0;
  double max_ratio_minus_3se = -std::numeric_limits<double>::infinity();
  long n_skipped = 0; ///< states with postselection below p_floor
};

/// For Haar pairs (U on A⊗B, W on C⊗B) sample Haar states Ψ on A⊗C and
/// evaluate F(Ψ) = |<Ψ|S†K|Ψ>| / sqrt(<Ψ|K†K|Ψ>) with K = <φ|W U|φ>.
/// Reports the minimum over all states and pairs, plus the per-pair
/// Monte-Carlo expectation ratio E|<Ψ|M|Ψ>|² / E<Ψ|K†K|Ψ> against
/// (m+1)/(d²+1).
inline DimensionBoundResult dimension_bound_check(Index d, Index m, int n_pairs,
                                                  int n_states_per_pair, Seed seed) {
  if (d < 1 || m < 1) throw std::invalid_argument("dimension_bound_check: bad dims");
  DimensionBoundResult res;
  res.bound = std::sqrt(static_cast<double>(m + 1) / static_cast<double>(d * d + 1));
  res.ratio_bound = static_cast<double>(m + 1) / static_cast<double>(d * d + 1);
  const Mat s = swap_operator(d);
  for (int pair = 0; pair < n_pairs; ++pair) {
    Rng rng(seed.derive(static_cast<std::uint64_t>(pair)));
    const Mat gu = haar_isometry_matrix(d * m, d, rng);
    const Mat gw = haar_isometry_matrix(d * m, d, rng);
    const Mat k = kernel_from_columns(gu, gw, m);
    const Mat mm = s.adjoint() * k;
    std::vector<double> nums, dens;
    nums.reserve(static_cast<size_t>(n_states_per_pair));
    dens.reserve(static_cast<size_t>(n_states_per_pair));
    for (int i = 0; i < n_states_per_pair; ++i) {
      const Vec psi = haar_state_vector(d * d, rng);
      const double den = (k * psi).squaredNorm();
      const double num = std::norm(psi.dot(mm * psi));
      nums.push_back(num);
      dens.push_back(den);
      if (den < p_floor) {
        ++res.n_skipped;
        continue;
      }
      const double f = std::sqrt(num / den);
      if (std::isnan(res.min_f) || f < res.min_f) res.min_f = f;
    }
    // per-pair expectation ratio with a batch-means error on the ratio
    const int n_batches = 10;
    const std::size_t per = nums.size() / n_batches;
    double num_mean = std::accumulate(nums.begin(), nums.end(), 0.0) / nums.size();
    double den_mean = std::accumulate(dens.begin(), dens.end(), 0.0) / dens.size();
    const double ratio = num_mean / den_mean;
    double se = 0.0;
    if (per >= 2) {
      std::vector<double> batch_ratios;
      for (int b = 0; b < n_batches; ++b) {
        double ns = 0.0, ds2 = 0.0;
        for (std::size_t kk = 0; kk < per; ++kk) {
          ns += nums[static_cast<size_t>(b) * per + kk];
          ds2 += dens[static_cast<size_t>(b) * per + kk];
        }
        batch_ratios.push_back(ns / ds2);
      }
      double var = 0.0;
      for (double v : batch_ratios) var += (v - ratio) * (v - ratio);
      var /= (n_batches - 1);
      se = std::sqrt(var / n_batches);
    }
    res.max_ratio_mc = std::max(res.max_ratio_mc, ratio);
    res.max_ratio_minus_3se = std::max(res.max_ratio_minus_3se, ratio - 3.0 * se);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Rank statistics (for the fidelity/entanglement correlation)

inline std::vector<double> ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> r(xs.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double spearman_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("spearman_correlation: need matched samples");
  const auto rx = ranks(xs), ry = ranks(ys);
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

} // namespace scrambleswap
