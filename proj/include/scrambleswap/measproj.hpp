#pragma once

#include "qcore.hpp"

#include <cmath>
#include <stdexcept>

namespace scrambleswap {

// ---------------------------------------------------------------------------
// Indirect projection of the boson mode onto its reference state via an
// auxiliary measurement-spin ensemble under H = g_M S_M^z b†b for a time t_M.
// The displacement D(-φ) preceding the subroutine is treated as an exact
// relabeling of the Fock reference, so everything here is a weight function
// over occupancies n.

enum class MeasVariant {
  cosine, ///< x-polarized spins: amplitude weight cos^{N_M}(gt n / 2)
  sinc    ///< uniform S_z ladder: amplitude weight sin(gt n (N_M+1)/2) / ((N_M+1) sin(gt n/2))
};

struct MeasConfig {
  MeasVariant variant = MeasVariant::cosine;
  int n_meas_spins = 1; ///< N_M
  double gt = 0.0;      ///< g_M * t_M
  int n_max = 1;        ///< maximum relevant boson occupancy
  double epsilon = 0.0; ///< target leakage

  void validate() const {
    if (n_meas_spins < 1 || n_max < 1) throw std::invalid_argument("MeasConfig: N_M, n_max >= 1");
    if (variant == MeasVariant::cosine) {
      if (!(gt > 0.0 && gt <= M_PI / (n_max + 1) + 1e-12))
        throw std::invalid_argument("MeasConfig: cosine variant needs 0 < gt <= pi/(n_max+1)");
    } else {
      if (std::abs(gt * (n_meas_spins + 1) - 2.0 * M_PI) > 1e-12)
        throw std::invalid_argument("MeasConfig: sinc variant needs gt (N_M+1) = 2 pi");
      if (!(gt * n_max < 2.0 * M_PI))
        throw std::invalid_argument("MeasConfig: sinc variant needs gt n_max < 2 pi");
    }
  }
};

/// Signed amplitude weight multiplying varphi_n after postselecting the
/// measurement spins back onto their initial state. Equals 1 at n = 0.
inline double amplitude_weight(const MeasConfig& cfg, long n) {
  if (n < 0) throw std::invalid_argument("amplitude_weight: n < 0");
  if (n == 0) return 1.0;
  const double x = cfg.gt * static_cast<double>(n) / 2.0;
  if (cfg.variant == MeasVariant::cosine)
    return std::pow(std::cos(x), static_cast<double>(cfg.n_meas_spins));
  const double den = static_cast<double>(cfg.n_meas_spins + 1) * std::sin(x);
  if (std::abs(den) < 1e-300)
    throw std::invalid_argument("amplitude_weight: sinc denominator vanishes (invalid config)");
  return std::sin(static_cast<double>(cfg.n_meas_spins + 1) * x) / den;
}

/// Probability weight (squared amplitude weight), in [0, 1].
inline double projection_weight(const MeasConfig& cfg, long n) {
  const double a = amplitude_weight(cfg, n);
  return a * a;
}

/// Smallest configuration meeting the variant's constraint chain for leakage
/// <= epsilon over occupancies 1..n_max:
///   cosine: gt = pi/(n_max+1), N_M = ceil(log eps / log cos²(gt/2))
///   sinc:   N_M = n_max, gt = 2 pi/(n_max+1) (exact zeros at 1..n_max)
inline MeasConfig required_measurement_spins(double epsilon, int n_max, MeasVariant variant) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("required_measurement_spins: need 0 < epsilon < 1");
  if (n_max < 1) throw std::invalid_argument("required_measurement_spins: n_max < 1");
  MeasConfig cfg;
  cfg.variant = variant;
  cfg.n_max = n_max;
  cfg.epsilon = epsilon;
  if (variant == MeasVariant::cosine) {
    cfg.gt = M_PI / (n_max + 1);
    const double c2 = std::cos(cfg.gt / 2.0) * std::cos(cfg.gt / 2.0);
    cfg.n_meas_spins = static_cast<int>(std::ceil(std::log(epsilon) / std::log(c2)));
  } else {
    cfg.n_meas_spins = n_max;
    cfg.gt = 2.0 * M_PI / (n_max + 1);
  }
  cfg.validate();
  return cfg;
}

struct ProjectionResult {
  Vec out;            ///< weighted boson amplitudes (unnormalized)
  double p_eta = 0.0; ///< success probability of the spin postselection
  double p0 = 0.0;    ///< vacuum weight of the surviving boson state
};

/// Apply the projection weights to boson amplitudes over [0, n_max].
/// Invariant: p_eta >= |varphi_0|².
inline ProjectionResult apply_projection(const Vec& varphi, const MeasConfig& cfg) {
  cfg.validate();
  if (std::abs(varphi.norm() - 1.0) > tol::norm)
    throw std::invalid_argument("apply_projection: input not normalized");
  ProjectionResult res;
  res.out = Vec(varphi.size());
  for (Index n = 0; n < varphi.size(); ++n) res.out(n) = varphi(n) * amplitude_weight(cfg, n);
  res.p_eta = res.out.squaredNorm();
  if (res.p_eta < p_floor) throw std::runtime_error("apply_projection: P_eta below p_floor");
  res.p0 = std::norm(res.out(0)) / res.p_eta;
  return res;
}

/// Oracle: evolve the joint spin configuration sum explicitly and project onto
/// the initial spin state. Exploits permutation symmetry, so the cosine
/// variant sums binomially-weighted S_z sectors of the x-polarized state and
/// the sinc variant the N_M+1 uniform ladder levels. Must agree with
/// apply_projection to 1e-12.
inline ProjectionResult brute_force_projection(const Vec& varphi, const MeasConfig& cfg) {
  cfg.validate();
  if (cfg.n_meas_spins > 20 || varphi.size() - 1 > 50)
    throw std::invalid_argument("brute_force_projection: size limits exceeded (N_M <= 20, n_max <= 50)");
  if (std::abs(varphi.norm() - 1.0) > tol::norm)
    throw std::invalid_argument("brute_force_projection: input not normalized");

  const int nm = cfg.n_meas_spins;
  // sector weights |<s|init>|²: binomial/2^N for cosine, 1/(N_M+1) for sinc
  std::vector<double> w(static_cast<size_t>(nm) + 1);
  if (cfg.variant == MeasVariant::cosine) {
    double binom = 1.0; // C(nm, 0)
    const double scale = std::pow(2.0, -nm);
    for (int s = 0; s <= nm; ++s) {
      w[static_cast<size_t>(s)] = binom * scale;
      binom = binom * static_cast<double>(nm - s) / static_cast<double>(s + 1);
    }
  } else {
    for (int s = 0; s <= nm; ++s) w[static_cast<size_t>(s)] = 1.0 / (nm + 1);
  }

  ProjectionResult res;
  res.out = Vec(varphi.size());
  for (Index n = 0; n < varphi.size(); ++n) {
    // <init| e^{-i gt n S_z} |init> with S_z|s> = (s - N_M/2)|s>
    cplx amp(0.0, 0.0);
    for (int s = 0; s <= nm; ++s) {
      const double phase = -cfg.gt * static_cast<double>(n) * (s - 0.5 * nm);
      amp += w[static_cast<size_t>(s)] * std::polar(1.0, phase);
    }
    res.out(n) = varphi(n) * amp;
  }
  res.p_eta = res.out.squaredNorm();
  if (res.p_eta < p_floor) throw std::runtime_error("brute_force_projection: P_eta below p_floor");
  res.p0 = std::norm(res.out(0)) / res.p_eta;
  return res;
}

} // namespace scrambleswap
