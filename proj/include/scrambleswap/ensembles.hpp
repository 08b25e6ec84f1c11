#pragma once

#include "qcore.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace scrambleswap {

inline constexpr double default_tail_budget = 1e-4;

// ---------------------------------------------------------------------------
// Haar / CUE sampling

/// d x d complex Ginibre matrix (iid standard complex gaussians, column-major
/// fill order fixed for reproducibility).
inline Mat ginibre_matrix(Index rows, Index cols, Rng& rng) {
  Mat a(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) a(i, j) = rng.normal_cplx();
  return a;
}

/// First k columns of a CUE-distributed unitary: Ginibre, thin QR, then each
/// column multiplied by r_ii/|r_ii| to fix the measure (Mezzadri's recipe).
inline Mat haar_isometry_matrix(Index d, Index k, Rng& rng) {
  if (d < 1 || k < 1 || k > d) throw std::invalid_argument("haar_isometry: bad dims");
  Mat a = ginibre_matrix(d, k, rng);
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(d, k);
  const auto rdiag = qr.matrixQR().diagonal().head(k);
  for (Index j = 0; j < k; ++j) {
    const double m = std::abs(rdiag(j));
    q.col(j) *= (m > 0.0) ? rdiag(j) / m : cplx(1.0, 0.0);
  }
  return q;
}

inline Mat haar_unitary_matrix(Index d, Rng& rng) { return haar_isometry_matrix(d, d, rng); }

inline Mat haar_isometry(Index d, Index k, Seed seed) {
  Rng rng(seed);
  return haar_isometry_matrix(d, k, rng);
}

/// CUE-distributed unitary as a validated QOperator on a single factor "U".
inline QOperator haar_unitary(Index d, Seed seed) {
  Rng rng(seed);
  return QOperator(CompositeSpace::single("U", d), haar_unitary_matrix(d, rng), OpKind::unitary);
}

/// Fubini-Study-uniform pure state: draw x in R^{2d} iid N(0,1), normalize,
/// pair entries as c_k = x_k + i x_{k+d}.
inline Vec haar_state_vector(Index d, Rng& rng) {
  if (d < 1) throw std::invalid_argument("haar_state: d = 0");
  std::vector<double> x(static_cast<size_t>(2 * d));
  double nrm2 = 0.0;
  for (auto& v : x) {
    v = rng.normal();
    nrm2 += v * v;
  }
  const double inv = 1.0 / std::sqrt(nrm2);
  Vec c(d);
  for (Index k = 0; k < d; ++k)
    c(k) = cplx(x[static_cast<size_t>(k)] * inv, x[static_cast<size_t>(k + d)] * inv);
  return c;
}

inline QState haar_state(Index d, Seed seed) {
  Rng rng(seed);
  return QState(CompositeSpace::single("A", d), haar_state_vector(d, rng));
}

// ---------------------------------------------------------------------------
// Truncated coherent states

/// Fock occupancy window [n_min, n_max].
struct FockWindow {
  long n_min = 0;
  long n_max = 0;

  long dim() const { return n_max - n_min + 1; }

  void validate() const {
    if (n_min < 0 || n_max <= n_min) throw std::invalid_argument("FockWindow: need 0 <= n_min < n_max");
  }

  /// Window centered at floor(|alpha|^2) with half-width ceil(sigmas*|alpha| + 5)
  /// (the Poisson standard deviation is |alpha|; the additive cushion covers the
  /// skewed tails at low occupancy), clipped at n = 0.
  static FockWindow centered(cplx alpha, double sigmas = 4.0) {
    const double mu = std::norm(alpha);
    const long center = static_cast<long>(std::floor(mu));
    const long half = std::max<long>(1, static_cast<long>(std::ceil(sigmas * std::abs(alpha) + 5.0)));
    return FockWindow{std::max<long>(0, center - half), center + half};
  }
};

struct TailBudgetError : std::runtime_error {
  TailBudgetError(double tail_mass_, double budget_, FockWindow suggested_)
      : std::runtime_error("coherent state tail mass " + std::to_string(tail_mass_) +
                           " exceeds budget " + std::to_string(budget_) +
                           "; suggested window [" + std::to_string(suggested_.n_min) + ", " +
                           std::to_string(suggested_.n_max) + "]"),
        tail_mass(tail_mass_), budget(budget_), suggested(suggested_) {}
  double tail_mass;
  double budget;
  FockWindow suggested;
};

namespace detail {

/// log of the Poisson pmf e^{-lambda} lambda^n / n!
inline double log_poisson_pmf(double lambda, long n) {
  if (lambda == 0.0) return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return -lambda + static_cast<double>(n) * std::log(lambda) - std::lgamma(static_cast<double>(n) + 1.0);
}

} // namespace detail

/// Poisson(|alpha|^2) mass outside the window, each term evaluated in log space.
inline double coherent_tail_mass(cplx alpha, const FockWindow& w) {
  const double lambda = std::norm(alpha);
  double inside = 0.0;
  for (long n = w.n_min; n <= w.n_max; ++n) inside += std::exp(detail::log_poisson_pmf(lambda, n));
  double below = 0.0;
  for (long n = 0; n < w.n_min; ++n) below += std::exp(detail::log_poisson_pmf(lambda, n));
  const double tail = (1.0 - inside - below) + below; // = 1 - inside
  return std::max(0.0, tail);
}

struct CoherentState {
  Vec amplitudes; ///< renormalized over the window
  double tail_mass = 0.0;
};

/// Coherent state |alpha> projected onto the window via its exact number-state
/// amplitudes (log-factorial evaluation) and renormalized. Returns the exact
/// discarded Poisson tail mass; throws TailBudgetError if it exceeds budget.
inline CoherentState coherent_state(cplx alpha, const FockWindow& w,
                                    double tail_budget = default_tail_budget) {
  w.validate();
  const double tail = coherent_tail_mass(alpha, w);
  if (tail > tail_budget) {
    FockWindow sug = w;
    const long step = std::max<long>(1, static_cast<long>(std::ceil(std::abs(alpha))));
    while (coherent_tail_mass(alpha, sug) > tail_budget) {
      sug.n_min = std::max<long>(0, sug.n_min - step);
      sug.n_max += step;
    }
    throw TailBudgetError(tail, tail_budget, sug);
  }

  const double lambda = std::norm(alpha);
  const double phase = std::arg(alpha);
  Vec amp(w.dim());
  for (long n = w.n_min; n <= w.n_max; ++n) {
    const double logmag = 0.5 * detail::log_poisson_pmf(lambda, n);
    amp(n - w.n_min) = std::polar(std::exp(logmag), phase * static_cast<double>(n));
  }
  amp /= amp.norm();
  return {std::move(amp), tail};
}

// ---------------------------------------------------------------------------
// Second-moment Haar oracle

/// Moment pattern for integrals of products of matrix elements over the CUE:
/// u lists the (i, j) of each U_{ij} factor, uconj the (i', j') of each
/// conj(U_{i'j'}) factor (i.e. U†_{j'i'}).
struct MomentPattern {
  std::vector<std::pair<int, int>> u;
  std::vector<std::pair<int, int>> uconj;
};

/// Exact Haar integral of the pattern for moments of order <= 2:
///   ∫ U_{i1 j1} U†_{j1' i1'}           = δ_{i1 i1'} δ_{j1 j1'} / d
///   ∫ U_{i1 j1} U_{i2 j2} U†... U†...  = [δδδδ + δδδδ]/(d²-1) - [δδδδ + δδδδ]/(d(d²-1))
/// Unbalanced U/U† counts integrate to zero.
inline double weingarten2(const MomentPattern& p, Index d) {
  if (d < 1) throw std::invalid_argument("weingarten2: d < 1");
  if (p.u.size() != p.uconj.size()) return 0.0;
  const size_t order = p.u.size();
  if (order == 0) return 1.0;
  auto dl = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  if (order == 1) {
    const auto [i1, j1] = p.u[0];
    const auto [i1p, j1p] = p.uconj[0];
    return dl(i1, i1p) * dl(j1, j1p) / static_cast<double>(d);
  }
  if (order == 2) {
    const auto [i1, j1] = p.u[0];
    const auto [i2, j2] = p.u[1];
    const auto [i1p, j1p] = p.uconj[0];
    const auto [i2p, j2p] = p.uconj[1];
    const double dd = static_cast<double>(d);
    const double a = 1.0 / (dd * dd - 1.0);
    const double b = 1.0 / (dd * (dd * dd - 1.0));
    return a * (dl(i1, i1p) * dl(i2, i2p) * dl(j1, j1p) * dl(j2, j2p) +
                dl(i1, i2p) * dl(i2, i1p) * dl(j1, j2p) * dl(j2, j1p)) -
           b * (dl(i1, i1p) * dl(i2, i2p) * dl(j1, j2p) * dl(j2, j1p) +
                dl(i1, i2p) * dl(i2, i1p) * dl(j1, j1p) * dl(j2, j2p));
  }
  throw std::invalid_argument("weingarten2: moment order > 2 unsupported");
}

} // namespace scrambleswap
