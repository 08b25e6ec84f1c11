#pragma once

#include "ensembles.hpp"
#include "protocol.hpp"
#include "qcore.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

namespace scrambleswap {

// ---------------------------------------------------------------------------
// Collective spin operators

struct SpinOps {
  Mat sx, sy, sz;
};

/// Spin-S = N/2 representation on the (N+1)-dimensional collective manifold,
/// S_z eigenbasis ascending: basis index j corresponds to m = -N/2 + j.
inline SpinOps collective_spin_ops(int n_spins) {
  if (n_spins < 1) throw std::invalid_argument("collective_spin_ops: N < 1");
  const Index d = n_spins + 1;
  const double s = 0.5 * n_spins;
  Mat sp = Mat::Zero(d, d); // raising operator
  for (Index j = 0; j + 1 < d; ++j) {
    const double m = -s + static_cast<double>(j);
    sp(j + 1, j) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
  }
  SpinOps ops;
  ops.sx = (sp + Mat(sp.adjoint())) / 2.0;
  ops.sy = (sp - Mat(sp.adjoint())) / cplx(0.0, 2.0);
  ops.sz = Mat::Zero(d, d);
  for (Index j = 0; j < d; ++j) ops.sz(j, j) = -s + static_cast<double>(j);
  return ops;
}

/// Truncated boson lowering operator on the window: b|n> = sqrt(n)|n-1> with
/// the true occupation numbers, couplings out of the window dropped.
inline Mat boson_lowering(const FockWindow& w) {
  w.validate();
  const Index d = w.dim();
  Mat b = Mat::Zero(d, d);
  for (Index i = 1; i < d; ++i) b(i - 1, i) = std::sqrt(static_cast<double>(w.n_min + i));
  return b;
}

// ---------------------------------------------------------------------------
// Dicke model

/// Dicke Hamiltonian parameters on the collective spin ⊗ truncated boson space.
/// All rates are in units of g (times quoted as g·t); alpha is the real
/// coherent displacement of the boson reference state.
struct DickeParams {
  int n_spins = 1;     ///< N; d_A = N+1
  double g = 1.0;      ///< coupling (unit of inverse time)
  double delta = 0.0;  ///< boson detuning
  double omega_z = 0.0;///< spin splitting
  double alpha = 0.0;  ///< coherent displacement
  FockWindow window;
  double tail_budget = default_tail_budget;

  static DickeParams make(int n_spins, double delta, double omega_z, double alpha,
                          double window_sigmas = 4.0) {
    DickeParams p;
    p.n_spins = n_spins;
    p.delta = delta;
    p.omega_z = omega_z;
    p.alpha = alpha;
    p.window = FockWindow::centered(alpha, window_sigmas);
    return p;
  }

  Index spin_dim() const { return n_spins + 1; }
  Index boson_dim() const { return window.dim(); }
};

/// Parameter mismatches of the backward leg, stored as absolute shifts.
struct ReversalError {
  double eps_delta = 0.0;
  double eps_z = 0.0;
};

/// H = omega_z S_z + delta b†b - (2g/sqrt(N)) S_x (b + b†) on [spin("A"),
/// boson("B")], with the boson number operator offset to the window
/// (the global phase delta*n_min is dropped).
inline QOperator build_dicke_hamiltonian(const DickeParams& p, const ReversalError& err = {}) {
  if (p.n_spins < 1) throw std::invalid_argument("build_dicke_hamiltonian: N < 1");
  coherent_state(p.alpha, p.window, p.tail_budget); // enforces the tail budget
  const auto spin = collective_spin_ops(p.n_spins);
  const Index ds = p.spin_dim(), db = p.boson_dim();
  const Mat b = boson_lowering(p.window);
  const Mat x = b + Mat(b.adjoint());
  Mat n_rel = Mat::Zero(db, db);
  for (Index i = 0; i < db; ++i) n_rel(i, i) = static_cast<double>(i);

  const double delta = p.delta + err.eps_delta;
  const double omega_z = p.omega_z + err.eps_z;
  Mat h = omega_z * kron(spin.sz, Mat::Identity(db, db)) +
          delta * kron(Mat::Identity(ds, ds), n_rel) -
          (2.0 * p.g / std::sqrt(static_cast<double>(p.n_spins))) * kron(spin.sx, x);
  CompositeSpace space({{"A", ds}, {"B", db}});
  return QOperator::trusted(std::move(space), std::move(h), OpKind::hermitian);
}

// ---------------------------------------------------------------------------
// Rényi entropy

/// Normalized second Rényi entropy -log_{d_A} Tr(rho²) in [0, 1].
inline double renyi2_from_purity(double purity_value, Index d_a) {
  if (purity_value <= 0.0 || purity_value > 1.0 + tol::psd)
    throw std::invalid_argument("renyi2: purity outside (0, 1]");
  return -std::log(std::min(1.0, purity_value)) / std::log(static_cast<double>(d_a));
}

inline double renyi2_entropy(const QOperator& rho_a, Index d_a) {
  return renyi2_from_purity(purity(rho_a), d_a);
}

/// Ensemble variant: average the purity first, then take the log.
inline double renyi2_from_mean_purity(double mean_purity, Index d_a) {
  return renyi2_from_purity(mean_purity, d_a);
}

// ---------------------------------------------------------------------------
// Physical protocol run
//
// Forward leg: U_AB(t) = e^{-i H(delta, omega_z) t} on A⊗B.
// Backward leg: U†_rev = e^{+i H(delta+eps_delta, omega_z+eps_z) t} on C⊗B.
// Projection of B onto the same truncated coherent reference |φ>.
// Every time/state is served by one eigendecomposition per leg.

class DickeProtocol {
public:
  DickeProtocol(const DickeParams& params, const ReversalError& err = {})
      : params_(params),
        phi_(coherent_state(params.alpha, params.window, params.tail_budget)),
        fwd_(std::make_shared<HermitianPropagator>(build_dicke_hamiltonian(params).matrix())) {
    // ideal reversal shares the forward leg's eigendecomposition
    rev_ = (err.eps_delta == 0.0 && err.eps_z == 0.0)
               ? fwd_
               : std::make_shared<HermitianPropagator>(
                     build_dicke_hamiltonian(params, err).matrix());
    const Mat iphi = identity_phi();
    fwd_cols0_ = fwd_->eigenvectors().adjoint() * iphi;
    rev_cols0_ = (rev_ == fwd_) ? fwd_cols0_ : Mat(rev_->eigenvectors().adjoint() * iphi);
  }

  const DickeParams& params() const { return params_; }
  const Vec& phi() const { return phi_.amplitudes; }
  double tail_mass() const { return phi_.tail_mass; }
  Index spin_dim() const { return params_.spin_dim(); }

  /// U_AB(t)(I⊗φ): forward-evolved φ-columns (also the forward AB states:
  /// U(t)|ψ φ> = columns · ψ).
  Mat forward_columns(double t_leg) const { return fwd_->apply_prerotated(t_leg, fwd_cols0_); }

  /// W†(I⊗φ) = e^{-i H_rev t}(I⊗φ) for the backward-leg gate W = e^{+i H_rev t}.
  Mat reverse_columns_dag(double t_leg) const { return rev_->apply_prerotated(t_leg, rev_cols0_); }

  /// Postselected kernel <φ| e^{+i H_rev t} e^{-i H_fwd t} |φ> on A⊗C.
  Mat kernel(double t_leg) const {
    return kernel_from_columns(forward_columns(t_leg), reverse_columns_dag(t_leg),
                               params_.boson_dim());
  }

  ProtocolOutcome run(const Vec& psi_a, const Vec& chi_c, double t_leg,
                      bool with_uhlmann = false) const {
    return outcome_from_kernel(kernel(t_leg), psi_a, chi_c, out_space(), with_uhlmann);
  }

  ProtocolOutcome run(const Mat& rho_a, const Mat& rho_c, double t_leg,
                      bool with_uhlmann = false) const {
    return outcome_from_kernel(kernel(t_leg), rho_a, rho_c, out_space(), with_uhlmann);
  }

  /// Purity of the reduced spin state after the forward leg, for a pure spin
  /// input; cols = forward_columns(t).
  double forward_spin_purity(const Mat& cols, const Vec& psi_a) const {
    const Vec v = cols * psi_a;
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
        v.data(), params_.spin_dim(), params_.boson_dim());
    const Mat rho_a = m * m.adjoint();
    return rho_a.squaredNorm();
  }

  CompositeSpace out_space() const {
    return CompositeSpace({{"A", params_.spin_dim()}, {"C", params_.spin_dim()}});
  }

private:
  Mat identity_phi() const {
    const Index ds = params_.spin_dim(), db = params_.boson_dim();
    Mat iphi = Mat::Zero(ds * db, ds);
    for (Index a = 0; a < ds; ++a) iphi.block(a * db, a, db, 1) = phi_.amplitudes;
    return iphi;
  }

  DickeParams params_;
  CoherentState phi_;
  std::shared_ptr<HermitianPropagator> fwd_, rev_;
  Mat fwd_cols0_, rev_cols0_;
};

/// One-shot physical protocol run (pure inputs). t_leg is the duration of each
/// leg; the total protocol duration is 2 t_leg.
inline ProtocolOutcome dicke_protocol_run(const DickeParams& params, const Vec& psi_a,
                                          const Vec& chi_c, double t_leg,
                                          const ReversalError& err = {},
                                          bool with_uhlmann = false) {
  return DickeProtocol(params, err).run(psi_a, chi_c, t_leg, with_uhlmann);
}

inline ProtocolOutcome dicke_protocol_run(const DickeParams& params, const Mat& rho_a,
                                          const Mat& rho_c, double t_leg,
                                          const ReversalError& err = {},
                                          bool with_uhlmann = false) {
  return DickeProtocol(params, err).run(rho_a, rho_c, t_leg, with_uhlmann);
}

} // namespace scrambleswap
