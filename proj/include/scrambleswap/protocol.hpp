#pragma once

#include "operator_basis.hpp"
#include "qcore.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace scrambleswap {

// ---------------------------------------------------------------------------
// SWAP operator and fidelity metrics

/// SWAP exchanging two factors of equal dimension d: S|a c> = |c a>.
inline Mat swap_operator(Index d) {
  Mat s = Mat::Zero(d * d, d * d);
  for (Index a = 0; a < d; ++a)
    for (Index c = 0; c < d; ++c) s(a * d + c, c * d + a) = 1.0;
  return s;
}

/// Normalized SWAP overlap between the protocol output on A⊗C and the ideally
/// swapped input: Tr[rho_out SWAP(rho_in)] / sqrt(Tr rho_out² Tr rho_in²).
/// Scale-invariant in both arguments; both must be hermitian.
inline double swap_fidelity(const Mat& rho_out, const Mat& rho_in, Index d_a) {
  const Mat s = swap_operator(d_a);
  const double den2 = rho_out.squaredNorm() * rho_in.squaredNorm();
  if (den2 <= 0.0) throw std::invalid_argument("swap_fidelity: zero purity denominator");
  const double num = (rho_out * (s * rho_in * s)).trace().real();
  return num / std::sqrt(den2);
}

inline double swap_fidelity(const QOperator& rho_out, const QOperator& rho_in) {
  if (rho_out.space().total_dim() != rho_in.space().total_dim() ||
      rho_out.space().n_factors() != 2)
    throw std::invalid_argument("swap_fidelity: expected matching two-factor spaces");
  const Index da = rho_out.space().factors()[0].dim;
  if (rho_out.space().factors()[1].dim != da)
    throw std::invalid_argument("swap_fidelity: factors must have equal dimension");
  return swap_fidelity(rho_out.matrix(), rho_in.matrix(), da);
}

/// Uhlmann fidelity (Tr sqrt(sqrt(sigma) rho sqrt(sigma)))², via hermitian
/// eigendecompositions, clamped to [0, 1]. Eigenvalues at roundoff scale
/// relative to the largest are zeroed before the square roots; without that
/// the sqrt amplifies O(1e-17) noise to O(1e-9).
inline double uhlmann_fidelity(const Mat& rho, const Mat& sigma) {
  auto clamped_sqrt = [](const Eigen::VectorXd& ev) {
    const double floor_at = std::max(ev.cwiseAbs().maxCoeff(), 1.0) * 1e-14;
    Eigen::VectorXd out = ev;
    for (Index k = 0; k < out.size(); ++k) out(k) = out(k) > floor_at ? std::sqrt(out(k)) : 0.0;
    return out;
  };
  Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
  if (es.eigenvalues().minCoeff() < -tol::psd)
    throw std::invalid_argument("uhlmann_fidelity: sigma has negative eigenvalue");
  const Mat sq = es.eigenvectors() * clamped_sqrt(es.eigenvalues()).cast<cplx>().asDiagonal() *
                 es.eigenvectors().adjoint();
  Mat m = sq * rho * sq;
  m = (m + Mat(m.adjoint())) / 2.0;
  Eigen::SelfAdjointEigenSolver<Mat> es2(m, Eigen::EigenvaluesOnly);
  if (es2.eigenvalues().minCoeff() < -tol::psd)
    throw std::invalid_argument("uhlmann_fidelity: rho has negative direction");
  const double root_sum = clamped_sqrt(es2.eigenvalues()).sum();
  return std::min(1.0, std::max(0.0, root_sum * root_sum));
}

inline double uhlmann_fidelity(const QOperator& rho, const QOperator& sigma) {
  if (rho.space().total_dim() != sigma.space().total_dim())
    throw std::invalid_argument("uhlmann_fidelity: dim mismatch");
  return uhlmann_fidelity(rho.matrix(), sigma.matrix());
}

// ---------------------------------------------------------------------------
// Postselected kernel
//
// The protocol output on A⊗C after projecting B onto |φ> is fully determined
// by the action of each gate on the d_A vectors |j>⊗|φ>. With
//   G  = U_AB (I⊗φ)      [(d_A d_B) × d_A]
//   Gw = W†   (I⊗φ)      [(d_C d_B) × d_C]   for the second-leg gate W_CB
// the kernel K = <φ|_B W_CB U_AB |φ>_B on A⊗C has elements
//   K[(a'c'),(ac)] = Σ_b G[(a'b), a] · conj(Gw[(c b), c']).
// For pure product inputs the postselected state is K(ψ⊗χ) with p = |K(ψ⊗χ)|²;
// since B starts pure, mixed inputs reduce to rho_out ∝ K (ρ_A⊗ρ_C) K†.

/// U (I⊗φ): the φ-columns of a gate on X⊗B, X first factor.
inline Mat phi_columns(const Mat& u, const Vec& phi) {
  const Index db = phi.size();
  if (u.rows() != u.cols() || u.rows() % db != 0)
    throw std::invalid_argument("phi_columns: dim mismatch");
  const Index dx = u.rows() / db;
  Mat g(u.rows(), dx);
  for (Index a = 0; a < dx; ++a) g.col(a) = u.middleCols(a * db, db) * phi;
  return g;
}

/// Kernel on A⊗C from the two legs' φ-columns.
inline Mat kernel_from_columns(const Mat& g_first, const Mat& g_second_dag, Index d_b) {
  const Index da = g_first.cols();
  const Index dc = g_second_dag.cols();
  if (g_first.rows() != da * d_b || g_second_dag.rows() != dc * d_b)
    throw std::invalid_argument("kernel_from_columns: dim mismatch");
  Mat k = Mat::Zero(da * dc, da * dc);
  for (Index ap = 0; ap < da; ++ap)
    for (Index cp = 0; cp < dc; ++cp)
      for (Index a = 0; a < da; ++a)
        for (Index c = 0; c < dc; ++c) {
          cplx acc(0.0, 0.0);
          for (Index b = 0; b < d_b; ++b)
            acc += g_first(ap * d_b + b, a) * std::conj(g_second_dag(c * d_b + b, cp));
          k(ap * dc + cp, a * dc + c) = acc;
        }
  return k;
}

/// <φ| U†_CB U_AB |φ> for the standard protocol (second leg is the inverse of
/// the first, relabeled A -> C by the implicit isomorphism).
inline Mat protocol_kernel(const Mat& u_ab, const Vec& phi) {
  const Mat g = phi_columns(u_ab, phi);
  return kernel_from_columns(g, g, phi.size());
}

/// <φ| W_CB U_AB |φ> for independent gates (general two-gate circuit).
inline Mat two_gate_kernel(const Mat& u_ab, const Mat& w_cb, const Vec& phi) {
  const Mat gu = phi_columns(u_ab, phi);
  const Mat gw = phi_columns(w_cb.adjoint(), phi);
  return kernel_from_columns(gu, gw, phi.size());
}

// ---------------------------------------------------------------------------
// Protocol outcome

struct ProtocolOutcome {
  bool postselected = false; ///< false: p fell below p_floor, no output state
  double p = 0.0;            ///< postselection probability
  std::optional<QOperator> rho_out_ac; ///< normalized output on A⊗C
  double f_swap = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> f_uhlmann;
};

namespace detail {

inline CompositeSpace out_space_ac(const std::string& la, const std::string& lc, Index d) {
  std::string lc2 = (lc == la) ? lc + "'" : lc;
  return CompositeSpace({{la, d}, {lc2, d}});
}

} // namespace detail

/// Outcome from a kernel and pure product inputs.
inline ProtocolOutcome outcome_from_kernel(const Mat& k, const Vec& psi_a, const Vec& chi_c,
                                           const CompositeSpace& out_space,
                                           bool with_uhlmann = true) {
  const Vec in = kron(psi_a, chi_c);
  const Vec v = k * in;
  ProtocolOutcome out;
  out.p = v.squaredNorm();
  if (out.p < p_floor) return out;
  out.postselected = true;
  const Vec vn = v / std::sqrt(out.p);
  const Vec swapped_in = kron(chi_c, psi_a);
  const double amp2 = std::norm(swapped_in.dot(vn));
  out.f_swap = amp2;
  // Uhlmann fidelity against the swapped input coincides with the SWAP overlap
  // on pure states.
  if (with_uhlmann) out.f_uhlmann = amp2;
  out.rho_out_ac = QOperator::trusted(out_space, vn * vn.adjoint(), OpKind::density);
  return out;
}

/// Outcome from a kernel and (possibly mixed) density inputs.
inline ProtocolOutcome outcome_from_kernel(const Mat& k, const Mat& rho_a, const Mat& rho_c,
                                           const CompositeSpace& out_space,
                                           bool with_uhlmann = true) {
  const Mat rho_in = kron(rho_a, rho_c);
  const Mat raw = k * rho_in * k.adjoint();
  ProtocolOutcome out;
  out.p = raw.trace().real();
  if (out.p < p_floor) return out;
  out.postselected = true;
  const Mat rho_out = raw / out.p;
  const Index da = rho_a.rows();
  out.f_swap = swap_fidelity(rho_out, rho_in, da);
  if (with_uhlmann) {
    const Mat s = swap_operator(da);
    out.f_uhlmann = uhlmann_fidelity(rho_out, s * rho_in * s);
  }
  out.rho_out_ac = QOperator::trusted(out_space, rho_out, OpKind::density);
  return out;
}

namespace detail {

inline void check_protocol_args(const QOperator& u_ab, const QState& phi_b, Index d_a_in) {
  if (u_ab.kind() != OpKind::unitary)
    throw std::invalid_argument("run_protocol: U must be unitary kind");
  if (u_ab.space().n_factors() != 2)
    throw std::invalid_argument("run_protocol: U must act on two factors");
  const Index db = u_ab.space().factors()[1].dim;
  if (phi_b.space().total_dim() != db)
    throw std::invalid_argument("run_protocol: phi dimension mismatch");
  if (u_ab.space().factors()[0].dim != d_a_in)
    throw std::invalid_argument("run_protocol: input dimension must match U's first factor");
}

} // namespace detail

/// Run the postselected SWAP circuit on pure inputs:
/// (<φ|_B U†_CB U_AB |φ>_B) |ψ>_A |χ>_C, projected on |φ>_B.
inline ProtocolOutcome run_protocol(const QOperator& u_ab, const QState& phi_b,
                                    const QState& psi_a, const QState& chi_c,
                                    bool with_uhlmann = true) {
  const Index da = psi_a.space().total_dim();
  if (chi_c.space().total_dim() != da)
    throw std::invalid_argument("run_protocol: dim(A) != dim(C)");
  detail::check_protocol_args(u_ab, phi_b, da);
  const Mat k = protocol_kernel(u_ab.matrix(), phi_b.amplitudes());
  const auto space = detail::out_space_ac(psi_a.space().factors()[0].label,
                                          chi_c.space().factors()[0].label, da);
  return outcome_from_kernel(k, psi_a.amplitudes(), chi_c.amplitudes(), space, with_uhlmann);
}

/// Density-input variant.
inline ProtocolOutcome run_protocol(const QOperator& u_ab, const QState& phi_b,
                                    const QOperator& rho_a, const QOperator& rho_c,
                                    bool with_uhlmann = true) {
  const Index da = rho_a.space().total_dim();
  if (rho_c.space().total_dim() != da)
    throw std::invalid_argument("run_protocol: dim(A) != dim(C)");
  if (rho_a.kind() != OpKind::density || rho_c.kind() != OpKind::density)
    throw std::invalid_argument("run_protocol: inputs must be density kind");
  detail::check_protocol_args(u_ab, phi_b, da);
  const Mat k = protocol_kernel(u_ab.matrix(), phi_b.amplitudes());
  const auto space = detail::out_space_ac(rho_a.space().factors()[0].label,
                                          rho_c.space().factors()[0].label, da);
  return outcome_from_kernel(k, rho_a.matrix(), rho_c.matrix(), space, with_uhlmann);
}

// ---------------------------------------------------------------------------
// Encoder / reverse-decoder / decoder maps
//
// Everything below works with the dB×dA row blocks B_a of G = U(I⊗φ):
//   M^e(O)  = Tr_A(U [O⊗φφ] U†)          = Σ_a     B_a O B_a†
//   M^d(O)  = Tr_A(U [O⊗φφ] U† (γ†⊗I))   = Σ_{aa'} conj(γ[a,a']) B_a O B_a'†
//   M^d*(O) = <φ| U† (γ⊗O) U |φ>         = Σ_{aa'} γ[a,a'] B_a† O B_a'

namespace detail {

inline std::vector<Mat> row_blocks(const Mat& g, Index d_b) {
  const Index da = g.cols();
  std::vector<Mat> blocks;
  blocks.reserve(static_cast<size_t>(da));
  for (Index a = 0; a < da; ++a) blocks.push_back(g.block(a * d_b, 0, d_b, da));
  return blocks;
}

} // namespace detail

inline Mat encoder_map(const Mat& u_ab, const Vec& phi, const Mat& o_a) {
  const Index db = phi.size();
  const auto blocks = detail::row_blocks(phi_columns(u_ab, phi), db);
  Mat out = Mat::Zero(db, db);
  for (const auto& b : blocks) out += b * o_a * b.adjoint();
  return out;
}

inline Mat reverse_decoder_map(const Mat& u_ab, const Vec& phi, const Mat& gamma_a,
                               const Mat& o_a) {
  const Index db = phi.size();
  const auto blocks = detail::row_blocks(phi_columns(u_ab, phi), db);
  const Index da = gamma_a.rows();
  Mat out = Mat::Zero(db, db);
  for (Index a = 0; a < da; ++a)
    for (Index ap = 0; ap < da; ++ap)
      out += std::conj(gamma_a(a, ap)) * blocks[static_cast<size_t>(a)] * o_a *
             blocks[static_cast<size_t>(ap)].adjoint();
  return out;
}

inline Mat decoder_map(const Mat& u_ab, const Vec& phi, const Mat& gamma_c, const Mat& o_b) {
  const Index db = phi.size();
  const auto blocks = detail::row_blocks(phi_columns(u_ab, phi), db);
  const Index da = gamma_c.rows();
  Mat out = Mat::Zero(da, da);
  for (Index a = 0; a < da; ++a)
    for (Index ap = 0; ap < da; ++ap)
      out += gamma_c(a, ap) * blocks[static_cast<size_t>(a)].adjoint() * o_b *
             blocks[static_cast<size_t>(ap)];
  return out;
}

inline QOperator encoder_map(const QOperator& u_ab, const QState& phi_b, const QOperator& o_a) {
  detail::check_protocol_args(u_ab, phi_b, o_a.space().total_dim());
  Mat out = encoder_map(u_ab.matrix(), phi_b.amplitudes(), o_a.matrix());
  return QOperator::trusted(phi_b.space(), std::move(out), OpKind::general);
}

inline QOperator reverse_decoder_map(const QOperator& u_ab, const QState& phi_b,
                                     const QOperator& gamma_a, const QOperator& o_a) {
  detail::check_protocol_args(u_ab, phi_b, o_a.space().total_dim());
  Mat out = reverse_decoder_map(u_ab.matrix(), phi_b.amplitudes(), gamma_a.matrix(), o_a.matrix());
  return QOperator::trusted(phi_b.space(), std::move(out), OpKind::general);
}

// ---------------------------------------------------------------------------
// A -> C recovery pipeline

struct RecoveryResult {
  bool postselected = false;
  double p = 0.0;
  Mat rho_c_out; ///< unnormalized decoder(encoder(rho_A))
  double f_ac = std::numeric_limits<double>::quiet_NaN();
};

/// rho_C_out = M^d*(M^e(rho_A)) with the supplied initial state gamma_C of C;
/// p = Tr rho_C_out; f_ac is the normalized-overlap fidelity against the input
/// carried over by the A<->C isomorphism (scale-invariant in rho_C_out).
inline RecoveryResult a_to_c_recovery(const Mat& u_ab, const Vec& phi, const Mat& rho_a,
                                      const Mat& gamma_c) {
  RecoveryResult res;
  res.rho_c_out = decoder_map(u_ab, phi, gamma_c, encoder_map(u_ab, phi, rho_a));
  res.p = res.rho_c_out.trace().real();
  if (res.p < p_floor) return res;
  res.postselected = true;
  const double num = (res.rho_c_out * rho_a).trace().real();
  const double den = std::sqrt(res.rho_c_out.squaredNorm() * rho_a.squaredNorm());
  res.f_ac = num / den;
  return res;
}

// ---------------------------------------------------------------------------
// Isometric-encoding diagnostics

struct IsometryDiagnostics {
  double p_lambda = 0.0;         ///< probability-loss scale, exact on identities
  double epsilon_residual = 0.0; ///< max basis-pair deviation from p_lambda-isometry
  double epsilon_tilde = 0.0;    ///< residual / p_lambda (pure-state normalization)
  double cross_purity = 0.0;     ///< d_A Tr[M^e(Psi) M^d(Psi)†]
  double purity_b = 0.0;         ///< Tr[M^e(Psi)²]
};

/// Diagnostics of the isometry condition
///   Tr_B[M^e(O_i) M^d(O_j)†] ≈ p_lambda Tr[O_i O_j†]
/// evaluated over the hermitian orthonormal basis (max over pairs), plus the
/// cross purity and encoded purity of a supplied pure probe state.
inline IsometryDiagnostics isometry_diagnostics(const Mat& u_ab, const Vec& phi,
                                                const Mat& gamma, const Vec& psi_probe) {
  const Index da = gamma.rows();
  IsometryDiagnostics diag;
  diag.p_lambda =
      decoder_map(u_ab, phi, gamma, encoder_map(u_ab, phi, Mat::Identity(da, da)))
          .trace()
          .real() /
      static_cast<double>(da);

  const auto basis = hermitian_basis(da);
  std::vector<Mat> enc, dec;
  enc.reserve(basis.size());
  dec.reserve(basis.size());
  for (const auto& o : basis) {
    enc.push_back(encoder_map(u_ab, phi, o));
    dec.push_back(reverse_decoder_map(u_ab, phi, gamma, o));
  }
  double eps = 0.0;
  for (size_t i = 0; i < basis.size(); ++i)
    for (size_t j = 0; j < basis.size(); ++j) {
      const cplx overlap = (enc[i] * dec[j].adjoint()).trace();
      const double target = (i == j) ? diag.p_lambda : 0.0;
      eps = std::max(eps, std::abs(overlap - target));
    }
  diag.epsilon_residual = eps;
  diag.epsilon_tilde = diag.p_lambda > 0.0 ? eps / diag.p_lambda
                                           : std::numeric_limits<double>::infinity();

  const Mat psi_dm = psi_probe * psi_probe.adjoint();
  const Mat e_psi = encoder_map(u_ab, phi, psi_dm);
  const Mat d_psi = reverse_decoder_map(u_ab, phi, gamma, psi_dm);
  const cplx cross = static_cast<double>(da) * (e_psi * d_psi.adjoint()).trace();
  if (std::abs(cross.imag()) > 1e-9)
    throw std::runtime_error("isometry_diagnostics: cross purity has imaginary part");
  diag.cross_purity = cross.real();
  diag.purity_b = e_psi.squaredNorm();
  return diag;
}

// ---------------------------------------------------------------------------
// C -> A teleportation diagnostics

struct TeleportDiagnostics {
  Mat rho_tilde_a; ///< reduced scrambled state Tr_B U(ψ⊗φ)(ψ⊗φ)†U†
  double mu = 0.0; ///< Tr(rho_tilde²)/d_A, the teleportation constant
  double purity_a = 0.0;
};

inline TeleportDiagnostics scrambled_state_diagnostics(const Mat& u_ab, const Vec& phi,
                                                       const Vec& psi_a) {
  const Index db = phi.size();
  const Index da = u_ab.rows() / db;
  const Vec scrambled = u_ab * kron(psi_a, phi);
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      scrambled.data(), da, db);
  TeleportDiagnostics diag;
  diag.rho_tilde_a = m * m.adjoint();
  diag.purity_a = diag.rho_tilde_a.squaredNorm();
  diag.mu = diag.purity_a / static_cast<double>(da);
  return diag;
}

/// Ideal teleported state for an ensemble rho_A = Σ |q_k|² |ψ_k><ψ_k|:
/// Σ_k |q_k|² ρ̃_k ρ_{C→A} ρ̃_k, unnormalized (trace = average postselection
/// probability). The formula's derivation assumes the ψ_k form a purification
/// basis; it is evaluated as stated for any supplied ensemble.
inline Mat teleported_state(const std::vector<std::pair<cplx, Vec>>& ensemble, const Mat& u_ab,
                            const Vec& phi, const Mat& rho_c) {
  double wsum = 0.0;
  for (const auto& [q, psi] : ensemble) wsum += std::norm(q);
  if (std::abs(wsum - 1.0) > 1e-9)
    throw std::invalid_argument("teleported_state: weights do not sum to 1");
  Mat out = Mat::Zero(rho_c.rows(), rho_c.cols());
  for (const auto& [q, psi] : ensemble) {
    const Mat rt = scrambled_state_diagnostics(u_ab, phi, psi).rho_tilde_a;
    out += std::norm(q) * rt * rho_c * rt;
  }
  return out;
}

/// Necessary condition for C -> A teleportation at tolerance eps_tilde:
/// Tr(rho_tilde²) <= 1/(d_A (1 - eps_tilde)).
inline bool teleport_purity_check(const QOperator& rho_tilde, double eps_tilde) {
  if (eps_tilde >= 1.0) throw std::invalid_argument("teleport_purity_check: eps_tilde >= 1");
  const double d = static_cast<double>(rho_tilde.space().total_dim());
  return purity(rho_tilde) <= 1.0 / (d * (1.0 - eps_tilde));
}

} // namespace scrambleswap
