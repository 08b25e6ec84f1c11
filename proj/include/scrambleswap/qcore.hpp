#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <complex>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace scrambleswap {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Eigen::Index;

namespace tol {
inline constexpr double norm = 1e-10;
inline constexpr double herm = 1e-10;
inline constexpr double unitary = 1e-9;
inline constexpr double psd = 1e-9;
} // namespace tol

inline constexpr double p_floor = 1e-12;

/// One named tensor factor of a composite Hilbert space.
struct Factor {
  std::string label;
  Index dim = 0;
};

/// Ordered list of labeled tensor factors. The order is fixed at construction
/// and governs the index layout of every state/operator on the space:
/// row-major with the first declared factor slowest-varying.
class CompositeSpace {
public:
  CompositeSpace() = default;

  explicit CompositeSpace(std::vector<Factor> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw std::invalid_argument("CompositeSpace: no factors");
    total_ = 1;
    for (const auto& f : factors_) {
      if (f.dim < 1) throw std::invalid_argument("CompositeSpace: dim < 1 for " + f.label);
      for (const auto& g : factors_)
        if (&f != &g && f.label == g.label)
          throw std::invalid_argument("CompositeSpace: duplicate label " + f.label);
      total_ *= f.dim;
    }
  }

  static CompositeSpace single(const std::string& label, Index dim) {
    return CompositeSpace({{label, dim}});
  }

  Index total_dim() const { return total_; }
  Index n_factors() const { return static_cast<Index>(factors_.size()); }
  const std::vector<Factor>& factors() const { return factors_; }

  bool has(const std::string& label) const {
    for (const auto& f : factors_)
      if (f.label == label) return true;
    return false;
  }

  Index position(const std::string& label) const {
    for (Index k = 0; k < n_factors(); ++k)
      if (factors_[static_cast<size_t>(k)].label == label) return k;
    throw std::invalid_argument("CompositeSpace: unknown label " + label);
  }

  Index dim_of(const std::string& label) const {
    return factors_[static_cast<size_t>(position(label))].dim;
  }

  /// Row-major strides: stride of factor k is the product of dims of all later factors.
  std::vector<Index> strides() const {
    std::vector<Index> s(factors_.size());
    Index acc = 1;
    for (Index k = n_factors() - 1; k >= 0; --k) {
      s[static_cast<size_t>(k)] = acc;
      acc *= factors_[static_cast<size_t>(k)].dim;
    }
    return s;
  }

  bool operator==(const CompositeSpace& o) const {
    if (factors_.size() != o.factors_.size()) return false;
    for (size_t k = 0; k < factors_.size(); ++k)
      if (factors_[k].label != o.factors_[k].label || factors_[k].dim != o.factors_[k].dim)
        return false;
    return true;
  }
  bool operator!=(const CompositeSpace& o) const { return !(*this == o); }

private:
  std::vector<Factor> factors_;
  Index total_ = 0;
};

/// Pure state on a CompositeSpace. Unit norm is enforced at construction
/// unless the state is explicitly flagged subnormalized (postselected branch).
class QState {
public:
  QState(CompositeSpace space, Vec amplitudes, bool subnormalized = false)
      : space_(std::move(space)), amp_(std::move(amplitudes)), subnorm_(subnormalized) {
    if (amp_.size() != space_.total_dim())
      throw std::invalid_argument("QState: amplitude length does not match space");
    if (!subnorm_ && std::abs(amp_.norm() - 1.0) > tol::norm)
      throw std::invalid_argument("QState: not normalized");
  }

  const CompositeSpace& space() const { return space_; }
  const Vec& amplitudes() const { return amp_; }
  bool subnormalized() const { return subnorm_; }
  double norm() const { return amp_.norm(); }

private:
  CompositeSpace space_;
  Vec amp_;
  bool subnorm_;
};

enum class OpKind { general, hermitian, unitary, density };

/// Dense operator on a CompositeSpace with a declared kind; the declared
/// structure is validated at construction (see tol above).
class QOperator {
public:
  QOperator(CompositeSpace space, Mat matrix, OpKind kind = OpKind::general,
            bool subnormalized = false)
      : space_(std::move(space)), mat_(std::move(matrix)), kind_(kind), subnorm_(subnormalized) {
    const Index d = space_.total_dim();
    if (mat_.rows() != d || mat_.cols() != d)
      throw std::invalid_argument("QOperator: matrix shape does not match space");
    validate();
  }

  /// Construct without re-validating the declared kind. For internal use on
  /// matrices whose structure is guaranteed by construction.
  static QOperator trusted(CompositeSpace space, Mat matrix, OpKind kind,
                           bool subnormalized = false) {
    QOperator op;
    op.space_ = std::move(space);
    op.mat_ = std::move(matrix);
    op.kind_ = kind;
    op.subnorm_ = subnormalized;
    return op;
  }

  const CompositeSpace& space() const { return space_; }
  const Mat& matrix() const { return mat_; }
  OpKind kind() const { return kind_; }
  bool subnormalized() const { return subnorm_; }
  double trace_real() const { return mat_.trace().real(); }

private:
  QOperator() = default;

  void validate() const {
    switch (kind_) {
      case OpKind::general:
        break;
      case OpKind::hermitian: {
        if ((mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() > tol::herm)
          throw std::invalid_argument("QOperator: not hermitian within tol");
        break;
      }
      case OpKind::unitary: {
        const Mat g = mat_.adjoint() * mat_ - Mat::Identity(mat_.rows(), mat_.cols());
        if (g.cwiseAbs().maxCoeff() > tol::unitary)
          throw std::invalid_argument("QOperator: not unitary within tol");
        break;
      }
      case OpKind::density: {
        if ((mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() > tol::herm)
          throw std::invalid_argument("QOperator: density not hermitian");
        const double tr = mat_.trace().real();
        if (tr <= 0.0 || tr > 1.0 + tol::norm)
          throw std::invalid_argument("QOperator: density trace outside (0, 1]");
        if (!subnorm_ && std::abs(tr - 1.0) > tol::norm)
          throw std::invalid_argument("QOperator: density trace != 1 and not flagged subnormalized");
        Eigen::SelfAdjointEigenSolver<Mat> es(mat_, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -tol::psd)
          throw std::invalid_argument("QOperator: density has negative eigenvalue");
        break;
      }
    }
  }

  CompositeSpace space_;
  Mat mat_;
  OpKind kind_ = OpKind::general;
  bool subnorm_ = false;
};

// ---------------------------------------------------------------------------
// Index bookkeeping

namespace detail {

inline void decompose_index(Index idx, const std::vector<Index>& strides,
                            const std::vector<Index>& dims, std::vector<Index>& out) {
  out.resize(dims.size());
  for (size_t k = 0; k < dims.size(); ++k) {
    out[k] = (idx / strides[k]) % dims[k];
  }
}

inline std::vector<Index> dims_of(const CompositeSpace& s) {
  std::vector<Index> d;
  d.reserve(static_cast<size_t>(s.n_factors()));
  for (const auto& f : s.factors()) d.push_back(f.dim);
  return d;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Kronecker products

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vec kron(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// Tensor product of states in declared order.
inline QState tensor_product(const std::vector<QState>& parts) {
  if (parts.empty()) throw std::invalid_argument("tensor_product: empty");
  std::vector<Factor> factors;
  Vec amp = parts.front().amplitudes();
  bool subnorm = parts.front().subnormalized();
  factors = parts.front().space().factors();
  for (size_t k = 1; k < parts.size(); ++k) {
    amp = kron(amp, parts[k].amplitudes());
    subnorm = subnorm || parts[k].subnormalized();
    for (const auto& f : parts[k].space().factors()) factors.push_back(f);
  }
  return QState(CompositeSpace(std::move(factors)), std::move(amp), subnorm);
}

/// Tensor product of operators in declared order. The result kind is the
/// common kind when structure is preserved (hermitian/unitary/density),
/// general otherwise.
inline QOperator tensor_product(const std::vector<QOperator>& parts) {
  if (parts.empty()) throw std::invalid_argument("tensor_product: empty");
  std::vector<Factor> factors = parts.front().space().factors();
  Mat m = parts.front().matrix();
  OpKind kind = parts.front().kind();
  bool subnorm = parts.front().subnormalized();
  for (size_t k = 1; k < parts.size(); ++k) {
    m = kron(m, parts[k].matrix());
    if (parts[k].kind() != kind) kind = OpKind::general;
    subnorm = subnorm || parts[k].subnormalized();
    for (const auto& f : parts[k].space().factors()) factors.push_back(f);
  }
  return QOperator::trusted(CompositeSpace(std::move(factors)), std::move(m), kind, subnorm);
}

// ---------------------------------------------------------------------------
// Subsystem embedding and reduction

/// Embed an operator acting on a subset of factors into `target`:
/// op ⊗ identity on the complement, with indices permuted to the target's
/// factor order. The op's own factor order need not match the target's.
inline QOperator embed(const QOperator& op, const CompositeSpace& target) {
  const auto& osp = op.space();
  std::vector<Index> op_pos; // position in target of each op factor
  op_pos.reserve(static_cast<size_t>(osp.n_factors()));
  for (const auto& f : osp.factors()) {
    const Index p = target.position(f.label);
    if (target.factors()[static_cast<size_t>(p)].dim != f.dim)
      throw std::invalid_argument("embed: dim mismatch for " + f.label);
    op_pos.push_back(p);
  }
  std::vector<Index> comp_pos;
  for (Index p = 0; p < target.n_factors(); ++p) {
    bool in_op = false;
    for (Index q : op_pos) in_op = in_op || (q == p);
    if (!in_op) comp_pos.push_back(p);
  }

  const auto tstr = target.strides();
  const auto odims = detail::dims_of(osp);
  const auto ostr = osp.strides();
  std::vector<Index> cdims;
  for (Index p : comp_pos) cdims.push_back(target.factors()[static_cast<size_t>(p)].dim);
  Index drest = 1;
  for (Index d : cdims) drest *= d;
  std::vector<Index> cstr(cdims.size());
  {
    Index acc = 1;
    for (Index k = static_cast<Index>(cdims.size()) - 1; k >= 0; --k) {
      cstr[static_cast<size_t>(k)] = acc;
      acc *= cdims[static_cast<size_t>(k)];
    }
  }

  const Index dop = osp.total_dim();
  Mat out = Mat::Zero(target.total_dim(), target.total_dim());
  std::vector<Index> oi, oj, ci;
  for (Index r = 0; r < dop; ++r) {
    detail::decompose_index(r, ostr, odims, oi);
    for (Index c = 0; c < dop; ++c) {
      const cplx v = op.matrix()(r, c);
      if (v == cplx(0.0, 0.0)) continue;
      detail::decompose_index(c, ostr, odims, oj);
      for (Index e = 0; e < drest; ++e) {
        detail::decompose_index(e, cstr, cdims, ci);
        Index row = 0, col = 0;
        for (size_t k = 0; k < op_pos.size(); ++k) {
          row += oi[k] * tstr[static_cast<size_t>(op_pos[k])];
          col += oj[k] * tstr[static_cast<size_t>(op_pos[k])];
        }
        for (size_t k = 0; k < comp_pos.size(); ++k) {
          row += ci[k] * tstr[static_cast<size_t>(comp_pos[k])];
          col += ci[k] * tstr[static_cast<size_t>(comp_pos[k])];
        }
        out(row, col) = v;
      }
    }
  }
  OpKind kind = op.kind();
  if (kind == OpKind::density) kind = OpKind::hermitian;
  return QOperator::trusted(target, std::move(out), kind, op.subnormalized());
}

/// Reduced operator on the kept factors (in their original declared order).
inline QOperator partial_trace(const QOperator& rho, const std::vector<std::string>& keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
  const auto& sp = rho.space();
  std::vector<bool> kept(static_cast<size_t>(sp.n_factors()), false);
  for (const auto& l : keep) kept[static_cast<size_t>(sp.position(l))] = true;

  std::vector<Factor> kf;
  std::vector<Index> kpos, tpos;
  for (Index p = 0; p < sp.n_factors(); ++p) {
    if (kept[static_cast<size_t>(p)]) {
      kf.push_back(sp.factors()[static_cast<size_t>(p)]);
      kpos.push_back(p);
    } else {
      tpos.push_back(p);
    }
  }
  CompositeSpace out_space(kf);
  const auto str = sp.strides();

  Index dk = out_space.total_dim(), dt = 1;
  for (Index p : tpos) dt *= sp.factors()[static_cast<size_t>(p)].dim;

  // strides of the kept/traced multi-indices within the full index
  auto pack = [&](const std::vector<Index>& pos) {
    std::vector<Index> dims, sub;
    for (Index p : pos) dims.push_back(sp.factors()[static_cast<size_t>(p)].dim);
    sub.resize(dims.size());
    Index acc = 1;
    for (Index k = static_cast<Index>(dims.size()) - 1; k >= 0; --k) {
      sub[static_cast<size_t>(k)] = acc;
      acc *= dims[static_cast<size_t>(k)];
    }
    return std::pair(dims, sub);
  };
  auto [kdims, kstr] = pack(kpos);
  auto [tdims, tstr2] = pack(tpos);

  auto full_index = [&](Index packed, const std::vector<Index>& pdims,
                        const std::vector<Index>& pstr, const std::vector<Index>& pos) {
    Index idx = 0;
    for (size_t k = 0; k < pos.size(); ++k) {
      const Index digit = (packed / pstr[k]) % pdims[k];
      idx += digit * str[static_cast<size_t>(pos[k])];
    }
    return idx;
  };

  Mat out = Mat::Zero(dk, dk);
  for (Index r = 0; r < dk; ++r) {
    const Index rbase = full_index(r, kdims, kstr, kpos);
    for (Index c = 0; c < dk; ++c) {
      const Index cbase = full_index(c, kdims, kstr, kpos);
      cplx acc(0.0, 0.0);
      for (Index t = 0; t < dt; ++t) {
        const Index off = full_index(t, tdims, tstr2, tpos);
        acc += rho.matrix()(rbase + off, cbase + off);
      }
      out(r, c) = acc;
    }
  }
  OpKind kind = rho.kind() == OpKind::density ? OpKind::density : OpKind::general;
  if (rho.kind() == OpKind::hermitian) kind = OpKind::hermitian;
  return QOperator::trusted(out_space, std::move(out), kind, rho.subnormalized());
}

/// Transpose applied only to the designated factor's indices.
inline QOperator partial_transpose(const QOperator& op, const std::string& subsystem) {
  const auto& sp = op.space();
  const Index p = sp.position(subsystem);
  const auto str = sp.strides();
  const auto dims = detail::dims_of(sp);
  const Index d = sp.total_dim();
  const Index sd = dims[static_cast<size_t>(p)];
  const Index ss = str[static_cast<size_t>(p)];

  Mat out(d, d);
  for (Index r = 0; r < d; ++r) {
    const Index ri = (r / ss) % sd;
    const Index r0 = r - ri * ss;
    for (Index c = 0; c < d; ++c) {
      const Index ci = (c / ss) % sd;
      const Index c0 = c - ci * ss;
      out(r0 + ci * ss, c0 + ri * ss) = op.matrix()(r, c);
    }
  }
  OpKind kind = OpKind::general;
  if (op.kind() == OpKind::hermitian || op.kind() == OpKind::density) kind = OpKind::hermitian;
  return QOperator::trusted(sp, std::move(out), kind, op.subnormalized());
}

// ---------------------------------------------------------------------------
// Applying operators to states without materializing the embedded matrix

/// Apply a dense operator acting on the listed factors (in the given order)
/// to a state on a larger space. Equivalent to embed(op)·psi.
inline Vec apply_on_factors(const Mat& op, const std::vector<std::string>& labels,
                            const CompositeSpace& space, const Vec& psi) {
  const Index n = space.n_factors();
  std::vector<Index> op_pos;
  for (const auto& l : labels) op_pos.push_back(space.position(l));
  std::vector<Index> perm; // target factor order: op factors first
  perm.reserve(static_cast<size_t>(n));
  for (Index p : op_pos) perm.push_back(p);
  for (Index p = 0; p < n; ++p) {
    bool used = false;
    for (Index q : op_pos) used = used || (q == p);
    if (!used) perm.push_back(p);
  }

  const auto dims = detail::dims_of(space);
  const auto str = space.strides();
  std::vector<Index> pdims;
  for (Index p : perm) pdims.push_back(dims[static_cast<size_t>(p)]);
  std::vector<Index> pstr(pdims.size());
  {
    Index acc = 1;
    for (Index k = static_cast<Index>(pdims.size()) - 1; k >= 0; --k) {
      pstr[static_cast<size_t>(k)] = acc;
      acc *= pdims[static_cast<size_t>(k)];
    }
  }
  const Index total = space.total_dim();
  Index dop = 1;
  for (const auto& l : labels) dop *= space.dim_of(l);
  if (op.rows() != dop || op.cols() != dop)
    throw std::invalid_argument("apply_on_factors: operator dim mismatch");
  const Index drest = total / dop;

  // permutation table old index -> permuted index
  Vec work(total);
  std::vector<Index> digits;
  for (Index i = 0; i < total; ++i) {
    Index pi = 0;
    for (size_t k = 0; k < perm.size(); ++k) {
      const Index digit = (i / str[static_cast<size_t>(perm[k])]) % dims[static_cast<size_t>(perm[k])];
      pi += digit * pstr[k];
    }
    work(pi) = psi(i);
  }

  Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      work.data(), dop, drest);
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> applied = op * m;

  Vec out(total);
  for (Index i = 0; i < total; ++i) {
    Index pi = 0;
    for (size_t k = 0; k < perm.size(); ++k) {
      const Index digit = (i / str[static_cast<size_t>(perm[k])]) % dims[static_cast<size_t>(perm[k])];
      pi += digit * pstr[k];
    }
    out(i) = applied.data()[pi];
  }
  return out;
}

inline QState apply_on_factors(const Mat& op, const std::vector<std::string>& labels,
                               const QState& psi, bool norm_preserving = true) {
  Vec out = apply_on_factors(op, labels, psi.space(), psi.amplitudes());
  return QState(psi.space(), std::move(out), psi.subnormalized() || !norm_preserving);
}

/// Contract one factor of a pure state with a reference vector:
/// out = ⟨ref|_label psi, a subnormalized state on the remaining factors.
inline QState project_factor(const QState& psi, const std::string& label, const Vec& ref) {
  const auto& sp = psi.space();
  const Index p = sp.position(label);
  if (ref.size() != sp.dim_of(label))
    throw std::invalid_argument("project_factor: reference dim mismatch");
  const auto dims = detail::dims_of(sp);
  const auto str = sp.strides();

  std::vector<Factor> rem;
  for (Index k = 0; k < sp.n_factors(); ++k)
    if (k != p) rem.push_back(sp.factors()[static_cast<size_t>(k)]);
  CompositeSpace out_space(rem);
  const auto ostr = out_space.strides();

  Vec out = Vec::Zero(out_space.total_dim());
  for (Index i = 0; i < sp.total_dim(); ++i) {
    const Index bi = (i / str[static_cast<size_t>(p)]) % dims[static_cast<size_t>(p)];
    Index oi = 0, k2 = 0;
    for (Index k = 0; k < sp.n_factors(); ++k) {
      if (k == p) continue;
      const Index digit = (i / str[static_cast<size_t>(k)]) % dims[static_cast<size_t>(k)];
      oi += digit * ostr[static_cast<size_t>(k2)];
      ++k2;
    }
    out(oi) += std::conj(ref(bi)) * psi.amplitudes()(i);
  }
  return QState(out_space, std::move(out), true);
}

// ---------------------------------------------------------------------------
// Hermitian propagation

/// Eigendecomposition-backed propagator for e^{-iHt}. The decomposition is
/// computed once at construction and is immutable afterwards, so a single
/// instance can be shared across threads and reused for all times and states.
class HermitianPropagator {
public:
  explicit HermitianPropagator(const Mat& h) {
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > tol::herm)
      throw std::invalid_argument("HermitianPropagator: matrix not hermitian within tol");
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("HermitianPropagator: eigendecomposition failed");
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
  }

  explicit HermitianPropagator(const QOperator& h) : HermitianPropagator(h.matrix()) {
    if (h.kind() != OpKind::hermitian && h.kind() != OpKind::density)
      throw std::invalid_argument("HermitianPropagator: operator kind must be hermitian");
  }

  Index dim() const { return evals_.size(); }
  const Eigen::VectorXd& eigenvalues() const { return evals_; }
  const Mat& eigenvectors() const { return evecs_; }

  Vec phases(double t) const {
    return (cplx(0.0, -1.0) * t * evals_.cast<cplx>()).array().exp();
  }

  /// e^{-iHt} |psi>
  Vec apply(double t, const Vec& psi) const {
    Vec y = evecs_.adjoint() * psi;
    y.array() *= phases(t).array();
    return evecs_ * y;
  }

  /// e^{-iHt} C for a block of column vectors C already expressed in the
  /// computational basis.
  Mat apply_block(double t, const Mat& cols) const {
    Mat y = evecs_.adjoint() * cols;
    y.array().colwise() *= phases(t).array();
    return evecs_ * y;
  }

  /// e^{-iHt} V0 where V0 = eigenvectors().adjoint() * C was precomputed.
  Mat apply_prerotated(double t, const Mat& v0) const {
    Mat y = v0;
    y.array().colwise() *= phases(t).array();
    return evecs_ * y;
  }

  Mat evolved_matrix(double t) const {
    return evecs_ * phases(t).asDiagonal() * evecs_.adjoint();
  }

private:
  Eigen::VectorXd evals_;
  Mat evecs_;
};

/// e^{-iHt}|psi>. Convenience wrapper; scans should hold a HermitianPropagator
/// and reuse it across times and states.
inline QState evolve(const QOperator& h, double t, const QState& psi) {
  if (h.space() != psi.space()) throw std::invalid_argument("evolve: space mismatch");
  HermitianPropagator prop(h);
  return QState(psi.space(), prop.apply(t, psi.amplitudes()), psi.subnormalized());
}

// ---------------------------------------------------------------------------
// Density-operator helpers

/// Tr(rho^2) for a normalized density operator.
inline double purity(const QOperator& rho) {
  if (rho.kind() != OpKind::density) throw std::invalid_argument("purity: not a density operator");
  if (rho.subnormalized())
    throw std::invalid_argument("purity: subnormalized input, normalize first");
  return rho.matrix().squaredNorm();
}

/// Normalize a (possibly subnormalized) density operator; returns (state, trace).
inline std::pair<QOperator, double> normalized(const QOperator& rho) {
  const double tr = rho.matrix().trace().real();
  if (tr <= p_floor) throw std::invalid_argument("normalized: trace below p_floor");
  return {QOperator(rho.space(), rho.matrix() / tr, OpKind::density), tr};
}

// ---------------------------------------------------------------------------
// Debug dump: column-major complex pairs with a dims/labels header

inline void dump_operator(const QOperator& op, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("dump_operator: cannot open " + path);
  out << "scrambleswap-matrix v1 " << op.matrix().rows() << " " << op.matrix().cols();
  for (const auto& f : op.space().factors()) out << " " << f.label << ":" << f.dim;
  out << "\n";
  // column-major (re, im) doubles
  for (Index c = 0; c < op.matrix().cols(); ++c)
    for (Index r = 0; r < op.matrix().rows(); ++r) {
      const double re = op.matrix()(r, c).real(), im = op.matrix()(r, c).imag();
      out.write(reinterpret_cast<const char*>(&re), sizeof(double));
      out.write(reinterpret_cast<const char*>(&im), sizeof(double));
    }
}

inline QOperator load_operator(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_operator: cannot open " + path);
  std::string header;
  std::getline(in, header);
  std::vector<std::string> tokens;
  {
    std::string cur;
    for (char ch : header) {
      if (ch == ' ') {
        if (!cur.empty()) tokens.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    if (!cur.empty()) tokens.push_back(cur);
  }
  if (tokens.size() < 4 || tokens[0] != "scrambleswap-matrix" || tokens[1] != "v1")
    throw std::runtime_error("load_operator: bad header");
  const Index rows = std::stoll(tokens[2]), cols = std::stoll(tokens[3]);
  std::vector<Factor> factors;
  for (size_t k = 4; k < tokens.size(); ++k) {
    const auto pos = tokens[k].find(':');
    factors.push_back({tokens[k].substr(0, pos), std::stoll(tokens[k].substr(pos + 1))});
  }
  Mat m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) {
      double re = 0.0, im = 0.0;
      in.read(reinterpret_cast<char*>(&re), sizeof(double));
      in.read(reinterpret_cast<char*>(&im), sizeof(double));
      m(r, c) = cplx(re, im);
    }
  if (!in) throw std::runtime_error("load_operator: truncated payload");
  return QOperator::trusted(CompositeSpace(std::move(factors)), std::move(m), OpKind::general);
}

} // namespace scrambleswap
