#include <scrambleswap/dicke.hpp>
#include <scrambleswap/protocol.hpp>

#include <catch2/catch_amalgamated.hpp>

using namespace scrambleswap;
using Catch::Matchers::WithinAbs;

namespace {

QState single(const std::string& label, const Vec& v) {
  return QState(CompositeSpace::single(label, v.size()), v);
}

DickeParams small_params(double delta = 0.7, double omega_z = 1.3) {
  DickeParams p = DickeParams::make(2, delta, omega_z, 1.5);
  p.window = FockWindow{0, 17};
  return p;
}

} // namespace

TEST_CASE("collective spin operators") {
  for (int n : {1, 2, 4, 7}) {
    const auto ops = collective_spin_ops(n);
    const double s = 0.5 * n;
    const Index d = n + 1;

    // su(2) algebra
    const Mat comm = ops.sx * ops.sy - ops.sy * ops.sx - cplx(0.0, 1.0) * ops.sz;
    CHECK(comm.cwiseAbs().maxCoeff() < 1e-12);

    // Casimir
    const Mat casimir = ops.sx * ops.sx + ops.sy * ops.sy + ops.sz * ops.sz;
    CHECK((casimir - s * (s + 1.0) * Mat::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-12);

    // S_z spectrum
    for (Index j = 0; j < d; ++j)
      CHECK_THAT(ops.sz(j, j).real(), WithinAbs(-s + static_cast<double>(j), 1e-14));

    CHECK((ops.sx - ops.sx.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((ops.sy - ops.sy.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK_THROWS_AS(collective_spin_ops(0), std::invalid_argument);
}

TEST_CASE("truncated boson ladder uses true occupation numbers") {
  const FockWindow w{5, 9};
  const Mat b = boson_lowering(w);
  CHECK(b.rows() == 5);
  CHECK_THAT(b(0, 1).real(), WithinAbs(std::sqrt(6.0), 1e-14));
  CHECK_THAT(b(3, 4).real(), WithinAbs(std::sqrt(9.0), 1e-14));
  CHECK(b(4, 4) == cplx(0.0, 0.0));
}

TEST_CASE("dicke hamiltonian") {
  SECTION("decoupled spectrum at g = 0") {
    DickeParams p = small_params(0.37, 2.1);
    p.g = 0.0;
    const QOperator h = build_dicke_hamiltonian(p);
    Eigen::SelfAdjointEigenSolver<Mat> es(h.matrix(), Eigen::EigenvaluesOnly);
    std::vector<double> expect;
    for (int m = 0; m <= p.n_spins; ++m)
      for (long nrel = 0; nrel < p.window.dim(); ++nrel)
        expect.push_back(2.1 * (-1.0 + m) + 0.37 * static_cast<double>(nrel));
    std::sort(expect.begin(), expect.end());
    for (Index k = 0; k < es.eigenvalues().size(); ++k)
      CHECK_THAT(es.eigenvalues()(k), WithinAbs(expect[static_cast<size_t>(k)], 1e-10));
  }

  SECTION("hermitian for random parameters") {
    for (std::uint64_t k = 0; k < 4; ++k) {
      Rng rng(Seed{20}.derive(k));
      DickeParams p = small_params(2.0 * rng.uniform(), 4.0 * rng.uniform());
      const Mat h = build_dicke_hamiltonian(p).matrix();
      CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  SECTION("invariant under partial transpose of the boson factor") {
    const DickeParams p = small_params();
    const QOperator h = build_dicke_hamiltonian(p);
    const QOperator hpt = partial_transpose(h, "B");
    CHECK((h.matrix() - hpt.matrix()).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("window too small for the coherent tail budget") {
    DickeParams p = small_params();
    p.window = FockWindow{0, 2};
    p.tail_budget = 1e-6;
    CHECK_THROWS_AS(build_dicke_hamiltonian(p), TailBudgetError);
  }
}

TEST_CASE("Z2 parity commutes with the dicke hamiltonian") {
  const DickeParams p = small_params();
  const Mat h = build_dicke_hamiltonian(p).matrix();
  const Index ds = p.spin_dim(), db = p.boson_dim();
  Mat spin_parity = Mat::Zero(ds, ds);
  for (Index j = 0; j < ds; ++j) spin_parity(j, j) = (j % 2 == 0) ? 1.0 : -1.0;
  Mat boson_parity = Mat::Zero(db, db);
  for (Index i = 0; i < db; ++i) boson_parity(i, i) = (i % 2 == 0) ? 1.0 : -1.0;
  const Mat parity = kron(spin_parity, boson_parity);
  CHECK((parity * h - h * parity).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("renyi entropy") {
  const CompositeSpace a = CompositeSpace::single("A", 5);
  Vec v = Vec::Zero(5);
  v(2) = 1.0;
  CHECK_THAT(renyi2_entropy(QOperator(a, v * v.adjoint(), OpKind::density), 5),
             WithinAbs(0.0, 1e-12));
  CHECK_THAT(renyi2_entropy(QOperator(a, Mat::Identity(5, 5) / 5.0, OpKind::density), 5),
             WithinAbs(1.0, 1e-12));
  Mat half = Mat::Zero(5, 5);
  half(0, 0) = half(1, 1) = 0.5;
  CHECK_THAT(renyi2_entropy(QOperator(a, half, OpKind::density), 5),
             WithinAbs(std::log(2.0) / std::log(5.0), 1e-12));
  CHECK_THROWS_AS(renyi2_from_purity(0.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(renyi2_from_purity(1.1, 5), std::invalid_argument);

  // ensemble estimator is monotone under adding the maximally mixed state
  const std::vector<double> purities = {0.9, 0.5, 0.33};
  double mean = 0.0;
  for (double q : purities) mean += q;
  const double s2_before = renyi2_from_mean_purity(mean / 3.0, 5);
  const double s2_after = renyi2_from_mean_purity((mean + 0.2) / 4.0, 5);
  CHECK(s2_after >= s2_before);
}

TEST_CASE("dicke protocol run") {
  const DickeParams p = small_params();
  Rng rng(Seed{21});
  const Index da = p.spin_dim();
  const Vec psi = haar_state_vector(da, rng), chi = haar_state_vector(da, rng);

  SECTION("t = 0 has unit probability and no swap") {
    const auto out = dicke_protocol_run(p, psi, chi, 0.0);
    CHECK(out.postselected);
    CHECK_THAT(out.p, WithinAbs(1.0, 1e-12));
    CHECK_THAT(out.f_swap, WithinAbs(std::pow(std::norm(psi.dot(chi)), 2.0), 1e-12));
  }

  SECTION("agrees with the abstract protocol on the propagated unitary") {
    const double t = 2.7;
    const QOperator h = build_dicke_hamiltonian(p);
    HermitianPropagator prop(h.matrix());
    const QOperator u(h.space(), prop.evolved_matrix(t), OpKind::unitary);
    const auto cs = coherent_state(p.alpha, p.window, p.tail_budget);
    const auto via_dicke = dicke_protocol_run(p, psi, chi, t);
    const auto via_abstract = run_protocol(u, single("B", cs.amplitudes), single("A", psi),
                                           single("C", chi), false);
    CHECK_THAT(via_dicke.p, WithinAbs(via_abstract.p, 1e-11));
    CHECK_THAT(via_dicke.f_swap, WithinAbs(via_abstract.f_swap, 1e-10));
  }

  SECTION("zero reversal error is bit-identical to the baseline") {
    const double t = 3.1;
    const auto base = dicke_protocol_run(p, psi, chi, t);
    const auto zero = dicke_protocol_run(p, psi, chi, t, ReversalError{0.0, 0.0});
    CHECK(base.p == zero.p);
    CHECK(base.f_swap == zero.f_swap);
  }

  SECTION("reversal error degrades the echo at long times") {
    const double t = 40.0;
    const auto base = dicke_protocol_run(p, psi, chi, t);
    const auto off = dicke_protocol_run(p, psi, chi, t, ReversalError{0.05 * p.delta, 0.0});
    CHECK(off.p != base.p);
  }

  SECTION("mixed inputs run through the density path") {
    Mat a = ginibre_matrix(da, da, rng);
    Mat rho = a * a.adjoint();
    rho /= rho.trace().real();
    const auto out = dicke_protocol_run(p, rho, Mat(chi * chi.adjoint()), 1.2);
    CHECK(out.postselected);
    CHECK(out.p <= 1.0 + 1e-9);
    CHECK_THAT(out.rho_out_ac->matrix().trace().real(), WithinAbs(1.0, 1e-10));
  }
}

TEST_CASE("energy is conserved along each leg") {
  const DickeParams p = small_params();
  const QOperator h = build_dicke_hamiltonian(p);
  HermitianPropagator prop(h.matrix());
  Rng rng(Seed{22});
  const auto cs = coherent_state(p.alpha, p.window, p.tail_budget);
  const Vec psi0 = kron(haar_state_vector(p.spin_dim(), rng), cs.amplitudes);
  const double e0 = (psi0.adjoint() * h.matrix() * psi0)(0, 0).real();
  for (double t : {0.5, 5.0, 50.0, 400.0}) {
    const Vec psit = prop.apply(t, psi0);
    const double et = (psit.adjoint() * h.matrix() * psit)(0, 0).real();
    CHECK_THAT(et, WithinAbs(e0, 1e-9));
    CHECK_THAT(psit.norm(), WithinAbs(1.0, 1e-10));
  }
}

TEST_CASE("protocol aggregates are stable under window enlargement") {
  // the window must hold the dynamically explored occupation range (out to
  // the classical turning point of the coupled motion, well beyond the
  // initial coherent spread); once it does, widening it further must not
  // move the observables
  Rng rng(Seed{24});
  DickeParams p1 = small_params();
  p1.window = FockWindow{0, 100};
  DickeParams p2 = p1;
  p2.window = FockWindow{0, 140};
  DickeProtocol a(p1), b(p2);
  const Vec psi = haar_state_vector(3, rng), chi = haar_state_vector(3, rng);
  for (double t : {1.0, 4.0, 9.0}) {
    const auto oa = a.run(psi, chi, t);
    const auto ob = b.run(psi, chi, t);
    CHECK_THAT(oa.p, WithinAbs(ob.p, 1e-6));
    CHECK_THAT(oa.f_swap, WithinAbs(ob.f_swap, 1e-6));
  }
}

TEST_CASE("forward spin purity matches the explicit reduced state") {
  const DickeParams p = small_params();
  DickeProtocol proto(p);
  Rng rng(Seed{23});
  const Vec psi = haar_state_vector(p.spin_dim(), rng);
  const double t = 4.2;
  const Mat cols = proto.forward_columns(t);
  const double fast = proto.forward_spin_purity(cols, psi);

  const QOperator h = build_dicke_hamiltonian(p);
  HermitianPropagator prop(h.matrix());
  const Vec joint = prop.apply(t, kron(psi, proto.phi()));
  const QOperator rho(h.space(), joint * joint.adjoint(), OpKind::density);
  const QOperator rho_a = partial_trace(rho, {"A"});
  CHECK_THAT(fast, WithinAbs(purity(rho_a), 1e-11));
}
