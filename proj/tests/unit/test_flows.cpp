#include <cmath>
#include <random>

#include "doctest.h"

#include "capflow/flows.hpp"
#include "checks.hpp"
#include "oracles.hpp"

using namespace capflow;
using namespace capflow::testing;

TEST_CASE("make_flows examples and divergence identity") {
  const Solved cyc = solved(three_cycle(2.0, 1.0));
  const FlowPair zero = make_flows(cyc.decomp, Function(3, 0.0));
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(zero.psi.values[e] == 0.0);
    CHECK(zero.phi.values[e] == 0.0);
  }
  const FlowPair constant = make_flows(cyc.decomp, Function(3, 2.5));
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(constant.psi.values[e] == 0.0);
    CHECK(constant.phi.values[e] == doctest::Approx(-2.0 * 2.5 * cyc.decomp.edges()[e].j).epsilon(1e-14));
  }

  std::mt19937_64 rng(31);
  const Solved rev = solved(random_reversible_chain(rng, 12));
  const Function f = random_function(rng, 12);
  const FlowPair rf = make_flows(rev.decomp, f);
  for (std::size_t e = 0; e < rf.psi.values.size(); ++e) {
    CHECK(std::abs(rf.phi.values[e] - rf.psi.values[e]) <= 1e-12 * (1.0 + std::abs(rf.psi.values[e])));
  }

  // sum_y Phi_f(x,y) = mu(x) (L* f)(x) against a dense product, including f = h on the 3-cycle.
  auto check_divergence = [](const Solved& s, const Function& g) {
    const auto n = static_cast<Eigen::Index>(s.chain.size());
    const Eigen::MatrixXd Q = dense_generator(s.chain);
    Eigen::VectorXd mu(n);
    for (Eigen::Index x = 0; x < n; ++x) {
      mu(x) = s.mu[static_cast<std::size_t>(x)];
    }
    // mu(x) (L* g)(x) = sum_y mu(y) r(y,x) g(y) - mu(x) lambda(x) g(x) = (Q^T (mu . g))(x)
    const Eigen::VectorXd mg = mu.cwiseProduct(Eigen::Map<const Eigen::VectorXd>(g.data(), n));
    const Eigen::VectorXd expected = Q.transpose() * mg;
    const Function div = flow_divergence(s.decomp, phi_flow(s.decomp, g));
    const double scale = 1.0 + mg.cwiseAbs().maxCoeff() * (-Q.diagonal()).maxCoeff();
    for (Eigen::Index x = 0; x < n; ++x) {
      CHECK(std::abs(div[static_cast<std::size_t>(x)] - expected(x)) <= 1e-10 * scale);
    }
  };
  const Potentials pot = equilibrium_potentials(cyc.chain, cyc.decomp, StateSet(3, {0}), StateSet(3, {1}));
  check_divergence(cyc, pot.h);
  for (int trial = 0; trial < 20; ++trial) {
    const Solved s = solved(random_chain(rng, 5 + static_cast<std::size_t>(trial) * 2));
    check_divergence(s, random_function(rng, s.chain.size()));
  }
}

TEST_CASE("flow inner product") {
  const Solved cyc = solved(three_cycle(2.0, 1.0));
  const EdgeFlow zero = zero_flow(cyc.decomp);
  CHECK(flow_inner(cyc.decomp, zero, zero) == 0.0);
  const Potentials pot = equilibrium_potentials(cyc.chain, cyc.decomp, StateSet(3, {0}), StateSet(3, {1}));
  const EdgeFlow psi = psi_flow(cyc.decomp, pot.h);
  CHECK(flow_inner(cyc.decomp, psi, psi) == doctest::Approx(7.0 / 9.0).epsilon(1e-13));

  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const Solved s = solved(random_chain(rng, 8 + static_cast<std::size_t>(trial)));
    const EdgeFlow a = random_flow(rng, s.decomp);
    const EdgeFlow b = random_flow(rng, s.decomp);
    const double ab = flow_inner(s.decomp, a, b);
    CHECK(ab == doctest::Approx(flow_inner(s.decomp, b, a)).epsilon(1e-14));
    CHECK(ab * ab <= flow_inner(s.decomp, a, a) * flow_inner(s.decomp, b, b) * (1.0 + 1e-12));
    CHECK(flow_inner(s.decomp, a, a) > 0.0);

    const Instance inst{s.chain, StateSet(s.chain.size(), {0}), StateSet(s.chain.size(), {1})};
    const Potentials p = equilibrium_potentials(s.chain, s.decomp, inst.A, inst.B);
    const double cap = capacity_value(s.chain, s.decomp, inst.A, inst.B);
    const EdgeFlow ph = psi_flow(s.decomp, p.h);
    CHECK(flow_inner(s.decomp, ph, ph) == doctest::Approx(cap).epsilon(1e-12));
    const EdgeFlow unit = (1.0 / cap) * ph;
    CHECK(flow_inner(s.decomp, unit, unit) == doctest::Approx(1.0 / cap).epsilon(1e-12));
  }

  CHECK(error_kind([&] { flow_inner(cyc.decomp, EdgeFlow{{1.0}}, zero); }) == ErrorKind::SupportMismatch);
  // An explicit zero-rate-in-both-directions edge cannot exist, but a flow of the wrong length is rejected.
  CHECK(error_kind([&] { flow_feasibility(cyc.decomp, EdgeFlow{{1.0, 2.0}}, StateSet(3, {0}), StateSet(3, {1}), 0.0); }) ==
        ErrorKind::SupportMismatch);
}

TEST_CASE("flow feasibility examples") {
  std::mt19937_64 rng(33);
  const Solved s = solved(random_chain(rng, 15));
  const StateSet A(15, {0, 3}), B(15, {7});
  CHECK(flow_feasibility(s.decomp, zero_flow(s.decomp), A, B, 0.0).feasible);
  CHECK_FALSE(flow_feasibility(s.decomp, zero_flow(s.decomp), A, B, 1.0).feasible);

  const OptimalPairs opt = optimal_pairs(s.chain, s.decomp, A, B);
  const FlowFeasibility d = flow_feasibility(s.decomp, opt.dirichlet_phi, A, B, 0.0);
  CHECK(d.feasible);
  CHECK(d.div_residual <= 1e-9);

  CHECK(flow_feasibility(s.decomp, opt.thomson_phi, A, B, 1.0).feasible);

  // Reversible: the unit equilibrium flow is -Psi_h / Cap.
  const Solved r = solved(random_reversible_chain(rng, 15));
  const Potentials p = equilibrium_potentials(r.chain, r.decomp, A, B);
  const EdgeFlow unit = (-1.0 / capacity_value(r.chain, r.decomp, A, B)) * psi_flow(r.decomp, p.h);
  const FlowFeasibility t = flow_feasibility(r.decomp, unit, A, B, 1.0);
  CHECK(t.feasible);
  CHECK(t.flux == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("bilinear identity") {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = random_instance(rng, 6, 30);
    const Solved s = solved(inst.chain);
    const Potentials p = equilibrium_potentials(s.chain, s.decomp, inst.A, inst.B);
    const double cap = capacity_value(s.chain, s.decomp, inst.A, inst.B);
    const auto n = s.chain.size();

    const Lemma23Result base = lemma23_check(s.decomp, inst.A, inst.B, p.h, 1.0, 0.0, zero_flow(s.decomp), p.h);
    CHECK(base.lhs == doctest::Approx(cap).epsilon(1e-10));

    const EdgeFlow unit = project_to_feasible(s.decomp, inst.A, inst.B, 1.0, random_flow(rng, s.decomp));
    const Lemma23Result thomson =
        lemma23_check(s.decomp, inst.A, inst.B, Function(n, 0.0), 0.0, 1.0, unit, p.h);
    CHECK(thomson.lhs == doctest::Approx(1.0).epsilon(1e-9));

    const Lemma23Result trivial =
        lemma23_check(s.decomp, inst.A, inst.B, Function(n, 0.0), 0.0, 0.0, zero_flow(s.decomp), p.h);
    CHECK(trivial.lhs == 0.0);
    CHECK(trivial.rhs == 0.0);

    for (int k = 0; k < 10; ++k) {
      const double alpha = coef(rng);
      const double gamma = coef(rng);
      const Function f = boundary_function(rng, n, inst.A, inst.B, alpha, 2.0);
      const EdgeFlow phi = project_to_feasible(s.decomp, inst.A, inst.B, gamma, random_flow(rng, s.decomp));
      const Lemma23Result r = lemma23_check(s.decomp, inst.A, inst.B, f, alpha, gamma, phi, p.h);
      CHECK(r.residual <= 1e-9 * (std::abs(gamma) + std::abs(alpha) * cap + 1.0));
    }
  }

  const Solved cyc = solved(three_cycle(2.0, 1.0));
  const Function h = equilibrium_potential(cyc.chain, StateSet(3, {0}), StateSet(3, {1}));
  CHECK(error_kind([&] {
          lemma23_check(cyc.decomp, StateSet(3, {0}), StateSet(3, {1}), Function{0.5, 0.0, 0.0}, 1.0, 0.0,
                        zero_flow(cyc.decomp), h);
        }) == ErrorKind::InfeasibleInputs);
  CHECK(error_kind([&] {
          lemma23_check(cyc.decomp, StateSet(3, {0}), StateSet(3, {1}), h, 1.0, 1.0, zero_flow(cyc.decomp), h);
        }) == ErrorKind::InfeasibleInputs);
}

TEST_CASE("certificates: optimal pairs, reversible specializations, sandwich") {
  const Solved cyc = solved(three_cycle(2.0, 1.0));
  const StateSet a0(3, {0}), b1(3, {1});
  const OptimalPairs cp = optimal_pairs(cyc.chain, cyc.decomp, a0, b1);
  const Certificate dc = dirichlet_certificate(cyc.decomp, a0, b1, cp.dirichlet_f, cp.dirichlet_phi);
  const Certificate tc = thomson_certificate(cyc.decomp, a0, b1, cp.thomson_f, cp.thomson_phi);
  CHECK(dc.value == doctest::Approx(7.0 / 9.0).epsilon(1e-12));
  CHECK(1.0 / tc.value == doctest::Approx(7.0 / 9.0).epsilon(1e-12));
  CHECK(dc.kind == CertificateKind::DirichletUpper);
  CHECK(tc.kind == CertificateKind::ThomsonReciprocal);

  std::mt19937_64 rng(35);
  {
    const Solved rev = solved(random_reversible_chain(rng, 14));
    const StateSet A(14, {0}), B(14, {5, 6});
    const Potentials p = equilibrium_potentials(rev.chain, rev.decomp, A, B);
    const double cap = capacity_value(rev.chain, rev.decomp, A, B);
    CHECK(dirichlet_certificate(rev.decomp, A, B, p.h, zero_flow(rev.decomp)).value ==
          doctest::Approx(cap).epsilon(1e-10));
    const EdgeFlow unit = (-1.0 / cap) * psi_flow(rev.decomp, p.h);
    CHECK(thomson_certificate(rev.decomp, A, B, Function(14, 0.0), unit).value ==
          doctest::Approx(1.0 / cap).epsilon(1e-10));
    const OptimalPairs op = optimal_pairs(rev.chain, rev.decomp, A, B);
    for (std::size_t x = 0; x < 14; ++x) {
      CHECK(std::abs(op.dirichlet_f[x] - p.h[x]) <= 1e-10);
      CHECK(std::abs(op.thomson_f[x]) <= 1e-10 / cap);
    }
    for (std::size_t e = 0; e < op.dirichlet_phi.values.size(); ++e) {
      CHECK(std::abs(op.dirichlet_phi.values[e]) <= 1e-10);
      CHECK(std::abs(op.thomson_phi.values[e] - unit.values[e]) <= 1e-10 * (1.0 + std::abs(unit.values[e])));
    }
  }

  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = random_instance(rng, 6, 35);
    const Solved s = solved(inst.chain);
    const auto n = s.chain.size();
    const OptimalPairs op = optimal_pairs(s.chain, s.decomp, inst.A, inst.B);
    const double cap = op.cap;
    const double upper = dirichlet_certificate(s.decomp, inst.A, inst.B, op.dirichlet_f, op.dirichlet_phi).value;
    const double lower = thomson_certificate(s.decomp, inst.A, inst.B, op.thomson_f, op.thomson_phi).value;
    CHECK(std::abs(upper - cap) <= 1e-9 * cap);
    CHECK(std::abs(1.0 / lower - cap) <= 1e-9 * cap);

    for (int k = 0; k < 10; ++k) {
      const double delta = 0.3;
      Function f = op.dirichlet_f;
      const Function g = boundary_function(rng, n, inst.A, inst.B, 0.0, delta);
      for (std::size_t x = 0; x < n; ++x) {
        f[x] += g[x];
      }
      const EdgeFlow phi = op.dirichlet_phi + project_to_feasible(s.decomp, inst.A, inst.B, 0.0,
                                                                  delta * random_flow(rng, s.decomp));
      CHECK(dirichlet_certificate(s.decomp, inst.A, inst.B, f, phi).value >= cap * (1.0 - 1e-9));

      const EdgeFlow unit = project_to_feasible(s.decomp, inst.A, inst.B, 1.0, random_flow(rng, s.decomp));
      const Function f0 = boundary_function(rng, n, inst.A, inst.B, 0.0, 1.0);
      CHECK(thomson_certificate(s.decomp, inst.A, inst.B, f0, unit).value >= (1.0 / cap) * (1.0 - 1e-9));
    }
  }

  CHECK(error_kind([&] {
          dirichlet_certificate(cyc.decomp, a0, b1, Function{1.0, 0.5, 0.2}, zero_flow(cyc.decomp));
        }) == ErrorKind::InfeasibleInputs);
  CHECK(error_kind([&] {
          thomson_certificate(cyc.decomp, a0, b1, Function{0.0, 0.0, 0.2}, zero_flow(cyc.decomp));
        }) == ErrorKind::InfeasibleInputs);
  CHECK(to_string(CertificateKind::DirichletUpper) == "dirichlet-upper");
  CHECK(to_string(CertificateKind::ThomsonReciprocal) == "thomson-reciprocal");
}

TEST_CASE("project_to_feasible lands in F_gamma") {
  std::mt19937_64 rng(36);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = random_instance(rng, 5, 40);
    const Solved s = solved(inst.chain);
    const double gamma = 0.5 * static_cast<double>(trial % 5) - 1.0;
    const EdgeFlow phi = project_to_feasible(s.decomp, inst.A, inst.B, gamma, random_flow(rng, s.decomp));
    const FlowFeasibility f = flow_feasibility(s.decomp, phi, inst.A, inst.B, gamma);
    CHECK(f.feasible);
    CHECK(f.flux == doctest::Approx(gamma).epsilon(1e-9).scale(1.0));
  }
}
