#include <cmath>
#include <random>

#include "doctest.h"

#include "capflow/captheory.hpp"
#include "checks.hpp"
#include "oracles.hpp"

using namespace capflow;
using namespace capflow::testing;

TEST_CASE("equilibrium potentials examples") {
  const Solved c = solved(three_cycle(2.0, 1.0));
  const Potentials pot = equilibrium_potentials(c.chain, c.decomp, StateSet(3, {0}), StateSet(3, {1}));
  CHECK(pot.h[0] == 1.0);
  CHECK(pot.h[1] == 0.0);
  CHECK(pot.h[2] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(pot.h_star[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  std::mt19937_64 rng(21);
  const Solved r = solved(random_chain(rng, 9));
  const StateSet A(9, {2, 5});
  const Potentials full = equilibrium_potentials(r.chain, r.decomp, A, A.complement());
  for (std::size_t x = 0; x < 9; ++x) {
    CHECK(full.h[x] == (A.contains(x) ? 1.0 : 0.0));
  }

  const Solved rev = solved(random_reversible_chain(rng, 25));
  const Potentials pr = equilibrium_potentials(rev.chain, rev.decomp, StateSet(25, {0}), StateSet(25, {1, 2}));
  for (std::size_t x = 0; x < 25; ++x) {
    CHECK(std::abs(pr.h[x] - pr.h_star[x]) <= 1e-10);
  }

  const Solved g = solved(random_chain(rng, 30));
  const StateSet gA(30, {4}), gB(30, {9, 17});
  const Potentials pg = equilibrium_potentials(g.chain, g.decomp, gA, gB);
  const Eigen::VectorXd oracle = dense_hitting_probability(g.chain, gA, gB);
  const Function Lh = apply_generator(g.chain, pg.h);
  const Function Lh_star = apply_generator(adjoint_chain(g.chain, g.mu), pg.h_star);
  for (std::size_t x = 0; x < 30; ++x) {
    CHECK(std::abs(pg.h[x] - oracle(static_cast<Eigen::Index>(x))) <= 1e-12);
    CHECK(pg.h[x] >= 0.0);
    CHECK(pg.h[x] <= 1.0);
    if (!gA.contains(x) && !gB.contains(x)) {
      CHECK(std::abs(Lh[x]) <= 1e-10 * g.chain.total_rate(x));
      CHECK(std::abs(Lh_star[x]) <= 1e-10 * g.chain.total_rate(x) * 10.0);
    }
  }
}

TEST_CASE("pair validation") {
  const Solved c = solved(three_cycle(2.0, 1.0));
  CHECK(error_kind([&] { capacity(c.chain, c.decomp, StateSet(3, {0}), StateSet(3, {0, 1})); }) ==
        ErrorKind::OverlappingSets);
  CHECK(error_kind([&] { capacity(c.chain, c.decomp, StateSet(3, std::vector<std::size_t>{}), StateSet(3, {1})); }) ==
        ErrorKind::EmptySet);
  CHECK(error_kind([&] { capacity(c.chain, c.decomp, StateSet(4, {0}), StateSet(4, {1})); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("capacity hand values") {
  const Solved two = solved(two_state_chain());
  const CapacityReport r2 = capacity(two.chain, two.decomp, StateSet(2, {0}), StateSet(2, {1}));
  CHECK(std::abs(r2.cap - 2.0 / 3.0) <= 1e-12);
  CHECK(std::abs(r2.cap_hitting - 2.0 / 3.0) <= 1e-12);

  const Solved cyc = solved(three_cycle(2.0, 1.0));
  const CapacityReport r3 = capacity(cyc.chain, cyc.decomp, StateSet(3, {0}), StateSet(3, {1}));
  CHECK(std::abs(r3.cap - 7.0 / 9.0) <= 1e-12);
  CHECK(std::abs(r3.cap_star - 7.0 / 9.0) <= 1e-12);
  CHECK(std::abs(dense_escape_capacity(cyc.chain, dense_stationary(cyc.chain), StateSet(3, {0}), StateSet(3, {1})) -
                 7.0 / 9.0) <= 1e-12);

  const Solved ring = solved(symmetric_ring(4, 0.5));
  const CapacityReport r4 = capacity(ring.chain, ring.decomp, StateSet(4, {0}), StateSet(4, {2}));
  CHECK(std::abs(r4.cap - 1.0 / 8.0) <= 1e-12);
  CHECK(std::abs(r4.cap_sym - 1.0 / 8.0) <= 1e-12);
}

TEST_CASE("capacity identities on random chains") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 120; ++trial) {
    const Instance inst = random_instance(rng, 5, 50);
    const Solved s = solved(inst.chain);
    const double C0 = sector_constant(s.decomp);
    const CapacityReport rep = capacity(s.chain, s.decomp, inst.A, inst.B, C0);
    const double cap = rep.cap;
    CHECK(std::abs(rep.cap - rep.cap_star) <= 1e-9 * cap);
    CHECK(std::abs(rep.cap - rep.cap_hitting) <= 1e-9 * cap);
    CHECK(rep.cap_sym <= cap * (1.0 + 1e-9));
    CHECK(rep.sector_bound_ok);
    CHECK(cap <= C0 * rep.cap_sym * (1.0 + 1e-9));

    const double reversed = capacity_value(s.chain, s.decomp, inst.B, inst.A);
    CHECK(std::abs(reversed - cap) <= 1e-9 * cap);
    const double oracle = dense_escape_capacity(s.chain, dense_stationary(s.chain), inst.A, inst.B);
    CHECK(std::abs(oracle - cap) <= 1e-9 * cap);

    // Monotonicity: enlarging B never decreases Cap(A, B).
    const std::size_t n = s.chain.size();
    std::vector<std::size_t> bigger = inst.B.members();
    for (std::size_t x = 0; x < n && bigger.size() < inst.B.size() + 3; ++x) {
      if (!inst.A.contains(x) && !inst.B.contains(x)) {
        bigger.push_back(x);
      }
    }
    const double cap_bigger = capacity_value(s.chain, s.decomp, inst.A, StateSet(n, bigger));
    CHECK(cap_bigger >= cap * (1.0 - 1e-12));
  }
}

TEST_CASE("harmonic measure") {
  const Solved cyc = solved(three_cycle(2.0, 1.0));
  const HarmonicMeasure point = harmonic_measure(cyc.chain, cyc.decomp, StateSet(3, {0}), StateSet(3, {1}));
  CHECK(point.nu[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(point.nu[1] == 0.0);
  CHECK(point.nu[2] == 0.0);

  // A = {0, 2}, B = {1}: nu(x) = mu(x) (-L* h*)(x) / Cap with h* = 1_A,
  // so the weight of x is the adjoint flux from x into B, mu(1) r(1, x).
  const StateSet A(3, {0, 2});
  const StateSet B(3, {1});
  const HarmonicMeasure nu = harmonic_measure(cyc.chain, cyc.decomp, A, B);
  const Eigen::MatrixXd Q = dense_generator(cyc.chain);
  const Eigen::VectorXd mu = dense_stationary(cyc.chain);
  const double w0 = mu(1) * Q(1, 0);
  const double w2 = mu(1) * Q(1, 2);
  CHECK(nu.nu[0] == doctest::Approx(w0 / (w0 + w2)).epsilon(1e-13));
  CHECK(nu.nu[2] == doctest::Approx(w2 / (w0 + w2)).epsilon(1e-13));
  CHECK(nu.normalization == doctest::Approx(capacity_value(cyc.chain, cyc.decomp, A, B)).epsilon(1e-12));

  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance inst = random_instance(rng, 5, 40);
    const Solved s = solved(inst.chain);
    const HarmonicMeasure hm = harmonic_measure(s.chain, s.decomp, inst.A, inst.B);
    double total = 0.0;
    for (std::size_t x = 0; x < s.chain.size(); ++x) {
      CHECK(hm.nu[x] >= 0.0);
      if (!inst.A.contains(x)) {
        CHECK(hm.nu[x] == 0.0);
      }
      total += hm.nu[x];
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
    const double cap = capacity_value(s.chain, s.decomp, inst.A, inst.B);
    CHECK(std::abs(hm.normalization - cap) <= 1e-9 * cap);
  }

  // Reversible: nu proportional to mu (-L h).
  const Solved rev = solved(random_reversible_chain(rng, 15));
  const StateSet rA(15, {1, 4, 6}), rB(15, {10});
  const HarmonicMeasure hr = harmonic_measure(rev.chain, rev.decomp, rA, rB);
  const Function h = equilibrium_potential(rev.chain, rA, rB);
  const Function Lh = apply_generator(rev.chain, h);
  double z = 0.0;
  for (auto x : rA) {
    z += -rev.mu[x] * Lh[x];
  }
  for (auto x : rA) {
    CHECK(hr.nu[x] == doctest::Approx(-rev.mu[x] * Lh[x] / z).epsilon(1e-9));
  }
}

TEST_CASE("mean hitting identity") {
  const Solved two = solved(two_state_chain());
  const MeanHitting zero =
      mean_hitting_identity(two.chain, two.decomp, StateSet(2, {0}), StateSet(2, {1}), Function{0.0, 0.0});
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);
  const MeanHitting one =
      mean_hitting_identity(two.chain, two.decomp, StateSet(2, {0}), StateSet(2, {1}), Function{1.0, 1.0});
  CHECK(one.lhs == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(one.rhs == doctest::Approx(0.5).epsilon(1e-14));

  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int trial = 0; trial < 60; ++trial) {
    const Instance inst = random_instance(rng, 5, 40);
    const Solved s = solved(inst.chain);
    Function f(s.chain.size());
    for (auto& v : f) {
      v = u(rng);
    }
    const MeanHitting mh = mean_hitting_identity(s.chain, s.decomp, inst.A, inst.B, f);
    CHECK(std::abs(mh.lhs - mh.rhs) <= 1e-8 * std::max(std::abs(mh.lhs), std::abs(mh.rhs)));
  }
}
