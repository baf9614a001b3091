#include <cmath>

#include "doctest.h"

#include "capflow/captheory.hpp"
#include "capflow/recurrence.hpp"
#include "checks.hpp"
#include "oracles.hpp"

using namespace capflow;
using namespace capflow::testing;

namespace {

double dense_cap(const EscapeProblem& p) {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(p.chain.size()));
  const auto n = p.chain.size();
  return dense_escape_capacity(p.chain, ones, StateSet(n, {p.origin}), StateSet(n, {p.sink}));
}

}  // namespace

TEST_CASE("escape problem structure") {
  const EscapeProblem sym = build_escape_problem(2, WalkKind::Symmetric);
  CHECK(sym.chain.size() == 10);
  CHECK(sym.state(0, 0) == sym.origin);
  CHECK(sym.position(sym.state(-1, 1)) == std::pair<long, long>{-1, 1});
  CHECK(sym.chain.rate(sym.origin, sym.state(1, 0)) == 0.25);
  // a corner has two exits
  CHECK(sym.chain.rate(sym.state(1, 1), sym.sink) == 0.5);
  for (std::size_t x = 0; x < sym.sink; ++x) {
    CHECK(sym.chain.total_rate(x) == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(stationary_residual(sym.chain, sym.M) <= 1e-14);
  CHECK_FALSE(sym.environment.has_value());

  const EscapeProblem env = build_escape_problem(5, WalkKind::Environment, 3);
  REQUIRE(env.environment.has_value());
  const Environment& e = *env.environment;
  for (long i = -3; i <= 3; ++i) {
    for (long j = -3; j <= 3; ++j) {
      const std::size_t x = env.state(i, j);
      CHECK(env.chain.rate(x, env.state(i + e.y(j), j)) == 0.5);
      CHECK(env.chain.rate(x, env.state(i, j + e.x(i))) == 0.5);
      CHECK(env.chain.total_rate(x) == 1.0);
    }
  }
  CHECK(stationary_residual(env.chain, env.M) <= 1e-13);

  CHECK(error_kind([] { build_escape_problem(1, WalkKind::Symmetric); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind([] { parse_walk_kind("lazy"); }) == ErrorKind::InvalidArgument);
  CHECK(parse_walk_kind("environment") == WalkKind::Environment);
}

TEST_CASE("environments are deterministic and nested") {
  const Environment a = make_environment(7, 10);
  const Environment b = make_environment(7, 10);
  const Environment big = make_environment(7, 30);
  CHECK(a.X == b.X);
  CHECK(a.Y == b.Y);
  for (long i = -10; i <= 10; ++i) {
    CHECK(a.x(i) == big.x(i));
    CHECK(a.y(i) == big.y(i));
    CHECK(std::abs(a.x(i)) == 1);
  }
  const Environment other = make_environment(8, 30);
  CHECK(other.X != big.X);
  // both signs occur in a long environment
  int sum = 0;
  for (int s : big.X) {
    sum += s;
  }
  CHECK(std::abs(sum) < 61);
}

TEST_CASE("escape capacities against the dense oracle") {
  const EscapeProblem sym = build_escape_problem(2, WalkKind::Symmetric);
  // From the origin every neighbour is one step from the exit.
  const double cap = escape_capacity(sym);
  CHECK(std::abs(cap - dense_cap(sym)) <= 1e-12);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const EscapeProblem env = build_escape_problem(2, WalkKind::Environment, seed);
    const double c = escape_capacity(env);
    CHECK(std::abs(c - dense_cap(env)) <= 1e-12);
  }
  const EscapeProblem mid = build_escape_problem(6, WalkKind::Environment, 4);
  CHECK(std::abs(escape_capacity(mid) - dense_cap(mid)) <= 1e-10 * escape_capacity(mid));
}

TEST_CASE("capacities decrease with the box and certificates dominate") {
  double previous = 1.0;
  for (long N : {2L, 4L, 8L, 16L}) {
    const EscapeProblem p = build_escape_problem(N, WalkKind::Symmetric);
    const double cap = escape_capacity(p);
    CHECK(cap <= previous * (1.0 + 1e-12));
    previous = cap;
    const Certificate cert = log_certificate(p);
    CHECK(cert.boundary_ok);
    CHECK(cert.feasibility.feasible);
    CHECK(cert.value >= cap * (1.0 - 1e-12));
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const EscapeProblem p = build_escape_problem(8, WalkKind::Environment, seed);
    CHECK(log_certificate(p).value >= escape_capacity(p) * (1.0 - 1e-12));
  }
}

TEST_CASE("recurrence sweeps and bands") {
  const std::vector<long> Ns{4, 8};
  const auto sym = recurrence_sweep(WalkKind::Symmetric, Ns, 5, 0);
  REQUIRE(sym.size() == 2);
  CHECK(sym[0].N == 4);
  CHECK(sym[1].N == 8);
  CHECK(sym[0].cap == escape_capacity(build_escape_problem(4, WalkKind::Symmetric)));
  CHECK(sym[1].cap_times_logN == doctest::Approx(sym[1].cap * std::log(8.0)).epsilon(1e-15));

  const auto env = recurrence_sweep(WalkKind::Environment, Ns, 3, 10, 2);
  REQUIRE(env.size() == 6);
  for (const auto& row : env) {
    const EscapeProblem p = build_escape_problem(row.N, WalkKind::Environment, 10 + row.replica);
    CHECK(row.cap == escape_capacity(p));
    CHECK(row.certificate >= row.cap);
  }
  CHECK(recurrence_sweep(WalkKind::Environment, Ns, 3, 10, 1).size() == 6);

  const auto bands = recurrence_bands(env);
  REQUIRE(bands.size() == 2);
  CHECK(bands[0].N == 4);
  CHECK(bands[0].cap_times_logN.count == 3);
  CHECK(bands[0].lower95 <= bands[0].cap_times_logN.mean);
  CHECK(bands[0].upper95 >= bands[0].cap_times_logN.mean);
  CHECK(bands[0].upper95 - bands[0].cap_times_logN.mean ==
        doctest::Approx(1.96 * bands[0].cap_times_logN.std_error).epsilon(1e-12));
}
