#include "capflow/captheory.hpp"

#include <cmath>
#include <sstream>

namespace capflow {

namespace {

void check_identity(const char* what, double value, double cap) {
  if (!(std::abs(value - cap) <= 1e-9 * std::abs(cap))) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << " = " << value << " disagrees with Cap = " << cap << " beyond 1e-9 relative";
    fail(ErrorKind::SolverFailure, msg.str());
  }
}

}  // namespace

void validate_pair(std::size_t n, const StateSet& A, const StateSet& B) {
  require(A.universe() == n && B.universe() == n, ErrorKind::InvalidArgument, "state sets do not match the chain");
  require(!A.empty(), ErrorKind::EmptySet, "set A is empty");
  require(!B.empty(), ErrorKind::EmptySet, "set B is empty");
  require(!A.intersects(B), ErrorKind::OverlappingSets, "sets A and B overlap");
}

double dirichlet_form(const EdgeDecomposition& decomp, std::span<const double> f) {
  require(f.size() == decomp.size(), ErrorKind::InvalidArgument, "function size does not match the chain");
  double sum = 0.0;
  for (const auto& e : decomp.edges()) {
    const double d = f[e.y] - f[e.x];
    sum += e.s * d * d;
  }
  return sum;
}

Function equilibrium_potential(const RateChain& chain, const StateSet& A, const StateSet& B) {
  Function b(chain.size(), 0.0);
  for (auto x : A) {
    b[x] = 1.0;
  }
  const Function zero(chain.size(), 0.0);
  return solve_poisson(chain, A.united(B), b, zero);
}

Potentials equilibrium_potentials(const RateChain& chain, const EdgeDecomposition& decomp, const StateSet& A,
                                  const StateSet& B) {
  validate_pair(chain.size(), A, B);
  const RateChain adjoint = adjoint_chain(chain, decomp.mu());
  return {equilibrium_potential(chain, A, B), equilibrium_potential(adjoint, A, B), A, B};
}

double capacity_value(const RateChain& chain, const EdgeDecomposition& decomp, const StateSet& A,
                      const StateSet& B) {
  validate_pair(chain.size(), A, B);
  return dirichlet_form(decomp, equilibrium_potential(chain, A, B));
}

CapacityReport capacity(const RateChain& chain, const EdgeDecomposition& decomp, const StateSet& A,
                        const StateSet& B, std::optional<double> sector_C0) {
  const Potentials pot = equilibrium_potentials(chain, decomp, A, B);
  CapacityReport report;
  report.cap = dirichlet_form(decomp, pot.h);
  report.cap_star = dirichlet_form(decomp, pot.h_star);

  const auto& mu = decomp.mu();
  double hitting = 0.0;
  for (auto x : A) {
    double escape = 0.0;
    chain.for_each_jump(x, [&](std::size_t y, double r) { escape += r * (1.0 - pot.h[y]); });
    hitting += mu[x] * escape;
  }
  report.cap_hitting = hitting;

  const RateChain sym = symmetrized_chain(decomp);
  report.cap_sym = dirichlet_form(decomp, equilibrium_potential(sym, A, B));

  check_identity("Cap*", report.cap_star, report.cap);
  check_identity("escape-probability capacity", report.cap_hitting, report.cap);
  if (!(report.cap_sym <= report.cap * (1.0 + 1e-9))) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "symmetrized capacity " << report.cap_sym << " exceeds Cap = " << report.cap;
    fail(ErrorKind::SolverFailure, msg.str());
  }
  if (sector_C0) {
    report.sector_C0 = sector_C0;
    report.sector_bound_ok = report.cap <= *sector_C0 * report.cap_sym * (1.0 + 1e-9);
  }
  return report;
}

HarmonicMeasure harmonic_measure(const RateChain& chain, const EdgeDecomposition& decomp, const StateSet& A,
                                 const StateSet& B) {
  validate_pair(chain.size(), A, B);
  const RateChain adjoint = adjoint_chain(chain, decomp.mu());
  const Function h_star = equilibrium_potential(adjoint, A, B);
  const auto& mu = decomp.mu();

  HarmonicMeasure out;
  out.nu.assign(chain.size(), 0.0);
  for (auto x : A) {
    // (-L* h*)(x) = sum_y r*(x,y) (1 - h*(y)), nonnegative term by term.
    double escape = 0.0;
    adjoint.for_each_jump(x, [&](std::size_t y, double r) { escape += r * (1.0 - h_star[y]); });
    out.nu[x] = mu[x] * escape;
    out.normalization += out.nu[x];
  }
  check_identity("harmonic-measure normalization", out.normalization, dirichlet_form(decomp, h_star));
  for (auto x : A) {
    out.nu[x] /= out.normalization;
  }
  return out;
}

MeanHitting mean_hitting_identity(const RateChain& chain, const EdgeDecomposition& decomp, const StateSet& A,
                                  const StateSet& B, std::span<const double> f) {
  require(f.size() == chain.size(), ErrorKind::InvalidArgument, "function size does not match the chain");
  const HarmonicMeasure nu = harmonic_measure(chain, decomp, A, B);
  const RateChain adjoint = adjoint_chain(chain, decomp.mu());
  const Function h_star = equilibrium_potential(adjoint, A, B);
  const double cap = dirichlet_form(decomp, equilibrium_potential(chain, A, B));

  const Function zero(chain.size(), 0.0);
  const Function u = solve_poisson(chain, B, zero, f);
  MeanHitting out;
  for (auto x : A) {
    out.lhs += nu.nu[x] * u[x];
  }
  const auto& mu = decomp.mu();
  double integral = 0.0;
  for (std::size_t x = 0; x < chain.size(); ++x) {
    integral += h_star[x] * f[x] * mu[x];
  }
  out.rhs = integral / cap;
  return out;
}

}  // namespace capflow
