#pragma once

#include <optional>
#include <span>

#include "capflow/chain.hpp"

namespace capflow {

/// Forward and adjoint equilibrium potentials of the pair (A, B):
/// h(x) = P_x[H_A < H_B] and the same for the time-reversed chain.
struct Potentials {
  Function h;
  Function h_star;
  StateSet A;
  StateSet B;
};

struct CapacityReport {
  double cap = 0.0;          // D(h, h)
  double cap_star = 0.0;     // D(h*, h*)
  double cap_sym = 0.0;      // capacity of the symmetrized chain
  double cap_hitting = 0.0;  // sum_{x in A} mu(x) sum_y r(x,y) (1 - h(y))
  std::optional<double> sector_C0;
  bool sector_bound_ok = true;
};

/// Probability weights on A (zero elsewhere), nu(x) = mu(x) (-L* h*)(x) / Cap.
struct HarmonicMeasure {
  std::vector<double> nu;
  double normalization = 0.0;  // sum_{x in A} mu(x) (-L* h*)(x), equals Cap*
};

struct MeanHitting {
  double lhs = 0.0;  // E_nu[ int_0^{H_B} f(X_t) dt ]
  double rhs = 0.0;  // int h* f dmu / Cap
};

/// Throws EmptySet or OverlappingSets; InvalidArgument for foreign sets.
void validate_pair(std::size_t n, const StateSet& A, const StateSet& B);

/// D(f, f) = sum over edges of s(x,y) (f(y) - f(x))^2.
double dirichlet_form(const EdgeDecomposition& decomp, std::span<const double> f);

/// Equilibrium potential of (A, B) for one chain, without validation.
Function equilibrium_potential(const RateChain& chain, const StateSet& A, const StateSet& B);

Potentials equilibrium_potentials(const RateChain& chain, const EdgeDecomposition& decomp, const StateSet& A,
                                  const StateSet& B);

/// Full report; the identities Cap = Cap* = cap_hitting and Cap_s <= Cap are
/// enforced at 1e-9 relative (SolverFailure otherwise). When C0 is given,
/// sector_bound_ok records whether Cap <= C0 Cap_s.
CapacityReport capacity(const RateChain& chain, const EdgeDecomposition& decomp, const StateSet& A,
                        const StateSet& B, std::optional<double> sector_C0 = std::nullopt);

/// Cap(A, B) = D(h, h) alone, for callers that need many capacities.
double capacity_value(const RateChain& chain, const EdgeDecomposition& decomp, const StateSet& A,
                      const StateSet& B);

HarmonicMeasure harmonic_measure(const RateChain& chain, const EdgeDecomposition& decomp, const StateSet& A,
                                 const StateSet& B);

MeanHitting mean_hitting_identity(const RateChain& chain, const EdgeDecomposition& decomp, const StateSet& A,
                                  const StateSet& B, std::span<const double> f);

}  // namespace capflow
