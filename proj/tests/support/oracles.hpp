#pragma once

// Random chain generators and dense reference computations. The oracles use
// dense QR/LU on the embedded jump chain and never call the sparse solvers
// they are compared against.

#include <cstddef>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "capflow/chain.hpp"
#include "capflow/flows.hpp"

namespace capflow::testing {

/// r(0,1) = 2, r(1,0) = 1; mu = (1/3, 2/3).
RateChain two_state_chain();
/// r(x, x+1) = p, r(x, x-1) = q on three states; mu uniform.
RateChain three_cycle(double p, double q);
/// Ring of N states with the given rate in each direction.
RateChain symmetric_ring(std::size_t N, double rate);

struct Instance {
  RateChain chain;
  StateSet A;
  StateSet B;
};

/// Irreducible chain: a random Hamiltonian cycle plus sparse extra edges,
/// rates log-uniform in [0.1, 10].
RateChain random_chain(std::mt19937_64& rng, std::size_t n);

/// Reversible chain: random weights pi and symmetric conductances on a
/// random connected graph, r(x,y) = c(x,y) / pi(x).
RateChain random_reversible_chain(std::mt19937_64& rng, std::size_t n);

/// Random nonempty disjoint A, B of size at most max(1, n/4).
std::pair<StateSet, StateSet> random_pair(std::mt19937_64& rng, std::size_t n);

Instance random_instance(std::mt19937_64& rng, std::size_t n_min, std::size_t n_max, bool reversible = false);

/// A chain with its stationary measure and edge decomposition.
struct Solved {
  RateChain chain;
  Measure mu;
  EdgeDecomposition decomp;
};
Solved solved(RateChain chain);

Function random_function(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0);
/// Independent uniform values in [-1, 1] on every edge.
EdgeFlow random_flow(std::mt19937_64& rng, const EdgeDecomposition& decomp);
/// on_a on A, 0 on B and uniform in [-scale, scale] elsewhere.
Function boundary_function(std::mt19937_64& rng, std::size_t n, const StateSet& A, const StateSet& B, double on_a,
                           double scale);

Eigen::MatrixXd dense_generator(const RateChain& chain);

/// Least-squares solve of [Q^T; 1^T] mu = [0; 1] by column-pivoted QR.
Eigen::VectorXd dense_stationary(const RateChain& chain);

/// P_x[H_A < H_B] from the embedded jump chain, dense LU on the complement.
Eigen::VectorXd dense_hitting_probability(const RateChain& chain, const StateSet& A, const StateSet& B);

/// sum_{x in A} mu(x) lambda(x) P_x[H_B < H_A^+] with the jump chain.
double dense_escape_capacity(const RateChain& chain, const Eigen::VectorXd& mu, const StateSet& A,
                             const StateSet& B);

/// E_x[int_0^{H_C} f(X_t) dt] by a dense solve of -Q u = f off C.
Eigen::VectorXd dense_accumulated(const RateChain& chain, const StateSet& C, const std::vector<double>& f);

/// sup (g^T M f)^2 / (D(f) D(g)) with M = diag(mu) Q, from the singular values
/// of the whitened M on the complement of the constants.
double dense_sector_constant(const RateChain& chain, const Eigen::VectorXd& mu);

/// Monte Carlo estimate of E_x[int_0^{H_C} f(X_t) dt] with its standard error.
struct MonteCarlo {
  double mean = 0.0;
  double std_error = 0.0;
};
MonteCarlo mc_accumulated(const RateChain& chain, const StateSet& C, const std::vector<double>& f,
                          const std::vector<double>& start_law, std::size_t replicas, std::uint64_t seed);

}  // namespace capflow::testing
