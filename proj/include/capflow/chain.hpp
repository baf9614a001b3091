#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "capflow/error.hpp"
#include "capflow/rng.hpp"

namespace capflow {

/// Real function on the states of a chain, indexed by state.
using Function = std::vector<double>;

/// Off-diagonal jump rates; row x holds r(x, .). Diagonal entries are never stored.
using SparseRates = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct RateEntry {
  std::size_t from = 0;
  std::size_t to = 0;
  double rate = 0.0;
};

/// Subset of the states {0, ..., universe-1}; members are kept sorted and unique.
class StateSet {
 public:
  StateSet() = default;
  StateSet(std::size_t universe, std::vector<std::size_t> members);
  StateSet(std::size_t universe, std::initializer_list<std::size_t> members)
      : StateSet(universe, std::vector<std::size_t>(members)) {}

  static StateSet from_mask(const std::vector<char>& mask);

  [[nodiscard]] bool contains(std::size_t x) const { return x < mask_.size() && mask_[x] != 0; }
  [[nodiscard]] const std::vector<std::size_t>& members() const noexcept { return members_; }
  [[nodiscard]] std::size_t size() const noexcept { return members_.size(); }
  [[nodiscard]] bool empty() const noexcept { return members_.empty(); }
  [[nodiscard]] std::size_t universe() const noexcept { return mask_.size(); }

  [[nodiscard]] StateSet complement() const;
  [[nodiscard]] StateSet united(const StateSet& other) const;
  [[nodiscard]] bool intersects(const StateSet& other) const;

  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }

  friend bool operator==(const StateSet& a, const StateSet& b) { return a.mask_ == b.mask_; }

 private:
  std::vector<char> mask_;
  std::vector<std::size_t> members_;
};

/// Finite, irreducible continuous-time Markov chain.
///
/// The generator acts as (Lf)(x) = sum_y r(x,y) (f(y) - f(x)). Instances are
/// only produced by build_chain, which validates rates and strong
/// connectivity of the positive-rate graph.
class RateChain {
 public:
  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(rates_.rows()); }
  [[nodiscard]] const SparseRates& rates() const noexcept { return rates_; }
  [[nodiscard]] double rate(std::size_t from, std::size_t to) const;
  /// lambda(x) = sum_y r(x,y).
  [[nodiscard]] double total_rate(std::size_t x) const { return total_rates_[x]; }
  [[nodiscard]] const std::vector<double>& total_rates() const noexcept { return total_rates_; }
  [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }
  [[nodiscard]] std::vector<RateEntry> entries() const;

  template <class Visitor>
  void for_each_jump(std::size_t x, Visitor&& visit) const {
    for (SparseRates::InnerIterator it(rates_, static_cast<Eigen::Index>(x)); it; ++it) {
      visit(static_cast<std::size_t>(it.col()), it.value());
    }
  }

 private:
  friend RateChain build_chain(std::size_t, std::span<const RateEntry>, std::vector<std::string>);
  RateChain(SparseRates rates, std::vector<std::string> labels);

  SparseRates rates_;
  std::vector<double> total_rates_;
  std::vector<std::string> labels_;
};

/// Validate and assemble a chain. Duplicate (from, to) entries are summed and
/// zero rates dropped.
///
/// Throws NegativeRate, NotIrreducible or InvalidArgument (self-rates,
/// out-of-range indices, label count mismatch).
RateChain build_chain(std::size_t n, std::span<const RateEntry> entries, std::vector<std::string> labels = {});

/// Positive weights on states. Capacities scale linearly with the measure, so
/// unnormalized measures are allowed (the lattice walks use M = 1).
struct Measure {
  std::vector<double> weights;
  bool normalized = false;

  [[nodiscard]] std::size_t size() const noexcept { return weights.size(); }
  double operator[](std::size_t x) const { return weights[x]; }
  [[nodiscard]] double total() const;
  [[nodiscard]] double mass(const StateSet& set) const;
};

/// Build a measure, checking positivity; normalizes when asked.
Measure make_measure(std::vector<double> weights, bool normalize);

/// Unique normalized mu with mu L = 0, from a sparse LU solve in which one
/// (redundant) balance equation is replaced by the normalization sum = 1.
/// Throws SolverFailure when the relative residual exceeds 1e-10.
Measure stationary_measure(const RateChain& chain);

/// Relative balance residual  max_y |(mu L)(y)| / (max_x mu(x) * max_x lambda(x)).
double stationary_residual(const RateChain& chain, const Measure& mu);

/// Adjoint chain in L2(mu): r*(x,y) = mu(y) r(y,x) / mu(x).
RateChain adjoint_chain(const RateChain& chain, const Measure& mu);

/// Unordered edge {x < y} of the rate graph with conductance s(x,y) and
/// current j(x,y) (the value for orientation x -> y).
struct Edge {
  std::size_t x = 0;
  std::size_t y = 0;
  double s = 0.0;
  double j = 0.0;
};

/// Edge seen from one endpoint: orientation is +1 when that endpoint is edge.x.
struct Incidence {
  std::size_t neighbor = 0;
  std::size_t edge = 0;
  double orientation = 1.0;
};

/// Split of the stationary flux mu(x) r(x,y) = s(x,y) + j(x,y) into a
/// symmetric conductance and an antisymmetric, divergence-free current.
class EdgeDecomposition {
 public:
  [[nodiscard]] std::size_t size() const noexcept { return mu_.size(); }
  [[nodiscard]] const Measure& mu() const noexcept { return mu_; }
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
  [[nodiscard]] const std::vector<Incidence>& incident(std::size_t x) const { return incidence_[x]; }
  [[nodiscard]] const std::vector<double>& lambda() const noexcept { return lambda_; }

  [[nodiscard]] std::optional<std::size_t> find_edge(std::size_t x, std::size_t y) const;
  /// s(x,y); zero when x and y are not adjacent.
  [[nodiscard]] double conductance(std::size_t x, std::size_t y) const;
  /// j(x,y) = -j(y,x); zero when x and y are not adjacent.
  [[nodiscard]] double current(std::size_t x, std::size_t y) const;

  /// max_x |sum_y j(x,y)| / sum_y s(x,y).
  [[nodiscard]] double divergence_residual() const noexcept { return divergence_residual_; }
  /// True when every |j| <= tol * max s.
  [[nodiscard]] bool reversible(double tol = 1e-12) const;

 private:
  friend EdgeDecomposition edge_decomposition(const RateChain&, const Measure&);

  Measure mu_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Incidence>> incidence_;
  std::vector<double> lambda_;
  double divergence_residual_ = 0.0;
};

/// Throws NotStationary when the current has relative divergence above 1e-9.
EdgeDecomposition edge_decomposition(const RateChain& chain, const Measure& mu);

/// Chain generated by the symmetric part L^s: rates s(x,y) / mu(x).
RateChain symmetrized_chain(const EdgeDecomposition& decomp);

/// (Lf)(x) for every state.
Function apply_generator(const RateChain& chain, std::span<const double> f);

/// Factorized Dirichlet problem  L u = -f off C,  u = b on C.
///
/// The LU factorization of -L restricted to the complement of C is computed
/// once; solve() may be called for many (b, f). Solutions are checked to a
/// normwise backward error of 1e-10, after one step of iterative refinement.
class DirichletSolver {
 public:
  DirichletSolver(const RateChain& chain, const StateSet& boundary);

  /// b and f are full-length; b is read on C, f off C.
  [[nodiscard]] Function solve(std::span<const double> b, std::span<const double> f) const;

  [[nodiscard]] const StateSet& boundary() const noexcept { return boundary_; }
  [[nodiscard]] double last_residual() const noexcept { return last_residual_; }

 private:
  StateSet boundary_;
  std::vector<std::ptrdiff_t> position_;  // state -> unknown index, -1 on C
  std::vector<std::size_t> unknowns_;
  Eigen::SparseMatrix<double> matrix_;    // -L on the unknowns
  Eigen::SparseMatrix<double> coupling_;  // r(x, y) for x unknown, y in C
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  double matrix_norm_ = 0.0;
  mutable double last_residual_ = 0.0;
};

/// u(x) = E_x[ b(X(H_C)) + int_0^{H_C} f(X_t) dt ]; throws EmptyTargetSet.
Function solve_poisson(const RateChain& chain, const StateSet& C, std::span<const double> b,
                       std::span<const double> f);

struct SamplePath {
  std::vector<double> times;        // jump times, times[0] = 0
  std::vector<std::size_t> states;  // state held from times[k]
  double horizon = 0.0;
  std::uint64_t seed = 0;
};

/// Exact jump-chain sampler: exponential holding times and embedded jump
/// probabilities r(x,y)/lambda(x).
class JumpSampler {
 public:
  explicit JumpSampler(const RateChain& chain);

  struct Jump {
    double holding = 0.0;
    std::size_t next = 0;
  };

  Jump step(std::size_t x, CounterRng& rng) const;
  [[nodiscard]] std::size_t size() const noexcept { return total_.size(); }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> targets_;
  std::vector<double> cumulative_;
  std::vector<double> total_;
};

/// Path on [0, horizon] from x0; identical for identical (seed, stream).
SamplePath simulate(const RateChain& chain, std::size_t x0, double horizon, std::uint64_t seed,
                    std::uint64_t stream = 0);

/// Smallest C0 with (int (Lf) g dmu)^2 <= C0 D(f,f) D(g,g).
///
/// With Q the Dirichlet-form matrix (Q_xy = -s(x,y), Q_xx = sum_y s(x,y)) and
/// J_xy = j(x,y), one has int (Lf) g dmu = g.(-Q + J) f, and therefore
/// C0 = 1 + ||Q^{-1/2} J Q^{-1/2}||^2 on the complement of the constants.
/// Dense eigen-decomposition, limited to 3000 states.
double sector_constant(const EdgeDecomposition& decomp);

}  // namespace capflow
