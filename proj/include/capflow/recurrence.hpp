#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "capflow/chain.hpp"
#include "capflow/flows.hpp"
#include "capflow/stats.hpp"

namespace capflow {

enum class WalkKind { Symmetric, Environment };

std::string_view to_string(WalkKind kind) noexcept;
WalkKind parse_walk_kind(std::string_view text);

/// Column signs X_j and row signs Y_k in {-1, +1} for j, k in [-extent, extent].
/// Each sign is a pure function of (seed, index), so environments for
/// different extents agree where they overlap.
struct Environment {
  std::uint64_t seed = 0;
  long extent = 0;
  std::vector<int> X;  // X[j + extent]
  std::vector<int> Y;  // Y[k + extent]

  [[nodiscard]] int x(long j) const { return X[static_cast<std::size_t>(j + extent)]; }
  [[nodiscard]] int y(long k) const { return Y[static_cast<std::size_t>(k + extent)]; }
};

Environment make_environment(std::uint64_t seed, long extent);

/// Walk on the box B_N = {-(N-1), ..., N-1}^2 with every exit sent to one
/// extra state standing for the complement. The extra state feeds back into
/// the box with the rates the lattice walk has from the ring |x|_m = N, so
/// the counting measure stays exactly stationary and the chain irreducible;
/// capacities to the extra state do not depend on those return rates.
struct EscapeProblem {
  long N = 0;
  WalkKind kind = WalkKind::Symmetric;
  RateChain chain;
  Measure M;            // counting measure, unnormalized
  std::size_t origin = 0;
  std::size_t sink = 0;
  std::optional<Environment> environment;

  [[nodiscard]] std::size_t state(long i, long j) const;
  [[nodiscard]] std::pair<long, long> position(std::size_t state) const;
};

/// Symmetric: rate 1/4 to each lattice neighbour. Environment: rate 1/2 to
/// (i + Y_j, j) and 1/2 to (i, j + X_i). Requires N >= 2.
EscapeProblem build_escape_problem(long N, WalkKind kind, std::uint64_t seed = 0);

/// Cap({0}, complement of B_N) under the counting measure.
double escape_capacity(const EscapeProblem& problem);

/// Dirichlet certificate of f_N(x) = 1 - log|x|_m / log N (|0|_m = 1,
/// f_N = 0 outside the box) with the zero flow.
Certificate log_certificate(const EscapeProblem& problem);

struct RecurrenceRow {
  long N = 0;
  std::size_t replica = 0;
  double cap = 0.0;
  double cap_times_logN = 0.0;
  double certificate = 0.0;
};

/// One row per N for the symmetric walk, one per (N, replica) for random
/// environments; replica r uses environment seed `seed + r`.
std::vector<RecurrenceRow> recurrence_sweep(WalkKind kind, std::span<const long> Ns, std::size_t replicas,
                                            std::uint64_t seed, unsigned threads = 1);

struct RecurrenceBand {
  long N = 0;
  SampleSummary cap_times_logN;
  double lower95 = 0.0;
  double upper95 = 0.0;
};

/// Mean of Cap log N per N across replicas with a normal 95% interval.
std::vector<RecurrenceBand> recurrence_bands(std::span<const RecurrenceRow> rows);

}  // namespace capflow
