#include "capflow/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "capflow/captheory.hpp"
#include "capflow/parallel.hpp"

namespace capflow {

std::string_view to_string(WalkKind kind) noexcept {
  return kind == WalkKind::Symmetric ? "symmetric" : "environment";
}

WalkKind parse_walk_kind(std::string_view text) {
  if (text == "symmetric") {
    return WalkKind::Symmetric;
  }
  if (text == "environment") {
    return WalkKind::Environment;
  }
  fail(ErrorKind::InvalidArgument, "walk kind must be 'symmetric' or 'environment', got '" + std::string(text) + "'");
}

Environment make_environment(std::uint64_t seed, long extent) {
  require(extent >= 0, ErrorKind::InvalidArgument, "environment extent must be nonnegative");
  const CounterRng rng(seed);
  auto zigzag = [](long i) { return i >= 0 ? 2 * static_cast<std::uint64_t>(i) : 2 * static_cast<std::uint64_t>(-i) - 1; };
  Environment env;
  env.seed = seed;
  env.extent = extent;
  for (long i = -extent; i <= extent; ++i) {
    env.X.push_back((rng.at(2 * zigzag(i)) >> 63) != 0 ? 1 : -1);
    env.Y.push_back((rng.at(2 * zigzag(i) + 1) >> 63) != 0 ? 1 : -1);
  }
  return env;
}

std::size_t EscapeProblem::state(long i, long j) const {
  const long side = 2 * N - 1;
  return static_cast<std::size_t>((i + N - 1) + side * (j + N - 1));
}

std::pair<long, long> EscapeProblem::position(std::size_t s) const {
  const long side = 2 * N - 1;
  const auto k = static_cast<long>(s);
  return {k % side - (N - 1), k / side - (N - 1)};
}

namespace {

long max_norm(long i, long j) { return std::max(std::abs(i), std::abs(j)); }

// Lattice jumps out of (i, j), each with its rate.
template <class Visit>
void lattice_jumps(WalkKind kind, const Environment* env, long i, long j, Visit&& visit) {
  if (kind == WalkKind::Symmetric) {
    visit(i + 1, j, 0.25);
    visit(i - 1, j, 0.25);
    visit(i, j + 1, 0.25);
    visit(i, j - 1, 0.25);
  } else {
    visit(i + env->y(j), j, 0.5);
    visit(i, j + env->x(i), 0.5);
  }
}

}  // namespace

EscapeProblem build_escape_problem(long N, WalkKind kind, std::uint64_t seed) {
  require(N >= 2, ErrorKind::InvalidArgument, "box radius N must be at least 2");
  std::optional<Environment> env;
  if (kind == WalkKind::Environment) {
    env = make_environment(seed, N);
  }
  const long side = 2 * N - 1;
  const auto interior = static_cast<std::size_t>(side * side);
  const std::size_t sink = interior;

  auto index = [&](long i, long j) { return static_cast<std::size_t>((i + N - 1) + side * (j + N - 1)); };
  auto inside = [&](long i, long j) { return max_norm(i, j) <= N - 1; };

  std::vector<RateEntry> entries;
  entries.reserve(4 * interior + 8 * static_cast<std::size_t>(N));
  for (long j = -(N - 1); j <= N - 1; ++j) {
    for (long i = -(N - 1); i <= N - 1; ++i) {
      const auto x = index(i, j);
      lattice_jumps(kind, env ? &*env : nullptr, i, j, [&](long a, long b, double r) {
        entries.push_back({x, inside(a, b) ? index(a, b) : sink, r});
      });
    }
  }
  // Return rates: the lattice flow from the ring |y|_m = N into the box.
  for (long j = -N; j <= N; ++j) {
    for (long i = -N; i <= N; ++i) {
      if (max_norm(i, j) != N) {
        continue;
      }
      lattice_jumps(kind, env ? &*env : nullptr, i, j, [&](long a, long b, double r) {
        if (inside(a, b)) {
          entries.push_back({sink, index(a, b), r});
        }
      });
    }
  }
  RateChain chain = build_chain(interior + 1, entries);
  EscapeProblem problem{N, kind, std::move(chain), make_measure(std::vector<double>(interior + 1, 1.0), false),
                        index(0, 0), sink, std::move(env)};
  return problem;
}

double escape_capacity(const EscapeProblem& problem) {
  const auto n = problem.chain.size();
  const EdgeDecomposition decomp = edge_decomposition(problem.chain, problem.M);
  return capacity_value(problem.chain, decomp, StateSet(n, {problem.origin}), StateSet(n, {problem.sink}));
}

Certificate log_certificate(const EscapeProblem& problem) {
  const auto n = problem.chain.size();
  const EdgeDecomposition decomp = edge_decomposition(problem.chain, problem.M);
  const double log_n = std::log(static_cast<double>(problem.N));
  Function f(n, 0.0);
  for (std::size_t s = 0; s < problem.sink; ++s) {
    const auto [i, j] = problem.position(s);
    const long norm = std::max(1L, max_norm(i, j));
    f[s] = 1.0 - std::log(static_cast<double>(norm)) / log_n;
  }
  const StateSet A(n, {problem.origin});
  const StateSet B(n, {problem.sink});
  return dirichlet_certificate(decomp, A, B, f, zero_flow(decomp));
}

std::vector<RecurrenceRow> recurrence_sweep(WalkKind kind, std::span<const long> Ns, std::size_t replicas,
                                            std::uint64_t seed, unsigned threads) {
  require(!Ns.empty(), ErrorKind::InvalidArgument, "the sweep needs at least one N");
  for (std::size_t k = 0; k < Ns.size(); ++k) {
    require(Ns[k] >= 2, ErrorKind::InvalidArgument, "every N must be at least 2");
    require(k == 0 || Ns[k] > Ns[k - 1], ErrorKind::InvalidArgument, "N values must be increasing");
  }
  const std::size_t reps = kind == WalkKind::Symmetric ? 1 : replicas;
  require(reps >= 1, ErrorKind::InvalidArgument, "need at least one replica");

  std::vector<RecurrenceRow> rows(Ns.size() * reps);
  parallel_for(rows.size(), threads, [&](std::size_t t) {
    const long N = Ns[t / reps];
    const std::size_t replica = t % reps;
    const EscapeProblem problem = build_escape_problem(N, kind, seed + replica);
    RecurrenceRow row;
    row.N = N;
    row.replica = replica;
    row.cap = escape_capacity(problem);
    row.cap_times_logN = row.cap * std::log(static_cast<double>(N));
    row.certificate = log_certificate(problem).value;
    rows[t] = row;
  });
  return rows;
}

std::vector<RecurrenceBand> recurrence_bands(std::span<const RecurrenceRow> rows) {
  std::map<long, std::vector<double>> by_n;
  for (const auto& row : rows) {
    by_n[row.N].push_back(row.cap_times_logN);
  }
  std::vector<RecurrenceBand> out;
  for (const auto& [N, values] : by_n) {
    RecurrenceBand band;
    band.N = N;
    band.cap_times_logN = summarize(values);
    band.lower95 = band.cap_times_logN.mean - 1.96 * band.cap_times_logN.std_error;
    band.upper95 = band.cap_times_logN.mean + 1.96 * band.cap_times_logN.std_error;
    out.push_back(band);
  }
  return out;
}

}  // namespace capflow
