#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "capflow/chain.hpp"
#include "capflow/landscape.hpp"
#include "capflow/stats.hpp"

namespace capflow {

/// Metastable sets V_1..V_n and the remainder Delta. Labels are 1..n for the
/// wells and 0 for Delta.
struct WellPartition {
  std::vector<StateSet> wells;
  StateSet delta;
  std::vector<std::size_t> minima;  // a reference point of each well
  std::vector<int> label;           // state -> label
  double kappa = 0.0;

  [[nodiscard]] std::size_t size() const noexcept { return wells.size(); }
  /// Union of the wells other than j (0-based).
  [[nodiscard]] StateSet breve(std::size_t j) const;
  /// Union of all wells.
  [[nodiscard]] StateSet all_wells() const;
};

/// Partition from explicit wells; reference points default to the first
/// member of each well. Throws EmptyWell or OverlappingSets.
WellPartition make_partition(std::size_t n_states, std::vector<StateSet> wells,
                             std::vector<std::size_t> reference_points = {});

/// Wells as the components of {V < H - kappa} containing the global minima,
/// H the lowest level at which two of them communicate. kappa defaults to
/// the landscape's value, else 0.1 (H - min V). A single global minimum
/// gives one well covering every state.
///
/// Throws HypothesisViolation (minima at different heights), NoSaddle,
/// WellMergeError, EmptyWell.
WellPartition build_wells(const Landscape& ls, const RateChain& chain, std::optional<double> kappa = std::nullopt);

struct ReducedChain {
  std::vector<double> lambda;            // holding rates
  std::vector<std::vector<double>> r;    // r[j][k], zero diagonal
  double theta = 1.0;
  bool reversible = false;
  double cross_check = 0.0;              // reversible: max relative gap between the two rate formulas
  std::vector<double> capacities;        // Cap(V_j, breve V_j)
  std::vector<double> masses;            // mu(V_j)

  [[nodiscard]] std::size_t size() const noexcept { return lambda.size(); }
  /// Q with Q(j,k) = r(j,k) and Q(j,j) = -lambda_j.
  [[nodiscard]] Eigen::MatrixXd generator() const;
};

/// lambda_j = theta Cap(V_j, breve V_j) / mu(V_j). Jump rates from the
/// collapsed chain, r(j,k) = lambda_j P_star[H(V_k) < H(other wells)]; for
/// reversible chains also from theta/(2 mu(V_j)) (Cap_j + Cap_k - Cap(V_j u V_k, rest)),
/// the two agreeing to 1e-6 relative or SolverFailure is thrown. theta
/// defaults to 1 / max_j Cap_j / mu(V_j).
ReducedChain reduced_chain(const RateChain& chain, const EdgeDecomposition& decomp, const WellPartition& wells,
                           std::optional<double> theta = std::nullopt, unsigned threads = 1);

struct CollapsedChain {
  RateChain chain;
  std::vector<std::size_t> index;  // original state -> collapsed state
  std::size_t star = 0;            // the collapsed well
};

/// Replace well j by one state: R(star, y) = sum_{x in V_j} mu(x) r(x,y) / mu(V_j),
/// R(y, star) = sum_{x in V_j} r(y,x). The collapsed chain keeps mu, with
/// the well's mass on star (checked to 1e-10).
CollapsedChain collapse_well(const RateChain& chain, const EdgeDecomposition& decomp, const WellPartition& wells,
                             std::size_t j);

/// Trace of a path on the wells, with the clock sped up by theta.
///
/// trace_* hold the label changes of y(t) = label of X at trace time theta t,
/// where time spent in Delta has been excised. projected_* hold the label
/// changes of x(t) = label of X(theta t), 0 on Delta.
struct TracePath {
  std::vector<double> trace_times;
  std::vector<int> trace_labels;
  std::vector<double> projected_times;
  std::vector<int> projected_labels;
  double trace_horizon = 0.0;  // trace time covered, scaled
  double real_horizon = 0.0;   // real time covered, scaled
  double delta_time = 0.0;     // real time in Delta, scaled
  std::size_t transitions = 0; // well-to-well changes of y

  [[nodiscard]] int start_label() const { return trace_labels.empty() ? 0 : trace_labels.front(); }
  [[nodiscard]] double delta_fraction() const { return real_horizon > 0.0 ? delta_time / real_horizon : 0.0; }
  [[nodiscard]] int trace_label_at(double t) const;
  [[nodiscard]] int projected_label_at(double t) const;
};

/// Project a stored path. Throws HorizonTooShort when fewer than
/// `min_transitions` well-to-well transitions are observed.
TracePath trace_project(const SamplePath& path, const WellPartition& wells, double theta,
                        std::size_t min_transitions = 0);

/// Simulate from x0 until the trace clock reaches `horizon` (in units of
/// theta) and project on the fly; the raw path is not kept.
TracePath simulate_trace(const JumpSampler& sampler, const WellPartition& wells, double theta, std::size_t x0,
                         double horizon, std::uint64_t seed, std::uint64_t stream = 0);

/// Replica i uses seed + i.
std::vector<TracePath> simulate_traces(const RateChain& chain, const WellPartition& wells, double theta,
                                       std::size_t x0, double horizon, std::size_t replicas, std::uint64_t seed,
                                       unsigned threads = 1);

struct FddEntry {
  std::vector<double> times;
  double tv_trace = 0.0;       // empirical law of y versus the reduced chain
  double tv_projected = 0.0;   // empirical law of x (Delta included) versus the reduced chain
  double mc_noise = 0.0;       // expected TV of an exact sample of this size
  double radius95 = 0.0;       // 95% concentration radius for the empirical law
};

struct FddReport {
  std::vector<FddEntry> entries;
  std::size_t samples = 0;
  int start_label = 0;
};

/// Compare joint laws at each time vector with the exact finite-dimensional
/// laws of the reduced chain started at `start_label` (1-based).
/// Throws InsufficientSamples for fewer than two paths and InvalidArgument
/// when a path starts elsewhere or does not cover the times.
FddReport fdd_compare(std::span<const TracePath> paths, const ReducedChain& reduced,
                      const std::vector<std::vector<double>>& time_vectors, int start_label);

struct ExponentialityReport {
  KsResult pooled;                // KS of the probability-integral transforms, all wells
  std::vector<KsResult> per_well;
  double cutoff = 0.0;
};

/// Sojourns of y that start before horizon - cutoff and last less than
/// cutoff are compared with the exponential law of rate lambda_j conditioned
/// on being below the cutoff.
ExponentialityReport sojourn_exponentiality(std::span<const TracePath> paths, const ReducedChain& reduced,
                                            double horizon, double cutoff);

/// Delta occupation fractions of the paths.
SampleSummary delta_occupation(std::span<const TracePath> paths);

struct WellDiagnostics {
  double instant_jump = 0.0;         // sup over starts of P_x[H(breve V_j) <= r_small theta]
  double instant_jump_stderr = 0.0;
  std::size_t worst_start = 0;
  std::optional<double> visit_ratio; // sup_y Cap(V_j, breve V_j) / Cap({y}, {z_j}); none for singletons
};

struct DiagnosticsReport {
  std::vector<WellDiagnostics> wells;
  double r_small = 0.0;
  std::size_t samples_per_start = 0;
};

/// Starts: each well's reference point and its inner boundary (members with
/// a neighbour outside the well). z_j defaults to the reference point.
DiagnosticsReport diagnostics(const RateChain& chain, const EdgeDecomposition& decomp, const WellPartition& wells,
                              double theta, double r_small, std::uint64_t seed, std::size_t samples_per_start = 1000,
                              const std::vector<std::size_t>& z = {}, unsigned threads = 1);

}  // namespace capflow
