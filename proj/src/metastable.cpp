#include "capflow/metastable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "capflow/captheory.hpp"
#include "capflow/parallel.hpp"

namespace capflow {

// ---------------------------------------------------------------- wells

StateSet WellPartition::breve(std::size_t j) const {
  std::vector<char> mask(label.size(), 0);
  for (std::size_t k = 0; k < wells.size(); ++k) {
    if (k != j) {
      for (auto x : wells[k]) {
        mask[x] = 1;
      }
    }
  }
  return StateSet::from_mask(mask);
}

StateSet WellPartition::all_wells() const {
  std::vector<char> mask(label.size(), 0);
  for (std::size_t x = 0; x < label.size(); ++x) {
    mask[x] = label[x] != 0 ? 1 : 0;
  }
  return StateSet::from_mask(mask);
}

WellPartition make_partition(std::size_t n_states, std::vector<StateSet> wells,
                             std::vector<std::size_t> reference_points) {
  require(!wells.empty(), ErrorKind::InvalidArgument, "a partition needs at least one well");
  require(reference_points.empty() || reference_points.size() == wells.size(), ErrorKind::InvalidArgument,
          "one reference point per well");
  WellPartition out;
  out.label.assign(n_states, 0);
  for (std::size_t j = 0; j < wells.size(); ++j) {
    require(wells[j].universe() == n_states, ErrorKind::InvalidArgument, "well does not match the chain");
    if (wells[j].empty()) {
      std::ostringstream msg;
      msg << "well " << j + 1 << " is empty";
      fail(ErrorKind::EmptyWell, msg.str());
    }
    for (auto x : wells[j]) {
      if (out.label[x] != 0) {
        std::ostringstream msg;
        msg << "state " << x << " belongs to wells " << out.label[x] << " and " << j + 1;
        fail(ErrorKind::OverlappingSets, msg.str());
      }
      out.label[x] = static_cast<int>(j + 1);
    }
    const std::size_t ref = reference_points.empty() ? wells[j].members().front() : reference_points[j];
    require(wells[j].contains(ref), ErrorKind::InvalidArgument, "reference point outside its well");
    out.minima.push_back(ref);
  }
  std::vector<char> mask(n_states, 0);
  for (std::size_t x = 0; x < n_states; ++x) {
    mask[x] = out.label[x] == 0 ? 1 : 0;
  }
  out.delta = StateSet::from_mask(mask);
  out.wells = std::move(wells);
  return out;
}

WellPartition build_wells(const Landscape& ls, const RateChain& chain, std::optional<double> kappa) {
  const Grid grid = ls.grid();
  require(chain.size() == grid.size(), ErrorKind::InvalidArgument, "chain does not match the landscape grid");
  const CriticalAnalysis crit = find_critical_points(ls);
  const auto minima = crit.minima();
  require(!minima.empty(), ErrorKind::HypothesisViolation, "the landscape has no grid minimum");

  double v_min = crit.find(minima.front())->value;
  for (auto m : minima) {
    v_min = std::min(v_min, crit.find(m)->value);
  }
  const double tol = 1e-9 * std::max(1.0, std::abs(v_min));
  for (auto m : minima) {
    const double v = crit.find(m)->value;
    if (v > v_min + tol) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "minimum at grid index " << m << " has V = " << v << " above the global minimum " << v_min
          << "; the wells need minima at one height";
      fail(ErrorKind::HypothesisViolation, msg.str());
    }
  }

  if (minima.size() == 1) {
    std::vector<std::size_t> all(grid.size());
    for (std::size_t x = 0; x < all.size(); ++x) {
      all[x] = x;
    }
    auto out = make_partition(grid.size(), {StateSet(grid.size(), std::move(all))}, {minima.front()});
    out.kappa = 0.0;
    return out;
  }
  if (crit.links.empty()) {
    fail(ErrorKind::NoSaddle, "no saddle connects the minima");
  }
  double height = crit.links.front().height;
  for (const auto& link : crit.links) {
    height = std::min(height, link.height);
  }
  const double margin = kappa ? *kappa : ls.kappa.value_or(0.1 * (height - v_min));
  require(margin > 0.0, ErrorKind::InvalidArgument, "kappa must be positive");

  const std::vector<double> V = sample_potential(ls);
  std::vector<StateSet> wells;
  for (auto m : minima) {
    StateSet well = sublevel_component(grid, V, height - margin, m);
    if (well.empty()) {
      std::ostringstream msg;
      msg << "kappa = " << margin << " leaves no well around the minimum at grid index " << m;
      fail(ErrorKind::EmptyWell, msg.str());
    }
    for (auto other : minima) {
      if (other != m && well.contains(other)) {
        std::ostringstream msg;
        msg << "minima at grid indices " << m << " and " << other << " share a well; increase kappa";
        fail(ErrorKind::WellMergeError, msg.str());
      }
    }
    wells.push_back(std::move(well));
  }
  auto out = make_partition(grid.size(), std::move(wells), minima);
  out.kappa = margin;
  return out;
}

// ---------------------------------------------------------------- reduced chain

Eigen::MatrixXd ReducedChain::generator() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (j != k) {
        Q(j, k) = r[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
      }
    }
    Q(j, j) = -lambda[static_cast<std::size_t>(j)];
  }
  return Q;
}

CollapsedChain collapse_well(const RateChain& chain, const EdgeDecomposition& decomp, const WellPartition& wells,
                             std::size_t j) {
  require(j < wells.size(), ErrorKind::InvalidArgument, "well index out of range");
  const StateSet& well = wells.wells[j];
  if (well.empty()) {
    fail(ErrorKind::EmptyWell, "cannot collapse an empty well");
  }
  const auto n = chain.size();
  const auto& mu = decomp.mu();
  const double mass = mu.mass(well);

  std::vector<std::size_t> index(n, 0);
  std::size_t next = 0;
  for (std::size_t x = 0; x < n; ++x) {
    if (!well.contains(x)) {
      index[x] = next++;
    }
  }
  const std::size_t star = next;
  for (auto x : well) {
    index[x] = star;
  }

  std::vector<RateEntry> entries;
  for (std::size_t x = 0; x < n; ++x) {
    const bool inside = well.contains(x);
    chain.for_each_jump(x, [&](std::size_t y, double r) {
      const bool target_inside = well.contains(y);
      if (!inside) {
        entries.push_back({index[x], index[y], r});
      } else if (!target_inside) {
        entries.push_back({star, index[y], mu[x] * r / mass});
      }
    });
  }
  RateChain collapsed = build_chain(star + 1, entries);

  std::vector<double> weights(star + 1, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    weights[index[x]] += mu[x];
  }
  const double residual = stationary_residual(collapsed, make_measure(std::move(weights), false));
  if (residual > 1e-10) {
    std::ostringstream msg;
    msg << "collapsed chain does not preserve the stationary measure (residual " << residual << ")";
    fail(ErrorKind::SolverFailure, msg.str());
  }
  return {std::move(collapsed), std::move(index), star};
}

ReducedChain reduced_chain(const RateChain& chain, const EdgeDecomposition& decomp, const WellPartition& wells,
                           std::optional<double> theta, unsigned threads) {
  require(wells.label.size() == chain.size(), ErrorKind::InvalidArgument, "wells do not match the chain");
  require(!theta || *theta > 0.0, ErrorKind::InvalidArgument, "theta must be positive");
  const auto n = wells.size();
  const auto& mu = decomp.mu();
  ReducedChain out;
  out.reversible = decomp.reversible();
  for (const auto& well : wells.wells) {
    out.masses.push_back(mu.mass(well));
  }
  if (n == 1) {
    out.lambda = {0.0};
    out.r = {{0.0}};
    out.capacities = {0.0};
    out.theta = theta.value_or(1.0);
    return out;
  }

  out.capacities.assign(n, 0.0);
  parallel_for(n, threads, [&](std::size_t j) {
    out.capacities[j] = capacity_value(chain, decomp, wells.wells[j], wells.breve(j));
  });
  double fastest = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    fastest = std::max(fastest, out.capacities[j] / out.masses[j]);
  }
  out.theta = theta.value_or(1.0 / fastest);
  out.lambda.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.lambda[j] = out.theta * out.capacities[j] / out.masses[j];
  }

  // Collapsed-chain rates.
  std::vector<std::vector<double>> collapsed(n, std::vector<double>(n, 0.0));
  parallel_for(n, threads, [&](std::size_t j) {
    if (n == 2) {
      collapsed[j][1 - j] = out.lambda[j];
      return;
    }
    const CollapsedChain cc = collapse_well(chain, decomp, wells, j);
    const auto m = cc.chain.size();
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) {
        continue;
      }
      std::vector<char> a(m, 0), b(m, 0);
      for (std::size_t l = 0; l < n; ++l) {
        if (l == j) {
          continue;
        }
        for (auto x : wells.wells[l]) {
          (l == k ? a : b)[cc.index[x]] = 1;
        }
      }
      const Function h = equilibrium_potential(cc.chain, StateSet::from_mask(a), StateSet::from_mask(b));
      collapsed[j][k] = out.lambda[j] * h[cc.star];
    }
  });

  if (!out.reversible) {
    out.r = std::move(collapsed);
  } else {
    // Capacity-difference rates; Cap(V_j u V_k, rest) for every pair j < k.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        pairs.emplace_back(j, k);
      }
    }
    std::vector<double> joint(pairs.size(), 0.0);
    parallel_for(pairs.size(), threads, [&](std::size_t p) {
      const auto [j, k] = pairs[p];
      if (n == 2) {
        return;  // the rest is empty and Cap(., empty) = 0
      }
      const StateSet both = wells.wells[j].united(wells.wells[k]);
      std::vector<char> rest(chain.size(), 0);
      for (std::size_t l = 0; l < n; ++l) {
        if (l != j && l != k) {
          for (auto x : wells.wells[l]) {
            rest[x] = 1;
          }
        }
      }
      joint[p] = capacity_value(chain, decomp, both, StateSet::from_mask(rest));
    });
    out.r.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [j, k] = pairs[p];
      const double half_sum = out.capacities[j] + out.capacities[k] - joint[p];
      for (auto [from, to] : {std::pair{j, k}, std::pair{k, j}}) {
        double rate = out.theta * half_sum / (2.0 * out.masses[from]);
        if (rate < 0.0) {
          if (rate < -1e-6 * out.lambda[from]) {
            std::ostringstream msg;
            msg << "capacity-difference rate r(" << from + 1 << "," << to + 1 << ") = " << rate << " is negative";
            fail(ErrorKind::NegativeRate, msg.str());
          }
          rate = 0.0;
        }
        out.r[from][to] = rate;
      }
    }
    double gap = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        if (j != k) {
          gap = std::max(gap, std::abs(out.r[j][k] - collapsed[j][k]) / out.lambda[j]);
        }
      }
    }
    out.cross_check = gap;
    if (gap > 1e-6) {
      std::ostringstream msg;
      msg << "capacity-difference and collapsed-chain rates differ by " << gap << " relative";
      fail(ErrorKind::SolverFailure, msg.str());
    }
  }

  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      sum += out.r[j][k];
    }
    if (std::abs(sum - out.lambda[j]) > 1e-6 * out.lambda[j]) {
      std::ostringstream msg;
      msg << "jump rates out of well " << j + 1 << " sum to " << sum << ", holding rate is " << out.lambda[j];
      fail(ErrorKind::SolverFailure, msg.str());
    }
  }
  return out;
}

// ---------------------------------------------------------------- trace process

int TracePath::trace_label_at(double t) const {
  auto it = std::upper_bound(trace_times.begin(), trace_times.end(), t);
  if (it == trace_times.begin()) {
    return 0;
  }
  return trace_labels[static_cast<std::size_t>(it - trace_times.begin()) - 1];
}

int TracePath::projected_label_at(double t) const {
  auto it = std::upper_bound(projected_times.begin(), projected_times.end(), t);
  if (it == projected_times.begin()) {
    return 0;
  }
  return projected_labels[static_cast<std::size_t>(it - projected_times.begin()) - 1];
}

namespace {

// Consumes the holding segments of a path and records the label changes of
// the projected and traced processes, in clocks divided by theta.
class TraceBuilder {
 public:
  TraceBuilder(const WellPartition& wells, double theta) : wells_(wells), theta_(theta) {}

  // Hold state x for dt. Returns false once the trace clock reaches `limit`
  // (unscaled), after truncating the segment.
  bool hold(std::size_t x, double dt, double limit) {
    const int l = wells_.label[x];
    if (out_.projected_labels.empty() || out_.projected_labels.back() != l) {
      out_.projected_times.push_back(real_ / theta_);
      out_.projected_labels.push_back(l);
    }
    bool more = true;
    if (l == 0) {
      delta_ += dt;
    } else {
      if (out_.trace_labels.empty() || out_.trace_labels.back() != l) {
        if (!out_.trace_labels.empty()) {
          ++out_.transitions;
        }
        out_.trace_times.push_back(trace_ / theta_);
        out_.trace_labels.push_back(l);
      }
      if (trace_ + dt >= limit) {
        dt = limit - trace_;
        more = false;
      }
      trace_ += dt;
    }
    real_ += dt;
    return more;
  }

  TracePath finish() {
    out_.trace_horizon = trace_ / theta_;
    out_.real_horizon = real_ / theta_;
    out_.delta_time = delta_ / theta_;
    return std::move(out_);
  }

 private:
  const WellPartition& wells_;
  double theta_;
  double real_ = 0.0;
  double trace_ = 0.0;
  double delta_ = 0.0;
  TracePath out_;
};

}  // namespace

TracePath trace_project(const SamplePath& path, const WellPartition& wells, double theta,
                        std::size_t min_transitions) {
  require(theta > 0.0, ErrorKind::InvalidArgument, "theta must be positive");
  require(!path.states.empty() && path.states.size() == path.times.size(), ErrorKind::InvalidArgument,
          "malformed sample path");
  TraceBuilder builder(wells, theta);
  const double unlimited = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < path.states.size(); ++k) {
    require(path.states[k] < wells.label.size(), ErrorKind::InvalidArgument, "path state outside the partition");
    const double end = k + 1 < path.times.size() ? path.times[k + 1] : path.horizon;
    builder.hold(path.states[k], end - path.times[k], unlimited);
  }
  TracePath out = builder.finish();
  if (out.transitions < min_transitions) {
    std::ostringstream msg;
    msg << "path shows " << out.transitions << " well transitions, fewer than the required " << min_transitions;
    fail(ErrorKind::HorizonTooShort, msg.str());
  }
  return out;
}

TracePath simulate_trace(const JumpSampler& sampler, const WellPartition& wells, double theta, std::size_t x0,
                         double horizon, std::uint64_t seed, std::uint64_t stream) {
  require(theta > 0.0, ErrorKind::InvalidArgument, "theta must be positive");
  require(horizon > 0.0, ErrorKind::InvalidArgument, "horizon must be positive");
  require(x0 < sampler.size() && wells.label.size() == sampler.size(), ErrorKind::InvalidArgument,
          "initial state or wells do not match the chain");
  CounterRng rng(seed, stream);
  TraceBuilder builder(wells, theta);
  const double limit = horizon * theta;
  std::size_t x = x0;
  for (;;) {
    const auto jump = sampler.step(x, rng);
    if (!builder.hold(x, jump.holding, limit)) {
      break;
    }
    x = jump.next;
  }
  return builder.finish();
}

std::vector<TracePath> simulate_traces(const RateChain& chain, const WellPartition& wells, double theta,
                                       std::size_t x0, double horizon, std::size_t replicas, std::uint64_t seed,
                                       unsigned threads) {
  const JumpSampler sampler(chain);
  std::vector<TracePath> paths(replicas);
  parallel_for(replicas, threads, [&](std::size_t i) {
    paths[i] = simulate_trace(sampler, wells, theta, x0, horizon, seed + i);
  });
  return paths;
}

// ---------------------------------------------------------------- finite-dimensional laws

FddReport fdd_compare(std::span<const TracePath> paths, const ReducedChain& reduced,
                      const std::vector<std::vector<double>>& time_vectors, int start_label) {
  if (paths.size() < 2) {
    fail(ErrorKind::InsufficientSamples, "finite-dimensional comparison needs at least two paths");
  }
  const auto n = reduced.size();
  require(start_label >= 1 && static_cast<std::size_t>(start_label) <= n, ErrorKind::InvalidArgument,
          "start label outside the reduced chain");
  for (const auto& p : paths) {
    require(p.start_label() == start_label, ErrorKind::InvalidArgument, "a path does not start in the given well");
  }
  const Eigen::MatrixXd Q = reduced.generator();
  const double M = static_cast<double>(paths.size());

  FddReport report;
  report.samples = paths.size();
  report.start_label = start_label;
  for (const auto& times : time_vectors) {
    require(!times.empty(), ErrorKind::InvalidArgument, "empty time vector");
    for (std::size_t i = 0; i < times.size(); ++i) {
      require(times[i] >= 0.0 && (i == 0 || times[i] >= times[i - 1]), ErrorKind::InvalidArgument,
              "time vectors must be nonnegative and nondecreasing");
    }
    for (const auto& p : paths) {
      require(p.trace_horizon >= times.back(), ErrorKind::InvalidArgument, "a path does not cover the time vector");
    }
    const std::size_t m = times.size();

    // Exact joint law over n^m label tuples, tuples indexed in mixed radix.
    std::vector<Eigen::MatrixXd> transitions;
    double previous = 0.0;
    for (auto t : times) {
      transitions.push_back((Q * (t - previous)).exp());
      previous = t;
    }
    std::size_t outcomes = 1;
    for (std::size_t i = 0; i < m; ++i) {
      outcomes *= n;
    }
    std::vector<double> exact(outcomes, 0.0);
    for (std::size_t code = 0; code < outcomes; ++code) {
      std::size_t rest = code;
      double prob = 1.0;
      auto from = static_cast<Eigen::Index>(start_label - 1);
      for (std::size_t i = 0; i < m; ++i) {
        const auto to = static_cast<Eigen::Index>(rest % n);
        rest /= n;
        prob *= transitions[i](from, to);
        from = to;
      }
      exact[code] = std::max(prob, 0.0);
    }

    std::vector<double> trace_counts(outcomes, 0.0);
    std::vector<double> projected_counts(outcomes, 0.0);
    double projected_delta = 0.0;  // tuples hitting Delta, impossible under the reduced law
    for (const auto& p : paths) {
      std::size_t trace_code = 0;
      std::size_t projected_code = 0;
      bool in_delta = false;
      std::size_t radix = 1;
      for (std::size_t i = 0; i < m; ++i) {
        trace_code += static_cast<std::size_t>(p.trace_label_at(times[i]) - 1) * radix;
        const int projected = p.projected_label_at(times[i]);
        if (projected == 0) {
          in_delta = true;
        } else {
          projected_code += static_cast<std::size_t>(projected - 1) * radix;
        }
        radix *= n;
      }
      trace_counts[trace_code] += 1.0;
      if (in_delta) {
        projected_delta += 1.0;
      } else {
        projected_counts[projected_code] += 1.0;
      }
    }

    FddEntry entry;
    entry.times = times;
    for (std::size_t code = 0; code < outcomes; ++code) {
      entry.tv_trace += std::abs(trace_counts[code] / M - exact[code]);
      entry.tv_projected += std::abs(projected_counts[code] / M - exact[code]);
      entry.mc_noise += std::sqrt(2.0 * exact[code] * (1.0 - exact[code]) / (std::numbers::pi * M));
    }
    entry.tv_trace *= 0.5;
    entry.tv_projected = 0.5 * (entry.tv_projected + projected_delta / M);
    entry.mc_noise *= 0.5;
    entry.radius95 = std::sqrt((static_cast<double>(outcomes) * std::log(2.0) + std::log(1.0 / 0.05)) / (2.0 * M));
    report.entries.push_back(std::move(entry));
  }
  return report;
}

ExponentialityReport sojourn_exponentiality(std::span<const TracePath> paths, const ReducedChain& reduced,
                                            double horizon, double cutoff) {
  require(cutoff > 0.0 && cutoff < horizon, ErrorKind::InvalidArgument, "need 0 < cutoff < horizon");
  const auto n = reduced.size();
  std::vector<std::vector<double>> transformed(n);
  std::vector<double> pooled;
  for (const auto& p : paths) {
    require(p.trace_horizon >= horizon, ErrorKind::InvalidArgument, "a path does not cover the horizon");
    for (std::size_t k = 0; k + 1 < p.trace_times.size(); ++k) {
      const double start = p.trace_times[k];
      const double length = p.trace_times[k + 1] - start;
      if (start > horizon - cutoff || p.trace_times[k + 1] > horizon || length >= cutoff) {
        continue;
      }
      const auto j = static_cast<std::size_t>(p.trace_labels[k] - 1);
      const double rate = reduced.lambda[j];
      const double u = -std::expm1(-rate * length) / -std::expm1(-rate * cutoff);
      transformed[j].push_back(u);
      pooled.push_back(u);
    }
  }
  if (pooled.empty()) {
    fail(ErrorKind::InsufficientSamples, "no complete sojourn shorter than the cutoff");
  }
  auto uniform = [](double u) { return std::clamp(u, 0.0, 1.0); };
  ExponentialityReport out;
  out.cutoff = cutoff;
  out.pooled = ks_test(pooled, uniform);
  for (auto& samples : transformed) {
    out.per_well.push_back(samples.empty() ? KsResult{} : ks_test(std::move(samples), uniform));
  }
  return out;
}

SampleSummary delta_occupation(std::span<const TracePath> paths) {
  std::vector<double> fractions;
  fractions.reserve(paths.size());
  for (const auto& p : paths) {
    fractions.push_back(p.delta_fraction());
  }
  return summarize(fractions);
}

// ---------------------------------------------------------------- diagnostics

DiagnosticsReport diagnostics(const RateChain& chain, const EdgeDecomposition& decomp, const WellPartition& wells,
                              double theta, double r_small, std::uint64_t seed, std::size_t samples_per_start,
                              const std::vector<std::size_t>& z, unsigned threads) {
  require(theta > 0.0 && r_small > 0.0, ErrorKind::InvalidArgument, "theta and r_small must be positive");
  require(samples_per_start > 0, ErrorKind::InvalidArgument, "need at least one sample per start");
  require(z.empty() || z.size() == wells.size(), ErrorKind::InvalidArgument, "one z point per well");
  const auto n = wells.size();

  // (well, start) pairs in a fixed order; each gets its own random stream.
  struct Start {
    std::size_t well;
    std::size_t state;
  };
  std::vector<Start> starts;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::size_t> chosen{wells.minima[j]};
    for (auto x : wells.wells[j]) {
      bool boundary = false;
      chain.for_each_jump(x, [&](std::size_t y, double) { boundary = boundary || !wells.wells[j].contains(y); });
      if (boundary && x != wells.minima[j]) {
        chosen.push_back(x);
      }
    }
    for (auto x : chosen) {
      starts.push_back({j, x});
    }
  }

  const JumpSampler sampler(chain);
  const double limit = r_small * theta;
  std::vector<double> hits(starts.size(), 0.0);
  parallel_for(starts.size(), threads, [&](std::size_t s) {
    const auto j = starts[s].well;
    CounterRng rng(seed, s);
    std::size_t count = 0;
    for (std::size_t rep = 0; rep < samples_per_start; ++rep) {
      std::size_t x = starts[s].state;
      double t = 0.0;
      for (;;) {
        const auto jump = sampler.step(x, rng);
        t += jump.holding;
        if (t > limit) {
          break;
        }
        x = jump.next;
        const int l = wells.label[x];
        if (l != 0 && static_cast<std::size_t>(l - 1) != j) {
          ++count;
          break;
        }
      }
    }
    hits[s] = static_cast<double>(count);
  });

  DiagnosticsReport report;
  report.r_small = r_small;
  report.samples_per_start = samples_per_start;
  report.wells.resize(n);
  const double M = static_cast<double>(samples_per_start);
  for (std::size_t s = 0; s < starts.size(); ++s) {
    auto& w = report.wells[starts[s].well];
    const double p = hits[s] / M;
    if (p > w.instant_jump || (p == w.instant_jump && starts[s].state == wells.minima[starts[s].well])) {
      w.instant_jump = p;
      w.instant_jump_stderr = std::sqrt(p * (1.0 - p) / M);
      w.worst_start = starts[s].state;
    }
  }

  parallel_for(n, threads, [&](std::size_t j) {
    const StateSet& well = wells.wells[j];
    if (well.size() < 2) {
      return;
    }
    const std::size_t zj = z.empty() ? wells.minima[j] : z[j];
    require(well.contains(zj), ErrorKind::InvalidArgument, "z point outside its well");
    const double cap_well = n > 1 ? capacity_value(chain, decomp, well, wells.breve(j)) : 0.0;
    const StateSet target(chain.size(), {zj});
    double ratio = 0.0;
    for (auto y : well) {
      if (y != zj) {
        ratio = std::max(ratio, cap_well / capacity_value(chain, decomp, StateSet(chain.size(), {y}), target));
      }
    }
    report.wells[j].visit_ratio = ratio;
  });
  return report;
}

}  // namespace capflow
