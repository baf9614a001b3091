#include "capflow/chain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <utility>

#include <Eigen/Dense>

namespace capflow {

// ---------------------------------------------------------------- StateSet

StateSet::StateSet(std::size_t universe, std::vector<std::size_t> members) : mask_(universe, 0) {
  for (auto x : members) {
    if (x >= universe) {
      std::ostringstream msg;
      msg << "state " << x << " outside a chain of " << universe << " states";
      fail(ErrorKind::InvalidArgument, msg.str());
    }
    mask_[x] = 1;
  }
  for (std::size_t x = 0; x < universe; ++x) {
    if (mask_[x] != 0) {
      members_.push_back(x);
    }
  }
}

StateSet StateSet::from_mask(const std::vector<char>& mask) {
  std::vector<std::size_t> members;
  for (std::size_t x = 0; x < mask.size(); ++x) {
    if (mask[x] != 0) {
      members.push_back(x);
    }
  }
  return StateSet(mask.size(), std::move(members));
}

StateSet StateSet::complement() const {
  std::vector<char> mask(mask_.size());
  for (std::size_t x = 0; x < mask_.size(); ++x) {
    mask[x] = mask_[x] != 0 ? 0 : 1;
  }
  return from_mask(mask);
}

StateSet StateSet::united(const StateSet& other) const {
  require(universe() == other.universe(), ErrorKind::InvalidArgument, "state sets over different chains");
  std::vector<char> mask(mask_);
  for (auto x : other.members_) {
    mask[x] = 1;
  }
  return from_mask(mask);
}

bool StateSet::intersects(const StateSet& other) const {
  return std::any_of(other.members_.begin(), other.members_.end(), [&](std::size_t x) { return contains(x); });
}

// ---------------------------------------------------------------- RateChain

namespace {

// Forward and backward reachability from state 0.
bool strongly_connected(const SparseRates& rates) {
  const auto n = static_cast<std::size_t>(rates.rows());
  if (n <= 1) {
    return true;
  }
  std::vector<std::vector<std::size_t>> forward(n), backward(n);
  for (Eigen::Index x = 0; x < rates.outerSize(); ++x) {
    for (SparseRates::InnerIterator it(rates, x); it; ++it) {
      forward[static_cast<std::size_t>(x)].push_back(static_cast<std::size_t>(it.col()));
      backward[static_cast<std::size_t>(it.col())].push_back(static_cast<std::size_t>(x));
    }
  }
  auto reaches_all = [n](const std::vector<std::vector<std::size_t>>& adj) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      auto x = stack.back();
      stack.pop_back();
      for (auto y : adj[x]) {
        if (seen[y] == 0) {
          seen[y] = 1;
          ++count;
          stack.push_back(y);
        }
      }
    }
    return count == n;
  };
  return reaches_all(forward) && reaches_all(backward);
}

}  // namespace

RateChain::RateChain(SparseRates rates, std::vector<std::string> labels)
    : rates_(std::move(rates)), total_rates_(static_cast<std::size_t>(rates_.rows()), 0.0), labels_(std::move(labels)) {
  for (Eigen::Index x = 0; x < rates_.outerSize(); ++x) {
    double sum = 0.0;
    for (SparseRates::InnerIterator it(rates_, x); it; ++it) {
      sum += it.value();
    }
    total_rates_[static_cast<std::size_t>(x)] = sum;
  }
}

double RateChain::rate(std::size_t from, std::size_t to) const {
  if (from >= size() || to >= size() || from == to) {
    return 0.0;
  }
  return rates_.coeff(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
}

std::vector<RateEntry> RateChain::entries() const {
  std::vector<RateEntry> out;
  out.reserve(static_cast<std::size_t>(rates_.nonZeros()));
  for (std::size_t x = 0; x < size(); ++x) {
    for_each_jump(x, [&](std::size_t y, double r) { out.push_back({x, y, r}); });
  }
  return out;
}

RateChain build_chain(std::size_t n, std::span<const RateEntry> entries, std::vector<std::string> labels) {
  require(n > 0, ErrorKind::InvalidArgument, "a chain needs at least one state");
  require(labels.empty() || labels.size() == n, ErrorKind::InvalidArgument,
          "label count does not match the number of states");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.from >= n || e.to >= n) {
      std::ostringstream msg;
      msg << "rate entry (" << e.from << ", " << e.to << ") outside a chain of " << n << " states";
      fail(ErrorKind::InvalidArgument, msg.str());
    }
    if (e.from == e.to) {
      std::ostringstream msg;
      msg << "self-rate at state " << e.from;
      fail(ErrorKind::InvalidArgument, msg.str());
    }
    if (!(e.rate >= 0.0) || !std::isfinite(e.rate)) {
      std::ostringstream msg;
      msg << "rate " << e.rate << " from " << e.from << " to " << e.to << " is not a finite nonnegative number";
      fail(ErrorKind::NegativeRate, msg.str());
    }
    if (e.rate > 0.0) {
      triplets.emplace_back(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.to), e.rate);
    }
  }
  SparseRates rates(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  rates.setFromTriplets(triplets.begin(), triplets.end());  // sums duplicates
  rates.makeCompressed();
  if (!strongly_connected(rates)) {
    fail(ErrorKind::NotIrreducible, "the positive-rate graph is not strongly connected");
  }
  return RateChain(std::move(rates), std::move(labels));
}

// ---------------------------------------------------------------- Measure

double Measure::total() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

double Measure::mass(const StateSet& set) const {
  double sum = 0.0;
  for (auto x : set) {
    sum += weights[x];
  }
  return sum;
}

Measure make_measure(std::vector<double> weights, bool normalize) {
  for (std::size_t x = 0; x < weights.size(); ++x) {
    if (!(weights[x] > 0.0) || !std::isfinite(weights[x])) {
      std::ostringstream msg;
      msg << "measure weight " << weights[x] << " at state " << x << " is not positive";
      fail(ErrorKind::InvalidArgument, msg.str());
    }
  }
  Measure mu{std::move(weights), false};
  if (normalize) {
    const double total = mu.total();
    for (auto& w : mu.weights) {
      w /= total;
    }
    mu.normalized = true;
  }
  return mu;
}

double stationary_residual(const RateChain& chain, const Measure& mu) {
  const auto n = chain.size();
  std::vector<double> balance(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    chain.for_each_jump(x, [&](std::size_t y, double r) {
      balance[y] += mu[x] * r;
      balance[x] -= mu[x] * r;
    });
  }
  const double mu_max = *std::max_element(mu.weights.begin(), mu.weights.end());
  const double lambda_max = *std::max_element(chain.total_rates().begin(), chain.total_rates().end());
  double worst = 0.0;
  for (auto b : balance) {
    worst = std::max(worst, std::abs(b));
  }
  const double scale = mu_max * lambda_max;
  return scale > 0.0 ? worst / scale : worst;
}

Measure stationary_measure(const RateChain& chain) {
  const auto n = chain.size();
  if (n == 1) {
    return make_measure({1.0}, true);
  }
  const auto last = static_cast<Eigen::Index>(n - 1);
  // Rows are balance equations (mu L)(y) = 0, i.e. L^T mu = 0; the last row
  // is replaced by sum_x mu(x) = 1.
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t x = 0; x < n; ++x) {
    const auto xi = static_cast<Eigen::Index>(x);
    chain.for_each_jump(x, [&](std::size_t y, double r) {
      const auto yi = static_cast<Eigen::Index>(y);
      if (yi != last) {
        triplets.emplace_back(yi, xi, r);
      }
    });
    if (xi != last) {
      triplets.emplace_back(xi, xi, -chain.total_rate(x));
    }
    triplets.emplace_back(last, xi, 1.0);
  }
  Eigen::SparseMatrix<double> system(last + 1, last + 1);
  system.setFromTriplets(triplets.begin(), triplets.end());
  system.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(system);
  if (lu.info() != Eigen::Success) {
    fail(ErrorKind::SolverFailure, "stationary system is numerically singular: " + lu.lastErrorMessage());
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(last + 1);
  rhs(last) = 1.0;
  Eigen::VectorXd solution = lu.solve(rhs);
  Eigen::VectorXd correction = lu.solve(rhs - system * solution);
  solution += correction;

  std::vector<double> weights(n);
  for (std::size_t x = 0; x < n; ++x) {
    weights[x] = solution(static_cast<Eigen::Index>(x));
    if (!(weights[x] > 0.0)) {
      std::ostringstream msg;
      msg << "stationary solve produced a nonpositive weight " << weights[x] << " at state " << x;
      fail(ErrorKind::SolverFailure, msg.str());
    }
  }
  Measure mu = make_measure(std::move(weights), true);
  const double residual = stationary_residual(chain, mu);
  if (residual > 1e-10) {
    std::ostringstream msg;
    msg << "stationary residual " << residual << " exceeds 1e-10";
    fail(ErrorKind::SolverFailure, msg.str());
  }
  return mu;
}

RateChain adjoint_chain(const RateChain& chain, const Measure& mu) {
  require(mu.size() == chain.size(), ErrorKind::InvalidArgument, "measure and chain sizes differ");
  std::vector<RateEntry> entries;
  entries.reserve(static_cast<std::size_t>(chain.rates().nonZeros()));
  for (std::size_t x = 0; x < chain.size(); ++x) {
    chain.for_each_jump(x, [&](std::size_t y, double r) { entries.push_back({y, x, mu[x] * r / mu[y]}); });
  }
  return build_chain(chain.size(), entries, chain.labels());
}

// ---------------------------------------------------------------- EdgeDecomposition

std::optional<std::size_t> EdgeDecomposition::find_edge(std::size_t x, std::size_t y) const {
  if (x >= incidence_.size()) {
    return std::nullopt;
  }
  const auto& inc = incidence_[x];
  auto it = std::lower_bound(inc.begin(), inc.end(), y,
                             [](const Incidence& a, std::size_t target) { return a.neighbor < target; });
  if (it == inc.end() || it->neighbor != y) {
    return std::nullopt;
  }
  return it->edge;
}

double EdgeDecomposition::conductance(std::size_t x, std::size_t y) const {
  auto e = find_edge(x, y);
  return e ? edges_[*e].s : 0.0;
}

double EdgeDecomposition::current(std::size_t x, std::size_t y) const {
  auto e = find_edge(x, y);
  if (!e) {
    return 0.0;
  }
  const auto& edge = edges_[*e];
  return edge.x == x ? edge.j : -edge.j;
}

bool EdgeDecomposition::reversible(double tol) const {
  double s_max = 0.0;
  double j_max = 0.0;
  for (const auto& e : edges_) {
    s_max = std::max(s_max, e.s);
    j_max = std::max(j_max, std::abs(e.j));
  }
  return j_max <= tol * s_max;
}

EdgeDecomposition edge_decomposition(const RateChain& chain, const Measure& mu) {
  const auto n = chain.size();
  require(mu.size() == n, ErrorKind::InvalidArgument, "measure and chain sizes differ");

  // flux[(x,y)] with x < y holds (mu(x) r(x,y), mu(y) r(y,x)).
  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, double>> flux;
  for (std::size_t x = 0; x < n; ++x) {
    chain.for_each_jump(x, [&](std::size_t y, double r) {
      const double f = mu[x] * r;
      if (x < y) {
        flux[{x, y}].first += f;
      } else {
        flux[{y, x}].second += f;
      }
    });
  }

  EdgeDecomposition d;
  d.mu_ = mu;
  d.lambda_ = chain.total_rates();
  d.incidence_.assign(n, {});
  d.edges_.reserve(flux.size());
  for (const auto& [key, f] : flux) {
    const auto index = d.edges_.size();
    d.edges_.push_back({key.first, key.second, 0.5 * (f.first + f.second), 0.5 * (f.first - f.second)});
    d.incidence_[key.first].push_back({key.second, index, 1.0});
    d.incidence_[key.second].push_back({key.first, index, -1.0});
  }
  for (auto& inc : d.incidence_) {
    std::sort(inc.begin(), inc.end(), [](const Incidence& a, const Incidence& b) { return a.neighbor < b.neighbor; });
  }

  double worst = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    double div = 0.0;
    double scale = 0.0;
    for (const auto& inc : d.incidence_[x]) {
      div += inc.orientation * d.edges_[inc.edge].j;
      scale += d.edges_[inc.edge].s;
    }
    if (scale > 0.0) {
      worst = std::max(worst, std::abs(div) / scale);
    }
  }
  d.divergence_residual_ = worst;
  if (worst > 1e-9) {
    std::ostringstream msg;
    msg << "current has relative divergence " << worst << "; the measure is not stationary for this chain";
    fail(ErrorKind::NotStationary, msg.str());
  }
  return d;
}

RateChain symmetrized_chain(const EdgeDecomposition& decomp) {
  std::vector<RateEntry> entries;
  entries.reserve(2 * decomp.edges().size());
  const auto& mu = decomp.mu();
  for (const auto& e : decomp.edges()) {
    entries.push_back({e.x, e.y, e.s / mu[e.x]});
    entries.push_back({e.y, e.x, e.s / mu[e.y]});
  }
  return build_chain(decomp.size(), entries);
}

Function apply_generator(const RateChain& chain, std::span<const double> f) {
  require(f.size() == chain.size(), ErrorKind::InvalidArgument, "function size does not match the chain");
  Function out(chain.size(), 0.0);
  for (std::size_t x = 0; x < chain.size(); ++x) {
    double sum = 0.0;
    chain.for_each_jump(x, [&](std::size_t y, double r) { sum += r * (f[y] - f[x]); });
    out[x] = sum;
  }
  return out;
}

// ---------------------------------------------------------------- Dirichlet problems

DirichletSolver::DirichletSolver(const RateChain& chain, const StateSet& boundary)
    : boundary_(boundary), position_(chain.size(), -1) {
  require(boundary.universe() == chain.size(), ErrorKind::InvalidArgument, "boundary set does not match the chain");
  if (boundary.empty()) {
    fail(ErrorKind::EmptyTargetSet, "the target set of a Dirichlet problem is empty");
  }
  for (std::size_t x = 0; x < chain.size(); ++x) {
    if (!boundary.contains(x)) {
      position_[x] = static_cast<std::ptrdiff_t>(unknowns_.size());
      unknowns_.push_back(x);
    }
  }
  const auto m = static_cast<Eigen::Index>(unknowns_.size());
  std::vector<Eigen::Triplet<double>> inner, outer;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto x = unknowns_[static_cast<std::size_t>(i)];
    inner.emplace_back(i, i, chain.total_rate(x));
    double row_norm = chain.total_rate(x);
    chain.for_each_jump(x, [&](std::size_t y, double r) {
      row_norm += r;
      if (position_[y] >= 0) {
        inner.emplace_back(i, position_[y], -r);
      } else {
        outer.emplace_back(i, static_cast<Eigen::Index>(y), r);
      }
    });
    matrix_norm_ = std::max(matrix_norm_, row_norm);
  }
  matrix_.resize(m, m);
  matrix_.setFromTriplets(inner.begin(), inner.end());
  matrix_.makeCompressed();
  coupling_.resize(m, static_cast<Eigen::Index>(chain.size()));
  coupling_.setFromTriplets(outer.begin(), outer.end());
  if (m > 0) {
    lu_.compute(matrix_);
    if (lu_.info() != Eigen::Success) {
      fail(ErrorKind::SolverFailure, "Dirichlet system is singular: " + lu_.lastErrorMessage());
    }
  }
}

Function DirichletSolver::solve(std::span<const double> b, std::span<const double> f) const {
  const auto n = position_.size();
  require(b.size() == n && f.size() == n, ErrorKind::InvalidArgument, "boundary/source size does not match the chain");
  Function u(n, 0.0);
  for (auto x : boundary_) {
    u[x] = b[x];
  }
  if (unknowns_.empty()) {
    last_residual_ = 0.0;
    return u;
  }
  const auto m = static_cast<Eigen::Index>(unknowns_.size());
  Eigen::VectorXd boundary_values = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x) {
    if (position_[x] >= 0) {
      boundary_values(static_cast<Eigen::Index>(x)) = 0.0;
    }
  }
  Eigen::VectorXd rhs = coupling_ * boundary_values;
  for (Eigen::Index i = 0; i < m; ++i) {
    rhs(i) += f[unknowns_[static_cast<std::size_t>(i)]];
  }

  Eigen::VectorXd sol = lu_.solve(rhs);
  auto backward_error = [&](const Eigen::VectorXd& v) {
    const double denom = matrix_norm_ * v.lpNorm<Eigen::Infinity>() + rhs.lpNorm<Eigen::Infinity>();
    const double num = (rhs - matrix_ * v).lpNorm<Eigen::Infinity>();
    return denom > 0.0 ? num / denom : num;
  };
  double residual = backward_error(sol);
  if (residual > 1e-14) {
    Eigen::VectorXd refined = sol + lu_.solve(rhs - matrix_ * sol);
    const double refined_residual = backward_error(refined);
    if (refined_residual < residual) {
      sol = std::move(refined);
      residual = refined_residual;
    }
  }
  if (!(residual <= 1e-10)) {
    std::ostringstream msg;
    msg << "Dirichlet solve backward error " << residual << " exceeds 1e-10";
    fail(ErrorKind::SolverFailure, msg.str());
  }
  last_residual_ = residual;
  for (Eigen::Index i = 0; i < m; ++i) {
    u[unknowns_[static_cast<std::size_t>(i)]] = sol(i);
  }
  return u;
}

Function solve_poisson(const RateChain& chain, const StateSet& C, std::span<const double> b,
                       std::span<const double> f) {
  DirichletSolver solver(chain, C);
  return solver.solve(b, f);
}

// ---------------------------------------------------------------- simulation

JumpSampler::JumpSampler(const RateChain& chain) : offsets_(chain.size() + 1, 0), total_(chain.total_rates()) {
  for (std::size_t x = 0; x < chain.size(); ++x) {
    double running = 0.0;
    chain.for_each_jump(x, [&](std::size_t y, double r) {
      running += r;
      targets_.push_back(y);
      cumulative_.push_back(running);
    });
    offsets_[x + 1] = targets_.size();
  }
}

JumpSampler::Jump JumpSampler::step(std::size_t x, CounterRng& rng) const {
  const double lambda = total_[x];
  Jump jump;
  jump.holding = rng.exponential(lambda);
  const double u = rng.uniform() * lambda;
  const auto first = cumulative_.begin() + static_cast<std::ptrdiff_t>(offsets_[x]);
  const auto last = cumulative_.begin() + static_cast<std::ptrdiff_t>(offsets_[x + 1]);
  auto it = std::upper_bound(first, last, u);
  if (it == last) {
    --it;  // u rounded onto the total
  }
  jump.next = targets_[static_cast<std::size_t>(it - cumulative_.begin())];
  return jump;
}

SamplePath simulate(const RateChain& chain, std::size_t x0, double horizon, std::uint64_t seed, std::uint64_t stream) {
  require(x0 < chain.size(), ErrorKind::InvalidArgument, "initial state outside the chain");
  require(horizon >= 0.0 && std::isfinite(horizon), ErrorKind::InvalidArgument, "horizon must be finite and >= 0");
  SamplePath path;
  path.horizon = horizon;
  path.seed = seed;
  path.times.push_back(0.0);
  path.states.push_back(x0);
  if (chain.size() == 1) {
    return path;
  }
  JumpSampler sampler(chain);
  CounterRng rng(seed, stream);
  double t = 0.0;
  std::size_t x = x0;
  for (;;) {
    auto jump = sampler.step(x, rng);
    t += jump.holding;
    if (t >= horizon) {
      break;
    }
    x = jump.next;
    path.times.push_back(t);
    path.states.push_back(x);
  }
  return path;
}

// ---------------------------------------------------------------- sector condition

double sector_constant(const EdgeDecomposition& decomp) {
  const auto n = static_cast<Eigen::Index>(decomp.size());
  require(n <= 3000, ErrorKind::InvalidArgument, "sector_constant is dense and limited to 3000 states");
  if (n <= 1) {
    return 1.0;
  }
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : decomp.edges()) {
    const auto x = static_cast<Eigen::Index>(e.x);
    const auto y = static_cast<Eigen::Index>(e.y);
    Q(x, y) -= e.s;
    Q(y, x) -= e.s;
    Q(x, x) += e.s;
    Q(y, y) += e.s;
    J(x, y) = e.j;
    J(y, x) = -e.j;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q);
  if (eig.info() != Eigen::Success) {
    fail(ErrorKind::SolverFailure, "eigen-decomposition of the Dirichlet form did not converge");
  }
  // The chain is irreducible, so exactly one eigenvalue (constants) vanishes.
  const Eigen::VectorXd values = eig.eigenvalues().tail(n - 1);
  const Eigen::MatrixXd basis = eig.eigenvectors().rightCols(n - 1);
  if (!(values.minCoeff() > 0.0)) {
    fail(ErrorKind::SolverFailure, "Dirichlet form is degenerate on the complement of constants");
  }
  const Eigen::MatrixXd W = basis * values.cwiseSqrt().cwiseInverse().asDiagonal();
  const Eigen::MatrixXd K = W.transpose() * J * W;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(K);
  const double norm = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  return 1.0 + norm * norm;
}

}  // namespace capflow
