#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace capflow::testing {

namespace {

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

std::vector<std::pair<std::size_t, std::size_t>> random_graph(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t k = 0; k < n; ++k) {
    edges.emplace_back(order[k], order[(k + 1) % n]);
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const std::size_t extra = n + n / 2;
  for (std::size_t k = 0; k < extra; ++k) {
    const auto x = pick(rng);
    const auto y = pick(rng);
    if (x != y) {
      edges.emplace_back(x, y);
    }
  }
  return edges;
}

std::vector<std::size_t> complement_indices(const StateSet& C, std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < n; ++x) {
    if (!C.contains(x)) {
      out.push_back(x);
    }
  }
  return out;
}

}  // namespace

RateChain two_state_chain() {
  const std::vector<RateEntry> e{{0, 1, 2.0}, {1, 0, 1.0}};
  return build_chain(2, e);
}

RateChain three_cycle(double p, double q) {
  std::vector<RateEntry> e;
  for (std::size_t x = 0; x < 3; ++x) {
    e.push_back({x, (x + 1) % 3, p});
    e.push_back({x, (x + 2) % 3, q});
  }
  return build_chain(3, e);
}

RateChain symmetric_ring(std::size_t N, double rate) {
  std::vector<RateEntry> e;
  for (std::size_t x = 0; x < N; ++x) {
    e.push_back({x, (x + 1) % N, rate});
    e.push_back({x, (x + N - 1) % N, rate});
  }
  return build_chain(N, e);
}

RateChain random_chain(std::mt19937_64& rng, std::size_t n) {
  std::vector<RateEntry> entries;
  for (auto [x, y] : random_graph(rng, n)) {
    entries.push_back({x, y, log_uniform(rng, 0.1, 10.0)});
  }
  return build_chain(n, entries);
}

RateChain random_reversible_chain(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> pi(n);
  for (auto& p : pi) {
    p = log_uniform(rng, 0.1, 10.0);
  }
  std::vector<RateEntry> entries;
  for (auto [x, y] : random_graph(rng, n)) {
    const double c = log_uniform(rng, 0.1, 10.0);
    entries.push_back({x, y, c / pi[x]});
    entries.push_back({y, x, c / pi[y]});
  }
  return build_chain(n, entries);
}

std::pair<StateSet, StateSet> random_pair(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_int_distribution<std::size_t> size(1, std::max<std::size_t>(1, n / 4));
  const std::size_t a = size(rng);
  const std::size_t b = std::min(size(rng), n - a);
  return {StateSet(n, std::vector<std::size_t>(order.begin(), order.begin() + static_cast<long>(a))),
          StateSet(n, std::vector<std::size_t>(order.begin() + static_cast<long>(a),
                                               order.begin() + static_cast<long>(a + b)))};
}

Instance random_instance(std::mt19937_64& rng, std::size_t n_min, std::size_t n_max, bool reversible) {
  std::uniform_int_distribution<std::size_t> size(n_min, n_max);
  const std::size_t n = size(rng);
  RateChain chain = reversible ? random_reversible_chain(rng, n) : random_chain(rng, n);
  auto [A, B] = random_pair(rng, n);
  return {std::move(chain), std::move(A), std::move(B)};
}

Solved solved(RateChain chain) {
  Measure mu = stationary_measure(chain);
  EdgeDecomposition decomp = edge_decomposition(chain, mu);
  return {std::move(chain), std::move(mu), std::move(decomp)};
}

Function random_function(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Function f(n);
  for (auto& v : f) {
    v = u(rng);
  }
  return f;
}

EdgeFlow random_flow(std::mt19937_64& rng, const EdgeDecomposition& decomp) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  EdgeFlow phi = zero_flow(decomp);
  for (auto& v : phi.values) {
    v = u(rng);
  }
  return phi;
}

Function boundary_function(std::mt19937_64& rng, std::size_t n, const StateSet& A, const StateSet& B, double on_a,
                           double scale) {
  Function g = random_function(rng, n, -scale, scale);
  for (auto x : A) {
    g[x] = on_a;
  }
  for (auto x : B) {
    g[x] = 0.0;
  }
  return g;
}

Eigen::MatrixXd dense_generator(const RateChain& chain) {
  const auto n = static_cast<Eigen::Index>(chain.size());
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : chain.entries()) {
    Q(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.to)) += e.rate;
    Q(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.from)) -= e.rate;
  }
  return Q;
}

Eigen::VectorXd dense_stationary(const RateChain& chain) {
  const Eigen::MatrixXd Q = dense_generator(chain);
  const auto n = Q.rows();
  Eigen::MatrixXd system(n + 1, n);
  system.topRows(n) = Q.transpose();
  system.row(n).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs(n) = 1.0;
  return system.colPivHouseholderQr().solve(rhs);
}

Eigen::VectorXd dense_hitting_probability(const RateChain& chain, const StateSet& A, const StateSet& B) {
  const auto n = chain.size();
  const Eigen::MatrixXd Q = dense_generator(chain);
  const auto free = complement_indices(A.united(B), n);
  const auto m = static_cast<Eigen::Index>(free.size());
  Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (auto x : A) {
    h(static_cast<Eigen::Index>(x)) = 1.0;
  }
  if (m == 0) {
    return h;
  }
  // (I - P) h = P 1_A on the free states, P the jump chain.
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto x = static_cast<Eigen::Index>(free[static_cast<std::size_t>(i)]);
    const double lambda = -Q(x, x);
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto y = static_cast<Eigen::Index>(free[static_cast<std::size_t>(j)]);
      if (y != x) {
        M(i, j) -= Q(x, y) / lambda;
      }
    }
    for (auto a : A) {
      rhs(i) += Q(x, static_cast<Eigen::Index>(a)) / lambda;
    }
  }
  const Eigen::VectorXd sol = M.fullPivLu().solve(rhs);
  for (Eigen::Index i = 0; i < m; ++i) {
    h(static_cast<Eigen::Index>(free[static_cast<std::size_t>(i)])) = sol(i);
  }
  return h;
}

double dense_escape_capacity(const RateChain& chain, const Eigen::VectorXd& mu, const StateSet& A,
                             const StateSet& B) {
  const Eigen::MatrixXd Q = dense_generator(chain);
  const Eigen::VectorXd h = dense_hitting_probability(chain, A, B);
  double cap = 0.0;
  for (auto x : A) {
    const auto xi = static_cast<Eigen::Index>(x);
    const double lambda = -Q(xi, xi);
    double escape = 0.0;  // P_x[H_B < H_A^+] by first-step analysis
    for (Eigen::Index y = 0; y < Q.cols(); ++y) {
      if (y != xi) {
        escape += Q(xi, y) / lambda * (1.0 - h(y));
      }
    }
    cap += mu(xi) * lambda * escape;
  }
  return cap;
}

Eigen::VectorXd dense_accumulated(const RateChain& chain, const StateSet& C, const std::vector<double>& f) {
  const auto n = chain.size();
  const Eigen::MatrixXd Q = dense_generator(chain);
  const auto free = complement_indices(C, n);
  const auto m = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd M(m, m);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      M(i, j) = -Q(static_cast<Eigen::Index>(free[static_cast<std::size_t>(i)]),
                   static_cast<Eigen::Index>(free[static_cast<std::size_t>(j)]));
    }
    rhs(i) = f[free[static_cast<std::size_t>(i)]];
  }
  const Eigen::VectorXd sol = M.fullPivLu().solve(rhs);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < m; ++i) {
    u(static_cast<Eigen::Index>(free[static_cast<std::size_t>(i)])) = sol(i);
  }
  return u;
}

double dense_sector_constant(const RateChain& chain, const Eigen::VectorXd& mu) {
  const auto n = static_cast<Eigen::Index>(chain.size());
  const Eigen::MatrixXd M = mu.asDiagonal() * dense_generator(chain);
  const Eigen::MatrixXd D = -0.5 * (M + M.transpose());  // D(f) = f^T D f
  // Orthonormal basis of the complement of the constants.
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, 1);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(ones);
  const Eigen::MatrixXd full = qr.householderQ();
  const Eigen::MatrixXd U = full.rightCols(n - 1);
  const Eigen::MatrixXd S = U.transpose() * D * U;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const Eigen::MatrixXd S_inv_half =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  const Eigen::MatrixXd W = S_inv_half * U.transpose() * M * U * S_inv_half;
  const double norm = Eigen::JacobiSVD<Eigen::MatrixXd>(W).singularValues()(0);
  return norm * norm;
}

MonteCarlo mc_accumulated(const RateChain& chain, const StateSet& C, const std::vector<double>& f,
                          const std::vector<double>& start_law, std::size_t replicas, std::uint64_t seed) {
  const Eigen::MatrixXd Q = dense_generator(chain);
  const auto n = chain.size();
  std::vector<std::discrete_distribution<std::size_t>> jumps;
  for (std::size_t x = 0; x < n; ++x) {
    std::vector<double> w(n, 0.0);
    for (std::size_t y = 0; y < n; ++y) {
      if (y != x) {
        w[y] = Q(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
      }
    }
    jumps.emplace_back(w.begin(), w.end());
  }
  std::discrete_distribution<std::size_t> start(start_law.begin(), start_law.end());
  std::mt19937_64 rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t r = 0; r < replicas; ++r) {
    std::size_t x = start(rng);
    double total = 0.0;
    while (!C.contains(x)) {
      const double lambda = -Q(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x));
      total += f[x] * std::exponential_distribution<double>(lambda)(rng);
      x = jumps[x](rng);
    }
    sum += total;
    sum_sq += total * total;
  }
  const double m = static_cast<double>(replicas);
  const double mean = sum / m;
  const double var = std::max(0.0, (sum_sq - m * mean * mean) / (m - 1.0));
  return {mean, std::sqrt(var / m)};
}

}  // namespace capflow::testing
