#include "capflow/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "capflow/parallel.hpp"

namespace capflow {

// ---------------------------------------------------------------- Grid

Grid::Grid(std::size_t d, std::size_t n) : d_(d), n_(n), size_(1) {
  require(d >= 1 && d <= 3, ErrorKind::InvalidArgument, "grid dimension must be 1, 2 or 3");
  require(n >= 1, ErrorKind::InvalidArgument, "grid needs at least one point per axis");
  for (std::size_t i = 0; i < d; ++i) {
    size_ *= n;
  }
}

Grid::Coords Grid::coords(std::size_t index) const {
  Coords k{0, 0, 0};
  for (std::size_t i = 0; i < d_; ++i) {
    k[i] = static_cast<long>(index % n_);
    index /= n_;
  }
  return k;
}

std::size_t Grid::index(const Coords& k) const {
  const auto n = static_cast<long>(n_);
  std::size_t index = 0;
  for (std::size_t i = d_; i-- > 0;) {
    const long wrapped = ((k[i] % n) + n) % n;
    index = index * n_ + static_cast<std::size_t>(wrapped);
  }
  return index;
}

std::size_t Grid::shift(std::size_t index, std::size_t axis, long step) const {
  auto k = coords(index);
  k[axis] += step;
  return this->index(k);
}

std::array<double, 3> Grid::position(std::size_t index, const std::array<double, 3>& offset) const {
  const auto k = coords(index);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < d_; ++i) {
    x[i] = (static_cast<double>(k[i]) + offset[i]) / static_cast<double>(n_);
  }
  return x;
}

// ---------------------------------------------------------------- Landscape

namespace {

double eval(const ScalarField& f, const std::array<double, 3>& x) { return f(std::span<const double>(x.data(), 3)); }

std::array<double, 3> unit(std::size_t axis, double length) {
  std::array<double, 3> e{0.0, 0.0, 0.0};
  e[axis] = length;
  return e;
}

std::array<double, 3> add(std::array<double, 3> x, const std::array<double, 3>& y) {
  for (std::size_t i = 0; i < 3; ++i) {
    x[i] += y[i];
  }
  return x;
}

}  // namespace

Landscape make_landscape(std::size_t d, std::size_t n, double epsilon, const std::string& V,
                         const std::vector<std::string>& a, const std::vector<std::string>& c,
                         std::optional<double> kappa) {
  require(d >= 1 && d <= 3, ErrorKind::InvalidArgument, "landscape dimension must be 1, 2 or 3");
  require(n >= 3, ErrorKind::InvalidArgument, "landscape grid needs n >= 3");
  require(epsilon > 0.0 && std::isfinite(epsilon), ErrorKind::InvalidArgument, "epsilon must be positive");
  require(a.size() == d, ErrorKind::InvalidArgument, "need one anisotropy expression per axis");
  require(c.empty() || c.size() == d, ErrorKind::InvalidArgument, "need one drift expression per axis");
  require(!kappa || *kappa > 0.0, ErrorKind::InvalidArgument, "kappa must be positive");

  Landscape ls;
  ls.d = d;
  ls.n = n;
  ls.epsilon = epsilon;
  ls.V = parse_scalar_field(V, d);
  for (const auto& expr : a) {
    ls.a.push_back(parse_scalar_field(expr, d));
  }
  for (const auto& expr : c) {
    ls.c.push_back(parse_scalar_field(expr, d));
  }
  ls.kappa = kappa;

  const Grid grid = ls.grid();
  for (std::size_t x = 0; x < grid.size(); ++x) {
    for (std::size_t i = 0; i < d; ++i) {
      for (double offset : {0.0, 0.5}) {
        const double value = eval(ls.a[i], grid.position(x, unit(i, offset)));
        if (!(value > 0.0) || !std::isfinite(value)) {
          std::ostringstream msg;
          msg << "anisotropy a_" << i + 1 << " = " << value << " is not positive at grid point " << x;
          fail(ErrorKind::InvalidArgument, msg.str());
        }
      }
    }
  }
  return ls;
}

std::vector<double> sample_potential(const Landscape& ls) {
  const Grid grid = ls.grid();
  std::vector<double> values(grid.size());
  for (std::size_t x = 0; x < grid.size(); ++x) {
    values[x] = eval(ls.V, grid.position(x));
    if (!std::isfinite(values[x])) {
      std::ostringstream msg;
      msg << "potential is not finite at grid point " << x;
      fail(ErrorKind::InvalidArgument, msg.str());
    }
  }
  return values;
}

namespace {

// First derivative of f along `axis` at x; order 2 or order 4 central stencil.
double derivative(const ScalarField& f, const std::array<double, 3>& x, std::size_t axis, double h, bool fourth) {
  auto at = [&](double k) { return eval(f, add(x, unit(axis, k * h))); };
  if (fourth) {
    return (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h);
  }
  return (at(1.0) - at(-1.0)) / (2.0 * h);
}

DriftResiduals drift_residuals(const Landscape& ls, double h, bool fourth) {
  const Grid grid = ls.grid();
  DriftResiduals out;
  for (std::size_t x = 0; x < grid.size(); ++x) {
    const auto p = grid.position(x);
    double dot = 0.0;
    double div = 0.0;
    double grad2 = 0.0;
    for (std::size_t i = 0; i < ls.d; ++i) {
      const double g = derivative(ls.V, p, i, h, fourth);
      grad2 += g * g;
      if (ls.has_drift()) {
        dot += eval(ls.c[i], p) * g;
        div += derivative(ls.c[i], p, i, h, fourth);
      }
    }
    out.c_dot_grad_V = std::max(out.c_dot_grad_V, std::abs(dot));
    out.div_c = std::max(out.div_c, std::abs(div));
    out.grad_V_max = std::max(out.grad_V_max, std::sqrt(grad2));
  }
  return out;
}

}  // namespace

DriftResiduals drift_residuals_grid(const Landscape& ls) {
  return drift_residuals(ls, 1.0 / static_cast<double>(ls.n), false);
}

DriftResiduals drift_residuals_fine(const Landscape& ls, double step) {
  require(step > 0.0, ErrorKind::InvalidArgument, "finite-difference step must be positive");
  return drift_residuals(ls, step, true);
}

Discretization discretize(const Landscape& ls) {
  require(ls.n >= 3, ErrorKind::InvalidArgument, "landscape grid needs n >= 3");
  require(ls.epsilon > 0.0, ErrorKind::InvalidArgument, "epsilon must be positive");
  const Grid grid = ls.grid();
  const auto N = grid.size();
  const double eps = ls.epsilon;
  const double nn = static_cast<double>(ls.n);
  const std::vector<double> V = sample_potential(ls);
  const double v_min = *std::min_element(V.begin(), V.end());

  std::vector<double> w(N);
  for (std::size_t x = 0; x < N; ++x) {
    w[x] = std::exp(-(V[x] - v_min) / eps);
  }
  Measure gibbs = make_measure(w, true);

  struct GridEdge {
    std::size_t x, y, axis;
    double rs_xy, rs_yx;
  };
  std::vector<GridEdge> edges;
  edges.reserve(N * ls.d);
  for (std::size_t x = 0; x < N; ++x) {
    for (std::size_t i = 0; i < ls.d; ++i) {
      const std::size_t y = grid.shift(x, i, 1);
      const double a_mid = eval(ls.a[i], grid.position(x, unit(i, 0.5)));
      const double base = eps * nn * nn * a_mid;
      edges.push_back({x, y, i, base * std::exp(-(V[y] - V[x]) / (2.0 * eps)),
                       base * std::exp(-(V[x] - V[y]) / (2.0 * eps))});
    }
  }

  std::vector<RateEntry> symmetric;
  symmetric.reserve(2 * edges.size());
  for (const auto& e : edges) {
    symmetric.push_back({e.x, e.y, e.rs_xy});
    symmetric.push_back({e.y, e.x, e.rs_yx});
  }
  RateChain reversible = build_chain(N, symmetric);
  if (!ls.has_drift()) {
    Measure mu = gibbs;
    return {std::move(reversible), std::move(gibbs), std::move(mu), 0.0, 0.0};
  }

  const DriftResiduals check = drift_residuals_fine(ls);
  const double tol = 1e-6 * std::max(check.grad_V_max, 1.0);
  if (check.c_dot_grad_V > tol || check.div_c > tol) {
    std::ostringstream msg;
    msg << "drift violates c.grad V = 0 / div c = 0: residuals " << check.c_dot_grad_V << " and " << check.div_c
        << " exceed " << tol;
    fail(ErrorKind::HypothesisViolation, msg.str());
  }

  // Raw current from midpoint samples of exp(-V/eps) c, then the
  // divergence-free projection J = J_raw - S grad p with S = w r_s.
  std::vector<double> current(edges.size());
  Function div(N, 0.0);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    const double c_mid = eval(ls.c[e.axis], grid.position(e.x, unit(e.axis, 0.5)));
    current[k] = 0.5 * nn * c_mid * std::sqrt(w[e.x] * w[e.y]);
    div[e.x] += current[k];
    div[e.y] -= current[k];
  }
  Function source(N, 0.0);
  for (std::size_t x = 0; x < N; ++x) {
    source[x] = -div[x] / w[x];
  }
  const Function zero(N, 0.0);
  const Function p = solve_poisson(reversible, StateSet(N, {0}), zero, source);

  Function div_after(N, 0.0);
  Function mass(N, 0.0);
  std::vector<RateEntry> entries;
  entries.reserve(2 * edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    const double J = current[k] - w[e.x] * e.rs_xy * (p[e.y] - p[e.x]);
    div_after[e.x] += J;
    div_after[e.y] -= J;
    mass[e.x] += std::abs(J);
    mass[e.y] += std::abs(J);
    const double forward = e.rs_xy + J / w[e.x];
    const double backward = e.rs_yx - J / w[e.y];
    if (forward < 0.0 || backward < 0.0) {
      std::ostringstream msg;
      msg << "drift current exceeds the symmetric rate on the edge (" << e.x << ", " << e.y
          << "); refine the grid or reduce |c|";
      fail(ErrorKind::NegativeRate, msg.str());
    }
    entries.push_back({e.x, e.y, forward});
    entries.push_back({e.y, e.x, backward});
  }
  double worst = 0.0;
  for (auto v : div_after) {
    worst = std::max(worst, std::abs(v));
  }
  const double scale = *std::max_element(mass.begin(), mass.end());

  RateChain chain = build_chain(N, entries);
  Measure mu = stationary_measure(chain);
  double tv = 0.0;
  for (std::size_t x = 0; x < N; ++x) {
    tv += std::abs(mu[x] - gibbs[x]);
  }
  return {std::move(chain), std::move(gibbs), std::move(mu), scale > 0.0 ? worst / scale : 0.0, 0.5 * tv};
}

// ---------------------------------------------------------------- critical points

std::vector<std::size_t> CriticalAnalysis::minima() const {
  std::vector<std::size_t> out;
  for (const auto& p : points) {
    if (p.kind == CriticalKind::Minimum) {
      out.push_back(p.index);
    }
  }
  return out;
}

const CriticalPoint* CriticalAnalysis::find(std::size_t grid_index) const {
  auto it = std::lower_bound(points.begin(), points.end(), grid_index,
                             [](const CriticalPoint& p, std::size_t i) { return p.index < i; });
  return it != points.end() && it->index == grid_index ? &*it : nullptr;
}

namespace {

Eigen::MatrixXd hessian_at(const Landscape& ls, const Grid& grid, std::size_t x) {
  const double h = 1.0 / static_cast<double>(ls.n);
  const auto p = grid.position(x);
  const auto d = static_cast<Eigen::Index>(ls.d);
  auto at = [&](std::size_t i, double si, std::size_t j, double sj) {
    return eval(ls.V, add(add(p, unit(i, si * h)), unit(j, sj * h)));
  };
  const double center = eval(ls.V, p);
  Eigen::MatrixXd H(d, d);
  for (std::size_t i = 0; i < ls.d; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    H(ii, ii) = (at(i, 1.0, i, 0.0) - 2.0 * center + at(i, -1.0, i, 0.0)) / (h * h);
    for (std::size_t j = i + 1; j < ls.d; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      H(ii, jj) = (at(i, 1.0, j, 1.0) - at(i, 1.0, j, -1.0) - at(i, -1.0, j, 1.0) + at(i, -1.0, j, -1.0)) / (4.0 * h * h);
      H(jj, ii) = H(ii, jj);
    }
  }
  return H;
}

// Eigenvalues of H diag(a(x)); exactly one must have negative real part.
double negative_eigenvalue(const Landscape& ls, const Grid& grid, std::size_t x, const Eigen::MatrixXd& H) {
  Eigen::VectorXd a(H.rows());
  const auto p = grid.position(x);
  for (Eigen::Index i = 0; i < H.rows(); ++i) {
    a(i) = eval(ls.a[static_cast<std::size_t>(i)], p);
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(H * a.asDiagonal());
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::SolverFailure, "eigenvalues of the saddle matrix did not converge");
  }
  int negatives = 0;
  double value = 0.0;
  for (Eigen::Index i = 0; i < H.rows(); ++i) {
    const auto lambda = solver.eigenvalues()(i);
    if (lambda.real() < 0.0) {
      ++negatives;
      value = lambda.real();
      if (std::abs(lambda.imag()) > 1e-8 * std::max(1.0, std::abs(lambda.real()))) {
        fail(ErrorKind::NotASaddle, "the negative eigenvalue of the saddle matrix is not real");
      }
    }
  }
  if (negatives != 1) {
    std::ostringstream msg;
    msg << "grid point " << x << " has " << negatives << " negative eigenvalues, expected exactly one";
    fail(ErrorKind::NotASaddle, msg.str());
  }
  return -value;
}

std::vector<Grid::Coords> shell_offsets(std::size_t d) {
  std::vector<Grid::Coords> out;
  const long hi1 = d >= 2 ? 1 : 0;
  const long hi2 = d >= 3 ? 1 : 0;
  for (long k2 = -hi2; k2 <= hi2; ++k2) {
    for (long k1 = -hi1; k1 <= hi1; ++k1) {
      for (long k0 = -1; k0 <= 1; ++k0) {
        if (k0 != 0 || k1 != 0 || k2 != 0) {
          out.push_back({k0, k1, k2});
        }
      }
    }
  }
  return out;
}

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t root(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  std::vector<std::size_t> parent;
};

}  // namespace

CriticalAnalysis find_critical_points(const Landscape& ls, double degenerate_threshold) {
  const Grid grid = ls.grid();
  const auto N = grid.size();
  const std::vector<double> V = sample_potential(ls);
  auto lower = [&](std::size_t x, std::size_t y) { return V[x] < V[y] || (V[x] == V[y] && x < y); };

  const auto offsets = shell_offsets(ls.d);
  CriticalAnalysis out;

  auto check_degenerate = [&](std::size_t x, const Eigen::MatrixXd& H) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    for (Eigen::Index i = 0; i < H.rows(); ++i) {
      if (std::abs(eig.eigenvalues()(i)) < degenerate_threshold) {
        std::ostringstream msg;
        msg << "critical point at grid index " << x << " has Hessian eigenvalue " << eig.eigenvalues()(i);
        fail(ErrorKind::DegenerateCritical, msg.str());
      }
    }
    int negatives = 0;
    for (Eigen::Index i = 0; i < H.rows(); ++i) {
      negatives += eig.eigenvalues()(i) < 0.0 ? 1 : 0;
    }
    return negatives;
  };

  for (std::size_t x = 0; x < N; ++x) {
    const auto k = grid.coords(x);
    std::vector<char> below(offsets.size(), 0);
    bool minimum = true;
    for (std::size_t o = 0; o < offsets.size(); ++o) {
      const std::size_t y = grid.index({k[0] + offsets[o][0], k[1] + offsets[o][1], k[2] + offsets[o][2]});
      if (y == x) {
        continue;
      }
      if (lower(y, x)) {
        below[o] = 1;
        minimum = false;
      }
    }
    if (minimum) {
      CriticalPoint p{x, CriticalKind::Minimum, V[x], hessian_at(ls, grid, x), 0.0};
      if (check_degenerate(x, p.hessian) != 0) {
        std::ostringstream msg;
        msg << "grid minimum at index " << x << " has an indefinite Hessian";
        fail(ErrorKind::DegenerateCritical, msg.str());
      }
      out.points.push_back(std::move(p));
      continue;
    }
    // Components of the lower link, shell points adjacent when they differ
    // in exactly one coordinate by one.
    std::size_t components = 0;
    std::vector<char> seen(offsets.size(), 0);
    for (std::size_t o = 0; o < offsets.size(); ++o) {
      if (below[o] == 0 || seen[o] != 0) {
        continue;
      }
      ++components;
      std::vector<std::size_t> stack{o};
      seen[o] = 1;
      while (!stack.empty()) {
        const auto u = stack.back();
        stack.pop_back();
        for (std::size_t v = 0; v < offsets.size(); ++v) {
          if (below[v] == 0 || seen[v] != 0) {
            continue;
          }
          long dist = 0;
          for (std::size_t i = 0; i < 3; ++i) {
            dist += std::abs(offsets[u][i] - offsets[v][i]);
          }
          if (dist == 1) {
            seen[v] = 1;
            stack.push_back(v);
          }
        }
      }
    }
    if (components >= 2) {
      CriticalPoint p{x, CriticalKind::Other, V[x], hessian_at(ls, grid, x), 0.0};
      if (check_degenerate(x, p.hessian) == 1) {
        p.kind = CriticalKind::Saddle;
        p.mu_neg = negative_eigenvalue(ls, grid, x, p.hessian);
      }
      out.points.push_back(std::move(p));
    }
  }

  // Merge sublevel components in increasing V over nearest neighbours.
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), lower);
  UnionFind uf(N);
  std::vector<std::size_t> lowest(N);  // root -> lowest point of the component
  std::vector<char> added(N, 0);
  std::vector<SaddleLink> links;
  for (auto v : order) {
    added[v] = 1;
    lowest[v] = v;
    std::vector<std::size_t> roots;
    for (std::size_t i = 0; i < ls.d; ++i) {
      for (long step : {-1L, 1L}) {
        const auto y = grid.shift(v, i, step);
        if (added[y] != 0 && y != v) {
          const auto r = uf.root(y);
          if (std::find(roots.begin(), roots.end(), r) == roots.end()) {
            roots.push_back(r);
          }
        }
      }
    }
    if (roots.empty()) {
      continue;
    }
    std::sort(roots.begin(), roots.end(), [&](std::size_t a, std::size_t b) { return lower(lowest[a], lowest[b]); });
    const auto keep = roots.front();
    for (std::size_t r = 1; r < roots.size(); ++r) {
      const auto a = lowest[keep];
      const auto b = lowest[roots[r]];
      const auto* pa = out.find(a);
      const auto* pb = out.find(b);
      if (pa != nullptr && pb != nullptr && pa->kind == CriticalKind::Minimum && pb->kind == CriticalKind::Minimum) {
        links.push_back({a, b, v, V[v], false});
      }
      uf.parent[roots[r]] = keep;
    }
    uf.parent[v] = keep;
  }

  for (auto& link : links) {
    if (out.find(link.saddle) == nullptr) {
      CriticalPoint p{link.saddle, CriticalKind::Other, V[link.saddle], hessian_at(ls, grid, link.saddle), 0.0};
      auto it = std::lower_bound(out.points.begin(), out.points.end(), link.saddle,
                                 [](const CriticalPoint& q, std::size_t i) { return q.index < i; });
      out.points.insert(it, std::move(p));
    }
    const double tol = 1e-12 * std::max(1.0, std::abs(link.height));
    const auto ties = std::count_if(out.points.begin(), out.points.end(), [&](const CriticalPoint& q) {
      return q.kind == CriticalKind::Saddle && std::abs(q.value - link.height) <= tol;
    });
    link.multiple_saddles = ties > 1;
  }
  out.links = std::move(links);
  return out;
}

StateSet sublevel_component(const Grid& grid, std::span<const double> values, double level, std::size_t seed) {
  require(values.size() == grid.size() && seed < grid.size(), ErrorKind::InvalidArgument,
          "values or seed do not match the grid");
  std::vector<char> mask(grid.size(), 0);
  if (!(values[seed] < level)) {
    return StateSet::from_mask(mask);
  }
  std::vector<std::size_t> stack{seed};
  mask[seed] = 1;
  while (!stack.empty()) {
    const auto x = stack.back();
    stack.pop_back();
    for (std::size_t i = 0; i < grid.d(); ++i) {
      for (long step : {-1L, 1L}) {
        const auto y = grid.shift(x, i, step);
        if (mask[y] == 0 && values[y] < level) {
          mask[y] = 1;
          stack.push_back(y);
        }
      }
    }
  }
  return StateSet::from_mask(mask);
}

// ---------------------------------------------------------------- Eyring-Kramers

KramersPrediction kramers_prediction(const Landscape& ls, const CriticalPoint& m1, const CriticalPoint& sigma) {
  if (m1.kind != CriticalKind::Minimum) {
    fail(ErrorKind::NotAMinimum, "starting point of the Kramers prediction is not a minimum");
  }
  if (sigma.kind != CriticalKind::Saddle) {
    fail(ErrorKind::NotASaddle, "barrier point of the Kramers prediction is not a saddle");
  }
  KramersPrediction out;
  out.Lambda = sigma.value - m1.value;
  if (!(out.Lambda > 0.0)) {
    std::ostringstream msg;
    msg << "barrier height " << out.Lambda << " is not positive";
    fail(ErrorKind::NonpositiveBarrier, msg.str());
  }
  const double det_m = m1.hessian.determinant();
  const double det_s = sigma.hessian.determinant();
  require(det_m > 0.0, ErrorKind::NotAMinimum, "Hessian at the minimum is not positive definite");
  require(det_s < 0.0, ErrorKind::NotASaddle, "Hessian at the saddle does not have one negative eigenvalue");
  out.mu = negative_eigenvalue(ls, ls.grid(), sigma.index, sigma.hessian);
  out.prefactor = (2.0 * std::numbers::pi / out.mu) * std::sqrt(-det_s) / std::sqrt(det_m);
  out.theta = std::exp(out.Lambda / ls.epsilon);
  out.predicted_time = out.prefactor * out.theta;
  return out;
}

double exact_transition_time(const RateChain& chain, std::size_t x, const StateSet& target) {
  require(x < chain.size(), ErrorKind::InvalidArgument, "state outside the chain");
  const Function zero(chain.size(), 0.0);
  const Function one(chain.size(), 1.0);
  return solve_poisson(chain, target, zero, one)[x];
}

KramersSweep kramers_sweep(const Landscape& ls, std::span<const double> epsilons, unsigned threads) {
  for (auto eps : epsilons) {
    require(eps > 0.0 && std::isfinite(eps), ErrorKind::InvalidArgument, "every epsilon must be positive");
  }
  const CriticalAnalysis crit = find_critical_points(ls);
  const auto minima = crit.minima();
  if (minima.size() != 2) {
    std::ostringstream msg;
    msg << "the Kramers sweep needs exactly two minima, found " << minima.size();
    fail(ErrorKind::HypothesisViolation, msg.str());
  }
  if (crit.links.empty()) {
    fail(ErrorKind::NoSaddle, "no saddle connects the two minima");
  }
  const SaddleLink& link = crit.links.front();
  const CriticalPoint& a = *crit.find(minima[0]);
  const CriticalPoint& b = *crit.find(minima[1]);
  const bool a_first = a.value > b.value || (a.value == b.value && a.index < b.index);
  const CriticalPoint& m1 = a_first ? a : b;
  const CriticalPoint& m2 = a_first ? b : a;
  const CriticalPoint& sigma = *crit.find(link.saddle);

  KramersSweep sweep;
  const KramersPrediction base = kramers_prediction(ls, m1, sigma);
  sweep.m1 = m1.index;
  sweep.m2 = m2.index;
  sweep.saddle = sigma.index;
  sweep.Lambda = base.Lambda;
  sweep.kappa = ls.kappa.value_or(0.1 * base.Lambda);

  const std::vector<double> V = sample_potential(ls);
  const StateSet target = sublevel_component(ls.grid(), V, sigma.value - sweep.kappa, m2.index);
  if (target.empty()) {
    fail(ErrorKind::InvalidArgument, "kappa leaves no sublevel neighbourhood around the target minimum");
  }
  if (target.contains(m1.index)) {
    fail(ErrorKind::WellMergeError, "the target neighbourhood contains the starting minimum; increase kappa");
  }
  sweep.target_size = target.size();

  sweep.rows.resize(epsilons.size());
  parallel_for(epsilons.size(), threads, [&](std::size_t k) {
    Landscape at = ls;
    at.epsilon = epsilons[k];
    const Discretization disc = discretize(at);
    KramersRow row;
    row.epsilon = epsilons[k];
    row.exact = exact_transition_time(disc.chain, m1.index, target);
    row.predicted = base.prefactor * std::exp(base.Lambda / epsilons[k]);
    row.ratio = row.exact / row.predicted;
    sweep.rows[k] = row;
  });
  return sweep;
}

}  // namespace capflow
