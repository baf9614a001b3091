#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "capflow/chain.hpp"
#include "capflow/expr.hpp"

namespace capflow {

/// Periodic grid {0, 1/n, ..., (n-1)/n}^d on the unit torus, 1 <= d <= 3.
/// Index = k_1 + n k_2 + n^2 k_3.
class Grid {
 public:
  using Coords = std::array<long, 3>;

  Grid(std::size_t d, std::size_t n);

  [[nodiscard]] std::size_t d() const noexcept { return d_; }
  [[nodiscard]] std::size_t n() const noexcept { return n_; }
  [[nodiscard]] std::size_t size() const noexcept { return size_; }

  [[nodiscard]] Coords coords(std::size_t index) const;
  /// Index of the (wrapped) coordinates.
  [[nodiscard]] std::size_t index(const Coords& k) const;
  [[nodiscard]] std::size_t shift(std::size_t index, std::size_t axis, long step) const;
  /// Continuous position of a grid point, optionally offset by `offset` grid steps.
  [[nodiscard]] std::array<double, 3> position(std::size_t index, const std::array<double, 3>& offset = {}) const;

 private:
  std::size_t d_;
  std::size_t n_;
  std::size_t size_;
};

struct Landscape {
  std::size_t d = 1;
  std::size_t n = 0;
  double epsilon = 1.0;
  ScalarField V;
  std::vector<ScalarField> a;  // diagonal anisotropy, one field per axis
  std::vector<ScalarField> c;  // drift, one field per axis; empty for none
  std::optional<double> kappa; // absolute well margin; default 0.1 Lambda

  [[nodiscard]] Grid grid() const { return Grid(d, n); }
  [[nodiscard]] bool has_drift() const noexcept { return !c.empty(); }
};

/// Parse expressions and validate: 1 <= d <= 3, n >= 3, epsilon > 0, one a
/// and (optionally) one c expression per axis, a > 0 at every edge midpoint.
Landscape make_landscape(std::size_t d, std::size_t n, double epsilon, const std::string& V,
                         const std::vector<std::string>& a, const std::vector<std::string>& c = {},
                         std::optional<double> kappa = std::nullopt);

/// V at every grid point.
std::vector<double> sample_potential(const Landscape& ls);

/// Residuals of c . grad V = 0 and div c = 0, maximized over grid points.
struct DriftResiduals {
  double c_dot_grad_V = 0.0;
  double div_c = 0.0;
  double grad_V_max = 0.0;  // max |grad V| over the grid points
};

/// Second-order central differences with the grid spacing 1/n; the residuals
/// of analytic fields shrink as O(1/n^2).
DriftResiduals drift_residuals_grid(const Landscape& ls);

/// Fourth-order five-point differences with spacing `step`, for validating
/// analytic fields independently of the grid.
DriftResiduals drift_residuals_fine(const Landscape& ls, double step = 1e-3);

struct Discretization {
  RateChain chain;
  Measure gibbs;                      // normalized exp(-V/eps) on the grid
  Measure mu;                         // exact stationary measure of `chain`
  double projection_residual = 0.0;   // relative divergence of the drift current
  double tv_to_gibbs = 0.0;           // total variation between mu and gibbs
};

/// Nearest-neighbour chain on the periodic grid.
///
/// Symmetric part: r_s(x, x +- e_i/n) = eps n^2 a_i(midpoint) exp(-(V(y) - V(x)) / (2 eps)),
/// in detailed balance with exp(-V/eps) exactly. With drift, the current
/// (n/2) c_i(midpoint) sqrt(w(x) w(y)), w = exp(-(V - min V)/eps), is projected
/// onto divergence-free edge currents J and r(x,y) = r_s(x,y) + J(x,y)/w(x).
///
/// Throws NegativeRate when the drift overwhelms the symmetric rates and
/// HypothesisViolation when c . grad V = 0, div c = 0 fail beyond
/// 1e-6 max |grad V| (checked with drift_residuals_fine).
Discretization discretize(const Landscape& ls);

enum class CriticalKind { Minimum, Saddle, Other };

struct CriticalPoint {
  std::size_t index = 0;
  CriticalKind kind = CriticalKind::Other;
  double value = 0.0;             // V on the grid point
  Eigen::MatrixXd hessian;        // central differences with step 1/n
  double mu_neg = 0.0;            // saddles: |negative eigenvalue of hessian * diag(a)|
};

/// Communication link between two minima: the lowest level at which their
/// sublevel components merge and the grid point where that happens.
struct SaddleLink {
  std::size_t min_a = 0;   // grid indices; all three appear in CriticalAnalysis::points
  std::size_t min_b = 0;
  std::size_t saddle = 0;
  double height = 0.0;
  bool multiple_saddles = false;  // several saddle points tie at this height
};

struct CriticalAnalysis {
  std::vector<CriticalPoint> points;  // minima, saddle candidates and link points, by grid index
  std::vector<SaddleLink> links;      // minimum spanning merge tree, by height

  [[nodiscard]] std::vector<std::size_t> minima() const;
  [[nodiscard]] const CriticalPoint* find(std::size_t grid_index) const;
};

/// Minima are strict grid-local minima over the 3^d neighbourhood (ties in V
/// broken by grid index). A saddle candidate is a point whose lower link in
/// the 3^d shell is disconnected and whose Hessian has exactly one negative
/// eigenvalue. Links come from merging sublevel components in increasing V.
///
/// Throws DegenerateCritical when a minimum or saddle candidate has a Hessian
/// eigenvalue of magnitude below `degenerate_threshold`.
CriticalAnalysis find_critical_points(const Landscape& ls, double degenerate_threshold = 1e-6);

/// Grid connected component (nearest neighbours) of {V < level} containing seed;
/// empty when V(seed) >= level.
StateSet sublevel_component(const Grid& grid, std::span<const double> values, double level, std::size_t seed);

struct KramersPrediction {
  double Lambda = 0.0;          // V(sigma) - V(m1)
  double prefactor = 0.0;       // (2 pi / mu) sqrt(-det H(sigma)) / sqrt(det H(m1))
  double mu = 0.0;
  double theta = 0.0;           // exp(Lambda / eps)
  double predicted_time = 0.0;  // prefactor * theta
};

/// Throws NotAMinimum, NotASaddle or NonpositiveBarrier.
KramersPrediction kramers_prediction(const Landscape& ls, const CriticalPoint& m1, const CriticalPoint& sigma);

/// E_x[H_target], the solution of L u = -1 off target, u = 0 on target.
double exact_transition_time(const RateChain& chain, std::size_t x, const StateSet& target);

struct KramersRow {
  double epsilon = 0.0;
  double exact = 0.0;
  double predicted = 0.0;
  double ratio = 0.0;
};

struct KramersSweep {
  std::vector<KramersRow> rows;
  std::size_t m1 = 0;     // grid index of the starting minimum
  std::size_t m2 = 0;     // grid index of the target minimum
  std::size_t saddle = 0; // grid index of the saddle
  double Lambda = 0.0;
  double kappa = 0.0;
  std::size_t target_size = 0;
};

/// Exact versus predicted transition times from the higher (or, for equal
/// depths, lower-index) minimum m1 to the sublevel well of m2 with margin kappa.
/// Requires exactly two minima.
KramersSweep kramers_sweep(const Landscape& ls, std::span<const double> epsilons, unsigned threads = 1);

}  // namespace capflow
