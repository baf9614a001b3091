#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "capflow/captheory.hpp"

namespace capflow {

/// Antisymmetric edge function. values[e] is the flow along edges()[e] in
/// the direction x -> y; the reverse direction carries the negative.
struct EdgeFlow {
  std::vector<double> values;

  [[nodiscard]] double along(const EdgeDecomposition& decomp, std::size_t x, std::size_t y) const;
};

EdgeFlow zero_flow(const EdgeDecomposition& decomp);
EdgeFlow operator+(const EdgeFlow& a, const EdgeFlow& b);
EdgeFlow operator-(const EdgeFlow& a, const EdgeFlow& b);
EdgeFlow operator*(double c, const EdgeFlow& a);

/// Psi_f(x,y) = s(x,y) (f(y) - f(x)).
EdgeFlow psi_flow(const EdgeDecomposition& decomp, std::span<const double> f);

/// Phi_f(x,y) = s(x,y) (f(y) - f(x)) - j(x,y) (f(x) + f(y)).
///
/// The midpoint rule on the current makes sum_y Phi_f(x,y) = mu(x) (L* f)(x)
/// hold exactly, so every identity built from Phi has no discretization error.
EdgeFlow phi_flow(const EdgeDecomposition& decomp, std::span<const double> f);

struct FlowPair {
  EdgeFlow psi;
  EdgeFlow phi;
};

FlowPair make_flows(const EdgeDecomposition& decomp, std::span<const double> f);

/// (div phi)(x) = sum_y phi(x,y).
Function flow_divergence(const EdgeDecomposition& decomp, const EdgeFlow& phi);

/// <phi, psi> = sum over edges of phi psi / s. Throws SupportMismatch for
/// flows of the wrong length or carrying mass on an edge with s = 0.
double flow_inner(const EdgeDecomposition& decomp, const EdgeFlow& phi, const EdgeFlow& psi);

/// flux_A(phi) = sum_{x in A} sum_y phi(x,y), the total divergence in A.
/// Membership in F_gamma: divergence zero off A u B and flux_A = gamma, both
/// up to tol * (1 + max_x sum_y |phi(x,y)|).
struct FlowFeasibility {
  double div_residual = 0.0;
  double flux = 0.0;
  double gamma = 0.0;
  bool feasible = false;
};

FlowFeasibility flow_feasibility(const EdgeDecomposition& decomp, const EdgeFlow& phi, const StateSet& A,
                                 const StateSet& B, double gamma, double tol = 1e-9);

struct Lemma23Result {
  double lhs = 0.0;  // <Phi_f - phi, Psi_h>
  double rhs = 0.0;  // gamma + alpha Cap
  double residual = 0.0;
};

/// Evaluate <Phi_f - phi, Psi_h> against gamma + alpha Cap(A, B).
/// Throws InfeasibleInputs unless f = alpha on A, f = 0 on B and phi is in F_gamma.
Lemma23Result lemma23_check(const EdgeDecomposition& decomp, const StateSet& A, const StateSet& B,
                            std::span<const double> f, double alpha, double gamma, const EdgeFlow& phi,
                            std::span<const double> h);

enum class CertificateKind { DirichletUpper, ThomsonReciprocal };

std::string_view to_string(CertificateKind kind) noexcept;

struct Certificate {
  CertificateKind kind = CertificateKind::DirichletUpper;
  double value = 0.0;  // <Phi_f - phi, Phi_f - phi>
  FlowFeasibility feasibility;
  bool boundary_ok = false;
  std::optional<double> cap_exact;
};

/// Upper bound: value >= Cap(A, B) for f = 1 on A, 0 on B and phi in F_0.
Certificate dirichlet_certificate(const EdgeDecomposition& decomp, const StateSet& A, const StateSet& B,
                                  std::span<const double> f, const EdgeFlow& phi, double tol = 1e-9);

/// Reciprocal lower bound: value >= 1/Cap(A, B) for f = 0 on A u B and phi in F_1.
Certificate thomson_certificate(const EdgeDecomposition& decomp, const StateSet& A, const StateSet& B,
                                std::span<const double> f, const EdgeFlow& phi, double tol = 1e-9);

/// Closed-form minimizers. Dirichlet: f = (h + h*)/2, phi = Phi_f - Psi_h.
/// Thomson: f = (h - h*)/(2 Cap), phi = Phi_f - Psi_{h/Cap}.
struct OptimalPairs {
  Function dirichlet_f;
  EdgeFlow dirichlet_phi;
  Function thomson_f;
  EdgeFlow thomson_phi;
  double cap = 0.0;
};

OptimalPairs optimal_pairs(const RateChain& chain, const EdgeDecomposition& decomp, const StateSet& A,
                           const StateSet& B);

/// Map an arbitrary flow into F_gamma by subtracting a conductance-weighted
/// gradient (one Poisson solve on the symmetrized chain) and adding a
/// multiple of the unit equilibrium flow of that chain.
EdgeFlow project_to_feasible(const EdgeDecomposition& decomp, const StateSet& A, const StateSet& B, double gamma,
                             const EdgeFlow& raw);

}  // namespace capflow
