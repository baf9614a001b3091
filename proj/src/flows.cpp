#include "capflow/flows.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace capflow {

namespace {

void check_flow(const EdgeDecomposition& decomp, const EdgeFlow& phi) {
  if (phi.values.size() != decomp.edges().size()) {
    std::ostringstream msg;
    msg << "flow has " << phi.values.size() << " edge values, the chain has " << decomp.edges().size() << " edges";
    fail(ErrorKind::SupportMismatch, msg.str());
  }
}

// f = value on S, up to a tolerance relative to max |f|.
bool equals_on(const StateSet& S, std::span<const double> f, double value) {
  double scale = std::abs(value);
  for (auto v : f) {
    scale = std::max(scale, std::abs(v));
  }
  const double tol = 1e-12 * std::max(1.0, scale);
  return std::all_of(S.begin(), S.end(), [&](std::size_t x) { return std::abs(f[x] - value) <= tol; });
}

Certificate certificate(CertificateKind kind, const EdgeDecomposition& decomp, const StateSet& A, const StateSet& B,
                        std::span<const double> f, const EdgeFlow& phi, double tol) {
  validate_pair(decomp.size(), A, B);
  require(f.size() == decomp.size(), ErrorKind::InvalidArgument, "function size does not match the chain");
  check_flow(decomp, phi);
  Certificate cert;
  cert.kind = kind;
  const bool dirichlet = kind == CertificateKind::DirichletUpper;
  cert.boundary_ok = equals_on(A, f, dirichlet ? 1.0 : 0.0) && equals_on(B, f, 0.0);
  cert.feasibility = flow_feasibility(decomp, phi, A, B, dirichlet ? 0.0 : 1.0, tol);
  if (!cert.boundary_ok) {
    fail(ErrorKind::InfeasibleInputs, dirichlet ? "function is not 1 on A and 0 on B" : "function is not 0 on A and B");
  }
  if (!cert.feasibility.feasible) {
    std::ostringstream msg;
    msg << "flow is not in F_" << cert.feasibility.gamma << ": divergence residual " << cert.feasibility.div_residual
        << ", flux " << cert.feasibility.flux;
    fail(ErrorKind::InfeasibleInputs, msg.str());
  }
  const EdgeFlow diff = phi_flow(decomp, f) - phi;
  cert.value = flow_inner(decomp, diff, diff);
  return cert;
}

}  // namespace

double EdgeFlow::along(const EdgeDecomposition& decomp, std::size_t x, std::size_t y) const {
  auto e = decomp.find_edge(x, y);
  if (!e) {
    return 0.0;
  }
  return decomp.edges()[*e].x == x ? values[*e] : -values[*e];
}

EdgeFlow zero_flow(const EdgeDecomposition& decomp) { return {std::vector<double>(decomp.edges().size(), 0.0)}; }

EdgeFlow operator+(const EdgeFlow& a, const EdgeFlow& b) {
  require(a.values.size() == b.values.size(), ErrorKind::SupportMismatch, "flows on different edge sets");
  EdgeFlow out{a.values};
  for (std::size_t e = 0; e < out.values.size(); ++e) {
    out.values[e] += b.values[e];
  }
  return out;
}

EdgeFlow operator-(const EdgeFlow& a, const EdgeFlow& b) { return a + (-1.0) * b; }

EdgeFlow operator*(double c, const EdgeFlow& a) {
  EdgeFlow out{a.values};
  for (auto& v : out.values) {
    v *= c;
  }
  return out;
}

EdgeFlow psi_flow(const EdgeDecomposition& decomp, std::span<const double> f) {
  require(f.size() == decomp.size(), ErrorKind::InvalidArgument, "function size does not match the chain");
  EdgeFlow out;
  out.values.reserve(decomp.edges().size());
  for (const auto& e : decomp.edges()) {
    out.values.push_back(e.s * (f[e.y] - f[e.x]));
  }
  return out;
}

EdgeFlow phi_flow(const EdgeDecomposition& decomp, std::span<const double> f) {
  require(f.size() == decomp.size(), ErrorKind::InvalidArgument, "function size does not match the chain");
  EdgeFlow out;
  out.values.reserve(decomp.edges().size());
  for (const auto& e : decomp.edges()) {
    out.values.push_back(e.s * (f[e.y] - f[e.x]) - e.j * (f[e.x] + f[e.y]));
  }
  return out;
}

FlowPair make_flows(const EdgeDecomposition& decomp, std::span<const double> f) {
  return {psi_flow(decomp, f), phi_flow(decomp, f)};
}

Function flow_divergence(const EdgeDecomposition& decomp, const EdgeFlow& phi) {
  check_flow(decomp, phi);
  Function div(decomp.size(), 0.0);
  const auto& edges = decomp.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    div[edges[e].x] += phi.values[e];
    div[edges[e].y] -= phi.values[e];
  }
  return div;
}

double flow_inner(const EdgeDecomposition& decomp, const EdgeFlow& phi, const EdgeFlow& psi) {
  check_flow(decomp, phi);
  check_flow(decomp, psi);
  const auto& edges = decomp.edges();
  double sum = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].s > 0.0) {
      sum += phi.values[e] * psi.values[e] / edges[e].s;
    } else if (phi.values[e] != 0.0 || psi.values[e] != 0.0) {
      std::ostringstream msg;
      msg << "flow carries mass on the zero-conductance edge (" << edges[e].x << ", " << edges[e].y << ")";
      fail(ErrorKind::SupportMismatch, msg.str());
    }
  }
  return sum;
}

FlowFeasibility flow_feasibility(const EdgeDecomposition& decomp, const EdgeFlow& phi, const StateSet& A,
                                 const StateSet& B, double gamma, double tol) {
  check_flow(decomp, phi);
  const Function div = flow_divergence(decomp, phi);
  Function mass(decomp.size(), 0.0);
  const auto& edges = decomp.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    mass[edges[e].x] += std::abs(phi.values[e]);
    mass[edges[e].y] += std::abs(phi.values[e]);
  }
  const double scale = 1.0 + *std::max_element(mass.begin(), mass.end());

  FlowFeasibility out;
  out.gamma = gamma;
  for (std::size_t x = 0; x < decomp.size(); ++x) {
    if (A.contains(x)) {
      out.flux += div[x];
    } else if (!B.contains(x)) {
      out.div_residual = std::max(out.div_residual, std::abs(div[x]));
    }
  }
  out.feasible = out.div_residual <= tol * scale && std::abs(out.flux - gamma) <= tol * std::max(scale, std::abs(gamma));
  return out;
}

Lemma23Result lemma23_check(const EdgeDecomposition& decomp, const StateSet& A, const StateSet& B,
                            std::span<const double> f, double alpha, double gamma, const EdgeFlow& phi,
                            std::span<const double> h) {
  validate_pair(decomp.size(), A, B);
  require(f.size() == decomp.size() && h.size() == decomp.size(), ErrorKind::InvalidArgument,
          "function size does not match the chain");
  if (!equals_on(A, f, alpha) || !equals_on(B, f, 0.0)) {
    fail(ErrorKind::InfeasibleInputs, "function is not alpha on A and 0 on B");
  }
  const FlowFeasibility feas = flow_feasibility(decomp, phi, A, B, gamma);
  if (!feas.feasible) {
    std::ostringstream msg;
    msg << "flow is not in F_" << gamma << ": divergence residual " << feas.div_residual << ", flux " << feas.flux;
    fail(ErrorKind::InfeasibleInputs, msg.str());
  }
  Lemma23Result out;
  out.lhs = flow_inner(decomp, phi_flow(decomp, f) - phi, psi_flow(decomp, h));
  out.rhs = gamma + alpha * dirichlet_form(decomp, h);
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

std::string_view to_string(CertificateKind kind) noexcept {
  return kind == CertificateKind::DirichletUpper ? "dirichlet-upper" : "thomson-reciprocal";
}

Certificate dirichlet_certificate(const EdgeDecomposition& decomp, const StateSet& A, const StateSet& B,
                                  std::span<const double> f, const EdgeFlow& phi, double tol) {
  return certificate(CertificateKind::DirichletUpper, decomp, A, B, f, phi, tol);
}

Certificate thomson_certificate(const EdgeDecomposition& decomp, const StateSet& A, const StateSet& B,
                                std::span<const double> f, const EdgeFlow& phi, double tol) {
  return certificate(CertificateKind::ThomsonReciprocal, decomp, A, B, f, phi, tol);
}

OptimalPairs optimal_pairs(const RateChain& chain, const EdgeDecomposition& decomp, const StateSet& A,
                           const StateSet& B) {
  const Potentials pot = equilibrium_potentials(chain, decomp, A, B);
  const auto n = chain.size();
  OptimalPairs out;
  out.cap = dirichlet_form(decomp, pot.h);

  out.dirichlet_f.resize(n);
  out.thomson_f.resize(n);
  Function h_scaled(n);
  for (std::size_t x = 0; x < n; ++x) {
    out.dirichlet_f[x] = 0.5 * (pot.h[x] + pot.h_star[x]);
    out.thomson_f[x] = (pot.h[x] - pot.h_star[x]) / (2.0 * out.cap);
    h_scaled[x] = pot.h[x] / out.cap;
  }
  // h = h* = 1 on A and 0 on B; pin the boundary values exactly.
  for (auto x : A) {
    out.dirichlet_f[x] = 1.0;
    out.thomson_f[x] = 0.0;
  }
  for (auto x : B) {
    out.dirichlet_f[x] = 0.0;
    out.thomson_f[x] = 0.0;
  }
  out.dirichlet_phi = phi_flow(decomp, out.dirichlet_f) - psi_flow(decomp, pot.h);
  out.thomson_phi = phi_flow(decomp, out.thomson_f) - psi_flow(decomp, h_scaled);
  return out;
}

EdgeFlow project_to_feasible(const EdgeDecomposition& decomp, const StateSet& A, const StateSet& B, double gamma,
                             const EdgeFlow& raw) {
  validate_pair(decomp.size(), A, B);
  check_flow(decomp, raw);
  const auto n = decomp.size();
  const auto& mu = decomp.mu();
  const RateChain sym = symmetrized_chain(decomp);
  const StateSet boundary = A.united(B);

  // div(s grad p)(x) = mu(x) (L^s p)(x); choose p with L^s p = div(raw)/mu off A u B.
  const Function div = flow_divergence(decomp, raw);
  Function source(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    source[x] = -div[x] / mu[x];
  }
  const Function zero(n, 0.0);
  const Function p = solve_poisson(sym, boundary, zero, source);
  EdgeFlow flow = raw - psi_flow(decomp, p);

  const Function h_s = equilibrium_potential(sym, A, B);
  const double cap_s = dirichlet_form(decomp, h_s);
  const EdgeFlow unit = (-1.0 / cap_s) * psi_flow(decomp, h_s);  // flux_A = 1, divergence-free off A u B
  const double current_flux = flow_feasibility(decomp, flow, A, B, gamma).flux;
  return flow + (gamma - current_flux) * unit;
}

}  // namespace capflow
