#include "vilab/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "vilab/errors.hpp"

namespace vilab {
namespace {

void check_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw NumericalError(std::string(what) + ": non-finite operator value");
}

void check_constants(double mu, double L, double eta) {
  if (!(mu > 0.0) || !(mu <= L) || !(eta > 0.0)) {
    throw InvalidArgument("contraction bound: requires 0 < mu <= L and eta > 0");
  }
}

}  // namespace

std::string to_string(Method method) { return method == Method::gd ? "gd" : "eg"; }

Method parse_method(const std::string& name) {
  if (name == "gd") return Method::gd;
  if (name == "eg") return Method::eg;
  throw InvalidArgument("unknown method '" + name + "'");
}

bool SolverConfig::in_gd_stable_range(double mu, double L) const {
  return eta > 0.0 && eta < 2.0 * mu / (L * L);
}

Vector gd_step(const OperatorFn& F, const Vector& z, double eta, const Domain* domain) {
  if (eta < 0.0) throw InvalidArgument("gd_step: eta must be nonnegative");
  const Vector g = F(z);
  check_finite(g, "gd_step");
  Vector next = z - eta * g;
  return domain != nullptr ? project(*domain, next) : next;
}

Vector eg_step(const OperatorFn& F, const Vector& z, double eta, const Domain* domain) {
  if (eta < 0.0) throw InvalidArgument("eg_step: eta must be nonnegative");
  const Vector g = F(z);
  check_finite(g, "eg_step");
  Vector half = z - eta * g;
  if (domain != nullptr) half = project(*domain, half);
  const Vector g_half = F(half);
  check_finite(g_half, "eg_step");
  Vector next = z - eta * g_half;
  return domain != nullptr ? project(*domain, next) : next;
}

Vector step(Method method, const OperatorFn& F, const Vector& z, double eta, const Domain* domain) {
  return method == Method::gd ? gd_step(F, z, eta, domain) : eg_step(F, z, eta, domain);
}

Trajectory run(const OperatorFn& F, const Domain& domain, const SolverConfig& config,
               const Vector& z0) {
  if (!(config.eta > 0.0)) throw InvalidArgument("run: eta must be > 0");
  if (static_cast<std::size_t>(z0.size()) != domain.dim()) throw InvalidArgument("run: dimension mismatch");
  if (config.projected && !contains(domain, z0, kMembershipTol)) {
    throw InvalidArgument("run: z0 must be feasible for the projected solver");
  }
  const Domain* proj = config.projected ? &domain : nullptr;
  const double guard = 1e6 * (1.0 + z0.norm());

  Trajectory traj;
  if (config.record_trajectory) {
    traj.iterates.reserve(config.T + 1);
    traj.iterates.push_back(z0);
  }
  Vector z = z0;
  for (std::size_t t = 0; t < config.T; ++t) {
    z = step(config.method, F, z, config.eta, proj);
    const double norm = z.norm();
    if (!std::isfinite(norm) || norm > guard) {
      throw NumericalError("run: divergence at step " + std::to_string(t + 1) + " (|z| = " +
                           std::to_string(norm) + ")");
    }
    if (config.record_trajectory) traj.iterates.push_back(z);
  }
  traj.final = std::move(z);
  traj.steps_taken = config.T;
  return traj;
}

double gd_contraction_bound(double mu, double L, double eta) {
  check_constants(mu, L, eta);
  return std::sqrt(std::max(0.0, 1.0 - 2.0 * eta * mu + eta * eta * L * L));
}

double eg_contraction_coefficient(double mu, double L, double eta) {
  check_constants(mu, L, eta);
  const double em = eta * mu;
  const double el = eta * L;
  return 2.0 - 2.0 * em + std::pow(el, 4) - (2.0 * em + 1.0) * (1.0 - 2.0 * el + em * em);
}

double eg_contraction_bound(double mu, double L, double eta) {
  return std::sqrt(std::max(0.0, eg_contraction_coefficient(mu, L, eta)));
}

double contraction_bound(Method method, double mu, double L, double eta) {
  return method == Method::gd ? gd_contraction_bound(mu, L, eta) : eg_contraction_bound(mu, L, eta);
}

double contraction_ratio(const OperatorFn& F, const Vector& z, const Vector& z_prime, double eta,
                         Method method) {
  const double dist = (z - z_prime).norm();
  if (dist == 0.0) throw InvalidArgument("contraction_ratio: z and z' must differ");
  return (step(method, F, z, eta) - step(method, F, z_prime, eta)).norm() / dist;
}

bool AdmissibleEta::empty() const {
  return method == Method::gd ? !(upper > lower) : grid.empty();
}

bool AdmissibleEta::contains(double eta) const {
  if (method == Method::gd) return eta > lower && eta < upper;
  return eta > 0.0 && eta <= 1.0 / L && eg_contraction_coefficient(mu, L, eta) < 1.0;
}

AdmissibleEta admissible_eta(double mu, double L, Method method) {
  if (!(mu > 0.0) || !(mu <= L)) throw InvalidArgument("admissible_eta: requires 0 < mu <= L");
  AdmissibleEta out;
  out.method = method;
  out.mu = mu;
  out.L = L;
  if (method == Method::gd) {
    out.lower = 0.0;
    out.upper = 2.0 * mu / (L * L);
    return out;
  }
  const double h = 1e-4 / L;
  const int steps = 10000;
  for (int i = 1; i <= steps; ++i) {
    const double eta = h * i;
    if (eg_contraction_coefficient(mu, L, eta) < 1.0) out.grid.push_back(eta);
  }
  if (!out.grid.empty()) {
    out.lower = out.grid.front();
    out.upper = out.grid.back();
  }
  return out;
}

double eg_stability_expression(double K, std::size_t n, double mu, double L, double eta) {
  const double first = 1.0 + eta - eta * L * L * (1.0 - eta) * (1.0 - 2.0 * eta * mu + eta * eta * L * L);
  const double second = 1.0 - eta * L - (1.0 + eta * L);
  return 2.0 * K / (static_cast<double>(n) * first * second);
}

}  // namespace vilab
