#pragma once

// Fixed-step gradient descent and extragradient for VIs, plus the closed-form
// contraction coefficients of their step maps.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "vilab/domains.hpp"
#include "vilab/problems.hpp"

namespace vilab {

enum class Method { gd, eg };

std::string to_string(Method method);
Method parse_method(const std::string& name);

struct SolverConfig {
  Method method = Method::gd;
  double eta = 0.1;
  std::size_t T = 1000;
  bool projected = false;
  bool record_trajectory = false;

  /// True iff eta lies in the GD stability range (0, 2μ/L²).
  [[nodiscard]] bool in_gd_stable_range(double mu, double L) const;
};

struct Trajectory {
  std::vector<Vector> iterates;  // empty unless recorded; otherwise T+1 points
  Vector final;
  std::size_t steps_taken = 0;
};

/// z − ηF(z), projected onto `domain` when given.
Vector gd_step(const OperatorFn& F, const Vector& z, double eta, const Domain* domain = nullptr);

/// z − ηF(z − ηF(z)); with a domain, both the half and full steps are projected.
Vector eg_step(const OperatorFn& F, const Vector& z, double eta, const Domain* domain = nullptr);

Vector step(Method method, const OperatorFn& F, const Vector& z, double eta,
            const Domain* domain = nullptr);

/// Applies the configured step T times from z0. Throws NumericalError when an
/// iterate's norm exceeds 10⁶·(1 + ‖z0‖) or turns non-finite.
Trajectory run(const OperatorFn& F, const Domain& domain, const SolverConfig& config,
               const Vector& z0);

/// √max(0, 1 − 2ημ + η²L²).
double gd_contraction_bound(double mu, double L, double eta);

/// c_EG(η) = 2 − 2ημ + η⁴L⁴ − (2ημ + 1)(1 − 2ηL + η²μ²).
double eg_contraction_coefficient(double mu, double L, double eta);

/// √max(0, c_EG(η)).
double eg_contraction_bound(double mu, double L, double eta);

double contraction_bound(Method method, double mu, double L, double eta);

/// ‖G(z) − G(z')‖ / ‖z − z'‖ for the unprojected step map G.
double contraction_ratio(const OperatorFn& F, const Vector& z, const Vector& z_prime, double eta,
                         Method method);

/// GD: the open interval (0, 2μ/L²). EG: grid points η = i·10⁻⁴/L in (0, 1/L]
/// with c_EG(η) < 1 (possibly none).
struct AdmissibleEta {
  Method method = Method::gd;
  double mu = 0.0;
  double L = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> grid;

  [[nodiscard]] bool empty() const;
  [[nodiscard]] bool contains(double eta) const;
};

AdmissibleEta admissible_eta(double mu, double L, Method method);

/// Closed-form EG stability expression as printed; its last denominator factor
/// equals −2ηL, so the value is reported for inspection only.
double eg_stability_expression(double K, std::size_t n, double mu, double L, double eta);

}  // namespace vilab
