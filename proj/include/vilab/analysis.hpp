#pragma once

// Experiments that confront the stability, contraction and generalization
// results with measurements, and the order-level bound evaluators.
//
// Bound evaluators set every hidden O(·) constant to 1; their outputs are
// order-level reference values, not certified bounds. The stability,
// contraction and Bernstein constants carry explicit constants and are
// checked as stated.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vilab/gaps.hpp"
#include "vilab/problems.hpp"
#include "vilab/solvers.hpp"

namespace vilab {

/// 2K / (n(2μ − ηL²)); requires 0 < η < 2μ/L².
double gd_stability_bound(double K, std::size_t n, double mu, double L, double eta);

/// The η → 0 limit K/(nμ).
double gd_stability_limit(double K, std::size_t n, double mu);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares on (log n, log value). Needs ≥ 2 pairs and positive values.
LogLogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& pairs);

/// Type-7 (linear interpolation) sample quantile.
double quantile(std::vector<double> values, double q);

struct StabilityResult {
  std::vector<double> divergences;
  std::vector<std::size_t> replaced_index;
  double max_divergence = 0.0;
  double mean_divergence = 0.0;
  double theoretical_bound = 0.0;
  bool bound_informational = false;
  std::size_t n = 0;
  double eta = 0.0;
  std::size_t T = 0;
  Method method = Method::gd;
};

/// Runs the solver on neighboring datasets X, X' (one record replaced) from the
/// domain center and measures ‖z_T − z_T'‖ per trial. Trial t uses seeds
/// derived from (seed, n, t).
StabilityResult stability_experiment(const Problem& problem, const SolverConfig& config,
                                     std::size_t n, std::size_t trials, std::uint64_t seed,
                                     std::size_t workers = 1);

struct TrainingResult {
  Vector z;
  double empirical_gap = 0.0;
  std::size_t steps = 0;
};

inline constexpr double kEmpiricalGapTarget = 1e-8;

/// Runs the configured method on F̂_X until the empirical gap is at most
/// `target`. The horizon is estimated from the contraction factor of F̂_X and
/// extended in chunks if the check fails.
TrainingResult train_to_empirical_optimality(const Problem& problem, const SampledDataset& X,
                                             const SolverConfig& config,
                                             double target = kEmpiricalGapTarget);

struct SweepTrial {
  double value = 0.0;
  double gap = 0.0;
  double weak_gap = 0.0;
  double potential_gap = 0.0;
  double empirical_gap = 0.0;
  std::size_t steps = 0;
};

struct SweepPoint {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
  double q_delta = 0.0;  // (1 − δ)-quantile
  std::size_t trials = 0;
  std::vector<SweepTrial> per_trial;
};

enum class SweepStatistic { mean, quantile };

struct SweepResult {
  std::vector<std::size_t> n_grid;
  std::vector<SweepPoint> per_n;
  GapKind kind = GapKind::gap;
  SweepStatistic statistic = SweepStatistic::mean;
  double delta = 0.1;
  bool fit_valid = false;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::uint64_t seed = 0;
  /// Trials where potential ≤ weak ≤ gap failed beyond 1e-9 (games only).
  std::size_t sandwich_violations = 0;
};

/// Per (n, trial): sample X, train to empirical optimality, evaluate the true
/// measure of `kind`. Fits the log-log slope of the per-n mean (or of the
/// (1 − δ)-quantile for SweepStatistic::quantile).
SweepResult generalization_sweep(const Problem& problem, const SolverConfig& config,
                                 const std::vector<std::size_t>& n_grid, std::size_t trials,
                                 GapKind kind, double delta, std::uint64_t seed,
                                 std::size_t workers = 1,
                                 SweepStatistic statistic = SweepStatistic::mean);

/// (1 − δ)-quantile sweep of the true weak gap. Requires trials ≥ ⌈10/δ⌉.
SweepResult hp_quantile_sweep(const Problem& problem, const SolverConfig& config,
                              const std::vector<std::size_t>& n_grid, std::size_t trials,
                              double delta, std::uint64_t seed, std::size_t workers = 1);

/// min_r K·r + (LD + K)·γ·log N(Z, r).
double covering_bound(const ProblemConstants& c, double gamma, const Domain& domain,
                      const std::vector<double>& r_grid, Norm norm = Norm::l2);

/// (L + K)·γ·log d. d only enters through the logarithm, so it may be real.
double simplex_bound(const ProblemConstants& c, double gamma, double d);

/// γ·(2DL + K·Σ L_i/μ_i).
double game_bound(const ProblemConstants& c, double gamma);

/// (LD + K(1 + Σ L_i/μ_i))².
double bernstein_constant(const ProblemConstants& c);

struct BoundSet {
  double gamma = 0.0;
  double covering_bound = 0.0;
  double simplex_bound = 0.0;
  double game_bound = 0.0;
  double bernstein_B = 0.0;
  std::string note = "order-level: hidden constants set to 1";
};

/// Evaluates every bound applicable to the problem at stability level gamma.
/// Inapplicable entries (simplex bound off the simplex, game bound without a
/// game) are left at zero.
BoundSet evaluate_bounds(const Problem& problem, double gamma, const std::vector<double>& r_grid);

struct BernsteinRow {
  std::size_t sample_index = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double standard_error = 0.0;
  bool satisfied = true;
};

struct BernsteinReport {
  double B = 0.0;
  std::vector<BernsteinRow> rows;
  [[nodiscard]] bool all_satisfied() const;
};

/// For each z: Monte Carlo over mc_samples records of h = g(z,ζ) − g(z*,ζ) with
/// g(z,ζ) = ⟨Ξ(z,ζ), z − w*(z)⟩. lhs = E[h²], rhs = B·E[h]; a row passes when
/// lhs ≤ 1.05·rhs + 3 standard errors of the mean of (h² − 1.05·B·h).
BernsteinReport bernstein_check(const Problem& problem, const std::vector<Vector>& z_samples,
                                std::size_t mc_samples, std::uint64_t seed);

struct ContractionRow {
  double eta = 0.0;
  Method method = Method::gd;
  double measured_max_ratio = 0.0;
  double theoretical_bound = 0.0;
  std::size_t pairs = 0;
  bool admissible = false;
};

/// Max step-map ratio over random domain pairs for each η of the grid.
std::vector<ContractionRow> contraction_experiment(const Problem& problem, Method method,
                                                   const std::vector<double>& eta_grid,
                                                   std::size_t pairs, std::uint64_t seed);

/// Five admissible step sizes for the method (empty for EG when μ ≤ L/2).
std::vector<double> default_eta_grid(double mu, double L, Method method);

struct GrowthCheck {
  std::size_t steps = 0;
  std::size_t violations = 0;
  double worst_excess = 0.0;
};

/// Unrolls GD/EG on F̂_X and F̂_X' where X' differs from X in record j, and
/// checks ‖z_{t+1} − z'_{t+1}‖ ≤ ξ‖z_t − z'_t‖ + ‖ηP̃(z_t)‖ + ‖ηP̃'(z'_t)‖ at every step.
/// Both updates share the common map built from the n−1 shared records and
/// the true operator; P̃, P̃' are the record-specific remainders and ξ is the
/// exact spectral norm of the common step map's linear part.
GrowthCheck growth_recursion_check(const Problem& problem, const SampledDataset& X,
                                   const SampledDataset& X_prime, std::size_t j,
                                   const SolverConfig& config);

}  // namespace vilab
