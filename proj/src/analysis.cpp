#include "vilab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vilab/errors.hpp"
#include "vilab/parallel.hpp"
#include "vilab/rng.hpp"

namespace vilab {
namespace {

constexpr std::uint64_t kTagDataset = 0xda7a;
constexpr std::uint64_t kTagIndex = 0x1d;
constexpr std::uint64_t kTagReplacement = 0x2e;

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

// Linear part of the unprojected step map for an affine operator with matrix M.
Matrix step_matrix(Method method, const Matrix& M, double eta) {
  const auto d = M.rows();
  const Matrix I = Matrix::Identity(d, d);
  if (method == Method::gd) return I - eta * M;
  return I - eta * M + eta * eta * M * M;
}

double operator_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

double gd_stability_bound(double K, std::size_t n, double mu, double L, double eta) {
  if (n == 0) throw InvalidArgument("gd_stability_bound: n must be positive");
  if (!(mu > 0.0) || !(L > 0.0)) throw InvalidArgument("gd_stability_bound: mu and L must be positive");
  if (!(eta > 0.0) || !(eta < 2.0 * mu / (L * L))) {
    throw InvalidArgument("eta exceeds 2*mu/L^2 (gd stability range is 0 < eta < 2*mu/L^2)");
  }
  return 2.0 * K / (static_cast<double>(n) * (2.0 * mu - eta * L * L));
}

double gd_stability_limit(double K, std::size_t n, double mu) {
  if (n == 0 || !(mu > 0.0)) throw InvalidArgument("gd_stability_limit: requires n > 0 and mu > 0");
  return K / (static_cast<double>(n) * mu);
}

LogLogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2) throw InvalidArgument("fit_loglog_slope: needs at least 2 pairs");
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [n, v] : pairs) {
    if (!(n > 0.0) || !(v > 0.0)) throw InvalidArgument("fit_loglog_slope: nonpositive value");
    xs.push_back(std::log(n));
    ys.push_back(std::log(v));
  }
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("fit_loglog_slope: all n values are equal");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

StabilityResult stability_experiment(const Problem& problem, const SolverConfig& config,
                                     std::size_t n, std::size_t trials, std::uint64_t seed,
                                     std::size_t workers) {
  const ProblemConstants& c = problem.constants;
  StabilityResult result;
  result.n = n;
  result.eta = config.eta;
  result.T = config.T;
  result.method = config.method;
  if (config.method == Method::gd) {
    result.theoretical_bound = gd_stability_bound(c.K, n, c.mu, c.L, config.eta);
  } else {
    result.theoretical_bound = eg_stability_expression(c.K, n, c.mu, c.L, config.eta);
    result.bound_informational = true;
  }
  result.divergences.assign(trials, 0.0);
  result.replaced_index.assign(trials, 0);
  const Vector z0 = problem.domain.center();
  parallel_for(trials, workers, [&](std::size_t t) {
    const SampledDataset X = sample_dataset(problem, n, derive_seed({seed, n, t, kTagDataset}));
    Rng rng = make_rng({seed, n, t, kTagIndex});
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const std::size_t j = pick(rng);
    const SampledDataset Xp = replace_record(problem, X, j, derive_seed({seed, n, t, kTagReplacement}));
    SolverConfig cfg = config;
    cfg.record_trajectory = false;
    const Vector zT = run(empirical_operator(problem.op, X).as_function(), problem.domain, cfg, z0).final;
    const Vector zTp = run(empirical_operator(problem.op, Xp).as_function(), problem.domain, cfg, z0).final;
    result.divergences[t] = (zT - zTp).norm();
    result.replaced_index[t] = j;
  });
  if (!result.divergences.empty()) {
    result.max_divergence = *std::max_element(result.divergences.begin(), result.divergences.end());
    result.mean_divergence = mean_of(result.divergences);
  }
  return result;
}

TrainingResult train_to_empirical_optimality(const Problem& problem, const SampledDataset& X,
                                             const SolverConfig& config, double target) {
  const QuadraticOperator emp = empirical_operator(problem.op, X);
  const double mu_hat = min_sym_eigenvalue(emp.M);
  const double L_hat = operator_norm(emp.M);
  if (!(mu_hat > 0.0)) throw NumericalError("training: empirical operator is not strongly monotone");
  if (config.method == Method::gd && !config.in_gd_stable_range(mu_hat, L_hat)) {
    throw InvalidArgument("eta exceeds 2*mu/L^2 for the empirical operator");
  }
  const double rho = contraction_bound(config.method, mu_hat, L_hat, config.eta);
  if (!(rho < 1.0)) {
    throw InvalidArgument("training: step map is not contractive at eta = " + std::to_string(config.eta));
  }
  const OperatorFn F = emp.as_function();
  const double D = diameter(problem.domain, Norm::l2);
  // gap(z) ≤ ‖F̂(z)‖·D ≤ L̂·‖z − ẑ‖·D, and ‖z0 − ẑ‖ ≲ 2D.
  const double dist_target = 0.01 * target / (L_hat * std::max(D, 1e-12));
  const double horizon = std::ceil(std::log(dist_target / (2.0 * std::max(D, 1e-12))) / std::log(rho));
  const auto chunk = static_cast<std::size_t>(std::clamp(horizon, 1.0, 1e7));

  SolverConfig cfg = config;
  cfg.record_trajectory = false;
  cfg.T = chunk;
  TrainingResult out;
  out.z = problem.domain.center();
  for (int round = 0; round < 10; ++round) {
    out.z = run(F, problem.domain, cfg, out.z).final;
    out.steps += cfg.T;
    if (!contains(problem.domain, out.z, kGapFeasibilityTol)) {
      throw NumericalError("training: empirical solution left the domain (enable projection)");
    }
    out.empirical_gap = gap(F, problem.domain, out.z);
    if (out.empirical_gap <= target) return out;
  }
  throw NumericalError("empirical training failed to reach tolerance (empirical gap " +
                       std::to_string(out.empirical_gap) + ")");
}

SweepResult generalization_sweep(const Problem& problem, const SolverConfig& config,
                                 const std::vector<std::size_t>& n_grid, std::size_t trials,
                                 GapKind kind, double delta, std::uint64_t seed, std::size_t workers,
                                 SweepStatistic statistic) {
  if (n_grid.empty()) throw InvalidArgument("sweep: n_grid must be nonempty");
  if (trials < 10) throw InvalidArgument("sweep: needs at least 10 trials per n");
  if (!std::is_sorted(n_grid.begin(), n_grid.end()) ||
      std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end()) {
    throw InvalidArgument("sweep: n_grid must be strictly increasing");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("sweep: delta must lie in (0, 1)");
  if (kind != GapKind::gap && !problem.game) {
    throw InvalidArgument("sweep: kind " + to_string(kind) + " requires a game problem");
  }
  SweepResult result;
  result.n_grid = n_grid;
  result.kind = kind;
  result.statistic = statistic;
  result.delta = delta;
  result.seed = seed;

  const std::size_t total = n_grid.size() * trials;
  std::vector<SweepTrial> all(total);
  const OperatorFn truth = problem.op.as_function();
  parallel_for(total, workers, [&](std::size_t idx) {
    const std::size_t n = n_grid[idx / trials];
    const std::size_t t = idx % trials;
    const SampledDataset X = sample_dataset(problem, n, derive_seed({seed, n, t, kTagDataset}));
    const TrainingResult trained = train_to_empirical_optimality(problem, X, config);
    SweepTrial trial;
    trial.empirical_gap = trained.empirical_gap;
    trial.steps = trained.steps;
    trial.gap = gap(truth, problem.domain, trained.z);
    if (problem.game) {
      trial.weak_gap = weak_gap(truth, *problem.game, trained.z);
      trial.potential_gap = potential_gap(*problem.game, trained.z);
    }
    switch (kind) {
      case GapKind::gap: trial.value = trial.gap; break;
      case GapKind::weak_gap: trial.value = trial.weak_gap; break;
      case GapKind::potential_gap: trial.value = trial.potential_gap; break;
    }
    all[idx] = trial;
  });

  std::vector<std::pair<double, double>> fit_points;
  bool positive = true;
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    SweepPoint p;
    p.n = n_grid[k];
    p.trials = trials;
    p.per_trial.assign(all.begin() + static_cast<std::ptrdiff_t>(k * trials),
                       all.begin() + static_cast<std::ptrdiff_t>((k + 1) * trials));
    std::vector<double> values;
    for (const auto& tr : p.per_trial) {
      values.push_back(tr.value);
      if (problem.game && (tr.potential_gap > tr.weak_gap + 1e-9 || tr.weak_gap > tr.gap + 1e-9)) {
        ++result.sandwich_violations;
      }
    }
    p.mean = mean_of(values);
    p.std = std_of(values);
    p.q50 = quantile(values, 0.5);
    p.q90 = quantile(values, 0.9);
    p.q_delta = quantile(values, 1.0 - delta);
    const double stat = statistic == SweepStatistic::mean ? p.mean : p.q_delta;
    positive = positive && stat > 0.0;
    fit_points.emplace_back(static_cast<double>(p.n), stat);
    result.per_n.push_back(std::move(p));
  }
  if (positive && fit_points.size() >= 2) {
    const LogLogFit fit = fit_loglog_slope(fit_points);
    result.fit_valid = true;
    result.slope = fit.slope;
    result.intercept = fit.intercept;
    result.r_squared = fit.r_squared;
  }
  return result;
}

SweepResult hp_quantile_sweep(const Problem& problem, const SolverConfig& config,
                              const std::vector<std::size_t>& n_grid, std::size_t trials,
                              double delta, std::uint64_t seed, std::size_t workers) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("hp sweep: delta must lie in (0, 1)");
  const auto needed = static_cast<std::size_t>(std::ceil(10.0 / delta - 1e-9));
  if (trials < needed) {
    throw InvalidArgument("hp sweep: insufficient trials for delta " + std::to_string(delta) + " (need " +
                          std::to_string(needed) + ", got " + std::to_string(trials) + ")");
  }
  return generalization_sweep(problem, config, n_grid, trials, GapKind::weak_gap, delta, seed, workers,
                              SweepStatistic::quantile);
}

double covering_bound(const ProblemConstants& c, double gamma, const Domain& domain,
                      const std::vector<double>& r_grid, Norm norm) {
  if (!(gamma >= 0.0)) throw InvalidArgument("covering_bound: gamma must be >= 0");
  if (r_grid.empty()) throw InvalidArgument("covering_bound: r_grid must be nonempty");
  double best = std::numeric_limits<double>::infinity();
  for (double r : r_grid) {
    const double value = c.K * r + (c.L * c.D + c.K) * gamma * log_covering_number_upper(domain, r, norm);
    best = std::min(best, value);
  }
  return best;
}

double simplex_bound(const ProblemConstants& c, double gamma, double d) {
  if (!(gamma >= 0.0)) throw InvalidArgument("simplex_bound: gamma must be >= 0");
  if (!(d >= 2.0)) throw InvalidArgument("simplex_bound: d must be >= 2");
  return (c.L + c.K) * gamma * std::log(d);
}

double game_bound(const ProblemConstants& c, double gamma) {
  if (!(gamma >= 0.0)) throw InvalidArgument("game_bound: gamma must be >= 0");
  return gamma * (2.0 * c.D * c.L + c.K * c.condition_sum());
}

double bernstein_constant(const ProblemConstants& c) {
  const double base = c.L * c.D + c.K * (1.0 + c.condition_sum());
  return base * base;
}

BoundSet evaluate_bounds(const Problem& problem, double gamma, const std::vector<double>& r_grid) {
  BoundSet b;
  b.gamma = gamma;
  const ProblemConstants& c = problem.constants;
  if (!r_grid.empty()) b.covering_bound = covering_bound(c, gamma, problem.domain, r_grid);
  if (const auto* s = std::get_if<Simplex>(&problem.domain.variant()); s != nullptr && s->d >= 2) {
    b.simplex_bound = simplex_bound(c, gamma, static_cast<double>(s->d));
  }
  if (problem.game) {
    b.game_bound = game_bound(c, gamma);
    b.bernstein_B = bernstein_constant(c);
  }
  return b;
}

bool BernsteinReport::all_satisfied() const {
  return std::all_of(rows.begin(), rows.end(), [](const BernsteinRow& r) { return r.satisfied; });
}

BernsteinReport bernstein_check(const Problem& problem, const std::vector<Vector>& z_samples,
                                std::size_t mc_samples, std::uint64_t seed) {
  if (!problem.game) throw InvalidArgument("bernstein_check: requires a game problem");
  if (mc_samples < 2) throw InvalidArgument("bernstein_check: needs at least 2 Monte Carlo samples");
  const QuadraticGame& game = *problem.game;
  BernsteinReport report;
  report.B = bernstein_constant(problem.constants);

  // Common random numbers: every z sees the same record draws.
  std::vector<QuadraticOperator> ops;
  ops.reserve(mc_samples);
  for (std::size_t s = 0; s < mc_samples; ++s) {
    ops.push_back(sample_operator(
        problem.op, sample_record(problem.op, problem.constants, problem.noise, derive_seed({seed, s}))));
  }
  const Vector& z_star = problem.solution;
  const Vector dir_star = z_star - best_response(game, z_star);

  const double m = static_cast<double>(mc_samples);
  for (std::size_t i = 0; i < z_samples.size(); ++i) {
    const Vector& z = z_samples[i];
    const Vector dir = z - best_response(game, z);
    double sum_h = 0.0;
    double sum_h2 = 0.0;
    std::vector<double> diffs(mc_samples);
    for (std::size_t s = 0; s < mc_samples; ++s) {
      const double h = ops[s].evaluate(z).dot(dir) - ops[s].evaluate(z_star).dot(dir_star);
      sum_h += h;
      sum_h2 += h * h;
      diffs[s] = h * h - 1.05 * report.B * h;
    }
    BernsteinRow row;
    row.sample_index = i;
    row.lhs = sum_h2 / m;
    row.rhs = report.B * sum_h / m;
    row.standard_error = std_of(diffs) / std::sqrt(m);
    row.satisfied = row.lhs <= 1.05 * row.rhs + 3.0 * row.standard_error;
    report.rows.push_back(row);
  }
  return report;
}

std::vector<double> default_eta_grid(double mu, double L, Method method) {
  std::vector<double> grid;
  if (method == Method::gd) {
    const double upper = 2.0 * mu / (L * L);
    for (double f : {0.1, 0.3, 0.5, 0.7, 0.9}) grid.push_back(f * upper);
    return grid;
  }
  const AdmissibleEta adm = admissible_eta(mu, L, Method::eg);
  if (adm.grid.empty()) return grid;
  for (int k = 0; k < 5; ++k) {
    const std::size_t idx = (adm.grid.size() - 1) * static_cast<std::size_t>(k) / 4;
    if (grid.empty() || grid.back() != adm.grid[idx]) grid.push_back(adm.grid[idx]);
  }
  return grid;
}

std::vector<ContractionRow> contraction_experiment(const Problem& problem, Method method,
                                                   const std::vector<double>& eta_grid,
                                                   std::size_t pairs, std::uint64_t seed) {
  const ProblemConstants& c = problem.constants;
  const OperatorFn F = problem.op.as_function();
  std::vector<std::pair<Vector, Vector>> samples;
  samples.reserve(pairs);
  for (std::size_t p = 0; p < pairs; ++p) {
    Vector z = sample_uniform(problem.domain, derive_seed({seed, p, 1}));
    Vector zp = sample_uniform(problem.domain, derive_seed({seed, p, 2}));
    if ((z - zp).norm() == 0.0) continue;
    samples.emplace_back(std::move(z), std::move(zp));
  }
  const AdmissibleEta adm = admissible_eta(c.mu, c.L, method);
  const bool lemma_applies = method == Method::gd || c.mu > 0.5 * c.L;
  std::vector<ContractionRow> rows;
  for (double eta : eta_grid) {
    ContractionRow row;
    row.eta = eta;
    row.method = method;
    row.pairs = samples.size();
    row.theoretical_bound = contraction_bound(method, c.mu, c.L, eta);
    row.admissible = lemma_applies && adm.contains(eta);
    for (const auto& [z, zp] : samples) {
      row.measured_max_ratio = std::max(row.measured_max_ratio, contraction_ratio(F, z, zp, eta, method));
    }
    rows.push_back(row);
  }
  return rows;
}

GrowthCheck growth_recursion_check(const Problem& problem, const SampledDataset& X,
                                   const SampledDataset& X_prime, std::size_t j,
                                   const SolverConfig& config) {
  const std::size_t n = X.size();
  if (X_prime.size() != n || j >= n) throw InvalidArgument("growth_recursion_check: mismatched datasets");
  const QuadraticOperator emp = empirical_operator(problem.op, X);
  const QuadraticOperator emp_p = empirical_operator(problem.op, X_prime);
  const double inv_n = 1.0 / static_cast<double>(n);
  // Common operator: shared records plus the true operator in slot j.
  const QuadraticOperator own = sample_operator(problem.op, X.records[j]);
  QuadraticOperator common = emp;
  common.M += inv_n * (problem.op.M - own.M);
  common.b += inv_n * (problem.op.b - own.b);
  const double xi = operator_norm(step_matrix(config.method, common.M, config.eta));

  const OperatorFn F = emp.as_function();
  const OperatorFn Fp = emp_p.as_function();
  const OperatorFn H = common.as_function();
  Vector z = problem.domain.center();
  Vector zp = z;
  GrowthCheck check;
  for (std::size_t t = 0; t < config.T; ++t) {
    const Vector next = step(config.method, F, z, config.eta);
    const Vector next_p = step(config.method, Fp, zp, config.eta);
    const double remainder = (next - step(config.method, H, z, config.eta)).norm();
    const double remainder_p = (next_p - step(config.method, H, zp, config.eta)).norm();
    const double lhs = (next - next_p).norm();
    const double rhs = xi * (z - zp).norm() + remainder + remainder_p;
    const double excess = lhs - rhs;
    if (excess > 1e-12 * std::max(1.0, rhs)) ++check.violations;
    check.worst_excess = std::max(check.worst_excess, excess);
    z = next;
    zp = next_p;
    ++check.steps;
  }
  return check;
}

}  // namespace vilab
