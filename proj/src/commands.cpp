#include "vilab/commands.hpp"

#include <chrono>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vilab/analysis.hpp"
#include "vilab/errors.hpp"
#include "vilab/parallel.hpp"
#include "vilab/report.hpp"
#include "vilab/rng.hpp"

namespace vilab {
namespace {

using nlohmann::json;
using Clock = std::chrono::system_clock;

constexpr double kBoundSlack = 1e-9;
constexpr std::uint64_t kTagSolve = 0x501e;
constexpr std::uint64_t kTagContraction = 0xc047;
constexpr std::uint64_t kTagBernsteinZ = 0xbe12;
constexpr std::uint64_t kTagBernsteinMc = 0xbe13;

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json to_json(const ProblemConstants& c) {
  json players = json::array();
  for (const auto& p : c.per_player) players.push_back({{"mu", p.mu}, {"L", p.L}});
  return {{"mu", c.mu}, {"L", c.L}, {"K", c.K}, {"D", c.D}, {"per_player", players}};
}

json to_json(const BoundSet& b) {
  return {{"gamma", b.gamma},
          {"covering_bound", b.covering_bound},
          {"simplex_bound", b.simplex_bound},
          {"game_bound", b.game_bound},
          {"bernstein_B", b.bernstein_B},
          {"note", b.note}};
}

json to_json(const GapReport& r) {
  return {{"kind", to_string(r.kind)},
          {"gap_true", r.gap_true},
          {"gap_empirical", r.gap_empirical},
          {"weak_gap_true", r.weak_gap_true},
          {"weak_gap_empirical", r.weak_gap_empirical},
          {"potential_gap", r.potential_gap},
          {"generalization_gap", r.generalization_gap}};
}

std::uint64_t base_seed(const ExperimentConfig& config, const RunOptions& options) {
  return options.seed.value_or(config.seed);
}

std::filesystem::path resolve(const RunOptions& options, const std::string& configured, const std::string& fallback) {
  const std::filesystem::path p = configured.empty() ? std::filesystem::path(fallback) : std::filesystem::path(configured);
  return p.is_absolute() ? p : options.out_dir / p;
}

std::string iso_now() {
  const std::time_t t = Clock::to_time_t(Clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

/// Writes CSV, JSON summary and the manifest. Timestamps live only in the manifest.
void emit(const std::string& command, const ExperimentConfig& config, const RunOptions& options,
          const Problem& problem, CommandOutcome& outcome, json results, json bounds,
          Clock::time_point started, const std::string& started_iso) {
  ExperimentConfig echo = config;
  echo.seed = base_seed(config, options);
  const double elapsed = std::chrono::duration<double>(Clock::now() - started).count();
  json manifest = {{"artifact", "vi-lab"},
                   {"version", kVersion},
                   {"command", command},
                   {"base_seed", echo.seed},
                   {"started_at", started_iso},
                   {"wall_clock_seconds", elapsed},
                   {"exit_code", outcome.exit_code},
                   {"message", outcome.message},
                   {"config", config_to_json(echo)}};
  // The summary's manifest copy omits the clock fields so the summary itself is reproducible.
  json stable_manifest = manifest;
  stable_manifest.erase("started_at");
  stable_manifest.erase("wall_clock_seconds");
  outcome.summary = {{"config", config_to_json(echo)},
                     {"constants", to_json(problem.constants)},
                     {"results", std::move(results)},
                     {"bounds", std::move(bounds)},
                     {"manifest", stable_manifest}};
  if (!outcome.csv.empty()) write_atomic(resolve(options, config.output.csv_path, command + ".csv"), outcome.csv);
  write_atomic(resolve(options, config.output.json_path, command + ".json"), outcome.summary.dump(2) + "\n");
  write_atomic(options.out_dir / (command + "_manifest.json"), manifest.dump(2) + "\n");
}

}  // namespace

CommandOutcome cmd_solve(const ExperimentConfig& config, const RunOptions& options) {
  const auto started = Clock::now();
  const std::string started_iso = iso_now();
  const Problem problem = build_problem(config.problem);
  const ProblemConstants& c = problem.constants;
  const SolverConfig solver = resolve_solver(config.solver, c);
  if (solver.method == Method::gd && !solver.in_gd_stable_range(c.mu, c.L)) {
    throw InvalidArgument("eta exceeds 2*mu/L^2 (eta = " + format_number(solver.eta) +
                          ", 2*mu/L^2 = " + format_number(2.0 * c.mu / (c.L * c.L)) + ")");
  }
  const std::uint64_t seed = base_seed(config, options);
  const SampledDataset X = sample_dataset(problem, config.experiment.n, derive_seed({seed, kTagSolve}));
  const QuadraticOperator emp = empirical_operator(problem.op, X);
  const Trajectory traj = run(emp.as_function(), problem.domain, solver, problem.domain.center());
  if (!contains(problem.domain, traj.final, kGapFeasibilityTol)) {
    throw NumericalError("final iterate lies outside the domain; enable solver.projected");
  }
  const GapReport report = gap_report(problem, X, traj.final, config.experiment.kind);

  json diagnostics = {{"steps_taken", traj.steps_taken},
                      {"eta", solver.eta},
                      {"method", to_string(solver.method)},
                      {"contraction_bound", contraction_bound(solver.method, c.mu, c.L, solver.eta)},
                      {"distance_to_solution", (traj.final - problem.solution).norm()},
                      {"empirical_operator_norm_at_final", emp.evaluate(traj.final).norm()}};
  json results = {{"n", config.experiment.n}, {"final", to_json(traj.final)}, {"solution", to_json(problem.solution)},
                  {"gaps", to_json(report)}, {"diagnostics", diagnostics}};
  if (solver.record_trajectory) {
    json iterates = json::array();
    for (const auto& z : traj.iterates) iterates.push_back(to_json(z));
    results["trajectory"] = iterates;
  }
  CommandOutcome outcome;
  emit("solve", config, options, problem, outcome, std::move(results), json::object(), started, started_iso);
  return outcome;
}

CommandOutcome cmd_contraction(const ExperimentConfig& config, const RunOptions& options) {
  const auto started = Clock::now();
  const std::string started_iso = iso_now();
  const Problem problem = build_problem(config.problem);
  const ProblemConstants& c = problem.constants;
  const Method method = config.solver.method;
  std::vector<double> grid = config.experiment.eta_grid;
  if (grid.empty()) grid = default_eta_grid(c.mu, c.L, method);
  const std::uint64_t seed = base_seed(config, options);
  const auto rows = contraction_experiment(problem, method, grid, config.experiment.pairs,
                                           derive_seed({seed, kTagContraction}));

  CommandOutcome outcome;
  CsvWriter csv({"eta", "method", "measured_max_ratio", "theoretical_bound", "pairs"});
  json jrows = json::array();
  for (const auto& r : rows) {
    csv.row(r.eta, to_string(r.method), r.measured_max_ratio, r.theoretical_bound, r.pairs);
    jrows.push_back({{"eta", r.eta},
                     {"measured_max_ratio", r.measured_max_ratio},
                     {"theoretical_bound", r.theoretical_bound},
                     {"admissible", r.admissible}});
    if (r.admissible && r.measured_max_ratio > r.theoretical_bound + kBoundSlack && outcome.exit_code == kExitOk) {
      outcome.exit_code = kExitBound;
      outcome.message = "contraction ratio " + format_number(r.measured_max_ratio) + " exceeds bound " +
                        format_number(r.theoretical_bound) + " at eta " + format_number(r.eta);
    }
  }
  outcome.csv = csv.str();
  const AdmissibleEta adm = admissible_eta(c.mu, c.L, method);
  json results = {{"method", to_string(method)},
                  {"rows", jrows},
                  {"lemma_applies", method == Method::gd || c.mu > 0.5 * c.L},
                  {"admissible_empty", adm.empty()},
                  {"admissible_lower", adm.lower},
                  {"admissible_upper", adm.upper}};
  emit("contraction", config, options, problem, outcome, std::move(results), json::object(), started, started_iso);
  return outcome;
}

CommandOutcome cmd_stability(const ExperimentConfig& config, const RunOptions& options) {
  const auto started = Clock::now();
  const std::string started_iso = iso_now();
  const Problem problem = build_problem(config.problem);
  const ProblemConstants& c = problem.constants;
  const SolverConfig solver = resolve_solver(config.solver, c);
  if (solver.method == Method::gd && !solver.in_gd_stable_range(c.mu, c.L)) {
    throw InvalidArgument("eta exceeds 2*mu/L^2 (eta = " + format_number(solver.eta) + ")");
  }
  const std::uint64_t seed = base_seed(config, options);

  CommandOutcome outcome;
  CsvWriter csv({"n", "trial", "divergence"});
  json per_n = json::array();
  for (std::size_t n : config.experiment.n_grid) {
    const StabilityResult r = stability_experiment(problem, solver, n, config.experiment.trials, seed, options.workers);
    for (std::size_t t = 0; t < r.divergences.size(); ++t) csv.row(n, t, r.divergences[t]);
    per_n.push_back({{"n", n},
                     {"max_divergence", r.max_divergence},
                     {"mean_divergence", r.mean_divergence},
                     {"theoretical_bound", r.theoretical_bound},
                     {"bound", r.bound_informational ? "informational" : "asserted"}});
    if (!r.bound_informational && r.max_divergence > r.theoretical_bound + kBoundSlack &&
        outcome.exit_code == kExitOk) {
      outcome.exit_code = kExitBound;
      outcome.message = "stability divergence " + format_number(r.max_divergence) + " exceeds 2K/(n(2mu - eta L^2)) = " +
                        format_number(r.theoretical_bound) + " at n = " + std::to_string(n);
    }
  }
  outcome.csv = csv.str();
  json results = {{"method", to_string(solver.method)}, {"eta", solver.eta}, {"T", solver.T},
                  {"trials", config.experiment.trials}, {"per_n", per_n}};
  emit("stability", config, options, problem, outcome, std::move(results), json::object(), started, started_iso);
  return outcome;
}

CommandOutcome cmd_sweep(const ExperimentConfig& config, const RunOptions& options) {
  const auto started = Clock::now();
  const std::string started_iso = iso_now();
  const Problem problem = build_problem(config.problem);
  const ProblemConstants& c = problem.constants;
  const SolverConfig solver = resolve_solver(config.solver, c);
  const std::uint64_t seed = base_seed(config, options);
  const auto& e = config.experiment;
  const SweepResult sweep = e.mode == "hp"
                                ? hp_quantile_sweep(problem, solver, e.n_grid, e.trials, e.delta, seed, options.workers)
                                : generalization_sweep(problem, solver, e.n_grid, e.trials, e.kind, e.delta, seed,
                                                       options.workers);

  CommandOutcome outcome;
  CsvWriter csv({"n", "trial", "value", "kind"});
  json per_n = json::array();
  const bool gd_gamma = solver.method == Method::gd && solver.in_gd_stable_range(c.mu, c.L);
  for (const auto& p : sweep.per_n) {
    for (std::size_t t = 0; t < p.per_trial.size(); ++t) csv.row(p.n, t, p.per_trial[t].value, to_string(sweep.kind));
    const double gamma_limit = gd_stability_limit(c.K, p.n, c.mu);
    json entry = {{"n", p.n},
                  {"mean", p.mean},
                  {"std", p.std},
                  {"q50", p.q50},
                  {"q90", p.q90},
                  {"q_1_minus_delta", p.q_delta},
                  {"trials", p.trials},
                  {"bounds_eta_to_zero", to_json(evaluate_bounds(problem, gamma_limit, e.r_grid))}};
    if (gd_gamma) {
      const double gamma = gd_stability_bound(c.K, p.n, c.mu, c.L, solver.eta);
      entry["bounds_configured_eta"] = to_json(evaluate_bounds(problem, gamma, e.r_grid));
    }
    per_n.push_back(entry);
  }
  outcome.csv = csv.str();
  json results = {{"mode", e.mode},
                  {"kind", to_string(sweep.kind)},
                  {"statistic", sweep.statistic == SweepStatistic::mean ? "mean" : "quantile"},
                  {"delta", sweep.delta},
                  {"fit_valid", sweep.fit_valid},
                  {"slope", sweep.slope},
                  {"intercept", sweep.intercept},
                  {"r_squared", sweep.r_squared},
                  {"sandwich_violations", sweep.sandwich_violations},
                  {"per_n", per_n}};
  const std::size_t n0 = e.n_grid.front();
  const double gamma0 = gd_gamma ? gd_stability_bound(c.K, n0, c.mu, c.L, solver.eta) : gd_stability_limit(c.K, n0, c.mu);
  json bounds = to_json(evaluate_bounds(problem, gamma0, e.r_grid));
  bounds["n"] = n0;

  if (!config.output.svg_path.empty()) {
    SvgSeries series;
    for (const auto& p : sweep.per_n) {
      series.x.push_back(static_cast<double>(p.n));
      series.y.push_back(sweep.statistic == SweepStatistic::mean ? p.mean : p.q_delta);
    }
    write_atomic(resolve(options, config.output.svg_path, "sweep.svg"),
                 loglog_svg(to_string(sweep.kind) + " vs n", series, sweep.fit_valid, sweep.slope, sweep.intercept));
  }
  emit("sweep", config, options, problem, outcome, std::move(results), std::move(bounds), started, started_iso);
  return outcome;
}

CommandOutcome cmd_bernstein(const ExperimentConfig& config, const RunOptions& options) {
  const auto started = Clock::now();
  const std::string started_iso = iso_now();
  const Problem problem = build_problem(config.problem);
  if (!problem.game) throw InvalidArgument("bernstein requires problem.kind = \"game\"");
  const std::uint64_t seed = base_seed(config, options);
  std::vector<Vector> zs;
  if (config.experiment.include_solution) zs.push_back(problem.solution);
  for (std::size_t i = 0; i < config.experiment.z_samples; ++i) {
    zs.push_back(sample_uniform(problem.domain, derive_seed({seed, i, kTagBernsteinZ})));
  }
  const BernsteinReport report =
      bernstein_check(problem, zs, config.experiment.mc_samples, derive_seed({seed, kTagBernsteinMc}));

  CommandOutcome outcome;
  CsvWriter csv({"sample_index", "lhs", "rhs", "B"});
  std::size_t violations = 0;
  for (const auto& r : report.rows) {
    csv.row(r.sample_index, r.lhs, r.rhs, report.B);
    if (!r.satisfied) ++violations;
  }
  if (violations > 0) {
    outcome.exit_code = kExitBound;
    outcome.message = std::to_string(violations) + " sampled points violate the Bernstein inequality";
  }
  outcome.csv = csv.str();
  json results = {{"B", report.B},
                  {"samples", report.rows.size()},
                  {"mc_samples", config.experiment.mc_samples},
                  {"violations", violations}};
  json bounds = {{"bernstein_B", report.B}, {"note", BoundSet{}.note}};
  emit("bernstein", config, options, problem, outcome, std::move(results), std::move(bounds), started, started_iso);
  return outcome;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"vi-lab: stochastic strongly monotone variational inequality experiments"};
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  std::size_t workers = default_workers();
  std::optional<std::uint64_t> seed;
  app.add_option("command", command, "solve | contraction | stability | sweep | bernstein")
      ->required()
      ->check(CLI::IsMember({"solve", "contraction", "stability", "sweep", "bernstein"}));
  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  app.add_option("--out-dir", out_dir, "directory for CSV/JSON/manifest outputs");
  app.add_option("--workers", workers, "parallel trial workers")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "override the config's base seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const ExperimentConfig config = load_config(config_path);
    RunOptions options;
    options.out_dir = out_dir;
    options.workers = workers;
    options.seed = seed;
    CommandOutcome outcome;
    if (command == "solve") outcome = cmd_solve(config, options);
    if (command == "contraction") outcome = cmd_contraction(config, options);
    if (command == "stability") outcome = cmd_stability(config, options);
    if (command == "sweep") outcome = cmd_sweep(config, options);
    if (command == "bernstein") outcome = cmd_bernstein(config, options);
    if (outcome.exit_code != kExitOk) err << "bound violation: " << outcome.message << "\n";
    out << command << ": exit " << outcome.exit_code << "\n";
    return outcome.exit_code;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const BoundViolation& e) {
    err << "bound violation: " << e.what() << "\n";
    return kExitBound;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace vilab
