#include "vilab/config.hpp"

#include <fstream>
#include <set>

#include "vilab/errors.hpp"

namespace vilab {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& section) {
  if (!j.is_object()) throw InvalidArgument(section + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw InvalidArgument("unknown key '" + section + "." + key + "'");
  }
}

template <class T>
T get(const json& j, const std::string& key, const std::string& section) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument("invalid or missing value for '" + section + "." + key + "'");
  }
}

template <class T>
T get_or(const json& j, const std::string& key, const std::string& section, T fallback) {
  return j.contains(key) ? get<T>(j, key, section) : fallback;
}

std::uint64_t get_seed(const json& j, const std::string& key, const std::string& section, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw InvalidArgument("'" + section + "." + key + "' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::size_t get_count(const json& j, const std::string& key, const std::string& section, std::size_t fallback,
                      std::size_t minimum) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < static_cast<std::int64_t>(minimum)) {
    throw InvalidArgument("'" + section + "." + key + "' must be an integer >= " + std::to_string(minimum));
  }
  return v.get<std::size_t>();
}

Vector to_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw InvalidArgument(what + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvalidArgument(what + ": expected an array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

json from_vector(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

Domain domain_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw InvalidArgument("domain: expected an object with a string 'type'");
  }
  const auto type = j.at("type").get<std::string>();
  if (type == "simplex") {
    reject_unknown(j, {"type", "d"}, "domain");
    return Domain::simplex(get_count(j, "d", "domain", 0, 1));
  }
  if (type == "ball") {
    reject_unknown(j, {"type", "center", "radius"}, "domain");
    return Domain::ball(to_vector(j.at("center"), "domain.center"), get<double>(j, "radius", "domain"));
  }
  if (type == "box") {
    reject_unknown(j, {"type", "lower", "upper"}, "domain");
    if (!j.contains("lower") || !j.contains("upper")) throw InvalidArgument("domain: box needs lower and upper");
    return Domain::box(to_vector(j.at("lower"), "domain.lower"), to_vector(j.at("upper"), "domain.upper"));
  }
  if (type == "product") {
    reject_unknown(j, {"type", "factors"}, "domain");
    if (!j.contains("factors") || !j.at("factors").is_array()) throw InvalidArgument("domain: product needs factors");
    std::vector<Domain> factors;
    for (const auto& f : j.at("factors")) factors.push_back(domain_from_json(f));
    return Domain::product(std::move(factors));
  }
  throw InvalidArgument("domain: unknown type '" + type + "'");
}

json domain_to_json(const Domain& domain) {
  const auto& v = domain.variant();
  if (const auto* s = std::get_if<Simplex>(&v)) return {{"type", "simplex"}, {"d", s->d}};
  if (const auto* b = std::get_if<Ball>(&v)) {
    return {{"type", "ball"}, {"center", from_vector(b->center)}, {"radius", b->radius}};
  }
  if (const auto* b = std::get_if<Box>(&v)) {
    return {{"type", "box"}, {"lower", from_vector(b->lower)}, {"upper", from_vector(b->upper)}};
  }
  const auto& p = std::get<Product>(v);
  json factors = json::array();
  for (const auto& f : p.factors) factors.push_back(domain_to_json(f));
  return {{"type", "product"}, {"factors", factors}};
}

ExperimentConfig parse_config(const json& j) {
  reject_unknown(j, {"seed", "problem", "solver", "experiment", "output"}, "config");
  ExperimentConfig c;
  c.seed = get_seed(j, "seed", "config", 0);

  if (!j.contains("problem")) throw InvalidArgument("missing section 'problem'");
  const json& p = j.at("problem");
  reject_unknown(p, {"kind", "seed", "d", "k", "dims", "mu_target", "L_target", "coupling_strength", "domain", "noise"},
                 "problem");
  const auto kind = get_or<std::string>(p, "kind", "problem", "operator");
  if (kind == "operator") {
    c.problem.kind = ProblemKind::op;
    for (const char* key : {"k", "dims", "coupling_strength"}) {
      if (p.contains(key)) throw InvalidArgument("key 'problem." + std::string(key) + "' applies only to games");
    }
  } else if (kind == "game") {
    c.problem.kind = ProblemKind::game;
    if (p.contains("L_target")) throw InvalidArgument("key 'problem.L_target' applies only to operator problems");
  } else {
    throw InvalidArgument("problem.kind must be 'operator' or 'game'");
  }
  c.problem.seed = get_seed(p, "seed", "problem", 1);
  c.problem.mu_target = get_or<double>(p, "mu_target", "problem", 0.5);
  if (!(c.problem.mu_target > 0.0)) throw InvalidArgument("problem.mu_target must be > 0");
  if (!p.contains("domain")) throw InvalidArgument("missing key 'problem.domain'");
  Domain domain = domain_from_json(p.at("domain"));

  if (c.problem.kind == ProblemKind::op) {
    c.problem.L_target = get_or<double>(p, "L_target", "problem", 1.0);
    if (!(c.problem.mu_target <= c.problem.L_target)) throw InvalidArgument("problem: requires mu_target <= L_target");
    c.problem.d = domain.dim();
    if (p.contains("d") && get_count(p, "d", "problem", 0, 1) != domain.dim()) {
      throw InvalidArgument("problem.d does not match the domain dimension");
    }
    c.problem.domain = domain;
  } else {
    c.problem.coupling_strength = get_or<double>(p, "coupling_strength", "problem", 0.5);
    if (!(c.problem.coupling_strength >= 0.0)) throw InvalidArgument("problem.coupling_strength must be >= 0");
    if (p.contains("dims")) {
      c.problem.dims = get<std::vector<std::size_t>>(p, "dims", "problem");
    }
    const std::size_t k = p.contains("k") ? get_count(p, "k", "problem", 0, 1)
                          : !c.problem.dims.empty() ? c.problem.dims.size()
                                                    : domain.factor_count();
    if (c.problem.dims.empty()) {
      if (domain.is_product()) {
        for (std::size_t i = 0; i < domain.factor_count(); ++i) c.problem.dims.push_back(domain.factor(i).dim());
      } else {
        c.problem.dims.assign(k, domain.dim());
      }
    }
    if (c.problem.dims.size() != k) throw InvalidArgument("problem.dims must have k entries");
    if (!domain.is_product()) {
      std::vector<Domain> factors(k, domain);
      domain = Domain::product(std::move(factors));
    }
    if (domain.factor_count() != k) throw InvalidArgument("problem.domain must have one factor per player");
    for (std::size_t i = 0; i < k; ++i) {
      if (c.problem.dims[i] != domain.factor(i).dim()) {
        throw InvalidArgument("problem.dims[" + std::to_string(i) + "] does not match its domain factor");
      }
    }
    c.problem.d = domain.dim();
    c.problem.domain = domain;
  }
  if (p.contains("noise")) {
    const json& nz = p.at("noise");
    reject_unknown(nz, {"kind", "magnitude"}, "problem.noise");
    c.problem.noise.kind = parse_noise_kind(get_or<std::string>(nz, "kind", "problem.noise", "offset"));
    c.problem.noise.magnitude = get_or<double>(nz, "magnitude", "problem.noise", 0.0);
    if (!(c.problem.noise.magnitude >= 0.0)) throw InvalidArgument("problem.noise.magnitude must be >= 0");
  }

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    reject_unknown(s, {"method", "eta", "T", "projected", "record_trajectory"}, "solver");
    c.solver.method = parse_method(get_or<std::string>(s, "method", "solver", "gd"));
    if (s.contains("eta")) {
      const json& eta = s.at("eta");
      if (eta.is_string() && eta.get<std::string>() == "auto") {
        c.solver.eta.reset();
      } else if (eta.is_number() && eta.get<double>() > 0.0) {
        c.solver.eta = eta.get<double>();
      } else {
        throw InvalidArgument("solver.eta must be a positive number or \"auto\"");
      }
    }
    c.solver.T = get_count(s, "T", "solver", 1000, 0);
    c.solver.projected = get_or<bool>(s, "projected", "solver", false);
    c.solver.record_trajectory = get_or<bool>(s, "record_trajectory", "solver", false);
  }

  if (j.contains("experiment")) {
    const json& e = j.at("experiment");
    reject_unknown(e, {"n", "n_grid", "trials", "delta", "r_grid", "z_samples", "mc_samples", "eta_grid", "pairs",
                       "kind", "mode", "include_solution"},
                   "experiment");
    c.experiment.n = get_count(e, "n", "experiment", 256, 1);
    if (e.contains("n_grid")) {
      c.experiment.n_grid = get<std::vector<std::size_t>>(e, "n_grid", "experiment");
      if (c.experiment.n_grid.empty()) throw InvalidArgument("experiment.n_grid must be nonempty");
      for (std::size_t i = 0; i < c.experiment.n_grid.size(); ++i) {
        if (c.experiment.n_grid[i] < 1 || (i > 0 && c.experiment.n_grid[i] <= c.experiment.n_grid[i - 1])) {
          throw InvalidArgument("experiment.n_grid must be strictly increasing positive integers");
        }
      }
    }
    c.experiment.trials = get_count(e, "trials", "experiment", 50, 1);
    c.experiment.delta = get_or<double>(e, "delta", "experiment", 0.1);
    if (!(c.experiment.delta > 0.0 && c.experiment.delta < 1.0)) throw InvalidArgument("experiment.delta must lie in (0, 1)");
    if (e.contains("r_grid")) {
      c.experiment.r_grid = get<std::vector<double>>(e, "r_grid", "experiment");
      for (double r : c.experiment.r_grid) {
        if (!(r > 0.0)) throw InvalidArgument("experiment.r_grid entries must be > 0");
      }
    }
    c.experiment.z_samples = get_count(e, "z_samples", "experiment", 100, 0);
    c.experiment.mc_samples = get_count(e, "mc_samples", "experiment", 10000, 2);
    if (e.contains("eta_grid")) {
      c.experiment.eta_grid = get<std::vector<double>>(e, "eta_grid", "experiment");
      for (double eta : c.experiment.eta_grid) {
        if (!(eta > 0.0)) throw InvalidArgument("experiment.eta_grid entries must be > 0");
      }
    }
    c.experiment.pairs = get_count(e, "pairs", "experiment", 1000, 1);
    c.experiment.kind = parse_gap_kind(get_or<std::string>(e, "kind", "experiment", "gap"));
    c.experiment.mode = get_or<std::string>(e, "mode", "experiment", "mean");
    if (c.experiment.mode != "mean" && c.experiment.mode != "hp") {
      throw InvalidArgument("experiment.mode must be 'mean' or 'hp'");
    }
    c.experiment.include_solution = get_or<bool>(e, "include_solution", "experiment", true);
  }
  if (c.experiment.kind != GapKind::gap && c.problem.kind != ProblemKind::game) {
    throw InvalidArgument("experiment.kind '" + to_string(c.experiment.kind) + "' requires a game problem");
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown(o, {"csv_path", "json_path", "svg_path"}, "output");
    c.output.csv_path = get_or<std::string>(o, "csv_path", "output", "");
    c.output.json_path = get_or<std::string>(o, "json_path", "output", "");
    c.output.svg_path = get_or<std::string>(o, "svg_path", "output", "");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidArgument("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json config_to_json(const ExperimentConfig& c) {
  json problem = {{"kind", c.problem.kind == ProblemKind::op ? "operator" : "game"},
                  {"seed", c.problem.seed},
                  {"mu_target", c.problem.mu_target},
                  {"noise", {{"kind", to_string(c.problem.noise.kind)}, {"magnitude", c.problem.noise.magnitude}}}};
  if (c.problem.domain) problem["domain"] = domain_to_json(*c.problem.domain);
  if (c.problem.kind == ProblemKind::op) {
    problem["d"] = c.problem.d;
    problem["L_target"] = c.problem.L_target;
  } else {
    problem["k"] = c.problem.dims.size();
    problem["dims"] = c.problem.dims;
    problem["coupling_strength"] = c.problem.coupling_strength;
  }
  json solver = {{"method", to_string(c.solver.method)},
                 {"T", c.solver.T},
                 {"projected", c.solver.projected},
                 {"record_trajectory", c.solver.record_trajectory}};
  solver["eta"] = c.solver.eta ? json(*c.solver.eta) : json("auto");
  json experiment = {{"n", c.experiment.n},
                     {"n_grid", c.experiment.n_grid},
                     {"trials", c.experiment.trials},
                     {"delta", c.experiment.delta},
                     {"r_grid", c.experiment.r_grid},
                     {"z_samples", c.experiment.z_samples},
                     {"mc_samples", c.experiment.mc_samples},
                     {"eta_grid", c.experiment.eta_grid},
                     {"pairs", c.experiment.pairs},
                     {"kind", to_string(c.experiment.kind)},
                     {"mode", c.experiment.mode},
                     {"include_solution", c.experiment.include_solution}};
  json output = {{"csv_path", c.output.csv_path}, {"json_path", c.output.json_path}, {"svg_path", c.output.svg_path}};
  return {{"seed", c.seed}, {"problem", problem}, {"solver", solver}, {"experiment", experiment}, {"output", output}};
}

Problem build_problem(const ProblemSpec& spec) {
  if (!spec.domain) throw InvalidArgument("problem: missing domain");
  if (spec.kind == ProblemKind::op) {
    return make_operator_problem(spec.seed, *spec.domain, spec.mu_target, spec.L_target, spec.noise);
  }
  return make_game_problem(spec.seed, spec.dims, *spec.domain, spec.mu_target, spec.coupling_strength, spec.noise);
}

SolverConfig resolve_solver(const SolverSpec& spec, const ProblemConstants& c) {
  SolverConfig out;
  out.method = spec.method;
  out.T = spec.T;
  out.projected = spec.projected;
  out.record_trajectory = spec.record_trajectory;
  if (spec.eta) {
    out.eta = *spec.eta;
  } else if (spec.method == Method::gd) {
    out.eta = c.mu / (c.L * c.L);
  } else {
    const AdmissibleEta adm = admissible_eta(c.mu, c.L, Method::eg);
    if (adm.grid.empty()) throw InvalidArgument("solver.eta = auto: no admissible eg step size (mu <= L/2)");
    out.eta = adm.grid[adm.grid.size() / 2];
  }
  return out;
}

}  // namespace vilab
