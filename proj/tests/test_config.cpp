#include <string>

#include "doctest.h"
#include "test_util.hpp"
#include "vilab/config.hpp"
#include "vilab/errors.hpp"

using namespace vilab;
using nlohmann::json;
using testutil::vec;

namespace {

json operator_config() {
  return json::parse(R"({
    "seed": 7,
    "problem": {"kind": "operator", "seed": 3, "mu_target": 0.5, "L_target": 1.0,
                "domain": {"type": "simplex", "d": 4},
                "noise": {"kind": "offset", "magnitude": 0.2}},
    "solver": {"method": "gd", "eta": "auto", "T": 500, "projected": true},
    "experiment": {"n_grid": [16, 32], "trials": 10},
    "output": {"csv_path": "out.csv"}
  })");
}

json game_config() {
  return json::parse(R"({
    "problem": {"kind": "game", "seed": 10, "k": 3, "dims": [2, 2, 2], "mu_target": 0.5,
                "coupling_strength": 0.5,
                "domain": {"type": "box", "lower": [-1, -1], "upper": [1, 1]},
                "noise": {"kind": "matrix", "magnitude": 0.1}},
    "solver": {"method": "eg", "eta": 0.2},
    "experiment": {"kind": "weak_gap", "mode": "hp", "delta": 0.2}
  })");
}

void expect_rejected(const json& j, const std::string& fragment) {
  CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains(fragment.c_str()), InvalidArgument);
}

}  // namespace

TEST_CASE("parse operator config") {
  const ExperimentConfig c = parse_config(operator_config());
  CHECK(c.seed == 7);
  CHECK(c.problem.kind == ProblemKind::op);
  CHECK(c.problem.d == 5);
  REQUIRE(c.problem.domain.has_value());
  CHECK(c.problem.domain->type_name() == "simplex");
  CHECK(c.problem.noise.magnitude == 0.2);
  CHECK_FALSE(c.solver.eta.has_value());
  CHECK(c.solver.projected);
  CHECK(c.experiment.n_grid == std::vector<std::size_t>{16, 32});
  CHECK(c.output.csv_path == "out.csv");
}

TEST_CASE("parse game config replicates a single factor per player") {
  const ExperimentConfig c = parse_config(game_config());
  CHECK(c.problem.kind == ProblemKind::game);
  REQUIRE(c.problem.domain.has_value());
  CHECK(c.problem.domain->factor_count() == 3);
  CHECK(c.problem.domain->dim() == 6);
  CHECK(c.problem.noise.kind == NoiseKind::matrix);
  CHECK(c.solver.method == Method::eg);
  CHECK(*c.solver.eta == 0.2);
  CHECK(c.experiment.kind == GapKind::weak_gap);
  CHECK(c.experiment.mode == "hp");
}

TEST_CASE("unknown keys are rejected by name") {
  json j = operator_config();
  j["solver"]["momentum"] = 0.9;
  expect_rejected(j, "solver.momentum");
  j = operator_config();
  j["problem"]["domain"]["side"] = 2;
  expect_rejected(j, "side");
  j = operator_config();
  j["extra"] = true;
  expect_rejected(j, "extra");
}

TEST_CASE("ranges are validated") {
  json j = operator_config();
  j["problem"]["mu_target"] = 2.0;
  expect_rejected(j, "mu_target <= L_target");
  j = operator_config();
  j["problem"]["mu_target"] = 0.0;
  expect_rejected(j, "mu_target");
  j = operator_config();
  j["solver"]["eta"] = -0.1;
  expect_rejected(j, "solver.eta");
  j = operator_config();
  j["experiment"]["n_grid"] = {32, 16};
  expect_rejected(j, "n_grid");
  j = operator_config();
  j["experiment"]["delta"] = 1.0;
  expect_rejected(j, "delta");
  j = operator_config();
  j["experiment"]["kind"] = "weak_gap";
  expect_rejected(j, "requires a game");
  j = operator_config();
  j["problem"]["noise"]["magnitude"] = -1;
  expect_rejected(j, "magnitude");
  j = operator_config();
  j["problem"]["domain"] = {{"type", "torus"}};
  expect_rejected(j, "torus");
  j = game_config();
  j["problem"]["dims"] = {2, 2};
  expect_rejected(j, "dims");
  j = game_config();
  j["problem"]["L_target"] = 1.0;
  expect_rejected(j, "L_target");
  j = operator_config();
  j["solver"]["T"] = "many";
  expect_rejected(j, "solver.T");
  j = operator_config();
  j.erase("problem");
  expect_rejected(j, "problem");
}

TEST_CASE("config round trip") {
  for (const json& j : {operator_config(), game_config()}) {
    const ExperimentConfig a = parse_config(j);
    const json once = config_to_json(a);
    const json twice = config_to_json(parse_config(once));
    CHECK(once == twice);
  }
}

TEST_CASE("domain json round trip") {
  const std::vector<Domain> domains{Domain::simplex(3), Domain::ball(vec({1, 2}), 0.5),
                                    Domain::box(vec({0, -1}), vec({1, 1})),
                                    Domain::product({Domain::simplex(1), Domain::ball(vec({0}), 2.0)})};
  for (const Domain& d : domains) {
    const Domain back = domain_from_json(domain_to_json(d));
    CHECK(domain_to_json(back) == domain_to_json(d));
    CHECK(back.dim() == d.dim());
  }
}

TEST_CASE("build_problem and resolve_solver") {
  const ExperimentConfig op = parse_config(operator_config());
  const Problem p = build_problem(op.problem);
  CHECK(p.constants.mu == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(p.constants.L == doctest::Approx(1.0).epsilon(1e-9));
  const SolverConfig s = resolve_solver(op.solver, p.constants);
  CHECK(s.eta == doctest::Approx(p.constants.mu / (p.constants.L * p.constants.L)));
  CHECK(s.projected);

  const ExperimentConfig game = parse_config(game_config());
  const Problem g = build_problem(game.problem);
  REQUIRE(g.game.has_value());
  CHECK(g.game->players() == 3);

  SolverSpec eg_auto;
  eg_auto.method = Method::eg;
  ProblemConstants weak;
  weak.mu = 0.4;
  weak.L = 1.0;
  CHECK_THROWS_AS(resolve_solver(eg_auto, weak), InvalidArgument);
  weak.mu = 0.9;
  const SolverConfig eg = resolve_solver(eg_auto, weak);
  CHECK(admissible_eta(0.9, 1.0, Method::eg).contains(eg.eta));
}

TEST_CASE("load_config errors") {
  CHECK_THROWS_WITH_AS(load_config("/nonexistent/config.json"), doctest::Contains("cannot open"), InvalidArgument);
}
