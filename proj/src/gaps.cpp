#include "vilab/gaps.hpp"

#include <cmath>

#include "vilab/errors.hpp"

namespace vilab {
namespace {

const QuadraticGame& require_game(const Problem& problem, const char* what) {
  if (!problem.game) throw InvalidArgument(std::string(what) + ": requires a game problem");
  return *problem.game;
}

Vector player_best_response(const QuadraticGame& game, std::size_t i, const Vector& rest,
                            const BestResponseOptions& options) {
  const Domain& factor = game.domain().factor(i);
  const Matrix& Q = game.Q(i);
  const Vector linear = game.C(i) * rest + game.offset(i);
  Eigen::LLT<Matrix> llt(Q);
  Vector x = llt.solve(-linear);
  if (contains(factor, x, 0.0)) return x;

  Eigen::SelfAdjointEigenSolver<Matrix> es(Q, Eigen::EigenvaluesOnly);
  const double smooth = es.eigenvalues().maxCoeff();
  x = project(factor, x);
  double residual = 0.0;
  for (std::size_t it = 0; it < options.max_steps; ++it) {
    const Vector next = project(factor, x - (Q * x + linear) / smooth);
    residual = (next - x).norm() * smooth;
    x = next;
    if (residual <= options.tolerance) return x;
  }
  throw NumericalError("best_response: inner solver did not converge for player " + std::to_string(i) +
                       " (projected-gradient residual " + std::to_string(residual) + ")");
}

}  // namespace

std::string to_string(GapKind kind) {
  switch (kind) {
    case GapKind::gap: return "gap";
    case GapKind::weak_gap: return "weak_gap";
    case GapKind::potential_gap: return "potential_gap";
  }
  return "gap";
}

GapKind parse_gap_kind(const std::string& name) {
  if (name == "gap") return GapKind::gap;
  if (name == "weak_gap") return GapKind::weak_gap;
  if (name == "potential_gap") return GapKind::potential_gap;
  throw InvalidArgument("unknown gap kind '" + name + "'");
}

double gap(const OperatorFn& F, const Domain& domain, const Vector& z) {
  if (!contains(domain, z, kGapFeasibilityTol)) throw InvalidArgument("gap: z is infeasible");
  const Vector g = F(z);
  return g.dot(z) - g.dot(linear_minimization_oracle(domain, g));
}

double empirical_gap(const Problem& problem, const SampledDataset& X, const Vector& z) {
  return gap(empirical_operator(problem.op, X).as_function(), problem.domain, z);
}

Vector best_response(const QuadraticGame& game, const Vector& z, const BestResponseOptions& options) {
  if (!contains(game.domain(), z, kGapFeasibilityTol)) throw InvalidArgument("best_response: z is infeasible");
  Vector w(z.size());
  for (std::size_t i = 0; i < game.players(); ++i) {
    const auto off = static_cast<Eigen::Index>(game.domain().factor_offset(i));
    const auto di = static_cast<Eigen::Index>(game.player_dim(i));
    w.segment(off, di) = player_best_response(game, i, game.others(z, i), options);
  }
  return w;
}

double weak_gap(const OperatorFn& F, const QuadraticGame& game, const Vector& z) {
  const Vector w = best_response(game, z);
  return F(z).dot(z - w);
}

double potential_gap(const QuadraticGame& game, const Vector& z) {
  const Vector w = best_response(game, z);
  double total = 0.0;
  for (std::size_t i = 0; i < game.players(); ++i) {
    Vector deviated = z;
    const auto off = static_cast<Eigen::Index>(game.domain().factor_offset(i));
    const auto di = static_cast<Eigen::Index>(game.player_dim(i));
    deviated.segment(off, di) = w.segment(off, di);
    total += potential(game, i, z) - potential(game, i, deviated);
  }
  return total;
}

GapReport gap_report(const Problem& problem, const SampledDataset& X, const Vector& z, GapKind kind) {
  const OperatorFn truth = problem.op.as_function();
  const OperatorFn empirical = empirical_operator(problem.op, X).as_function();
  GapReport r;
  r.kind = kind;
  r.gap_true = gap(truth, problem.domain, z);
  r.gap_empirical = gap(empirical, problem.domain, z);
  if (problem.game) {
    r.weak_gap_true = weak_gap(truth, *problem.game, z);
    r.weak_gap_empirical = weak_gap(empirical, *problem.game, z);
    r.potential_gap = potential_gap(*problem.game, z);
  } else if (kind != GapKind::gap) {
    throw InvalidArgument("gap_report: " + to_string(kind) + " requires a game problem");
  }
  switch (kind) {
    case GapKind::gap: r.generalization_gap = r.gap_true - r.gap_empirical; break;
    case GapKind::weak_gap: r.generalization_gap = r.weak_gap_true - r.weak_gap_empirical; break;
    case GapKind::potential_gap: r.generalization_gap = r.potential_gap; break;
  }
  return r;
}

double generalization_gap(const Problem& problem, const SampledDataset& X, const Vector& z, GapKind kind) {
  const OperatorFn truth = problem.op.as_function();
  const OperatorFn empirical = empirical_operator(problem.op, X).as_function();
  switch (kind) {
    case GapKind::gap: return gap(truth, problem.domain, z) - gap(empirical, problem.domain, z);
    case GapKind::weak_gap: {
      const QuadraticGame& game = require_game(problem, "generalization_gap");
      const Vector w = best_response(game, z);
      return (truth(z) - empirical(z)).dot(z - w);
    }
    case GapKind::potential_gap: break;
  }
  throw InvalidArgument("generalization_gap: kind must be gap or weak_gap");
}

double true_measure(const Problem& problem, const Vector& z, GapKind kind) {
  switch (kind) {
    case GapKind::gap: return gap(problem.op.as_function(), problem.domain, z);
    case GapKind::weak_gap:
      return weak_gap(problem.op.as_function(), require_game(problem, "true_measure"), z);
    case GapKind::potential_gap: return potential_gap(require_game(problem, "true_measure"), z);
  }
  return 0.0;
}

}  // namespace vilab
