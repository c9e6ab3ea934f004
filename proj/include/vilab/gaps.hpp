#pragma once

// Suboptimality measures for VI solutions: gap function, weak gap with the
// best-response surrogate, and the potential gap of conservative games.

#include <string>

#include "vilab/domains.hpp"
#include "vilab/problems.hpp"

namespace vilab {

enum class GapKind { gap, weak_gap, potential_gap };

std::string to_string(GapKind kind);
GapKind parse_gap_kind(const std::string& name);

inline constexpr double kGapFeasibilityTol = 1e-6;

/// max_{u ∈ Z} ⟨F(z), z − u⟩ via the domain's linear minimization oracle.
double gap(const OperatorFn& F, const Domain& domain, const Vector& z);

/// Gap of the empirical mean operator F̂_X.
double empirical_gap(const Problem& problem, const SampledDataset& X, const Vector& z);

struct BestResponseOptions {
  double tolerance = 1e-10;
  std::size_t max_steps = 100000;
};

/// w*(z): each player's minimizer of its own potential over its strategy set,
/// holding the other players at z.
Vector best_response(const QuadraticGame& game, const Vector& z, const BestResponseOptions& options = {});

/// ⟨F(z), z − w*(z)⟩ with w* taken from the true game even when F is empirical.
double weak_gap(const OperatorFn& F, const QuadraticGame& game, const Vector& z);

/// Σ_i f_i(z) − f_i(w*_i(z), z_{−i}).
double potential_gap(const QuadraticGame& game, const Vector& z);

struct GapReport {
  double gap_true = 0.0;
  double gap_empirical = 0.0;
  double weak_gap_true = 0.0;
  double weak_gap_empirical = 0.0;
  double potential_gap = 0.0;
  double generalization_gap = 0.0;
  GapKind kind = GapKind::gap;
};

/// Every applicable measure at z; weak and potential gaps are zero for
/// non-game problems.
GapReport gap_report(const Problem& problem, const SampledDataset& X, const Vector& z, GapKind kind);

/// True measure minus empirical measure at z. `kind` must be gap or weak_gap.
double generalization_gap(const Problem& problem, const SampledDataset& X, const Vector& z, GapKind kind);

/// The true-measure value of `kind` at z (the quantity rate sweeps track).
double true_measure(const Problem& problem, const Vector& z, GapKind kind);

}  // namespace vilab
