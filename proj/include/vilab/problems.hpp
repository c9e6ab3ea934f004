#pragma once

// Synthetic strongly monotone VI instances, the noisy oracle, and datasets.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vilab/domains.hpp"
#include "vilab/linalg.hpp"

namespace vilab {

/// Value-level view of an operator F: Z → ℝᵈ.
using OperatorFn = std::function<Vector(const Vector&)>;

/// Affine operator F(z) = Mz + b.
struct QuadraticOperator {
  Matrix M;
  Vector b;

  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(b.size()); }
  [[nodiscard]] Vector evaluate(const Vector& z) const;
  [[nodiscard]] OperatorFn as_function() const;
};

Vector evaluate(const QuadraticOperator& op, const Vector& z);

/// k-player game with potentials f_i(z) = ½ z_iᵀQ_i z_i + z_iᵀ(C_i z_{−i} + b_i).
/// z_{−i} stacks the other players' blocks in player order.
class QuadraticGame {
 public:
  QuadraticGame(std::vector<Matrix> Q, std::vector<Matrix> C, std::vector<Vector> offsets,
                Domain domain);

  [[nodiscard]] std::size_t players() const { return Q_.size(); }
  [[nodiscard]] std::size_t dim() const { return domain_.dim(); }
  [[nodiscard]] const Domain& domain() const { return domain_; }
  [[nodiscard]] const Matrix& Q(std::size_t i) const { return Q_.at(i); }
  [[nodiscard]] const Matrix& C(std::size_t i) const { return C_.at(i); }
  [[nodiscard]] const Vector& offset(std::size_t i) const { return offsets_.at(i); }
  [[nodiscard]] std::size_t player_dim(std::size_t i) const { return domain_.factor(i).dim(); }

  /// The stacked operator F(z) = [∇_{z_i} f_i(z)]_i as Mz + b.
  [[nodiscard]] const QuadraticOperator& full_operator() const { return full_; }

  /// z_{−i}: every block except player i's, in player order.
  [[nodiscard]] Vector others(const Vector& z, std::size_t i) const;

 private:
  std::vector<Matrix> Q_;
  std::vector<Matrix> C_;
  std::vector<Vector> offsets_;
  Domain domain_;
  QuadraticOperator full_;
};

/// f_i(z). Player indices are 0-based.
double potential(const QuadraticGame& game, std::size_t i, const Vector& z);

enum class NoiseKind { offset, matrix };

std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string& name);

/// Offset noise adds e uniform on the centered ball of radius `magnitude`.
/// Matrix noise additionally perturbs M by E with ‖E‖₂ ≤ magnitude, accepted
/// only when both M+E and M−E keep λ_min(sym) ≥ μ/2 and σ_max ≤ 2L.
struct NoiseModel {
  NoiseKind kind = NoiseKind::offset;
  double magnitude = 0.0;
};

/// One realization ζ = (E, e). E is empty for offset noise.
struct NoiseRecord {
  Matrix E;
  Vector e;
};

struct ProblemConstants {
  struct Player {
    double mu = 0.0;
    double L = 0.0;
  };
  double mu = 0.0;
  double L = 0.0;
  double K = 0.0;
  double D = 0.0;
  std::vector<Player> per_player;

  /// Σ_i L_i/μ_i, or 1 for a non-game operator viewed as a single player.
  [[nodiscard]] double condition_sum() const;
};

/// A generated instance: the true operator, its domain, noise model and
/// (for games) the game structure.
struct Problem {
  QuadraticOperator op;
  Domain domain;
  NoiseModel noise;
  std::optional<QuadraticGame> game;
  Vector solution;
  ProblemConstants constants;
};

struct SampledDataset {
  std::uint64_t base_seed = 0;
  NoiseModel noise;
  std::vector<std::uint64_t> record_seeds;
  std::vector<NoiseRecord> records;

  [[nodiscard]] std::size_t size() const { return records.size(); }
};

QuadraticOperator generate_operator(std::uint64_t seed, const Domain& domain, double mu_target,
                                    double L_target);

/// `domain` must be a product with one factor per player; dims[i] must equal
/// the dimension of factor i.
QuadraticGame generate_game(std::uint64_t seed, const std::vector<std::size_t>& dims,
                            const Domain& domain, double mu_target, double coupling_strength);

/// Certified constants. K bounds ‖Ξ(z, ζ)‖ over Z for every admissible record
/// of `noise` (pass a zero-magnitude model for the noiseless F).
ProblemConstants constants(const QuadraticOperator& op, const Domain& domain,
                           const NoiseModel& noise = {},
                           const QuadraticGame* game = nullptr);

/// Solves Mz = −b; throws NumericalError if singular or if the solution is
/// outside the domain (tolerance 1e-6).
Vector exact_solution(const QuadraticOperator& op, const Domain& domain);

Problem make_operator_problem(std::uint64_t seed, const Domain& domain, double mu_target,
                              double L_target, NoiseModel noise);
Problem make_game_problem(std::uint64_t seed, const std::vector<std::size_t>& dims,
                          const Domain& domain, double mu_target, double coupling_strength,
                          NoiseModel noise);

/// Record drawn deterministically from `seed`.
NoiseRecord sample_record(const QuadraticOperator& op, const ProblemConstants& c,
                          const NoiseModel& noise, std::uint64_t seed);

SampledDataset sample_dataset(const Problem& problem, std::size_t n, std::uint64_t seed);

/// Copy of X with record j (0-based) redrawn from `seed`.
SampledDataset replace_record(const Problem& problem, const SampledDataset& X, std::size_t j,
                              std::uint64_t seed);

/// Ξ(·, ζ) for one record.
QuadraticOperator sample_operator(const QuadraticOperator& op, const NoiseRecord& record);

/// F̂_X: the average of the sample operators, itself affine.
QuadraticOperator empirical_operator(const QuadraticOperator& op, const SampledDataset& X);

}  // namespace vilab
