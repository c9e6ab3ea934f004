#include "vilab/problems.hpp"

#include <algorithm>
#include <cmath>

#include "vilab/errors.hpp"
#include "vilab/rng.hpp"

namespace vilab {
namespace {

constexpr int kRejectionBudget = 1000;

Matrix random_orthogonal(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(n, n);
}

Matrix random_spd(Rng& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Vector ev(n);
  for (Eigen::Index i = 0; i < n; ++i) ev(i) = unif(rng);
  ev(0) = lo;
  const Matrix q = random_orthogonal(rng, n);
  Matrix s = q * ev.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

double svd_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Vector uniform_in_ball(Rng& rng, Eigen::Index n, double radius) {
  if (radius == 0.0) return Vector::Zero(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector dir(n);
  do {
    for (Eigen::Index i = 0; i < n; ++i) dir(i) = normal(rng);
  } while (dir.norm() == 0.0);
  return dir.normalized() * (radius * std::pow(unif(rng), 1.0 / static_cast<double>(n)));
}

// Interior point with depth at least a quarter of the domain's inradius.
Vector interior_point(const Domain& domain, std::uint64_t seed) {
  const double threshold = 0.25 * inradius(domain);
  for (int attempt = 0; attempt < kRejectionBudget; ++attempt) {
    Vector z = sample_uniform(domain, derive_seed({seed, static_cast<std::uint64_t>(attempt)}));
    if (interior_depth(domain, z) >= threshold) return z;
  }
  throw NumericalError("interior solution sampling: rejection budget exhausted");
}

}  // namespace

Vector QuadraticOperator::evaluate(const Vector& z) const {
  if (z.size() != b.size()) {
    throw InvalidArgument("evaluate: dimension mismatch (operator " + std::to_string(b.size()) +
                          ", point " + std::to_string(z.size()) + ")");
  }
  return M * z + b;
}

OperatorFn QuadraticOperator::as_function() const {
  return [op = *this](const Vector& z) { return op.evaluate(z); };
}

Vector evaluate(const QuadraticOperator& op, const Vector& z) { return op.evaluate(z); }

QuadraticGame::QuadraticGame(std::vector<Matrix> Q, std::vector<Matrix> C,
                             std::vector<Vector> offsets, Domain domain)
    : Q_(std::move(Q)), C_(std::move(C)), offsets_(std::move(offsets)), domain_(std::move(domain)) {
  const std::size_t k = Q_.size();
  if (k == 0) throw InvalidArgument("game: needs at least one player");
  if (C_.size() != k || offsets_.size() != k || domain_.factor_count() != k) {
    throw InvalidArgument("game: Q, C, offsets and domain factors must agree on the player count");
  }
  const auto d = static_cast<Eigen::Index>(domain_.dim());
  full_.M = Matrix::Zero(d, d);
  full_.b = Vector::Zero(d);
  for (std::size_t i = 0; i < k; ++i) {
    const auto di = static_cast<Eigen::Index>(player_dim(i));
    const auto off = static_cast<Eigen::Index>(domain_.factor_offset(i));
    if (Q_[i].rows() != di || Q_[i].cols() != di) throw InvalidArgument("game: Q_i shape mismatch");
    if (C_[i].rows() != di || C_[i].cols() != d - di) throw InvalidArgument("game: C_i shape mismatch");
    if (offsets_[i].size() != di) throw InvalidArgument("game: b_i shape mismatch");
    if ((Q_[i] - Q_[i].transpose()).norm() > 1e-12 * std::max(1.0, Q_[i].norm())) {
      throw InvalidArgument("game: Q_" + std::to_string(i) + " is not symmetric");
    }
    if (min_sym_eigenvalue(Q_[i]) <= 0.0) {
      throw InvalidArgument("game: Q_" + std::to_string(i) + " is not positive definite");
    }
    full_.M.block(off, off, di, di) = Q_[i];
    // Scatter C_i's columns back to the global coordinates of the other players.
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      const auto dj = static_cast<Eigen::Index>(player_dim(j));
      const auto offj = static_cast<Eigen::Index>(domain_.factor_offset(j));
      full_.M.block(off, offj, di, dj) = C_[i].middleCols(col, dj);
      col += dj;
    }
    full_.b.segment(off, di) = offsets_[i];
  }
}

Vector QuadraticGame::others(const Vector& z, std::size_t i) const {
  const auto d = static_cast<Eigen::Index>(dim());
  const auto di = static_cast<Eigen::Index>(player_dim(i));
  Vector out(d - di);
  Eigen::Index pos = 0;
  for (std::size_t j = 0; j < players(); ++j) {
    if (j == i) continue;
    const Vector zj = domain_.block(z, j);
    out.segment(pos, zj.size()) = zj;
    pos += zj.size();
  }
  return out;
}

double potential(const QuadraticGame& game, std::size_t i, const Vector& z) {
  if (i >= game.players()) throw InvalidArgument("potential: player index out of range");
  if (static_cast<std::size_t>(z.size()) != game.dim()) throw InvalidArgument("potential: dimension mismatch");
  const Vector zi = game.domain().block(z, i);
  const Vector rest = game.others(z, i);
  return 0.5 * zi.dot(game.Q(i) * zi) + zi.dot(game.C(i) * rest + game.offset(i));
}

std::string to_string(NoiseKind kind) { return kind == NoiseKind::offset ? "offset" : "matrix"; }

NoiseKind parse_noise_kind(const std::string& name) {
  if (name == "offset") return NoiseKind::offset;
  if (name == "matrix") return NoiseKind::matrix;
  throw InvalidArgument("unknown noise kind '" + name + "'");
}

double ProblemConstants::condition_sum() const {
  if (per_player.empty()) return L / mu;
  double acc = 0.0;
  for (const auto& p : per_player) acc += p.L / p.mu;
  return acc;
}

QuadraticOperator generate_operator(std::uint64_t seed, const Domain& domain, double mu_target,
                                    double L_target) {
  if (!(mu_target > 0.0) || !(mu_target <= L_target)) {
    throw InvalidArgument("generate_operator: requires 0 < mu_target <= L_target");
  }
  const auto d = static_cast<Eigen::Index>(domain.dim());
  if (d == 1 && mu_target != L_target) {
    throw InvalidArgument("generate_operator: d = 1 forces mu_target = L_target");
  }
  Rng rng = make_rng({seed, 0x0be7a7});
  const double sym_hi = mu_target + 0.5 * (L_target - mu_target);
  const Matrix S = random_spd(rng, d, mu_target, sym_hi);

  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix G(d, d);
  for (Eigen::Index i = 0; i < G.size(); ++i) G.data()[i] = normal(rng);
  Matrix A = G - G.transpose();
  const double a_norm = d > 1 ? svd_norm(A) : 0.0;
  if (a_norm > 0.0) A /= a_norm;

  // σ_max(S + αA) is continuous in α, equals σ_max(S) ≤ L at α = 0 and
  // exceeds L at α = 2L; bisect for equality.
  double lo = 0.0;
  double hi = a_norm > 0.0 ? 2.0 * L_target : 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * L_target; ++it) {
    const double mid = 0.5 * (lo + hi);
    (svd_norm(S + mid * A) < L_target ? lo : hi) = mid;
  }
  QuadraticOperator op;
  // λ_min(sym M) = σ_max(M) forces M = μI; build it exactly rather than by bisection.
  op.M = mu_target == L_target ? Matrix(mu_target * Matrix::Identity(d, d)) : Matrix(S + lo * A);
  const Vector z_star = interior_point(domain, derive_seed({seed, 0x501}));
  op.b = -op.M * z_star;
  return op;
}

QuadraticGame generate_game(std::uint64_t seed, const std::vector<std::size_t>& dims,
                            const Domain& domain, double mu_target, double coupling_strength) {
  const std::size_t k = dims.size();
  if (k < 1) throw InvalidArgument("generate_game: k must be >= 1");
  if (!(mu_target > 0.0)) throw InvalidArgument("generate_game: mu_target must be > 0");
  if (!(coupling_strength >= 0.0)) throw InvalidArgument("generate_game: coupling_strength must be >= 0");
  if (domain.factor_count() != k || (k > 1 && !domain.is_product())) {
    throw InvalidArgument("generate_game: domain must be a product with one factor per player");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (domain.factor(i).dim() != dims[i]) {
      throw InvalidArgument("generate_game: dims[" + std::to_string(i) + "] does not match its domain factor");
    }
  }
  Rng rng = make_rng({seed, 0x6a3e});
  const auto d = static_cast<Eigen::Index>(domain.dim());
  std::vector<Matrix> Q;
  for (std::size_t i = 0; i < k; ++i) {
    Q.push_back(random_spd(rng, static_cast<Eigen::Index>(dims[i]), 1.5 * mu_target, 3.0 * mu_target));
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Matrix> C_raw;
  for (std::size_t i = 0; i < k; ++i) {
    const auto di = static_cast<Eigen::Index>(dims[i]);
    Matrix c(di, d - di);
    for (Eigen::Index j = 0; j < c.size(); ++j) c.data()[j] = normal(rng);
    if (c.size() > 0) c *= coupling_strength * mu_target / std::sqrt(static_cast<double>(d));
    C_raw.push_back(std::move(c));
  }

  std::vector<Vector> zero_offsets;
  for (std::size_t i = 0; i < k; ++i) zero_offsets.push_back(Vector::Zero(static_cast<Eigen::Index>(dims[i])));

  double scale = 1.0;
  double achieved = 0.0;
  for (int it = 0; it <= 60; ++it) {
    std::vector<Matrix> C;
    for (const auto& c : C_raw) C.push_back(scale * c);
    QuadraticGame candidate(Q, C, zero_offsets, domain);
    achieved = min_sym_eigenvalue(candidate.full_operator().M);
    if (achieved >= mu_target) {
      const Vector z_star = interior_point(domain, derive_seed({seed, 0x502}));
      const Vector r = -candidate.full_operator().M * z_star;
      std::vector<Vector> offsets;
      for (std::size_t i = 0; i < k; ++i) offsets.push_back(domain.block(r, i));
      return QuadraticGame(Q, std::move(C), std::move(offsets), domain);
    }
    scale *= 0.5;
  }
  throw NumericalError("generate_game: cannot reach mu_target " + std::to_string(mu_target) +
                       " (achieved " + std::to_string(achieved) + ")");
}

ProblemConstants constants(const QuadraticOperator& op, const Domain& domain,
                           const NoiseModel& noise, const QuadraticGame* game) {
  if (op.dim() != domain.dim()) throw InvalidArgument("constants: dimension mismatch");
  ProblemConstants c;
  c.mu = min_sym_eigenvalue(op.M);
  c.L = spectral_norm(op.M);
  const double radius = max_norm(domain);
  c.K = c.L * radius + op.b.norm();
  if (noise.magnitude > 0.0) {
    c.K += noise.magnitude;
    if (noise.kind == NoiseKind::matrix) c.K += noise.magnitude * radius;
  }
  c.D = diameter(domain, Norm::l2);
  if (game != nullptr) {
    for (std::size_t i = 0; i < game->players(); ++i) {
      const auto off = static_cast<Eigen::Index>(domain.factor_offset(i));
      const auto di = static_cast<Eigen::Index>(game->player_dim(i));
      c.per_player.push_back({min_sym_eigenvalue(game->Q(i)), spectral_norm(op.M.middleRows(off, di))});
    }
  }
  return c;
}

Vector exact_solution(const QuadraticOperator& op, const Domain& domain) {
  Eigen::FullPivLU<Matrix> lu(op.M);
  if (!lu.isInvertible()) throw NumericalError("exact_solution: singular M");
  Vector z = lu.solve(-op.b);
  if (!contains(domain, z, 1e-6)) {
    throw NumericalError("exact_solution: solution outside domain (unconstrained assumption violated)");
  }
  return z;
}

Problem make_operator_problem(std::uint64_t seed, const Domain& domain, double mu_target,
                              double L_target, NoiseModel noise) {
  QuadraticOperator op = generate_operator(seed, domain, mu_target, L_target);
  Vector sol = exact_solution(op, domain);
  ProblemConstants c = constants(op, domain, noise);
  return Problem{std::move(op), domain, noise, std::nullopt, std::move(sol), std::move(c)};
}

Problem make_game_problem(std::uint64_t seed, const std::vector<std::size_t>& dims,
                          const Domain& domain, double mu_target, double coupling_strength,
                          NoiseModel noise) {
  QuadraticGame game = generate_game(seed, dims, domain, mu_target, coupling_strength);
  QuadraticOperator op = game.full_operator();
  Vector sol = exact_solution(op, domain);
  ProblemConstants c = constants(op, domain, noise, &game);
  return Problem{std::move(op), domain, noise, std::move(game), std::move(sol), std::move(c)};
}

NoiseRecord sample_record(const QuadraticOperator& op, const ProblemConstants& c,
                          const NoiseModel& noise, std::uint64_t seed) {
  Rng rng(derive_seed({seed, 0xdec0}));
  const auto d = static_cast<Eigen::Index>(op.dim());
  NoiseRecord rec;
  if (noise.kind == NoiseKind::matrix && noise.magnitude > 0.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    bool accepted = false;
    for (int attempt = 0; attempt < kRejectionBudget && !accepted; ++attempt) {
      Matrix g(d, d);
      for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
      // Skew-symmetric plus symmetric parts of a Gaussian matrix, rescaled.
      Matrix e = g / svd_norm(g) * (noise.magnitude * unif(rng));
      // Accepting E only together with −E keeps the record law symmetric,
      // hence unbiased.
      accepted = true;
      for (double sign : {1.0, -1.0}) {
        const Matrix m = op.M + sign * e;
        if (min_sym_eigenvalue(m) < 0.5 * c.mu || svd_norm(m) > 2.0 * c.L) accepted = false;
      }
      if (accepted) rec.E = std::move(e);
    }
    if (!accepted) throw NumericalError("sample_dataset: matrix-noise rejection budget exceeded");
  }
  rec.e = uniform_in_ball(rng, d, noise.magnitude);
  return rec;
}

SampledDataset sample_dataset(const Problem& problem, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample_dataset: n must be >= 1");
  SampledDataset X;
  X.base_seed = seed;
  X.noise = problem.noise;
  X.record_seeds.reserve(n);
  X.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t rs = derive_seed({seed, i});
    X.record_seeds.push_back(rs);
    X.records.push_back(sample_record(problem.op, problem.constants, problem.noise, rs));
  }
  return X;
}

SampledDataset replace_record(const Problem& problem, const SampledDataset& X, std::size_t j,
                              std::uint64_t seed) {
  if (j >= X.size()) throw InvalidArgument("replace_record: index out of range");
  SampledDataset out = X;
  out.record_seeds[j] = seed;
  out.records[j] = sample_record(problem.op, problem.constants, problem.noise, seed);
  return out;
}

QuadraticOperator sample_operator(const QuadraticOperator& op, const NoiseRecord& record) {
  QuadraticOperator out = op;
  if (record.E.size() > 0) out.M += record.E;
  if (record.e.size() > 0) out.b += record.e;
  return out;
}

QuadraticOperator empirical_operator(const QuadraticOperator& op, const SampledDataset& X) {
  QuadraticOperator out = op;
  if (X.size() == 0) return out;
  const auto d = static_cast<Eigen::Index>(op.dim());
  Matrix sum_E = Matrix::Zero(d, d);
  Vector sum_e = Vector::Zero(d);
  bool has_matrix = false;
  for (const auto& r : X.records) {
    if (r.E.size() > 0) {
      sum_E += r.E;
      has_matrix = true;
    }
    if (r.e.size() > 0) sum_e += r.e;
  }
  const double inv_n = 1.0 / static_cast<double>(X.size());
  if (has_matrix) out.M += inv_n * sum_E;
  out.b += inv_n * sum_e;
  return out;
}

}  // namespace vilab
