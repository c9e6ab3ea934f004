#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "vilab/errors.hpp"
#include "vilab/problems.hpp"
#include "vilab/rng.hpp"

using namespace vilab;
using testutil::mat;
using testutil::vec;

namespace {

Vector random_point(const Domain& dom, std::uint64_t seed) { return sample_uniform(dom, seed); }

// Pairs for the monotonicity and Lipschitz certificates.
template <typename Fn>
void for_random_pairs(const Domain& dom, std::uint64_t seed, int count, Fn fn) {
  for (int i = 0; i < count; ++i) {
    fn(random_point(dom, derive_seed({seed, static_cast<std::uint64_t>(i), 1})),
       random_point(dom, derive_seed({seed, static_cast<std::uint64_t>(i), 2})));
  }
}

Domain player_box(std::size_t d) {
  return Domain::box(Vector::Constant(static_cast<Eigen::Index>(d), -1.0),
                     Vector::Constant(static_cast<Eigen::Index>(d), 1.0));
}

QuadraticGame one_player(double q, double b, Domain dom) {
  return QuadraticGame({mat({{q}})}, {Matrix(1, 0)}, {vec({b})}, Domain::product({std::move(dom)}));
}

}  // namespace

TEST_CASE("evaluate examples") {
  const QuadraticOperator id{Matrix::Identity(2, 2), Vector::Zero(2)};
  CHECK(evaluate(id, vec({1, 2})) == vec({1, 2}));
  const QuadraticOperator op{mat({{2, 0}, {0, 2}}), vec({-1, 0})};
  CHECK(evaluate(op, vec({1, 1})) == vec({1, 2}));
  const Domain ball = Domain::ball(Vector::Zero(4), 1.0);
  const QuadraticOperator gen = generate_operator(3, ball, 0.5, 1.0);
  CHECK(evaluate(gen, exact_solution(gen, ball)).norm() <= 1e-10);
  CHECK_THROWS_AS(evaluate(id, vec({1})), InvalidArgument);
}

TEST_CASE("potential examples") {
  const Domain line = Domain::box(vec({-5}), vec({5}));
  CHECK(potential(one_player(2.0, -2.0, line), 0, vec({1})) == doctest::Approx(-1.0));
  CHECK(potential(one_player(2.0, 0.0, line), 0, vec({0})) == 0.0);
  CHECK_THROWS_AS(potential(one_player(2.0, 0.0, line), 1, vec({0})), InvalidArgument);
}

TEST_CASE("game construction validates its blocks") {
  const Domain line = Domain::box(vec({-1}), vec({1}));
  CHECK_THROWS_AS(one_player(-1.0, 0.0, line), InvalidArgument);
  CHECK_THROWS_AS(QuadraticGame({mat({{1, 1}, {0, 1}})}, {Matrix(2, 0)}, {vec({0, 0})},
                                Domain::product({player_box(2)})),
                  InvalidArgument);
}

TEST_CASE("generate_operator") {
  const Domain one = Domain::box(vec({-1}), vec({1}));
  const QuadraticOperator scalar = generate_operator(1, one, 1.0, 1.0);
  CHECK(std::abs(scalar.M(0, 0) - 1.0) <= 1e-12);
  CHECK_THROWS_AS(generate_operator(1, player_box(3), 2.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(generate_operator(1, one, 0.5, 1.0), InvalidArgument);

  const std::vector<Domain> domains{Domain::simplex(4), Domain::ball(vec({0.5, 0, 0}), 2.0), player_box(6),
                                    player_box(16)};
  std::uint64_t seed = 10;
  for (const Domain& dom : domains) {
    for (const auto& [mu, L] : std::vector<std::pair<double, double>>{{0.3, 1.0}, {0.9, 1.0}, {1.0, 1.0}, {0.1, 4.0}}) {
      const QuadraticOperator op = generate_operator(++seed, dom, mu, L);
      CHECK(std::abs(min_sym_eigenvalue(op.M) - mu) <= 1e-9);
      Eigen::JacobiSVD<Matrix> svd(op.M);
      CHECK(std::abs(svd.singularValues()(0) - L) <= 1e-9);
      const Vector z_star = exact_solution(op, dom);
      CHECK(interior_depth(dom, z_star) > 0.0);
      // Assumption certificates in their literal form.
      for_random_pairs(dom, seed, 1000, [&](const Vector& z, const Vector& w) {
        const Vector dF = op.evaluate(z) - op.evaluate(w);
        CHECK((z - w).dot(dF) >= (mu - 1e-9) * (z - w).squaredNorm());
        CHECK(dF.norm() <= (L + 1e-9) * (z - w).norm());
      });
    }
  }
}

TEST_CASE("generate_operator is deterministic in its seed") {
  const Domain box = player_box(5);
  const QuadraticOperator a = generate_operator(42, box, 0.4, 1.0);
  const QuadraticOperator b = generate_operator(42, box, 0.4, 1.0);
  CHECK(a.M == b.M);
  CHECK(a.b == b.b);
  CHECK(generate_operator(43, box, 0.4, 1.0).M != a.M);
}

TEST_CASE("generate_game") {
  {
    const QuadraticGame g = generate_game(5, {3}, Domain::product({player_box(3)}), 0.5, 1.0);
    const Matrix& M = g.full_operator().M;
    CHECK((M - M.transpose()).norm() <= 1e-14);
  }
  {
    const Domain dom = Domain::product({player_box(2), player_box(3), player_box(1)});
    const QuadraticGame g = generate_game(6, {2, 3, 1}, dom, 0.5, 0.0);
    const Matrix& M = g.full_operator().M;
    CHECK(M.block(0, 2, 2, 4).norm() == 0.0);
    CHECK(M.block(2, 0, 3, 2).norm() == 0.0);
    double mu_min = 1e300;
    for (std::size_t i = 0; i < 3; ++i) mu_min = std::min(mu_min, min_sym_eigenvalue(g.Q(i)));
    CHECK(min_sym_eigenvalue(M) == doctest::Approx(mu_min).epsilon(1e-12));
  }
  CHECK_THROWS_AS(generate_game(1, {2, 2}, Domain::product({player_box(2), player_box(3)}), 0.5, 1.0),
                  InvalidArgument);
  CHECK_THROWS_AS(generate_game(1, {}, Domain::product({player_box(2)}), 0.5, 1.0), InvalidArgument);
}

TEST_CASE("game invariants and conservativity by finite differences") {
  const Domain dom = Domain::product({player_box(2), player_box(2), player_box(3)});
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const QuadraticGame g = generate_game(seed, {2, 2, 3}, dom, 0.4, 2.0);
    CHECK(min_sym_eigenvalue(g.full_operator().M) >= 0.4);
    CHECK(contains(dom, exact_solution(g.full_operator(), dom), 1e-9));
    for (int trial = 0; trial < 20; ++trial) {
      const Vector z = sample_uniform(dom, derive_seed({seed, static_cast<std::uint64_t>(trial)}));
      const Vector F = g.full_operator().evaluate(z);
      for (std::size_t i = 0; i < g.players(); ++i) {
        const auto off = static_cast<Eigen::Index>(dom.factor_offset(i));
        for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(g.player_dim(i)); ++c) {
          const double h = 1e-5;
          Vector zp = z;
          Vector zm = z;
          zp(off + c) += h;
          zm(off + c) -= h;
          const double fd = (potential(g, i, zp) - potential(g, i, zm)) / (2 * h);
          CHECK(std::abs(fd - F(off + c)) <= 1e-6);
        }
      }
    }
  }
}

TEST_CASE("constants examples") {
  const Domain ball = Domain::ball(Vector::Zero(2), 1.0);
  const ProblemConstants c = constants({Matrix::Identity(2, 2), Vector::Zero(2)}, ball);
  CHECK(c.mu == doctest::Approx(1.0));
  CHECK(c.L == doctest::Approx(1.0));
  CHECK(c.K == doctest::Approx(1.0));
  CHECK(c.D == doctest::Approx(2.0));
  const ProblemConstants d = constants({mat({{2, 0}, {0, 1}}), Vector::Zero(2)}, ball);
  CHECK(d.L == doctest::Approx(2.0));
  CHECK(d.mu == doctest::Approx(1.0));
}

TEST_CASE("constants invariants and the K certificate") {
  const Domain dom = Domain::product({player_box(2), player_box(2), player_box(2)});
  const NoiseModel noise{NoiseKind::offset, 0.3};
  const Problem p = make_game_problem(9, {2, 2, 2}, dom, 0.5, 1.5, noise);
  const ProblemConstants& c = p.constants;
  CHECK(c.mu <= c.L);
  for (const auto& player : c.per_player) {
    CHECK(player.mu >= c.mu - 1e-12);
    CHECK(player.L <= c.L + 1e-12);
  }
  // Every sample operator value stays within K on vertices and random points.
  const SampledDataset X = sample_dataset(p, 50, 1);
  for (const auto& rec : X.records) {
    const QuadraticOperator s = sample_operator(p.op, rec);
    for (std::uint64_t i = 0; i < 20; ++i) CHECK(s.evaluate(sample_uniform(dom, i)).norm() <= c.K);
    CHECK(s.evaluate(Vector::Ones(6)).norm() <= c.K);
  }
}

TEST_CASE("power iteration agrees with SVD") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(7, 7);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    Eigen::JacobiSVD<Matrix> svd(m);
    CHECK(std::abs(spectral_norm(m) - svd.singularValues()(0)) <= 1e-9 * svd.singularValues()(0));
  }
}

TEST_CASE("sample_dataset") {
  const Domain box = player_box(3);
  const Problem quiet = make_operator_problem(2, box, 0.5, 1.0, {NoiseKind::offset, 0.0});
  const SampledDataset X0 = sample_dataset(quiet, 5, 7);
  for (const auto& rec : X0.records) {
    const QuadraticOperator s = sample_operator(quiet.op, rec);
    CHECK(s.M == quiet.op.M);
    CHECK(s.b == quiet.op.b);
  }
  const QuadraticOperator F_hat = empirical_operator(quiet.op, X0);
  CHECK(F_hat.M == quiet.op.M);
  CHECK(F_hat.b == quiet.op.b);

  const Problem noisy = make_operator_problem(2, box, 0.5, 1.0, {NoiseKind::offset, 0.5});
  const SampledDataset X = sample_dataset(noisy, 1000000, 11);
  Vector mean = Vector::Zero(3);
  for (const auto& rec : X.records) {
    CHECK(rec.e.norm() <= 0.5);
    mean += rec.e;
  }
  mean /= 1e6;
  CHECK(mean.norm() <= 5.0 * 0.5 / std::sqrt(1e6) * std::sqrt(3.0));

  // Record i depends only on (base_seed, i).
  const SampledDataset small = sample_dataset(noisy, 10, 11);
  for (std::size_t i = 0; i < 10; ++i) CHECK(small.records[i].e == X.records[i].e);
  CHECK_THROWS_AS(sample_dataset(noisy, 0, 1), InvalidArgument);
}

TEST_CASE("matrix noise keeps per-sample assumptions and is unbiased") {
  const Domain box = player_box(4);
  const Problem p = make_operator_problem(4, box, 0.6, 1.0, {NoiseKind::matrix, 0.3});
  const SampledDataset X = sample_dataset(p, 20000, 3);
  Matrix sum_E = Matrix::Zero(4, 4);
  Matrix sum_sq = Matrix::Zero(4, 4);
  for (std::size_t i = 0; i < X.size(); ++i) {
    const auto& rec = X.records[i];
    REQUIRE(rec.E.rows() == 4);
    sum_E += rec.E;
    sum_sq += rec.E.cwiseAbs2();
    if (i < 50) {
      CHECK(Eigen::JacobiSVD<Matrix>(rec.E).singularValues()(0) <= 0.3 + 1e-12);
      const QuadraticOperator s = sample_operator(p.op, rec);
      for_random_pairs(box, i, 50, [&](const Vector& z, const Vector& w) {
        const Vector dF = s.evaluate(z) - s.evaluate(w);
        CHECK((z - w).dot(dF) >= (0.5 * p.constants.mu - 1e-9) * (z - w).squaredNorm());
        CHECK(dF.norm() <= (2.0 * p.constants.L + 1e-9) * (z - w).norm());
      });
    }
  }
  const double n = static_cast<double>(X.size());
  const Matrix mean = sum_E / n;
  const Matrix sigma = (sum_sq / n - mean.cwiseAbs2()).cwiseSqrt();
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    CHECK(std::abs(mean.data()[i]) <= 5.0 * sigma.data()[i] / std::sqrt(n));
  }
}

TEST_CASE("empirical_operator") {
  const Domain line = Domain::box(vec({-2}), vec({2}));
  Problem p{{mat({{1}}), vec({0})}, line, {NoiseKind::offset, 1.0}, std::nullopt, vec({0}), {}};
  SampledDataset X;
  X.noise = p.noise;
  X.records = {{Matrix(), vec({1})}, {Matrix(), vec({-1})}};
  X.record_seeds = {0, 1};
  const QuadraticOperator F_hat = empirical_operator(p.op, X);
  CHECK(F_hat.evaluate(vec({0.7}))(0) == doctest::Approx(0.7));

  // Linearity: averaging record-wise evaluations matches the averaged operator.
  const Domain box = player_box(3);
  const Problem noisy = make_operator_problem(8, box, 0.5, 1.0, {NoiseKind::matrix, 0.2});
  const SampledDataset Y = sample_dataset(noisy, 64, 5);
  const QuadraticOperator avg = empirical_operator(noisy.op, Y);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Vector z = sample_uniform(box, s);
    Vector acc = Vector::Zero(3);
    for (const auto& rec : Y.records) acc += sample_operator(noisy.op, rec).evaluate(z);
    CHECK((acc / 64.0 - avg.evaluate(z)).norm() <= 1e-12);
  }
}

TEST_CASE("replace_record") {
  const Problem p = make_operator_problem(2, player_box(3), 0.5, 1.0, {NoiseKind::offset, 0.5});
  const SampledDataset X = sample_dataset(p, 3, 1);
  const SampledDataset Y = replace_record(p, X, 0, 999);
  CHECK(Y.records[0].e != X.records[0].e);
  CHECK(Y.records[1].e == X.records[1].e);
  CHECK(Y.records[2].e == X.records[2].e);
  const SampledDataset Z = replace_record(p, X, 0, 999);
  CHECK(Z.records[0].e == Y.records[0].e);
  CHECK_THROWS_AS(replace_record(p, X, 3, 1), InvalidArgument);
}

TEST_CASE("exact_solution") {
  const Domain ball = Domain::ball(Vector::Zero(2), 1.0);
  const QuadraticOperator op{Matrix::Identity(2, 2), vec({-0.1, 0})};
  const Vector z = exact_solution(op, ball);
  CHECK((z - vec({0.1, 0})).norm() <= 1e-15);
  CHECK(op.evaluate(z).norm() <= 1e-10);
  CHECK_THROWS_WITH_AS(exact_solution({Matrix::Identity(2, 2), vec({-3, 0})}, ball),
                       doctest::Contains("solution outside domain"), NumericalError);
  CHECK_THROWS_WITH_AS(exact_solution({Matrix::Zero(2, 2), vec({0, 0})}, ball), doctest::Contains("singular"),
                       NumericalError);
}
