#include "support.hpp"

#include <gtest/gtest.h>

using namespace pclag;
using namespace pclag::test;

TEST(SolveLinearized, ScalarQuadratic) {
  const Quadratic f(mat(1, 1, {1}), vec({0}));
  EXPECT_NEAR(solve_linearized(f, vec({-3}), 3.0, vec({0}))[0], 0.75, 1e-15);
}

TEST(SolveLinearized, ZeroObjectiveIsGradientStep) {
  const Zero f(3);
  const Vector g = vec({1, -2, 0.5}), y = vec({0.1, 0.2, 0.3});
  EXPECT_LT(rel_dev(solve_linearized(f, g, 4.0, y), y - g / 4.0), 1e-15);
}

TEST(SolveLinearized, L1SoftThreshold) {
  const L1Norm f(2, 1.0);
  const Vector x = solve_linearized(f, Vector::Zero(2), 1.0, vec({2, -0.3}));
  EXPECT_EQ(x, vec({1, 0}));
  // 0 ∈ ∂f(x) + x − ŷ
  EXPECT_LT(f.subgradient_distance(x, vec({2, -0.3}) - x), 1e-15);
}

TEST(SolveLinearized, ResolvingAtOutputReturnsOutput) {
  const ElasticNet f(4, 0.3, 0.1);
  const Vector y = vec({1, -2, 0.05, 0.7});
  const double rho = 2.0;
  const Vector x = solve_linearized(f, Vector::Zero(4), rho, y);
  EXPECT_LT(f.subgradient_distance(x, rho * (y - x)), 1e-14);
  // centred at x, the linear term carrying the same subgradient keeps x in place
  EXPECT_LT(rel_dev(solve_linearized(f, rho * (x - y), rho, x), x), 1e-15);
}

TEST(SolveLinearized, ProximalTermShiftsCentre) {
  const Quadratic f(mat(1, 1, {2}), vec({1}));
  // 2x + 1 + g + ρ(x − ŷ) + μ(x − w) = 0
  const double g = 0.5, rho = 3, yh = 1, mu = 2, w = -1;
  const double want = (rho * yh + mu * w - g - 1) / (2 + rho + mu);
  EXPECT_NEAR(solve_linearized(f, vec({g}), rho, vec({yh}), mu, vec({w}))[0], want, 1e-15);
}

TEST(SolveResidual, Examples) {
  EXPECT_NEAR(solve_residual(Quadratic(mat(1, 1, {1}), vec({0})), mat(1, 1, {1}), 3.0, vec({1}))[0], 0.75, 1e-15);
  const Vector r = vec({0.4, -1, 2});
  EXPECT_LT(rel_dev(solve_residual(Zero(3), Matrix::Identity(3, 3), 2.0, r), r), 1e-15);
}

TEST(SolveResidual, MatchesNormalEquations) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix A = gaussian_matrix(5, 3, rng);
    const Matrix P = random_spd(3, 10.0, rng);
    const Vector q = gaussian_vector(3, rng), r = gaussian_vector(5, rng);
    const double rho = 0.5 + trial;
    const Vector want = (P + rho * A.transpose() * A).fullPivLu().solve(rho * A.transpose() * r - q);
    EXPECT_LT(rel_dev(solve_residual(Quadratic(P, q), A, rho, r), want), 1e-10);
  }
}

TEST(SolveResidual, EqualsBlockSolveWithGramMetric) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix A = gaussian_matrix(4, 6, rng);
    const Quadratic f(random_spd(6, 30.0, rng), gaussian_vector(6, rng));
    const Vector r = gaussian_vector(4, rng);
    const double rho = 1.3;
    const Matrix D = A.transpose() * A;
    const Vector a = solve_residual(f, A, rho, r);
    const Vector b = block_solve(f, -rho * A.transpose() * r, rho, Vector::Zero(6), &D, 0.0, Vector(), nullptr);
    EXPECT_LT(rel_dev(a, b), 1e-9);
  }
}

TEST(BlockSolve, MatchesDenseSolve) {
  std::mt19937_64 rng(13);
  const Quadratic f(random_spd(5, 50.0, rng), gaussian_vector(5, rng));
  const Matrix D = random_spd(5, 3.0, rng), R = random_spd(5, 2.0, rng);
  const Vector g = gaussian_vector(5, rng), y = gaussian_vector(5, rng), w = gaussian_vector(5, rng);
  const double rho = 2.0, mu = 0.7;
  const Matrix K = f.P() + rho * D + mu * R;
  const Vector want = K.fullPivLu().solve(rho * D * y + mu * R * w - g - f.q());
  EXPECT_LT(rel_dev(block_solve(f, g, rho, y, &D, mu, w, &R), want), 1e-10);
}

TEST(GramCancellation, ResidualFormDiffersByConstant) {
  // xᵀ∇φ(x̂) + (β/2)‖x − x̂‖²_{AᵀA}  vs  (β/2)‖Ax − (b + λ/β − A_rest x̂_rest)‖², single block here
  std::mt19937_64 rng(14);
  const Matrix A = gaussian_matrix(4, 6, rng);
  const Vector b = gaussian_vector(4, rng), lam = gaussian_vector(4, rng), xh = gaussian_vector(6, rng);
  const double beta = 2.7;
  const Vector grad = A.transpose() * (-lam + beta * (A * xh - b));
  auto paper = [&](const Vector& x) {
    const Vector d = A * (x - xh);
    return x.dot(grad) + 0.5 * beta * d.squaredNorm();
  };
  auto ours = [&](const Vector& x) { return 0.5 * beta * (A * x - b - lam / beta).squaredNorm(); };
  const Vector x0 = gaussian_vector(6, rng);
  const double c = paper(x0) - ours(x0);
  for (int i = 0; i < 100; ++i) {
    const Vector x = 10.0 * gaussian_vector(6, rng);
    EXPECT_NEAR(paper(x) - ours(x), c, 1e-9 * std::max(1.0, std::abs(paper(x))));
  }
}

TEST(WellPosed, RejectsSingularGramBlock) {
  const Block bad(std::make_shared<Zero>(3), mat(2, 3, {1, 0, 0, 0, 1, 0}));
  EXPECT_NO_THROW(check_block_well_posed(bad));  // non-quadratic oracles are checked at solve time
  const Block badq(std::make_shared<Quadratic>(Matrix::Zero(3, 3), Vector::Zero(3)), mat(2, 3, {1, 0, 0, 0, 1, 0}));
  EXPECT_THROW(check_block_well_posed(badq), IllPosedBlock);
}

TEST(QuadraticOptimality, SolverOutputIsStationary) {
  std::mt19937_64 rng(15);
  const Quadratic f(random_spd(4, 5.0, rng), gaussian_vector(4, rng));
  const Matrix K = random_spd(4, 2.0, rng);
  const Vector h = gaussian_vector(4, rng);
  EXPECT_LT(quadratic_optimality(f, K, h, f.solve_quadratic(K, h)), 1e-12);
}
