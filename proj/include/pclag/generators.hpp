#pragma once

#include "pclag/objective.hpp"
#include "pclag/problem.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

namespace pclag {

// Seeded instance generators. All draws come from one std::mt19937_64 stream in a fixed
// order, so an (instance, sizes, seed) triple reproduces bit-for-bit with the same stdlib.

struct Instance {
  std::shared_ptr<const BlockProblem> problem;
  std::optional<ReferenceSolution> reference;
};

inline Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = nd(rng);
  return M;
}

inline Vector gaussian_vector(Index n, std::mt19937_64& rng) { return gaussian_matrix(n, 1, rng).col(0); }

/// Random SPD matrix with eigenvalues evenly spaced in [1, cond].
inline Matrix random_spd(Index n, double cond, std::mt19937_64& rng) {
  const Matrix G = gaussian_matrix(n, n, rng);
  const Matrix U = Eigen::HouseholderQR<Matrix>(G).householderQ();
  const Vector ev = n > 1 ? Vector(Vector::LinSpaced(n, 1.0, cond)) : Vector::Constant(1, 1.0);
  return U * ev.asDiagonal() * U.transpose();
}

inline Block random_quadratic_block(Index n, Index l, double cond, std::mt19937_64& rng) {
  Matrix P = random_spd(n, cond, rng);
  Vector q = gaussian_vector(n, rng);
  Matrix A = gaussian_matrix(l, n, rng);
  return Block(std::make_shared<Quadratic>(std::move(P), std::move(q)), std::move(A));
}

/// Quadratic blocks sharing one coupling constraint Σ A_i x_i = b. One size gives P1,
/// two give P2, three or more give P3 (force_multi makes two blocks P3 as well).
inline Instance quadratic_instance(const std::vector<Index>& sizes, Index l, double cond,
                                   std::uint64_t seed, bool force_multi = false) {
  require(!sizes.empty(), "generator: no block sizes");
  std::mt19937_64 rng(seed);
  std::vector<Block> blocks;
  for (Index n : sizes) {
    require(n > 0, "generator: block sizes must be positive");
    blocks.push_back(random_quadratic_block(n, l, cond, rng));
  }
  Vector b = gaussian_vector(l, rng);
  ProblemKind kind = sizes.size() == 1 ? ProblemKind::P1
                     : (sizes.size() == 2 && !force_multi) ? ProblemKind::P2
                                                            : ProblemKind::P3;
  auto pb = std::make_shared<const BlockProblem>(std::move(blocks), std::move(b), kind);
  return {pb, kkt_reference(*pb)};
}

/// min ½‖Cx − d‖² + μ‖x‖₁ + (σ/2)‖x‖² by proximal gradient, fixed iteration count.
inline Vector elastic_net_reference(const Matrix& C, const Vector& d, double mu, double sigma,
                                    long iters = 100000) {
  const Matrix CtC = C.transpose() * C;
  const Vector Ctd = C.transpose() * d;
  const double L = max_eig_sym(CtC);
  const ElasticNet reg(C.cols(), mu, sigma);
  Vector x = Vector::Zero(C.cols());
  for (long it = 0; it < iters; ++it) x = reg.prox(x - (CtC * x - Ctd) / L, L);
  return x;
}

/// Split elastic net: f₁ = ½‖Cx₁ − d‖², f₂ = μ‖x₂‖₁ + (σ/2)‖x₂‖², x₁ − x₂ = 0.
inline Instance elastic_net_instance(Index n, Index rows, double mu, double sigma, std::uint64_t seed,
                                     long reference_iters = 100000) {
  std::mt19937_64 rng(seed);
  Matrix C = gaussian_matrix(rows, n, rng);
  Vector d = gaussian_vector(rows, rng);
  const Matrix I = Matrix::Identity(n, n);
  std::vector<Block> blocks;
  blocks.emplace_back(std::make_shared<Quadratic>(C.transpose() * C, -(C.transpose() * d), 0.5 * d.squaredNorm()), I);
  blocks.emplace_back(std::make_shared<ElasticNet>(n, mu, sigma), -I);
  auto pb = std::make_shared<const BlockProblem>(std::move(blocks), Vector::Zero(n), ProblemKind::P2);

  ReferenceSolution ref;
  const Vector xs = elastic_net_reference(C, d, mu, sigma, reference_iters);
  ref.x_star = stack(xs, xs);
  ref.lambda_star = C.transpose() * (C * xs - d);
  ref.f_star = pb->objective(ref.x_star);
  ref.exact = false;
  return {pb, ref};
}

}  // namespace pclag
