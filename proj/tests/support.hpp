#pragma once

#include "pclag.hpp"

#include <initializer_list>
#include <memory>
#include <random>

namespace pclag::test {

inline Matrix mat(Index r, Index c, std::initializer_list<double> vals) {
  Matrix M(r, c);
  auto it = vals.begin();
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) M(i, j) = *it++;
  return M;
}

inline Vector vec(std::initializer_list<double> vals) {
  Vector v(static_cast<Index>(vals.size()));
  Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

/// min ½x² s.t. x = 1: x* = 1, λ* = 1, f* = ½.
inline BlockProblem scalar_qp() {
  std::vector<Block> blocks;
  blocks.emplace_back(std::make_shared<Quadratic>(mat(1, 1, {1.0}), vec({0.0})), mat(1, 1, {1.0}));
  return BlockProblem(std::move(blocks), vec({1.0}), ProblemKind::P1);
}

inline ResolvedSetup setup(ProblemKind kind, Rate rate, double beta, double gamma = 1.0,
                           Metric metric = Metric::Gram, double sigma = 0.0, double tau_init = 0.5) {
  const auto [tr, br] = required_schedule(kind, rate);
  return {SolverParams{gamma, sigma, metric, rate}, TauSchedule(tr, tau_init), PenaltySchedule{br, beta}};
}

inline P1Solver p1(const BlockProblem& pb, Variant v, const ResolvedSetup& s, const InitialPoint& init = {}) {
  return P1Solver(pb, s.params, v, s.tau, s.penalty, init);
}

inline double rel_dev(const Vector& a, const Vector& b) { return relative_deviation(a, b); }

}  // namespace pclag::test
