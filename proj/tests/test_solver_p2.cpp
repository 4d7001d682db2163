#include "support.hpp"

#include <gtest/gtest.h>

using namespace pclag;
using namespace pclag::test;

namespace {

P2Solver p2(const BlockProblem& pb, Variant v, const ResolvedSetup& s, const InitialPoint& init = {}) {
  return P2Solver(pb, s.params, v, s.tau, s.penalty, init);
}

}  // namespace

TEST(P2Step, SaddlePointIsFixed) {
  const Instance inst = quadratic_instance({6, 5}, 4, 20.0, 1);
  const ReferenceSolution& ref = *inst.reference;
  for (Rate rate : {Rate::K, Rate::K2})
    for (Metric metric : {Metric::Gram, Metric::ScaledIdentity})
      for (Variant v : {Variant::Once, Variant::Twice}) {
        const double sigma = rate == Rate::K2 ? inst.problem->block(1).sigma : 0.0;
        P2Solver s = p2(*inst.problem, v, setup(ProblemKind::P2, rate, 0.01, 0.8, metric, sigma),
                        InitialPoint{ref.x_star, ref.lambda_star});
        for (int k = 0; k < 20; ++k) s.step();
        EXPECT_LT(rel_dev(s.x(), ref.x_star), 1e-10);
        EXPECT_LT(rel_dev(s.lambda(), ref.lambda_star), 1e-10);
      }
}

TEST(P2Penalty, MatchesTwiceFromZeroMultiplier) {
  const Instance inst = quadratic_instance({15, 10}, 8, 100.0, 2);
  for (Metric metric : {Metric::Gram, Metric::ScaledIdentity})
    for (double gamma : {1.0, 0.6}) {
      const auto st = setup(ProblemKind::P2, Rate::K, 1.0, gamma, metric);
      P2Solver tw = p2(*inst.problem, Variant::Twice, st);
      P2Solver pe = p2(*inst.problem, Variant::Penalty, st);
      for (int k = 0; k < 200; ++k) {
        step_p2_twice(tw);
        step_p2_penalty(pe);
        ASSERT_LE(rel_dev(tw.x(), pe.x()), 1e-10) << "k=" << k;
        ASSERT_EQ(tw.lambda().norm(), 0.0);
      }
    }
}

TEST(P2Penalty, GramMetricDropsExtraTerm) {
  const Instance inst = quadratic_instance({5, 4}, 3, 10.0, 3);
  P2Solver s = p2(*inst.problem, Variant::Penalty, setup(ProblemKind::P2, Rate::K, 1.0));
  EXPECT_LT((s.D() - inst.problem->block(1).gram).norm(), 1e-15);
}

TEST(P2Twice, AmbientMultiplierTelescopes) {
  // λ̄^{k} = λ^k − γ(1 − τ^k)β^k(Ax^k − b) with λ^k = λ⁰ at every k
  const Instance inst = quadratic_instance({8, 6}, 5, 30.0, 4);
  std::mt19937_64 rng(4);
  const Vector lam0 = gaussian_vector(5, rng);
  const double gamma = 0.7;
  const auto st = setup(ProblemKind::P2, Rate::K, 1.5, gamma);
  P2Solver s = p2(*inst.problem, Variant::Twice, st, InitialPoint{std::nullopt, lam0});
  for (long k = 0; k < 300; ++k) {
    s.step();
    const double t = st.tau(k + 1);
    const Vector implied = s.lambda_bar() + gamma * (1.0 - t) * st.penalty.at(t) * inst.problem->residual(s.x());
    ASSERT_LE(rel_dev(implied, lam0), 1e-9) << "k=" << k;
    ASSERT_EQ(s.lambda(), lam0);
  }
}

TEST(P2Step, CorrectionIdentityHolds) {
  const Instance inst = quadratic_instance({7, 5}, 4, 30.0, 5);
  for (Rate rate : {Rate::K, Rate::K2})
    for (Variant v : {Variant::Once, Variant::Twice}) {
      const double sigma = rate == Rate::K2 ? inst.problem->block(1).sigma : 0.0;
      const double beta = rate == Rate::K2 ? 0.01 : 1.0;
      P2Solver s = p2(*inst.problem, v, setup(ProblemKind::P2, rate, beta, 0.6, Metric::Gram, sigma));
      for (int k = 0; k < 100; ++k) {
        const StepArtifacts a = s.step();
        const PCMatrices pc = s.matrices(a);
        const Vector want = a.v_k - pc.M * (a.v_k - a.v_tilde);
        ASSERT_LE((a.v_next - want).norm(), 1e-12 * std::max(1.0, a.v_next.norm())) << "k=" << k;
      }
    }
}

TEST(P2Step, CertificatesHoldOnceVariant) {
  const Instance inst = quadratic_instance({10, 8}, 6, 50.0, 6);
  P2Solver s = p2(*inst.problem, Variant::Once, setup(ProblemKind::P2, Rate::K, 1.0, 0.8));
  double theta = 0.0;
  for (int k = 0; k < 300; ++k) {
    const CertificateRecord r = s.certify(s.step(), *inst.reference, theta);
    theta = r.theta;
    ASSERT_TRUE(cc1_ok(r) && g_psd_ok(r) && cc3_ok(r) && g_bound_ok(r)) << "k=" << k;
  }
}

TEST(P2Penalty, ElasticNetFeasibilityDecays) {
  const Instance inst = elastic_net_instance(20, 40, 0.1, 0.5, 7, 20000);
  P2Solver s = p2(*inst.problem, Variant::Penalty, setup(ProblemKind::P2, Rate::K, 1.0));
  std::vector<std::pair<double, double>> series;
  for (long k = 0; k < 3000; ++k) series.emplace_back(k + 1, s.step().feasibility);
  EXPECT_LE(fit_rate(series).slope, -0.85);
}

TEST(P2Step, ElasticNetRateK2) {
  const Instance inst = elastic_net_instance(20, 40, 0.1, 0.5, 8, 100000);
  const BlockProblem& pb = *inst.problem;
  auto st = setup(ProblemKind::P2, Rate::K2, 1.0, 1.0, Metric::Gram, pb.block(1).sigma);
  st.penalty.beta = admissible_beta(pb, st.params, st.tau, 3000).hi * (1 - 1e-9);
  P2Solver s = p2(pb, Variant::Twice, st);
  const ReferenceSolution& ref = *inst.reference;
  const double rho = 2.0 * ref.lambda_star.norm() + 1.0;
  std::vector<std::pair<double, double>> series;
  for (long k = 0; k < 3000; ++k) {
    const StepArtifacts a = s.step();
    series.emplace_back(k + 1, pb.objective(a.x_next) - ref.f_star + rho * a.feasibility);
  }
  EXPECT_LE(fit_rate(series).slope, -1.7);
}

TEST(P2Solver, RejectsWrongKind) {
  const BlockProblem pb = scalar_qp();
  EXPECT_THROW(p2(pb, Variant::Once, setup(ProblemKind::P2, Rate::K, 1.0)), ConfigurationError);
  const Instance inst = quadratic_instance({3, 3}, 2, 5.0, 9);
  EXPECT_THROW(p2(*inst.problem, Variant::Once, setup(ProblemKind::P2, Rate::K, 1.0, 1.5)), ConfigurationError);
  P2Solver s = p2(*inst.problem, Variant::Once, setup(ProblemKind::P2, Rate::K, 1.0));
  EXPECT_THROW(step_p2_penalty(s), ConfigurationError);
}
