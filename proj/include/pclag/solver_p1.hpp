#pragma once

#include "pclag/method.hpp"

namespace pclag {

/// Single-block accelerated methods: rate k under C1 with β^k = β/τ^k, rate k² under C2 with
/// β^k = β/(τ^k)² and a σ(1−τ)/(2τ)‖x − x^k‖² proximal term. "Once" corrects the ambient
/// multiplier each step; "twice" keeps it fixed and carries the corrections in λ̄.
class P1Solver final : public Method {
 public:
  P1Solver(const BlockProblem& pb, SolverParams params, Variant variant, TauSchedule tau,
           PenaltySchedule pen, const InitialPoint& init = {})
      : Method(pb, params, variant, std::move(tau), pen) {
    if (pb.kind() != ProblemKind::P1) throw ConfigurationError("P1Solver needs a single-block problem");
    if (variant == Variant::Penalty) throw ConfigurationError("single-block methods are once or twice");
    const Block& B = pb.block(0);
    if (params.metric == Metric::Gram) {
      B.require_gram_metric();
      check_block_well_posed(B);
    }
    D_ = metric_matrix(params.metric, B.A);
    norm_a2_ = std::pow(spectral_norm(B.A), 2);
    x_ = initial_x(init);
    x_prev_ = x_;
    x_bar_ = x_;
    lambda_ = initial_lambda(init);
    const double t0 = tau_(0);
    lambda_bar_ = lambda_ - params_.gamma * (1.0 - t0) * pen_.at(t0) * pb.residual(x_);
  }

  const Vector& x_bar() const { return x_bar_; }
  const Vector& lambda_bar() const { return lambda_bar_; }
  double norm_a2() const { return norm_a2_; }

  Vector v() const override { return stack(x_bar_, dual()); }
  Vector v_image() const override { return stack(pb_.block(0).A * x_bar_, dual()); }

  StepArtifacts step() override {
    StepArtifacts a;
    begin_step(a);
    const Block& B = pb_.block(0);
    const double t = a.tau, bk = a.beta_k, g = params_.gamma;

    const Vector x_hat = momentum_point(x_, x_prev_, t, a.tau_prev);
    const Vector res = B.A * x_ - pb_.b();
    const double lam_w = variant_ == Variant::Twice ? 1.0 : 1.0 - g;
    const Vector lam_hat = lambda_ - lam_w * (1.0 - t) * bk * res;
    const double mu = params_.rate == Rate::K2 ? params_.sigma * (1.0 - t) / t : 0.0;

    Vector x_next;
    if (params_.metric == Metric::Gram) {
      // x̂ cancels against the Gram metric: residual form around b + λ̂/β
      x_next = solve_residual(B, bk, pb_.b() + lam_hat / bk, mu, x_);
    } else {
      const Vector grad = B.A.transpose() * (-lam_hat + bk * (B.A * x_hat - pb_.b()));
      x_next = solve_linearized(*B.f, grad, bk * norm_a2_, x_hat, mu, x_);
    }

    const Vector x_bar_next = bar_point(x_next, x_, t);
    const Vector r_tilde = B.A * x_bar_next - pb_.b();
    a.x_tilde = x_bar_next;
    a.v_k = v();
    a.lambda_tilde = dual() - t * bk * r_tilde;
    a.v_tilde = stack(a.x_tilde, a.lambda_tilde);
    if (variant_ == Variant::Once)
      lambda_ -= g * t * bk * r_tilde;
    else
      lambda_bar_ -= g * t * bk * r_tilde;

    x_prev_ = std::move(x_);
    x_ = std::move(x_next);
    x_bar_ = x_bar_next;
    ++k_;

    a.v_next = v();
    a.x_next = x_;
    if (params_.rate == Rate::K2) a.z = a.x_tilde;
    a.feasibility = pb_.residual(x_).norm();
    return a;
  }

  PCMatrices matrices(const StepArtifacts& a) const override {
    PCMatrices pc = build_matrices_p1(a.tau, a.beta_k, params_.gamma, D_, pb_.block(0).A);
    pc.H0 = h0(a.tau, a.beta_k);
    return pc;
  }

  Matrix h0(double tau, double beta_k) const override {
    const Matrix& A = pb_.block(0).A;
    const Index n = A.cols(), l = A.rows();
    Matrix H = Matrix::Zero(n + l, n + l);
    const Matrix DA = D_ - pb_.block(0).gram;
    if (params_.rate == Rate::K) {
      H.topLeftCorner(n, n) = tau * beta_k * DA;
      H.bottomRightCorner(l, l) = Matrix::Identity(l, l) / (params_.gamma * tau * beta_k);
    } else {
      H.topLeftCorner(n, n) = beta_k * DA;
      H.bottomRightCorner(l, l) = Matrix::Identity(l, l) / (params_.gamma * tau * tau * beta_k);
    }
    return H;
  }

  Vector v_prime(const ReferenceSolution& ref) const override {
    return stack(ref.x_star, ref.lambda_star);
  }

  CertificateSpec certificate_spec(const StepArtifacts& a, const PCMatrices& pc,
                                   const ReferenceSolution& ref) const override {
    CertificateSpec cs;
    cs.v_prime = v_prime(ref);
    cs.H0 = pc.H0;
    cs.H0_next = h0(a.tau_next, a.beta_next);
    cs.g_residual_sq = pb_.residual(a.x_tilde).squaredNorm();
    const double c = c_coefficient();
    if (params_.rate == Rate::K) {
      cs.r = 1.0;
      cs.theta_increment = c * a.tau * a.beta_k * cs.g_residual_sq;
    } else {
      cs.r = 1.0 / a.tau;
      cs.sigma = params_.sigma;
      cs.z = a.z;
      cs.z_prime = ref.x_star;
      cs.theta_increment = c * a.beta_k * cs.g_residual_sq;
    }
    return cs;
  }

 private:
  const Vector& dual() const { return variant_ == Variant::Once ? lambda_ : lambda_bar_; }

  Matrix D_;
  double norm_a2_ = 0.0;
  Vector x_bar_;
  Vector lambda_bar_;
};

namespace detail {
inline StepArtifacts checked_p1_step(P1Solver& s, Variant v, Rate r) {
  if (s.variant() != v || s.params().rate != r)
    throw ConfigurationError("step function does not match the solver's variant/rate");
  return s.step();
}
}  // namespace detail

inline StepArtifacts step_rate1_once(P1Solver& s) { return detail::checked_p1_step(s, Variant::Once, Rate::K); }
inline StepArtifacts step_rate1_twice(P1Solver& s) { return detail::checked_p1_step(s, Variant::Twice, Rate::K); }
inline StepArtifacts step_rate2_once(P1Solver& s) { return detail::checked_p1_step(s, Variant::Once, Rate::K2); }
inline StepArtifacts step_rate2_twice(P1Solver& s) { return detail::checked_p1_step(s, Variant::Twice, Rate::K2); }

}  // namespace pclag
