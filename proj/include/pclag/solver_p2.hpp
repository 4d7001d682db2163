#pragma once

#include "pclag/method.hpp"

namespace pclag {

/// Two-block methods. x₁ is always solved in residual form (A₁ᵀA₁ metric); x₂ uses the D
/// metric (A₂ᵀA₂ or ‖A₂‖²I) plus, at rate k², a σ(1−τ)/(2τ)‖x₂ − x₂^k‖²_{D/σmax(D)} term.
/// Penalty is the λ-free twice recursion with the explicit ‖x₂ − x̂₂‖²_{D−A₂ᵀA₂} term.
class P2Solver final : public Method {
 public:
  P2Solver(const BlockProblem& pb, SolverParams params, Variant variant, TauSchedule tau,
           PenaltySchedule pen, const InitialPoint& init = {})
      : Method(pb, params, variant, std::move(tau), pen) {
    if (pb.kind() != ProblemKind::P2) throw ConfigurationError("P2Solver needs a two-block problem");
    check_block_well_posed(pb.block(0));
    const Block& B2 = pb.block(1);
    if (params.metric == Metric::Gram) B2.require_gram_metric();
    D_ = metric_matrix(params.metric, B2.A);
    smax_ = std::pow(spectral_norm(B2.A), 2);
    x_ = initial_x(init);
    x_prev_ = x_;
    x2_bar_ = x2(x_);
    lambda_ = variant == Variant::Penalty ? Vector::Zero(pb.l()) : initial_lambda(init);
    const double t0 = tau_(0);
    lambda_bar_ = lambda_ - params_.gamma * (1.0 - t0) * pen_.at(t0) * pb.residual(x_);
  }

  const Vector& x2_bar() const { return x2_bar_; }
  const Vector& lambda_bar() const { return lambda_bar_; }
  const Matrix& D() const { return D_; }

  Vector v() const override { return stack(x2_bar_, dual()); }
  Vector v_image() const override { return stack(pb_.block(1).A * x2_bar_, dual()); }

  StepArtifacts step() override {
    StepArtifacts a;
    begin_step(a);
    const Block &B1 = pb_.block(0), &B2 = pb_.block(1);
    const Vector& b = pb_.b();
    const double t = a.tau, bk = a.beta_k, g = params_.gamma;

    const Vector x1 = x_.head(B1.n()), x2k = x2(x_);
    const Vector x2_hat = momentum_point(x2k, x2(x_prev_), t, a.tau_prev);
    const Vector res = pb_.residual(x_);
    Vector lam_hat;
    switch (variant_) {
      case Variant::Once: lam_hat = lambda_ + g * (1.0 - t) * bk * res; break;
      case Variant::Twice: lam_hat = lambda_; break;
      case Variant::Penalty: lam_hat = Vector::Zero(pb_.l()); break;
    }
    const double mu = params_.rate == Rate::K2 ? params_.sigma * (1.0 - t) / t : 0.0;
    const Vector A2x2h = B2.A * x2_hat;

    const Vector x1_next = solve_residual(B1, bk, b + lam_hat / bk - A2x2h);
    const Vector A1x1n = B1.A * x1_next;
    Vector x2_next;
    if (variant_ == Variant::Penalty) {
      Matrix K = (bk + mu / smax_) * D_;
      Vector h = bk * (B2.A.transpose() * (b - A1x1n)) + bk * ((D_ - B2.gram) * x2_hat);
      if (mu > 0.0) h += (mu / smax_) * (D_ * x2k);
      x2_next = B2.f->solve_quadratic(K, h);
    } else {
      const Vector grad = B2.A.transpose() * (-lam_hat + bk * (A1x1n + A2x2h - b));
      x2_next = block_solve(*B2.f, grad, bk, x2_hat, &D_, mu / smax_, x2k, &D_);
    }

    const Vector x1_tilde = bar_point(x1_next, x1, t);
    const Vector x2_tilde = bar_point(x2_next, x2k, t);
    const Vector A1x1t = B1.A * x1_tilde;
    const Vector r_tilde = A1x1t + B2.A * x2_tilde - b;

    a.x_tilde = stack(x1_tilde, x2_tilde);
    a.v_k = v();
    a.lambda_tilde = dual() - t * bk * (A1x1t + B2.A * x2_bar_ - b);
    a.v_tilde = stack(x2_tilde, a.lambda_tilde);
    if (variant_ == Variant::Once)
      lambda_ -= g * t * bk * r_tilde;
    else
      lambda_bar_ -= g * t * bk * r_tilde;

    x_prev_ = std::move(x_);
    x_ = stack(x1_next, x2_next);
    x2_bar_ = x2_tilde;
    ++k_;

    a.v_next = v();
    a.x_next = x_;
    if (params_.rate == Rate::K2) a.z = x2_tilde;
    a.feasibility = pb_.residual(x_).norm();
    return a;
  }

  PCMatrices matrices(const StepArtifacts& a) const override {
    PCMatrices pc = build_matrices_p2(a.tau, a.beta_k, params_.gamma, D_, pb_.block(1).A);
    pc.H0 = h0(a.tau, a.beta_k);
    return pc;
  }

  Matrix h0(double tau, double beta_k) const override {
    const Index n2 = D_.rows(), l = pb_.l();
    Matrix H = Matrix::Zero(n2 + l, n2 + l);
    const double top = params_.rate == Rate::K ? tau * beta_k : beta_k;
    const double lam = params_.rate == Rate::K ? params_.gamma * tau * beta_k
                                               : params_.gamma * tau * tau * beta_k;
    H.topLeftCorner(n2, n2) = top * D_;
    H.bottomRightCorner(l, l) = Matrix::Identity(l, l) / lam;
    return H;
  }

  Vector v_prime(const ReferenceSolution& ref) const override {
    return stack(x2(ref.x_star), ref.lambda_star);
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
      cs.theta_increment = c * a.tau * a.beta_k * cs.g_residual_sq;
    } else {
      cs.r = 1.0 / a.tau;
      cs.sigma = params_.sigma;
      cs.R = D_ / smax_;
      cs.z = a.z;
      cs.z_prime = x2(ref.x_star);
      cs.theta_increment = c * a.beta_k * cs.g_residual_sq;
    }
    return cs;
  }

 private:
  Vector x2(const Vector& x) const { return x.tail(pb_.block(1).n()); }
  const Vector& dual() const { return variant_ == Variant::Once ? lambda_ : lambda_bar_; }

  Matrix D_;
  double smax_ = 0.0;  // σmax(D) = ‖A₂‖² for both metrics
  Vector x2_bar_;
  Vector lambda_bar_;
};

namespace detail {
inline StepArtifacts checked_p2_step(P2Solver& s, Variant v) {
  if (s.variant() != v) throw ConfigurationError("step function does not match the solver's variant");
  return s.step();
}
}  // namespace detail

inline StepArtifacts step_p2_twice(P2Solver& s) { return detail::checked_p2_step(s, Variant::Twice); }
inline StepArtifacts step_p2_once(P2Solver& s) { return detail::checked_p2_step(s, Variant::Once); }
inline StepArtifacts step_p2_penalty(P2Solver& s) { return detail::checked_p2_step(s, Variant::Penalty); }

}  // namespace pclag
