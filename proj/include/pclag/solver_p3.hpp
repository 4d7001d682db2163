#pragma once

#include "pclag/method.hpp"

#include <vector>

namespace pclag {

/// Multi-block Gauss–Seidel methods in v-space. For blocks i ≥ 2 only the images
/// ȳᵢ = Aᵢx̄ᵢ are stored: every block subproblem is in residual form, so x̂ᵢ enters only
/// through Aᵢx̂ᵢ = (1−τ)Aᵢx̆ᵢ^{k−1} + τȳᵢ, and x̄₁ is never needed.
class P3Solver final : public Method {
 public:
  P3Solver(const BlockProblem& pb, SolverParams params, Variant variant, TauSchedule tau,
           PenaltySchedule pen, const InitialPoint& init = {})
      : Method(pb, params, variant, std::move(tau), pen) {
    if (pb.kind() != ProblemKind::P3) throw ConfigurationError("P3Solver needs a multi-block problem");
    if (params.metric != Metric::Gram)
      throw ConfigurationError("multi-block methods use the Gram metric only");
    if (variant == Variant::Penalty && params.rate != Rate::K)
      throw ConfigurationError("the multi-block penalty form is defined for rate k only");
    for (Index i = 0; i < pb.m(); ++i) {
      check_block_well_posed(pb.block(i));
      if (i > 0) pb.block(i).require_gram_metric();
    }
    if (params.rate == Rate::K2) {
      const Block& last = pb.block(pb.m() - 1);
      sigma2_ = multiblock_sigma2(last);
      inv_L_ = 1.0 / *last.L;
    }
    x_ = initial_x(init);
    x_prev_ = x_;
    const auto xs = pb.split(x_);
    y_bar_.resize((pb.m() - 1) * pb.l());
    for (Index i = 1; i < pb.m(); ++i) y_bar_.segment((i - 1) * pb.l(), pb.l()) = pb.block(i).A * xs[size_t(i)];
    lambda_ = variant == Variant::Penalty ? Vector::Zero(pb.l()) : initial_lambda(init);
    const double t0 = tau_(0);
    lambda_bar_ = lambda_ - params_.gamma * (1.0 - t0) * pen_.at(t0) * pb.residual(x_);
  }

  const Vector& y_bar() const { return y_bar_; }
  const Vector& lambda_bar() const { return lambda_bar_; }

  Vector v() const override { return stack(y_bar_, dual()); }
  Vector v_image() const override { return v(); }

  StepArtifacts step() override {
    StepArtifacts a;
    begin_step(a);
    const Index m = pb_.m(), l = pb_.l();
    const Vector& b = pb_.b();
    const double t = a.tau, bk = a.beta_k, g = params_.gamma;

    const auto xs = pb_.split(x_);
    const Vector res = pb_.residual(x_);
    Vector lam_hat;
    switch (variant_) {
      case Variant::Once: lam_hat = lambda_ + g * (1.0 - t) * bk * res; break;
      case Variant::Twice: lam_hat = lambda_; break;
      case Variant::Penalty: lam_hat = Vector::Zero(l); break;
    }

    // images A_i x̂_i for i ≥ 2
    std::vector<Vector> Ah(static_cast<size_t>(m));
    for (Index i = 1; i < m; ++i)
      Ah[size_t(i)] = (1.0 - t) * (pb_.block(i).A * xs[size_t(i)]) + t * y_bar_.segment((i - 1) * l, l);

    Vector tail = Vector::Zero(l);
    for (Index i = 1; i < m; ++i) tail += Ah[size_t(i)];
    Vector head = Vector::Zero(l);
    std::vector<Vector> xn(static_cast<size_t>(m));
    const Vector target = b + lam_hat / bk;
    for (Index j = 0; j < m; ++j) {
      if (j > 0) tail -= Ah[size_t(j)];
      xn[size_t(j)] = solve_residual(pb_.block(j), bk, target - head - tail);
      head += pb_.block(j).A * xn[size_t(j)];
    }

    std::vector<Vector> xt(static_cast<size_t>(m));
    for (Index i = 0; i < m; ++i) xt[size_t(i)] = bar_point(xn[size_t(i)], xs[size_t(i)], t);
    Vector y_tilde((m - 1) * l);
    for (Index i = 1; i < m; ++i) y_tilde.segment((i - 1) * l, l) = pb_.block(i).A * xt[size_t(i)];
    const Vector A1x1t = pb_.block(0).A * xt[0];
    const Vector r_tilde = A1x1t + sum_blocks(y_tilde) - b;

    a.x_tilde = pb_.join(xt);
    a.v_k = v();
    a.lambda_tilde = dual() - t * bk * (A1x1t + sum_blocks(y_bar_) - b);
    a.v_tilde = stack(y_tilde, a.lambda_tilde);

    const Vector y_old = y_bar_;
    y_bar_ -= g * apply_j_inv_t(y_bar_ - y_tilde, l);
    const Vector x_next = pb_.join(xn);
    if (variant_ == Variant::Once) {
      lambda_ -= g * t * bk * r_tilde;
    } else {
      lambda_bar_ -= g * (t * bk * sum_blocks(y_tilde - y_old) + (lambda_bar_ - a.lambda_tilde));
      if (variant_ == Variant::Twice) {
        const Vector res_next = pb_.residual(x_next);
        lambda_ -= g * ((1.0 - t) * bk * res - (1.0 - a.tau_next) * a.beta_next * res_next) +
                   g * t * bk * r_tilde;
      }
    }

    x_prev_ = std::move(x_);
    x_ = x_next;
    ++k_;

    a.v_next = v();
    a.x_next = x_;
    if (params_.rate == Rate::K2) a.z = pb_.block(m - 1).f->gradient(xn[size_t(m - 1)]);
    a.feasibility = pb_.residual(x_).norm();
    return a;
  }

  PCMatrices matrices(const StepArtifacts& a) const override {
    PCMatrices pc = build_matrices_p3(a.tau, a.beta_k, params_.gamma, pb_.m(), pb_.l());
    pc.H0 = h0(a.tau, a.beta_k);
    return pc;
  }

  Matrix h0(double tau, double beta_k) const override {
    const Index m = pb_.m(), l = pb_.l(), nb = (m - 1) * l;
    const double g = params_.gamma;
    Matrix J = Matrix::Zero(nb, nb);
    for (Index i = 0; i < m - 1; ++i)
      for (Index j = 0; j <= i; ++j) J.block(i * l, j * l, l, l).setIdentity();
    Matrix H = Matrix::Zero(nb + l, nb + l);
    if (params_.rate == Rate::K) {
      H.topLeftCorner(nb, nb) = tau * beta_k * J * J.transpose() / g;
      H.bottomRightCorner(l, l) = Matrix::Identity(l, l) / (g * tau * beta_k);
    } else {
      H.topLeftCorner(nb, nb) = beta_k * J * J.transpose() / g;
      const double d = 1.0 / (beta_k * tau * tau) + sigma2_ * (1.0 - g) / tau;
      H.bottomRightCorner(l, l) = Matrix::Identity(l, l) * (d / g);
    }
    return H;
  }

  Vector v_prime(const ReferenceSolution& ref) const override {
    const auto xs = pb_.split(ref.x_star);
    const Index l = pb_.l();
    Vector y((pb_.m() - 1) * l);
    for (Index i = 1; i < pb_.m(); ++i) y.segment((i - 1) * l, l) = pb_.block(i).A * xs[size_t(i)];
    return stack(y, ref.lambda_star);
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
      cs.sigma = inv_L_;
      cs.z = a.z;
      const Index m = pb_.m();
      cs.z_prime = pb_.block(m - 1).f->gradient(pb_.split(ref.x_star)[size_t(m - 1)]);
      const double prev = pb_.residual(a.x_prev).squaredNorm();
      cs.theta_increment =
          c * a.beta_k * (cs.g_residual_sq - a.tau / (a.tau_prev * a.tau_prev) * prev);
    }
    return cs;
  }

 private:
  const Vector& dual() const { return variant_ == Variant::Once ? lambda_ : lambda_bar_; }

  Vector sum_blocks(const Vector& y) const {
    const Index l = pb_.l();
    Vector s = Vector::Zero(l);
    for (Index i = 0; i < y.size() / l; ++i) s += y.segment(i * l, l);
    return s;
  }

  Vector y_bar_;
  Vector lambda_bar_;
  double sigma2_ = 0.0;
  double inv_L_ = 0.0;
};

namespace detail {
inline StepArtifacts checked_p3_step(P3Solver& s, Variant v) {
  if (s.variant() != v) throw ConfigurationError("step function does not match the solver's variant");
  return s.step();
}
}  // namespace detail

inline StepArtifacts step_p3_twice(P3Solver& s) { return detail::checked_p3_step(s, Variant::Twice); }
inline StepArtifacts step_p3_once(P3Solver& s) { return detail::checked_p3_step(s, Variant::Once); }
inline StepArtifacts step_p3_penalty(P3Solver& s) { return detail::checked_p3_step(s, Variant::Penalty); }

}  // namespace pclag
