#pragma once

#include "pclag/certify.hpp"
#include "pclag/problem.hpp"
#include "pclag/schedules.hpp"
#include "pclag/subproblems.hpp"
#include "pclag/types.hpp"

#include <optional>

namespace pclag {

/// What one iteration k → k+1 exposes to certificates and metrics.
struct StepArtifacts {
  long k = 0;
  double tau_prev = 0.0, tau = 0.0, tau_next = 0.0;  // τ^{k−1}, τ^k, τ^{k+1}
  double beta_k = 0.0, beta_next = 0.0;
  Vector x_prev;        // x^k (= x̆^{k−1})
  Vector x_next;        // x^{k+1} (= x̆^k)
  Vector x_tilde;       // x̃^k, all blocks
  Vector lambda_tilde;  // λ̃^k
  Vector v_k, v_tilde, v_next;
  Vector z;             // rate-k² certificate variable, empty otherwise
  double feasibility = 0.0;  // ‖Ax̆^k − b‖
};

/// Warm starts; zero when absent.
struct InitialPoint {
  std::optional<Vector> x0;
  std::optional<Vector> lambda0;
};

/// Family-specific ingredients of one certificate step.
struct CertificateSpec {
  double r = 1.0;
  double sigma = 0.0;
  std::optional<Matrix> R;
  Vector z, z_prime, v_prime;
  Matrix H0, H0_next;
  double theta_increment = 0.0;
  double g_residual_sq = 0.0;  // ‖Ax̃ − b‖²
};

class Method {
 public:
  Method(const BlockProblem& pb, SolverParams params, Variant variant, TauSchedule tau,
         PenaltySchedule pen)
      : pb_(pb), params_(params), variant_(variant), tau_(std::move(tau)), pen_(pen) {
    const auto [want_tau, want_beta] = required_schedule(pb.kind(), params.rate);
    if (tau_.rule() != want_tau || pen_.rule != want_beta)
      throw ConfigurationError(std::string("rate ") + std::string(to_string(params.rate)) + " on " +
                               std::string(to_string(pb.kind())) + " needs schedule " +
                               std::string(to_string(want_tau)) + " with beta_rule " +
                               std::string(to_string(want_beta)));
    if (!(params.gamma > 0.0 && params.gamma <= gamma_upper(pb.kind())))
      throw ConfigurationError("gamma outside the admissible range for this problem class");
    if (!(pen.beta > 0.0)) throw ConfigurationError("beta must be positive");
  }
  virtual ~Method() = default;
  Method(const Method&) = delete;
  Method& operator=(const Method&) = delete;

  virtual StepArtifacts step() = 0;

  long iteration() const { return k_; }
  const Vector& x() const { return x_; }            // x^k, all blocks
  const Vector& lambda() const { return lambda_; }  // ambient λ^k
  virtual Vector v() const = 0;
  /// v mapped into constraint space (blocks ≥ 2 as A_i x̄_i), for cross-family comparison.
  virtual Vector v_image() const = 0;

  virtual PCMatrices matrices(const StepArtifacts& a) const = 0;
  virtual CertificateSpec certificate_spec(const StepArtifacts& a, const PCMatrices& pc,
                                           const ReferenceSolution& ref) const = 0;
  virtual Vector v_prime(const ReferenceSolution& ref) const = 0;
  /// H₀ at the step whose schedule values are (τ, β^k).
  virtual Matrix h0(double tau, double beta_k) const = 0;

  const BlockProblem& problem() const { return pb_; }
  const SolverParams& params() const { return params_; }
  Variant variant() const { return variant_; }
  const TauSchedule& tau_schedule() const { return tau_; }
  const PenaltySchedule& penalty() const { return pen_; }

  /// c in the Lyapunov penalty term and Θ increments.
  double c_coefficient() const { return g_bound_coefficient(pb_.kind(), params_.gamma); }

  /// (1/τ^{k−1})^p [S^k − (c/2)β^{k−1}‖Ax^k − b‖²] − ½‖v^k − v'‖²_{H₀^k}, p = 1 (rate k) or 2.
  double lyapunov(long k, const Vector& x, const Vector& v, const ReferenceSolution& ref) const {
    const double tp = tau_(k - 1);
    const Vector res = pb_.residual(x);
    const double S = ref.f_star - pb_.objective(x) + ref.lambda_star.dot(res);
    const double w = params_.rate == Rate::K ? 1.0 / tp : 1.0 / (tp * tp);
    const double t = tau_(k);
    return w * (S - 0.5 * c_coefficient() * pen_.at(tp) * res.squaredNorm()) -
           0.5 * quad_norm(v - v_prime(ref), h0(t, pen_.at(t)));
  }

  /// Evaluates CC1, G ⪰ 0, CC3, the G-norm bound and the Lyapunov step for one artifact set.
  CertificateRecord certify(const StepArtifacts& a, const ReferenceSolution& ref,
                            double theta_before = 0.0) const {
    if (ref.x_star.size() != pb_.n() || ref.lambda_star.size() != pb_.l())
      throw ReferenceRequired("certificate: reference solution missing or mis-sized");
    const PCMatrices pc = matrices(a);
    const CertificateSpec cs = certificate_spec(a, pc, ref);
    CertificateRecord rec;
    rec.k = a.k;
    rec.cc1_residual = cc1_residual(pc);
    rec.q_norm = pc.Q.norm();
    const Matrix Gs = sym_part(pc.G);
    rec.g_min_eig = min_eig_sym(Gs);
    rec.g_norm = std::max(std::abs(rec.g_min_eig), std::abs(max_eig_sym(Gs)));

    Cc3Inputs in;
    in.H = &pc.H;
    in.H0 = &cs.H0;
    in.H0_next = &cs.H0_next;
    in.G = &pc.G;
    in.r = cs.r;
    in.sigma = cs.sigma;
    in.R = cs.R ? &*cs.R : nullptr;
    in.v = a.v_k;
    in.v_next = a.v_next;
    in.v_tilde = a.v_tilde;
    in.v_prime = cs.v_prime;
    in.z = cs.z;
    in.z_prime = cs.z_prime;
    in.theta_increment = cs.theta_increment;
    rec.cc3_slack = check_cc3_step(in);
    rec.theta_increment = cs.theta_increment;
    rec.theta = theta_before + cs.theta_increment;

    const double lhs = quad_norm(a.v_k - a.v_tilde, pc.G);
    const double rhs = c_coefficient() * a.tau * a.beta_k * cs.g_residual_sq;
    rec.g_bound_slack = (lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});

    rec.lyapunov_prev = lyapunov(a.k, a.x_prev, a.v_k, ref);
    rec.lyapunov_value = lyapunov(a.k + 1, a.x_next, a.v_next, ref);
    return rec;
  }

 protected:
  /// Fills the schedule fields shared by every family.
  void begin_step(StepArtifacts& a) const {
    a.k = k_;
    a.tau_prev = tau_(k_ - 1);
    a.tau = tau_(k_);
    a.tau_next = tau_(k_ + 1);
    a.beta_k = pen_.at(a.tau);
    a.beta_next = pen_.at(a.tau_next);
    a.x_prev = x_;
  }

  Vector initial_x(const InitialPoint& init) const {
    if (!init.x0) return Vector::Zero(pb_.n());
    require(init.x0->size() == pb_.n(), "initial x has wrong length");
    return *init.x0;
  }
  Vector initial_lambda(const InitialPoint& init) const {
    if (!init.lambda0) return Vector::Zero(pb_.l());
    require(init.lambda0->size() == pb_.l(), "initial lambda has wrong length");
    return *init.lambda0;
  }

  const BlockProblem& pb_;
  SolverParams params_;
  Variant variant_;
  TauSchedule tau_;
  PenaltySchedule pen_;

  long k_ = 0;
  Vector x_;       // x^k
  Vector x_prev_;  // x^{k−1}
  Vector lambda_;  // λ^k
};

/// x̂ = x^k + τ^k(1 − τ^{k−1})/τ^{k−1}·(x^k − x^{k−1}).
inline Vector momentum_point(const Vector& x, const Vector& x_prev, double tau, double tau_prev) {
  return x + (tau * (1.0 - tau_prev) / tau_prev) * (x - x_prev);
}

/// x̄^{k+1} = x^{k+1}/τ − (1 − τ)x^k/τ.
inline Vector bar_point(const Vector& x_next, const Vector& x, double tau) {
  return (x_next - (1.0 - tau) * x) / tau;
}

}  // namespace pclag
