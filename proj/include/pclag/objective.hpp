#pragma once

#include "pclag/linalg.hpp"
#include "pclag/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>

namespace pclag {

/// Convex block objective. Subproblem solves are expressed as
///   argmin f(x) + ½xᵀKx − hᵀx
/// which covers the proximal, D-metric and residual forms alike.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;

  /// argmin f(x) + (w/2)‖x − c‖².
  virtual Vector prox(const Vector& c, double w) const = 0;

  /// argmin f(x) + ½xᵀKx − hᵀx, K symmetric PSD. Separable objectives only
  /// accept K = κI; anything else raises UnsupportedOracle.
  virtual Vector solve_quadratic(const Matrix& K, const Vector& h) const {
    const double kappa = scaled_identity_factor(K);
    if (!(kappa > 0.0))
      throw UnsupportedOracle(name() + ": closed-form solve needs a positive multiple of the identity");
    return prox(h / kappa, kappa);
  }

  virtual Vector gradient(const Vector&) const {
    throw UnsupportedOracle(name() + ": no gradient");
  }

  /// dist(g, ∂f(x)); used to check first-order optimality of subproblem outputs.
  virtual double subgradient_distance(const Vector& x, const Vector& g) const = 0;

  /// Strong-convexity modulus (0 if none) and gradient-Lipschitz constant if smooth.
  virtual double strong_convexity() const { return 0.0; }
  virtual std::optional<double> lipschitz() const { return std::nullopt; }

  virtual std::string name() const = 0;

  /// Returns κ if K = κI (relative tolerance 1e−10), NaN otherwise.
  static double scaled_identity_factor(const Matrix& K) {
    if (K.rows() != K.cols() || K.rows() == 0) return std::numeric_limits<double>::quiet_NaN();
    const double kappa = K(0, 0);
    const double tol = 1e-10 * std::max(1.0, std::abs(kappa));
    for (Index j = 0; j < K.cols(); ++j)
      for (Index i = 0; i < K.rows(); ++i)
        if (std::abs(K(i, j) - (i == j ? kappa : 0.0)) > tol)
          return std::numeric_limits<double>::quiet_NaN();
    return kappa;
  }
};

using ObjectivePtr = std::shared_ptr<const Objective>;

/// ½xᵀPx + qᵀx + c.
class Quadratic final : public Objective {
 public:
  Quadratic(Matrix P, Vector q, double constant = 0.0)
      : P_(sym_part(P)), q_(std::move(q)), c_(constant) {
    require(P_.rows() == P_.cols(), "quadratic: P must be square");
    require(P_.rows() == q_.size(), "quadratic: P and q sizes differ");
    Eigen::SelfAdjointEigenSolver<Matrix> es(P_);
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
    require(evals_.size() == 0 || evals_.minCoeff() >= -1e-10 * std::max(1.0, evals_.cwiseAbs().maxCoeff()),
            "quadratic: P must be positive semidefinite");
  }

  const Matrix& P() const { return P_; }
  const Vector& q() const { return q_; }
  double constant() const { return c_; }

  Index dim() const override { return q_.size(); }
  double value(const Vector& x) const override { return 0.5 * x.dot(P_ * x) + q_.dot(x) + c_; }
  Vector gradient(const Vector& x) const override { return P_ * x + q_; }

  Vector prox(const Vector& c, double w) const override {
    // (P + wI)x = wc − q in the eigenbasis of P
    Vector r = evecs_.transpose() * (w * c - q_);
    r.array() /= (evals_.array() + w);
    return evecs_ * r;
  }

  Vector solve_quadratic(const Matrix& K, const Vector& h) const override {
    Matrix S = P_ + K;
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success)
      throw IllPosedBlock("quadratic block: P + K is not positive definite");
    return llt.solve(h - q_);
  }

  double subgradient_distance(const Vector& x, const Vector& g) const override {
    return (gradient(x) - g).norm();
  }

  double strong_convexity() const override {
    return evals_.size() ? std::max(0.0, evals_.minCoeff()) : 0.0;
  }
  std::optional<double> lipschitz() const override {
    const double L = evals_.size() ? evals_.maxCoeff() : 0.0;
    return L > 0.0 ? std::optional<double>(L) : std::nullopt;
  }
  std::string name() const override { return "quadratic"; }

 private:
  Matrix P_;
  Vector q_;
  double c_;
  Vector evals_;
  Matrix evecs_;
};

inline double soft_threshold(double v, double t) {
  return v > t ? v - t : (v < -t ? v + t : 0.0);
}

/// μ‖x‖₁ + (σ/2)‖x‖². σ = 0 gives the plain ℓ1 norm.
class ElasticNet : public Objective {
 public:
  ElasticNet(Index n, double mu, double sigma = 0.0) : n_(n), mu_(mu), sigma_(sigma) {
    require(n >= 0, "elastic net: negative dimension");
    require(mu >= 0.0 && sigma >= 0.0, "elastic net: weights must be nonnegative");
  }

  double mu() const { return mu_; }

  Index dim() const override { return n_; }
  double value(const Vector& x) const override {
    return mu_ * x.lpNorm<1>() + 0.5 * sigma_ * x.squaredNorm();
  }
  Vector prox(const Vector& c, double w) const override {
    Vector x(c.size());
    for (Index i = 0; i < c.size(); ++i) x[i] = soft_threshold(w * c[i], mu_) / (w + sigma_);
    return x;
  }
  double subgradient_distance(const Vector& x, const Vector& g) const override {
    double s = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      const double gi = g[i] - sigma_ * x[i];
      double d;
      if (x[i] > 0) d = gi - mu_;
      else if (x[i] < 0) d = gi + mu_;
      else d = std::max(0.0, std::abs(gi) - mu_);
      s += d * d;
    }
    return std::sqrt(s);
  }
  double strong_convexity() const override { return sigma_; }
  std::string name() const override { return sigma_ > 0.0 ? "elastic_net" : "l1"; }

 private:
  Index n_;
  double mu_;
  double sigma_;
};

class L1Norm final : public ElasticNet {
 public:
  L1Norm(Index n, double mu) : ElasticNet(n, mu, 0.0) {}
};

/// Indicator of {lo ≤ x ≤ hi}.
class Box final : public Objective {
 public:
  Box(Vector lo, Vector hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    require(lo_.size() == hi_.size(), "box: bound sizes differ");
    require((lo_.array() <= hi_.array()).all(), "box: lo > hi");
  }
  Index dim() const override { return lo_.size(); }
  double value(const Vector& x) const override {
    const bool inside = ((x.array() >= lo_.array() - 1e-12) && (x.array() <= hi_.array() + 1e-12)).all();
    return inside ? 0.0 : std::numeric_limits<double>::infinity();
  }
  Vector prox(const Vector& c, double) const override { return c.cwiseMax(lo_).cwiseMin(hi_); }
  double subgradient_distance(const Vector& x, const Vector& g) const override {
    // normal cone: g_i ≤ 0 at lo, ≥ 0 at hi, 0 strictly inside
    double s = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      const bool at_lo = x[i] <= lo_[i] + 1e-14, at_hi = x[i] >= hi_[i] - 1e-14;
      double d = g[i];
      if (at_lo && at_hi) d = 0.0;
      else if (at_lo) d = std::max(0.0, g[i]);
      else if (at_hi) d = std::min(0.0, g[i]);
      s += d * d;
    }
    return std::sqrt(s);
  }
  std::string name() const override { return "box"; }

 private:
  Vector lo_, hi_;
};

/// f ≡ 0.
class Zero final : public Objective {
 public:
  explicit Zero(Index n) : n_(n) {}
  Index dim() const override { return n_; }
  double value(const Vector&) const override { return 0.0; }
  Vector prox(const Vector& c, double) const override { return c; }
  Vector solve_quadratic(const Matrix& K, const Vector& h) const override {
    Eigen::LLT<Matrix> llt(K);
    if (llt.info() != Eigen::Success) throw IllPosedBlock("zero block: K is not positive definite");
    return llt.solve(h);
  }
  Vector gradient(const Vector& x) const override { return Vector::Zero(x.size()); }
  double subgradient_distance(const Vector&, const Vector& g) const override { return g.norm(); }
  std::string name() const override { return "zero"; }

 private:
  Index n_;
};

}  // namespace pclag
