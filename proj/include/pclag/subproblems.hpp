#pragma once

#include "pclag/objective.hpp"
#include "pclag/problem.hpp"
#include "pclag/types.hpp"

namespace pclag {

enum class SolveMode { Linearized, Exact };

/// argmin f(x) + gᵀx + (ρ/2)‖x − ŷ‖² + (μ/2)‖x − w‖², i.e. prox_f at a shifted point.
inline Vector solve_linearized(const Objective& f, const Vector& g, double rho, const Vector& y_hat,
                               double mu, const Vector& w) {
  require(rho > 0.0 && mu >= 0.0, "linearized solve: need rho > 0 and mu >= 0");
  require(g.size() == f.dim() && y_hat.size() == f.dim(), "linearized solve: dimension mismatch");
  const double weight = rho + mu;
  Vector center = rho * y_hat - g;
  if (mu > 0.0) {
    require(w.size() == f.dim(), "linearized solve: w has wrong length");
    center += mu * w;
  }
  return f.prox(center / weight, weight);
}

inline Vector solve_linearized(const Objective& f, const Vector& g, double rho, const Vector& y_hat) {
  return solve_linearized(f, g, rho, y_hat, 0.0, Vector());
}

/// argmin f(x) + (ρ/2)‖Ax − r‖² + (μ/2)‖x − w‖²_R, R = I when omitted.
inline Vector solve_residual(const Objective& f, const Matrix& A, double rho, const Vector& r,
                             double mu = 0.0, const Vector& w = Vector(),
                             const Matrix* R = nullptr, const Matrix* gram = nullptr) {
  require(rho > 0.0 && mu >= 0.0, "residual solve: need rho > 0 and mu >= 0");
  require(A.cols() == f.dim() && A.rows() == r.size(), "residual solve: dimension mismatch");
  Matrix K = rho * (gram ? *gram : Matrix(A.transpose() * A));
  Vector h = rho * (A.transpose() * r);
  if (mu > 0.0) {
    require(w.size() == f.dim(), "residual solve: w has wrong length");
    if (R) {
      K += mu * *R;
      h += mu * (*R * w);
    } else {
      K.diagonal().array() += mu;
      h += mu * w;
    }
  }
  return f.solve_quadratic(K, h);
}

inline Vector solve_residual(const Block& blk, double rho, const Vector& r, double mu = 0.0,
                             const Vector& w = Vector(), const Matrix* R = nullptr) {
  return solve_residual(*blk.f, blk.A, rho, r, mu, w, R, &blk.gram);
}

/// Well-posedness of the Gram-metric subproblem: P + ρAᵀA ≻ 0 (independent of ρ > 0).
inline void check_block_well_posed(const Block& blk) {
  const auto* quad = dynamic_cast<const Quadratic*>(blk.f.get());
  if (!quad) return;
  const Matrix S = quad->P() + blk.gram;
  const double scale = std::max(1.0, max_eig_sym(S));
  if (min_eig_sym(S) <= 1e-12 * scale)
    throw IllPosedBlock("block subproblem is not strongly convex: P + A^T A is singular");
}

/// The general D-metric subproblem
///   argmin f(x) + gᵀx + (ρ/2)‖x − ŷ‖²_D + (μ/2)‖x − w‖²_R
/// D and R given as matrices; identity when null.
inline Vector block_solve(const Objective& f, const Vector& g, double rho, const Vector& y_hat,
                          const Matrix* D, double mu, const Vector& w, const Matrix* R) {
  const Index n = f.dim();
  Matrix K = D ? Matrix(rho * *D) : Matrix(rho * Matrix::Identity(n, n));
  Vector h = (D ? Vector(*D * y_hat) : y_hat) * rho - g;
  if (mu > 0.0) {
    if (R) {
      K += mu * *R;
      h += mu * (*R * w);
    } else {
      K.diagonal().array() += mu;
      h += mu * w;
    }
  }
  return f.solve_quadratic(K, h);
}

/// First-order optimality residual of x for argmin f + ½xᵀKx − hᵀx.
inline double quadratic_optimality(const Objective& f, const Matrix& K, const Vector& h,
                                   const Vector& x) {
  return f.subgradient_distance(x, h - K * x);
}

}  // namespace pclag
