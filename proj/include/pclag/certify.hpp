#pragma once

#include "pclag/linalg.hpp"
#include "pclag/types.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace pclag {

struct PCMatrices {
  Matrix Q, M, H, G, H0;
  // multi-block extras (v-space): H = (1/γ)PPᵀ, M = P^{-T}N, J lower block-triangular,
  // J_bar = J^{-T} acting on the images A_i x̄_i, I_tilde = [I ... I].
  std::optional<Matrix> P, N, J, J_bar, I_tilde;
};

/// G = Qᵀ + Q − MᵀHM.
inline Matrix g_matrix(const Matrix& Q, const Matrix& M, const Matrix& H) {
  return Q.transpose() + Q - M.transpose() * H * M;
}

inline double cc1_residual(const PCMatrices& pc) { return (pc.Q - pc.H * pc.M).norm(); }

/// D for the single/two-block metrics: AᵀA or ‖A‖²I.
inline Matrix metric_matrix(Metric kind, const Matrix& A) {
  if (kind == Metric::Gram) return A.transpose() * A;
  const double s = spectral_norm(A);
  return s * s * Matrix::Identity(A.cols(), A.cols());
}

inline PCMatrices build_matrices_p1(double tau, double beta_k, double gamma, const Matrix& D,
                                    const Matrix& A) {
  require(gamma > 0.0 && gamma <= 2.0, "p1 matrices: gamma outside (0,2]");
  require(D.rows() == A.cols() && D.cols() == A.cols(), "p1 matrices: D must be n x n");
  const Index n = A.cols(), l = A.rows();
  const double tb = tau * beta_k;
  const Matrix top = tb * (D - A.transpose() * A);
  PCMatrices pc;
  pc.Q = Matrix::Zero(n + l, n + l);
  pc.Q.topLeftCorner(n, n) = top;
  pc.Q.bottomRightCorner(l, l) = Matrix::Identity(l, l) / tb;
  pc.M = Matrix::Identity(n + l, n + l);
  pc.M.bottomRightCorner(l, l) *= gamma;
  pc.H = Matrix::Zero(n + l, n + l);
  pc.H.topLeftCorner(n, n) = top;
  pc.H.bottomRightCorner(l, l) = Matrix::Identity(l, l) / (gamma * tb);
  pc.G = g_matrix(pc.Q, pc.M, pc.H);
  pc.H0 = pc.H;
  return pc;
}

inline PCMatrices build_matrices_p1(double tau, double beta_k, double gamma, Metric kind,
                                    const Matrix& A) {
  return build_matrices_p1(tau, beta_k, gamma, metric_matrix(kind, A), A);
}

inline PCMatrices build_matrices_p2(double tau, double beta_k, double gamma, const Matrix& D,
                                    const Matrix& A2) {
  require(gamma > 0.0 && gamma <= 1.0, "p2 matrices: gamma outside (0,1]");
  require(D.rows() == A2.cols() && D.cols() == A2.cols(), "p2 matrices: D must be n2 x n2");
  const Index n = A2.cols(), l = A2.rows();
  const double tb = tau * beta_k;
  PCMatrices pc;
  pc.Q = Matrix::Zero(n + l, n + l);
  pc.Q.topLeftCorner(n, n) = tb * D;
  pc.Q.bottomLeftCorner(l, n) = -A2;
  pc.Q.bottomRightCorner(l, l) = Matrix::Identity(l, l) / tb;
  pc.M = Matrix::Identity(n + l, n + l);
  pc.M.bottomLeftCorner(l, n) = -gamma * tb * A2;
  pc.M.bottomRightCorner(l, l) *= gamma;
  pc.H = Matrix::Zero(n + l, n + l);
  pc.H.topLeftCorner(n, n) = tb * D;
  pc.H.bottomRightCorner(l, l) = Matrix::Identity(l, l) / (gamma * tb);
  pc.G = g_matrix(pc.Q, pc.M, pc.H);
  pc.H0 = pc.H;
  return pc;
}

inline PCMatrices build_matrices_p2(double tau, double beta_k, double gamma, Metric kind,
                                    const Matrix& A2) {
  return build_matrices_p2(tau, beta_k, gamma, metric_matrix(kind, A2), A2);
}

/// J^{-T} on stacked l-blocks: (J^{-T}d)_i = d_i − d_{i+1}, last block unchanged.
inline Vector apply_j_inv_t(const Vector& d, Index l) {
  require(l > 0 && d.size() % l == 0, "J^{-T}: length is not a multiple of l");
  const Index blocks = d.size() / l;
  Vector out = d;
  for (Index i = 0; i + 1 < blocks; ++i) out.segment(i * l, l) -= d.segment((i + 1) * l, l);
  return out;
}

inline PCMatrices build_matrices_p3(double tau, double beta_k, double gamma, Index m, Index l) {
  require(gamma > 0.0 && gamma <= 1.0, "p3 matrices: gamma outside (0,1]");
  require(m >= 2 && l >= 1, "p3 matrices: need m >= 2 and l >= 1");
  const Index nb = (m - 1) * l, nv = nb + l;
  const double tb = tau * beta_k, rt = std::sqrt(tb);
  const Matrix Il = Matrix::Identity(l, l);

  Matrix J = Matrix::Zero(nb, nb), Jit = Matrix::Zero(nb, nb), It(l, nb);
  for (Index i = 0; i < m - 1; ++i) {
    for (Index j = 0; j <= i; ++j) J.block(i * l, j * l, l, l) = Il;
    Jit.block(i * l, i * l, l, l) = Il;
    if (i + 1 < m - 1) Jit.block(i * l, (i + 1) * l, l, l) = -Il;
    It.middleCols(i * l, l) = Il;
  }

  PCMatrices pc;
  pc.Q = Matrix::Zero(nv, nv);
  pc.Q.topLeftCorner(nb, nb) = tb * J;
  pc.Q.bottomLeftCorner(l, nb) = -It;
  pc.Q.bottomRightCorner(l, l) = Il / tb;

  Matrix P = Matrix::Zero(nv, nv);
  P.topLeftCorner(nb, nb) = rt * J;
  P.bottomRightCorner(l, l) = Il / rt;
  Matrix N = Matrix::Zero(nv, nv);
  N.topLeftCorner(nb, nb) = gamma * rt * Matrix::Identity(nb, nb);
  N.bottomLeftCorner(l, nb) = -gamma * rt * It;
  N.bottomRightCorner(l, l) = gamma * Il / rt;

  pc.M = Matrix::Zero(nv, nv);
  pc.M.topLeftCorner(nb, nb) = gamma * Jit;
  pc.M.bottomLeftCorner(l, nb) = -gamma * tb * It;
  pc.M.bottomRightCorner(l, l) = gamma * Il;
  pc.H = P * P.transpose() / gamma;
  pc.G = g_matrix(pc.Q, pc.M, pc.H);
  pc.H0 = pc.H;
  pc.P = std::move(P);
  pc.N = std::move(N);
  pc.J = std::move(J);
  pc.J_bar = std::move(Jit);
  pc.I_tilde = std::move(It);
  return pc;
}

/// Inputs of the per-step Lyapunov-transfer inequality
///   r(‖v⁺−v'‖²_H + σ‖z−z'‖²_R − ‖v−v'‖²_H + ‖v−ṽ‖²_G)
///     ≥ ‖v⁺−v'‖²_{H0⁺} − ‖v−v'‖²_{H0} + (Θ⁺ − Θ).
struct Cc3Inputs {
  const Matrix* H = nullptr;
  const Matrix* H0 = nullptr;
  const Matrix* H0_next = nullptr;
  const Matrix* G = nullptr;
  double r = 1.0;
  double sigma = 0.0;
  const Matrix* R = nullptr;  // identity when null
  Vector v, v_next, v_tilde, v_prime;
  Vector z, z_prime;
  double theta_increment = 0.0;
};

/// LHS − RHS; nonnegative when the inequality holds at this step.
inline double check_cc3_step(const Cc3Inputs& in) {
  require(in.H && in.H0 && in.H0_next && in.G, "cc3: missing matrices");
  if (in.v_prime.size() == 0) throw ReferenceRequired("cc3: no reference point v'");
  const Vector a = in.v_next - in.v_prime, c = in.v - in.v_prime, d = in.v - in.v_tilde;
  double zterm = 0.0;
  if (in.sigma != 0.0) {
    if (in.z_prime.size() == 0) throw ReferenceRequired("cc3: no reference point z'");
    const Vector e = in.z - in.z_prime;
    zterm = in.sigma * (in.R ? quad_norm(e, *in.R) : e.squaredNorm());
  }
  const double lhs = in.r * (quad_norm(a, *in.H) + zterm - quad_norm(c, *in.H) + quad_norm(d, *in.G));
  const double rhs = quad_norm(a, *in.H0_next) - quad_norm(c, *in.H0) + in.theta_increment;
  return lhs - rhs;
}

/// Coefficient c in ‖v − ṽ‖²_G ≥ c·τβ‖Ax̃ − b‖²: 2−γ for one block, 1−γ otherwise.
inline double g_bound_coefficient(ProblemKind family, double gamma) {
  return family == ProblemKind::P1 ? 2.0 - gamma : 1.0 - gamma;
}

/// Relative slack of the G-norm lower bound: (lhs − rhs)/max(1, |lhs|, |rhs|).
inline double g_norm_slack(const Vector& v, const Vector& v_tilde, const Matrix& G, double tau,
                           double beta_k, double gamma, const Vector& residual_tilde,
                           ProblemKind family) {
  const double lhs = quad_norm(v - v_tilde, G);
  const double rhs = g_bound_coefficient(family, gamma) * tau * beta_k * residual_tilde.squaredNorm();
  return (lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

inline bool g_norm_lower_bound_check(const Vector& v, const Vector& v_tilde, const Matrix& G,
                                     double tau, double beta_k, double gamma, const Matrix& A,
                                     const Vector& x_tilde, const Vector& b, ProblemKind family) {
  require(A.cols() == x_tilde.size() && A.rows() == b.size(), "g-norm bound: dimension mismatch");
  return g_norm_slack(v, v_tilde, G, tau, beta_k, gamma, A * x_tilde - b, family) >= -1e-9;
}

struct CertificateRecord {
  long k = 0;
  double cc1_residual = 0.0;
  double g_min_eig = 0.0;
  double cc3_slack = 0.0;
  double theta_increment = 0.0;
  double lyapunov_value = 0.0;  // value after the step
  // not serialized
  double q_norm = 0.0;
  double g_norm = 0.0;
  double g_bound_slack = 0.0;   // relative
  double lyapunov_prev = 0.0;   // value before the step
  double theta = 0.0;           // running sum including this step
};

/// Thresholds applied to every certified step.
struct CertificateTolerances {
  double cc1 = 1e-12;         // × (1 + ‖Q‖)
  double g_eig = 1e-10;       // × ‖G‖
  double cc3 = 1e-8;
  double g_bound = 1e-9;
  double lyapunov = 1e-8;
};

inline bool cc1_ok(const CertificateRecord& r, const CertificateTolerances& t = {}) {
  return r.cc1_residual <= t.cc1 * (1.0 + r.q_norm);
}
inline bool g_psd_ok(const CertificateRecord& r, const CertificateTolerances& t = {}) {
  return r.g_min_eig >= -t.g_eig * std::max(r.g_norm, 1e-300);
}
inline bool cc3_ok(const CertificateRecord& r, const CertificateTolerances& t = {}) {
  return r.cc3_slack >= -t.cc3;
}
inline bool g_bound_ok(const CertificateRecord& r, const CertificateTolerances& t = {}) {
  return r.g_bound_slack >= -t.g_bound;
}
inline bool lyapunov_ok(const CertificateRecord& r, const CertificateTolerances& t = {}) {
  return r.lyapunov_value - r.lyapunov_prev >= -t.lyapunov;
}

}  // namespace pclag
