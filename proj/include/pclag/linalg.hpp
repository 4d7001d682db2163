#pragma once

#include "pclag/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace pclag {

inline Vector stack(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

/// ‖v‖²_M = vᵀMv (M need not be PSD).
inline double quad_norm(const Vector& v, const Matrix& M) { return v.dot(M * v); }

inline Matrix sym_part(const Matrix& M) { return 0.5 * (M + M.transpose()); }

inline double min_eig_sym(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym_part(M), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double max_eig_sym(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym_part(M), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

/// Spectral norm by power iteration on the smaller Gram product.
inline double spectral_norm(const Matrix& A, double tol = 1e-10, int max_iter = 5000) {
  if (A.size() == 0) return 0.0;
  const bool use_rows = A.rows() < A.cols();
  const Matrix G = use_rows ? Matrix(A * A.transpose()) : Matrix(A.transpose() * A);
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> nd;
  Vector v(G.rows());
  for (Index i = 0; i < v.size(); ++i) v[i] = nd(rng);
  v.normalize();
  // stop on the eigen-residual ‖Gv − λv‖ ≤ tol·λ; the Rayleigh quotient error is then O(tol²)
  double lam = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Vector w = G * v;
    lam = v.dot(w);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    if ((w - lam * v).norm() <= tol * std::abs(lam)) break;
    v = w / nw;
  }
  return std::sqrt(std::max(lam, 0.0));
}

// Plain-text matrix format: a header line "rows cols" followed by rows*cols
// whitespace-separated values in row-major order. Vectors are n x 1 matrices.

inline Matrix read_matrix(std::istream& in) {
  long rows = -1, cols = -1;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0)
    throw InputError("matrix: bad header, expected \"rows cols\"");
  Matrix M(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j)
      if (!(in >> M(i, j)))
        throw InputError("matrix: expected " + std::to_string(rows * cols) + " values");
  return M;
}

inline void write_matrix(std::ostream& out, const Matrix& M) {
  out << M.rows() << ' ' << M.cols() << '\n';
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) out << ' ';
      out << std::setprecision(17) << M(i, j);
    }
    out << '\n';
  }
}

inline Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open matrix file: " + path);
  return read_matrix(in);
}

inline Vector read_vector_file(const std::string& path) {
  Matrix M = read_matrix_file(path);
  if (M.cols() != 1 && M.rows() != 1) throw InputError("expected a vector in " + path);
  return M.cols() == 1 ? Vector(M.col(0)) : Vector(M.row(0).transpose());
}

inline void write_matrix_file(const std::string& path, const Matrix& M) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write matrix file: " + path);
  write_matrix(out, M);
}

}  // namespace pclag
