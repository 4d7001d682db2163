#pragma once

#include "pclag/linalg.hpp"
#include "pclag/objective.hpp"
#include "pclag/types.hpp"

#include <algorithm>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace pclag {

struct Block {
  ObjectivePtr f;
  Matrix A;                   // l × n_i
  double sigma = 0.0;         // strong-convexity modulus
  std::optional<double> L;    // gradient-Lipschitz constant
  Matrix gram;                // AᵀA, cached

  Block(ObjectivePtr f_, Matrix A_, std::optional<double> sigma_ = std::nullopt,
        std::optional<double> L_ = std::nullopt)
      : f(std::move(f_)), A(std::move(A_)) {
    require(f != nullptr, "block: missing objective");
    require(A.cols() == f->dim(), "block: A has " + std::to_string(A.cols()) +
                                      " columns but the objective has dimension " +
                                      std::to_string(f->dim()));
    sigma = sigma_ ? *sigma_ : f->strong_convexity();
    L = L_ ? L_ : f->lipschitz();
    require(sigma >= 0.0, "block: sigma must be nonnegative");
    require(!L || *L > 0.0, "block: L must be positive");
    gram = A.transpose() * A;
  }

  Index n() const { return A.cols(); }

  /// The Gram metric AᵀA is only a metric on x when no column of A vanishes.
  void require_gram_metric() const {
    for (Index j = 0; j < A.cols(); ++j)
      if (A.col(j).squaredNorm() == 0.0)
        throw InputError("block: column " + std::to_string(j) +
                         " of A is zero, the Gram metric is degenerate");
  }
};

class BlockProblem {
 public:
  BlockProblem(std::vector<Block> blocks, Vector b, ProblemKind kind)
      : blocks_(std::move(blocks)), b_(std::move(b)), kind_(kind) {
    const auto m = blocks_.size();
    require(m >= 1, "problem: at least one block required");
    switch (kind_) {
      case ProblemKind::P1: require(m == 1, "problem: P1 has exactly one block"); break;
      case ProblemKind::P2: require(m == 2, "problem: P2 has exactly two blocks"); break;
      case ProblemKind::P3: require(m >= 2, "problem: P3 needs at least two blocks"); break;
    }
    require(b_.size() > 0, "problem: no constraints (l = 0)");
    Index off = 0;
    for (const auto& blk : blocks_) {
      require(blk.A.rows() == b_.size(), "problem: every A_i must have l = " +
                                             std::to_string(b_.size()) + " rows");
      offsets_.push_back(off);
      off += blk.n();
    }
    n_ = off;
  }

  Index m() const { return static_cast<Index>(blocks_.size()); }
  Index n() const { return n_; }
  Index l() const { return b_.size(); }
  ProblemKind kind() const { return kind_; }
  const Vector& b() const { return b_; }
  const Block& block(Index i) const { return blocks_[static_cast<size_t>(i)]; }
  const std::vector<Block>& blocks() const { return blocks_; }
  Index offset(Index i) const { return offsets_[static_cast<size_t>(i)]; }

  Matrix A() const {
    Matrix out(l(), n_);
    for (Index i = 0; i < m(); ++i) out.middleCols(offset(i), block(i).n()) = block(i).A;
    return out;
  }

  std::vector<Vector> split(const Vector& x) const {
    require(x.size() == n_, "problem: x has wrong length");
    std::vector<Vector> out;
    for (Index i = 0; i < m(); ++i) out.emplace_back(x.segment(offset(i), block(i).n()));
    return out;
  }

  Vector join(const std::vector<Vector>& xs) const {
    require(static_cast<Index>(xs.size()) == m(), "problem: wrong block count");
    Vector x(n_);
    for (Index i = 0; i < m(); ++i) {
      require(xs[static_cast<size_t>(i)].size() == block(i).n(), "problem: block size mismatch");
      x.segment(offset(i), block(i).n()) = xs[static_cast<size_t>(i)];
    }
    return x;
  }

  Vector Ax(const Vector& x) const {
    require(x.size() == n_, "problem: x has wrong length");
    Vector r = Vector::Zero(l());
    for (Index i = 0; i < m(); ++i) r += block(i).A * x.segment(offset(i), block(i).n());
    return r;
  }

  Vector residual(const Vector& x) const { return Ax(x) - b_; }

  double objective(const Vector& x) const {
    double s = 0.0;
    for (Index i = 0; i < m(); ++i) s += block(i).f->value(x.segment(offset(i), block(i).n()));
    return s;
  }

 private:
  std::vector<Block> blocks_;
  Vector b_;
  ProblemKind kind_;
  std::vector<Index> offsets_;
  Index n_ = 0;
};

struct ReferenceSolution {
  Vector x_star;
  Vector lambda_star;
  double f_star = 0.0;
  bool exact = true;  // false for references produced by a long iterative run
};

/// ∇ₓφ(x, λ) = −Aᵀλ + βAᵀ(Ax − b).
inline Vector build_phi_gradient(const BlockProblem& pb, const Vector& x, const Vector& lambda,
                                 double beta) {
  require(x.size() == pb.n(), "phi gradient: x has length " + std::to_string(x.size()) +
                                  ", expected " + std::to_string(pb.n()));
  require(lambda.size() == pb.l(), "phi gradient: lambda has wrong length");
  const Vector y = -lambda + beta * pb.residual(x);
  Vector g(pb.n());
  for (Index i = 0; i < pb.m(); ++i)
    g.segment(pb.offset(i), pb.block(i).n()) = pb.block(i).A.transpose() * y;
  return g;
}

/// min ½xᵀPx + qᵀx s.t. Ax = b via the KKT system [[P, Aᵀ], [A, 0]] [x; −λ] = [−q; b].
inline ReferenceSolution kkt_reference_qp(const Matrix& P, const Vector& q, const Matrix& A,
                                          const Vector& b) {
  require(A.rows() > 0, "kkt: no constraint rows");
  require(P.rows() == P.cols() && P.rows() == q.size() && A.cols() == q.size() &&
              A.rows() == b.size(),
          "kkt: inconsistent dimensions");
  const Index n = q.size(), l = b.size();
  Matrix K = Matrix::Zero(n + l, n + l);
  K.topLeftCorner(n, n) = P;
  K.topRightCorner(n, l) = A.transpose();
  K.bottomLeftCorner(l, n) = A;
  Vector rhs(n + l);
  rhs << -q, b;
  Eigen::FullPivLU<Matrix> lu(K);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw DegenerateInstance("kkt: singular KKT matrix");
  const Vector s = lu.solve(rhs);
  ReferenceSolution ref;
  ref.x_star = s.head(n);
  ref.lambda_star = -s.tail(l);
  ref.f_star = 0.5 * ref.x_star.dot(P * ref.x_star) + q.dot(ref.x_star);
  return ref;
}

/// KKT reference for a problem whose blocks are all quadratic; nullopt otherwise.
inline std::optional<ReferenceSolution> kkt_reference(const BlockProblem& pb) {
  Matrix P = Matrix::Zero(pb.n(), pb.n());
  Vector q(pb.n());
  double c = 0.0;
  for (Index i = 0; i < pb.m(); ++i) {
    const auto* quad = dynamic_cast<const Quadratic*>(pb.block(i).f.get());
    if (!quad) return std::nullopt;
    const Index o = pb.offset(i), ni = pb.block(i).n();
    P.block(o, o, ni, ni) = quad->P();
    q.segment(o, ni) = quad->q();
    c += quad->constant();
  }
  auto ref = kkt_reference_qp(P, q, pb.A(), pb.b());
  ref.f_star += c;
  return ref;
}

/// Largest violation of f(x') − f(x) + (u' − u)ᵀF(u) ≥ 0 over the samples,
/// with F(x, λ) = (−Aᵀλ, Ax − b).
inline double vi_residual(const BlockProblem& pb, const Vector& x, const Vector& lambda,
                          const std::vector<std::pair<Vector, Vector>>& samples) {
  require(!samples.empty(), "vi residual: empty sample set");
  require(x.size() == pb.n() && lambda.size() == pb.l(), "vi residual: dimension mismatch");
  const double fx = pb.objective(x);
  const Vector r = pb.residual(x);
  const Vector Atl = build_phi_gradient(pb, x, lambda, 0.0);  // −Aᵀλ
  double worst = 0.0;
  for (const auto& [xs, ls] : samples) {
    require(xs.size() == pb.n() && ls.size() == pb.l(), "vi residual: sample dimension mismatch");
    const double val = pb.objective(xs) - fx + (xs - x).dot(Atl) + (ls - lambda).dot(r);
    worst = std::max(worst, -val);
  }
  return worst;
}

}  // namespace pclag
