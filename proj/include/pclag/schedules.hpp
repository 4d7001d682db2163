#pragma once

#include "pclag/linalg.hpp"
#include "pclag/problem.hpp"
#include "pclag/types.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace pclag {

enum class TauRule { C1, C2 };
enum class BetaRule { OverTau, OverTauSq, Constant };

constexpr std::string_view to_string(TauRule r) { return r == TauRule::C1 ? "c1" : "c2"; }
constexpr std::string_view to_string(BetaRule r) {
  switch (r) {
    case BetaRule::OverTau: return "over_tau";
    case BetaRule::OverTauSq: return "over_tau_sq";
    case BetaRule::Constant: return "const";
  }
  return "?";
}

/// 1/τ_{k−1} = (1 − τ_k)/τ_k. Templated so exact arithmetic types can be used.
template <class T>
T next_tau_c1(const T& t) {
  return t / (T(1) + t);
}

inline void check_tau(double t) {
  if (!(t > 0.0 && t < 1.0)) throw InputError("tau must lie in (0,1), got " + std::to_string(t));
}

/// Positive root of τ²/t² + τ − 1 = 0, written without cancellation.
inline double next_tau_c2(double t) { return 2.0 / (1.0 + std::sqrt(1.0 + 4.0 / (t * t))); }

inline double next_tau(TauRule rule, double t) {
  check_tau(t);
  return rule == TauRule::C1 ? next_tau_c1(t) : next_tau_c2(t);
}

/// τ^k for k ≥ −1, with τ^{−1} = tau_init.
class TauSchedule {
 public:
  explicit TauSchedule(TauRule rule = TauRule::C1, double tau_init = 0.5)
      : rule_(rule), init_(tau_init) {
    check_tau(tau_init);
  }
  TauSchedule(const TauSchedule& o) : rule_(o.rule_), init_(o.init_) {}
  TauSchedule& operator=(const TauSchedule& o) {
    if (this != &o) {
      std::lock_guard lk(mu_);
      rule_ = o.rule_;
      init_ = o.init_;
      cache_.clear();
    }
    return *this;
  }

  TauRule rule() const { return rule_; }
  double tau_init() const { return init_; }

  double operator()(long k) const {
    if (k < -1) throw InputError("tau index below -1");
    if (k == -1) return init_;
    if (rule_ == TauRule::C1) return init_ / (1.0 + static_cast<double>(k + 1) * init_);
    std::lock_guard lk(mu_);
    if (cache_.empty()) cache_.push_back(next_tau_c2(init_));
    while (static_cast<long>(cache_.size()) <= k) cache_.push_back(next_tau_c2(cache_.back()));
    return cache_[static_cast<size_t>(k)];
  }

 private:
  TauRule rule_;
  double init_;
  mutable std::mutex mu_;
  mutable std::vector<double> cache_;
};

struct PenaltySchedule {
  BetaRule rule = BetaRule::OverTau;
  double beta = 1.0;

  double at(double tau) const { return beta_at(*this, tau); }

  friend double beta_at(const PenaltySchedule& s, double tau) {
    switch (s.rule) {
      case BetaRule::OverTau: return s.beta / tau;
      case BetaRule::OverTauSq: return s.beta / (tau * tau);
      case BetaRule::Constant: return s.beta;
    }
    return s.beta;
  }
};

struct SolverParams {
  double gamma = 1.0;
  double sigma = 0.0;
  Metric metric = Metric::Gram;
  Rate rate = Rate::K;
};

struct ConditionReport {
  std::string condition;  // gamma-range, schedule-rule, linearized-growth, ...
  long k = 0;             // first violated index (−1 for static conditions)
  double lhs = 0.0;
  double rhs = 0.0;
  std::string detail;
};

inline std::string describe(const ConditionReport& r) {
  std::ostringstream os;
  os << r.condition;
  if (r.k >= 0) os << " violated at k=" << r.k << " (lhs " << r.lhs << " < rhs " << r.rhs << ")";
  if (!r.detail.empty()) os << ": " << r.detail;
  return os.str();
}

/// σ'' of the multi-block rate-k² condition: σ' = σmin(A_m A_mᵀ)/L, σ'' = σ' − σ'²/(σ'+1).
inline double multiblock_sigma2(const Block& last) {
  if (!last.L) throw ModulusRequired("multi-block rate k2 needs the last block's gradient-Lipschitz constant L");
  const double smin = min_eig_sym(last.A * last.A.transpose());
  const double s1 = std::max(0.0, smin) / *last.L;
  return s1 - s1 * s1 / (s1 + 1.0);
}

/// Expected schedule pairing per problem/rate.
inline std::pair<TauRule, BetaRule> required_schedule(ProblemKind kind, Rate rate) {
  if (rate == Rate::K) return {TauRule::C1, BetaRule::OverTau};
  return {TauRule::C2, kind == ProblemKind::P3 ? BetaRule::Constant : BetaRule::OverTauSq};
}

inline double gamma_upper(ProblemKind kind) { return kind == ProblemKind::P1 ? 2.0 : 1.0; }

/// Evaluates every inequality the chosen method relies on for k = 0..horizon.
/// Returns one report per violated condition (first offending k).
inline std::vector<ConditionReport> validate_params(const BlockProblem& pb, const SolverParams& p,
                                                    const TauSchedule& tau,
                                                    const PenaltySchedule& pen, long horizon) {
  require(horizon >= 1, "validate: horizon must be at least 1");
  std::vector<ConditionReport> out;
  const ProblemKind kind = pb.kind();

  const double gmax = gamma_upper(kind);
  if (!(p.gamma > 0.0 && p.gamma <= gmax)) {
    std::ostringstream os;
    os << "gamma=" << p.gamma << " outside (0," << gmax << "]";
    out.push_back({"gamma-range", -1, p.gamma, gmax, os.str()});
  }
  if (!(pen.beta > 0.0)) out.push_back({"beta-positive", -1, pen.beta, 0.0, "beta must be > 0"});
  if (p.sigma < 0.0) out.push_back({"sigma-nonnegative", -1, p.sigma, 0.0, "sigma must be >= 0"});

  const auto [want_tau, want_beta] = required_schedule(kind, p.rate);
  if (tau.rule() != want_tau || pen.rule != want_beta) {
    std::ostringstream os;
    os << "rate " << to_string(p.rate) << " on " << to_string(kind) << " needs schedule "
       << to_string(want_tau) << " with beta_rule " << to_string(want_beta);
    out.push_back({"schedule-rule", -1, 0.0, 0.0, os.str()});
  }
  if (kind == ProblemKind::P3 && p.metric != Metric::Gram)
    out.push_back({"metric", -1, 0.0, 0.0, "multi-block methods use the Gram metric only"});
  if (p.rate == Rate::K || !out.empty()) return out;

  const double beta = pen.beta;
  auto scan = [&](const std::string& name, auto&& lhs_rhs) {
    for (long k = 0; k <= horizon; ++k) {
      const auto [lhs, rhs] = lhs_rhs(tau(k), tau(k + 1));
      if (lhs < rhs * (1.0 - 1e-14)) {
        out.push_back({name, k, lhs, rhs, ""});
        return;
      }
    }
  };

  const Block& last = pb.block(pb.m() - 1);
  if (kind != ProblemKind::P3 && p.sigma > last.sigma * (1.0 + 1e-12) + 1e-15) {
    std::ostringstream os;
    os << "method sigma " << p.sigma << " exceeds the block modulus " << last.sigma;
    out.push_back({"sigma-exceeds-modulus", -1, last.sigma, p.sigma, os.str()});
  }

  switch (kind) {
    case ProblemKind::P1:
      if (p.metric == Metric::ScaledIdentity) {
        const double a2 = std::pow(spectral_norm(last.A), 2);
        scan("linearized-growth", [&](double t, double tn) {
          return std::pair{beta * a2 / (t * t) + p.sigma / t, beta * a2 / (tn * tn)};
        });
      }
      break;
    case ProblemKind::P2: {
      const double smax = std::pow(spectral_norm(last.A), 2);  // σmax(D) for both metrics
      scan("two-block-growth", [&](double t, double tn) {
        return std::pair{(beta / t + p.sigma / smax) / t, beta / (tn * tn)};
      });
      break;
    }
    case ProblemKind::P3: {
      const double s2 = multiblock_sigma2(last);
      const double g = p.gamma;
      scan("multi-block-growth", [&](double t, double tn) {
        return std::pair{1.0 / (beta * t * t) + s2 / t, 1.0 / (beta * tn * tn) + s2 * (1.0 - g) / tn};
      });
      if ((1.0 - g) * beta > 1.0)
        out.push_back({"relaxation-penalty-bound", -1, 1.0, (1.0 - g) * beta,
                       "(1-gamma)*beta must not exceed 1"});
      break;
    }
  }
  return out;
}

/// Admissible β interval for the rate-k² growth conditions over k = 0..horizon.
/// P1 (scaled identity) and P2 give an upper bound, P3 a lower bound.
struct BetaRange {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
};

inline BetaRange admissible_beta(const BlockProblem& pb, const SolverParams& p,
                                 const TauSchedule& tau, long horizon) {
  BetaRange r;
  if (p.rate == Rate::K) return r;
  const Block& last = pb.block(pb.m() - 1);
  if (pb.kind() == ProblemKind::P3) {
    const double s2 = multiblock_sigma2(last);
    for (long k = 0; k <= horizon; ++k) {
      const double t = tau(k), tn = tau(k + 1);
      // (1/β)(1/tn² − 1/t²) ≤ σ''/t − σ''(1−γ)/tn
      const double room = s2 / t - s2 * (1.0 - p.gamma) / tn;
      const double need = 1.0 / (tn * tn) - 1.0 / (t * t);
      if (room <= 0.0) return {std::numeric_limits<double>::infinity(), 0.0};
      r.lo = std::max(r.lo, need / room);
    }
    if (p.gamma < 1.0) r.hi = 1.0 / (1.0 - p.gamma);
    return r;
  }
  if (pb.kind() == ProblemKind::P1 && p.metric == Metric::Gram) return r;
  // P1: β‖A‖²/t² + σ/t ≥ β‖A‖²/tn²;  P2: β/t² + σ/(‖A₂‖² t) ≥ β/tn²
  const double a2 = std::pow(spectral_norm(last.A), 2);
  const double scale = pb.kind() == ProblemKind::P1 ? a2 : 1.0;
  const double sig = pb.kind() == ProblemKind::P1 ? p.sigma : p.sigma / a2;
  for (long k = 0; k <= horizon; ++k) {
    const double t = tau(k), tn = tau(k + 1);
    r.hi = std::min(r.hi, (sig / t) / (scale * (1.0 / (tn * tn) - 1.0 / (t * t))));
  }
  return r;
}

}  // namespace pclag
