#pragma once

#include "pclag/generators.hpp"
#include "pclag/method.hpp"
#include "pclag/metrics.hpp"
#include "pclag/solver_p1.hpp"
#include "pclag/solver_p2.hpp"
#include "pclag/solver_p3.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace pclag {

/// Bad or incomplete configuration (exit code 2).
struct ConfigFileError : InputError {
  using InputError::InputError;
};

/// Parameter conditions failed and no override was given (exit code 2).
struct ValidationRefused : std::runtime_error {
  explicit ValidationRefused(std::vector<ConditionReport> r)
      : std::runtime_error(summarize(r)), reports(std::move(r)) {}
  std::vector<ConditionReport> reports;

 private:
  static std::string summarize(const std::vector<ConditionReport>& r) {
    std::string s = "parameter validation failed:";
    for (const auto& c : r) s += "\n  " + describe(c);
    return s;
  }
};

using ConfigMap = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

/// Flat key = value text; '#' starts a comment.
inline ConfigMap parse_config_text(std::istream& in) {
  ConfigMap out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigFileError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigFileError("line " + std::to_string(lineno) + ": empty key");
    if (!out.emplace(key, val).second)
      throw ConfigFileError("line " + std::to_string(lineno) + ": duplicate key " + key);
  }
  return out;
}

struct ExperimentConfig {
  std::string name = "experiment";
  std::string base_dir = ".";
  ProblemKind problem = ProblemKind::P1;
  std::string instance = "qp";  // qp | elastic_net | files
  Variant variant = Variant::Once;
  Rate rate = Rate::K;
  Metric metric = Metric::Gram;
  TauRule schedule = TauRule::C1;
  BetaRule beta_rule = BetaRule::OverTau;
  std::optional<double> beta;  // nullopt: auto
  double gamma = 1.0;
  double tau_init = 0.5;
  std::optional<double> sigma;  // nullopt: auto (block modulus)
  long iters = 1000;
  std::uint64_t seed = 1;

  std::vector<Index> sizes;
  Index l = 10;
  double cond = 100.0;
  Index rows = 0;  // elastic net: rows of C (default 2n)
  double en_mu = 0.1, en_sigma = 1.0;
  long reference_iters = 100000;

  std::optional<double> rho;
  std::string certify = "auto";  // auto | on | off
  double window = 0.8;

  std::optional<double> check_gap_slope, check_feasibility_slope, check_residue_slope,
      check_ergodic_slope;
  double check_r2 = 0.9;
  std::optional<bool> check_certificates, check_lyapunov;

  ConfigMap raw;
};

namespace detail {

template <class E>
E parse_enum(const std::string& key, const std::string& v,
             std::initializer_list<std::pair<const char*, E>> opts) {
  std::string allowed;
  for (const auto& [name, e] : opts) {
    if (v == name) return e;
    allowed += allowed.empty() ? name : std::string("|") + name;
  }
  throw ConfigFileError(key + ": expected one of " + allowed + ", got '" + v + "'");
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigFileError(key + ": not a number: '" + v + "'");
  }
}

inline long parse_long(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigFileError(key + ": not an integer: '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigFileError(key + ": expected true|false, got '" + v + "'");
}

inline std::vector<Index> parse_sizes(const std::string& key, const std::string& v) {
  std::vector<Index> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const long n = parse_long(key, trim(tok));
    if (n <= 0) throw ConfigFileError(key + ": sizes must be positive");
    out.push_back(n);
  }
  if (out.empty()) throw ConfigFileError(key + ": empty size list");
  return out;
}

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "name", "problem", "instance", "variant", "rate", "metric", "schedule", "beta_rule",
      "beta", "gamma", "tau_init", "sigma", "iters", "seed", "sizes", "l", "cond", "rows",
      "en_mu", "en_sigma", "reference_iters", "rho", "certify", "window", "b",
      "check.gap_slope", "check.feasibility_slope", "check.residue_slope",
      "check.ergodic_slope", "check.r2", "check.certificates", "check.lyapunov"};
  return keys;
}

inline bool is_block_key(const std::string& k) {
  return k.rfind("block", 0) == 0 && k.find('.') != std::string::npos;
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const ConfigMap& m, const std::string& base_dir = ".") {
  using detail::parse_double, detail::parse_long, detail::parse_enum;
  for (const auto& [k, v] : m)
    if (!detail::known_keys().count(k) && !detail::is_block_key(k))
      throw ConfigFileError("unknown key: " + k);

  ExperimentConfig c;
  c.raw = m;
  c.base_dir = base_dir;
  auto get = [&](const char* k) -> std::optional<std::string> {
    auto it = m.find(k);
    return it == m.end() ? std::nullopt : std::optional<std::string>(it->second);
  };

  auto prob = get("problem");
  if (!prob) throw ConfigFileError("missing required key: problem");
  c.problem = parse_enum<ProblemKind>("problem", *prob,
                                      {{"p1", ProblemKind::P1}, {"p2", ProblemKind::P2}, {"p3", ProblemKind::P3}});
  auto beta = get("beta");
  if (!beta) throw ConfigFileError("missing required key: beta");
  if (*beta != "auto") c.beta = parse_double("beta", *beta);

  if (auto v = get("name")) c.name = *v;
  if (auto v = get("instance")) c.instance = *v;
  if (c.instance != "qp" && c.instance != "elastic_net" && c.instance != "files")
    throw ConfigFileError("instance: expected qp|elastic_net|files");
  if (auto v = get("variant"))
    c.variant = parse_enum<Variant>("variant", *v,
                                    {{"once", Variant::Once}, {"twice", Variant::Twice}, {"penalty", Variant::Penalty}});
  if (auto v = get("rate")) c.rate = parse_enum<Rate>("rate", *v, {{"k", Rate::K}, {"k2", Rate::K2}});
  if (auto v = get("metric"))
    c.metric = parse_enum<Metric>("metric", *v, {{"gram", Metric::Gram}, {"scaled_identity", Metric::ScaledIdentity}});
  const auto [tr, br] = required_schedule(c.problem, c.rate);
  c.schedule = tr;
  c.beta_rule = br;
  if (auto v = get("schedule")) c.schedule = parse_enum<TauRule>("schedule", *v, {{"c1", TauRule::C1}, {"c2", TauRule::C2}});
  if (auto v = get("beta_rule"))
    c.beta_rule = parse_enum<BetaRule>("beta_rule", *v,
                                       {{"over_tau", BetaRule::OverTau}, {"over_tau_sq", BetaRule::OverTauSq}, {"const", BetaRule::Constant}});
  if (auto v = get("gamma")) c.gamma = parse_double("gamma", *v);
  if (auto v = get("tau_init")) c.tau_init = parse_double("tau_init", *v);
  if (auto v = get("sigma")) {
    if (*v != "auto") c.sigma = parse_double("sigma", *v);
  } else if (c.rate == Rate::K) {
    c.sigma = 0.0;
  }
  if (auto v = get("iters")) c.iters = parse_long("iters", *v);
  if (c.iters < 1) throw ConfigFileError("iters must be at least 1");
  if (auto v = get("seed")) c.seed = static_cast<std::uint64_t>(parse_long("seed", *v));
  if (auto v = get("sizes")) c.sizes = detail::parse_sizes("sizes", *v);
  if (auto v = get("l")) c.l = parse_long("l", *v);
  if (auto v = get("cond")) c.cond = parse_double("cond", *v);
  if (auto v = get("rows")) c.rows = parse_long("rows", *v);
  if (auto v = get("en_mu")) c.en_mu = parse_double("en_mu", *v);
  if (auto v = get("en_sigma")) c.en_sigma = parse_double("en_sigma", *v);
  if (auto v = get("reference_iters")) c.reference_iters = parse_long("reference_iters", *v);
  if (auto v = get("rho")) c.rho = parse_double("rho", *v);
  if (auto v = get("certify")) {
    c.certify = *v;
    if (c.certify != "auto" && c.certify != "on" && c.certify != "off")
      throw ConfigFileError("certify: expected auto|on|off");
  }
  if (auto v = get("window")) c.window = parse_double("window", *v);
  if (auto v = get("check.gap_slope")) c.check_gap_slope = parse_double("check.gap_slope", *v);
  if (auto v = get("check.feasibility_slope")) c.check_feasibility_slope = parse_double("check.feasibility_slope", *v);
  if (auto v = get("check.residue_slope")) c.check_residue_slope = parse_double("check.residue_slope", *v);
  if (auto v = get("check.ergodic_slope")) c.check_ergodic_slope = parse_double("check.ergodic_slope", *v);
  if (auto v = get("check.r2")) c.check_r2 = parse_double("check.r2", *v);
  if (auto v = get("check.certificates")) c.check_certificates = detail::parse_bool("check.certificates", *v);
  if (auto v = get("check.lyapunov")) c.check_lyapunov = detail::parse_bool("check.lyapunov", *v);

  if (c.sizes.empty()) {
    switch (c.problem) {
      case ProblemKind::P1: c.sizes = {30}; break;
      case ProblemKind::P2: c.sizes = c.instance == "elastic_net" ? std::vector<Index>{30} : std::vector<Index>{16, 14}; break;
      case ProblemKind::P3: c.sizes = {10, 8, 12}; break;
    }
  }
  if (c.l < 1) throw ConfigFileError("l must be at least 1");
  return c;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFileError("cannot open config file: " + path);
  ExperimentConfig c = parse_experiment_config(parse_config_text(in),
                                               std::filesystem::path(path).parent_path().string());
  if (!c.raw.count("name")) c.name = std::filesystem::path(path).stem().string();
  return c;
}

namespace detail {

inline std::string resolve(const ExperimentConfig& c, const std::string& p) {
  std::filesystem::path fp(p);
  if (fp.is_absolute() || c.base_dir.empty()) return fp.string();
  return (std::filesystem::path(c.base_dir) / fp).string();
}

/// Blocks from files: blockI.f, blockI.A and oracle-specific keys (I = 1..m).
inline Instance files_instance(const ExperimentConfig& c) {
  auto need = [&](const std::string& k) -> const std::string& {
    auto it = c.raw.find(k);
    if (it == c.raw.end()) throw ConfigFileError("missing required key: " + k);
    return it->second;
  };
  auto opt = [&](const std::string& k) -> std::optional<std::string> {
    auto it = c.raw.find(k);
    return it == c.raw.end() ? std::nullopt : std::optional<std::string>(it->second);
  };
  const Vector b = read_vector_file(resolve(c, need("b")));
  std::vector<Block> blocks;
  for (int i = 1;; ++i) {
    const std::string p = "block" + std::to_string(i) + ".";
    if (!opt(p + "f")) break;
    const std::string kind = *opt(p + "f");
    Matrix A = read_matrix_file(resolve(c, need(p + "A")));
    const Index n = A.cols();
    ObjectivePtr f;
    if (kind == "quadratic") {
      Matrix P = read_matrix_file(resolve(c, need(p + "P")));
      Vector q = opt(p + "q") ? read_vector_file(resolve(c, *opt(p + "q"))) : Vector(Vector::Zero(n));
      f = std::make_shared<Quadratic>(std::move(P), std::move(q));
    } else if (kind == "l1") {
      f = std::make_shared<L1Norm>(n, parse_double(p + "mu", need(p + "mu")));
    } else if (kind == "elastic_net") {
      f = std::make_shared<ElasticNet>(n, parse_double(p + "mu", need(p + "mu")),
                                       parse_double(p + "sigma", need(p + "sigma")));
    } else if (kind == "box") {
      f = std::make_shared<Box>(Vector::Constant(n, parse_double(p + "lo", need(p + "lo"))),
                                Vector::Constant(n, parse_double(p + "hi", need(p + "hi"))));
    } else if (kind == "zero") {
      f = std::make_shared<Zero>(n);
    } else {
      throw ConfigFileError(p + "f: expected quadratic|l1|elastic_net|box|zero");
    }
    blocks.emplace_back(std::move(f), std::move(A));
  }
  if (blocks.empty()) throw ConfigFileError("instance=files needs block1.f, block1.A, ...");
  auto pb = std::make_shared<const BlockProblem>(std::move(blocks), b, c.problem);
  return {pb, kkt_reference(*pb)};
}

}  // namespace detail

inline Instance build_instance(const ExperimentConfig& c) {
  if (c.instance == "files") return detail::files_instance(c);
  if (c.instance == "elastic_net") {
    if (c.problem != ProblemKind::P2) throw ConfigFileError("instance=elastic_net is a two-block problem");
    const Index n = c.sizes.front();
    return elastic_net_instance(n, c.rows > 0 ? c.rows : 2 * n, c.en_mu, c.en_sigma, c.seed,
                                c.reference_iters);
  }
  const size_t want = c.problem == ProblemKind::P1 ? 1 : (c.problem == ProblemKind::P2 ? 2 : 0);
  if (want && c.sizes.size() != want)
    throw ConfigFileError("sizes: " + std::string(to_string(c.problem)) + " needs " +
                          std::to_string(want) + " block size(s)");
  if (c.problem == ProblemKind::P3 && c.sizes.size() < 2)
    throw ConfigFileError("sizes: p3 needs at least two block sizes");
  return quadratic_instance(c.sizes, c.l, c.cond, c.seed, c.problem == ProblemKind::P3);
}

/// Method parameters after resolving "auto" entries against the instance.
struct ResolvedSetup {
  SolverParams params;
  TauSchedule tau;
  PenaltySchedule penalty;
};

inline ResolvedSetup resolve_setup(const ExperimentConfig& c, const BlockProblem& pb) {
  ResolvedSetup s{SolverParams{c.gamma, 0.0, c.metric, c.rate}, TauSchedule(c.schedule, c.tau_init),
                  PenaltySchedule{c.beta_rule, 1.0}};
  const Block& last = pb.block(pb.m() - 1);
  s.params.sigma = c.sigma ? *c.sigma : (pb.kind() == ProblemKind::P3 ? 0.0 : last.sigma);
  if (c.beta) {
    s.penalty.beta = *c.beta;
  } else if (c.rate == Rate::K2) {
    const BetaRange r = admissible_beta(pb, s.params, s.tau, c.iters);
    if (pb.kind() == ProblemKind::P3) s.penalty.beta = r.lo * (1.0 + 1e-9);
    else if (std::isfinite(r.hi)) s.penalty.beta = r.hi * (1.0 - 1e-9);
  }
  return s;
}

inline std::unique_ptr<Method> make_method(const BlockProblem& pb, const ResolvedSetup& s, Variant v,
                                           const InitialPoint& init = {}) {
  switch (pb.kind()) {
    case ProblemKind::P1: return std::make_unique<P1Solver>(pb, s.params, v, s.tau, s.penalty, init);
    case ProblemKind::P2: return std::make_unique<P2Solver>(pb, s.params, v, s.tau, s.penalty, init);
    case ProblemKind::P3: return std::make_unique<P3Solver>(pb, s.params, v, s.tau, s.penalty, init);
  }
  throw ConfigurationError("unknown problem kind");
}

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentResult {
  ExperimentConfig config;
  ResolvedSetup setup;
  std::vector<ConditionReport> validation;
  std::vector<MetricsRow> metrics;
  std::vector<CertificateRecord> certificates;
  bool certified = false;
  std::string certificate_note;
  std::map<std::string, RateFit> fits;
  std::vector<CheckResult> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

struct RunOptions {
  bool override_validation = false;
  bool record_timing = true;
};

inline std::vector<ConditionReport> validate_config(const ExperimentConfig& c, const Instance& inst,
                                                    const ResolvedSetup& s) {
  return validate_params(*inst.problem, s.params, s.tau, s.penalty, c.iters);
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  ExperimentResult res;
  res.config = cfg;
  const Instance inst = build_instance(cfg);
  const BlockProblem& pb = *inst.problem;
  res.setup = resolve_setup(cfg, pb);
  res.validation = validate_config(cfg, inst, res.setup);
  if (!res.validation.empty() && !opt.override_validation) throw ValidationRefused(res.validation);

  auto method = make_method(pb, res.setup, cfg.variant);
  const bool have_ref = inst.reference.has_value();
  if (cfg.certify == "on" && !(have_ref && inst.reference->exact))
    throw ReferenceRequired("certify=on needs an instance with an exact KKT reference");
  res.certified = cfg.certify != "off" && have_ref && inst.reference->exact;
  if (!res.certified)
    res.certificate_note = cfg.certify == "off" ? "certificates disabled"
                           : have_ref           ? "reference is iterative, not a KKT solve"
                                                : "no reference solution for this instance";

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const ReferenceSolution* ref = have_ref ? &*inst.reference : nullptr;
  const double rho = cfg.rho ? *cfg.rho : (ref ? 2.0 * ref->lambda_star.norm() + 1.0 : nan);
  auto gap_ball_at = [&](const Vector& x) {
    return ref ? pb.objective(x) - ref->f_star + rho * pb.residual(x).norm() : nan;
  };

  Vector erg_sum = Vector::Zero(pb.n());
  double erg_w = 0.0, theta = 0.0, min_res = std::numeric_limits<double>::infinity();
  const auto t0 = std::chrono::steady_clock::now();
  res.metrics.reserve(static_cast<size_t>(cfg.iters));
  for (long k = 0; k < cfg.iters; ++k) {
    const StepArtifacts a = method->step();
    const auto now = std::chrono::steady_clock::now();
    MetricsRow row;
    row.k = k;
    const Vector& x = a.x_next;
    row.objective = pb.objective(x);
    row.feasibility = a.feasibility;
    if (ref) {
      const Vector r = pb.residual(x);
      row.gap_fixed = row.objective - ref->f_star - ref->lambda_star.dot(r);
      row.gap_ball = row.objective - ref->f_star + rho * a.feasibility;
    } else {
      row.gap_fixed = row.gap_ball = nan;
    }
    row.residue = (a.x_next - a.x_prev).squaredNorm();
    min_res = std::min(min_res, row.residue);
    row.min_residue = min_res;
    const double w = 1.0 / a.tau;
    erg_sum += w * a.x_tilde;
    erg_w += w;
    row.ergodic_gap = gap_ball_at(erg_sum / erg_w);
    row.wall_time_ns = opt.record_timing
                           ? std::chrono::duration_cast<std::chrono::nanoseconds>(now - t0).count()
                           : 0;
    res.metrics.push_back(row);
    if (res.certified) {
      CertificateRecord rec = method->certify(a, *ref, theta);
      theta = rec.theta;
      res.certificates.push_back(rec);
    }
  }

  auto try_fit = [&](const std::string& name, auto get) {
    try {
      res.fits[name] = fit_rate(metric_series(res.metrics, get), cfg.window);
    } catch (const InsufficientData&) {
    }
  };
  if (ref) {
    try_fit("gap_ball", [](const MetricsRow& r) { return r.gap_ball; });
    try_fit("ergodic_gap", [](const MetricsRow& r) { return r.ergodic_gap; });
  }
  try_fit("feasibility", [](const MetricsRow& r) { return r.feasibility; });
  try_fit("min_residue", [](const MetricsRow& r) { return r.min_residue; });

  auto slope_check = [&](const std::string& name, const std::string& series, std::optional<double> bound) {
    if (!bound) return;
    CheckResult cr{name, false, ""};
    auto it = res.fits.find(series);
    if (it == res.fits.end()) {
      cr.detail = "no fit available for " + series;
    } else {
      cr.passed = it->second.slope <= *bound && it->second.r_squared >= cfg.check_r2;
      std::ostringstream os;
      os << series << " slope " << it->second.slope << " (bound " << *bound << "), r2 "
         << it->second.r_squared << " (min " << cfg.check_r2 << ")";
      cr.detail = os.str();
    }
    res.checks.push_back(cr);
  };
  slope_check("gap_rate", "gap_ball", cfg.check_gap_slope);
  slope_check("feasibility_rate", "feasibility", cfg.check_feasibility_slope);
  slope_check("residue_rate", "min_residue", cfg.check_residue_slope);
  slope_check("ergodic_rate", "ergodic_gap", cfg.check_ergodic_slope);

  if (res.certified && cfg.check_certificates.value_or(true)) {
    const CertificateTolerances tol;
    auto count = [&](auto pred) {
      long bad = 0, first = -1;
      for (const auto& r : res.certificates)
        if (!pred(r, tol)) {
          if (first < 0) first = r.k;
          ++bad;
        }
      return std::pair{bad, first};
    };
    auto add = [&](const std::string& name, std::pair<long, long> bf) {
      std::ostringstream os;
      if (bf.first) os << bf.first << " violating steps, first at k=" << bf.second;
      else os << "holds at all " << res.certificates.size() << " steps";
      res.checks.push_back({name, bf.first == 0, os.str()});
    };
    add("cc1", count([](const CertificateRecord& r, const CertificateTolerances& t) { return cc1_ok(r, t); }));
    add("g_psd", count([](const CertificateRecord& r, const CertificateTolerances& t) { return g_psd_ok(r, t); }));
    add("cc3", count([](const CertificateRecord& r, const CertificateTolerances& t) { return cc3_ok(r, t); }));
    add("g_norm_bound", count([](const CertificateRecord& r, const CertificateTolerances& t) { return g_bound_ok(r, t); }));
  }
  const bool lyap_default = cfg.problem == ProblemKind::P1 && cfg.rate == Rate::K && cfg.gamma == 1.0;
  if (res.certified && cfg.check_lyapunov.value_or(lyap_default)) {
    long bad = 0, first = -1;
    for (const auto& r : res.certificates)
      if (!lyapunov_ok(r)) {
        if (first < 0) first = r.k;
        ++bad;
      }
    std::ostringstream os;
    if (bad) os << bad << " decreasing steps, first at k=" << first;
    else os << "non-decreasing over " << res.certificates.size() << " steps";
    res.checks.push_back({"lyapunov", bad == 0, os.str()});
  }
  return res;
}

// ---- output -------------------------------------------------------------------------------

inline const char* kMetricsHeader =
    "k,objective,gap_fixed,gap_ball,feasibility,residue,min_residue,ergodic_gap,wall_time_ns";
inline const char* kCertificatesHeader =
    "k,cc1_residual,g_min_eig,cc3_slack,theta_increment,lyapunov_value";

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows)
    out << r.k << ',' << fmt_double(r.objective) << ',' << fmt_double(r.gap_fixed) << ','
        << fmt_double(r.gap_ball) << ',' << fmt_double(r.feasibility) << ','
        << fmt_double(r.residue) << ',' << fmt_double(r.min_residue) << ','
        << fmt_double(r.ergodic_gap) << ',' << r.wall_time_ns << '\n';
}

inline void write_certificates_csv(std::ostream& out, const std::vector<CertificateRecord>& rows) {
  out << kCertificatesHeader << '\n';
  for (const auto& r : rows)
    out << r.k << ',' << fmt_double(r.cc1_residual) << ',' << fmt_double(r.g_min_eig) << ','
        << fmt_double(r.cc3_slack) << ',' << fmt_double(r.theta_increment) << ','
        << fmt_double(r.lyapunov_value) << '\n';
}

inline nlohmann::json summary_json(const ExperimentResult& r) {
  using nlohmann::json;
  json j;
  j["name"] = r.config.name;
  j["problem"] = std::string(to_string(r.config.problem));
  j["variant"] = std::string(to_string(r.config.variant));
  j["rate"] = std::string(to_string(r.config.rate));
  j["metric"] = std::string(to_string(r.config.metric));
  j["iters"] = r.config.iters;
  j["seed"] = r.config.seed;
  j["beta"] = r.setup.penalty.beta;
  j["gamma"] = r.setup.params.gamma;
  j["sigma"] = r.setup.params.sigma;
  j["validation"] = json::array();
  for (const auto& v : r.validation) j["validation"].push_back(describe(v));
  j["certified"] = r.certified;
  if (!r.certified) j["certificate_note"] = r.certificate_note;
  if (!r.certificates.empty()) {
    double theta_min = 0.0;
    for (const auto& c : r.certificates) theta_min = std::min(theta_min, c.theta);
    j["theta_min"] = theta_min;
    j["theta_negative"] = theta_min < 0.0;
  }
  j["fits"] = json::object();
  for (const auto& [name, f] : r.fits)
    j["fits"][name] = {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared},
                       {"k_lo", f.k_lo}, {"k_hi", f.k_hi}, {"clipped", f.clipped}};
  j["checks"] = json::array();
  for (const auto& c : r.checks)
    j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["passed"] = r.passed();
  return j;
}

/// Writes <name>_metrics.csv, <name>_certificates.csv (when certified) and <name>_summary.json.
inline void write_outputs(const ExperimentResult& r, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto base = std::filesystem::path(dir) / r.config.name;
  {
    std::ofstream f(base.string() + "_metrics.csv");
    if (!f) throw InputError("cannot write " + base.string() + "_metrics.csv");
    write_metrics_csv(f, r.metrics);
  }
  if (r.certified) {
    std::ofstream f(base.string() + "_certificates.csv");
    write_certificates_csv(f, r.certificates);
  }
  std::ofstream f(base.string() + "_summary.json");
  f << summary_json(r).dump(2) << '\n';
}

// ---- iterate comparison -------------------------------------------------------------------

/// ‖a − b‖ / max(‖a‖, ‖b‖), 0 when both vanish.
inline double relative_deviation(const Vector& a, const Vector& b) {
  const double s = std::max(a.norm(), b.norm());
  return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

struct CompareResult {
  double max_deviation = 0.0;
  long worst_k = -1;
  bool cross_family = false;  // compared v-space images instead of primal iterates
};

/// Steps two methods in lockstep. Same problem class: primal iterates x^k are compared;
/// different classes (two-block vs multi-block at m = 2): v-space images.
inline CompareResult compare_methods(Method& a, Method& b, long iters) {
  CompareResult out;
  out.cross_family = a.problem().kind() != b.problem().kind();
  for (long k = 0; k < iters; ++k) {
    a.step();
    b.step();
    const double d = out.cross_family ? relative_deviation(a.v_image(), b.v_image())
                                      : relative_deviation(a.x(), b.x());
    if (d > out.max_deviation || out.worst_k < 0) {
      out.max_deviation = std::max(out.max_deviation, d);
      out.worst_k = k;
    }
  }
  return out;
}

}  // namespace pclag
