#pragma once

#include "pclag/experiment.hpp"

#include <CLI11.hpp>

#include <future>
#include <iostream>

namespace pclag {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2 };

namespace detail {

struct Overrides {
  std::optional<long> iters;
  std::optional<long> seed;
};

inline ExperimentConfig load_with_overrides(const std::string& path, const Overrides& o) {
  ExperimentConfig c = load_experiment_config(path);
  if (o.iters) {
    if (*o.iters < 1) throw ConfigFileError("--iters must be at least 1");
    c.iters = *o.iters;
  }
  if (o.seed) c.seed = static_cast<std::uint64_t>(*o.seed);
  return c;
}

inline void print_result(std::ostream& out, const ExperimentResult& r) {
  out << r.config.name << ": " << to_string(r.config.problem) << ' ' << to_string(r.config.variant)
      << " rate " << to_string(r.config.rate) << ", " << r.metrics.size() << " iterations, beta "
      << r.setup.penalty.beta << '\n';
  for (const auto& v : r.validation) out << "  override: " << describe(v) << '\n';
  if (!r.certified) out << "  certificates: " << r.certificate_note << '\n';
  for (const auto& [name, f] : r.fits)
    out << "  fit " << name << ": slope " << f.slope << ", r2 " << f.r_squared << " over k in ["
        << f.k_lo << ", " << f.k_hi << "]\n";
  for (const auto& c : r.checks)
    out << "  " << (c.passed ? "ok   " : "FAIL ") << c.name << ": " << c.detail << '\n';
}

}  // namespace detail

/// Entry point for the pclag tool. Returns the process exit code.
inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Prediction-correction Lagrangian solvers: run, validate and compare experiments"};
  app.require_subcommand(1);

  detail::Overrides ov;
  std::string out_dir = "results";
  bool override_validation = false, no_timing = false;
  double tol = 1e-8;
  std::vector<std::string> run_cfgs;
  std::string validate_cfg, cmp_a, cmp_b;

  auto* run = app.add_subcommand("run", "Run one or more experiment configs");
  run->add_option("configs", run_cfgs, "Config files")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--iters", ov.iters, "Override iteration count");
  run->add_option("--seed", ov.seed, "Override instance seed");
  run->add_flag("--override-validation", override_validation,
                "Run even when parameter conditions fail (recorded in the summary)");
  run->add_flag("--no-timing", no_timing, "Write wall_time_ns = 0 for byte-identical output");

  auto* val = app.add_subcommand("validate", "Check a config's parameters against the step conditions");
  val->add_option("config", validate_cfg, "Config file")->required();
  val->add_option("--iters", ov.iters, "Override horizon");
  val->add_option("--seed", ov.seed, "Override instance seed");

  auto* cmp = app.add_subcommand("compare", "Step two configs in lockstep and report iterate deviation");
  cmp->add_option("a", cmp_a, "First config")->required();
  cmp->add_option("b", cmp_b, "Second config")->required();
  cmp->add_option("--iters", ov.iters, "Override iteration count");
  cmp->add_option("--seed", ov.seed, "Override instance seed");
  cmp->add_option("--tol", tol, "Maximum relative deviation");
  cmp->add_flag("--override-validation", override_validation, "Skip parameter validation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      std::vector<ExperimentConfig> cfgs;
      for (const auto& p : run_cfgs) cfgs.push_back(detail::load_with_overrides(p, ov));
      std::set<std::string> names;
      for (const auto& c : cfgs)
        if (!names.insert(c.name).second) throw ConfigFileError("two configs share the name " + c.name);

      const RunOptions opt{override_validation, !no_timing};
      std::vector<std::future<ExperimentResult>> jobs;
      for (const auto& c : cfgs)
        jobs.push_back(std::async(std::launch::async, [c, opt] { return run_experiment(c, opt); }));
      // Collect every job before reporting so one failure does not orphan the others.
      std::vector<ExperimentResult> results;
      std::exception_ptr first_error;
      for (auto& j : jobs) {
        try {
          results.push_back(j.get());
        } catch (...) {
          if (!first_error) first_error = std::current_exception();
        }
      }
      if (first_error) std::rethrow_exception(first_error);
      bool all_ok = true;
      for (const auto& r : results) {
        write_outputs(r, out_dir);
        detail::print_result(out, r);
        all_ok = all_ok && r.passed();
      }
      return all_ok ? kExitOk : kExitCheckFailed;
    }

    if (*val) {
      const ExperimentConfig c = detail::load_with_overrides(validate_cfg, ov);
      const Instance inst = build_instance(c);
      const ResolvedSetup s = resolve_setup(c, *inst.problem);
      const auto reps = validate_config(c, inst, s);
      const BetaRange br = admissible_beta(*inst.problem, s.params, s.tau, c.iters);
      out << c.name << ": beta " << s.penalty.beta << ", admissible range [" << br.lo << ", " << br.hi
          << "]\n";
      for (const auto& r : reps) out << "  " << describe(r) << '\n';
      out << (reps.empty() ? "valid" : "invalid") << '\n';
      return reps.empty() ? kExitOk : kExitConfig;
    }

    if (*cmp) {
      const ExperimentConfig ca = detail::load_with_overrides(cmp_a, ov);
      const ExperimentConfig cb = detail::load_with_overrides(cmp_b, ov);
      const Instance ia = build_instance(ca), ib = build_instance(cb);
      const ResolvedSetup sa = resolve_setup(ca, *ia.problem), sb = resolve_setup(cb, *ib.problem);
      if (!override_validation) {
        auto ra = validate_config(ca, ia, sa), rb = validate_config(cb, ib, sb);
        ra.insert(ra.end(), rb.begin(), rb.end());
        if (!ra.empty()) throw ValidationRefused(ra);
      }
      auto ma = make_method(*ia.problem, sa, ca.variant);
      auto mb = make_method(*ib.problem, sb, cb.variant);
      const long iters = std::min(ca.iters, cb.iters);
      const CompareResult cr = compare_methods(*ma, *mb, iters);
      out << (cr.cross_family ? "v-image" : "iterate") << " deviation over " << iters
          << " steps: max " << cr.max_deviation << " at k=" << cr.worst_k << " (tol " << tol << ")\n";
      return cr.max_deviation <= tol ? kExitOk : kExitCheckFailed;
    }
  } catch (const ValidationRefused& e) {
    err << "error: " << e.what() << "\n(use --override-validation to run anyway)\n";
    return kExitConfig;
  } catch (const ConfigurationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DegenerateInstance& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IllPosedBlock& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UnsupportedOracle& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ReferenceRequired& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitOk;
}

}  // namespace pclag
