#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "twf/harness.hpp"
#include "twf/measurement.hpp"
#include "twf/metrics.hpp"
#include "twf/noise.hpp"
#include "twf/rng.hpp"
#include "twf/solver.hpp"

namespace {

// Bad flag values and malformed config entries exit 2 (like CLI parse
// errors); genuine runtime failures exit 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

twf::TruncationParams parse_params(const std::string& text) {
  twf::TruncationParams p;
  double vals[5] = {p.alpha_z_lb, p.alpha_z_ub, p.alpha_h, p.alpha_y, p.alpha_p};
  std::size_t idx = 0, pos = 0;
  while (idx < 5 && pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string tok = text.substr(pos, comma == std::string::npos
                                           ? std::string::npos
                                           : comma - pos);
    try {
      std::size_t used = 0;
      vals[idx] = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("--params: bad number '" + tok + "'");
    }
    ++idx;
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (idx < 4) throw UsageError("--params: expected 4 or 5 comma-separated levels");
  p.alpha_z_lb = vals[0];
  p.alpha_z_ub = vals[1];
  p.alpha_h = vals[2];
  p.alpha_y = vals[3];
  if (idx == 5) p.alpha_p = vals[4];
  return p;
}

twf::StepPolicy parse_step(const std::string& text) {
  twf::StepPolicy sp;
  auto colon = text.find(':');
  std::string mode = text.substr(0, colon);
  std::optional<double> val;
  if (colon != std::string::npos) {
    std::string tok = text.substr(colon + 1);
    try {
      std::size_t used = 0;
      val = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("--step: bad number '" + tok + "'");
    }
  }
  if (mode == "fixed") {
    sp.mode = twf::StepMode::fixed;
    if (val) sp.mu = *val;
  } else if (mode == "backtrack") {
    sp.mode = twf::StepMode::linesearch;
    if (val) sp.beta = *val;
    if (!(sp.beta > 0.0 && sp.beta < 1.0))
      throw UsageError("--step: backtrack factor must be in (0,1)");
  } else {
    throw UsageError("--step: expected fixed:<mu> or backtrack:<beta>");
  }
  return sp;
}

struct CommonOpts {
  std::string design = "gaussian-real";
  std::vector<std::size_t> n_list;
  std::vector<double> ratios;
  std::vector<double> snr_db;
  std::size_t trials = 50;
  std::uint64_t seed = 1;
  std::string out;
  std::string step = "fixed:0.2";
  std::string params = "0.3,5,5,3,5";
  int max_iters = 1000;
  double grad_tol = 0.0;
  int power_iters = 50;
  double threshold = 1e-5;
};

void add_solver_flags(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--step", o.step, "step rule: fixed:<mu> or backtrack:<beta>");
  sub->add_option("--params", o.params,
                  "trimming levels alpha_z_lb,alpha_z_ub,alpha_h,alpha_y[,alpha_p]");
  sub->add_option("--max-iters", o.max_iters, "iteration budget");
  sub->add_option("--grad-tol", o.grad_tol,
                  "relative gradient stop (0 disables)");
  sub->add_option("--power-iters", o.power_iters,
                  "power iterations for the spectral start");
}

void add_grid_flags(CLI::App* sub, CommonOpts& o, bool with_snr) {
  sub->add_option("--design", o.design,
                  "gaussian-real | gaussian-complex | cdp");
  sub->add_option("--n", o.n_list, "signal dimension(s)")->required();
  sub->add_option("--ratio", o.ratios,
                  "m/n ratio(s); mask count(s) for cdp")->required();
  if (with_snr)
    sub->add_option("--snr-db", o.snr_db, "SNR grid in dB")->required();
  sub->add_option("--trials", o.trials, "instances per grid cell");
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--out", o.out, "output CSV path")->required();
  sub->add_option("--threshold", o.threshold, "success threshold on rel err");
  add_solver_flags(sub, o);
}

twf::ExperimentSpec to_spec(const CommonOpts& o) {
  twf::ExperimentSpec spec;
  spec.design = twf::parse_design(o.design);
  spec.n_list = o.n_list;
  spec.ratios = o.ratios;
  spec.snr_db_list = o.snr_db;
  spec.trials = o.trials;
  spec.seed = o.seed;
  spec.success_threshold = o.threshold;
  spec.solver.step = parse_step(o.step);
  spec.solver.params = parse_params(o.params);
  spec.solver.max_iters = o.max_iters;
  spec.solver.grad_tol = o.grad_tol;
  spec.solver.init.power_iters = o.power_iters;
  spec.solver.init.alpha_y = spec.solver.params.alpha_y;
  return spec;
}

int run_solve(const std::string& config_path, CLI::App* sub, std::string design,
              std::size_t n, double ratio, std::size_t masks,
              std::uint64_t seed, std::string noise, double snr_db_target,
              std::string solver, std::string step, std::string params,
              int max_iters, double grad_tol, int power_iters,
              double threshold) {
  if (!config_path.empty()) {
    auto kv = twf::load_config_file(config_path);
    auto take = [&](const char* flag, const char* key, auto setter) {
      auto it = kv.find(key);
      if (it == kv.end()) return;
      if (sub->count(flag) == 0) setter(it->second);
      kv.erase(it);
    };
    auto to_u64 = [](const std::string& s) -> std::uint64_t {
      return std::stoull(s);
    };
    try {
      take("--design", "design", [&](const std::string& v) { design = v; });
      take("--n", "n", [&](const std::string& v) { n = to_u64(v); });
      take("--ratio", "ratio", [&](const std::string& v) { ratio = std::stod(v); });
      take("--masks", "masks", [&](const std::string& v) { masks = to_u64(v); });
      take("--seed", "seed", [&](const std::string& v) { seed = to_u64(v); });
      take("--noise", "noise", [&](const std::string& v) { noise = v; });
      take("--snr-db", "snr-db",
           [&](const std::string& v) { snr_db_target = std::stod(v); });
      take("--solver", "solver", [&](const std::string& v) { solver = v; });
      take("--step", "step", [&](const std::string& v) { step = v; });
      take("--params", "params", [&](const std::string& v) { params = v; });
      take("--max-iters", "max-iters",
           [&](const std::string& v) { max_iters = std::stoi(v); });
      take("--grad-tol", "grad-tol",
           [&](const std::string& v) { grad_tol = std::stod(v); });
      take("--power-iters", "power-iters",
           [&](const std::string& v) { power_iters = std::stoi(v); });
      take("--threshold", "threshold",
           [&](const std::string& v) { threshold = std::stod(v); });
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& ex) {
      throw UsageError(std::string("config: bad value: ") + ex.what());
    }
    if (!kv.empty())
      throw UsageError("config: unknown key '" + kv.begin()->first + "'");
  }

  twf::SolverConfig cfg;
  cfg.step = parse_step(step);
  cfg.params = parse_params(params);
  cfg.max_iters = max_iters;
  cfg.grad_tol = grad_tol;
  cfg.init.power_iters = power_iters;
  cfg.init.alpha_y = cfg.params.alpha_y;
  cfg.init.seed = twf::derive_seed(seed, {10, 4});

  twf::Design d = twf::parse_design(design);
  bool poisson = noise == "poisson";
  if (!poisson && noise != "noiseless")
    throw UsageError("--noise: expected noiseless or poisson");
  bool use_wf = solver == "wf";
  if (!use_wf && solver != "twf")
    throw UsageError("--solver: expected twf or wf");

  auto x_seed = twf::derive_seed(seed, {10, 1});
  auto e_seed = twf::derive_seed(seed, {10, 2});
  auto n_seed = twf::derive_seed(seed, {10, 3});

  auto report = [&](const auto& res, std::size_t m) {
    const auto& tr = res.trace;
    const char* status = tr.status == twf::SolveStatus::converged ? "converged"
                         : tr.status == twf::SolveStatus::diverged ? "diverged"
                                                                    : "max-iters";
    std::printf("design=%s n=%zu m=%zu seed=%llu solver=%s noise=%s\n",
                design.c_str(), n, m, static_cast<unsigned long long>(seed),
                solver.c_str(), noise.c_str());
    std::printf(
        "status=%s iters=%zu init_relative_error=%s final_relative_error=%s "
        "matvecs=%ld success=%s\n",
        status, tr.records.size(),
        twf::format_double(tr.init_relative_error).c_str(),
        twf::format_double(tr.final_relative_error).c_str(), tr.matvecs,
        tr.final_relative_error <= threshold ? "true" : "false");
  };

  auto scale_signal = [&](auto& x) {
    if (snr_db_target <= 0.0) return;
    double target_norm = std::sqrt(std::pow(10.0, snr_db_target / 10.0) / 3.0);
    double nx = twf::nrm(twf::cspan(x));
    for (auto& v : x) v = v * (target_norm / nx);
  };

  auto run_instance = [&](auto& e, auto& x) {
    scale_signal(x);
    auto mu = twf::intensities(e, twf::cspan(x));
    auto y = poisson ? twf::observe(twf::cspan(mu), twf::NoiseSpec::poisson(), n_seed)
                     : mu;
    auto res = use_wf ? twf::solve_wf(e, twf::cspan(y), cfg, twf::cspan(x))
                      : twf::solve_twf(e, twf::cspan(y), cfg, twf::cspan(x));
    report(res, e.rows());
  };

  if (d == twf::Design::cdp) {
    if (masks < 1) throw UsageError("--masks must be >= 1 for cdp");
    auto e = twf::sample_cdp(n, masks, e_seed);
    twf::Rng rng(x_seed);
    std::vector<twf::cplx> x(n);
    for (auto& v : x) v = rng.cnormal();
    run_instance(e, x);
  } else if (d == twf::Design::gaussian_complex) {
    auto m = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    auto e = twf::sample_gaussian_complex(n, m, e_seed);
    twf::Rng rng(x_seed);
    std::vector<twf::cplx> x(n);
    for (auto& v : x) v = rng.cnormal();
    run_instance(e, x);
  } else {
    auto m = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    auto e = twf::sample_gaussian_real(n, m, e_seed);
    twf::Rng rng(x_seed);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    run_instance(e, x);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase retrieval benchmarks: truncated spectral init + trimmed "
               "likelihood ascent, with CG and sign-oracle baselines"};
  app.require_subcommand(1);

  CommonOpts pt, mse, ic, cg;
  bool pt_wf = false, mse_no_oracle = false;

  auto* sub_pt = app.add_subcommand("phase-transition",
                                    "empirical success rates over an (n, m/n) grid");
  add_grid_flags(sub_pt, pt, false);
  sub_pt->add_flag("--wf", pt_wf, "also run the untruncated solver");

  auto* sub_mse = app.add_subcommand("mse-vs-snr",
                                     "relative MSE vs SNR under Poisson noise");
  add_grid_flags(sub_mse, mse, true);
  sub_mse->add_flag("--no-oracle", mse_no_oracle, "skip the sign-oracle MLE");

  auto* sub_ic = app.add_subcommand("init-compare",
                                    "trimmed vs plain spectral initialization");
  add_grid_flags(sub_ic, ic, false);

  auto* sub_cg = app.add_subcommand("cg-compare",
                                    "CG with known signs vs the trimmed solver");
  add_grid_flags(sub_cg, cg, false);

  auto* sub_solve = app.add_subcommand("solve", "one instance, summary to stdout");
  std::string sv_config, sv_design = "gaussian-real", sv_noise = "noiseless",
              sv_solver = "twf", sv_step = "fixed:0.2",
              sv_params = "0.3,5,5,3,5";
  std::size_t sv_n = 64, sv_masks = 8;
  double sv_ratio = 8.0, sv_snr = 0.0, sv_grad_tol = 0.0, sv_threshold = 1e-5;
  std::uint64_t sv_seed = 1;
  int sv_max_iters = 1000, sv_power_iters = 50;
  sub_solve->add_option("--config", sv_config,
                        "key=value config file; explicit flags win");
  sub_solve->add_option("--design", sv_design, "gaussian-real | gaussian-complex | cdp");
  sub_solve->add_option("--n", sv_n, "signal dimension");
  sub_solve->add_option("--ratio", sv_ratio, "m/n ratio (dense designs)");
  sub_solve->add_option("--masks", sv_masks, "mask count (cdp)");
  sub_solve->add_option("--seed", sv_seed, "seed");
  sub_solve->add_option("--noise", sv_noise, "noiseless | poisson");
  sub_solve->add_option("--snr-db", sv_snr, "rescale the signal to this SNR");
  sub_solve->add_option("--solver", sv_solver, "twf | wf");
  sub_solve->add_option("--threshold", sv_threshold, "success threshold");
  sub_solve->add_option("--step", sv_step, "fixed:<mu> or backtrack:<beta>");
  sub_solve->add_option("--params", sv_params, "trimming levels");
  sub_solve->add_option("--max-iters", sv_max_iters, "iteration budget");
  sub_solve->add_option("--grad-tol", sv_grad_tol, "relative gradient stop");
  sub_solve->add_option("--power-iters", sv_power_iters, "spectral power iterations");

  auto* sub_vp = app.add_subcommand("validate-params",
                                    "feasibility check of trimming levels");
  std::string vp_params = "0.3,5,5,3,5", vp_step = "fixed:0.2";
  sub_vp->add_option("--params", vp_params, "trimming levels");
  sub_vp->add_option("--step", vp_step, "fixed:<mu> or backtrack:<beta>");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sub_pt->parsed()) {
      auto spec = to_spec(pt);
      spec.run_wf = pt_wf;
      twf::write_table(twf::run_phase_transition(spec), pt.out);
      return 0;
    }
    if (sub_mse->parsed()) {
      auto spec = to_spec(mse);
      spec.with_oracle = !mse_no_oracle;
      twf::write_table(twf::run_mse_vs_snr(spec), mse.out);
      return 0;
    }
    if (sub_ic->parsed()) {
      twf::write_table(twf::run_init_compare(to_spec(ic)), ic.out);
      return 0;
    }
    if (sub_cg->parsed()) {
      twf::write_table(twf::run_cg_compare(to_spec(cg)), cg.out);
      return 0;
    }
    if (sub_solve->parsed()) {
      return run_solve(sv_config, sub_solve, sv_design, sv_n, sv_ratio,
                       sv_masks, sv_seed, sv_noise, sv_snr, sv_solver, sv_step,
                       sv_params, sv_max_iters, sv_grad_tol, sv_power_iters,
                       sv_threshold);
    }
    if (sub_vp->parsed()) {
      auto pc = twf::validate_params(parse_params(vp_params),
                                     parse_step(vp_step).mode);
      std::printf("zeta1=%s\nzeta2=%s\nmu0=%s\nok=%s\n",
                  twf::format_double(pc.zeta1).c_str(),
                  twf::format_double(pc.zeta2).c_str(),
                  twf::format_double(pc.mu0).c_str(),
                  pc.ok ? "true" : "false");
      return 0;
    }
  } catch (const UsageError& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  } catch (const std::invalid_argument& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 0;
}
