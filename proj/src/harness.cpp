#include "twf/harness.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "twf/measurement.hpp"
#include "twf/metrics.hpp"
#include "twf/rng.hpp"

namespace twf {

const char* kVersion = "twf 0.1.0";

namespace {

enum ExperimentId : std::uint64_t {
  kExpPhaseTransition = 1,
  kExpMseVsSnr = 2,
  kExpInitCompare = 3,
  kExpCgCompare = 4,
};

enum StreamId : std::uint64_t {
  kStreamSignal = 1,
  kStreamEnsemble = 2,
  kStreamNoise = 3,
  kStreamInit = 4,
};

std::uint64_t design_id(Design d) {
  switch (d) {
    case Design::gaussian_real: return 1;
    case Design::gaussian_complex: return 2;
    case Design::cdp: return 3;
  }
  return 0;
}

std::uint64_t cell_seed(const ExperimentSpec& spec, std::uint64_t exp_id,
                        std::size_t n, std::size_t m, double snr_db,
                        std::size_t trial, std::uint64_t stream) {
  auto snr_centi = static_cast<std::uint64_t>(
      static_cast<std::int64_t>(std::llround(snr_db * 100.0)));
  return derive_seed(spec.seed, {exp_id, design_id(spec.design), n, m,
                                 snr_centi, trial, stream});
}

template <class T>
std::vector<T> draw_signal(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<T> x(n);
  for (auto& v : x) {
    if constexpr (is_complex_v<T>)
      v = rng.cnormal();
    else
      v = rng.normal();
  }
  return x;
}

// Resolve the grid "ratio" into the row count; for masked designs it is the
// mask count and must be a positive integer.
std::size_t resolve_m(Design d, std::size_t n, double ratio) {
  if (d == Design::cdp) {
    auto L = static_cast<std::size_t>(std::llround(ratio));
    if (L < 1 || std::fabs(ratio - static_cast<double>(L)) > 1e-9)
      throw std::invalid_argument(
          "cdp design: ratio must be a positive integer mask count");
    return n * L;
  }
  auto m = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  if (m < 1) throw std::invalid_argument("ratio too small: m would be zero");
  return m;
}

// Runs fn(ensemble, x) for the design, with x drawn from x_seed.
template <class F>
void with_instance(Design d, std::size_t n, std::size_t m, double ratio,
                   std::uint64_t e_seed, std::uint64_t x_seed, F&& fn) {
  switch (d) {
    case Design::gaussian_real: {
      auto e = sample_gaussian_real(n, m, e_seed);
      auto x = draw_signal<double>(n, x_seed);
      fn(e, x);
      return;
    }
    case Design::gaussian_complex: {
      auto e = sample_gaussian_complex(n, m, e_seed);
      auto x = draw_signal<cplx>(n, x_seed);
      fn(e, x);
      return;
    }
    case Design::cdp: {
      auto L = static_cast<std::size_t>(std::llround(ratio));
      auto e = sample_cdp(n, L, e_seed);
      auto x = draw_signal<cplx>(n, x_seed);
      fn(e, x);
      return;
    }
  }
}

std::string spec_echo(const ExperimentSpec& spec, const char* experiment) {
  std::ostringstream os;
  os << "# " << kVersion << " | experiment=" << experiment
     << " design=" << design_name(spec.design) << " n=";
  for (std::size_t i = 0; i < spec.n_list.size(); ++i)
    os << (i ? "," : "") << spec.n_list[i];
  os << " ratio=";
  for (std::size_t i = 0; i < spec.ratios.size(); ++i)
    os << (i ? "," : "") << format_double(spec.ratios[i]);
  os << " snr_db=";
  for (std::size_t i = 0; i < spec.snr_db_list.size(); ++i)
    os << (i ? "," : "") << format_double(spec.snr_db_list[i]);
  os << " trials=" << spec.trials << " seed=" << spec.seed;
  const auto& st = spec.solver.step;
  if (st.mode == StepMode::fixed)
    os << " step=fixed:" << format_double(st.mu);
  else
    os << " step=backtrack:" << format_double(st.beta);
  const auto& p = spec.solver.params;
  os << " max_iters=" << spec.solver.max_iters << " grad_tol="
     << format_double(spec.solver.grad_tol) << " params="
     << format_double(p.alpha_z_lb) << "," << format_double(p.alpha_z_ub)
     << "," << format_double(p.alpha_h) << "," << format_double(p.alpha_y)
     << "," << format_double(p.alpha_p)
     << " power_iters=" << spec.solver.init.power_iters
     << " threshold=" << format_double(spec.success_threshold);
  return os.str();
}

void check_grid(const ExperimentSpec& spec, bool needs_snr) {
  if (spec.n_list.empty()) throw std::invalid_argument("empty n list");
  if (spec.ratios.empty()) throw std::invalid_argument("empty ratio list");
  if (needs_snr && spec.snr_db_list.empty())
    throw std::invalid_argument("empty snr list");
  if (spec.trials < 1) throw std::invalid_argument("trials must be >= 1");
}

}  // namespace

Design parse_design(const std::string& name) {
  if (name == "gaussian-real") return Design::gaussian_real;
  if (name == "gaussian-complex") return Design::gaussian_complex;
  if (name == "cdp") return Design::cdp;
  throw std::invalid_argument("unknown design: " + name);
}

std::string design_name(Design d) {
  switch (d) {
    case Design::gaussian_real: return "gaussian-real";
    case Design::gaussian_complex: return "gaussian-complex";
    case Design::cdp: return "cdp";
  }
  return "?";
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

unsigned worker_count(std::size_t jobs) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("TWF_THREADS")) {
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) hw = static_cast<unsigned>(cap);
  }
  if (jobs < hw) hw = static_cast<unsigned>(jobs);
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t count,
                  const std::function<void(std::size_t)>& fn) {
  unsigned workers = worker_count(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  auto body = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

ResultTable run_phase_transition(const ExperimentSpec& spec) {
  check_grid(spec, false);
  ResultTable table;
  table.header =
      "design,n,ratio,m,solver,trials,successes,success_rate,mean_final_rel_err,seed";
  table.comment = spec_echo(spec, "phase-transition");

  struct TrialOut {
    double twf_err = 0.0;
    double wf_err = 0.0;
  };

  for (std::size_t n : spec.n_list) {
    for (double ratio : spec.ratios) {
      std::size_t m = resolve_m(spec.design, n, ratio);
      std::vector<TrialOut> res(spec.trials);
      parallel_for(spec.trials, [&](std::size_t t) {
        auto xs = cell_seed(spec, kExpPhaseTransition, n, m, 0, t, kStreamSignal);
        auto es = cell_seed(spec, kExpPhaseTransition, n, m, 0, t, kStreamEnsemble);
        auto is = cell_seed(spec, kExpPhaseTransition, n, m, 0, t, kStreamInit);
        with_instance(spec.design, n, m, ratio, es, xs, [&](auto& e, auto& x) {
          auto y = intensities(e, cspan(x));
          SolverConfig cfg = spec.solver;
          cfg.init.seed = is;
          auto r = solve_twf(e, cspan(y), cfg, cspan(x));
          res[t].twf_err = r.trace.final_relative_error;
          if (spec.run_wf) {
            auto rw = solve_wf(e, cspan(y), cfg, cspan(x));
            res[t].wf_err = rw.trace.final_relative_error;
          }
        });
      });

      auto emit = [&](const char* solver, auto err_of) {
        std::size_t succ = 0;
        double err_sum = 0.0;
        for (std::size_t t = 0; t < spec.trials; ++t) {
          double err = err_of(res[t]);
          err_sum += err;
          if (err <= spec.success_threshold) ++succ;
        }
        std::ostringstream row;
        row << design_name(spec.design) << ',' << n << ','
            << format_double(ratio) << ',' << m << ',' << solver << ','
            << spec.trials << ',' << succ << ','
            << format_double(static_cast<double>(succ) /
                             static_cast<double>(spec.trials))
            << ',' << format_double(err_sum / static_cast<double>(spec.trials))
            << ',' << spec.seed;
        table.rows.push_back(row.str());
      };
      emit("twf", [](const TrialOut& o) { return o.twf_err; });
      if (spec.run_wf) emit("wf", [](const TrialOut& o) { return o.wf_err; });
    }
  }
  return table;
}

ResultTable run_mse_vs_snr(const ExperimentSpec& spec) {
  check_grid(spec, true);
  if (spec.with_oracle && spec.design != Design::gaussian_real)
    throw std::invalid_argument(
        "mse-vs-snr: the sign oracle is defined for the real Gaussian design");
  ResultTable table;
  table.header = "design,n,ratio,m,snr_db,solver,trials,rel_mse_db,mean_rel_mse,seed";
  table.comment = spec_echo(spec, "mse-vs-snr");

  struct TrialOut {
    double twf_mse = 0.0;
    double oracle_mse = 0.0;
  };

  for (std::size_t n : spec.n_list) {
    for (double ratio : spec.ratios) {
      std::size_t m = resolve_m(spec.design, n, ratio);
      for (double snr_db_target : spec.snr_db_list) {
        std::vector<TrialOut> res(spec.trials);
        parallel_for(spec.trials, [&](std::size_t t) {
          auto xs = cell_seed(spec, kExpMseVsSnr, n, m, snr_db_target, t, kStreamSignal);
          auto es = cell_seed(spec, kExpMseVsSnr, n, m, snr_db_target, t, kStreamEnsemble);
          auto ns = cell_seed(spec, kExpMseVsSnr, n, m, snr_db_target, t, kStreamNoise);
          auto is = cell_seed(spec, kExpMseVsSnr, n, m, snr_db_target, t, kStreamInit);
          with_instance(spec.design, n, m, ratio, es, xs, [&](auto& e, auto& x) {
            // Scale the signal so 3|x|^2 matches the target SNR.
            double target_norm =
                std::sqrt(std::pow(10.0, snr_db_target / 10.0) / 3.0);
            double nx = nrm(cspan(x));
            for (auto& v : x) v = v * (target_norm / nx);

            auto mu = intensities(e, cspan(x));
            auto y = observe(cspan(mu), NoiseSpec::poisson(), ns);
            SolverConfig cfg = spec.solver;
            cfg.init.seed = is;
            auto r = solve_twf(e, cspan(y), cfg, cspan(x));
            res[t].twf_mse = relative_mse(cspan(r.estimate), cspan(x));

            if (spec.with_oracle) {
              if constexpr (!is_complex_v<
                                std::decay_t<decltype(x[0])>>) {
                auto w = e.forward(cspan(x));
                std::vector<double> signs(w.size());
                for (std::size_t i = 0; i < w.size(); ++i)
                  signs[i] = w[i] >= 0.0 ? 1.0 : -1.0;
                OracleConfig ocfg;
                ocfg.grad_tol = 1e-6 * std::max(lambda0(cspan(y)), 1e-3);
                auto om = solve_phase_oracle_mle(e, cspan(y), cspan(signs), ocfg);
                res[t].oracle_mse = relative_mse(cspan(om.z), cspan(x));
              }
            }
          });
        });

        auto emit = [&](const char* solver, auto mse_of) {
          double acc = 0.0;
          for (std::size_t t = 0; t < spec.trials; ++t) acc += mse_of(res[t]);
          double mean = acc / static_cast<double>(spec.trials);
          std::ostringstream row;
          row << design_name(spec.design) << ',' << n << ','
              << format_double(ratio) << ',' << m << ','
              << format_double(snr_db_target) << ',' << solver << ','
              << spec.trials << ',' << format_double(to_db(mean)) << ','
              << format_double(mean) << ',' << spec.seed;
          table.rows.push_back(row.str());
        };
        emit("twf", [](const TrialOut& o) { return o.twf_mse; });
        if (spec.with_oracle)
          emit("oracle", [](const TrialOut& o) { return o.oracle_mse; });
      }
    }
  }
  return table;
}

ResultTable run_init_compare(const ExperimentSpec& spec) {
  check_grid(spec, false);
  ResultTable table;
  table.header = "design,n,ratio,m,method,trials,mean_init_rel_err,seed";
  table.comment = spec_echo(spec, "init-compare");

  struct TrialOut {
    double trunc_err = 0.0;
    double plain_err = 0.0;
  };

  for (std::size_t n : spec.n_list) {
    for (double ratio : spec.ratios) {
      std::size_t m = resolve_m(spec.design, n, ratio);
      std::vector<TrialOut> res(spec.trials);
      parallel_for(spec.trials, [&](std::size_t t) {
        auto xs = cell_seed(spec, kExpInitCompare, n, m, 0, t, kStreamSignal);
        auto es = cell_seed(spec, kExpInitCompare, n, m, 0, t, kStreamEnsemble);
        auto is = cell_seed(spec, kExpInitCompare, n, m, 0, t, kStreamInit);
        with_instance(spec.design, n, m, ratio, es, xs, [&](auto& e, auto& x) {
          auto y = intensities(e, cspan(x));
          InitConfig ic = spec.solver.init;
          ic.alpha_y = spec.solver.params.alpha_y;
          ic.seed = is;
          ic.truncated = true;
          auto zt = spectral_init(e, cspan(y), ic);
          res[t].trunc_err = relative_error(cspan(zt.z0), cspan(x));
          ic.truncated = false;
          auto zp = spectral_init(e, cspan(y), ic);
          res[t].plain_err = relative_error(cspan(zp.z0), cspan(x));
        });
      });

      auto emit = [&](const char* method, auto err_of) {
        double acc = 0.0;
        for (std::size_t t = 0; t < spec.trials; ++t) acc += err_of(res[t]);
        std::ostringstream row;
        row << design_name(spec.design) << ',' << n << ','
            << format_double(ratio) << ',' << m << ',' << method << ','
            << spec.trials << ','
            << format_double(acc / static_cast<double>(spec.trials)) << ','
            << spec.seed;
        table.rows.push_back(row.str());
      };
      emit("truncated", [](const TrialOut& o) { return o.trunc_err; });
      emit("plain", [](const TrialOut& o) { return o.plain_err; });
    }
  }
  return table;
}

ResultTable run_cg_compare(const ExperimentSpec& spec) {
  check_grid(spec, false);
  if (spec.design != Design::gaussian_real)
    throw std::invalid_argument("cg-compare: real Gaussian design required");
  if (spec.solver.step.mode != StepMode::fixed)
    throw std::invalid_argument("cg-compare: fixed step mode required");
  ResultTable table;
  table.header = "design,n,ratio,m,trial,cond_kappa,solver,iter,matvecs,rel_err,seed";
  table.comment = spec_echo(spec, "cg-compare");

  struct TrialOut {
    double kappa = 0.0;
    std::vector<CgRecord> cg;
    std::vector<std::pair<long, double>> twf;  // (matvecs, rel_err) per iterate
  };

  for (std::size_t n : spec.n_list) {
    for (double ratio : spec.ratios) {
      std::size_t m = resolve_m(spec.design, n, ratio);
      std::vector<TrialOut> res(spec.trials);
      parallel_for(spec.trials, [&](std::size_t t) {
        auto xs = cell_seed(spec, kExpCgCompare, n, m, 0, t, kStreamSignal);
        auto es = cell_seed(spec, kExpCgCompare, n, m, 0, t, kStreamEnsemble);
        auto is = cell_seed(spec, kExpCgCompare, n, m, 0, t, kStreamInit);
        auto e = sample_gaussian_real(n, m, es);
        auto x = draw_signal<double>(n, xs);
        res[t].kappa = normal_condition_number(e).kappa;

        auto b = e.forward(cspan(x));
        std::vector<double> y(m);
        for (std::size_t i = 0; i < m; ++i) y[i] = b[i] * b[i];

        CgConfig cg_cfg;
        cg_cfg.max_iters = 50;
        cg_cfg.tol = 1e-14;
        auto cg = solve_cg_normal(e, cspan(b), cg_cfg, cspan(x));
        res[t].cg = std::move(cg.trace);

        SolverConfig cfg = spec.solver;
        cfg.init.seed = is;
        auto r = solve_twf(e, cspan(y), cfg, cspan(x));
        long init_mv = 2L * cfg.init.power_iters + 1;
        for (const auto& rec : r.trace.records)
          res[t].twf.emplace_back(init_mv + 2L * rec.t, rec.relative_error);
        res[t].twf.emplace_back(
            init_mv + 2L * static_cast<long>(r.trace.records.size()),
            r.trace.final_relative_error);
      });

      for (std::size_t t = 0; t < spec.trials; ++t) {
        auto prefix = [&](const char* solver) {
          std::ostringstream os;
          os << design_name(spec.design) << ',' << n << ','
             << format_double(ratio) << ',' << m << ',' << t << ','
             << format_double(res[t].kappa) << ',' << solver << ',';
          return os.str();
        };
        std::string cg_prefix = prefix("cg");
        for (const auto& rec : res[t].cg) {
          std::ostringstream row;
          row << cg_prefix << rec.iter << ',' << rec.matvecs << ','
              << format_double(rec.relative_error) << ',' << spec.seed;
          table.rows.push_back(row.str());
        }
        std::string twf_prefix = prefix("twf");
        for (std::size_t k = 0; k < res[t].twf.size(); ++k) {
          std::ostringstream row;
          row << twf_prefix << k << ',' << res[t].twf[k].first << ','
              << format_double(res[t].twf[k].second) << ',' << spec.seed;
          table.rows.push_back(row.str());
        }
      }
    }
  }
  return table;
}

std::string table_to_string(const ResultTable& table) {
  std::string out = table.header;
  out += '\n';
  for (const auto& r : table.rows) {
    out += r;
    out += '\n';
  }
  out += table.comment;
  out += '\n';
  return out;
}

void write_table(const ResultTable& table, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << table_to_string(table);
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    kv[key] = val;
  }
  return kv;
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace twf
