#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "twf/baselines.hpp"
#include "twf/noise.hpp"
#include "twf/solver.hpp"

namespace twf {

extern const char* kVersion;

enum class Design { gaussian_real, gaussian_complex, cdp };

Design parse_design(const std::string& name);
std::string design_name(Design d);

// One benchmark description.  Cell coordinates (n, ratio, snr) are crossed;
// each cell runs `trials` independent instances whose seeds are derived from
// `seed` and the cell coordinates, so results never depend on scheduling or
// on which other cells run.
struct ExperimentSpec {
  Design design = Design::gaussian_real;
  std::vector<std::size_t> n_list;
  std::vector<double> ratios;        // m = round(ratio*n); for cdp: mask count L
  std::vector<double> snr_db_list;   // mse-vs-snr only
  std::size_t trials = 50;
  std::uint64_t seed = 1;
  SolverConfig solver;
  bool run_wf = false;               // phase-transition: also run the untruncated solver
  bool with_oracle = true;           // mse-vs-snr: also run the sign-oracle MLE
  double success_threshold = 1e-5;
};

struct ResultTable {
  std::string header;
  std::vector<std::string> rows;
  std::string comment;  // trailing '#' line: version + spec echo
};

// Success-rate grid over (n, ratio) on noiseless data.
ResultTable run_phase_transition(const ExperimentSpec& spec);

// Mean relative MSE (dB) versus SNR under Poisson noise, optionally alongside
// the sign-oracle MLE (real Gaussian design only).
ResultTable run_mse_vs_snr(const ExperimentSpec& spec);

// Mean initialization error of the trimmed versus plain spectral start.
ResultTable run_init_compare(const ExperimentSpec& spec);

// Per-iteration relative error and transform counts of CG on the signed
// normal equations versus the trimmed solver on intensities, one block per
// seed, plus the exact condition number of (1/m) A^T A.
ResultTable run_cg_compare(const ExperimentSpec& spec);

std::string table_to_string(const ResultTable& table);
void write_table(const ResultTable& table, const std::string& path);

// Flat key=value config text ('#' starts a comment).  Keys mirror the CLI
// long flags.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> load_config_file(const std::string& path);

// Trial-level parallelism: TWF_THREADS caps the worker count (default: number
// of hardware threads).  Results are aggregated by index, so the output is
// identical for any worker count.
unsigned worker_count(std::size_t jobs);
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

std::string format_double(double v);

}  // namespace twf
