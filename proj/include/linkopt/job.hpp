#pragma once

#include <string>

#include "linkopt/optimizer.hpp"

namespace linkopt {

/// Everything a single CLI invocation needs.  Defaults mirror the CLI;
/// numeric parameters are validated before the run.
struct JobConfig {
  std::string command;       // rank | optimize | round | bench | verify
  std::string graph_path;
  std::string weights_path;  // input weights (round; optional initial point elsewhere)
  std::string algorithm = "hits";      // hits | hots | perron
  std::string objective;               // default depends on the algorithm
  std::string normalization;           // default depends on the algorithm
  bool maximize = true;

  double xi = 1e-4;
  double alpha = 0.9;
  bool hots_precondition = false;

  std::string x0 = "half";  // half | zeros | ones | random | file
  unsigned long long seed = 1;
  std::string out_dir = ".";

  ArmijoParams armijo;
  MasterParams master;
  std::string strategy = "master";  // master | fixed
  double fixed_eps = 1e-9;

  double rank_tol = 1e-10;
  long rank_max_iter = 0;  // 0: 10 n + 1000

  int bench_dense_cap = 200;
  double bench_target_rel = 1e-6;
  long bench_max_outer = 2000;

  double threshold_tol = 1e-8;
  bool allow_self_links = false;

  void validate() const;  // throws std::invalid_argument
};

struct JobResult {
  int exit_code = 0;     // 0 ok, 1 usage/IO, 2 numerical non-convergence
  std::string summary;   // the summary document (also written to <out_dir>/summary.json)
  std::string message;   // human-readable status line
};

/// Runs one job end to end and writes the result bundle into cfg.out_dir.
/// I/O and validation problems surface as exit code 1 with a message;
/// numerical non-convergence as exit code 2 (with a partial bundle).
JobResult run_job(const JobConfig& cfg);

}  // namespace linkopt
