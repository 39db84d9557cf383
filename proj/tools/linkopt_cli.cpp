#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "linkopt/job.hpp"

namespace {

/// "key value" lines; '#' starts a comment.  Applied after flag parsing, so
/// config-file entries override flags.  Environment variables are never read.
void apply_config_file(const std::string& path, linkopt::JobConfig& cfg) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);

  std::map<std::string, std::function<void(const std::string&)>> setters = {
      {"graph", [&](const std::string& v) { cfg.graph_path = v; }},
      {"weights", [&](const std::string& v) { cfg.weights_path = v; }},
      {"algorithm", [&](const std::string& v) { cfg.algorithm = v; }},
      {"objective", [&](const std::string& v) { cfg.objective = v; }},
      {"normalization", [&](const std::string& v) { cfg.normalization = v; }},
      {"maximize", [&](const std::string& v) { cfg.maximize = v == "true" || v == "1"; }},
      {"xi", [&](const std::string& v) { cfg.xi = std::stod(v); }},
      {"alpha", [&](const std::string& v) { cfg.alpha = std::stod(v); }},
      {"precondition", [&](const std::string& v) { cfg.hots_precondition = v == "true" || v == "1"; }},
      {"x0", [&](const std::string& v) { cfg.x0 = v; }},
      {"seed", [&](const std::string& v) { cfg.seed = std::stoull(v); }},
      {"out", [&](const std::string& v) { cfg.out_dir = v; }},
      {"strategy", [&](const std::string& v) { cfg.strategy = v; }},
      {"sigma", [&](const std::string& v) { cfg.armijo.sigma = std::stod(v); }},
      {"alpha0", [&](const std::string& v) { cfg.armijo.alpha0 = std::stod(v); }},
      {"beta", [&](const std::string& v) { cfg.armijo.beta = std::stod(v); }},
      {"delta0", [&](const std::string& v) { cfg.master.delta0 = std::stod(v); }},
      {"omega", [&](const std::string& v) { cfg.master.omega = std::stod(v); }},
      {"sigma-prime", [&](const std::string& v) { cfg.master.sigma_prime = std::stod(v); }},
      {"n-start", [&](const std::string& v) { cfg.master.n_start = std::stoi(v); }},
      {"delta-tol", [&](const std::string& v) { cfg.master.delta_tol = std::stod(v); }},
      {"stat-tol", [&](const std::string& v) { cfg.master.stat_tol = std::stod(v); }},
      {"max-outer", [&](const std::string& v) { cfg.master.max_outer = std::stol(v); }},
      {"fixed-eps", [&](const std::string& v) { cfg.fixed_eps = std::stod(v); }},
      {"rank-tol", [&](const std::string& v) { cfg.rank_tol = std::stod(v); }},
      {"rank-max-iter", [&](const std::string& v) { cfg.rank_max_iter = std::stol(v); }},
      {"dense-cap", [&](const std::string& v) { cfg.bench_dense_cap = std::stoi(v); }},
      {"bench-target-rel", [&](const std::string& v) { cfg.bench_target_rel = std::stod(v); }},
      {"bench-max-outer", [&](const std::string& v) { cfg.bench_max_outer = std::stol(v); }},
      {"threshold-tol", [&](const std::string& v) { cfg.threshold_tol = std::stod(v); }},
      {"allow-self-links", [&](const std::string& v) { cfg.allow_self_links = v == "true" || v == "1"; }},
  };

  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key)) continue;
    if (!(ls >> value)) throw std::runtime_error("config line " + std::to_string(lineno) + ": missing value");
    auto it = setters.find(key);
    if (it == setters.end())
      throw std::runtime_error("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second(value);
  }
}

void add_common(CLI::App* sub, linkopt::JobConfig& cfg, std::string& config_path) {
  sub->add_option("graph", cfg.graph_path, "edge-list graph file")->required();
  sub->add_option("--weights", cfg.weights_path, "weight-vector file");
  sub->add_option("--algorithm", cfg.algorithm, "hits | hots | perron");
  sub->add_option("--objective", cfg.objective,
                  "target-sum-squares | target-sum | target-sum-exp | coordinate:<i> | normalization");
  sub->add_option("--normalization", cfg.normalization,
                  "l1 | l2 | weighted-l2 | coordinate:<i>; hots: mean | lse | lse-target");
  sub->add_flag("--minimize", [&cfg](std::int64_t) { cfg.maximize = false; },
                "minimize instead of maximize");
  sub->add_option("--xi", cfg.xi, "irreducibility shift for h(A)");
  sub->add_option("--alpha", cfg.alpha, "entropy mixing parameter, in (1/2,1)");
  sub->add_flag("--precondition", cfg.hots_precondition, "diag(d) preconditioner for the auxiliary vector");
  sub->add_option("--out", cfg.out_dir, "output directory");
  sub->add_option("--seed", cfg.seed, "random seed (x0 random)");
  sub->add_option("--config", config_path, "key-value config file; entries override flags");
  sub->add_option("--threshold-tol", cfg.threshold_tol, "indifference tolerance for arc classes");
  sub->add_flag("--allow-self-links", cfg.allow_self_links, "keep facultative self-links");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ranking-vector optimization over link graphs"};
  app.require_subcommand(1);

  linkopt::JobConfig cfg;
  std::string config_path;

  auto* rank = app.add_subcommand("rank", "compute ranking scores for a graph");
  add_common(rank, cfg, config_path);
  rank->add_option("--tol", cfg.rank_tol, "ranking residual tolerance");
  rank->add_option("--max-iter", cfg.rank_max_iter, "iteration cap (0: 10n+1000)");

  auto* opt = app.add_subcommand("optimize", "optimize facultative link weights");
  add_common(opt, cfg, config_path);
  opt->add_option("--x0", cfg.x0, "half | zeros | ones | random | file");
  opt->add_option("--strategy", cfg.strategy, "master | fixed");
  opt->add_option("--fixed-eps", cfg.fixed_eps, "inner tolerance of the fixed strategy");
  opt->add_option("--sigma", cfg.armijo.sigma, "Armijo sufficient-decrease fraction");
  opt->add_option("--alpha0", cfg.armijo.alpha0, "initial step (rescaled once by 1/||g||_inf)");
  opt->add_option("--beta", cfg.armijo.beta, "backtracking factor");
  opt->add_option("--delta0", cfg.master.delta0, "Delta(n) = delta0^n");
  opt->add_option("--omega", cfg.master.omega, "decrease-test exponent");
  opt->add_option("--sigma-prime", cfg.master.sigma_prime, "decrease-test scale");
  opt->add_option("--n-start", cfg.master.n_start, "initial precision level");
  opt->add_option("--delta-tol", cfg.master.delta_tol, "terminal precision threshold");
  opt->add_option("--stat-tol", cfg.master.stat_tol, "stationarity displacement threshold");
  opt->add_option("--max-outer", cfg.master.max_outer, "outer iteration cap");

  auto* round = app.add_subcommand("round", "threshold-round a relaxed weight vector");
  add_common(round, cfg, config_path);

  auto* bench = app.add_subcommand("bench", "compare the three gradient-evaluation strategies");
  add_common(bench, cfg, config_path);
  bench->add_option("--x0", cfg.x0, "half | zeros | ones | random | file");
  bench->add_option("--fixed-eps", cfg.fixed_eps, "inner tolerance of the fixed strategy");
  bench->add_option("--dense-cap", cfg.bench_dense_cap, "size cap of the dense strategy");
  bench->add_option("--bench-target-rel", cfg.bench_target_rel, "relative target tolerance");
  bench->add_option("--bench-max-outer", cfg.bench_max_outer, "outer cap per strategy");
  bench->add_option("--stat-tol", cfg.master.stat_tol, "stationarity displacement threshold");
  bench->add_option("--delta-tol", cfg.master.delta_tol, "terminal precision threshold");

  auto* verify = app.add_subcommand("verify", "certify an eigenpair a posteriori");
  add_common(verify, cfg, config_path);
  verify->add_option("--tol", cfg.rank_tol, "ranking residual tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 1 : 0;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  try {
    if (!config_path.empty()) apply_config_file(config_path, cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  const linkopt::JobResult result = linkopt::run_job(cfg);
  if (result.exit_code == 1) {
    std::cerr << "error: " << result.message << "\n";
  } else {
    std::cout << result.summary;
    if (result.exit_code != 0) std::cerr << "warning: " << result.message << "\n";
  }
  return result.exit_code;
}
