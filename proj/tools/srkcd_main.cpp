// Command-line harness for step-size sweeps, convergence studies and
// coefficient reports.  Config can come from a JSON file (--config) with
// individual flags overriding the file values.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "srkcd/experiments.hpp"

namespace {

using nlohmann::json;
using namespace srkcd;

Method parse_method(const std::string& name) {
  if (name == "sgd") return Method::sgd;
  if (name == "srkcd") return Method::srkcd_recursion;
  if (name == "srkcd-momentum") return Method::srkcd_momentum;
  if (name == "rk") return Method::rk_tableau;
  throw CLI::ValidationError("--method", "unknown method: " + name);
}

ProblemKind parse_problem(const std::string& name) {
  if (name == "quadratic") return ProblemKind::quadratic;
  if (name == "nonconvex") return ProblemKind::nonconvex;
  throw CLI::ValidationError("--problem", "unknown problem: " + name);
}

std::vector<double> parse_alpha_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    out.push_back(std::stod(cell));
  }
  return out;
}

// "lo:hi:count" as fractions of the stability limit.
void parse_alpha_grid(const std::string& text, double& lo, double& hi, int& count) {
  std::stringstream ss(text);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, ':')) {
    parts.push_back(part);
  }
  if (parts.size() != 3) {
    throw CLI::ValidationError("--alpha-grid", "expected lo:hi:count");
  }
  lo = std::stod(parts[0]);
  hi = std::stod(parts[1]);
  count = std::stoi(parts[2]);
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  json j;
  in >> j;
  return j;
}

// Flags that were not given on the command line fall back to the config
// file; the file falls back to the built-in defaults.
template <typename T>
void from_config(const json& cfg, const char* key, T& value) {
  if (cfg.contains(key)) {
    value = cfg.at(key).get<T>();
  }
}

struct CommonFlags {
  std::string config_path;
  std::string method = "srkcd";
  int stages = 5;
  double epsilon = 0.01;
  std::string problem = "quadratic";
  int n = 1000;
  int dim = 50;
  std::uint64_t data_seed = 1;
  int batch_size = 32;
  int repeats = 1;
  std::uint64_t seed = 12345;
  std::string out;
  double w1 = 1.0;
  int threads = 0;
  double divergence_threshold = 1e12;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file; flags override it");
  cmd->add_option("--method", f.method, "sgd | srkcd | srkcd-momentum | rk");
  cmd->add_option("--stages", f.stages, "stage count s");
  cmd->add_option("--epsilon", f.epsilon, "damping parameter");
  cmd->add_option("--problem", f.problem, "quadratic | nonconvex");
  cmd->add_option("--n", f.n, "number of samples");
  cmd->add_option("--dim", f.dim, "parameter dimension");
  cmd->add_option("--data-seed", f.data_seed, "dataset generation seed");
  cmd->add_option("--batch-size", f.batch_size, "mini-batch size");
  cmd->add_option("--repeats", f.repeats, "number of seeded repeats");
  cmd->add_option("--seed", f.seed, "base seed for run seeds");
  cmd->add_option("--out", f.out, "output base path (writes <out>.csv, <out>.json)");
  cmd->add_option("--w1", f.w1, "initial point value (every component)");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  cmd->add_option("--divergence-threshold", f.divergence_threshold,
                  "loss value treated as blow-up");
}

void apply_common_config(const json& cfg, const CLI::App* cmd, CommonFlags& f) {
  // Only fields not explicitly set by a flag are taken from the file.
  const auto maybe = [&](const char* flag, auto& value, const char* key) {
    if (cmd->count(flag) == 0) {
      from_config(cfg, key, value);
    }
  };
  maybe("--method", f.method, "method");
  maybe("--stages", f.stages, "stages");
  maybe("--epsilon", f.epsilon, "epsilon");
  maybe("--problem", f.problem, "problem");
  maybe("--n", f.n, "n");
  maybe("--dim", f.dim, "dim");
  maybe("--data-seed", f.data_seed, "data_seed");
  maybe("--batch-size", f.batch_size, "batch_size");
  maybe("--repeats", f.repeats, "repeats");
  maybe("--seed", f.seed, "seed");
  maybe("--out", f.out, "out");
  maybe("--w1", f.w1, "w1");
  maybe("--threads", f.threads, "threads");
  maybe("--divergence-threshold", f.divergence_threshold, "divergence_threshold");
}

MethodSpec make_method_spec(const CommonFlags& f) {
  return {parse_method(f.method), f.stages, f.epsilon};
}

ProblemSpec make_problem_spec(const CommonFlags& f) {
  return {parse_problem(f.problem), f.n, f.dim, f.data_seed};
}

int run_sweep(const CommonFlags& f, const json& cfg, const CLI::App* cmd,
              const std::string& alpha, const std::string& alpha_grid,
              long iterations, int epochs) {
  SweepConfig sc;
  sc.method = make_method_spec(f);
  sc.problem = make_problem_spec(f);
  sc.batch_size = f.batch_size;
  sc.repeats = f.repeats;
  sc.base_seed = f.seed;
  sc.w1_value = f.w1;
  sc.threads = f.threads;
  sc.divergence_threshold = f.divergence_threshold;
  sc.out_path = f.out;
  sc.iterations = iterations;
  sc.epochs = epochs;
  if (cmd->count("--iterations") == 0) {
    from_config(cfg, "iterations", sc.iterations);
  }
  if (cmd->count("--epochs") == 0) {
    from_config(cfg, "epochs", sc.epochs);
  }

  std::string grid_text = alpha_grid;
  if (cmd->count("--alpha-grid") == 0 && cfg.contains("alpha_grid")) {
    grid_text = cfg.at("alpha_grid").get<std::string>();
  }
  std::string alpha_text = alpha;
  if (cmd->count("--alpha") == 0 && cfg.contains("alpha")) {
    alpha_text = cfg.at("alpha").dump();
  }
  if (!grid_text.empty()) {
    parse_alpha_grid(grid_text, sc.grid_lo, sc.grid_hi, sc.grid_count);
  } else if (!alpha_text.empty()) {
    sc.explicit_grid = parse_alpha_list(alpha_text);
  } else if (cfg.contains("explicit_grid")) {
    sc.explicit_grid = cfg.at("explicit_grid").get<std::vector<double>>();
  }

  const SweepResult result = cmd_sweep(sc);
  if (sc.out_path.empty()) {
    std::cout << sweep_csv(result);
  } else {
    std::cout << "wrote " << sc.out_path << ".csv and " << sc.out_path << ".json\n";
  }
  return 0;
}

int run_converge(const CommonFlags& f, const json& cfg, const CLI::App* cmd,
                 double alpha, double beta, double gamma, long iterations,
                 long fit_kmin, double q_mu, double q_mg) {
  ConvergeConfig cc;
  cc.method = make_method_spec(f);
  cc.problem = make_problem_spec(f);
  cc.batch_size = f.batch_size;
  cc.repeats = f.repeats;
  cc.base_seed = f.seed;
  cc.w1_value = f.w1;
  cc.threads = f.threads;
  cc.divergence_threshold = f.divergence_threshold;
  cc.out_path = f.out;
  cc.iterations = iterations;
  cc.fit_k_min = fit_kmin;
  cc.q_mu = q_mu;
  cc.q_m_g = q_mg;
  if (cmd->count("--iterations") == 0) {
    from_config(cfg, "iterations", cc.iterations);
  }

  const bool has_alpha = cmd->count("--alpha") > 0 || cfg.contains("alpha");
  if (has_alpha) {
    double a = alpha;
    if (cmd->count("--alpha") == 0) {
      from_config(cfg, "alpha", a);
    }
    cc.schedule = StepSchedule::constant(a);
  } else {
    double b = beta;
    double g = gamma;
    if (cmd->count("--beta") == 0) {
      from_config(cfg, "beta", b);
    }
    if (cmd->count("--gamma") == 0) {
      from_config(cfg, "gamma", g);
    }
    cc.schedule = StepSchedule::harmonic(b, g);
  }

  const ConvergeReport report = cmd_converge(cc);
  for (const std::string& w : report.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  if (cc.out_path.empty()) {
    std::cout << converge_metadata(report).dump(2) << "\n";
  } else {
    std::cout << "wrote " << cc.out_path << ".csv and " << cc.out_path << ".json\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chebyshev-stabilized stochastic optimization experiments"};
  app.require_subcommand(1);

  CommonFlags sweep_flags;
  auto* sweep_cmd = app.add_subcommand("sweep", "step-size stability sweep");
  add_common_flags(sweep_cmd, sweep_flags);
  std::string sweep_alpha;
  std::string sweep_alpha_grid;
  long sweep_iterations = 0;
  int sweep_epochs = 3;
  sweep_cmd->add_option("--alpha", sweep_alpha, "explicit step sizes, comma separated");
  sweep_cmd->add_option("--alpha-grid", sweep_alpha_grid,
                        "lo:hi:count as fractions of the stability limit");
  sweep_cmd->add_option("--iterations", sweep_iterations, "iterations per run");
  sweep_cmd->add_option("--epochs", sweep_epochs, "epochs per run (if no --iterations)");

  CommonFlags conv_flags;
  auto* conv_cmd = app.add_subcommand("converge", "convergence-rate study");
  add_common_flags(conv_cmd, conv_flags);
  double conv_alpha = 0.0;
  double conv_beta = 1.0;
  double conv_gamma = 0.0;
  long conv_iterations = 10000;
  long conv_fit_kmin = 100;
  double conv_q_mu = 1.0;
  double conv_q_mg = 1.0;
  conv_cmd->add_option("--alpha", conv_alpha, "constant step size");
  conv_cmd->add_option("--beta", conv_beta, "harmonic schedule beta");
  conv_cmd->add_option("--gamma", conv_gamma, "harmonic schedule gamma");
  conv_cmd->add_option("--iterations", conv_iterations, "iterations per run");
  conv_cmd->add_option("--fit-kmin", conv_fit_kmin, "lower end of the slope fit window");
  conv_cmd->add_option("--q-mu", conv_q_mu, "moment constant mu for the Q check");
  conv_cmd->add_option("--q-mg", conv_q_mg, "moment constant M_G for the Q check");

  auto* coeffs_cmd = app.add_subcommand("coeffs", "coefficient and tableau report");
  int coeffs_stages = 5;
  double coeffs_epsilon = 0.01;
  double coeffs_lipschitz = 1.0;
  double coeffs_mu = 1.0;
  double coeffs_mg = 1.0;
  std::string coeffs_out;
  coeffs_cmd->add_option("--stages", coeffs_stages, "stage count s");
  coeffs_cmd->add_option("--epsilon", coeffs_epsilon, "damping parameter");
  coeffs_cmd->add_option("--lipschitz", coeffs_lipschitz, "L for the step bound");
  coeffs_cmd->add_option("--mu", coeffs_mu, "mu for the step bound");
  coeffs_cmd->add_option("--m-g", coeffs_mg, "M_G for the step bound");
  coeffs_cmd->add_option("--out", coeffs_out, "write the JSON report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep_cmd->parsed()) {
      json cfg;
      if (!sweep_flags.config_path.empty()) {
        cfg = load_config_file(sweep_flags.config_path);
      }
      apply_common_config(cfg, sweep_cmd, sweep_flags);
      return run_sweep(sweep_flags, cfg, sweep_cmd, sweep_alpha, sweep_alpha_grid,
                       sweep_iterations, sweep_epochs);
    }
    if (conv_cmd->parsed()) {
      json cfg;
      if (!conv_flags.config_path.empty()) {
        cfg = load_config_file(conv_flags.config_path);
      }
      apply_common_config(cfg, conv_cmd, conv_flags);
      return run_converge(conv_flags, cfg, conv_cmd, conv_alpha, conv_beta,
                          conv_gamma, conv_iterations, conv_fit_kmin, conv_q_mu,
                          conv_q_mg);
    }
    if (coeffs_cmd->parsed()) {
      const nlohmann::json report = srkcd::cmd_coeffs(
          coeffs_stages, coeffs_epsilon, coeffs_lipschitz, coeffs_mu, coeffs_mg);
      if (coeffs_out.empty()) {
        std::cout << report.dump(2) << "\n";
      } else {
        srkcd::write_text_file(coeffs_out, report.dump(2) + "\n");
        std::cout << "wrote " << coeffs_out << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
