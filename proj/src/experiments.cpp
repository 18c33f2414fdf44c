#include "srkcd/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "srkcd/rng.hpp"

namespace srkcd {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void parallel_for(size_t count, int threads, const std::function<void(size_t)>& fn) {
  int t = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  t = std::max(1, std::min<int>(t, static_cast<int>(count)));
  if (t <= 1) {
    for (size_t i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (int w = 0; w < t; ++w) {
    pool.emplace_back([&] {
      size_t i;
      while ((i = next.fetch_add(1)) < count) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) {
            first_error = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& th : pool) {
    th.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

nlohmann::json method_spec_json(const MethodSpec& m) {
  return {{"method", method_name(m.method)}, {"stages", m.s}, {"epsilon", m.epsilon}};
}

nlohmann::json problem_spec_json(const ProblemSpec& p) {
  return {{"kind", problem_kind_name(p.kind)},
          {"n", p.n},
          {"dim", p.dim},
          {"data_seed", p.data_seed}};
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::sgd:
      return "sgd";
    case Method::srkcd_recursion:
      return "srkcd";
    case Method::rk_tableau:
      return "rk";
    case Method::srkcd_momentum:
      return "srkcd-momentum";
  }
  return "unknown";
}

const char* problem_kind_name(ProblemKind k) {
  return k == ProblemKind::quadratic ? "quadratic" : "nonconvex";
}

std::unique_ptr<GradientOracle> make_problem(const ProblemSpec& spec) {
  if (spec.kind == ProblemKind::quadratic) {
    return std::make_unique<QuadraticProblem>(
        generate_quadratic(spec.n, spec.dim, spec.data_seed));
  }
  return std::make_unique<NonconvexProblem>(
      generate_nonconvex(spec.n, spec.dim, spec.data_seed));
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  out << content;
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

SweepResult cmd_sweep(const SweepConfig& config) {
  if (config.repeats < 1) {
    throw std::invalid_argument("cmd_sweep: repeats must be >= 1");
  }
  if (config.batch_size < 1) {
    throw std::invalid_argument("cmd_sweep: batch_size must be >= 1");
  }

  SweepResult result;
  result.config = config;

  const std::unique_ptr<GradientOracle> problem = make_problem(config.problem);
  if (const auto* quad = dynamic_cast<const QuadraticProblem*>(problem.get())) {
    result.lambda_min = quad->lambda_min();
    result.lambda_max = quad->lambda_max();
  }
  if (const auto lip = problem->lipschitz()) {
    result.lipschitz = *lip;
  }
  if (config.method.method != Method::sgd) {
    result.b_r = real_stability_boundary(
        rkc_coefficients(config.method.s, config.method.epsilon));
  }

  std::vector<double> grid = config.explicit_grid;
  if (grid.empty()) {
    if (result.lipschitz <= 0.0) {
      throw std::invalid_argument(
          "cmd_sweep: generated grids need a problem with a known Lipschitz "
          "constant; pass an explicit grid instead");
    }
    const double limit =
        (config.method.method == Method::sgd ? 2.0 : result.b_r) / result.lipschitz;
    result.stability_limit = limit;
    if (config.grid_count < 1) {
      throw std::invalid_argument("cmd_sweep: grid_count must be >= 1");
    }
    if (!(config.grid_lo > 0.0) || !(config.grid_hi > config.grid_lo)) {
      throw std::invalid_argument("cmd_sweep: need 0 < grid_lo < grid_hi");
    }
    grid.reserve(config.grid_count);
    for (int i = 0; i < config.grid_count; ++i) {
      const double frac =
          config.grid_count == 1
              ? config.grid_lo
              : config.grid_lo + (config.grid_hi - config.grid_lo) * i /
                                     (config.grid_count - 1);
      grid.push_back(frac * limit);
    }
  } else if (result.lipschitz > 0.0) {
    result.stability_limit =
        (config.method.method == Method::sgd ? 2.0 : result.b_r) / result.lipschitz;
  }
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw std::invalid_argument(
          "cmd_sweep: grid values must be strictly positive and increasing");
    }
  }

  long iterations = config.iterations;
  if (iterations <= 0) {
    if (config.epochs < 1) {
      throw std::invalid_argument("cmd_sweep: need iterations or epochs >= 1");
    }
    BatchSampler probe(problem->num_samples(), config.batch_size,
                       SamplingMode::epoch_shuffle, 0);
    iterations = static_cast<long>(config.epochs) * probe.batches_per_epoch();
  }
  result.iterations = iterations;

  const std::vector<double> w1(problem->dim(), config.w1_value);
  const size_t cells = grid.size() * static_cast<size_t>(config.repeats);
  std::vector<double> final_loss(cells, 0.0);
  std::vector<char> cell_diverged(cells, 0);

  parallel_for(cells, config.threads, [&](size_t cell) {
    const size_t gi = cell / config.repeats;
    const size_t rep = cell % config.repeats;
    OptimizerConfig oc;
    oc.method = config.method.method;
    oc.s = config.method.s;
    oc.epsilon = config.method.epsilon;
    oc.schedule = StepSchedule::constant(grid[gi]);
    oc.max_iterations = iterations;
    oc.divergence_threshold = config.divergence_threshold;
    oc.record_every = iterations > 0 ? iterations : 1;
    oc.batch_size = config.batch_size;
    const RunRecord rec =
        run(oc, *problem, w1, derive_seed(config.base_seed, gi, rep));
    cell_diverged[cell] = rec.diverged ? 1 : 0;
    final_loss[cell] = rec.diverged ? config.divergence_threshold
                                    : rec.losses.back().second;
  });

  result.rows.resize(grid.size());
  for (size_t gi = 0; gi < grid.size(); ++gi) {
    SweepRow& row = result.rows[gi];
    row.alpha = grid[gi];
    row.rep_final.resize(config.repeats);
    double sum = 0.0;
    for (int rep = 0; rep < config.repeats; ++rep) {
      const size_t cell = gi * config.repeats + rep;
      row.rep_final[rep] = final_loss[cell];
      row.n_diverged += cell_diverged[cell];
      sum += final_loss[cell];
    }
    row.mean_final_loss = sum / config.repeats;
  }

  if (!config.out_path.empty()) {
    write_text_file(config.out_path + ".csv", sweep_csv(result));
    write_text_file(config.out_path + ".json", sweep_metadata(result).dump(2) + "\n");
  }
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "# srkcd " << kVersion << "\n";
  out << "alpha,mean_final_loss,n_diverged";
  const int repeats = result.config.repeats;
  for (int r = 0; r < repeats; ++r) {
    out << ",rep_" << r;
  }
  out << "\n";
  for (const SweepRow& row : result.rows) {
    out << fmt_double(row.alpha) << "," << fmt_double(row.mean_final_loss) << ","
        << row.n_diverged;
    for (double v : row.rep_final) {
      out << "," << fmt_double(v);
    }
    out << "\n";
  }
  return out.str();
}

nlohmann::json sweep_metadata(const SweepResult& result) {
  const SweepConfig& c = result.config;
  nlohmann::json j;
  j["version"] = kVersion;
  j["config"] = {{"method", method_spec_json(c.method)},
                 {"problem", problem_spec_json(c.problem)},
                 {"batch_size", c.batch_size},
                 {"grid_count", c.grid_count},
                 {"grid_lo", c.grid_lo},
                 {"grid_hi", c.grid_hi},
                 {"explicit_grid", c.explicit_grid},
                 {"iterations", result.iterations},
                 {"epochs", c.epochs},
                 {"repeats", c.repeats},
                 {"w1_value", c.w1_value},
                 {"base_seed", c.base_seed},
                 {"divergence_threshold", c.divergence_threshold}};
  if (result.lambda_max > 0.0) {
    j["lambda_min"] = result.lambda_min;
    j["lambda_max"] = result.lambda_max;
  }
  j["lipschitz"] = result.lipschitz;
  j["b_R"] = result.b_r;
  j["stability_limit"] = result.stability_limit;
  return j;
}

double q_admissible_step(const ButcherTableau& t, double lipschitz, double mu,
                         double m_g) {
  // Scan downward from the stability limit on a fine geometric grid; the
  // admissible set is an interval (0, alpha_Q), so the first hit is the edge.
  const RkcCoefficients unit = rkc_coefficients(t.s, 0.0);
  const double upper = real_stability_boundary(unit) / lipschitz;
  double alpha = upper;
  for (int i = 0; i < 2000; ++i) {
    if (q_function(t, alpha, lipschitz, mu, m_g) < -0.5 * alpha * mu) {
      return alpha;
    }
    alpha *= 0.99;
  }
  throw std::runtime_error("q_admissible_step: no admissible step size found");
}

ConvergeReport cmd_converge(const ConvergeConfig& config) {
  if (config.repeats < 1) {
    throw std::invalid_argument("cmd_converge: repeats must be >= 1");
  }
  if (config.iterations < 1) {
    throw std::invalid_argument("cmd_converge: iterations must be >= 1");
  }

  ConvergeReport report;
  report.config = config;

  const std::unique_ptr<GradientOracle> problem = make_problem(config.problem);
  const bool convex_study = config.problem.kind == ProblemKind::quadratic;

  report.alpha1 = config.schedule.at(1);
  if (const auto c = problem->convexity()) {
    if (!config.schedule.is_constant() &&
        !(config.schedule.beta() > 1.0 / (*c * config.q_mu))) {
      report.schedule_ok = false;
      report.warnings.push_back(
          "schedule: beta <= 1/(c*mu); the sublinear rate guarantee does not apply");
    }
  }
  const auto lip = problem->lipschitz();
  if (lip && report.alpha1 > 0.0) {
    const ButcherTableau t = tableau_from_rkc(rkc_coefficients(
        config.method.method == Method::sgd ? 1 : config.method.s,
        config.method.method == Method::sgd ? 0.0 : config.method.epsilon));
    report.q_at_alpha1 =
        q_function(t, report.alpha1, *lip, config.q_mu, config.q_m_g);
    report.q_check_ok = report.q_at_alpha1 < -0.5 * report.alpha1 * config.q_mu;
    if (!report.q_check_ok) {
      report.warnings.push_back("alpha_1 fails the Q(alpha) < -alpha*mu/2 check");
    }
  } else if (report.alpha1 <= 0.0) {
    report.warnings.push_back("alpha_1 is zero; Q check skipped");
  } else {
    report.warnings.push_back(
        "problem has no analytic Lipschitz constant; Q check skipped");
  }

  // Per-iteration mean of the monitored quantity over all repeats.
  const long n_points = config.iterations + 1;
  std::vector<double> sum_series(n_points, 0.0);
  std::vector<double> w1(problem->dim(), config.w1_value);
  std::atomic<int> diverged_count{0};
  std::mutex accumulate_mutex;

  parallel_for(static_cast<size_t>(config.repeats), config.threads, [&](size_t rep) {
    OptimizerConfig oc;
    oc.method = config.method.method;
    oc.s = config.method.s;
    oc.epsilon = config.method.epsilon;
    oc.schedule = config.schedule;
    oc.max_iterations = config.iterations;
    oc.divergence_threshold = config.divergence_threshold;
    oc.record_every = 1;
    oc.batch_size = config.batch_size;
    const RunRecord rec = run(oc, *problem, w1, derive_seed(config.base_seed, 0, rep));
    if (rec.diverged) {
      diverged_count.fetch_add(1);
    }
    const auto& series = convex_study ? rec.losses : rec.grad_norms;
    std::lock_guard<std::mutex> lock(accumulate_mutex);
    for (const auto& [k, v] : series) {
      sum_series[k] += std::isfinite(v) ? std::min(v, config.divergence_threshold)
                                        : config.divergence_threshold;
    }
    // Diverged runs stop early; extend their last value so means stay comparable.
    if (rec.diverged) {
      for (long k = series.back().first + 1; k < n_points; ++k) {
        sum_series[k] += config.divergence_threshold;
      }
    }
  });

  report.n_diverged = diverged_count.load();
  if (report.n_diverged > 0) {
    report.warnings.push_back("some repeats diverged; their series are clipped");
  }

  // Log-spaced sample points, always including k = 1 and the final iterate.
  std::vector<long> ks;
  const int samples = 120;
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    const long k = std::lround(std::pow(static_cast<double>(config.iterations), t));
    if (ks.empty() || k > ks.back()) {
      ks.push_back(k);
    }
  }
  report.ks = ks;
  report.mean_series.reserve(ks.size());
  double run_min = std::numeric_limits<double>::infinity();
  for (long k : ks) {
    const double mean = sum_series[k] / config.repeats;
    report.mean_series.push_back(mean);
    run_min = std::min(run_min, mean);
    report.running_min.push_back(run_min);
  }

  // Least-squares slope of log(mean) vs log(k) over the fit window.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n_fit = 0;
  for (size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < config.fit_k_min || report.mean_series[i] <= 0.0) {
      continue;
    }
    const double lx = std::log(static_cast<double>(ks[i]));
    const double ly = std::log(report.mean_series[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n_fit;
  }
  if (n_fit >= 2) {
    report.fitted_slope = (n_fit * sxy - sx * sy) / (n_fit * sxx - sx * sx);
  } else {
    report.warnings.push_back("too few positive points in the fit window");
    report.fitted_slope = 0.0;
  }

  if (!config.out_path.empty()) {
    write_text_file(config.out_path + ".csv", converge_csv(report));
    write_text_file(config.out_path + ".json",
                    converge_metadata(report).dump(2) + "\n");
  }
  return report;
}

std::string converge_csv(const ConvergeReport& report) {
  std::ostringstream out;
  out << "# srkcd " << kVersion << "\n";
  out << "k,mean,running_min\n";
  for (size_t i = 0; i < report.ks.size(); ++i) {
    out << report.ks[i] << "," << fmt_double(report.mean_series[i]) << ","
        << fmt_double(report.running_min[i]) << "\n";
  }
  return out.str();
}

nlohmann::json converge_metadata(const ConvergeReport& report) {
  const ConvergeConfig& c = report.config;
  nlohmann::json j;
  j["version"] = kVersion;
  j["config"] = {{"method", method_spec_json(c.method)},
                 {"problem", problem_spec_json(c.problem)},
                 {"batch_size", c.batch_size},
                 {"schedule",
                  c.schedule.is_constant()
                      ? nlohmann::json{{"kind", "constant"}, {"alpha", c.schedule.alpha()}}
                      : nlohmann::json{{"kind", "harmonic"},
                                       {"beta", c.schedule.beta()},
                                       {"gamma", c.schedule.gamma()}}},
                 {"iterations", c.iterations},
                 {"repeats", c.repeats},
                 {"base_seed", c.base_seed},
                 {"w1_value", c.w1_value},
                 {"fit_k_min", c.fit_k_min},
                 {"q_mu", c.q_mu},
                 {"q_m_g", c.q_m_g}};
  j["fitted_slope"] = report.fitted_slope;
  j["schedule_ok"] = report.schedule_ok;
  j["q_check_ok"] = report.q_check_ok;
  j["alpha1"] = report.alpha1;
  j["q_at_alpha1"] = report.q_at_alpha1;
  j["n_diverged"] = report.n_diverged;
  j["warnings"] = report.warnings;
  return j;
}

nlohmann::json cmd_coeffs(int s, double epsilon, double lipschitz, double mu,
                          double m_g) {
  const RkcCoefficients coeffs = rkc_coefficients(s, epsilon);
  const ButcherTableau t = tableau_from_rkc(coeffs);
  const ValidationReport report = validate_assumption_rk(t);

  nlohmann::json j;
  j["s"] = s;
  j["epsilon"] = epsilon;
  j["omega0"] = coeffs.omega0;
  j["omega1"] = coeffs.omega1;
  j["mu_tilde"] = coeffs.mu_tilde;
  j["nu"] = coeffs.nu;
  j["a"] = t.a;
  j["b"] = t.b();
  j["b_R"] = real_stability_boundary(coeffs);
  j["report"] = {{"weights_sum", report.weights_sum},
                 {"weights_sum_ok", report.weights_sum_ok},
                 {"row_abs_sums", report.row_abs_sums},
                 {"row_abs_sums_ok", report.row_abs_sums_ok},
                 {"monotone_row_sums", report.monotone_row_sums},
                 {"all_positive", report.all_positive},
                 {"pass", report.pass()}};
  j["max_step_bound"] = {{"lipschitz", lipschitz},
                         {"mu", mu},
                         {"m_g", m_g},
                         {"value", max_step_bound(lipschitz, mu, m_g)}};
  return j;
}

}  // namespace srkcd
