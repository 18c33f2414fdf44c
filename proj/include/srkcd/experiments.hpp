#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "srkcd/optimizer.hpp"

namespace srkcd {

inline constexpr const char* kVersion = "0.1.0";

enum class ProblemKind { quadratic, nonconvex };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::quadratic;
  int n = 1000;
  int dim = 50;
  std::uint64_t data_seed = 1;
};

struct MethodSpec {
  Method method = Method::srkcd_recursion;
  int s = 5;
  double epsilon = 0.01;
};

/// Configuration of a step-size stability sweep.  The grid is either given
/// explicitly or generated as `grid_count` uniform points between
/// grid_lo and grid_hi, both fractions of the method's stability limit
/// (b_R/L for the Chebyshev schemes, 2/L for plain SGD).
struct SweepConfig {
  MethodSpec method;
  ProblemSpec problem;
  int batch_size = 32;
  std::vector<double> explicit_grid;
  int grid_count = 20;
  double grid_lo = 0.05;
  double grid_hi = 1.0;
  long iterations = 0;  // 0: derive from epochs and the batch count
  int epochs = 3;
  int repeats = 1;
  double w1_value = 1.0;
  std::uint64_t base_seed = 12345;
  double divergence_threshold = 1e12;
  int threads = 0;  // 0: hardware concurrency
  std::string out_path;  // base path; writes <out>.csv and <out>.json when set
};

struct SweepRow {
  double alpha = 0.0;
  double mean_final_loss = 0.0;
  int n_diverged = 0;
  std::vector<double> rep_final;  // per-repeat final loss, diverged clipped
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by alpha
  double lambda_min = 0.0;     // quadratic only; 0 otherwise
  double lambda_max = 0.0;
  double lipschitz = 0.0;
  double b_r = 0.0;            // 0 for sgd
  double stability_limit = 0.0;
  long iterations = 0;         // resolved per-run iteration count
  SweepConfig config;
};

/// Runs `repeats` seeded optimizations per grid point, fanning the
/// (step size x repeat) cells across worker threads.  Per-cell seeds are
/// derived from (base_seed, grid index, repeat index), so results do not
/// depend on scheduling.  Diverged runs contribute the divergence threshold
/// to the mean.  Throws on invalid configuration or unwritable output.
SweepResult cmd_sweep(const SweepConfig& config);

std::string sweep_csv(const SweepResult& result);
nlohmann::json sweep_metadata(const SweepResult& result);

/// Configuration of a convergence-rate study.
struct ConvergeConfig {
  MethodSpec method;
  ProblemSpec problem;
  int batch_size = 32;
  StepSchedule schedule = StepSchedule::harmonic(1.0, 0.0);
  long iterations = 10000;
  int repeats = 20;
  std::uint64_t base_seed = 12345;
  double w1_value = 1.0;
  double divergence_threshold = 1e12;
  int threads = 0;
  long fit_k_min = 100;  // slope fitted on k in [fit_k_min, iterations]
  double q_mu = 1.0;     // moment constants used for the admissibility check
  double q_m_g = 1.0;
  std::string out_path;  // base path; writes <out>.csv and <out>.json when set
};

/// Result of a convergence study.  For the quadratic problem the series is
/// the mean optimality gap F(w_k) - F(w*) over the repeats; for the
/// nonconvex problem it is the mean squared gradient norm.  running_min is
/// the running minimum of the series and fitted_slope the least-squares
/// slope of log(mean) against log(k) over the tail.
struct ConvergeReport {
  std::vector<long> ks;  // log-spaced sample points
  std::vector<double> mean_series;
  std::vector<double> running_min;
  double fitted_slope = 0.0;
  bool schedule_ok = true;   // beta > 1/(c*mu) whenever c is known
  bool q_check_ok = false;   // Q(alpha_1) < -alpha_1*mu/2 when L is known
  double alpha1 = 0.0;
  double q_at_alpha1 = 0.0;
  int n_diverged = 0;
  std::vector<std::string> warnings;
  ConvergeConfig config;
};

ConvergeReport cmd_converge(const ConvergeConfig& config);

std::string converge_csv(const ConvergeReport& report);
nlohmann::json converge_metadata(const ConvergeReport& report);

/// Coefficient report for an s-stage scheme: stage scalars, expanded
/// tableau, validation report, real stability boundary, and the explicit
/// step bound for the supplied (L, mu, M_G).
nlohmann::json cmd_coeffs(int s, double epsilon, double lipschitz = 1.0,
                          double mu = 1.0, double m_g = 1.0);

/// Largest step size on a fine grid up to b_R/L that satisfies the descent
/// condition Q(alpha) < -alpha*mu/2 for the s-stage tableau.  Used to place
/// the first step of a harmonic schedule inside the admissible region.
double q_admissible_step(const ButcherTableau& t, double lipschitz, double mu,
                         double m_g);

std::unique_ptr<GradientOracle> make_problem(const ProblemSpec& spec);

const char* method_name(Method m);
const char* problem_kind_name(ProblemKind k);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace srkcd
