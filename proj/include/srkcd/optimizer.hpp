#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "srkcd/chebyshev.hpp"
#include "srkcd/problems.hpp"
#include "srkcd/tableau.hpp"

namespace srkcd {

/// Step-size rule: a constant alpha or the decreasing harmonic schedule
/// alpha_k = beta / (k + gamma) for k = 1, 2, ...
class StepSchedule {
 public:
  static StepSchedule constant(double alpha);
  static StepSchedule harmonic(double beta, double gamma);

  double at(long k) const;
  bool is_constant() const { return kind_ == Kind::constant; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double gamma() const { return gamma_; }

 private:
  enum class Kind { constant, harmonic };

  StepSchedule() = default;

  Kind kind_ = Kind::constant;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double gamma_ = 0.0;
};

enum class Method {
  sgd,              // plain stochastic gradient step
  srkcd_recursion,  // s-stage Chebyshev three-term recursion (reference form)
  rk_tableau,       // same scheme executed through its expanded tableau
  srkcd_momentum,   // same scheme as per-stage momentum updates
};

struct OptimizerConfig {
  Method method = Method::srkcd_recursion;
  int s = 1;
  double epsilon = 0.01;
  StepSchedule schedule = StepSchedule::constant(0.01);
  long max_iterations = 100;
  double divergence_threshold = 1e12;
  long record_every = 1;
  int batch_size = 32;
  SamplingMode sampling = SamplingMode::epoch_shuffle;
};

/// Trajectory summary of a single optimization run.  Losses and squared
/// gradient norms are exact full-data quantities even though the steps use
/// mini-batches.  gradient_evaluations counts stage evaluations of g only,
/// i.e. s per iteration for an s-stage method.
struct RunRecord {
  std::vector<std::pair<long, double>> losses;
  std::vector<std::pair<long, double>> grad_norms;
  bool diverged = false;
  std::vector<double> final_w;
  std::uint64_t seed = 0;
  long gradient_evaluations = 0;
  OptimizerConfig config;
};

/// Stochastic gradient evaluator bound to one batch realization; every call
/// within one outer step sees the same batch.
using GradientFn = std::function<std::vector<double>(const std::vector<double>&)>;

/// One plain gradient step w - alpha * g(w).
std::vector<double> sgd_step(const std::vector<double>& w, double alpha,
                             const GradientFn& g);

/// One outer step of the s-stage scheme in three-term form:
///   w_1 = w - mu_tilde_1 * alpha * g(w),
///   w_j = (1 - nu_j) w_{j-1} + nu_j w_{j-2} - mu_tilde_j * alpha * g(w_{j-1}).
/// Returns w_s.
std::vector<double> srkcd_step(const std::vector<double>& w,
                               const RkcCoefficients& coeffs, double alpha,
                               const GradientFn& g);

/// One outer step driven by an explicit tableau; each stage gradient is
/// evaluated once and cached (s evaluations total).
std::vector<double> rk_step(const std::vector<double>& w, const ButcherTableau& t,
                            double alpha, const GradientFn& g);

/// One outer step in momentum form:
///   v_j = eta_j v_{j-1} - mu_tilde_j * alpha * g(w_{j-1}),  w_j = w_{j-1} + v_j
/// with eta_1 = 0 and eta_j = -nu_j.  The velocity is reset at the start of
/// every outer step; carrying it over would change the method.
std::vector<double> momentum_step(const std::vector<double>& w,
                                  const RkcCoefficients& coeffs, double alpha,
                                  const GradientFn& g);

/// Executes a full run: draws one batch per outer iteration from a sampler
/// seeded with `seed`, applies the configured stepper, records exact F and
/// ||grad F||^2 every record_every iterations (plus the initial and final
/// points), and stops early when the loss exceeds the divergence threshold
/// or any iterate turns non-finite.  Identical (config, problem, w1, seed)
/// produce identical records.
RunRecord run(const OptimizerConfig& config, const GradientOracle& problem,
              const std::vector<double>& w1, std::uint64_t seed);

}  // namespace srkcd
