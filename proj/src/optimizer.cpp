#include "srkcd/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace srkcd {

namespace {

std::vector<double> axpy(const std::vector<double>& x, double coef,
                         const std::vector<double>& y) {
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] + coef * y[i];
  }
  return out;
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      return false;
    }
  }
  return true;
}

double norm_sq(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) {
    acc += x * x;
  }
  return acc;
}

}  // namespace

StepSchedule StepSchedule::constant(double alpha) {
  if (!(alpha >= 0.0)) {
    throw std::invalid_argument("StepSchedule: constant alpha must be >= 0");
  }
  StepSchedule s;
  s.kind_ = Kind::constant;
  s.alpha_ = alpha;
  return s;
}

StepSchedule StepSchedule::harmonic(double beta, double gamma) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("StepSchedule: harmonic beta must be > 0");
  }
  if (!(gamma >= 0.0)) {
    throw std::invalid_argument("StepSchedule: harmonic gamma must be >= 0");
  }
  StepSchedule s;
  s.kind_ = Kind::harmonic;
  s.beta_ = beta;
  s.gamma_ = gamma;
  return s;
}

double StepSchedule::at(long k) const {
  if (kind_ == Kind::constant) {
    return alpha_;
  }
  return beta_ / (static_cast<double>(k) + gamma_);
}

std::vector<double> sgd_step(const std::vector<double>& w, double alpha,
                             const GradientFn& g) {
  return axpy(w, -alpha, g(w));
}

std::vector<double> srkcd_step(const std::vector<double>& w,
                               const RkcCoefficients& coeffs, double alpha,
                               const GradientFn& g) {
  std::vector<double> prev = w;                                      // w_{k,j-2}
  std::vector<double> cur = axpy(w, -coeffs.mu_tilde[0] * alpha, g(w));  // w_{k,1}
  for (int j = 2; j <= coeffs.s; ++j) {
    const double nu = coeffs.nu[j - 1];
    const double mu_alpha = coeffs.mu_tilde[j - 1] * alpha;
    const std::vector<double> grad = g(cur);
    std::vector<double> next(w.size());
    for (size_t i = 0; i < w.size(); ++i) {
      // (1 - nu) cur + nu prev, written so a stationary point is an exact
      // fixpoint.
      next[i] = cur[i] + nu * (prev[i] - cur[i]) - mu_alpha * grad[i];
    }
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

std::vector<double> rk_step(const std::vector<double>& w, const ButcherTableau& t,
                            double alpha, const GradientFn& g) {
  std::vector<std::vector<double>> grads;
  grads.reserve(t.s);
  std::vector<double> stage = w;  // w_{k,0}
  for (int i = 1; i <= t.s; ++i) {
    grads.push_back(g(stage));  // gradient at w_{k,i-1}
    stage = w;
    const auto& row = t.a[i - 1];
    for (int j = 1; j <= i; ++j) {
      const double coef = alpha * row[j - 1];
      const auto& grad = grads[j - 1];
      for (size_t m = 0; m < stage.size(); ++m) {
        stage[m] -= coef * grad[m];
      }
    }
  }
  return stage;  // row s carries the weights, so this is w_{k+1}
}

std::vector<double> momentum_step(const std::vector<double>& w,
                                  const RkcCoefficients& coeffs, double alpha,
                                  const GradientFn& g) {
  const std::vector<double> grad1 = g(w);
  std::vector<double> v(w.size());
  std::vector<double> cur(w.size());
  for (size_t i = 0; i < w.size(); ++i) {
    v[i] = -coeffs.mu_tilde[0] * alpha * grad1[i];  // eta_1 = 0
    cur[i] = w[i] + v[i];
  }
  for (int j = 2; j <= coeffs.s; ++j) {
    const double eta = -coeffs.nu[j - 1];
    const double mu_alpha = coeffs.mu_tilde[j - 1] * alpha;
    const std::vector<double> grad = g(cur);
    for (size_t i = 0; i < w.size(); ++i) {
      v[i] = eta * v[i] - mu_alpha * grad[i];
      cur[i] += v[i];
    }
  }
  return cur;
}

RunRecord run(const OptimizerConfig& config, const GradientOracle& problem,
              const std::vector<double>& w1, std::uint64_t seed) {
  if (static_cast<int>(w1.size()) != problem.dim()) {
    throw std::invalid_argument("run: initial point dimension does not match problem");
  }
  if (config.s < 1) {
    throw std::invalid_argument("run: stage count must be >= 1");
  }
  if (config.max_iterations < 0) {
    throw std::invalid_argument("run: max_iterations must be >= 0");
  }
  if (config.record_every < 1) {
    throw std::invalid_argument("run: record_every must be >= 1");
  }

  const bool needs_coeffs = config.method != Method::sgd;
  RkcCoefficients coeffs;
  ButcherTableau tableau;
  if (needs_coeffs) {
    coeffs = rkc_coefficients(config.s, config.epsilon);
    if (config.method == Method::rk_tableau) {
      tableau = tableau_from_rkc(coeffs);
    }
  }
  const long stages_per_iter = config.method == Method::sgd ? 1 : config.s;

  BatchSampler sampler(problem.num_samples(), config.batch_size, config.sampling, seed);

  RunRecord rec;
  rec.seed = seed;
  rec.config = config;

  std::vector<double> w = w1;
  const auto record = [&](long k, double loss) {
    rec.losses.emplace_back(k, loss);
    rec.grad_norms.emplace_back(k, norm_sq(problem.full_gradient(w)));
  };
  record(0, problem.value(w));

  for (long k = 1; k <= config.max_iterations; ++k) {
    const std::vector<int> batch = sampler.next();
    const GradientFn g = [&](const std::vector<double>& x) {
      return problem.batch_gradient(batch, x);
    };
    const double alpha = config.schedule.at(k);
    switch (config.method) {
      case Method::sgd:
        w = sgd_step(w, alpha, g);
        break;
      case Method::srkcd_recursion:
        w = srkcd_step(w, coeffs, alpha, g);
        break;
      case Method::rk_tableau:
        w = rk_step(w, tableau, alpha, g);
        break;
      case Method::srkcd_momentum:
        w = momentum_step(w, coeffs, alpha, g);
        break;
    }
    rec.gradient_evaluations += stages_per_iter;

    const double loss = problem.value(w);
    const bool blew_up =
        !std::isfinite(loss) || loss > config.divergence_threshold || !all_finite(w);
    if (blew_up || k % config.record_every == 0 || k == config.max_iterations) {
      record(k, loss);
    }
    if (blew_up) {
      rec.diverged = true;
      break;
    }
  }
  rec.final_w = std::move(w);
  return rec;
}

}  // namespace srkcd
