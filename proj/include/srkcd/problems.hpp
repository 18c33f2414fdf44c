#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srkcd/rng.hpp"

namespace srkcd {

/// Finite-sum objective F(w) = (1/N) sum_i f(i, w) exposing the exact value,
/// the exact gradient and mini-batch gradient estimates
/// g(batch, w) = (1/|B|) sum_{i in B} grad f(i, w).
///
/// Averaging batch_gradient over a partition of {0..N-1} weighted by batch
/// size reproduces full_gradient, so the estimator is unbiased.  Oracles are
/// immutable after construction and safe to share between threads.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;

  virtual int dim() const = 0;
  virtual int num_samples() const = 0;
  virtual double value(std::span<const double> w) const = 0;
  virtual std::vector<double> full_gradient(std::span<const double> w) const = 0;
  virtual std::vector<double> batch_gradient(std::span<const int> batch,
                                             std::span<const double> w) const = 0;

  /// Gradient Lipschitz constant, when known analytically.
  virtual std::optional<double> lipschitz() const { return std::nullopt; }
  /// Strong convexity constant, when known analytically.
  virtual std::optional<double> convexity() const { return std::nullopt; }
};

/// Diagonal quadratic built from an N x d sample matrix:
///   F(w) = (1/N) sum_i sum_j (x^i_j)^2 w_j^2 / d = (1/2) w^T diag(lambda) w
/// with lambda_j = (2/(N d)) sum_i (x^i_j)^2.  The minimizer is w* = 0 with
/// F(w*) = 0; L = max lambda_j and the convexity constant is min lambda_j.
class QuadraticProblem final : public GradientOracle {
 public:
  /// data is row-major N x d.
  QuadraticProblem(std::vector<double> data, int n, int d);

  int dim() const override { return d_; }
  int num_samples() const override { return n_; }
  double value(std::span<const double> w) const override;
  std::vector<double> full_gradient(std::span<const double> w) const override;
  std::vector<double> batch_gradient(std::span<const int> batch,
                                     std::span<const double> w) const override;
  std::optional<double> lipschitz() const override { return lambda_max_; }
  std::optional<double> convexity() const override { return lambda_min_; }

  const std::vector<double>& eigenvalues() const { return lambda_; }
  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }

  /// Writes the sample matrix as CSV, one row per sample.
  void save_csv(const std::string& path) const;
  static QuadraticProblem load_csv(const std::string& path);

 private:
  int n_ = 0;
  int d_ = 0;
  std::vector<double> data_;    // raw samples, row-major
  std::vector<double> sq_;      // element-wise squares of data_
  std::vector<double> lambda_;  // diagonal of A
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
};

/// Samples x^i_j ~ Normal(1 + 10*j/d, 1) with the coordinate index j = 1..d,
/// independently across samples and coordinates, and builds the quadratic.
/// The j-dependent means spread the spectrum over roughly [0.1, 4.9] for
/// d = 50.
QuadraticProblem generate_quadratic(int n, int d, std::uint64_t seed);

/// Step size minimizing the worst-mode amplification of gradient descent:
/// 2 / (lambda_min + lambda_max).
double quadratic_optimal_gd_step(const QuadraticProblem& p);

/// Smooth nonconvex finite sum
///   f(i, w) = log(1 + (x^i . w - y_i)^2)
/// with analytic gradient 2 r_i / (1 + r_i^2) x^i.  Bounded below by 0,
/// gradient Lipschitz, genuinely nonconvex.
class NonconvexProblem final : public GradientOracle {
 public:
  /// x is row-major N x d, y has length N.
  NonconvexProblem(std::vector<double> x, std::vector<double> y, int n, int d);

  int dim() const override { return d_; }
  int num_samples() const override { return n_; }
  double value(std::span<const double> w) const override;
  std::vector<double> full_gradient(std::span<const double> w) const override;
  std::vector<double> batch_gradient(std::span<const int> batch,
                                     std::span<const double> w) const override;

  /// Writes rows of (x^i, y_i) as CSV, d+1 columns per row.
  void save_csv(const std::string& path) const;
  static NonconvexProblem load_csv(const std::string& path);

 private:
  double residual(int i, std::span<const double> w) const;

  int n_ = 0;
  int d_ = 0;
  std::vector<double> x_;
  std::vector<double> y_;
};

/// x^i_j ~ Normal(0,1), y_i ~ Normal(0,1); x is drawn row-major first, then y.
NonconvexProblem generate_nonconvex(int n, int d, std::uint64_t seed);

enum class SamplingMode {
  epoch_shuffle,          // disjoint shuffled batches; every index once per epoch
  iid_with_replacement,   // batch_size independent uniform draws
};

/// Draws mini-batch index sets.  In epoch_shuffle mode the final short batch
/// of each epoch (size N mod batch_size) is kept rather than dropped, which
/// preserves unbiasedness over an epoch.  A sampler owns its RNG state and
/// must not be shared between concurrent runs.
class BatchSampler {
 public:
  BatchSampler(int num_samples, int batch_size, SamplingMode mode, std::uint64_t seed);

  std::vector<int> next();

  int num_samples() const { return n_; }
  int batch_size() const { return batch_size_; }
  SamplingMode mode() const { return mode_; }
  /// Number of batches covering one pass over the data (ceil(N/B)).
  int batches_per_epoch() const;

 private:
  void reshuffle();

  int n_ = 0;
  int batch_size_ = 0;
  SamplingMode mode_ = SamplingMode::epoch_shuffle;
  Rng rng_;
  std::vector<int> order_;
  int cursor_ = 0;
};

struct MomentEstimates {
  double mu_hat = 0.0;    // smallest alignment <grad F, E[g]> / ||grad F||^2
  double mu_g_hat = 0.0;  // largest ratio ||E[g]|| / ||grad F||
  double m_hat = 0.0;     // intercept of the second-moment envelope
  double m_g_hat = 0.0;   // slope of the second-moment envelope
};

/// Empirically estimates the moment constants over the probe points, using
/// all batches of one epoch per probe.  Probes with ||grad F|| < 1e-12 are
/// skipped; if every probe is near-stationary a std::runtime_error is
/// thrown.  The (m_hat, m_g_hat) pair is a least-squares fit of
/// E||g||^2 vs ||grad F||^2 lifted to an upper envelope over the probes.
MomentEstimates estimate_moment_constants(const GradientOracle& p, BatchSampler sampler,
                                          const std::vector<std::vector<double>>& probe_points);

}  // namespace srkcd
