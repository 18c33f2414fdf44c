#include "srkcd/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace srkcd {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    acc += a[i] * b[i];
  }
  return acc;
}

double norm_sq(std::span<const double> a) { return dot(a, a); }

void check_batch(std::span<const int> batch, int n) {
  if (batch.empty()) {
    throw std::invalid_argument("batch_gradient: empty batch");
  }
  for (int i : batch) {
    if (i < 0 || i >= n) {
      throw std::out_of_range("batch_gradient: sample index out of range");
    }
  }
}

}  // namespace

QuadraticProblem::QuadraticProblem(std::vector<double> data, int n, int d)
    : n_(n), d_(d), data_(std::move(data)) {
  if (n_ < 1 || d_ < 1) {
    throw std::invalid_argument("QuadraticProblem: need n >= 1 and d >= 1");
  }
  if (data_.size() != static_cast<size_t>(n_) * static_cast<size_t>(d_)) {
    throw std::invalid_argument("QuadraticProblem: data size does not match n x d");
  }
  sq_.resize(data_.size());
  for (size_t i = 0; i < data_.size(); ++i) {
    sq_[i] = data_[i] * data_[i];
  }
  lambda_.assign(d_, 0.0);
  for (int i = 0; i < n_; ++i) {
    const double* row = &sq_[static_cast<size_t>(i) * d_];
    for (int j = 0; j < d_; ++j) {
      lambda_[j] += row[j];
    }
  }
  const double scale = 2.0 / (static_cast<double>(n_) * static_cast<double>(d_));
  for (double& l : lambda_) {
    l *= scale;
  }
  lambda_min_ = *std::min_element(lambda_.begin(), lambda_.end());
  lambda_max_ = *std::max_element(lambda_.begin(), lambda_.end());
}

double QuadraticProblem::value(std::span<const double> w) const {
  double acc = 0.0;
  for (int j = 0; j < d_; ++j) {
    acc += lambda_[j] * w[j] * w[j];
  }
  return 0.5 * acc;
}

std::vector<double> QuadraticProblem::full_gradient(std::span<const double> w) const {
  std::vector<double> g(d_);
  for (int j = 0; j < d_; ++j) {
    g[j] = lambda_[j] * w[j];
  }
  return g;
}

std::vector<double> QuadraticProblem::batch_gradient(std::span<const int> batch,
                                                     std::span<const double> w) const {
  check_batch(batch, n_);
  std::vector<double> acc(d_, 0.0);
  for (int i : batch) {
    const double* row = &sq_[static_cast<size_t>(i) * d_];
    for (int j = 0; j < d_; ++j) {
      acc[j] += row[j];
    }
  }
  const double scale = 2.0 / (static_cast<double>(batch.size()) * static_cast<double>(d_));
  for (int j = 0; j < d_; ++j) {
    acc[j] *= scale * w[j];
  }
  return acc;
}

QuadraticProblem generate_quadratic(int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 1) {
    throw std::invalid_argument("generate_quadratic: need n >= 1 and d >= 1");
  }
  Rng rng(seed);
  std::vector<double> data(static_cast<size_t>(n) * static_cast<size_t>(d));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      const double mean = 1.0 + 10.0 * static_cast<double>(j + 1) / static_cast<double>(d);
      data[static_cast<size_t>(i) * d + j] = mean + rng.normal();
    }
  }
  return QuadraticProblem(std::move(data), n, d);
}

double quadratic_optimal_gd_step(const QuadraticProblem& p) {
  return 2.0 / (p.lambda_min() + p.lambda_max());
}

NonconvexProblem::NonconvexProblem(std::vector<double> x, std::vector<double> y,
                                   int n, int d)
    : n_(n), d_(d), x_(std::move(x)), y_(std::move(y)) {
  if (n_ < 1 || d_ < 1) {
    throw std::invalid_argument("NonconvexProblem: need n >= 1 and d >= 1");
  }
  if (x_.size() != static_cast<size_t>(n_) * static_cast<size_t>(d_) ||
      y_.size() != static_cast<size_t>(n_)) {
    throw std::invalid_argument("NonconvexProblem: data sizes do not match n x d");
  }
}

double NonconvexProblem::residual(int i, std::span<const double> w) const {
  return dot(std::span<const double>(&x_[static_cast<size_t>(i) * d_], d_), w) - y_[i];
}

double NonconvexProblem::value(std::span<const double> w) const {
  double acc = 0.0;
  for (int i = 0; i < n_; ++i) {
    const double r = residual(i, w);
    acc += std::log1p(r * r);
  }
  return acc / static_cast<double>(n_);
}

std::vector<double> NonconvexProblem::full_gradient(std::span<const double> w) const {
  std::vector<double> g(d_, 0.0);
  for (int i = 0; i < n_; ++i) {
    const double r = residual(i, w);
    const double coeff = 2.0 * r / (1.0 + r * r);
    const double* row = &x_[static_cast<size_t>(i) * d_];
    for (int j = 0; j < d_; ++j) {
      g[j] += coeff * row[j];
    }
  }
  for (double& v : g) {
    v /= static_cast<double>(n_);
  }
  return g;
}

std::vector<double> NonconvexProblem::batch_gradient(std::span<const int> batch,
                                                     std::span<const double> w) const {
  check_batch(batch, n_);
  std::vector<double> g(d_, 0.0);
  for (int i : batch) {
    const double r = residual(i, w);
    const double coeff = 2.0 * r / (1.0 + r * r);
    const double* row = &x_[static_cast<size_t>(i) * d_];
    for (int j = 0; j < d_; ++j) {
      g[j] += coeff * row[j];
    }
  }
  for (double& v : g) {
    v /= static_cast<double>(batch.size());
  }
  return g;
}

NonconvexProblem generate_nonconvex(int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 1) {
    throw std::invalid_argument("generate_nonconvex: need n >= 1 and d >= 1");
  }
  Rng rng(seed);
  std::vector<double> x(static_cast<size_t>(n) * static_cast<size_t>(d));
  for (double& v : x) {
    v = rng.normal();
  }
  std::vector<double> y(n);
  for (double& v : y) {
    v = rng.normal();
  }
  return NonconvexProblem(std::move(x), std::move(y), n, d);
}

BatchSampler::BatchSampler(int num_samples, int batch_size, SamplingMode mode,
                           std::uint64_t seed)
    : n_(num_samples), batch_size_(batch_size), mode_(mode), rng_(seed) {
  if (n_ < 1) {
    throw std::invalid_argument("BatchSampler: need at least one sample");
  }
  if (batch_size_ < 1) {
    throw std::invalid_argument("BatchSampler: batch size must be >= 1");
  }
  if (batch_size_ > n_) {
    batch_size_ = n_;
  }
  if (mode_ == SamplingMode::epoch_shuffle) {
    order_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      order_[i] = i;
    }
    reshuffle();
  }
}

void BatchSampler::reshuffle() {
  // Fisher-Yates with the rejection-sampled uniform; std::shuffle is
  // implementation-defined and would break seed portability.
  for (int i = n_ - 1; i > 0; --i) {
    const int j = static_cast<int>(rng_.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order_[i], order_[j]);
  }
  cursor_ = 0;
}

int BatchSampler::batches_per_epoch() const {
  return (n_ + batch_size_ - 1) / batch_size_;
}

std::vector<int> BatchSampler::next() {
  std::vector<int> batch;
  if (mode_ == SamplingMode::iid_with_replacement) {
    batch.resize(batch_size_);
    for (int& v : batch) {
      v = static_cast<int>(rng_.below(static_cast<std::uint64_t>(n_)));
    }
    return batch;
  }
  if (cursor_ >= n_) {
    reshuffle();
  }
  const int take = std::min(batch_size_, n_ - cursor_);
  batch.assign(order_.begin() + cursor_, order_.begin() + cursor_ + take);
  cursor_ += take;
  return batch;
}

MomentEstimates estimate_moment_constants(const GradientOracle& p, BatchSampler sampler,
                                          const std::vector<std::vector<double>>& probe_points) {
  if (probe_points.empty()) {
    throw std::invalid_argument("estimate_moment_constants: empty probe set");
  }

  std::vector<double> xs;  // ||grad F||^2 per usable probe
  std::vector<double> ys;  // E||g||^2 per usable probe
  MomentEstimates est;
  est.mu_hat = std::numeric_limits<double>::infinity();
  est.mu_g_hat = 0.0;

  const int batches = sampler.batches_per_epoch();
  const double n = static_cast<double>(p.num_samples());
  for (const auto& w : probe_points) {
    const std::vector<double> grad = p.full_gradient(w);
    const double gn2 = norm_sq(grad);
    if (gn2 < 1e-24) {
      continue;
    }
    std::vector<double> mean_g(p.dim(), 0.0);
    double mean_g2 = 0.0;
    for (int b = 0; b < batches; ++b) {
      const std::vector<int> batch = sampler.next();
      const std::vector<double> g = p.batch_gradient(batch, w);
      const double weight = static_cast<double>(batch.size()) / n;
      for (int j = 0; j < p.dim(); ++j) {
        mean_g[j] += weight * g[j];
      }
      mean_g2 += weight * norm_sq(g);
    }
    est.mu_hat = std::min(est.mu_hat, dot(grad, mean_g) / gn2);
    est.mu_g_hat = std::max(est.mu_g_hat, std::sqrt(norm_sq(mean_g) / gn2));
    xs.push_back(gn2);
    ys.push_back(mean_g2);
  }

  if (xs.empty()) {
    throw std::runtime_error("estimate_moment_constants: all probes are near-stationary");
  }

  // Least-squares line through (||grad F||^2, E||g||^2), then lifted so the
  // line upper-bounds every probe.
  const size_t k = xs.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < k; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double det = static_cast<double>(k) * sxx - sx * sx;
  double slope;
  double intercept;
  if (k >= 2 && std::abs(det) > 1e-300) {
    slope = (static_cast<double>(k) * sxy - sx * sy) / det;
    intercept = (sy - slope * sx) / static_cast<double>(k);
  } else {
    slope = sxy / sxx;  // single probe: line through the origin
    intercept = 0.0;
  }
  double lift = 0.0;
  for (size_t i = 0; i < k; ++i) {
    lift = std::max(lift, ys[i] - (intercept + slope * xs[i]));
  }
  est.m_hat = std::max(0.0, intercept + lift);
  est.m_g_hat = slope;
  return est;
}

namespace {

void write_csv_rows(const std::string& path, std::span<const double> data, int cols) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  char buf[40];
  const size_t rows = data.size() / static_cast<size_t>(cols);
  for (size_t i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data[i * cols + j]);
      out << buf << (j + 1 < cols ? "," : "\n");
    }
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

std::pair<std::vector<double>, int> read_csv_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path);
  }
  std::vector<double> data;
  int cols = -1;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    int count = 0;
    while (std::getline(ss, cell, ',')) {
      data.push_back(std::stod(cell));
      ++count;
    }
    if (cols == -1) {
      cols = count;
    } else if (cols != count) {
      throw std::runtime_error("ragged CSV row in " + path);
    }
  }
  if (cols <= 0) {
    throw std::runtime_error("empty CSV file: " + path);
  }
  return {std::move(data), cols};
}

}  // namespace

void QuadraticProblem::save_csv(const std::string& path) const {
  write_csv_rows(path, data_, d_);
}

QuadraticProblem QuadraticProblem::load_csv(const std::string& path) {
  auto [data, cols] = read_csv_rows(path);
  const int rows = static_cast<int>(data.size()) / cols;
  return QuadraticProblem(std::move(data), rows, cols);
}

void NonconvexProblem::save_csv(const std::string& path) const {
  std::vector<double> joined;
  joined.reserve(static_cast<size_t>(n_) * (d_ + 1));
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < d_; ++j) {
      joined.push_back(x_[static_cast<size_t>(i) * d_ + j]);
    }
    joined.push_back(y_[i]);
  }
  write_csv_rows(path, joined, d_ + 1);
}

NonconvexProblem NonconvexProblem::load_csv(const std::string& path) {
  auto [joined, cols] = read_csv_rows(path);
  if (cols < 2) {
    throw std::runtime_error("nonconvex CSV needs at least 2 columns: " + path);
  }
  const int d = cols - 1;
  const int rows = static_cast<int>(joined.size()) / cols;
  std::vector<double> x;
  x.reserve(static_cast<size_t>(rows) * d);
  std::vector<double> y;
  y.reserve(rows);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < d; ++j) {
      x.push_back(joined[static_cast<size_t>(i) * cols + j]);
    }
    y.push_back(joined[static_cast<size_t>(i) * cols + d]);
  }
  return NonconvexProblem(std::move(x), std::move(y), rows, d);
}

}  // namespace srkcd
