#include "srkcd/chebyshev.hpp"

#include <stdexcept>

namespace srkcd {

namespace {
// T_s(omega0) overflows 64-bit floats long before any practical stage count.
constexpr int kMaxStages = 1000;
}  // namespace

double cheb_t(int n, double x) {
  if (n < 0) {
    throw std::invalid_argument("cheb_t: n must be >= 0");
  }
  if (n == 0) {
    return 1.0;
  }
  double prev = 1.0;  // T_0
  double cur = x;     // T_1
  for (int k = 2; k <= n; ++k) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double cheb_t_prime(int n, double x) {
  if (n < 0) {
    throw std::invalid_argument("cheb_t_prime: n must be >= 0");
  }
  if (n == 0) {
    return 0.0;
  }
  double t_prev = 1.0;  // T_0
  double t_cur = x;     // T_1
  double d_prev = 0.0;  // T_0'
  double d_cur = 1.0;   // T_1'
  for (int k = 2; k <= n; ++k) {
    const double d_next = 2.0 * t_cur + 2.0 * x * d_cur - d_prev;
    const double t_next = 2.0 * x * t_cur - t_prev;
    d_prev = d_cur;
    d_cur = d_next;
    t_prev = t_cur;
    t_cur = t_next;
  }
  return d_cur;
}

RkcCoefficients rkc_coefficients(int s, double epsilon) {
  if (s < 1) {
    throw std::invalid_argument("rkc_coefficients: stage count must be >= 1");
  }
  if (s > kMaxStages) {
    throw std::invalid_argument("rkc_coefficients: stage count too large (max 1000)");
  }
  if (!(epsilon >= 0.0)) {
    throw std::invalid_argument("rkc_coefficients: epsilon must be >= 0");
  }

  RkcCoefficients c;
  c.s = s;
  c.epsilon = epsilon;
  c.omega0 = 1.0 + epsilon / (static_cast<double>(s) * static_cast<double>(s));

  std::vector<double> t(static_cast<size_t>(s) + 1);
  t[0] = 1.0;
  t[1] = c.omega0;
  for (int j = 2; j <= s; ++j) {
    t[j] = 2.0 * c.omega0 * t[j - 1] - t[j - 2];
  }
  c.omega1 = t[s] / cheb_t_prime(s, c.omega0);

  c.mu_tilde.resize(s);
  c.nu.assign(s, 0.0);
  c.mu_tilde[0] = c.omega1 / t[1];
  for (int j = 2; j <= s; ++j) {
    c.mu_tilde[j - 1] = 2.0 * c.omega1 * t[j - 1] / t[j];
    c.nu[j - 1] = -t[j - 2] / t[j];
  }
  return c;
}

}  // namespace srkcd
