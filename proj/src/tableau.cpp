#include "srkcd/tableau.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace srkcd {

double ButcherTableau::entry(int i, int j) const {
  if (i < 1 || i > s || j < 1 || j > i) {
    return 0.0;
  }
  return a[static_cast<size_t>(i) - 1][static_cast<size_t>(j) - 1];
}

double PnPolynomial::operator()(double alpha, double lipschitz) const {
  if (n == 0) {
    return 0.0;
  }
  const double t = alpha * lipschitz;
  double acc = 0.0;
  for (size_t i = c.size(); i > 0; --i) {
    acc = t * (c[i - 1] + acc);
  }
  return alpha * (1.0 + acc);
}

ButcherTableau tableau_from_rkc(const RkcCoefficients& coeffs) {
  const int s = coeffs.s;
  ButcherTableau t;
  t.s = s;
  t.a.resize(s);
  for (int n = 1; n <= s; ++n) {
    t.a[n - 1].assign(n, 0.0);
  }
  // For fixed i, the inner alternating sum over j telescopes into a running
  // product of (-nu_l) factors.
  for (int i = 1; i <= s; ++i) {
    double prod = 1.0;  // prod_{l=i+1}^{j} (-nu_l), starts at the empty product
    double sum = 1.0;   // partial sum over j = i..n
    t.a[i - 1][i - 1] = coeffs.mu_tilde[i - 1];
    for (int n = i + 1; n <= s; ++n) {
      prod *= -coeffs.nu[n - 1];
      sum += prod;
      t.a[n - 1][i - 1] = coeffs.mu_tilde[i - 1] * sum;
    }
  }
  return t;
}

ButcherTableau brute_force_tableau(const RkcCoefficients& coeffs) {
  const int s = coeffs.s;
  // Stage state j is represented symbolically as
  //   w - alpha * sum_i coef[j][i] * g_i,
  // where g_i is the gradient evaluated at stage i.  The w-part stays equal
  // to w because (1 - nu_j) + nu_j = 1.
  std::vector<std::vector<double>> coef(static_cast<size_t>(s) + 1,
                                        std::vector<double>(s, 0.0));
  coef[1][0] = coeffs.mu_tilde[0];
  for (int j = 2; j <= s; ++j) {
    const double nu = coeffs.nu[j - 1];
    for (int i = 0; i < s; ++i) {
      coef[j][i] = (1.0 - nu) * coef[j - 1][i] + nu * coef[j - 2][i];
    }
    coef[j][j - 1] += coeffs.mu_tilde[j - 1];
  }

  ButcherTableau t;
  t.s = s;
  t.a.resize(s);
  for (int n = 1; n <= s; ++n) {
    t.a[n - 1].assign(coef[n].begin(), coef[n].begin() + n);
  }
  return t;
}

ValidationReport validate_assumption_rk(const ButcherTableau& t, double tol) {
  if (tol <= 0.0) {
    throw std::invalid_argument("validate_assumption_rk: tol must be > 0");
  }
  ValidationReport r;
  r.row_abs_sums.assign(static_cast<size_t>(t.s) + 1, 0.0);
  r.row_abs_sums_ok = true;
  r.monotone_row_sums = true;
  r.all_positive = true;

  for (int i = 1; i <= t.s; ++i) {
    double abs_sum = 0.0;
    for (double v : t.a[i - 1]) {
      abs_sum += std::abs(v);
      if (!(v > 0.0)) {
        r.all_positive = false;
      }
    }
    r.row_abs_sums[i] = abs_sum;
    if (abs_sum > 1.0 + tol) {
      r.row_abs_sums_ok = false;
    }
    if (!(abs_sum > r.row_abs_sums[i - 1])) {
      r.monotone_row_sums = false;
    }
  }

  for (double v : t.b()) {
    r.weights_sum += v;
  }
  r.weights_sum_ok = std::abs(r.weights_sum - 1.0) <= tol;
  return r;
}

PnPolynomial p_polynomial(const ButcherTableau& t, int n) {
  if (n < 0 || n > t.s) {
    throw std::invalid_argument("p_polynomial: need 0 <= n <= s");
  }
  PnPolynomial p;
  p.n = n;
  if (n <= 1) {
    return p;
  }
  // c[m][j-1] = c_{m,j} for m = 2..n, j = 1..m-1.
  std::vector<std::vector<double>> c(static_cast<size_t>(n) + 1);
  for (int m = 2; m <= n; ++m) {
    c[m].assign(m - 1, 0.0);
    double first = 0.0;
    for (int i = 2; i <= m; ++i) {
      first += std::abs(t.entry(m, i));
    }
    c[m][0] = first;
    for (int j = 2; j <= m - 1; ++j) {
      double sum = 0.0;
      for (int i = j + 1; i <= m; ++i) {
        sum += std::abs(t.entry(m, i)) * c[i - 1][j - 2];
      }
      c[m][j - 1] = sum;
    }
  }
  p.c = c[n];
  return p;
}

double q_function(const ButcherTableau& t, double alpha, double lipschitz,
                  double mu, double m_g) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("q_function: alpha must be > 0");
  }
  if (!(lipschitz > 0.0)) {
    throw std::invalid_argument("q_function: lipschitz must be > 0");
  }
  if (!(mu > 0.0)) {
    throw std::invalid_argument("q_function: mu must be > 0");
  }
  if (!(m_g >= mu * mu)) {
    throw std::invalid_argument("q_function: need m_g >= mu^2");
  }

  const auto& b = t.b();
  double abs_b_sum = 0.0;
  double drift_sum = 0.0;
  for (int i = 1; i <= t.s; ++i) {
    const double abs_bi = std::abs(b[i - 1]);
    abs_b_sum += abs_bi;
    const double p = p_polynomial(t, i - 1)(alpha, lipschitz);
    drift_sum += abs_bi * p * p;
  }
  const double ps = p_polynomial(t, t.s)(alpha, lipschitz);
  return -alpha * mu + lipschitz * m_g * drift_sum +
         0.5 * lipschitz * m_g * ps * ps +
         0.25 * alpha * alpha * lipschitz * abs_b_sum;
}

double max_step_bound(double lipschitz, double mu, double m_g) {
  if (!(lipschitz > 0.0) || !(mu > 0.0) || !(m_g > 0.0)) {
    throw std::invalid_argument("max_step_bound: all arguments must be > 0");
  }
  const double m = std::max(2.0, (12.0 * m_g + 0.5) / mu);
  return 1.0 / (lipschitz * m);
}

std::complex<double> stability_function(const ButcherTableau& t,
                                        std::complex<double> z) {
  // Stage values of one step on the scalar test problem, starting from 1.
  std::vector<std::complex<double>> r(static_cast<size_t>(t.s) + 1);
  r[0] = 1.0;
  for (int i = 1; i <= t.s; ++i) {
    std::complex<double> acc = 0.0;
    for (int j = 1; j <= i; ++j) {
      acc += t.a[i - 1][j - 1] * r[j - 1];
    }
    r[i] = 1.0 + z * acc;
  }
  return r[t.s];
}

double real_stability_boundary(const RkcCoefficients& coeffs) {
  return 2.0 * coeffs.omega0 * cheb_t_prime(coeffs.s, coeffs.omega0) /
         cheb_t(coeffs.s, coeffs.omega0);
}

}  // namespace srkcd
