#pragma once

#include <complex>
#include <vector>

#include "srkcd/chebyshev.hpp"

namespace srkcd {

/// Explicit Runge-Kutta tableau.  Row i (1-based) holds the stage
/// coefficients a_{i,1..i}; the weights b are identified with the last row,
/// a_{s,j} == b_j.  Instances are immutable after construction.
struct ButcherTableau {
  int s = 0;
  std::vector<std::vector<double>> a;

  const std::vector<double>& b() const { return a.back(); }

  /// 1-based access; returns 0 outside the stored lower triangle.
  double entry(int i, int j) const;
};

/// Outcome of checking a tableau against the coefficient conditions the
/// convergence analysis requires: sum of weights equal to one and row
/// absolute sums bounded by one.  Also reports two properties specific to
/// the Chebyshev-generated tableaus: strictly increasing row absolute sums
/// and positivity of every entry.
struct ValidationReport {
  double weights_sum = 0.0;
  bool weights_sum_ok = false;
  std::vector<double> row_abs_sums;  // rows 0..s; row 0 is the empty stage
  bool row_abs_sums_ok = false;
  bool monotone_row_sums = false;
  bool all_positive = false;

  bool pass() const { return weights_sum_ok && row_abs_sums_ok; }
};

/// Stage-drift bound polynomial P_n in the coefficient representation
/// P_n(alpha) = alpha * (1 + sum_{i=1}^{n-1} (alpha*L)^i c_{n,i}).
/// P_0 is identically zero and P_1(alpha) = alpha (no c coefficients).
/// For a tableau with row absolute sums <= 1 every c_{n,i} <= 1.
struct PnPolynomial {
  int n = 0;
  std::vector<double> c;  // c[i-1] = c_{n,i} for i = 1..n-1

  double operator()(double alpha, double lipschitz) const;
};

/// Expands the s-stage Chebyshev three-term recursion into tableau form:
/// a_{n,i} = sum_{j=i}^{n} (-1)^{j+i} (prod_{l=i+1}^{j} nu_l) mu_tilde_i,
/// accumulated with a running product over l.
ButcherTableau tableau_from_rkc(const RkcCoefficients& coeffs);

/// Recovers the same tableau by running the three-term recursion on
/// symbolic per-stage gradients and collecting the accumulated
/// coefficients.  Structurally independent of tableau_from_rkc; used as a
/// cross-check oracle.
ButcherTableau brute_force_tableau(const RkcCoefficients& coeffs);

/// Checks |sum b_i - 1| <= tol and sum_j |a_{i,j}| <= 1 + tol for every row
/// (row 0 is the empty stage and trivially passes), and reports the
/// monotonicity and positivity properties.  Never throws; failures are
/// carried in the report.
ValidationReport validate_assumption_rk(const ButcherTableau& t, double tol = 1e-10);

/// Builds P_n for 0 <= n <= s via
///   c_{n,1} = sum_{i=2}^{n} |a_{n,i}|,
///   c_{n,j} = sum_{i=j+1}^{n} |a_{n,i}| c_{i-1,j-1},  j >= 2.
/// Throws std::invalid_argument if n < 0 or n > s.
PnPolynomial p_polynomial(const ButcherTableau& t, int n);

/// Per-step descent coefficient
///   Q(alpha) = -alpha*mu + L*M_G * sum_i |b_i| P_{i-1}(alpha)^2
///            + (L*M_G/2) P_s(alpha)^2 + (alpha^2 L / 4) sum_i |b_i|.
/// A step size is admissible for the convergence analysis when
/// Q(alpha) < -alpha*mu/2.  Preconditions: alpha > 0, lipschitz > 0,
/// mu > 0, m_g >= mu^2; violations throw std::invalid_argument.
double q_function(const ButcherTableau& t, double alpha, double lipschitz,
                  double mu, double m_g);

/// Explicit step-size bound 1/(L*m) with m = max(2, (12*M_G + 1/2)/mu),
/// guaranteeing Q(alpha) < -alpha*mu/2 for alpha up to the bound.
/// All arguments must be positive.
double max_step_bound(double lipschitz, double mu, double m_g);

/// Amplification factor R(z) of one step on the scalar linear test problem:
/// the state is multiplied by R(alpha*lambda) per step.  Evaluated directly
/// from the tableau by propagating the stage recursion, so it works for any
/// explicit tableau.
std::complex<double> stability_function(const ButcherTableau& t, std::complex<double> z);

/// Length b_R of the real stability interval (-b_R, 0):
/// b_R = 2*omega0*T_s'(omega0)/T_s(omega0).  Approximately 2 s^2 for small
/// damping.
double real_stability_boundary(const RkcCoefficients& coeffs);

}  // namespace srkcd
