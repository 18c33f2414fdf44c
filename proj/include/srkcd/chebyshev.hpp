#pragma once

#include <vector>

namespace srkcd {

/// Chebyshev polynomial of the first kind, T_n(x), evaluated with the
/// three-term recurrence T_n = 2x T_{n-1} - T_{n-2}.  The recurrence is
/// backward stable; the trigonometric closed form is deliberately not used
/// here (it serves only as a cross-check in the tests).
double cheb_t(int n, double x);

/// Derivative T_n'(x) via T_n' = 2 T_{n-1} + 2x T_{n-1}' - T_{n-2}',
/// with T_0' = 0 and T_1' = 1.
double cheb_t_prime(int n, double x);

/// Stage scalars of the s-stage first-order Runge-Kutta-Chebyshev recursion.
///
/// omega0 = 1 + epsilon/s^2 and omega1 = T_s(omega0)/T_s'(omega0).  The
/// arrays are index-aligned with stages j = 1..s: mu_tilde[j-1] multiplies
/// the stage gradient and nu[j-1] couples the two previous stage states.
/// nu[0] is stored as 0; the recursion never reads it.
///
/// For every s >= 1 and epsilon >= 0: mu_tilde[j-1] > 0 for all j and
/// nu[j-1] < 0 for j >= 2.  Instances are immutable after construction and
/// safe to share between threads.
struct RkcCoefficients {
  int s = 0;
  double epsilon = 0.0;
  double omega0 = 0.0;
  double omega1 = 0.0;
  std::vector<double> mu_tilde;
  std::vector<double> nu;
};

/// Builds the coefficient set for s stages and damping parameter epsilon.
/// Throws std::invalid_argument if s < 1, s > 1000 or epsilon < 0.
/// With s = 1 and epsilon = 0 the method degenerates to a plain gradient
/// step (mu_tilde = {1}).
RkcCoefficients rkc_coefficients(int s, double epsilon);

}  // namespace srkcd
