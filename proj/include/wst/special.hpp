#pragma once

namespace wst::special {

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double regularized_gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);
/// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
double regularized_beta(double x, double a, double b);

/// Upper-tail probabilities.
double chi_square_sf(double x, double df);
double f_sf(double x, double df1, double df2);

} // namespace wst::special
