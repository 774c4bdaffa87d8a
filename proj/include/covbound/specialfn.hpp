#pragma once

#include <utility>

namespace covbound
{

// Standard normal density.
double norm_pdf(double x);

/// Complementary error function (Cody's rational Chebyshev approximations).
double erfc_cody(double x);

/// Standard normal distribution function, accurate to ~1e-16 absolute.
double norm_cdf(double x);

/// P(x <= Z <= y) for Z ~ N(mu, v). A zero variance is treated as a point
/// mass at mu, so the result is the indicator of x <= mu <= y.
double psi(double x, double y, double mu, double v);

/// Phi(a + b) - Phi(a - b); shares its evaluation path with psi(a-b, a+b, 0, 1).
double delta(double a, double b);

/// z such that P(-z <= Z <= z) = 1 - alpha for Z ~ N(0, 1).
double two_sided_normal_quantile(double alpha);

/// log(Gamma(b) / Gamma(b + a)) without the cancellation of two lgamma calls.
double log_gamma_ratio(double b, double a);

/// Regularized incomplete beta I_x(a, b). Both x and 1 - x are passed so that
/// callers holding an accurate complement do not lose it to rounding.
double regularized_beta(double a, double b, double x, double one_minus_x);

/// Regularized lower and upper incomplete gamma functions P(a, x), Q(a, x).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// Student t with m degrees of freedom.
double t_pdf(double t, int m);
/// P(|T| > t) for T ~ t_m and t >= 0.
double t_two_sided_tail(double t, int m);

/// t(m) with P(-t(m) <= T <= t(m)) = 1 - alpha for T ~ t_m.
double t_quantile(int m, double alpha);

/// Density of W = sqrt(Q / m), Q ~ chi^2_m. Evaluated in log space.
double w_log_density(double w, int m);
double w_density(double w, int m);

/// P(W <= w) and P(W > w).
double w_cdf(double w, int m);
double w_survival(double w, int m);

/// Interval [w_lo, w_hi] outside which W has total probability at most eps.
std::pair<double, double> w_mass_interval(int m, double eps);

} // namespace covbound
