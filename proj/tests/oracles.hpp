#pragma once

// Reference implementations that share no code with the library.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle
{

/// P(|T| < t) for T ~ t_m by the finite trigonometric sums for integer m.
inline long double t_central_mass(long double t, int m)
{
    const long double theta = std::atan(t / std::sqrt(static_cast<long double>(m)));
    const long double s = std::sin(theta);
    const long double c = std::cos(theta);
    const long double c2 = c * c;
    if (m % 2 == 0)
    {
        long double term = 1.0L;
        long double sum = 1.0L;
        for (int k = 2; k <= m - 2; k += 2)
        {
            term *= c2 * (k - 1) / k;
            sum += term;
        }
        return s * sum;
    }
    if (m == 1)
        return 2.0L * theta / std::numbers::pi_v<long double>;
    long double term = c;
    long double sum = c;
    for (int k = 3; k <= m - 2; k += 2)
    {
        term *= c2 * (k - 1) / k;
        sum += term;
    }
    return 2.0L / std::numbers::pi_v<long double> * (theta + s * sum);
}

/// Two-sided t quantile by plain bisection on t_central_mass.
inline double t_quantile_bisect(int m, double alpha)
{
    long double lo = 0.0L;
    long double hi = 1.0L;
    while (t_central_mass(hi, m) < 1.0L - alpha)
        hi *= 2.0L;
    for (int i = 0; i < 200; ++i)
    {
        const long double mid = 0.5L * (lo + hi);
        if (t_central_mass(mid, m) < 1.0L - alpha)
            lo = mid;
        else
            hi = mid;
    }
    return static_cast<double>(0.5L * (lo + hi));
}

/// Phi(x) from the Maclaurin series of the error integral; good for |x| <= 6.
inline double norm_cdf_series(double x)
{
    const long double xl = x;
    long double term = xl;
    long double sum = xl;
    for (int k = 1; k < 400; ++k)
    {
        term *= xl * xl / (2 * k + 1);
        sum += term;
        if (std::abs(term) < 1e-30L * std::abs(sum))
            break;
    }
    const long double pdf = std::exp(-0.5L * xl * xl) / std::sqrt(2.0L * std::numbers::pi_v<long double>);
    return static_cast<double>(0.5L + pdf * sum);
}

/// Two-sided normal critical value by bisection on norm_cdf_series.
inline double normal_two_sided_quantile(double alpha)
{
    double lo = 0.0;
    double hi = 6.0;
    for (int i = 0; i < 200; ++i)
    {
        const double mid = 0.5 * (lo + hi);
        if (2.0 * norm_cdf_series(mid) - 1.0 < 1.0 - alpha)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Student t with one degree of freedom is Cauchy.
inline double cauchy_two_sided_quantile(double alpha)
{
    return std::tan(std::numbers::pi * (1.0 - alpha) / 2.0);
}

/// Composite Simpson rule, for integrands the library quadrature is compared against.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels)
{
    if (panels % 2)
        ++panels;
    const double h = (b - a) / panels;
    double sum = f(a) + f(b);
    for (int i = 1; i < panels; ++i)
        sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

} // namespace oracle
