#include "covbound/specialfn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "covbound/types.hpp"

namespace covbound
{

namespace
{

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

// Stirling remainder lgamma(x) - ((x - 1/2) log x - x + log sqrt(2 pi)), x >= 10.
double stirling_remainder(double x)
{
    const double r = 1.0 / x;
    const double r2 = r * r;
    return r *
           (1.0 / 12.0 +
            r2 * (-1.0 / 360.0 +
                  r2 * (1.0 / 1260.0 +
                        r2 * (-1.0 / 1680.0 +
                              r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360360.0 + r2 * (1.0 / 156.0)))))));
}

// P(a <= Z <= b) for standard normal Z, evaluated on whichever tail keeps
// precision. Mirror images (a, b) -> (-b, -a) take bit-identical paths.
double standard_interval(double a, double b)
{
    double r;
    if (a + b > 0.0)
        r = norm_cdf(-a) - norm_cdf(-b);
    else
        r = norm_cdf(b) - norm_cdf(a);
    return std::clamp(r, 0.0, 1.0);
}

// Root of a decreasing function inside [lo, hi] with f(lo) > 0 > f(hi):
// Newton steps, falling back to bisection whenever a step leaves the bracket.
template <class F, class DF>
double solve_decreasing(F f, DF df, double lo, double hi, double x0)
{
    double x = (x0 > lo && x0 < hi) ? x0 : 0.5 * (lo + hi);
    for (int it = 0; it < 500; ++it)
    {
        const double fx = f(x);
        if (fx == 0.0)
            return x;
        if (fx > 0.0)
            lo = x;
        else
            hi = x;
        const double slope = df(x);
        double next = slope < 0.0 ? x - fx / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 2.0 * kEps * std::abs(next) || hi - lo <= 2.0 * kEps * std::abs(hi))
            return next;
        x = next;
    }
    return x;
}

double beta_continued_fraction(double a, double b, double x)
{
    constexpr int kMaxIter = 200000;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny)
        d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i)
    {
        const double m2 = 2.0 * i;
        double aa = i * (b - i) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + i) * (qab + i) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps)
            return h;
    }
    return h;
}

// log(exp(-x) x^a / Gamma(a))
double log_gamma_prefix(double a, double x)
{
    if (a < 10.0)
        return a * std::log(x) - x - std::lgamma(a);
    const double u = (x - a) / a;
    return a * (std::log1p(u) - u) + 0.5 * std::log(a) - kLogSqrt2Pi - stirling_remainder(a);
}

double gamma_series(double a, double x)
{
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int i = 0; i < 1000000; ++i)
    {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * kEps)
            break;
    }
    return sum * std::exp(log_gamma_prefix(a, x));
}

double gamma_continued_fraction(double a, double x)
{
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000000; ++i)
    {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny)
            d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps)
            break;
    }
    return std::exp(log_gamma_prefix(a, x)) * h;
}

void require_dof(int m)
{
    if (m < 1)
        throw InvalidArgument("degrees of freedom must be >= 1");
}

} // namespace

void validate(const Tolerance& tol)
{
    if (!(tol.rel_err > 0.0) || !(tol.abs_err > 0.0))
        throw InvalidArgument("tolerances must be strictly positive");
}

double norm_pdf(double x)
{
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double erfc_cody(double x)
{
    static constexpr std::array<double, 5> a = {3.1611237438705656, 113.864154151050156, 377.485237685302021,
                                                3209.37758913846947, 0.185777706184603153};
    static constexpr std::array<double, 4> b = {23.6012909523441209, 244.024637934444173, 1282.61652607737228,
                                                2844.23683343917062};
    static constexpr std::array<double, 9> c = {0.564188496988670089, 8.88314979438837594, 66.1191906371416295,
                                                298.635138197400131,  881.95222124176909,  1712.04761263407058,
                                                2051.07837782607147,  1230.33935479799725, 2.15311535474403846e-8};
    static constexpr std::array<double, 8> d = {15.7449261107098347, 117.693950891312499, 537.181101862009858,
                                                1621.38957456669019, 3290.79923573345963, 4362.61909014324716,
                                                3439.36767414372164, 1230.33935480374942};
    static constexpr std::array<double, 6> p = {0.305326634961232344, 0.360344899949804439,
                                                0.125781726111229246, 0.0160837851487422766,
                                                6.58749161529837803e-4, 0.0163153871373020978};
    static constexpr std::array<double, 5> q = {2.56852019228982242, 1.87295284992346047, 0.527905102951428412,
                                                0.0605183413124413191, 0.00233520497626869185};
    constexpr double sqrpi = 0.56418958354775628695;
    constexpr double thresh = 0.46875;
    constexpr double xsmall = 1.11e-16;
    constexpr double xbig = 26.543;
    constexpr double xhuge = 6.71e7;

    if (std::isnan(x))
        return x;
    const double y = std::abs(x);
    double result;
    if (y <= thresh)
    {
        const double ysq = y > xsmall ? y * y : 0.0;
        double xnum = a[4] * ysq;
        double xden = ysq;
        for (int i = 0; i < 3; ++i)
        {
            xnum = (xnum + a[i]) * ysq;
            xden = (xden + b[i]) * ysq;
        }
        return 1.0 - x * (xnum + a[3]) / (xden + b[3]);
    }
    if (y <= 4.0)
    {
        double xnum = c[8] * y;
        double xden = y;
        for (int i = 0; i < 7; ++i)
        {
            xnum = (xnum + c[i]) * y;
            xden = (xden + d[i]) * y;
        }
        result = (xnum + c[7]) / (xden + d[7]);
        const double ysq = std::trunc(y * 16.0) / 16.0;
        const double del = (y - ysq) * (y + ysq);
        result *= std::exp(-ysq * ysq) * std::exp(-del);
    }
    else if (y >= xbig)
    {
        result = 0.0;
    }
    else
    {
        if (y >= xhuge)
        {
            result = sqrpi / y;
        }
        else
        {
            const double ysq = 1.0 / (y * y);
            double xnum = p[5] * ysq;
            double xden = ysq;
            for (int i = 0; i < 4; ++i)
            {
                xnum = (xnum + p[i]) * ysq;
                xden = (xden + q[i]) * ysq;
            }
            result = ysq * (xnum + p[4]) / (xden + q[4]);
            result = (sqrpi - result) / y;
        }
        const double ysq = std::trunc(y * 16.0) / 16.0;
        const double del = (y - ysq) * (y + ysq);
        result *= std::exp(-ysq * ysq) * std::exp(-del);
    }
    return x < 0.0 ? 2.0 - result : result;
}

double norm_cdf(double x)
{
    return 0.5 * erfc_cody(-x * std::numbers::sqrt2 * 0.5);
}

double psi(double x, double y, double mu, double v)
{
    if (x > y)
        throw InvalidArgument("psi: lower limit exceeds upper limit");
    if (v < 0.0)
        throw InvalidArgument("psi: negative variance");
    if (v == 0.0)
        return (x <= mu && mu <= y) ? 1.0 : 0.0;
    const double s = std::sqrt(v);
    return standard_interval((x - mu) / s, (y - mu) / s);
}

double delta(double a, double b)
{
    if (b >= 0.0)
        return standard_interval(a - b, a + b);
    return -standard_interval(a + b, a - b);
}

double two_sided_normal_quantile(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InvalidArgument("alpha must lie in (0, 1)");
    const auto tail = [alpha](double z) { return erfc_cody(z * std::numbers::sqrt2 * 0.5) - alpha; };
    const auto slope = [](double z) { return -2.0 * norm_pdf(z); };
    double hi = 1.0;
    while (tail(hi) > 0.0)
        hi *= 2.0;
    const double guess = std::sqrt(-2.0 * std::log(0.5 * alpha));
    return solve_decreasing(tail, slope, 0.0, hi, guess);
}

double log_gamma_ratio(double b, double a)
{
    if (b < 10.0)
        return std::lgamma(b) - std::lgamma(b + a);
    return -(b - 0.5) * std::log1p(a / b) - a * std::log(b + a) + a + stirling_remainder(b) -
           stirling_remainder(b + a);
}

double regularized_beta(double a, double b, double x, double one_minus_x)
{
    if (!(a > 0.0 && b > 0.0))
        throw InvalidArgument("regularized_beta: shape parameters must be positive");
    if (x <= 0.0)
        return 0.0;
    if (one_minus_x <= 0.0)
        return 1.0;
    const double log_x = x > 0.5 ? std::log1p(-one_minus_x) : std::log(x);
    const double log_1mx = one_minus_x > 0.5 ? std::log1p(-x) : std::log(one_minus_x);
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    const double log_beta = std::lgamma(lo) + log_gamma_ratio(hi, lo);
    const double front = std::exp(a * log_x + b * log_1mx - log_beta);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, one_minus_x) / b;
}

double regularized_gamma_p(double a, double x)
{
    if (!(a > 0.0))
        throw InvalidArgument("regularized_gamma_p: shape must be positive");
    if (x <= 0.0)
        return 0.0;
    if (x < a + 1.0)
        return gamma_series(a, x);
    return 1.0 - gamma_continued_fraction(a, x);
}

double regularized_gamma_q(double a, double x)
{
    if (!(a > 0.0))
        throw InvalidArgument("regularized_gamma_q: shape must be positive");
    if (x <= 0.0)
        return 1.0;
    if (x < a + 1.0)
        return 1.0 - gamma_series(a, x);
    return gamma_continued_fraction(a, x);
}

double t_pdf(double t, int m)
{
    require_dof(m);
    const double half_m = 0.5 * m;
    return std::exp(-log_gamma_ratio(half_m, 0.5) - 0.5 * std::log(m * std::numbers::pi) -
                    (half_m + 0.5) * std::log1p(t * t / m));
}

double t_two_sided_tail(double t, int m)
{
    require_dof(m);
    t = std::abs(t);
    if (t == 0.0)
        return 1.0;
    if (std::isinf(t))
        return 0.0;
    const double t2 = t * t;
    const double x = m / (m + t2);
    const double one_minus_x = t2 / (m + t2);
    return regularized_beta(0.5 * m, 0.5, x, one_minus_x);
}

double t_quantile(int m, double alpha)
{
    require_dof(m);
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InvalidArgument("alpha must lie in (0, 1)");
    const auto excess = [m, alpha](double t) { return t_two_sided_tail(t, m) - alpha; };
    const auto slope = [m](double t) { return -2.0 * t_pdf(t, m); };
    double hi = 1.0;
    while (excess(hi) > 0.0)
        hi *= 2.0;
    // Cornish-Fisher start from the normal quantile.
    const double z = two_sided_normal_quantile(alpha);
    const double z2 = z * z;
    const double guess = z + z * (z2 + 1.0) / (4.0 * m) + z * ((5.0 * z2 + 16.0) * z2 + 3.0) / (96.0 * m * m);
    return solve_decreasing(excess, slope, 0.0, hi, guess);
}

double w_log_density(double w, int m)
{
    require_dof(m);
    if (!(w > 0.0))
        throw InvalidArgument("w_density: w must be positive");
    const double a = 0.5 * m;
    const double log_w = std::log(w);
    if (a < 10.0)
        return std::numbers::ln2 + a * std::log(a) - std::lgamma(a) + (m - 1.0) * log_w - a * w * w;
    return std::numbers::ln2 + 0.5 * std::log(a) - kLogSqrt2Pi - stirling_remainder(a) + (m - 1.0) * log_w -
           a * (w - 1.0) * (w + 1.0);
}

double w_density(double w, int m)
{
    return std::exp(w_log_density(w, m));
}

double w_cdf(double w, int m)
{
    require_dof(m);
    if (w <= 0.0)
        return 0.0;
    return regularized_gamma_p(0.5 * m, 0.5 * m * w * w);
}

double w_survival(double w, int m)
{
    require_dof(m);
    if (w <= 0.0)
        return 1.0;
    return regularized_gamma_q(0.5 * m, 0.5 * m * w * w);
}

std::pair<double, double> w_mass_interval(int m, double eps)
{
    require_dof(m);
    if (!(eps > 0.0 && eps < 0.5))
        throw InvalidArgument("w_mass_interval: eps must lie in (0, 0.5)");
    const double target = 0.5 * eps;

    // Lower end: geometric bisection keeps relative resolution near zero.
    double lo = 1e-300;
    double hi = 1.0;
    while (hi / lo > 1.0 + 1e-12)
    {
        const double mid = std::sqrt(lo * hi);
        if (w_cdf(mid, m) <= target)
            lo = mid;
        else
            hi = mid;
    }
    const double w_lo = lo;

    hi = 1.0;
    while (w_survival(hi, m) > target)
        hi *= 2.0;
    lo = 0.5 * hi;
    while (hi - lo > 1e-12 * hi)
    {
        const double mid = 0.5 * (lo + hi);
        if (w_survival(mid, m) <= target)
            hi = mid;
        else
            lo = mid;
    }
    return {w_lo, hi};
}

} // namespace covbound
