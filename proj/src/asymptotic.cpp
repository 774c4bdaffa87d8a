#include "covbound/asymptotic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "covbound/quadrature.hpp"
#include "covbound/specialfn.hpp"

namespace covbound
{

namespace
{

constexpr quad::Options kOptions{1e-12, 0.0, 400};

double integrate_or_throw(const auto& f, double a, double b)
{
    const quad::Result r = quad::integrate(f, a, b, kOptions);
    if (!r.converged)
        throw QuadratureError("large-sample coverage quadrature did not converge", r.value, r.abs_err);
    return r.value;
}

} // namespace

AsymptoticProblem::AsymptoticProblem(double alpha, double rho, double d_prime)
    : alpha_(alpha), rho_(rho), d_prime_(d_prime)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InvalidArgument("alpha must lie in (0, 1)");
    if (!(std::abs(rho) < 1.0))
        throw InvalidArgument("large-sample coverage requires |rho| < 1");
    if (!(d_prime > 0.0))
        throw InvalidArgument("d' must be positive");
    z_ = two_sided_normal_quantile(alpha);
}

AsymptoticProblem AsymptoticProblem::for_method(const SelectionMethod& method, double alpha, double rho)
{
    const auto d_prime = asymptotic_d(method);
    if (!d_prime)
        throw NotApplicable("the large-sample bound does not apply to method " + std::string(method.name()) +
                            " (not a conservative selection procedure)");
    return AsymptoticProblem(alpha, rho, *d_prime);
}

double asymptotic_coverage(const AsymptoticProblem& problem, double gamma)
{
    const double rho = problem.rho();
    const double level = 1.0 - problem.alpha();
    // Both gamma-dependent terms cancel exactly.
    if (rho == 0.0)
        return level;
    const double s = std::sqrt(1.0 - rho * rho);
    const double z = problem.z();
    const double dp = problem.d_prime();
    const double integral =
        integrate_or_throw([&](double h) { return delta(rho * (h - gamma) / s, z / s) * norm_pdf(h - gamma); },
                           -dp, dp);
    return std::clamp(level + delta(rho * gamma / s, z) * delta(gamma, dp) - integral, 0.0, 1.0);
}

double asymptotic_coverage_bivariate(const AsymptoticProblem& problem, double gamma)
{
    const double rho = problem.rho();
    const double level = 1.0 - problem.alpha();
    if (rho == 0.0)
        return level;
    const double s = std::sqrt(1.0 - rho * rho);
    const double z = problem.z();
    const double dp = problem.d_prime();
    const double joint =
        integrate_or_throw([&](double h) { return delta((gamma + rho * h) / s, dp / s) * norm_pdf(h); }, -z, z);
    return std::clamp(level + delta(rho * gamma / s, z) * delta(gamma, dp) - joint, 0.0, 1.0);
}

BoundResult asymptotic_bound(const AsymptoticProblem& problem, const SearchConfig& config)
{
    return minimize_over_gamma([&](double gamma) { return asymptotic_coverage(problem, gamma); },
                               1.0 - problem.alpha(), config);
}

double asymptotic_rho_one_bound(double alpha, double d_prime)
{
    const double z = two_sided_normal_quantile(alpha);
    if (d_prime >= z)
        return 0.0;
    return 2.0 * psi(d_prime, z, 0.0, 1.0);
}

} // namespace covbound
