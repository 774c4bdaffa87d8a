#include "covbound/bound.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

#include "covbound/quadrature.hpp"
#include "covbound/specialfn.hpp"

namespace covbound
{

namespace
{

struct Kernel
{
    int m;
    double rho;
    double var;
    double t_m;
    double t_m1;

    double half_width_2(double h, double w) const
    {
        return t_m1 * std::sqrt((m * w * w + h * h) / (m + 1.0)) * std::sqrt(var);
    }

    double k_dagger(double h, double w, double gamma) const
    {
        return psi(-t_m * w, t_m * w, rho * (h - gamma), var);
    }

    double k(double h, double w, double gamma) const
    {
        const double centre = rho * h;
        const double half = half_width_2(h, w);
        return psi(centre - half, centre + half, rho * (h - gamma), var);
    }
};

Kernel make_kernel(const BoundProblem& problem, double rho)
{
    const int m = problem.m();
    return Kernel{m, rho, std::max(0.0, 1.0 - rho * rho), t_quantile(m, problem.alpha),
                  t_quantile(m + 1, problem.alpha)};
}

void require_w(double w)
{
    if (!(w > 0.0))
        throw InvalidArgument("w must be positive");
}

} // namespace

std::pair<double, double> lower_upper_1(double w, int m, double alpha)
{
    require_w(w);
    const double t = t_quantile(m, alpha);
    return {-t * w, t * w};
}

std::pair<double, double> lower_upper_2(double h, double w, double rho, int m, double alpha)
{
    require_w(w);
    if (!(std::abs(rho) <= 1.0))
        throw InvalidArgument("rho must lie in [-1, 1]");
    const Kernel kernel{m, rho, std::max(0.0, 1.0 - rho * rho), 0.0, t_quantile(m + 1, alpha)};
    const double half = kernel.half_width_2(h, w);
    return {rho * h - half, rho * h + half};
}

double k_dagger(double h, double w, double gamma, double rho, const BoundProblem& problem)
{
    require_w(w);
    validate(problem);
    return make_kernel(problem, rho).k_dagger(h, w, gamma);
}

double k_fn(double h, double w, double gamma, double rho, const BoundProblem& problem)
{
    require_w(w);
    validate(problem);
    return make_kernel(problem, rho).k(h, w, gamma);
}

CoverageEvaluator::CoverageEvaluator(const BoundProblem& problem, double d, const Tolerance& tol)
    : alpha_(problem.alpha), m_(problem.m()), d_(d), rho_(problem.rho), tol_(tol)
{
    validate(problem);
    validate(tol);
    if (!(d >= 0.0) || !std::isfinite(d))
        throw InvalidArgument("threshold d must be finite and non-negative");
    if (std::abs(rho_) == 1.0)
        throw InvalidArgument("coverage integral requires |rho| < 1; use rho_one_bound for |rho| = 1");
    if (std::abs(rho_) > 1.0 - kRhoClamp)
    {
        const double clamped = std::copysign(1.0 - kRhoClamp, rho_);
        std::cerr << "warning: rho = " << rho_ << " clamped to " << clamped << '\n';
        rho_ = clamped;
    }
    sd_ = std::sqrt(1.0 - rho_ * rho_);
    t_m_ = t_quantile(m_, alpha_);
    t_m1_ = t_quantile(m_ + 1, alpha_);
    std::tie(w_lo_, w_hi_) = w_mass_interval(m_, kOuterTruncationMass);
}

CoverageEvaluator::CoverageEvaluator(const BoundProblem& problem, const SelectionMethod& method,
                                     const Tolerance& tol)
    : CoverageEvaluator(problem, threshold_d(method, problem.n, problem.p), tol)
{
}

double CoverageEvaluator::inner_integrand(double x, double w, double gamma) const
{
    const double h = w * x;
    const double shift = h - gamma;
    if (std::abs(shift) > 40.0)
        return 0.0;
    const Kernel kernel{m_, rho_, sd_ * sd_, t_m_, t_m1_};
    return (kernel.k(h, w, gamma) - kernel.k_dagger(h, w, gamma)) * norm_pdf(shift) * w;
}

CoverageResult CoverageEvaluator::operator()(double gamma) const
{
    if (!std::isfinite(gamma))
        throw InvalidArgument("gamma must be finite");
    CoverageResult result;
    result.value = 1.0 - alpha_;
    if (d_ == 0.0)
        return result;

    const quad::Options inner_opt{0.1 * tol_.abs_err, 0.0, 400};
    const quad::Options outer_opt{0.5 * tol_.abs_err, 0.0, 400};
    double inner_err = 0.0;
    int inner_panels = 0;
    bool inner_ok = true;

    auto outer = [&](double w) {
        const double density = w_density(w, m_);
        if (density == 0.0)
            return 0.0;
        const quad::Result in =
            quad::integrate([&](double x) { return inner_integrand(x, w, gamma); }, -d_, d_, inner_opt);
        inner_err = std::max(inner_err, in.abs_err);
        inner_panels += in.panels;
        inner_ok = inner_ok && in.converged;
        return in.value * density;
    };
    const quad::Result out = quad::integrate(outer, w_lo_, w_hi_, outer_opt);

    result.value = std::clamp(1.0 - alpha_ + out.value, 0.0, 1.0);
    result.quad_err = out.abs_err + inner_err + kOuterTruncationMass;
    result.panels_used = out.panels + inner_panels;
    if (!out.converged || !inner_ok)
        throw QuadratureError("coverage quadrature did not converge at gamma = " + std::to_string(gamma),
                              result.value, result.quad_err);
    return result;
}

CoverageResult coverage_probability(const BoundProblem& problem, const SelectionMethod& method, double gamma,
                                    const Tolerance& tol)
{
    return CoverageEvaluator(problem, method, tol)(gamma);
}

double rho_one_bound(const BoundProblem& problem, double d, const Tolerance& tol)
{
    validate(problem);
    validate(tol);
    const int m = problem.m();
    const double t_m = t_quantile(m, problem.alpha);
    if (d >= t_m)
        return 0.0;
    const auto [w_lo, w_hi] = w_mass_interval(m, kOuterTruncationMass);
    const quad::Result r = quad::integrate(
        [&](double w) { return 2.0 * psi(d * w, t_m * w, 0.0, 1.0) * w_density(w, m); }, w_lo, w_hi,
        quad::Options{0.1 * tol.abs_err, 0.0, 400});
    if (!r.converged)
        throw QuadratureError("rho = 1 bound quadrature did not converge", r.value, r.abs_err);
    return std::clamp(r.value, 0.0, 1.0);
}

double rho_one_bound(const BoundProblem& problem, const SelectionMethod& method, const Tolerance& tol)
{
    return rho_one_bound(problem, threshold_d(method, problem.n, problem.p), tol);
}

} // namespace covbound
