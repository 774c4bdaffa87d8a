#include "covbound/rules.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "covbound/specialfn.hpp"
#include "covbound/types.hpp"

namespace covbound
{

SelectionMethod SelectionMethod::ttest(double test_size)
{
    if (!(test_size > 0.0 && test_size < 1.0))
        throw InvalidArgument("t-test size must lie in (0, 1)");
    return SelectionMethod(MethodKind::TTest, test_size);
}

SelectionMethod SelectionMethod::parse(std::string_view name, std::optional<double> test_size)
{
    std::string key(name);
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    if (key == "ttest")
    {
        if (!test_size)
            throw InvalidArgument("method ttest requires a test size");
        return ttest(*test_size);
    }
    if (test_size)
        throw InvalidArgument("a test size applies only to method ttest");
    if (key == "aic")
        return aic();
    if (key == "bic")
        return bic();
    if (key == "cp")
        return cp();
    if (key == "adjr2")
        return adjr2();
    throw InvalidArgument("unknown selection method '" + std::string(name) + "'");
}

std::string_view SelectionMethod::name() const noexcept
{
    switch (kind_)
    {
    case MethodKind::AIC:
        return "aic";
    case MethodKind::BIC:
        return "bic";
    case MethodKind::Cp:
        return "cp";
    case MethodKind::AdjR2:
        return "adjr2";
    case MethodKind::TTest:
        return "ttest";
    }
    return "";
}

double SelectionMethod::aic_penalty(int n) const
{
    switch (kind_)
    {
    case MethodKind::AIC:
        return 1.0;
    case MethodKind::BIC:
        return 0.5 * std::log(static_cast<double>(n));
    default:
        throw InvalidArgument("penalty f(n) is defined only for aic and bic");
    }
}

void validate(const BoundProblem& problem)
{
    if (!(problem.alpha > 0.0 && problem.alpha < 1.0))
        throw InvalidArgument("alpha must lie in (0, 1)");
    if (problem.p < 2)
        throw InvalidArgument("p must be at least 2");
    if (problem.n <= problem.p)
        throw InvalidArgument("n must exceed p");
    if (!(std::abs(problem.rho) <= 1.0))
        throw InvalidArgument("rho must lie in [-1, 1]");
}

double threshold_d(const SelectionMethod& method, int n, int p)
{
    if (n <= p)
        throw InvalidArgument("threshold_d: n must exceed p");
    switch (method.kind())
    {
    case MethodKind::Cp:
        return std::numbers::sqrt2;
    case MethodKind::AdjR2:
        return 1.0;
    case MethodKind::AIC:
    case MethodKind::BIC:
        return std::sqrt(std::expm1(2.0 * method.aic_penalty(n) / n) * (n - p));
    case MethodKind::TTest:
        return t_quantile(n - p, *method.test_size());
    }
    return 0.0;
}

std::optional<double> asymptotic_d(const SelectionMethod& method)
{
    switch (method.kind())
    {
    case MethodKind::AIC:
    case MethodKind::Cp:
        return std::numbers::sqrt2;
    case MethodKind::AdjR2:
        return 1.0;
    default:
        return std::nullopt;
    }
}

} // namespace covbound
