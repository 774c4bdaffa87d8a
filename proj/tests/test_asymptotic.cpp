#include <doctest.h>

#include <cmath>

#include "covbound/asymptotic.hpp"
#include "covbound/bound.hpp"
#include "covbound/specialfn.hpp"
#include "oracles.hpp"

using namespace covbound;

namespace
{

// Large-sample coverage as a direct probability over the bivariate normal (G, H).
double coverage_limit_direct(double alpha, double rho, double dp, double gamma)
{
    const double z = oracle::normal_two_sided_quantile(alpha);
    const double s = std::sqrt(1.0 - rho * rho);
    auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); };
    auto full = [&](double h) {
        const double mu = rho * (h - gamma);
        return (oracle::norm_cdf_series((z - mu) / s) - oracle::norm_cdf_series((-z - mu) / s)) * phi(h - gamma);
    };
    auto reduced = [&](double h) {
        const double mu = rho * (h - gamma);
        return (oracle::norm_cdf_series((rho * h + z * s - mu) / s) -
                oracle::norm_cdf_series((rho * h - z * s - mu) / s)) *
               phi(h - gamma);
    };
    double total = oracle::simpson(reduced, -dp, dp, 2000);
    if (gamma + 12.0 > dp)
        total += oracle::simpson(full, dp, std::max(dp, gamma + 12.0), 4000);
    if (gamma - 12.0 < -dp)
        total += oracle::simpson(full, std::min(-dp, gamma - 12.0), -dp, 4000);
    return total;
}

} // namespace

TEST_SUITE("asymptotic")
{
    TEST_CASE("construction")
    {
        CHECK(AsymptoticProblem::for_method(SelectionMethod::cp(), 0.05, 0.5).d_prime() == doctest::Approx(std::sqrt(2.0)));
        CHECK(AsymptoticProblem::for_method(SelectionMethod::adjr2(), 0.05, 0.5).d_prime() == 1.0);
        CHECK_THROWS_AS(AsymptoticProblem::for_method(SelectionMethod::bic(), 0.05, 0.5), NotApplicable);
        CHECK_THROWS_AS(AsymptoticProblem::for_method(SelectionMethod::ttest(0.05), 0.05, 0.5), NotApplicable);
        CHECK_THROWS_AS(AsymptoticProblem(0.05, 1.0, 1.0), InvalidArgument);
        CHECK_THROWS_AS(AsymptoticProblem(0.05, 0.5, 0.0), InvalidArgument);
        CHECK(AsymptoticProblem(0.05, 0.5, 1.0).z() == doctest::Approx(1.959963984540054));
    }

    TEST_CASE("matches the direct bivariate-normal probability")
    {
        for (double rho : {0.2, 0.6, 0.9, -0.7})
            for (double g : {0.0, 1.0, 2.5})
            {
                const AsymptoticProblem problem(0.05, rho, std::sqrt(2.0));
                CHECK(asymptotic_coverage(problem, g) ==
                      doctest::Approx(coverage_limit_direct(0.05, rho, std::sqrt(2.0), g)).epsilon(1e-9));
            }
    }

    TEST_CASE("two forms agree")
    {
        for (double rho : {0.1, 0.5, 0.95})
            for (double g : {0.0, 0.8, 4.0})
            {
                const AsymptoticProblem problem(0.1, rho, 1.0);
                CHECK(std::abs(asymptotic_coverage(problem, g) - asymptotic_coverage_bivariate(problem, g)) <= 1e-10);
            }
    }

    TEST_CASE("rho = 0 and large gamma give 1 - alpha")
    {
        const AsymptoticProblem zero(0.05, 0.0, std::sqrt(2.0));
        CHECK(asymptotic_coverage(zero, 1.7) == 0.95);
        const AsymptoticProblem p(0.05, 0.8, std::sqrt(2.0));
        CHECK(asymptotic_coverage(p, 30.0) == doctest::Approx(0.95).epsilon(1e-12));
    }

    TEST_CASE("finite-m coverage approaches the limit")
    {
        const AsymptoticProblem limit(0.05, 0.7, std::sqrt(2.0));
        const auto problem = BoundProblem::with_residual_dof(0.05, 10, 20000, 0.7);
        const CoverageEvaluator eval(problem, std::sqrt(2.0));
        for (double g : {0.0, 1.5})
            CHECK(std::abs(eval(g).value - asymptotic_coverage(limit, g)) <= 2e-4);
    }

    TEST_CASE("bound")
    {
        const AsymptoticProblem problem(0.05, 0.8, std::sqrt(2.0));
        const auto r = asymptotic_bound(problem);
        CHECK(r.bound < 0.95);
        for (double g = 0.0; g <= 6.0; g += 0.1)
            CHECK(asymptotic_coverage(problem, g) >= r.bound - 1e-12);
    }

    TEST_CASE("rho = 1 closed form")
    {
        const double z = two_sided_normal_quantile(0.05);
        CHECK(asymptotic_rho_one_bound(0.05, std::sqrt(2.0)) ==
              doctest::Approx(2.0 * (oracle::norm_cdf_series(z) - oracle::norm_cdf_series(std::sqrt(2.0)))).epsilon(1e-13));
        CHECK(asymptotic_rho_one_bound(0.05, 2.0) == 0.0);
        // Limit of the bound as rho -> 1.
        const auto r = asymptotic_bound(AsymptoticProblem(0.05, 0.9999, std::sqrt(2.0)));
        CHECK(std::abs(r.bound - asymptotic_rho_one_bound(0.05, std::sqrt(2.0))) <= 0.01);
    }
}
