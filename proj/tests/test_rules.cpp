#include <doctest.h>

#include <cmath>

#include "covbound/rules.hpp"
#include "covbound/specialfn.hpp"
#include "covbound/types.hpp"

using namespace covbound;

TEST_SUITE("rules")
{
    TEST_CASE("parse")
    {
        CHECK(SelectionMethod::parse("AIC").kind() == MethodKind::AIC);
        CHECK(SelectionMethod::parse("Cp").kind() == MethodKind::Cp);
        CHECK(SelectionMethod::parse("adjr2").kind() == MethodKind::AdjR2);
        CHECK(SelectionMethod::parse("bic").name() == "bic");
        const auto t = SelectionMethod::parse("ttest", 0.1);
        CHECK(t.kind() == MethodKind::TTest);
        CHECK(*t.test_size() == 0.1);
        CHECK_THROWS_AS(SelectionMethod::parse("ttest"), InvalidArgument);
        CHECK_THROWS_AS(SelectionMethod::parse("cp", 0.1), InvalidArgument);
        CHECK_THROWS_AS(SelectionMethod::parse("lasso"), InvalidArgument);
        CHECK_THROWS_AS(SelectionMethod::ttest(1.5), InvalidArgument);
    }

    TEST_CASE("two-model thresholds")
    {
        CHECK(threshold_d(SelectionMethod::cp(), 30, 10) == doctest::Approx(std::sqrt(2.0)));
        CHECK(threshold_d(SelectionMethod::adjr2(), 30, 10) == 1.0);
        // AIC keeps beta_p iff n ln(1 + T^2 / m) >= 2.
        const double d_aic = threshold_d(SelectionMethod::aic(), 30, 10);
        CHECK(30.0 * std::log1p(d_aic * d_aic / 20.0) == doctest::Approx(2.0).epsilon(1e-14));
        const double d_bic = threshold_d(SelectionMethod::bic(), 30, 10);
        CHECK(30.0 * std::log1p(d_bic * d_bic / 20.0) == doctest::Approx(std::log(30.0)).epsilon(1e-14));
        CHECK(threshold_d(SelectionMethod::ttest(0.05), 30, 10) == t_quantile(20, 0.05));
        // AIC threshold tends to sqrt(2); BIC grows without bound.
        CHECK(threshold_d(SelectionMethod::aic(), 1000010, 10) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-5));
        CHECK(threshold_d(SelectionMethod::bic(), 10010, 10) > 3.0);
        CHECK_THROWS_AS(threshold_d(SelectionMethod::cp(), 10, 10), InvalidArgument);
    }

    TEST_CASE("large-sample thresholds")
    {
        CHECK(*asymptotic_d(SelectionMethod::aic()) == doctest::Approx(std::sqrt(2.0)));
        CHECK(*asymptotic_d(SelectionMethod::cp()) == doctest::Approx(std::sqrt(2.0)));
        CHECK(*asymptotic_d(SelectionMethod::adjr2()) == 1.0);
        CHECK_FALSE(asymptotic_d(SelectionMethod::bic()).has_value());
        CHECK_FALSE(asymptotic_d(SelectionMethod::ttest(0.05)).has_value());
    }

    TEST_CASE("penalty")
    {
        CHECK(SelectionMethod::aic().aic_penalty(50) == 1.0);
        CHECK(SelectionMethod::bic().aic_penalty(50) == doctest::Approx(std::log(50.0) / 2.0));
        CHECK_THROWS_AS(SelectionMethod::cp().aic_penalty(50), InvalidArgument);
    }

    TEST_CASE("problem validation")
    {
        CHECK_NOTHROW(validate(BoundProblem{}));
        CHECK(BoundProblem::with_residual_dof(0.05, 10, 5, 0.3).n == 15);
        CHECK_THROWS_AS(validate(BoundProblem{0.05, 10, 10, 0.0}), InvalidArgument);
        CHECK_THROWS_AS(validate(BoundProblem{0.05, 1, 10, 0.0}), InvalidArgument);
        CHECK_THROWS_AS(validate(BoundProblem{1.0, 10, 30, 0.0}), InvalidArgument);
        CHECK_THROWS_AS(validate(BoundProblem{0.05, 10, 30, 1.1}), InvalidArgument);
    }
}
