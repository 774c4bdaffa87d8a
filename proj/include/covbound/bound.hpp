#pragma once

#include <utility>

#include "covbound/rules.hpp"
#include "covbound/types.hpp"

namespace covbound
{

/// Coverage of the post-selection interval at one value of gamma.
struct CoverageResult
{
    double value = 0.0;
    double quad_err = 0.0;
    int panels_used = 0;
};

/// Probability mass of W discarded from the outer integral.
inline constexpr double kOuterTruncationMass = 1e-12;

/// Beyond this distance from +-1, rho is pulled back before integration.
inline constexpr double kRhoClamp = 1e-6;

/// (l1(w), u1(w)) = (-t(m) w, t(m) w).
std::pair<double, double> lower_upper_1(double w, int m, double alpha);

/// Interval centred at rho h with half-width
/// t(m + 1) sqrt((m w^2 + h^2) / (m + 1)) sqrt(1 - rho^2).
std::pair<double, double> lower_upper_2(double h, double w, double rho, int m, double alpha);

/// Psi(l1(w), u1(w); rho (h - gamma), 1 - rho^2).
double k_dagger(double h, double w, double gamma, double rho, const BoundProblem& problem);

/// Psi(l2, u2; rho (h - gamma), 1 - rho^2).
double k_fn(double h, double w, double gamma, double rho, const BoundProblem& problem);

/// Evaluates the coverage probability of the post-selection interval as a
/// function of gamma for a fixed problem and threshold d:
///
///   (1 - alpha) + int_0^inf int_{-d}^{d} (k - k_dagger)(wx, w) phi(wx - gamma) w f_W(w) dx dw
///
/// The outer integral runs over the central 1 - 1e-12 mass of W; both levels use
/// adaptive Gauss-Kronrod. Quantiles and the W range are computed once.
class CoverageEvaluator
{
  public:
    CoverageEvaluator(const BoundProblem& problem, double d, const Tolerance& tol = {});
    CoverageEvaluator(const BoundProblem& problem, const SelectionMethod& method, const Tolerance& tol = {});

    CoverageResult operator()(double gamma) const;

    /// (k - k_dagger)(wx, w) phi(wx - gamma) w, the inner integrand before f_W.
    double inner_integrand(double x, double w, double gamma) const;

    double d() const noexcept { return d_; }
    double rho() const noexcept { return rho_; }
    double limit_value() const noexcept { return 1.0 - alpha_; }
    std::pair<double, double> w_range() const noexcept { return {w_lo_, w_hi_}; }

  private:
    double alpha_;
    int m_;
    double d_;
    double rho_;
    double sd_;
    double t_m_;
    double t_m1_;
    double w_lo_;
    double w_hi_;
    Tolerance tol_;
};

/// Coverage probability of the post-selection interval at gamma. Requires
/// |rho| < 1; the degenerate case is handled by rho_one_bound.
CoverageResult coverage_probability(const BoundProblem& problem, const SelectionMethod& method, double gamma,
                                    const Tolerance& tol = {});

/// Closed form of the bound at |rho| = 1:
/// 2 int (Phi(t(m) w) - Phi(d w)) f_W(w) dw when d < t(m), else 0.
double rho_one_bound(const BoundProblem& problem, const SelectionMethod& method, const Tolerance& tol = {});
double rho_one_bound(const BoundProblem& problem, double d, const Tolerance& tol = {});

} // namespace covbound
