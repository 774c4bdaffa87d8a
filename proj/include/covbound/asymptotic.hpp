#pragma once

#include "covbound/minimize.hpp"
#include "covbound/rules.hpp"

namespace covbound
{

/// Large-sample (m = infinity) problem for a conservative selection rule.
class AsymptoticProblem
{
  public:
    /// Requires 0 < alpha < 1, |rho| < 1 and d_prime > 0.
    AsymptoticProblem(double alpha, double rho, double d_prime);

    /// Throws NotApplicable for rules without a large-sample threshold (bic, ttest).
    static AsymptoticProblem for_method(const SelectionMethod& method, double alpha, double rho);

    double alpha() const noexcept { return alpha_; }
    double rho() const noexcept { return rho_; }
    double d_prime() const noexcept { return d_prime_; }
    /// Two-sided normal critical value, P(-z <= Z <= z) = 1 - alpha.
    double z() const noexcept { return z_; }

  private:
    double alpha_;
    double rho_;
    double d_prime_;
    double z_;
};

/// Limiting coverage, with the single h-integral over [-d', d']:
/// 1 - alpha + Delta(rho gamma / s, z) Delta(gamma, d')
///   - int_{-d'}^{d'} Delta(rho (h - gamma) / s, z / s) phi(h - gamma) dh,  s = sqrt(1 - rho^2).
double asymptotic_coverage(const AsymptoticProblem& problem, double gamma);

/// Same quantity with the bivariate-normal probability written as an integral
/// over [-z, z]: int Delta((gamma + rho h) / s, d' / s) phi(h) dh.
double asymptotic_coverage_bivariate(const AsymptoticProblem& problem, double gamma);

/// Minimum over gamma >= 0 of asymptotic_coverage.
BoundResult asymptotic_bound(const AsymptoticProblem& problem, const SearchConfig& config = {});

/// m = infinity counterpart of rho_one_bound: 2 (Phi(z) - Phi(d')) if d' < z, else 0.
double asymptotic_rho_one_bound(double alpha, double d_prime);

} // namespace covbound
