#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace covbound
{

enum class MethodKind
{
    AIC,
    BIC,
    Cp,
    AdjR2,
    TTest
};

/// A model-selection rule. Only the t-test rule carries a parameter: the size
/// of each preliminary test.
class SelectionMethod
{
  public:
    static SelectionMethod aic() { return SelectionMethod(MethodKind::AIC, std::nullopt); }
    static SelectionMethod bic() { return SelectionMethod(MethodKind::BIC, std::nullopt); }
    static SelectionMethod cp() { return SelectionMethod(MethodKind::Cp, std::nullopt); }
    static SelectionMethod adjr2() { return SelectionMethod(MethodKind::AdjR2, std::nullopt); }
    static SelectionMethod ttest(double test_size);

    /// Parses "aic", "bic", "cp", "adjr2" or "ttest" (any case). `test_size`
    /// is required for "ttest" and rejected otherwise.
    static SelectionMethod parse(std::string_view name, std::optional<double> test_size = std::nullopt);

    MethodKind kind() const noexcept { return kind_; }
    std::optional<double> test_size() const noexcept { return test_size_; }
    std::string_view name() const noexcept;

    /// Penalty multiplier f(n) of the AIC-like criterion: 1 for AIC, ln(n)/2 for BIC.
    double aic_penalty(int n) const;

  private:
    SelectionMethod(MethodKind kind, std::optional<double> test_size) : kind_(kind), test_size_(test_size) {}

    MethodKind kind_;
    std::optional<double> test_size_;
};

/// The quantities the finite-sample coverage depends on besides gamma.
struct BoundProblem
{
    double alpha = 0.05;
    int p = 10;
    int n = 30;
    double rho = 0.0;

    int m() const noexcept { return n - p; }

    static BoundProblem with_residual_dof(double alpha, int p, int m, double rho)
    {
        return BoundProblem{alpha, p, p + m, rho};
    }
};

/// Throws InvalidArgument unless 0 < alpha < 1, n > p >= 2 and |rho| <= 1.
void validate(const BoundProblem& problem);

/// Threshold d of the two-model rule: beta_p is retained iff |T| >= d.
double threshold_d(const SelectionMethod& method, int n, int p);

/// Large-sample threshold d'; empty for the consistent (BIC) and t-test rules.
std::optional<double> asymptotic_d(const SelectionMethod& method);

} // namespace covbound
