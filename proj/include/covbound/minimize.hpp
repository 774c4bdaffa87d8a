#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "covbound/rules.hpp"
#include "covbound/types.hpp"

namespace covbound
{

struct SearchConfig
{
    double gamma_max = 30.0;
    double step = 0.1;
    double width = 1e-6;
};

/// Minimum of a coverage function over gamma >= 0.
struct BoundResult
{
    double bound = 0.0;
    /// Infinite when the gamma -> infinity limit undercuts every probe.
    double gamma_star = 0.0;
    int evaluations = 0;
    std::pair<double, double> bracket{0.0, 0.0};
    /// Largest quadrature error reported by any probe (0 when not tracked).
    double quad_err = 0.0;
};

/// Wraps an exception thrown by the objective together with the gamma at which it failed.
class ObjectiveError : public std::runtime_error
{
  public:
    ObjectiveError(double gamma, const std::string& what)
        : std::runtime_error("objective failed at gamma = " + std::to_string(gamma) + ": " + what), gamma_(gamma)
    {
    }

    double gamma() const noexcept { return gamma_; }

  private:
    double gamma_;
};

/// Scans [0, gamma_max] with the configured step, refines the best grid
/// point by golden-section search on its two neighbouring cells, and returns
/// the smallest value probed or `limit_value` (the gamma -> infinity value)
/// if that is smaller. Unimodality is not assumed beyond the refined cell.
BoundResult minimize_over_gamma(const std::function<double(double)>& objective, double limit_value,
                                const SearchConfig& config = {});

/// Finite-sample bound: minimum over gamma >= 0 of the coverage probability.
BoundResult finite_sample_bound(const BoundProblem& problem, const SelectionMethod& method,
                                const SearchConfig& config = {}, const Tolerance& tol = {});

} // namespace covbound
