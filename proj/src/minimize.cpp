#include "covbound/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "covbound/bound.hpp"

namespace covbound
{

namespace
{

class Probe
{
  public:
    explicit Probe(const std::function<double(double)>& objective) : objective_(objective) {}

    double operator()(double gamma)
    {
        double value;
        try
        {
            value = objective_(gamma);
        }
        catch (const std::exception& e)
        {
            throw ObjectiveError(gamma, e.what());
        }
        ++count_;
        // Ties go to the smaller gamma.
        if (value < best_value_ || (value == best_value_ && gamma < best_gamma_))
        {
            best_value_ = value;
            best_gamma_ = gamma;
        }
        return value;
    }

    int count() const noexcept { return count_; }
    double best_value() const noexcept { return best_value_; }
    double best_gamma() const noexcept { return best_gamma_; }

  private:
    const std::function<double(double)>& objective_;
    int count_ = 0;
    double best_value_ = std::numeric_limits<double>::infinity();
    double best_gamma_ = std::numeric_limits<double>::infinity();
};

} // namespace

BoundResult minimize_over_gamma(const std::function<double(double)>& objective, double limit_value,
                                const SearchConfig& config)
{
    if (!(config.step > 0.0) || !(config.gamma_max >= 0.0) || !(config.width > 0.0))
        throw InvalidArgument("invalid gamma search configuration");

    Probe probe(objective);
    const int cells = static_cast<int>(std::floor(config.gamma_max / config.step + 1e-9));
    std::vector<double> grid(cells + 1);
    for (int i = 0; i <= cells; ++i)
        grid[i] = i * config.step;

    int best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= cells; ++i)
    {
        const double v = probe(grid[i]);
        if (v < best_value)
        {
            best_value = v;
            best = i;
        }
    }

    double lo = grid[std::max(best - 1, 0)];
    double hi = grid[std::min(best + 1, cells)];
    if (hi > lo)
    {
        const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = hi - ratio * (hi - lo);
        double x2 = lo + ratio * (hi - lo);
        double f1 = probe(x1);
        double f2 = probe(x2);
        while (hi - lo > config.width)
        {
            if (f1 <= f2)
            {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - ratio * (hi - lo);
                f1 = probe(x1);
            }
            else
            {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + ratio * (hi - lo);
                f2 = probe(x2);
            }
        }
    }

    BoundResult result;
    result.evaluations = probe.count();
    result.bracket = {lo, hi};
    if (limit_value < probe.best_value())
    {
        result.bound = limit_value;
        result.gamma_star = std::numeric_limits<double>::infinity();
    }
    else
    {
        result.bound = probe.best_value();
        result.gamma_star = probe.best_gamma();
    }
    return result;
}

BoundResult finite_sample_bound(const BoundProblem& problem, const SelectionMethod& method,
                                const SearchConfig& config, const Tolerance& tol)
{
    const CoverageEvaluator coverage(problem, method, tol);
    double worst_err = 0.0;
    const std::function<double(double)> objective = [&](double gamma) {
        const CoverageResult r = coverage(gamma);
        worst_err = std::max(worst_err, r.quad_err);
        return r.value;
    };
    BoundResult result = minimize_over_gamma(objective, coverage.limit_value(), config);
    result.quad_err = worst_err;
    return result;
}

} // namespace covbound
