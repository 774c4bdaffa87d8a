#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "covbound/rng.hpp"
#include "covbound/rules.hpp"

namespace covbound
{

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Draws per independently seeded stream. Monte Carlo results are a pure
/// function of (inputs, seed, kChunkDraws).
inline constexpr std::int64_t kChunkDraws = std::int64_t{1} << 16;

struct McEstimate
{
    double estimate = 0.0;
    double std_err = 0.0;
    std::int64_t draws = 0;
};

/// Standardized estimation errors (G, H) of theta and beta_p together with the
/// residual scale W = sqrt(Q / m).
struct PivotalDraw
{
    double g;
    double h;
    double w;
};

/// (G, H) ~ N((0, gamma), [[1, rho], [rho, 1]]), W independent.
PivotalDraw draw_pivotal(CounterRng& rng, double gamma, double rho, int m);

/// Monte Carlo estimate of the post-selection coverage from direct simulation
/// of (G, H, W): the full-model interval when |H| / W >= d, otherwise the
/// interval with beta_p set to zero. Requires n_draws >= 1e4.
McEstimate monte_carlo_coverage(const BoundProblem& problem, double d, double gamma, std::int64_t n_draws,
                                std::uint64_t seed);
McEstimate monte_carlo_coverage(const BoundProblem& problem, const SelectionMethod& method, double gamma,
                                std::int64_t n_draws, std::uint64_t seed);

/// Set of coefficient indices (0-based) restricted to zero.
class Subset
{
  public:
    Subset() = default;
    explicit Subset(std::uint32_t mask) : mask_(mask) {}
    static Subset of(std::initializer_list<int> indices);

    bool contains(int j) const noexcept { return (mask_ >> j) & 1u; }
    int size() const noexcept;
    bool empty() const noexcept { return mask_ == 0; }
    std::uint32_t mask() const noexcept { return mask_; }
    std::vector<int> indices() const;

    friend bool operator==(Subset, Subset) = default;

  private:
    std::uint32_t mask_ = 0;
};

/// Strict ordering used to break criterion ties: smaller sets first, then
/// lexicographic on the sorted indices.
bool tie_break_less(Subset a, Subset b);

inline constexpr int kMaxRegressors = 12;

/// Regression Y = X beta + eps, eps ~ N(0, sigma^2 I), with interest in a^T beta.
/// Coefficients q, ..., p - 1 (0-based) are subject to selection.
struct SimDesign
{
    Matrix X;
    Vector a;
    int q = 1;
    Vector beta;
    double sigma = 1.0;

    int n() const noexcept { return static_cast<int>(X.rows()); }
    int p() const noexcept { return static_cast<int>(X.cols()); }
};

/// Throws InvalidArgument for rank-deficient X, bad shapes, a = 0, q outside
/// [1, p) or p above kMaxRegressors.
void validate(const SimDesign& design);

/// Reads "n p q", the n x p rows of X, a, beta and sigma as whitespace-separated numbers.
SimDesign read_design(std::istream& in);

/// Corr(theta_hat, beta_hat_p) and gamma = beta_p / (sigma sqrt(v22)).
double design_rho(const SimDesign& design);
double design_gamma(const SimDesign& design);

/// Design with orthonormal columns and a chosen so that Corr(theta_hat, beta_hat_p) = rho
/// while every other selectable coefficient is uncorrelated with theta_hat; beta = 0, sigma = 1.
SimDesign correlated_design(int n, int p, int q, double rho, std::uint64_t seed);

/// beta_p set so that design_gamma() equals gamma.
void set_gamma(SimDesign& design, double gamma);

/// All subsets of {q, ..., p - 1}, and the two-member family {{}, {p - 1}}.
std::vector<Subset> selection_family(const SimDesign& design);
std::vector<Subset> last_only_family(const SimDesign& design);

struct SubsetState
{
    Subset K;
    double rss_K = 0.0;
    Vector beta_hat_K;
    double s2_K = 0.0;
    double v_K = 0.0;
    /// |direct refit - quadratic-form identity| / RSS of the full model.
    double identity_residual = 0.0;
};

/// Least-squares fit with the coefficients in K fixed at zero, by direct
/// refit on the reduced design; also cross-checked against
/// RSS_K = RSS + (H_K b)^T (H_K (X^T X)^{-1} H_K^T)^{-1} H_K b.
SubsetState rss_subset(const SimDesign& design, const Vector& y, Subset K);

/// Selected subset among `candidates` (criterion minimizers for aic/bic/cp/adjr2,
/// the set of accepted nulls for ttest).
Subset select_model(const SimDesign& design, const Vector& y, const SelectionMethod& method,
                    std::span<const Subset> candidates);

/// Selection criterion of K given the two residual sums of squares
/// (not used by the t-test rule).
double selection_criterion(const SelectionMethod& method, int n, int p, double rss_full, double rss_K, int k_size);

/// Naive 1 - alpha interval a^T beta_hat_K +- t(n - p + |K|) S_K sqrt(v(K)).
std::pair<double, double> naive_interval(const SimDesign& design, const Vector& y, Subset K, double alpha);

/// Noncentrality of (RSS_K - RSS) / sigma^2 in the convention without the
/// factor 1/2: (H_K beta / sigma)^T (H_K (X^T X)^{-1} H_K^T)^{-1} (H_K beta / sigma).
double noncentrality(const SimDesign& design, Subset K);

struct CoverageRow
{
    Vector beta;
    std::int64_t reps = 0;
    /// Selection over every subset of {q, ..., p - 1}.
    double coverage = 0.0;
    double std_err = 0.0;
    /// Selection applied to beta_p only.
    double coverage_last = 0.0;
    double std_err_last = 0.0;
};

/// Simulated coverage of the naive interval at each beta in the grid.
/// reps = 0 gives an empty table.
std::vector<CoverageRow> empirical_min_coverage(const SimDesign& design, const SelectionMethod& method,
                                                double alpha, const std::vector<Vector>& beta_grid,
                                                std::int64_t reps, std::uint64_t seed);

/// Simulated (RSS_K - RSS) / sigma^2 values for the design's beta.
std::vector<double> simulate_rss_increase(const SimDesign& design, Subset K, std::int64_t reps, std::uint64_t seed);

} // namespace covbound
