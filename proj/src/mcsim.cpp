#include "covbound/mcsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <string>

#include "covbound/parallel.hpp"
#include "covbound/specialfn.hpp"
#include "covbound/types.hpp"

namespace covbound
{

namespace
{

constexpr std::int64_t kChunkReps = 4096;

double binomial_std_err(double p, std::int64_t n)
{
    return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

std::vector<int> complement_columns(int p, Subset K)
{
    std::vector<int> kept;
    for (int j = 0; j < p; ++j)
        if (!K.contains(j))
            kept.push_back(j);
    return kept;
}

Matrix select_columns(const Matrix& X, const std::vector<int>& cols)
{
    Matrix out(X.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i)
        out.col(static_cast<Eigen::Index>(i)) = X.col(cols[i]);
    return out;
}

Vector select_entries(const Vector& v, const std::vector<int>& idx)
{
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = v(idx[i]);
    return out;
}

Matrix gram_inverse(const Matrix& X)
{
    const Eigen::Index p = X.cols();
    return (X.transpose() * X).ldlt().solve(Matrix::Identity(p, p));
}

void require_full_rank(const Matrix& X, const char* what)
{
    Eigen::ColPivHouseholderQR<Matrix> qr(X);
    if (qr.rank() < X.cols())
        throw InvalidArgument(std::string(what) + " is rank deficient");
}

// Restricted fit of one subset, reusable across replications.
struct SubsetFit
{
    Subset K;
    Matrix X_kept;
    Matrix projector;
    Eigen::RowVectorXd theta_row;
    double v = 0.0;
    double t_crit = 0.0;
};

SubsetFit make_fit(const SimDesign& design, Subset K, double alpha)
{
    const std::vector<int> kept = complement_columns(design.p(), K);
    SubsetFit fit;
    fit.K = K;
    fit.X_kept = select_columns(design.X, kept);
    const Matrix inv = gram_inverse(fit.X_kept);
    fit.projector = inv * fit.X_kept.transpose();
    const Vector a_kept = select_entries(design.a, kept);
    fit.theta_row = a_kept.transpose() * fit.projector;
    fit.v = a_kept.dot(inv * a_kept);
    fit.t_crit = t_quantile(design.n() - design.p() + K.size(), alpha);
    return fit;
}

bool selection_better(Subset a, double ca, Subset b, double cb)
{
    if (ca != cb)
        return ca < cb;
    return tie_break_less(a, b);
}

// Selection shared by select_model and the simulator: `rss_of(K)` gives the
// restricted RSS, `t_stats` the full-model t statistics.
template <class RssOf>
Subset select_from(const SelectionMethod& method, int n, int p, double rss_full, std::span<const Subset> candidates,
                   RssOf&& rss_of, const Vector& t_stats, double t_test_threshold)
{
    if (candidates.empty())
        throw InvalidArgument("select_model: empty candidate family");
    if (method.kind() == MethodKind::TTest)
    {
        std::uint32_t tested = 0;
        for (Subset K : candidates)
            tested |= K.mask();
        std::uint32_t accepted = 0;
        for (int j = 0; j < p; ++j)
            if (((tested >> j) & 1u) && std::abs(t_stats(j)) < t_test_threshold)
                accepted |= 1u << j;
        return Subset(accepted);
    }
    Subset best = candidates.front();
    double best_value = selection_criterion(method, n, p, rss_full, rss_of(best), best.size());
    for (Subset K : candidates.subspan(1))
    {
        const double value = selection_criterion(method, n, p, rss_full, rss_of(K), K.size());
        if (selection_better(K, value, best, best_value))
        {
            best = K;
            best_value = value;
        }
    }
    return best;
}

double t_test_threshold(const SelectionMethod& method, int n, int p)
{
    return method.kind() == MethodKind::TTest ? threshold_d(method, n, p) : 0.0;
}

Vector full_model_t_stats(const Vector& beta_hat, double rss, const Matrix& gram_inv, int n, int p)
{
    const double s = std::sqrt(rss / (n - p));
    Vector t(p);
    for (int j = 0; j < p; ++j)
        t(j) = beta_hat(j) / (s * std::sqrt(gram_inv(j, j)));
    return t;
}

} // namespace

PivotalDraw draw_pivotal(CounterRng& rng, double gamma, double rho, int m)
{
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double q = rng.chi_square(m);
    return {rho * z2 + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * z1, gamma + z2, std::sqrt(q / m)};
}

McEstimate monte_carlo_coverage(const BoundProblem& problem, double d, double gamma, std::int64_t n_draws,
                                std::uint64_t seed)
{
    validate(problem);
    if (n_draws < 10000)
        throw InvalidArgument("monte_carlo_coverage needs at least 1e4 draws");
    if (!(d >= 0.0))
        throw InvalidArgument("threshold d must be non-negative");
    const int m = problem.m();
    const double rho = problem.rho;
    const double t_m = t_quantile(m, problem.alpha);
    const double t_m1 = t_quantile(m + 1, problem.alpha);
    const double sd = std::sqrt(std::max(0.0, 1.0 - rho * rho));

    const auto chunks = static_cast<std::size_t>((n_draws + kChunkDraws - 1) / kChunkDraws);
    std::vector<std::int64_t> hits(chunks, 0);
    parallel_for(chunks, [&](std::size_t c) {
        CounterRng rng(seed, c);
        const std::int64_t begin = static_cast<std::int64_t>(c) * kChunkDraws;
        const std::int64_t end = std::min(n_draws, begin + kChunkDraws);
        std::int64_t count = 0;
        for (std::int64_t i = begin; i < end; ++i)
        {
            const PivotalDraw s = draw_pivotal(rng, gamma, rho, m);
            bool covered;
            if (std::abs(s.h) >= d * s.w)
            {
                covered = std::abs(s.g) <= t_m * s.w;
            }
            else
            {
                const double half = t_m1 * std::sqrt((m * s.w * s.w + s.h * s.h) / (m + 1.0)) * sd;
                const double centre = rho * s.h;
                covered = centre - half <= s.g && s.g <= centre + half;
            }
            count += covered ? 1 : 0;
        }
        hits[c] = count;
    });
    std::int64_t total = 0;
    for (std::int64_t h : hits)
        total += h;
    const double p_hat = static_cast<double>(total) / static_cast<double>(n_draws);
    return {p_hat, binomial_std_err(p_hat, n_draws), n_draws};
}

McEstimate monte_carlo_coverage(const BoundProblem& problem, const SelectionMethod& method, double gamma,
                                std::int64_t n_draws, std::uint64_t seed)
{
    return monte_carlo_coverage(problem, threshold_d(method, problem.n, problem.p), gamma, n_draws, seed);
}

Subset Subset::of(std::initializer_list<int> indices)
{
    std::uint32_t mask = 0;
    for (int j : indices)
        mask |= 1u << j;
    return Subset(mask);
}

int Subset::size() const noexcept
{
    return std::popcount(mask_);
}

std::vector<int> Subset::indices() const
{
    std::vector<int> out;
    for (int j = 0; j < 32; ++j)
        if (contains(j))
            out.push_back(j);
    return out;
}

bool tie_break_less(Subset a, Subset b)
{
    if (a.size() != b.size())
        return a.size() < b.size();
    const auto ia = a.indices();
    const auto ib = b.indices();
    return std::lexicographical_compare(ia.begin(), ia.end(), ib.begin(), ib.end());
}

void validate(const SimDesign& design)
{
    const int n = design.n();
    const int p = design.p();
    if (p < 2 || p > kMaxRegressors)
        throw InvalidArgument("design must have between 2 and " + std::to_string(kMaxRegressors) + " columns");
    if (n <= p)
        throw InvalidArgument("design needs more rows than columns");
    if (design.q < 1 || design.q >= p)
        throw InvalidArgument("q must satisfy 1 <= q < p");
    if (design.a.size() != p || design.beta.size() != p)
        throw InvalidArgument("a and beta must have p entries");
    if (design.a.isZero(0.0))
        throw InvalidArgument("a must be nonzero");
    if (!(design.sigma > 0.0))
        throw InvalidArgument("sigma must be positive");
    require_full_rank(design.X, "design matrix");
}

SimDesign read_design(std::istream& in)
{
    auto next = [&in](const char* what) {
        double v;
        if (!(in >> v))
            throw InvalidArgument(std::string("design file: could not read ") + what);
        return v;
    };
    const double n_raw = next("n");
    const double p_raw = next("p");
    const double q_raw = next("q");
    if (n_raw < 1 || p_raw < 1 || p_raw > kMaxRegressors || n_raw > 1e7)
        throw InvalidArgument("design file: bad dimensions");
    SimDesign design;
    const int n = static_cast<int>(n_raw);
    const int p = static_cast<int>(p_raw);
    design.q = static_cast<int>(q_raw);
    design.X.resize(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j)
            design.X(i, j) = next("X");
    design.a.resize(p);
    for (int j = 0; j < p; ++j)
        design.a(j) = next("a");
    design.beta.resize(p);
    for (int j = 0; j < p; ++j)
        design.beta(j) = next("beta");
    design.sigma = next("sigma");
    validate(design);
    return design;
}

double design_rho(const SimDesign& design)
{
    const Matrix inv = gram_inverse(design.X);
    const int last = design.p() - 1;
    const double v11 = design.a.dot(inv * design.a);
    const double v12 = design.a.dot(inv.col(last));
    return v12 / std::sqrt(v11 * inv(last, last));
}

double design_gamma(const SimDesign& design)
{
    const Matrix inv = gram_inverse(design.X);
    const int last = design.p() - 1;
    return design.beta(last) / (design.sigma * std::sqrt(inv(last, last)));
}

void set_gamma(SimDesign& design, double gamma)
{
    const Matrix inv = gram_inverse(design.X);
    const int last = design.p() - 1;
    design.beta(last) = gamma * design.sigma * std::sqrt(inv(last, last));
}

SimDesign correlated_design(int n, int p, int q, double rho, std::uint64_t seed)
{
    if (!(std::abs(rho) <= 1.0))
        throw InvalidArgument("rho must lie in [-1, 1]");
    CounterRng rng(seed, 0);
    Matrix raw(n, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i)
            raw(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(raw);
    SimDesign design;
    design.X = qr.householderQ() * Matrix::Identity(n, p);
    design.q = q;
    design.a = Vector::Zero(p);
    design.a(0) = std::sqrt(1.0 - rho * rho);
    design.a(p - 1) = rho;
    design.beta = Vector::Zero(p);
    design.sigma = 1.0;
    validate(design);
    return design;
}

std::vector<Subset> selection_family(const SimDesign& design)
{
    const int free = design.p() - design.q;
    std::vector<Subset> family;
    family.reserve(std::size_t{1} << free);
    for (std::uint32_t bits = 0; bits < (1u << free); ++bits)
        family.emplace_back(bits << design.q);
    return family;
}

std::vector<Subset> last_only_family(const SimDesign& design)
{
    return {Subset(), Subset::of({design.p() - 1})};
}

SubsetState rss_subset(const SimDesign& design, const Vector& y, Subset K)
{
    const int n = design.n();
    const int p = design.p();
    for (int j : K.indices())
        if (j < design.q || j >= p)
            throw InvalidArgument("rss_subset: K must be a subset of the selectable coefficients");

    const std::vector<int> kept = complement_columns(p, K);
    const Matrix X_kept = select_columns(design.X, kept);
    Eigen::ColPivHouseholderQR<Matrix> qr(X_kept);
    if (qr.rank() < X_kept.cols())
        throw InvalidArgument("rss_subset: reduced design is singular");
    const Vector b_kept = qr.solve(y);

    SubsetState state;
    state.K = K;
    state.beta_hat_K = Vector::Zero(p);
    for (std::size_t i = 0; i < kept.size(); ++i)
        state.beta_hat_K(kept[i]) = b_kept(static_cast<Eigen::Index>(i));
    state.rss_K = (y - X_kept * b_kept).squaredNorm();
    state.s2_K = state.rss_K / (n - p + K.size());
    const Matrix inv_kept = gram_inverse(X_kept);
    const Vector a_kept = select_entries(design.a, kept);
    state.v_K = a_kept.dot(inv_kept * a_kept);

    // Quadratic-form route from the unrestricted fit.
    const Vector b_full = design.X.colPivHouseholderQr().solve(y);
    const double rss = (y - design.X * b_full).squaredNorm();
    double rss_identity = rss;
    if (!K.empty())
    {
        const std::vector<int> idx = K.indices();
        const Matrix inv = gram_inverse(design.X);
        Matrix block(idx.size(), idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t c = 0; c < idx.size(); ++c)
                block(r, c) = inv(idx[r], idx[c]);
        const Vector hb = select_entries(b_full, idx);
        rss_identity += hb.dot(block.ldlt().solve(hb));
    }
    state.identity_residual = std::abs(state.rss_K - rss_identity) / rss;
    return state;
}

double selection_criterion(const SelectionMethod& method, int n, int p, double rss_full, double rss_K, int k_size)
{
    switch (method.kind())
    {
    case MethodKind::AIC:
    case MethodKind::BIC:
        return n * std::log(rss_K) + 2.0 * (p - k_size) * method.aic_penalty(n);
    case MethodKind::Cp:
        return rss_K / (rss_full / (n - p)) - n + 2.0 * (p - k_size);
    case MethodKind::AdjR2:
        return rss_K / (n - p + k_size);
    case MethodKind::TTest:
        break;
    }
    throw InvalidArgument("the t-test rule has no scalar criterion");
}

Subset select_model(const SimDesign& design, const Vector& y, const SelectionMethod& method,
                    std::span<const Subset> candidates)
{
    const int n = design.n();
    const int p = design.p();
    const Vector b_full = design.X.colPivHouseholderQr().solve(y);
    const double rss_full = (y - design.X * b_full).squaredNorm();
    const Vector t_stats = full_model_t_stats(b_full, rss_full, gram_inverse(design.X), n, p);
    return select_from(
        method, n, p, rss_full, candidates, [&](Subset K) { return rss_subset(design, y, K).rss_K; }, t_stats,
        t_test_threshold(method, n, p));
}

std::pair<double, double> naive_interval(const SimDesign& design, const Vector& y, Subset K, double alpha)
{
    const SubsetState state = rss_subset(design, y, K);
    const double centre = design.a.dot(state.beta_hat_K);
    const double half =
        t_quantile(design.n() - design.p() + K.size(), alpha) * std::sqrt(state.s2_K) * std::sqrt(state.v_K);
    return {centre - half, centre + half};
}

double noncentrality(const SimDesign& design, Subset K)
{
    if (K.empty())
        return 0.0;
    const std::vector<int> idx = K.indices();
    const Matrix inv = gram_inverse(design.X);
    Matrix block(idx.size(), idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < idx.size(); ++c)
            block(r, c) = inv(idx[r], idx[c]);
    const Vector hb = select_entries(design.beta, idx) / design.sigma;
    return hb.dot(block.ldlt().solve(hb));
}

std::vector<CoverageRow> empirical_min_coverage(const SimDesign& design, const SelectionMethod& method,
                                                double alpha, const std::vector<Vector>& beta_grid,
                                                std::int64_t reps, std::uint64_t seed)
{
    validate(design);
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InvalidArgument("alpha must lie in (0, 1)");
    if (reps <= 0)
        return {};
    for (const Vector& b : beta_grid)
        if (b.size() != design.p())
            throw InvalidArgument("beta grid entries must have p components");

    const int n = design.n();
    const int p = design.p();
    const std::vector<Subset> full = selection_family(design);
    const std::vector<Subset> last = last_only_family(design);

    // Every subset of the full family, indexed by mask; the last-only family is contained in it.
    std::vector<SubsetFit> fits(std::size_t{1} << p);
    for (Subset K : full)
        fits[K.mask()] = make_fit(design, K, alpha);
    const Matrix gram_inv = gram_inverse(design.X);
    const double t_threshold = t_test_threshold(method, n, p);

    const auto chunks = static_cast<std::size_t>((reps + kChunkReps - 1) / kChunkReps);
    std::vector<CoverageRow> table;
    for (std::size_t g = 0; g < beta_grid.size(); ++g)
    {
        const Vector& beta = beta_grid[g];
        const Vector mean = design.X * beta;
        const double theta = design.a.dot(beta);
        std::vector<std::int64_t> hits_full(chunks, 0);
        std::vector<std::int64_t> hits_last(chunks, 0);
        parallel_for(chunks, [&](std::size_t c) {
            CounterRng rng(seed, (static_cast<std::uint64_t>(g) << 32) | c);
            const std::int64_t begin = static_cast<std::int64_t>(c) * kChunkReps;
            const std::int64_t end = std::min(reps, begin + kChunkReps);
            Vector y(n);
            std::vector<double> rss(fits.size(), -1.0);
            auto rss_of = [&](Subset K) {
                double& slot = rss[K.mask()];
                if (slot < 0.0)
                {
                    const SubsetFit& fit = fits[K.mask()];
                    slot = (y - fit.X_kept * (fit.projector * y)).squaredNorm();
                }
                return slot;
            };
            auto covers = [&](Subset K) {
                const SubsetFit& fit = fits[K.mask()];
                const double s = std::sqrt(rss_of(K) / (n - p + K.size()));
                return std::abs(fit.theta_row.dot(y) - theta) <= fit.t_crit * s * std::sqrt(fit.v);
            };
            std::int64_t count_full = 0;
            std::int64_t count_last = 0;
            for (std::int64_t r = begin; r < end; ++r)
            {
                for (int i = 0; i < n; ++i)
                    y(i) = mean(i) + design.sigma * rng.normal();
                std::fill(rss.begin(), rss.end(), -1.0);
                const double rss_full = rss_of(Subset());
                Vector t_stats;
                if (method.kind() == MethodKind::TTest)
                    t_stats = full_model_t_stats(fits[0].projector * y, rss_full, gram_inv, n, p);
                const Subset chosen = select_from(method, n, p, rss_full, full, rss_of, t_stats, t_threshold);
                const Subset chosen_last = select_from(method, n, p, rss_full, last, rss_of, t_stats, t_threshold);
                count_full += covers(chosen) ? 1 : 0;
                count_last += covers(chosen_last) ? 1 : 0;
            }
            hits_full[c] = count_full;
            hits_last[c] = count_last;
        });
        std::int64_t total_full = 0;
        std::int64_t total_last = 0;
        for (std::size_t c = 0; c < chunks; ++c)
        {
            total_full += hits_full[c];
            total_last += hits_last[c];
        }
        CoverageRow row;
        row.beta = beta;
        row.reps = reps;
        row.coverage = static_cast<double>(total_full) / static_cast<double>(reps);
        row.std_err = binomial_std_err(row.coverage, reps);
        row.coverage_last = static_cast<double>(total_last) / static_cast<double>(reps);
        row.std_err_last = binomial_std_err(row.coverage_last, reps);
        table.push_back(std::move(row));
    }
    return table;
}

std::vector<double> simulate_rss_increase(const SimDesign& design, Subset K, std::int64_t reps, std::uint64_t seed)
{
    validate(design);
    const SubsetFit fit_full = make_fit(design, Subset(), 0.05);
    const SubsetFit fit_K = make_fit(design, K, 0.05);
    const Vector mean = design.X * design.beta;
    const double sigma2 = design.sigma * design.sigma;
    std::vector<double> out(static_cast<std::size_t>(std::max<std::int64_t>(reps, 0)));
    const auto chunks = static_cast<std::size_t>((reps + kChunkReps - 1) / kChunkReps);
    parallel_for(chunks, [&](std::size_t c) {
        CounterRng rng(seed, c);
        const std::int64_t begin = static_cast<std::int64_t>(c) * kChunkReps;
        const std::int64_t end = std::min(reps, begin + kChunkReps);
        Vector y(design.n());
        for (std::int64_t r = begin; r < end; ++r)
        {
            for (int i = 0; i < design.n(); ++i)
                y(i) = mean(i) + design.sigma * rng.normal();
            const double rss = (y - fit_full.X_kept * (fit_full.projector * y)).squaredNorm();
            const double rss_K = (y - fit_K.X_kept * (fit_K.projector * y)).squaredNorm();
            out[static_cast<std::size_t>(r)] = (rss_K - rss) / sigma2;
        }
    });
    return out;
}

} // namespace covbound
