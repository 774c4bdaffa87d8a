#include "covbound/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "covbound/asymptotic.hpp"
#include "covbound/bound.hpp"
#include "covbound/mcsim.hpp"
#include "covbound/minimize.hpp"
#include "covbound/parallel.hpp"
#include "covbound/rng.hpp"
#include "covbound/rules.hpp"
#include "covbound/types.hpp"

namespace covbound::cli
{

namespace
{

using Cell = std::variant<std::string, double, std::int64_t, bool>;

struct Table
{
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

class IoFailure : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class VerifyFailure : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

std::string cell_text(const Cell& c)
{
    if (const auto* s = std::get_if<std::string>(&c))
        return *s;
    if (const auto* d = std::get_if<double>(&c))
        return format_number(*d);
    if (const auto* i = std::get_if<std::int64_t>(&c))
        return std::to_string(*i);
    return std::get<bool>(c) ? "true" : "false";
}

nlohmann::ordered_json cell_json(const Cell& c)
{
    if (const auto* s = std::get_if<std::string>(&c))
        return *s;
    if (const auto* d = std::get_if<double>(&c))
    {
        if (std::isfinite(*d))
            return *d;
        return format_number(*d);
    }
    if (const auto* i = std::get_if<std::int64_t>(&c))
        return *i;
    return std::get<bool>(c);
}

void write_csv(const Table& table, std::ostream& os)
{
    for (std::size_t j = 0; j < table.columns.size(); ++j)
        os << (j ? "," : "") << table.columns[j];
    os << '\n';
    for (const auto& row : table.rows)
    {
        for (std::size_t j = 0; j < row.size(); ++j)
            os << (j ? "," : "") << cell_text(row[j]);
        os << '\n';
    }
}

nlohmann::ordered_json row_json(const Table& table, const std::vector<Cell>& row)
{
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t j = 0; j < row.size(); ++j)
        obj[table.columns[j]] = cell_json(row[j]);
    return obj;
}

nlohmann::ordered_json table_json(const Table& table)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : table.rows)
        arr.push_back(row_json(table, row));
    return arr;
}

// Writes the finished text to `path`, or to `out` when no path was given.
void emit(const std::string& text, const std::string& path, std::ostream& out)
{
    if (path.empty())
    {
        out << text;
        out.flush();
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file)
        throw IoFailure("cannot open output file '" + path + "'");
    file << text;
    file.close();
    if (!file)
        throw IoFailure("failed writing output file '" + path + "'");
}

std::string m_text(std::optional<int> m)
{
    return m ? std::to_string(*m) : "inf";
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;)
    {
        const std::size_t pos = s.find(sep, start);
        parts.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return parts;
}

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

double parse_real(std::string_view text)
{
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw InvalidArgument("not a number: '" + t + "'");
    return v;
}

struct Options
{
    std::string method = "cp";
    double alpha = 0.05;
    int p = 10;
    std::string m;
    std::optional<double> rho;
    std::string rho_list;
    std::string rho_grid;
    std::string gamma;
    std::optional<double> test_size;
    std::int64_t reps = -1;
    std::uint64_t seed = 1;
    std::string out;
    std::string format;
    std::string design;
};

SelectionMethod method_of(const Options& o)
{
    std::string lower = o.method;
    for (char& c : lower)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "ttest")
        return SelectionMethod::parse(lower, o.test_size.value_or(o.alpha));
    return SelectionMethod::parse(lower, o.test_size);
}

void check_common(const Options& o)
{
    if (!(o.alpha > 0.0 && o.alpha < 1.0))
        throw InvalidArgument("alpha must lie in (0, 1)");
    if (o.p < 2)
        throw InvalidArgument("p must be at least 2");
}

void check_rho(double rho)
{
    if (!(rho >= 0.0 && rho <= 1.0))
        throw InvalidArgument("rho must lie in [0, 1]; the bound is even in rho");
}

void check_asymptotic(const SelectionMethod& method)
{
    if (!asymptotic_d(method))
        throw NotApplicable("the large-sample (m = inf) bound does not apply to method " +
                            std::string(method.name()) + "; use a finite m");
}

struct PointResult
{
    double bound;
    Cell gamma_star;
    double quad_err;
};

Cell gamma_cell(double g)
{
    return std::isinf(g) ? Cell(std::string("inf")) : Cell(g);
}

PointResult compute_point(const SelectionMethod& method, double alpha, int p, std::optional<int> m, double rho,
                          std::optional<double> gamma)
{
    if (!m)
    {
        const double dp = *asymptotic_d(method);
        if (rho == 1.0)
            return {asymptotic_rho_one_bound(alpha, dp), std::string("closed_form"), 0.0};
        const AsymptoticProblem problem(alpha, rho, dp);
        if (gamma)
            return {asymptotic_coverage(problem, *gamma), *gamma, 0.0};
        const BoundResult r = asymptotic_bound(problem);
        return {r.bound, gamma_cell(r.gamma_star), r.quad_err};
    }
    const BoundProblem problem = BoundProblem::with_residual_dof(alpha, p, *m, rho);
    validate(problem);
    if (rho == 1.0)
        return {rho_one_bound(problem, method), std::string("closed_form"), 0.0};
    if (gamma)
    {
        const CoverageResult c = coverage_probability(problem, method, *gamma);
        return {c.value, *gamma, c.quad_err};
    }
    const BoundResult r = finite_sample_bound(problem, method);
    return {r.bound, gamma_cell(r.gamma_star), r.quad_err};
}

std::optional<double> single_gamma(const Options& o)
{
    if (o.gamma.empty())
        return std::nullopt;
    const auto values = parse_real_list(o.gamma);
    if (values.size() != 1)
        throw InvalidArgument("--gamma takes a single value here");
    if (!std::isfinite(values[0]))
        throw InvalidArgument("gamma must be finite");
    return values[0];
}

std::string render(const Table& table, const std::string& format, bool single_object)
{
    if (format == "json")
    {
        if (single_object && table.rows.size() == 1)
            return row_json(table, table.rows[0]).dump(2) + "\n";
        return table_json(table).dump(2) + "\n";
    }
    std::ostringstream os;
    write_csv(table, os);
    return os.str();
}

int cmd_bound(const Options& o, bool limit, std::ostream& out)
{
    check_common(o);
    const SelectionMethod method = method_of(o);
    std::optional<int> m;
    if (!limit)
    {
        const auto ms = parse_m_list(o.m.empty() ? "20" : o.m);
        if (ms.size() != 1)
            throw InvalidArgument("bound takes a single --m value; use curve for lists");
        m = ms[0];
    }
    if (!m)
        check_asymptotic(method);
    if (!o.rho)
        throw InvalidArgument("--rho is required");
    check_rho(*o.rho);
    const PointResult r = compute_point(method, o.alpha, o.p, m, *o.rho, single_gamma(o));

    Table table;
    table.columns = {"method", "alpha", "p", "m", "rho", "bound", "gamma_star", "quad_err"};
    table.rows.push_back({std::string(method.name()), o.alpha, std::int64_t{o.p}, m_text(m), *o.rho, r.bound,
                          r.gamma_star, r.quad_err});
    emit(render(table, o.format.empty() ? "json" : o.format, true), o.out, out);
    return kSuccess;
}

std::vector<double> rho_values(const Options& o)
{
    std::vector<double> rhos;
    if (o.rho)
        rhos = {*o.rho};
    else if (!o.rho_list.empty())
        rhos = parse_real_list(o.rho_list);
    else
        rhos = parse_grid(o.rho_grid.empty() ? "0:0.01:0.99" : o.rho_grid);
    if (rhos.empty())
        throw InvalidArgument("the rho grid is empty");
    for (double r : rhos)
        check_rho(r);
    return rhos;
}

int cmd_curve(const Options& o, std::ostream& out)
{
    check_common(o);
    const SelectionMethod method = method_of(o);
    const auto ms = parse_m_list(o.m.empty() ? "5,20,50,1000,inf" : o.m);
    for (const auto& m : ms)
        if (!m)
            check_asymptotic(method);
    const auto rhos = rho_values(o);
    const std::optional<double> gamma = single_gamma(o);

    struct Point
    {
        std::optional<int> m;
        double rho;
    };
    std::vector<Point> points;
    for (const auto& m : ms)
        for (double r : rhos)
            points.push_back({m, r});
    std::vector<std::optional<PointResult>> results(points.size());
    parallel_for(points.size(), [&](std::size_t i) {
        results[i] = compute_point(method, o.alpha, o.p, points[i].m, points[i].rho, gamma);
    });

    Table table;
    table.columns = {"method", "alpha", "p", "m", "rho", "bound", "gamma_star"};
    for (std::size_t i = 0; i < points.size(); ++i)
        table.rows.push_back({std::string(method.name()), o.alpha, std::int64_t{o.p}, m_text(points[i].m),
                              points[i].rho, results[i]->bound, results[i]->gamma_star});
    emit(render(table, o.format.empty() ? "csv" : o.format, false), o.out, out);
    return kSuccess;
}

std::uint64_t point_seed(std::uint64_t seed, std::size_t index)
{
    // Streams with the top bit set are never used for draws.
    CounterRng rng(seed, (std::uint64_t{1} << 63) | index);
    return rng();
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err)
{
    check_common(o);
    const std::int64_t reps = o.reps < 0 ? 2'000'000 : o.reps;
    if (reps < 10'000)
        throw InvalidArgument("verify needs --reps >= 10000");
    std::vector<SelectionMethod> methods;
    if (o.method.empty() || o.method == "all")
        methods = {SelectionMethod::cp(), SelectionMethod::adjr2(), SelectionMethod::aic(), SelectionMethod::bic(),
                   SelectionMethod::ttest(o.test_size.value_or(0.05))};
    else
        methods = {method_of(o)};
    std::vector<int> ms;
    for (const auto& m : parse_m_list(o.m.empty() ? "5,20" : o.m))
    {
        if (!m)
            throw InvalidArgument("verify needs finite m");
        ms.push_back(*m);
    }
    std::vector<double> rhos;
    if (o.rho)
        rhos = {*o.rho};
    else if (!o.rho_list.empty())
        rhos = parse_real_list(o.rho_list);
    else if (!o.rho_grid.empty())
        rhos = parse_grid(o.rho_grid);
    else
        rhos = {0.0, 0.5, 0.9};
    if (rhos.empty())
        throw InvalidArgument("the rho grid is empty");
    for (double r : rhos)
        if (!(std::abs(r) < 1.0))
            throw InvalidArgument("verify needs |rho| < 1");
    const std::vector<double> gammas = o.gamma.empty() ? std::vector<double>{0.0, 1.0, 3.0} : parse_real_list(o.gamma);

    struct Point
    {
        SelectionMethod method;
        int m;
        double rho;
        double gamma;
    };
    std::vector<Point> points;
    for (const auto& method : methods)
        for (int m : ms)
            for (double r : rhos)
                for (double g : gammas)
                    points.push_back({method, m, r, g});
    for (const auto& pt : points)
        validate(BoundProblem::with_residual_dof(o.alpha, o.p, pt.m, pt.rho));

    struct Outcome
    {
        double d = 0.0;
        CoverageResult quad;
        McEstimate mc;
    };
    std::vector<Outcome> outcomes(points.size());
    parallel_for(points.size(), [&](std::size_t i) {
        const Point& pt = points[i];
        const BoundProblem problem = BoundProblem::with_residual_dof(o.alpha, o.p, pt.m, pt.rho);
        outcomes[i].d = threshold_d(pt.method, problem.n, problem.p);
        outcomes[i].quad = coverage_probability(problem, pt.method, pt.gamma);
        outcomes[i].mc = monte_carlo_coverage(problem, outcomes[i].d, pt.gamma, reps, point_seed(o.seed, i));
    });

    nlohmann::ordered_json report;
    report["alpha"] = o.alpha;
    report["p"] = o.p;
    report["reps"] = reps;
    report["seed"] = o.seed;
    report["points"] = nlohmann::ordered_json::array();
    int failures = 0;
    for (std::size_t i = 0; i < points.size(); ++i)
    {
        const Point& pt = points[i];
        const Outcome& oc = outcomes[i];
        const double diff = oc.quad.value - oc.mc.estimate;
        const bool pass = std::abs(diff) <= 3.0 * oc.mc.std_err;
        nlohmann::ordered_json row;
        row["method"] = std::string(pt.method.name());
        row["m"] = pt.m;
        row["rho"] = pt.rho;
        row["gamma"] = pt.gamma;
        row["d"] = oc.d;
        row["quadrature"] = oc.quad.value;
        row["quad_err"] = oc.quad.quad_err;
        row["monte_carlo"] = oc.mc.estimate;
        row["std_err"] = oc.mc.std_err;
        row["diff"] = diff;
        row["pass"] = pass;
        report["points"].push_back(row);
        if (!pass)
        {
            ++failures;
            err << "verify: mismatch method=" << pt.method.name() << " m=" << pt.m
                << " rho=" << format_number(pt.rho) << " gamma=" << format_number(pt.gamma)
                << " quadrature=" << format_number(oc.quad.value) << " mc=" << format_number(oc.mc.estimate)
                << " se=" << format_number(oc.mc.std_err) << '\n';
        }
    }
    report["failures"] = failures;
    report["all_pass"] = failures == 0;
    emit(report.dump(2) + "\n", o.out, out);
    return failures == 0 ? kSuccess : kVerifyFailed;
}

int cmd_simulate(const Options& o, std::ostream& out)
{
    check_common(o);
    if (o.design.empty())
        throw InvalidArgument("--design is required");
    std::ifstream in(o.design);
    if (!in)
        throw InvalidArgument("cannot read design file '" + o.design + "'");
    const SimDesign design = read_design(in);
    const SelectionMethod method = method_of(o);
    const std::int64_t reps = o.reps < 0 ? 100'000 : o.reps;
    if (reps > 10'000'000)
        throw InvalidArgument("--reps is capped at 1e7");

    std::vector<Vector> grid;
    if (o.gamma.empty())
        grid.push_back(design.beta);
    else
        for (double g : parse_real_list(o.gamma))
        {
            SimDesign copy = design;
            set_gamma(copy, g);
            grid.push_back(copy.beta);
        }
    const auto rows = empirical_min_coverage(design, method, o.alpha, grid, reps, o.seed);

    Table table;
    table.columns = {"method", "alpha", "n", "p", "q"};
    for (int j = 1; j <= design.p(); ++j)
        table.columns.push_back("beta" + std::to_string(j));
    for (const char* c : {"reps", "coverage", "std_err", "seed", "coverage_last", "std_err_last"})
        table.columns.emplace_back(c);
    for (const auto& r : rows)
    {
        std::vector<Cell> row = {std::string(method.name()), o.alpha, std::int64_t{design.n()},
                                 std::int64_t{design.p()}, std::int64_t{design.q}};
        for (int j = 0; j < design.p(); ++j)
            row.emplace_back(r.beta(j));
        row.emplace_back(r.reps);
        row.emplace_back(r.coverage);
        row.emplace_back(r.std_err);
        row.emplace_back(std::to_string(o.seed));
        row.emplace_back(r.coverage_last);
        row.emplace_back(r.std_err_last);
        table.rows.push_back(std::move(row));
    }
    emit(render(table, o.format.empty() ? "csv" : o.format, false), o.out, out);
    return kSuccess;
}

} // namespace

std::string format_number(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::vector<double> parse_grid(std::string_view spec)
{
    const auto parts = split(spec, ':');
    if (parts.size() != 3)
        throw InvalidArgument("grid must be lo:step:hi");
    const double lo = parse_real(parts[0]);
    const double step = parse_real(parts[1]);
    const double hi = parse_real(parts[2]);
    if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi))
        throw InvalidArgument("grid needs finite ends and a positive step");
    std::vector<double> values;
    if (hi < lo)
        return values;
    const auto count = static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    if (count > 1'000'000)
        throw InvalidArgument("grid has too many points");
    for (std::int64_t i = 0; i < count; ++i)
    {
        // Snap to 12 decimals so 0:0.01:0.99 yields 0.07 rather than 0.07000000000000001.
        const double v = lo + static_cast<double>(i) * step;
        values.push_back(std::round(v * 1e12) / 1e12);
    }
    return values;
}

std::vector<std::optional<int>> parse_m_list(std::string_view spec)
{
    std::vector<std::optional<int>> ms;
    for (const auto& raw : split(spec, ','))
    {
        const std::string t = trim(raw);
        if (t == "inf" || t == "Inf" || t == "INF")
        {
            ms.push_back(std::nullopt);
            continue;
        }
        int m = 0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), m);
        if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || m < 1)
            throw InvalidArgument("m must be a positive integer or inf, got '" + t + "'");
        ms.push_back(m);
    }
    return ms;
}

std::vector<double> parse_real_list(std::string_view spec)
{
    std::vector<double> values;
    for (const auto& raw : split(spec, ','))
        values.push_back(parse_real(raw));
    return values;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Upper bounds on the minimum coverage of naive post-selection confidence intervals"};
    app.require_subcommand(1);
    Options o;

    auto add_shared = [&o](CLI::App* sub) {
        sub->add_option("--method", o.method, "aic, bic, cp, adjr2 or ttest")->capture_default_str();
        sub->add_option("--alpha", o.alpha, "nominal 1 - alpha level")->capture_default_str();
        sub->add_option("--p", o.p, "number of regression parameters")->capture_default_str();
        sub->add_option("--test-size", o.test_size, "size of each preliminary t-test (ttest only)");
        sub->add_option("--out", o.out, "output file (default: standard output)");
        sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    };
    auto add_rho = [&o](CLI::App* sub) {
        auto* single = sub->add_option("--rho", o.rho, "correlation rho in [0, 1]");
        auto* list = sub->add_option("--rho-list", o.rho_list, "comma-separated rho values");
        auto* grid = sub->add_option("--rho-grid", o.rho_grid, "rho grid lo:step:hi");
        single->excludes(list)->excludes(grid);
        list->excludes(grid);
    };

    CLI::App* bound = app.add_subcommand("bound", "bound at a single (m, rho)");
    add_shared(bound);
    bound->add_option("--m", o.m, "residual degrees of freedom n - p, or inf");
    bound->add_option("--rho", o.rho, "correlation rho in [0, 1]");
    bound->add_option("--gamma", o.gamma, "evaluate the coverage at this gamma instead of minimizing");

    CLI::App* limit = app.add_subcommand("limit", "large-sample (m = inf) bound at a single rho");
    add_shared(limit);
    limit->add_option("--rho", o.rho, "correlation rho in [0, 1]");
    limit->add_option("--gamma", o.gamma, "evaluate the coverage at this gamma instead of minimizing");

    CLI::App* curve = app.add_subcommand("curve", "bound against rho for one or more m");
    add_shared(curve);
    curve->add_option("--m", o.m, "comma-separated m values, inf allowed");
    add_rho(curve);
    curve->add_option("--gamma", o.gamma, "evaluate the coverage at this gamma instead of minimizing");

    CLI::App* verify = app.add_subcommand("verify", "cross-check quadrature against Monte Carlo");
    add_shared(verify);
    verify->get_option("--method")->default_str("all");
    verify->add_option("--m", o.m, "comma-separated finite m values");
    add_rho(verify);
    verify->add_option("--gamma", o.gamma, "comma-separated gamma values");
    verify->add_option("--reps", o.reps, "Monte Carlo draws per point");
    verify->add_option("--seed", o.seed, "random seed");

    CLI::App* simulate = app.add_subcommand("simulate", "simulate naive-interval coverage for a design");
    add_shared(simulate);
    simulate->add_option("--design", o.design, "design file: n p q, X rows, a, beta, sigma");
    simulate->add_option("--gamma", o.gamma, "comma-separated gamma values for the last coefficient");
    simulate->add_option("--reps", o.reps, "replications per grid point");
    simulate->add_option("--seed", o.seed, "random seed");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kInvalidInput;
    }

    try
    {
        if (*verify && verify->get_option("--method")->count() == 0)
            o.method.clear();
        if (*bound)
            return cmd_bound(o, false, out);
        if (*limit)
            return cmd_bound(o, true, out);
        if (*curve)
            return cmd_curve(o, out);
        if (*verify)
            return cmd_verify(o, out, err);
        return cmd_simulate(o, out);
    }
    catch (const IoFailure& e)
    {
        err << "error: " << e.what() << '\n';
        return kIoError;
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    }
}

} // namespace covbound::cli
