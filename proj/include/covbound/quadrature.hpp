#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace covbound::quad
{

struct Result
{
    double value = 0.0;
    double abs_err = 0.0;
    int panels = 0;
    int evaluations = 0;
    bool converged = true;
};

struct Options
{
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    int max_panels = 400;
};

// 21-point Kronrod extension of the 10-point Gauss rule. Odd-indexed nodes
// belong to the Gauss rule.
struct GaussKronrod21
{
    static constexpr std::array<double, 11> nodes = {
        0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
        0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
        0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
        0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
        0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
        0.000000000000000000000000000000000};
    static constexpr std::array<double, 11> kronrod_weights = {
        0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
        0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
        0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
        0.123491976262065851077208656402810, 0.134709217311473325928054001771707,
        0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
        0.149445554002916905664936468389821};
    static constexpr std::array<double, 5> gauss_weights = {
        0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
        0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
        0.295524224714752870173892994651338};
};

struct Panel
{
    double a;
    double b;
    double value;
    double err;

    bool operator<(const Panel& other) const { return err < other.err; }
};

/// One Gauss-Kronrod 21 panel on [a, b]. The error estimate is the
/// QUADPACK scaling of |K21 - G10|.
template <class F>
Panel gk21_panel(F& f, double a, double b)
{
    using R = GaussKronrod21;
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f_center = f(center);
    double kronrod = f_center * R::kronrod_weights[10];
    double gauss = 0.0;
    std::array<double, 10> f_left{};
    std::array<double, 10> f_right{};
    for (int j = 0; j < 10; ++j)
    {
        const double dx = half * R::nodes[j];
        f_left[j] = f(center - dx);
        f_right[j] = f(center + dx);
        const double pair = f_left[j] + f_right[j];
        kronrod += R::kronrod_weights[j] * pair;
        if (j % 2 == 1)
            gauss += R::gauss_weights[j / 2] * pair;
    }
    const double mean = 0.5 * kronrod;
    double asc = R::kronrod_weights[10] * std::abs(f_center - mean);
    for (int j = 0; j < 10; ++j)
        asc += R::kronrod_weights[j] * (std::abs(f_left[j] - mean) + std::abs(f_right[j] - mean));
    asc *= std::abs(half);

    double err = std::abs((kronrod - gauss) * half);
    if (asc != 0.0 && err != 0.0)
        err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    const double round_floor = 50.0 * std::numeric_limits<double>::epsilon() * std::abs(kronrod * half);
    err = std::max(err, round_floor);
    return {a, b, kronrod * half, err};
}

/// Globally adaptive Gauss-Kronrod integration of f over [a, b]: the panel
/// with the largest error estimate is bisected until the summed estimate
/// meets max(abs_tol, rel_tol * |I|) or the panel budget is spent.
template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {})
{
    Result out;
    if (a == b)
        return out;
    std::priority_queue<Panel> heap;
    heap.push(gk21_panel(f, a, b));
    out.evaluations = 21;
    double value = heap.top().value;
    double err = heap.top().err;
    while (err > std::max(opt.abs_tol, opt.rel_tol * std::abs(value)))
    {
        if (static_cast<int>(heap.size()) >= opt.max_panels)
        {
            out.converged = false;
            break;
        }
        const Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Panel left = gk21_panel(f, worst.a, mid);
        const Panel right = gk21_panel(f, mid, worst.b);
        out.evaluations += 42;
        heap.push(left);
        heap.push(right);
        // Re-sum rather than update incrementally so the total does not drift.
        value = 0.0;
        err = 0.0;
        std::vector<Panel> panels;
        panels.reserve(heap.size());
        while (!heap.empty())
        {
            panels.push_back(heap.top());
            heap.pop();
        }
        std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
        for (const Panel& p : panels)
        {
            value += p.value;
            err += p.err;
            heap.push(p);
        }
    }
    out.value = value;
    out.abs_err = err;
    out.panels = static_cast<int>(heap.size());
    return out;
}

/// Composite two-point Gauss-Legendre rule on `panels` equal panels; fourth
/// order for smooth integrands.
template <class F>
double composite_gauss_legendre2(F&& f, double a, double b, int panels)
{
    const double h = (b - a) / panels;
    const double offset = 0.5 * h / std::sqrt(3.0);
    double sum = 0.0;
    for (int i = 0; i < panels; ++i)
    {
        const double c = a + (i + 0.5) * h;
        sum += f(c - offset) + f(c + offset);
    }
    return 0.5 * h * sum;
}

} // namespace covbound::quad
