#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature for small vector-valued integrands.
//
// The panel with the largest error estimate is bisected until the summed estimate meets the
// absolute tolerance or the panel budget is spent. Panel order and summation order are fixed,
// so identical inputs produce bit-identical results.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "oamturb/errors.hpp"

namespace oamturb::quad {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct Result {
    Vec<N> value{};
    double error = 0.0;  ///< max-norm of the summed per-panel error estimates
    std::size_t panels = 0;
    bool converged = false;
};

inline constexpr std::size_t kDefaultPanelBudget = 10000;

namespace detail {

// Kronrod abscissae on [-1, 1] (positive half, descending); odd entries are the Gauss-7 nodes.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
struct Panel {
    double lo, hi;
    Vec<N> value;
    double error;
};

// One 15-point Kronrod panel with the QUADPACK error heuristic applied per component.
template <std::size_t N, class F>
Panel<N> rule15(F& f, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    std::array<Vec<N>, 15> fv;
    fv[7] = f(center);
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        fv[j] = f(center - dx);
        fv[14 - j] = f(center + dx);
    }
    Panel<N> p{lo, hi, {}, 0.0};
    for (std::size_t c = 0; c < N; ++c) {
        double kron = kWgk[7] * fv[7][c];
        double gauss = kWg[3] * fv[7][c];
        for (std::size_t j = 0; j < 7; ++j) {
            const double pair = fv[j][c] + fv[14 - j][c];
            kron += kWgk[j] * pair;
            if (j % 2 == 1) gauss += kWg[j / 2] * pair;
        }
        const double mean = 0.5 * kron;
        double asc = kWgk[7] * std::abs(fv[7][c] - mean);
        for (std::size_t j = 0; j < 7; ++j)
            asc += kWgk[j] * (std::abs(fv[j][c] - mean) + std::abs(fv[14 - j][c] - mean));
        asc *= std::abs(half);
        double err = std::abs((kron - gauss) * half);
        if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
        p.value[c] = kron * half;
        p.error = std::max(p.error, err);
    }
    return p;
}

}  // namespace detail

/// Integrate f over the partition given by `breaks` (sorted, at least two entries).
/// Throws ConvergenceFailure when the budget runs out above tolerance, unless
/// `throw_on_failure` is false, in which case the best estimate is returned unconverged.
template <std::size_t N, class F>
Result<N> integrate(F&& f, std::span<const double> breaks, double abs_tol,
                    std::size_t max_panels = kDefaultPanelBudget, bool throw_on_failure = true) {
    std::vector<detail::Panel<N>> panels;
    panels.reserve(std::max<std::size_t>(64, breaks.size()));
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        if (breaks[i + 1] > breaks[i]) panels.push_back(detail::rule15<N>(f, breaks[i], breaks[i + 1]));

    auto total_error = [&] {
        double e = 0.0;
        for (const auto& p : panels) e += p.error;
        return e;
    };

    double err = total_error();
    while (err > abs_tol && panels.size() < max_panels) {
        auto worst = std::max_element(panels.begin(), panels.end(),
                                      [](const auto& x, const auto& y) { return x.error < y.error; });
        const double mid = 0.5 * (worst->lo + worst->hi);
        if (!(mid > worst->lo && mid < worst->hi)) break;  // interval exhausted at double precision
        auto left = detail::rule15<N>(f, worst->lo, mid);
        auto right = detail::rule15<N>(f, mid, worst->hi);
        *worst = left;
        panels.insert(worst + 1, right);
        err = total_error();
    }

    Result<N> out;
    for (const auto& p : panels)
        for (std::size_t c = 0; c < N; ++c) out.value[c] += p.value[c];
    out.error = err;
    out.panels = panels.size();
    out.converged = err <= abs_tol;
    if (!out.converged && throw_on_failure)
        throw ConvergenceFailure("adaptive quadrature did not reach tolerance " + std::to_string(abs_tol) +
                                 " within " + std::to_string(max_panels) + " panels (estimate " +
                                 std::to_string(err) + ")");
    return out;
}

template <std::size_t N, class F>
Result<N> integrate(F&& f, double lo, double hi, double abs_tol,
                    std::size_t max_panels = kDefaultPanelBudget, bool throw_on_failure = true) {
    const std::array<double, 2> breaks{lo, hi};
    return integrate<N>(std::forward<F>(f), std::span<const double>(breaks), abs_tol, max_panels,
                        throw_on_failure);
}

}  // namespace oamturb::quad
