#pragma once

// Sweeps over turbulence strength x = xi(l0)/r0, threshold detection, and least-squares fits
// of the universal decay forms.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "oamturb/measures.hpp"
#include "oamturb/qstate.hpp"
#include "oamturb/turbulence.hpp"

namespace oamturb {

struct SweepRow {
    double x = 0.0;
    double a = 1.0;
    double b = 0.0;
    double concurrence = 0.0;
    double coherence = 0.0;
    double lqu = 0.0;
    int lqu_branch = 1;
};

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t count) {
    if (count < 2 || !(hi > lo)) throw std::invalid_argument("uniform_grid: need count >= 2 and hi > lo");
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return g;
}

/// 61 points on [0, 3], spacing 0.05.
inline std::vector<double> default_x_grid() { return uniform_grid(0.0, 3.0, 61); }

/// One sweep point: channel at strength x applied to the Werner-like input.
inline SweepRow evaluate_point(const BeamParams& beam, const WernerParams& w, double x, double tol) {
    const auto cc = channel_ab(beam, r0_from_x(beam, x), tol);
    const auto m = evaluate_measures(apply_channel(werner_like(w), cc));
    return {x, cc.a, cc.b, m.concurrence, m.coherence_rel_ent, m.lqu, m.lqu_branch};
}

/// Evaluates every grid point, possibly in parallel; rows come back in grid order.
/// `threads == 0` uses the hardware concurrency.
inline std::vector<SweepRow> sweep(const BeamParams& beam, const WernerParams& w,
                                   std::span<const double> x_grid, double tol = kDefaultChannelTol,
                                   unsigned threads = 0) {
    beam.validate();
    w.validate();
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        if (!(x_grid[i] >= 0.0) || !std::isfinite(x_grid[i]))
            throw std::invalid_argument("sweep: grid values must be finite and non-negative");
        if (i > 0 && x_grid[i] < x_grid[i - 1]) throw std::invalid_argument("sweep: grid must be sorted");
    }

    std::vector<SweepRow> rows(x_grid.size());
    std::vector<std::exception_ptr> errors(x_grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < x_grid.size(); i = next++) {
            try {
                rows[i] = evaluate_point(beam, w, x_grid[i], tol);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, x_grid.size())));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    // Report the failure at the smallest x regardless of scheduling.
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const ConvergenceFailure& e) {
            throw SweepFailure(x_grid[i], e.what());
        }
    }
    return rows;
}

// --- entanglement sudden death ---------------------------------------------------------------

struct EsdResult {
    std::optional<double> x;  ///< death point, if any
    std::string reason;       ///< "zero at origin" or "no death in range" when x is empty
};

/// Smallest x* in (0, x_max] beyond which the concurrence stays zero on the sampling grid,
/// refined as a root of the analytic concurrence.
inline EsdResult find_esd(const BeamParams& beam, const WernerParams& w, double tol = kDefaultChannelTol,
                          double x_max = 3.0, std::size_t samples = 61, double x_tol = 1e-9) {
    beam.validate();
    w.validate();
    auto signed_c = [&](double x) {
        return concurrence_analytic_signed(w, channel_ab(beam, r0_from_x(beam, x), tol));
    };
    if (signed_c(0.0) <= 0.0) return {std::nullopt, "zero at origin"};

    const auto grid = uniform_grid(0.0, x_max, samples);
    std::vector<double> values(grid.size());
    values[0] = signed_c(0.0);
    for (std::size_t i = 1; i < grid.size(); ++i) values[i] = signed_c(grid[i]);
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (values[i] > 0.0) last_positive = i;
    if (last_positive + 1 == grid.size()) return {std::nullopt, "no death in range"};

    double lo = grid[last_positive];
    double hi = grid[last_positive + 1];
    if (values[last_positive + 1] == 0.0) return {hi, ""};

    auto stop = [x_tol](double l, double h) { return std::abs(h - l) <= x_tol; };
    std::uintmax_t max_iter = 200;
    const auto bracket = boost::math::tools::toms748_solve(signed_c, lo, hi, values[last_positive],
                                                           values[last_positive + 1], stop, max_iter);
    return {0.5 * (bracket.first + bracket.second), ""};
}

// --- sudden change of the LQU branch ----------------------------------------------------------

struct SuddenChange {
    double x = 0.0;       ///< estimated switching point (bracket midpoint)
    double x_lo = 0.0;    ///< last x on the old branch
    double x_hi = 0.0;    ///< first x on the new branch
    int branch_before = 0;
    int branch_after = 0;
    double lqu_lo = 0.0;
    double lqu_hi = 0.0;
};

/// Inputs needed to re-evaluate the LQU while refining a detected change.
struct SweepContext {
    BeamParams beam;
    WernerParams werner;
    double tol = kDefaultChannelTol;
};

/// First change of the optimal-observable branch between consecutive rows (grid resolution).
inline std::optional<SuddenChange> detect_sudden_change(std::span<const SweepRow> rows) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].lqu_branch == rows[i - 1].lqu_branch) continue;
        SuddenChange sc;
        sc.x_lo = rows[i - 1].x;
        sc.x_hi = rows[i].x;
        sc.x = 0.5 * (sc.x_lo + sc.x_hi);
        sc.branch_before = rows[i - 1].lqu_branch;
        sc.branch_after = rows[i].lqu_branch;
        sc.lqu_lo = rows[i - 1].lqu;
        sc.lqu_hi = rows[i].lqu;
        return sc;
    }
    return std::nullopt;
}

/// As above, then bisects on the branch index until the bracket is narrower than x_tol.
inline std::optional<SuddenChange> detect_sudden_change(std::span<const SweepRow> rows,
                                                        const SweepContext& ctx, double x_tol = 1e-4) {
    auto sc = detect_sudden_change(rows);
    if (!sc) return sc;
    while (sc->x_hi - sc->x_lo > x_tol) {
        const double mid = 0.5 * (sc->x_lo + sc->x_hi);
        const auto row = evaluate_point(ctx.beam, ctx.werner, mid, ctx.tol);
        if (row.lqu_branch == sc->branch_before) {
            sc->x_lo = mid;
            sc->lqu_lo = row.lqu;
        } else {
            sc->x_hi = mid;
            sc->lqu_hi = row.lqu;
            sc->branch_after = row.lqu_branch;
        }
    }
    sc->x = 0.5 * (sc->x_lo + sc->x_hi);
    return sc;
}

// --- universal decay forms ---------------------------------------------------------------------

enum class FitForm { poly, exp };

/// poly: A / (x^p + B) + C          params {A, p, B, C}
/// exp:  G * (exp(-alpha x^beta) + c)  params {G, alpha, beta, c}
using FitParams = std::array<double, 4>;

inline constexpr FitParams kPublishedPolyParams{0.183, 3.78, 0.21, 0.131};
inline constexpr FitParams kPublishedExpParams{0.92, 3.50, 1.90, 0.08};

inline const char* form_name(FitForm f) { return f == FitForm::poly ? "poly" : "exp"; }

inline std::array<const char*, 4> param_names(FitForm f) {
    if (f == FitForm::poly) return {"A", "p", "B", "C"};
    return {"G", "alpha", "beta", "c"};
}

inline double decay_model(FitForm form, const FitParams& q, double x) {
    if (form == FitForm::poly) return q[0] / (std::pow(x, q[1]) + q[2]) + q[3];
    return q[0] * (std::exp(-q[1] * std::pow(x, q[2])) + q[3]);
}

/// Analytic partial derivatives of decay_model with respect to the four parameters.
inline FitParams decay_model_gradient(FitForm form, const FitParams& q, double x) {
    const double xp = std::pow(x, form == FitForm::poly ? q[1] : q[2]);
    const double lx = x > 0.0 ? std::log(x) : 0.0;  // x^p ln x -> 0 as x -> 0
    if (form == FitForm::poly) {
        const double den = xp + q[2];
        return {1.0 / den, -q[0] * xp * lx / (den * den), -q[0] / (den * den), 1.0};
    }
    const double e = std::exp(-q[1] * xp);
    return {e + q[3], -q[0] * xp * e, -q[0] * q[1] * xp * lx * e, q[0]};
}

struct FitResult {
    FitForm form = FitForm::poly;
    FitParams params{};
    double rss = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
    double gradient_norm = std::numeric_limits<double>::infinity();
    std::vector<double> rss_history;  ///< rss after each accepted step, starting at the initial guess
};

struct FitOptions {
    int max_iterations = 500;
    double step_tol = 1e-10;
    double gradient_tol = 1e-12;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) on unweighted squared residuals.
inline FitResult fit_decay(FitForm form, std::span<const double> xs, std::span<const double> ys,
                           const FitParams& initial, const FitOptions& opt = {}) {
    if (xs.size() != ys.size()) throw std::invalid_argument("fit: x and y lengths differ");
    if (xs.size() < 8) throw std::invalid_argument("fit: need at least 8 data points");
    const auto n = static_cast<Eigen::Index>(xs.size());

    auto residuals = [&](const FitParams& q) {
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i) r(i) = ys[i] - decay_model(form, q, xs[i]);
        return r;
    };
    auto jacobian = [&](const FitParams& q) {
        Eigen::Matrix<double, Eigen::Dynamic, 4> j(n, 4);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto g = decay_model_gradient(form, q, xs[i]);
            for (int k = 0; k < 4; ++k) j(i, k) = g[k];
        }
        return j;
    };

    FitResult res;
    res.form = form;
    res.params = initial;
    Eigen::VectorXd r = residuals(initial);
    res.rss = r.squaredNorm();
    if (!std::isfinite(res.rss)) throw std::invalid_argument("fit: model not finite at initial guess");
    res.rss_history.push_back(res.rss);

    double mu = 1e-3;
    for (res.iterations = 1; res.iterations <= opt.max_iterations; ++res.iterations) {
        const auto j = jacobian(res.params);
        const Eigen::Vector4d g = j.transpose() * r;
        const Eigen::Matrix4d jtj = j.transpose() * j;
        res.gradient_norm = g.norm();
        if (res.gradient_norm < opt.gradient_tol) {
            res.converged = true;
            break;
        }
        const double diag_floor = 1e-12 * std::max(1.0, jtj.diagonal().maxCoeff());

        bool accepted = false;
        double step_norm = 0.0;
        while (mu < 1e20) {
            Eigen::Matrix4d lhs = jtj;
            for (int k = 0; k < 4; ++k) lhs(k, k) += mu * std::max(jtj(k, k), diag_floor);
            const Eigen::Vector4d delta = lhs.ldlt().solve(g);
            step_norm = delta.norm();
            FitParams trial = res.params;
            for (int k = 0; k < 4; ++k) trial[k] += delta(k);
            const Eigen::VectorXd rt = residuals(trial);
            const double rss_trial = rt.squaredNorm();
            if (std::isfinite(rss_trial) && rss_trial < res.rss) {
                res.params = trial;
                res.rss = rss_trial;
                r = rt;
                res.rss_history.push_back(rss_trial);
                mu = std::max(mu / 3.0, 1e-15);
                accepted = true;
                break;
            }
            mu *= 4.0;
            if (step_norm < opt.step_tol) break;
        }

        double pnorm = 0.0;
        for (double v : res.params) pnorm += v * v;
        if (step_norm < opt.step_tol * (1.0 + std::sqrt(pnorm)) || !accepted) {
            res.converged = step_norm < opt.step_tol * (1.0 + std::sqrt(pnorm));
            if (accepted) res.gradient_norm = (jacobian(res.params).transpose() * r).norm();
            break;
        }
    }
    if (res.iterations > opt.max_iterations) res.iterations = opt.max_iterations;
    return res;
}

namespace detail {

template <class Pick>
FitResult fit_rows(FitForm form, std::span<const SweepRow> rows, const FitParams& initial, Pick pick,
                   const FitOptions& opt) {
    std::vector<double> xs, ys;
    xs.reserve(rows.size());
    ys.reserve(rows.size());
    for (const auto& r : rows) {
        xs.push_back(r.x);
        ys.push_back(pick(r));
    }
    return fit_decay(form, xs, ys, initial, opt);
}

}  // namespace detail

/// Fits the coherence column to A/(x^p + B) + C.
inline FitResult fit_poly_form(std::span<const SweepRow> rows, const FitParams& initial = kPublishedPolyParams,
                               const FitOptions& opt = {}) {
    return detail::fit_rows(FitForm::poly, rows, initial, [](const SweepRow& r) { return r.coherence; }, opt);
}

/// Fits the LQU column to G (exp(-alpha x^beta) + c).
inline FitResult fit_exp_form(std::span<const SweepRow> rows, const FitParams& initial = kPublishedExpParams,
                              const FitOptions& opt = {}) {
    return detail::fit_rows(FitForm::exp, rows, initial, [](const SweepRow& r) { return r.lqu; }, opt);
}

// --- collapse onto a common curve --------------------------------------------------------------

enum class Column { concurrence, coherence, lqu };

inline double column_value(const SweepRow& r, Column c) {
    switch (c) {
        case Column::concurrence: return r.concurrence;
        case Column::coherence: return r.coherence;
        case Column::lqu: return r.lqu;
    }
    return 0.0;
}

/// Largest pointwise gap between any two curves sampled on the same grid.
inline double collapse_check(std::span<const std::vector<SweepRow>> curves, Column column) {
    double worst = 0.0;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        if (curves[i].size() != curves[0].size()) throw std::invalid_argument("collapse_check: grid mismatch");
        for (std::size_t k = 0; k < curves[i].size(); ++k)
            if (std::abs(curves[i][k].x - curves[0][k].x) > 1e-12)
                throw std::invalid_argument("collapse_check: grid mismatch");
    }
    for (std::size_t i = 0; i < curves.size(); ++i)
        for (std::size_t j = i + 1; j < curves.size(); ++j)
            for (std::size_t k = 0; k < curves[i].size(); ++k)
                worst = std::max(worst, std::abs(column_value(curves[i][k], column) -
                                                 column_value(curves[j][k], column)));
    return worst;
}

}  // namespace oamturb
