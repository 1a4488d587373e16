#pragma once

// Kolmogorov phase-screen channel acting on the {+l0, -l0} OAM qubit.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "oamturb/errors.hpp"
#include "oamturb/lgmath.hpp"
#include "oamturb/quadrature.hpp"

namespace oamturb {

inline constexpr double kKolmogorovCoeff = 6.88;
inline constexpr double kKolmogorovExponent = 5.0 / 3.0;
inline constexpr double kDefaultChannelTol = 1e-9;
inline constexpr double kCrosstalkClamp = 1e-10;

/// Fried parameter (0.423 Cn2 k^2 L)^(-3/5).
inline double fried_parameter(double cn2, double k, double path_length) {
    if (!(cn2 > 0.0) || !(k > 0.0) || !(path_length > 0.0))
        throw std::invalid_argument("fried_parameter: Cn2, k and L must all be positive");
    return std::pow(0.423 * cn2 * k * k * path_length, -3.0 / 5.0);
}

/// Turbulence strength. An infinite Fried parameter is the turbulence-free channel (x = 0).
struct TurbulenceParams {
    double fried_r0 = std::numeric_limits<double>::infinity();

    static TurbulenceParams from_r0(double r0) {
        if (!(r0 > 0.0)) throw std::invalid_argument("Fried parameter r0 must be positive");
        return {r0};
    }
    static TurbulenceParams from_physical(double cn2, double k, double path_length) {
        return {fried_parameter(cn2, k, path_length)};
    }
    static TurbulenceParams none() { return {}; }

    bool turbulence_free() const noexcept { return std::isinf(fried_r0); }
};

/// Phase structure function D(s) = 6.88 (s/r0)^(5/3).
inline double phase_structure(double separation, const TurbulenceParams& turb) {
    if (separation <= 0.0 || turb.turbulence_free()) return 0.0;
    return kKolmogorovCoeff * std::pow(separation / turb.fried_r0, kKolmogorovExponent);
}

/// x = xi(l0) / r0.
inline double x_ratio(const BeamParams& beam, const TurbulenceParams& turb) {
    if (turb.turbulence_free()) return 0.0;
    return phase_correlation_length(beam) / turb.fried_r0;
}

/// Inverse of x_ratio. x = 0 maps to the turbulence-free channel.
inline TurbulenceParams r0_from_x(const BeamParams& beam, double x) {
    if (!std::isfinite(x) || x < 0.0)
        throw std::invalid_argument("turbulence strength x must be finite and non-negative");
    if (x == 0.0) return TurbulenceParams::none();
    return TurbulenceParams::from_r0(phase_correlation_length(beam) / x);
}

/// Survival amplitude a and crosstalk amplitude b of the single-photon map.
struct ChannelCoefficients {
    double a = 1.0;
    double b = 0.0;
    double err_a = 0.0;
    double err_b = 0.0;
};

namespace detail {

// Upper end of the u = 2r^2/w0^2 domain: beyond it the radial density is below 1e-20.
inline double radial_cutoff(const BeamParams& beam) {
    const int l = beam.abs_l();
    const double log_floor = std::log(1e-20);
    double u = std::max(1.0, static_cast<double>(l + 2 * beam.p0));
    while (true) {
        const double lag = laguerre(beam.p0, l, u);
        const double log_density = detail::log_radial_norm_sq(beam.p0, l) + l * std::log(u) - u +
                                   (lag != 0.0 ? 2.0 * std::log(std::abs(lag)) : 0.0);
        if (log_density < log_floor && u > l + 2.0 * beam.p0 + 1.0) return u;
        u += 1.0;
    }
}

inline std::vector<double> radial_breaks(const BeamParams& beam, double u_max) {
    const double mode = std::max(1.0, static_cast<double>(beam.abs_l() + 2 * beam.p0));
    const double width = std::sqrt(mode);
    std::vector<double> br{0.0};
    for (double t : {0.5 * mode, mode, mode + 2.0 * width, mode + 5.0 * width, mode + 10.0 * width})
        if (t > br.back() && t < u_max) br.push_back(t);
    br.push_back(u_max);
    return br;
}

// Breakpoints for the angular kernel exp(-c |sin(theta/2)|^(5/3)) on [0, span]: geometric
// refinement near theta = 0 where the kernel is peaked, plus enough panels to resolve
// cos(2 l0 theta).
inline std::vector<double> angular_breaks(double c, int oscillation, double span) {
    std::vector<double> br{0.0};
    if (c > 1.0) {
        // theta at which c * sin(theta/2)^(5/3) = level
        for (double level : {0.25, 1.0, 4.0, 16.0, 64.0}) {
            const double s = std::pow(level / c, 0.6);
            if (s >= 1.0) break;
            const double t = 2.0 * std::asin(s);
            if (t > br.back() && t < span) br.push_back(t);
        }
    }
    std::vector<double> uniform;
    const int n = std::max(1, oscillation);
    for (int i = 1; i < n; ++i) uniform.push_back(span * i / n);
    std::vector<double> merged;
    std::merge(br.begin(), br.end(), uniform.begin(), uniform.end(), std::back_inserter(merged));
    merged.push_back(span);
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    return merged;
}

// c(u) such that D(2 r sin(theta/2))/2 = c(u) |sin(theta/2)|^(5/3) with r = w0 sqrt(u/2).
inline double kernel_strength(double u, const BeamParams& beam, const TurbulenceParams& turb) {
    const double r = beam.waist * std::sqrt(0.5 * u);
    return 0.5 * phase_structure(2.0 * r, turb);
}

struct RawIntegrals {
    double re_a, re_b;
    double err_a, err_b;
};

// (1/2pi) int dr r R^2 int dtheta K(theta) * {1, cos(m theta)} via the half-range reduction.
inline RawIntegrals channel_integrals(const BeamParams& beam, const TurbulenceParams& turb, int m,
                                      double tol) {
    const double u_max = radial_cutoff(beam);
    const auto rbreaks = radial_breaks(beam, u_max);
    const double inner_tol = tol / 10.0;
    double inner_err = 0.0;

    auto radial = [&](double u) -> quad::Vec<2> {
        const double density = radial_density_u(u, beam);
        if (density == 0.0) return {0.0, 0.0};
        const double c = kernel_strength(u, beam, turb);
        auto angular = [&](double theta) -> quad::Vec<2> {
            const double k = std::exp(-c * std::pow(std::sin(0.5 * theta), kKolmogorovExponent));
            return {k, k * std::cos(m * theta)};
        };
        const auto abr = angular_breaks(c, std::abs(m), std::numbers::pi);
        const auto in = quad::integrate<2>(angular, std::span<const double>(abr), inner_tol);
        inner_err = std::max(inner_err, in.error / std::numbers::pi);
        return {density * in.value[0] / std::numbers::pi, density * in.value[1] / std::numbers::pi};
    };
    const auto out = quad::integrate<2>(radial, std::span<const double>(rbreaks), tol);
    return {out.value[0], out.value[1], out.error + inner_err, out.error + inner_err};
}

}  // namespace detail

/// Survival and crosstalk coefficients; tol is the target absolute quadrature error.
inline ChannelCoefficients channel_ab(const BeamParams& beam, const TurbulenceParams& turb,
                                      double tol = kDefaultChannelTol) {
    beam.validate();
    if (!(tol > 0.0)) throw std::invalid_argument("channel_ab: tolerance must be positive");
    if (turb.turbulence_free()) return {1.0, 0.0, 0.0, 0.0};
    if (!(turb.fried_r0 > 0.0)) throw std::invalid_argument("channel_ab: r0 must be positive");

    const auto raw = detail::channel_integrals(beam, turb, 2 * beam.abs_l(), tol);
    ChannelCoefficients cc{raw.re_a, raw.re_b, raw.err_a, raw.err_b};
    if (cc.b < 0.0) {
        if (cc.b > -kCrosstalkClamp)
            cc.b = 0.0;
        else
            throw ConvergenceFailure("channel_ab: crosstalk amplitude negative beyond tolerance (b=" +
                                     std::to_string(cc.b) + ")");
    }
    return cc;
}

/// General map element Lambda_{l_out, lp_out}^{l_in, lp_in} with indices in {+l0, -l0}.
/// The angular integral runs over the full [0, 2pi] so the imaginary part is computed, not assumed.
inline std::complex<double> lambda_element(int l_in, int lp_in, int l_out, int lp_out,
                                           const BeamParams& beam, const TurbulenceParams& turb,
                                           double tol = kDefaultChannelTol) {
    beam.validate();
    const int l0 = beam.abs_l();
    for (int idx : {l_in, lp_in, l_out, lp_out})
        if (std::abs(idx) != l0) throw std::invalid_argument("lambda_element: indices must be +-l0");
    if (l_in - lp_in != l_out - lp_out) return {0.0, 0.0};

    // Phase exp(-i theta [l_out + lp_out - (l_in + lp_in)] / 2); the bracket is even.
    const int m = (l_out + lp_out - l_in - lp_in) / 2;
    if (turb.turbulence_free()) return {m == 0 ? 1.0 : 0.0, 0.0};

    const double two_pi = 2.0 * std::numbers::pi;
    const double u_max = detail::radial_cutoff(beam);
    const auto rbreaks = detail::radial_breaks(beam, u_max);
    auto radial = [&](double u) -> quad::Vec<2> {
        const double density = radial_density_u(u, beam);
        if (density == 0.0) return {0.0, 0.0};
        const double c = detail::kernel_strength(u, beam, turb);
        auto angular = [&](double theta) -> quad::Vec<2> {
            const double k =
                std::exp(-c * std::pow(std::abs(std::sin(0.5 * theta)), kKolmogorovExponent));
            return {k * std::cos(m * theta), -k * std::sin(m * theta)};
        };
        // Kernel peaks at both ends of [0, 2pi]; mirror the half-range breakpoints.
        auto half = detail::angular_breaks(c, std::abs(m), std::numbers::pi);
        std::vector<double> abr(half);
        for (auto it = half.rbegin() + 1; it != half.rend(); ++it) abr.push_back(two_pi - *it);
        const auto in = quad::integrate<2>(angular, std::span<const double>(abr), tol / 10.0);
        return {density * in.value[0] / two_pi, density * in.value[1] / two_pi};
    };
    const auto out = quad::integrate<2>(radial, std::span<const double>(rbreaks), tol);
    return {out.value[0], out.value[1]};
}

}  // namespace oamturb
