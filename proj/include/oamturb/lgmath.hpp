#pragma once

// Laguerre-Gaussian beam geometry at the source plane (z = 0).

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

namespace oamturb {

struct BeamParams {
    double waist = 1.0;  ///< beam waist w0, arbitrary length units
    int l0 = 1;          ///< azimuthal index; the qubit lives in {+l0, -l0}
    int p0 = 0;          ///< radial index

    int abs_l() const noexcept { return std::abs(l0); }

    void validate() const {
        if (!(waist > 0.0) || !std::isfinite(waist))
            throw std::invalid_argument("beam waist must be positive and finite");
        if (l0 == 0)
            throw std::invalid_argument("azimuthal index l0 must be nonzero");
        if (p0 < 0)
            throw std::invalid_argument("radial index p0 must be non-negative");
    }
};

/// Generalized Laguerre polynomial L_p^alpha(x) via the upward three-term recurrence.
inline double laguerre(int p, int alpha, double x) {
    if (p < 0 || alpha < 0)
        throw std::invalid_argument("laguerre: p and alpha must be non-negative");
    if (!std::isfinite(x))
        throw std::invalid_argument("laguerre: x must be finite");
    if (p == 0) return 1.0;
    const double a = alpha;
    double prev = 1.0;
    double cur = 1.0 + a - x;
    for (int k = 1; k < p; ++k) {
        const double next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

namespace detail {

// log of p!/(p+|l|)!, the squared radial normalization without the 2/w0 factor.
inline double log_radial_norm_sq(int p, int abs_l) {
    return std::lgamma(p + 1.0) - std::lgamma(p + abs_l + 1.0);
}

}  // namespace detail

/// Radial LG amplitude R_{p0,l0}(r). The Laguerre argument is 2r^2/w0^2.
inline double radial_profile(double r, const BeamParams& beam) {
    beam.validate();
    if (!(r >= 0.0)) throw std::invalid_argument("radial_profile: r must be >= 0");
    const int l = beam.abs_l();
    const double w = beam.waist;
    const double s = r * std::numbers::sqrt2 / w;
    const double u = s * s;
    if (r == 0.0) return 0.0;
    // Assemble in log space so large |l0| or p0 cannot overflow the prefactors.
    const double log_mag = std::log(2.0 / w) + 0.5 * detail::log_radial_norm_sq(beam.p0, l) +
                           l * std::log(s) - r * r / (w * w);
    return std::exp(log_mag) * laguerre(beam.p0, l, u);
}

/// Radial probability density in the variable u = 2r^2/w0^2, i.e. R(r)^2 r dr = density(u) du.
/// Integrates to one over u in [0, inf).
inline double radial_density_u(double u, const BeamParams& beam) {
    if (u <= 0.0) return 0.0;  // |l0| >= 1
    const int l = beam.abs_l();
    const double lag = laguerre(beam.p0, l, u);
    if (lag == 0.0) return 0.0;
    return std::exp(detail::log_radial_norm_sq(beam.p0, l) + l * std::log(u) - u) * lag * lag;
}

/// Mean distance between beam cross-section points whose phase differs by pi/2.
inline double phase_correlation_length(const BeamParams& beam) {
    beam.validate();
    const double l = beam.abs_l();
    const double gamma_ratio = std::exp(std::lgamma(l + 1.5) - std::lgamma(l + 1.0));
    return std::sin(std::numbers::pi / (2.0 * l)) * 0.5 * beam.waist * gamma_ratio;
}

}  // namespace oamturb
