#pragma once

// Two-qubit X states in the basis {|l0,l0>, |l0,-l0>, |-l0,l0>, |-l0,-l0>}.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "oamturb/errors.hpp"
#include "oamturb/turbulence.hpp"

namespace oamturb {

using cplx = std::complex<double>;
using Matrix4c = Eigen::Matrix<cplx, 4, 4>;

inline constexpr double kStateTol = 1e-12;

/// Extended Werner-like state parameters: purity gamma, Bell-like angle theta, relative phase phi.
struct WernerParams {
    double gamma = 1.0;
    double theta = std::numbers::pi / 2.0;
    double phi = 0.0;

    void validate() const {
        if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
        if (!(theta >= 0.0 && theta <= std::numbers::pi))
            throw std::invalid_argument("theta must lie in [0, pi]");
        if (!(phi >= 0.0 && phi <= 2.0 * std::numbers::pi))
            throw std::invalid_argument("phi must lie in [0, 2pi]");
    }
};

struct XState {
    std::array<double, 4> d{};  ///< populations d11..d44
    cplx c14{};
    cplx c23{};

    double trace() const { return d[0] + d[1] + d[2] + d[3]; }

    /// Throws std::invalid_argument if the entries do not describe a density matrix.
    void validate(double tol = kStateTol) const {
        for (double v : d)
            if (!std::isfinite(v) || v < -tol) throw std::invalid_argument("X state: negative population");
        if (std::abs(trace() - 1.0) > tol)
            throw std::invalid_argument("X state: trace " + std::to_string(trace()) + " != 1");
        if (std::norm(c14) > d[0] * d[3] + tol || std::norm(c23) > d[1] * d[2] + tol)
            throw std::invalid_argument("X state: coherence exceeds block positivity bound");
    }
};

inline XState werner_like(const WernerParams& w) {
    w.validate();
    const double noise = (1.0 - w.gamma) / 4.0;
    const double ch = std::cos(0.5 * w.theta);
    const double sh = std::sin(0.5 * w.theta);
    XState s;
    s.d = {noise, noise + w.gamma * ch * ch, noise + w.gamma * sh * sh, noise};
    s.c14 = 0.0;
    // The white-noise part is diagonal; only the Bell-like component feeds the coherence.
    s.c23 = 0.5 * w.gamma * std::sin(w.theta) * std::polar(1.0, -w.phi);
    return s;
}

/// Both photons pass through the same single-photon map with coefficients (a, b).
inline XState apply_channel(const XState& s, const ChannelCoefficients& cc) {
    const double a = cc.a;
    const double b = cc.b;
    const double norm = (a + b) * (a + b);
    if (!(a + b > 1e-14)) throw DegenerateChannel("apply_channel: a + b vanishes");
    const double aa = a * a, ab = a * b, bb = b * b;
    const auto& d = s.d;
    XState out;
    out.d = {(aa * d[0] + ab * d[1] + ab * d[2] + bb * d[3]) / norm,
             (ab * d[0] + aa * d[1] + bb * d[2] + ab * d[3]) / norm,
             (ab * d[0] + bb * d[1] + aa * d[2] + ab * d[3]) / norm,
             (bb * d[0] + ab * d[1] + ab * d[2] + aa * d[3]) / norm};
    out.c14 = aa * s.c14 / norm;
    out.c23 = aa * s.c23 / norm;
    if (std::abs(out.trace() - s.trace()) > 1e-12)
        throw std::logic_error("apply_channel: trace not preserved");
    return out;
}

/// Closed-form spectrum: the two 2x2 blocks {11,14,41,44} and {22,23,32,33}.
/// Order: outer block (+, -), inner block (+, -). Rounding noise below zero is clamped.
inline std::array<double, 4> eigenvalues_x(const XState& s) {
    auto block = [](double p, double q, cplx c) {
        const double mean = 0.5 * (p + q);
        const double half_gap = 0.5 * (p - q);
        const double rad = std::sqrt(half_gap * half_gap + std::norm(c));
        return std::array<double, 2>{mean + rad, mean - rad};
    };
    const auto outer = block(s.d[0], s.d[3], s.c14);
    const auto inner = block(s.d[1], s.d[2], s.c23);
    std::array<double, 4> ev{outer[0], outer[1], inner[0], inner[1]};
    for (double& v : ev) v = std::max(v, 0.0);
    return ev;
}

inline Matrix4c to_dense(const XState& s) {
    Matrix4c m = Matrix4c::Zero();
    for (int i = 0; i < 4; ++i) m(i, i) = s.d[i];
    m(0, 3) = s.c14;
    m(3, 0) = std::conj(s.c14);
    m(1, 2) = s.c23;
    m(2, 1) = std::conj(s.c23);
    return m;
}

/// Reads the X entries of a dense matrix; other entries are ignored.
inline XState extract_x(const Matrix4c& m) {
    XState s;
    for (int i = 0; i < 4; ++i) s.d[i] = m(i, i).real();
    s.c14 = m(0, 3);
    s.c23 = m(1, 2);
    return s;
}

}  // namespace oamturb
