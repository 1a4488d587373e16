#pragma once

// Quantumness quantifiers for two-qubit states: concurrence, relative entropy of coherence,
// and local quantum uncertainty (LQU).

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "oamturb/errors.hpp"
#include "oamturb/qstate.hpp"

namespace oamturb {

using Matrix2c = Eigen::Matrix<cplx, 2, 2>;

inline constexpr double kEigenClamp = 1e-12;

/// Pauli matrices x, y, z (index 0, 1, 2).
inline const std::array<Matrix2c, 3>& pauli() {
    static const std::array<Matrix2c, 3> p = [] {
        std::array<Matrix2c, 3> m;
        m[0] << 0.0, 1.0, 1.0, 0.0;
        m[1] << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
        m[2] << 1.0, 0.0, 0.0, -1.0;
        return m;
    }();
    return p;
}

/// Kronecker product of two 2x2 matrices (first factor acts on photon A).
inline Matrix4c kron(const Matrix2c& left, const Matrix2c& right) {
    Matrix4c out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = left(i, j) * right;
    return out;
}

// --- concurrence -----------------------------------------------------------------------------

/// Wootters concurrence of an X state.
inline double concurrence_x(const XState& s) {
    const double outer = std::abs(s.c14) - std::sqrt(std::max(0.0, s.d[1] * s.d[2]));
    const double inner = std::abs(s.c23) - std::sqrt(std::max(0.0, s.d[0] * s.d[3]));
    return 2.0 * std::max({0.0, outer, inner});
}

/// Closed form for a Werner-like input sent through the channel; the unclamped branch is
/// exposed separately for root finding.
inline double concurrence_analytic_signed(const WernerParams& w, const ChannelCoefficients& cc) {
    const double a = cc.a, b = cc.b;
    const double n = (a + b) * (a + b);
    return (a * a * w.gamma * std::sin(w.theta) - 2.0 * a * b * w.gamma) / n - 0.5 * (1.0 - w.gamma);
}

inline double concurrence_analytic(const WernerParams& w, const ChannelCoefficients& cc) {
    return std::max(0.0, concurrence_analytic_signed(w, cc));
}

/// General-matrix Wootters concurrence via the spectrum of rho (sy x sy) rho* (sy x sy).
inline double concurrence_wootters_oracle(const Matrix4c& rho) {
    const Matrix4c yy = kron(pauli()[1], pauli()[1]);
    const Matrix4c r = rho * yy * rho.conjugate() * yy;
    Eigen::ComplexEigenSolver<Matrix4c> es(r, false);
    std::array<double, 4> lam;
    for (int i = 0; i < 4; ++i) lam[i] = std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
    std::sort(lam.begin(), lam.end(), std::greater<>());
    return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

// --- coherence -------------------------------------------------------------------------------

/// -sum p log2 p, with 0 log 0 = 0.
inline double von_neumann_entropy(std::span<const double> eigs) {
    double s = 0.0;
    for (double p : eigs)
        if (p > 0.0) s -= p * std::log2(p);
    return s;
}

/// S(rho_diag) - S(rho) in bits.
inline double rel_entropy_coherence(const XState& s) {
    std::array<double, 4> diag;
    for (int i = 0; i < 4; ++i) diag[i] = std::max(0.0, s.d[i]);
    const auto ev = eigenvalues_x(s);
    return std::max(0.0, von_neumann_entropy(diag) - von_neumann_entropy(ev));
}

// --- local quantum uncertainty ---------------------------------------------------------------

/// Principal square root of a Hermitian positive semidefinite 4x4 matrix.
inline Matrix4c sqrt_psd(const Matrix4c& m) {
    Eigen::SelfAdjointEigenSolver<Matrix4c> es(m);
    if (es.info() != Eigen::Success) throw NotPSD("sqrt_psd: eigendecomposition failed");
    Eigen::Vector4d root;
    for (int i = 0; i < 4; ++i) {
        const double v = es.eigenvalues()(i);
        if (v < -kEigenClamp) throw NotPSD("sqrt_psd: eigenvalue " + std::to_string(v) + " < 0");
        root(i) = std::sqrt(std::max(0.0, v));
    }
    const auto& u = es.eigenvectors();
    return u * root.cast<cplx>().asDiagonal() * u.adjoint();
}

/// W_ij = Tr[sqrt(rho) (s_i x I) sqrt(rho) (s_j x I)] for the Pauli matrices on photon A.
inline Eigen::Matrix3d w_matrix(const Matrix4c& rho) {
    const Matrix4c root = sqrt_psd(rho);
    const Matrix2c id = Matrix2c::Identity();
    std::array<Matrix4c, 3> sandwiched;
    std::array<Matrix4c, 3> local;
    for (int i = 0; i < 3; ++i) {
        local[i] = kron(pauli()[i], id);
        sandwiched[i] = root * local[i] * root;
    }
    Eigen::Matrix3d w;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const cplx t = (sandwiched[i] * local[j]).trace();
            if (std::abs(t.imag()) > 1e-12)
                throw std::logic_error("w_matrix: non-real trace " + std::to_string(t.imag()));
            w(i, j) = t.real();
        }
    return 0.5 * (w + w.transpose());
}

struct LquResult {
    double value = 0.0;
    int branch = 1;  ///< 1, 2, 3 for the x, y, z axis of the optimal local observable
};

namespace detail {

// Axis of the dominant W eigenvector. Ties within the band go to the lowest index.
inline int lqu_branch(const Eigen::Matrix3d& w, double lambda_max, const Eigen::Vector3d& top) {
    constexpr double band = 1e-12;
    const double off = std::max({std::abs(w(0, 1)), std::abs(w(0, 2)), std::abs(w(1, 2))});
    if (off <= band) {
        for (int i = 0; i < 3; ++i)
            if (w(i, i) >= lambda_max - band) return i + 1;
    }
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(top(i)) > std::abs(top(best)) + band) best = i;
    return best + 1;
}

}  // namespace detail

inline LquResult lqu_dense(const Matrix4c& rho) {
    const Eigen::Matrix3d w = w_matrix(rho);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(w);
    const double lambda_max = es.eigenvalues()(2);
    LquResult r;
    r.value = std::clamp(1.0 - lambda_max, 0.0, 1.0);
    r.branch = detail::lqu_branch(w, lambda_max, es.eigenvectors().col(2));
    return r;
}

/// LQU with the local observable on photon A.
inline LquResult lqu(const XState& s) { return lqu_dense(to_dense(s)); }

// --- all three -------------------------------------------------------------------------------

struct MeasureTriple {
    double concurrence = 0.0;
    double coherence_rel_ent = 0.0;
    double lqu = 0.0;
    int lqu_branch = 1;
};

inline MeasureTriple evaluate_measures(const XState& s) {
    const auto q = lqu(s);
    return {concurrence_x(s), rel_entropy_coherence(s), q.value, q.branch};
}

}  // namespace oamturb
