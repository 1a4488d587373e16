#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oamturb/lgmath.hpp"
#include "oamturb/quadrature.hpp"
#include "oracles.hpp"

using namespace oamturb;

TEST(Laguerre, DegreeZeroIsOne) { EXPECT_EQ(laguerre(0, 3, 7.2), 1.0); }

TEST(Laguerre, DegreeOneMatchesDirectSum) { EXPECT_DOUBLE_EQ(laguerre(1, 2, 1.0), 2.0); }

TEST(Laguerre, OneAtOriginForAlphaZero) { EXPECT_DOUBLE_EQ(laguerre(2, 0, 0.0), 1.0); }

TEST(Laguerre, RejectsNegativeIndices) {
    EXPECT_THROW(laguerre(-1, 0, 1.0), std::invalid_argument);
    EXPECT_THROW(laguerre(1, -2, 1.0), std::invalid_argument);
    EXPECT_THROW(laguerre(1, 0, std::nan("")), std::invalid_argument);
}

TEST(Laguerre, AgreesWithFactorialSum) {
    for (int p = 0; p <= 12; ++p)
        for (int alpha = 0; alpha <= 5; ++alpha)
            for (double x : {0.0, 0.3, 1.7, 4.0, 9.5}) {
                const double ref = oracle::laguerre_sum(p, alpha, x);
                EXPECT_NEAR(laguerre(p, alpha, x), ref, 1e-10 * std::max(1.0, std::abs(ref)))
                    << "p=" << p << " alpha=" << alpha << " x=" << x;
            }
}

TEST(Laguerre, ThreeTermRecurrenceHoldsOnRandomArguments) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> pd(1, 10), ad(0, 5);
    std::uniform_real_distribution<double> xd(-20.0, 20.0);
    for (int trial = 0; trial < 500; ++trial) {
        const int p = pd(rng), alpha = ad(rng);
        const double x = xd(rng);
        const double lhs = (p + 1) * laguerre(p + 1, alpha, x);
        const double rhs = (2 * p + alpha + 1 - x) * laguerre(p, alpha, x) - (p + alpha) * laguerre(p - 1, alpha, x);
        EXPECT_NEAR(lhs, rhs, 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)}));
    }
}

TEST(RadialProfile, VanishesOnAxis) { EXPECT_EQ(radial_profile(0.0, {1.0, 1, 0}), 0.0); }

TEST(RadialProfile, ClosedFormAtUnitRadius) {
    EXPECT_NEAR(radial_profile(1.0, {1.0, 1, 0}), 2.0 * std::numbers::sqrt2 / std::numbers::e, 1e-14);
}

TEST(RadialProfile, SignOfL0DoesNotMatter) {
    EXPECT_DOUBLE_EQ(radial_profile(0.8, {1.3, 3, 1}), radial_profile(0.8, {1.3, -3, 1}));
}

TEST(RadialProfile, RejectsBadInput) {
    EXPECT_THROW(radial_profile(-0.1, {1.0, 1, 0}), std::invalid_argument);
    EXPECT_THROW(radial_profile(0.5, {0.0, 1, 0}), std::invalid_argument);
    EXPECT_THROW(radial_profile(0.5, {1.0, 0, 0}), std::invalid_argument);
    EXPECT_THROW(radial_profile(0.5, {1.0, 1, -1}), std::invalid_argument);
}

TEST(RadialProfile, Normalized) {
    for (int p = 0; p <= 2; ++p)
        for (int l = 1; l <= 3; ++l) {
            const BeamParams beam{1.7, l, p};
            auto f = [&](double r) -> quad::Vec<1> {
                const double v = radial_profile(r, beam);
                return {v * v * r};
            };
            const auto res = quad::integrate<1>(f, 0.0, 12.0 * beam.waist, 1e-13);
            EXPECT_NEAR(res.value[0], 1.0, 1e-10) << "p0=" << p << " l0=" << l;
        }
}

TEST(RadialProfile, DensityInUMatchesProfile) {
    const BeamParams beam{0.7, 2, 1};
    for (double r : {0.1, 0.4, 0.9, 1.5}) {
        const double u = 2.0 * r * r / (beam.waist * beam.waist);
        const double du_dr = 4.0 * r / (beam.waist * beam.waist);
        const double R = radial_profile(r, beam);
        EXPECT_NEAR(radial_density_u(u, beam) * du_dr, R * R * r, 1e-13);
    }
}

TEST(RadialProfile, LargeIndicesStayFinite) {
    const BeamParams beam{1.0, 40, 30};
    const double v = radial_profile(5.0, beam);
    EXPECT_TRUE(std::isfinite(v));
}

TEST(PhaseCorrelationLength, FundamentalClosedForm) {
    EXPECT_NEAR(phase_correlation_length({1.0, 1, 0}), 3.0 * std::sqrt(std::numbers::pi) / 8.0, 1e-15);
}

TEST(PhaseCorrelationLength, LinearInWaist) {
    EXPECT_NEAR(phase_correlation_length({2.0, 1, 0}), 2.0 * phase_correlation_length({1.0, 1, 0}), 1e-15);
}

TEST(PhaseCorrelationLength, HighOrderMode) {
    // sin(pi/20) * Gamma(23/2) / (2 Gamma(11)), evaluated in 30-digit arithmetic
    EXPECT_NEAR(phase_correlation_length({1.0, 10, 0}), 0.256486977020917183, 1e-14);
}

TEST(PhaseCorrelationLength, PositiveAndFiniteForLargeL) {
    for (int l = 1; l <= 200; l += 7) {
        const double xi = phase_correlation_length({1.0, l, 0});
        EXPECT_GT(xi, 0.0);
        EXPECT_TRUE(std::isfinite(xi));
        EXPECT_DOUBLE_EQ(phase_correlation_length({1.0, -l, 0}), xi);
    }
}

TEST(PhaseCorrelationLength, RejectsZeroL) {
    EXPECT_THROW(phase_correlation_length({1.0, 0, 0}), std::invalid_argument);
}
