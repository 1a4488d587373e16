#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oamturb/turbulence.hpp"
#include "oracles.hpp"

using namespace oamturb;

TEST(PhaseStructure, ZeroSeparation) { EXPECT_EQ(phase_structure(0.0, TurbulenceParams::from_r0(0.3)), 0.0); }

TEST(PhaseStructure, AtFriedParameter) {
    EXPECT_DOUBLE_EQ(phase_structure(0.7, TurbulenceParams::from_r0(0.7)), 6.88);
}

TEST(PhaseStructure, TwiceFriedParameter) {
    EXPECT_NEAR(phase_structure(2.0, TurbulenceParams::from_r0(1.0)), 21.8426384750824248, 1e-12);
}

TEST(FriedParameter, UnitProduct) { EXPECT_NEAR(fried_parameter(1.0 / 0.423, 1.0, 1.0), 1.0, 1e-15); }

TEST(FriedParameter, PathLengthScaling) {
    const double r1 = fried_parameter(2e-14, 5e6, 800.0);
    const double r2 = fried_parameter(2e-14, 5e6, 1600.0);
    EXPECT_NEAR(r2 / r1, std::pow(2.0, -0.6), 1e-14);
    EXPECT_NEAR(r2 / r1, 0.659753955386447130, 1e-14);
}

TEST(FriedParameter, TelecomLink) {
    const double k = 2.0 * std::numbers::pi / 1550e-9;
    EXPECT_NEAR(fried_parameter(1e-15, k, 1000.0), 0.312448162797755877, 1e-12);
    EXPECT_DOUBLE_EQ(TurbulenceParams::from_physical(1e-15, k, 1000.0).fried_r0, fried_parameter(1e-15, k, 1000.0));
}

TEST(FriedParameter, RejectsNonPositive) {
    EXPECT_THROW(fried_parameter(0.0, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(fried_parameter(1.0, -1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(fried_parameter(1.0, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(TurbulenceParams::from_r0(0.0), std::invalid_argument);
}

TEST(XRatio, RoundTrip) {
    const BeamParams beam{1.3, 4, 0};
    for (double x : {0.01, 0.5, 1.0, 2.9}) EXPECT_NEAR(x_ratio(beam, r0_from_x(beam, x)), x, 1e-14 * x);
}

TEST(XRatio, UnitFriedParameterGivesXi) {
    EXPECT_NEAR(x_ratio({1.0, 1, 0}, TurbulenceParams::from_r0(1.0)), 0.664670194089568510, 1e-15);
}

TEST(XRatio, ZeroIsTurbulenceFree) {
    const auto t = r0_from_x({1.0, 1, 0}, 0.0);
    EXPECT_TRUE(t.turbulence_free());
    EXPECT_EQ(x_ratio({1.0, 1, 0}, t), 0.0);
    EXPECT_THROW(r0_from_x({1.0, 1, 0}, -0.1), std::invalid_argument);
    EXPECT_THROW(r0_from_x({1.0, 1, 0}, INFINITY), std::invalid_argument);
}

TEST(ChannelAB, IdentityWithoutTurbulence) {
    const auto cc = channel_ab({1.0, 3, 0}, TurbulenceParams::none());
    EXPECT_EQ(cc.a, 1.0);
    EXPECT_EQ(cc.b, 0.0);
}

TEST(ChannelAB, RejectsBadTolerance) {
    EXPECT_THROW(channel_ab({1.0, 1, 0}, TurbulenceParams::from_r0(1.0), 0.0), std::invalid_argument);
}

TEST(ChannelAB, ModerateTurbulenceAgreesWithBruteForce) {
    const BeamParams beam{1.0, 1, 0};
    const auto turb = r0_from_x(beam, 1.0);
    const auto cc = channel_ab(beam, turb, 1e-10);
    EXPECT_GT(cc.b, 0.0);
    EXPECT_LT(cc.b, cc.a);
    EXPECT_LT(cc.a, 1.0);
    EXPECT_LT(cc.err_a, 1e-9);
    const auto ref = oracle::trapezoid_channel(beam.waist, beam.l0, turb.fried_r0);
    EXPECT_NEAR(cc.a, ref.a, 1e-6);
    EXPECT_NEAR(cc.b, ref.b.real(), 1e-6);
    EXPECT_NEAR(ref.b.imag(), 0.0, 1e-10);
}

TEST(ChannelAB, StrongTurbulenceCrosstalkApproachesSurvival) {
    const BeamParams beam{1.0, 1, 0};
    double prev_ratio = 0.0;
    for (double x : {0.5, 1.0, 2.0, 3.0}) {
        const auto cc = channel_ab(beam, r0_from_x(beam, x));
        const double ratio = cc.b / cc.a;
        EXPECT_LT(ratio, 1.0);
        EXPECT_GT(ratio, prev_ratio);
        prev_ratio = ratio;
    }
    EXPECT_GT(prev_ratio, 0.9);
}

TEST(ChannelAB, RandomPairsAgreeWithBruteForce) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> ld(1, 6);
    std::uniform_real_distribution<double> xd(0.05, 3.0);
    for (int trial = 0; trial < 10; ++trial) {
        const BeamParams beam{1.0, ld(rng), 0};
        const double x = xd(rng);
        const auto turb = r0_from_x(beam, x);
        const auto cc = channel_ab(beam, turb);
        const auto ref = oracle::trapezoid_channel(beam.waist, beam.l0, turb.fried_r0);
        EXPECT_NEAR(cc.a, ref.a, 1e-6) << "l0=" << beam.l0 << " x=" << x;
        EXPECT_NEAR(cc.b, ref.b.real(), 1e-6) << "l0=" << beam.l0 << " x=" << x;
    }
}

TEST(ChannelAB, SurvivalDecreasesAndCrosstalkBounded) {
    for (int l0 : {1, 2, 5}) {
        const BeamParams beam{1.0, l0, 0};
        double prev_a = 1.0;
        for (int i = 1; i <= 30; ++i) {
            const double x = 0.1 * i;
            const auto cc = channel_ab(beam, r0_from_x(beam, x));
            EXPECT_LT(cc.a, prev_a) << "l0=" << l0 << " x=" << x;
            EXPECT_GE(cc.b, 0.0);
            EXPECT_LE(cc.b, cc.a + 1e-10);
            EXPECT_GT(cc.a, 0.0);
            prev_a = cc.a;
        }
    }
}

TEST(ChannelAB, JointScalingOfWaistAndFriedParameter) {
    for (int l0 : {1, 3}) {
        const auto base = channel_ab({1.0, l0, 0}, TurbulenceParams::from_r0(0.8), 1e-11);
        for (double c : {0.25, 3.0, 40.0}) {
            const auto scaled = channel_ab({c, l0, 0}, TurbulenceParams::from_r0(0.8 * c), 1e-11);
            EXPECT_NEAR(scaled.a, base.a, 1e-9);
            EXPECT_NEAR(scaled.b, base.b, 1e-9);
        }
    }
}

TEST(ChannelAB, Deterministic) {
    const BeamParams beam{1.0, 7, 0};
    const auto turb = r0_from_x(beam, 0.65);
    const auto c1 = channel_ab(beam, turb);
    const auto c2 = channel_ab(beam, turb);
    EXPECT_EQ(c1.a, c2.a);
    EXPECT_EQ(c1.b, c2.b);
}

TEST(ChannelAB, HighOrderModesConverge) {
    for (int l0 : {10, 15, 25}) {
        const BeamParams beam{1.0, l0, 0};
        for (double x : {0.05, 1.0, 3.0}) {
            const auto cc = channel_ab(beam, r0_from_x(beam, x));
            EXPECT_GT(cc.a, 0.0);
            EXPECT_LE(cc.b, cc.a);
            EXPECT_LT(cc.err_a, 1e-9);
        }
    }
}

TEST(LambdaElement, SelectionRuleGivesExactZero) {
    const BeamParams beam{1.0, 2, 0};
    const auto turb = r0_from_x(beam, 0.7);
    EXPECT_EQ(lambda_element(2, 2, 2, -2, beam, turb), std::complex<double>(0.0, 0.0));
    EXPECT_EQ(lambda_element(2, -2, 2, 2, beam, turb), std::complex<double>(0.0, 0.0));
    EXPECT_EQ(lambda_element(2, -2, -2, 2, beam, turb), std::complex<double>(0.0, 0.0));
}

TEST(LambdaElement, ReproducesSurvivalAndCrosstalk) {
    const BeamParams beam{1.0, 2, 0};
    const auto turb = r0_from_x(beam, 0.7);
    const auto cc = channel_ab(beam, turb, 1e-11);
    const int l = 2;
    // a-type elements
    for (auto [li, lpi] : {std::pair{l, l}, {-l, -l}, {l, -l}, {-l, l}}) {
        const auto e = lambda_element(li, lpi, li, lpi, beam, turb, 1e-11);
        EXPECT_NEAR(e.real(), cc.a, 1e-9);
        EXPECT_NEAR(e.imag(), 0.0, 1e-10);
    }
    // b-type elements
    for (int s : {1, -1}) {
        const auto e = lambda_element(-s * l, -s * l, s * l, s * l, beam, turb, 1e-11);
        EXPECT_NEAR(e.real(), cc.b, 1e-9);
        EXPECT_NEAR(e.imag(), 0.0, 1e-12);
    }
}

TEST(LambdaElement, RejectsForeignIndices) {
    EXPECT_THROW(lambda_element(1, 1, 3, 3, {1.0, 1, 0}, TurbulenceParams::from_r0(1.0)), std::invalid_argument);
}

TEST(LambdaElement, IdentityWithoutTurbulence) {
    const BeamParams beam{1.0, 1, 0};
    EXPECT_EQ(lambda_element(1, 1, 1, 1, beam, TurbulenceParams::none()), std::complex<double>(1.0, 0.0));
    EXPECT_EQ(lambda_element(-1, -1, 1, 1, beam, TurbulenceParams::none()), std::complex<double>(0.0, 0.0));
}
