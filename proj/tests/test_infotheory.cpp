#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "seqclone/curves.hpp"
#include "seqclone/infotheory.hpp"

using namespace seqclone;

namespace {

double xlog2(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

double ref_bb84_gap(double f) {
    const double fe = 0.5 + std::sqrt(f * (1.0 - f));
    return (1.0 + xlog2(f) + xlog2(1.0 - f)) - (1.0 + xlog2(fe) + xlog2(1.0 - fe));
}

double ref_six_gap(double f) {
    const double fe = 1.0 - f / 2.0 + std::sqrt((6.0 * f - 2.0) * (2.0 - 2.0 * f)) / 4.0;
    const double s = f + fe - 1.0;
    const double i_ae = 1.0 + s * std::log2(s / f) + (1.0 - fe) * std::log2((1.0 - fe) / f);
    return (1.0 + xlog2(f) + xlog2(1.0 - f)) - i_ae;
}

// plain bisection, written independently of the library's
double ref_root(double (*g)(double), double lo, double hi) {
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        ((g(lo) < 0) == (g(mid) < 0) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST(Entropy, KnownValues) {
    EXPECT_EQ(info::binary_entropy(0.0), 0.0);
    EXPECT_EQ(info::binary_entropy(1.0), 0.0);
    EXPECT_NEAR(info::binary_entropy(0.5), 1.0, 1e-15);
    EXPECT_NEAR(info::binary_entropy(0.11), 0.4999166, 1e-6);
}

TEST(Entropy, SymmetricAndBounded) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double p = u(rng);
        const double h = info::binary_entropy(p);
        EXPECT_NEAR(h, info::binary_entropy(1.0 - p), 1e-14);
        EXPECT_GE(h, 0.0);
        EXPECT_LE(h, 1.0);
        EXPECT_NEAR(info::info_ab(p), 1.0 - h, 1e-14);
    }
}

TEST(Info, SixStateMatchesReference) {
    for (double fb = 0.5; fb < 1.0; fb += 0.01) {
        const double fe = opt::sixstate_optimal_fe(fb);
        const double s = fb + fe - 1.0;
        const double tail = fe < 1.0 ? (1.0 - fe) * std::log2((1.0 - fe) / fb) : 0.0;
        const double ref = 1.0 + s * std::log2(s / fb) + tail;
        EXPECT_NEAR(info::info_ae_six(fb, fe), ref, 1e-13);
        EXPECT_NEAR(info::info_ae(Protocol::SixState, fb), ref, 1e-13);
    }
}

TEST(Info, RateIsTheLargerGap) {
    EXPECT_DOUBLE_EQ(info::ck_rate(0.5, 0.2, 0.4), 0.3);
    EXPECT_DOUBLE_EQ(info::ck_rate(0.5, 0.4, 0.2), 0.3);
    EXPECT_DOUBLE_EQ(info::ck_rate(0.1, 0.4, 0.4), -0.3);
}

TEST(Threshold, BB84) {
    const double expected = 0.5 + 1.0 / std::sqrt(8.0);
    EXPECT_NEAR(info::threshold(Protocol::BB84), expected, 1e-9);
    EXPECT_NEAR(info::threshold(Protocol::BB84), ref_root(ref_bb84_gap, 0.5 + 1e-9, 1.0 - 1e-9), 1e-9);
}

TEST(Threshold, SixState) {
    const double t = info::threshold(Protocol::SixState);
    EXPECT_NEAR(t, 0.8436, 5e-4);
    EXPECT_NEAR(t, ref_root(ref_six_gap, 0.6, 0.99), 1e-9);
    const auto below = info::info_curve_point(Protocol::SixState, t - 1e-3);
    const auto above = info::info_curve_point(Protocol::SixState, t + 1e-3);
    EXPECT_LT(below.rate_lower_bound, 0.0);
    EXPECT_GT(above.rate_lower_bound, 0.0);
}

TEST(Bisect, FindsRootAndRejectsBadBracket) {
    const double r = info::bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-12);
    EXPECT_NEAR(r, std::sqrt(2.0), 1e-12);
    EXPECT_THROW(info::bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-12), std::runtime_error);
}

TEST(Curves, Boundaries) {
    EXPECT_NEAR(opt::bb84_optimal_fe(1.0), 0.5, 1e-12);
    EXPECT_NEAR(opt::bb84_optimal_fe(0.5), 1.0, 1e-12);
    EXPECT_NEAR(opt::sixstate_optimal_fe(1.0), 0.5, 1e-12);
    EXPECT_NEAR(opt::sixstate_optimal_fe(1.0 / 3.0), 5.0 / 6.0, 1e-12);
}

TEST(Curves, KnownValues) {
    EXPECT_NEAR(opt::sixstate_optimal_fe(0.9), 0.756155281280883, 1e-12);
    EXPECT_NEAR(opt::sixstate_optimal_fe(0.85), 0.816091269024824, 1e-12);
    // the symmetric point: F_E = F_B
    const double t = 0.5 + 1.0 / std::sqrt(8.0);
    EXPECT_NEAR(opt::bb84_optimal_fe(t), t, 1e-12);
    EXPECT_NEAR(opt::bb84_optimal_fe(0.8536), 0.853507, 1e-6);
}

TEST(Curves, DomainChecks) {
    EXPECT_TRUE(opt::in_fidelity_domain(Protocol::BB84, 0.5));
    EXPECT_FALSE(opt::in_fidelity_domain(Protocol::BB84, 0.49));
    EXPECT_TRUE(opt::in_fidelity_domain(Protocol::SixState, 0.34));
    EXPECT_FALSE(opt::in_fidelity_domain(Protocol::SixState, 1.01));
    EXPECT_THROW(opt::bb84_optimal_fe(0.2), std::domain_error);
}

TEST(Curves, SixStateDominatesBB84ForEve) {
    // the extra basis costs Eve fidelity everywhere inside the shared domain
    for (double fb = 0.51; fb < 1.0; fb += 0.01) {
        EXPECT_LT(opt::sixstate_optimal_fe(fb), opt::bb84_optimal_fe(fb) + 1e-15);
    }
}
