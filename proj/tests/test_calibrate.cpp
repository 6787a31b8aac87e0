#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include <mdfocus/calibrate.hpp>
#include <mdfocus/detector.hpp>

using namespace mdfocus;

namespace {

const double kE = std::numbers::e;

double binom(int p, int s) {
    double r = 1.0;
    for (int i = 1; i <= s; ++i) r = r * (p - s + i) / i;
    return r;
}

}  // namespace

TEST(ArlThreshold, ClosedFormAtGammaE) {
    const double zeta = 4.0 + 5.0 * std::log(2.0);
    EXPECT_NEAR(arl_threshold(1, 1, kE, 1), 1 + 2 * zeta + 2 * std::sqrt(zeta), 1e-12);
    EXPECT_NEAR(arl_threshold(1, 1, kE, 1), 21.396, 5e-4);
}

TEST(ArlThreshold, IndependentEvaluation) {
    // log(gamma^4 p^s m 2^5) written as a single logarithm
    const int s = 2, p = 10, m = 4;
    const double gamma = 5000;
    const double zeta = std::log(std::pow(gamma, 4) * std::pow(p, s) * m * 32.0);
    EXPECT_NEAR(arl_threshold(s, p, gamma, m), s + 2 * zeta + 2 * std::sqrt(s * zeta), 1e-9);
}

TEST(ArlThreshold, IncreasingInGamma) {
    double prev = 0.0;
    for (double g = 2; g < 1e7; g *= 1.7) {
        const double c = arl_threshold(2, 5, g, 3);
        EXPECT_GT(c, prev);
        prev = c;
    }
}

TEST(ArlThreshold, Errors) {
    EXPECT_THROW(arl_threshold(0, 3, 100, 1), ConfigError);
    EXPECT_THROW(arl_threshold(4, 3, 100, 1), ConfigError);
    EXPECT_THROW(arl_threshold(1, 3, 1.0, 1), ConfigError);
}

TEST(FalseAlarmThreshold, Rank1Example) {
    EXPECT_NEAR(false_alarm_threshold(FaKind::rank1, 1, 0, 1, kE, 1.0), 8 + 2 * std::log(2.0), 1e-12);
}

TEST(FalseAlarmThreshold, ThresholdedLimit) {
    const double x = 4 * std::log(500.0) - std::log(0.1);
    EXPECT_NEAR(false_alarm_threshold(FaKind::thresholded, 0, 100.0, 5, 500, 0.1), 4 * x, 1e-9);
    EXPECT_NEAR(false_alarm_threshold(FaKind::thresholded, 0, 0.0, 5, 500, 0.1), 4 * x + 30, 1e-9);
}

TEST(FalseAlarmThreshold, DenseIsRankP) {
    for (int p : {1, 2, 5, 17})
        for (double n : {2.0, 10.0, 1e4})
            for (double a : {0.01, 0.2, 0.5})
                EXPECT_EQ(false_alarm_threshold(FaKind::dense, 0, 0, p, n, a),
                          false_alarm_threshold(FaKind::rank_s, p, 0, p, n, a));
}

TEST(FalseAlarmThreshold, RankSMatchesDirectBinomial) {
    for (int p : {3, 8, 20})
        for (int s = 1; s <= p; ++s) {
            const double y = 4 * std::log(300.0) - std::log(0.05) + std::log(binom(p, s));
            EXPECT_NEAR(false_alarm_threshold(FaKind::rank_s, s, 0, p, 300, 0.05), 2 * y + 2 * std::sqrt(s * y) + s,
                        1e-9);
        }
}

TEST(FalseAlarmThreshold, Monotonicity) {
    for (auto kind : {FaKind::rank1, FaKind::rank_s, FaKind::dense, FaKind::thresholded}) {
        double prev = 0.0;
        for (double n = 2; n < 1e6; n *= 1.5) {
            const double c = false_alarm_threshold(kind, 2, 1.0, 4, n, 0.1);
            EXPECT_GE(c, prev);
            prev = c;
        }
        prev = 1e300;
        for (double a = 0.01; a < 1.0; a += 0.07) {
            const double c = false_alarm_threshold(kind, 2, 1.0, 4, 100, a);
            EXPECT_LE(c, prev);
            prev = c;
        }
    }
}

TEST(FalseAlarmThreshold, Errors) {
    EXPECT_THROW(false_alarm_threshold(FaKind::rank_s, 5, 0, 4, 10, 0.1), ConfigError);
    EXPECT_THROW(false_alarm_threshold(FaKind::dense, 0, 0, 4, 1, 0.1), ConfigError);
    EXPECT_THROW(false_alarm_threshold(FaKind::dense, 0, 0, 4, 10, 0.0), ConfigError);
}

TEST(AddBound, Examples) {
    EXPECT_NEAR(add_bound(0, 1), std::sqrt(8 / std::numbers::pi) + 1, 1e-12);
    EXPECT_NEAR(add_bound(0, 1), 2.5958, 1e-4);
    EXPECT_NEAR(add_bound(10, 4), (10 + 2 * std::sqrt(8 / std::numbers::pi)) / 4 + 1, 1e-12);
    EXPECT_THROW(add_bound(1, 0), InfiniteDelay);
}

TEST(AddBound, AffineInThreshold) {
    const double d2 = 2.5;
    const double b0 = add_bound(0, d2), b1 = add_bound(7, d2), b2 = add_bound(14, d2);
    EXPECT_NEAR(b2 - b1, b1 - b0, 1e-12);
    EXPECT_NEAR(b1 - b0, 7 / d2, 1e-12);
    EXPECT_NEAR(add_bound(3, d2, 1.5, 4), add_bound(3 + 4 * 2.25, d2), 1e-12);
}

TEST(DdBound, Examples) {
    EXPECT_NEAR(dd_bound(0, 1, 1, 2 / kE), 8.0, 1e-12);
    double prev = 1e300;
    for (double d2 = 0.1; d2 < 20; d2 *= 1.3) {
        const double b = dd_bound(20, 3, d2, 0.1);
        EXPECT_LT(b, prev);
        prev = b;
    }
    EXPECT_THROW(dd_bound(3, 3, 1, 0.1, DelayVariant::centered), ConfigError);
    EXPECT_THROW(dd_bound(3, 3, 0, 0.1), InfiniteDelay);
}

TEST(DdBound, CenteredVariants) {
    const double c = 30, p = 3, d2 = 4, a = 0.1;
    const double base = 2 * (c - p) - 8 * std::log(a / 3);
    EXPECT_NEAR(dd_bound(c, 3, d2, a, DelayVariant::centered), (base + 2 * std::sqrt(p * std::log(3 / a))) / d2,
                1e-12);
    EXPECT_NEAR(dd_bound(c, 3, d2, a, DelayVariant::centered_wide), (base + 4 * std::sqrt(p * std::log(3 / a))) / d2,
                1e-12);
}

TEST(EffectiveSparsity, Examples) {
    const double one[] = {3.0, 0.0, 0.0, 0.0};
    EXPECT_EQ(effective_sparsity(one), 1);
    const double spread[] = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    EXPECT_GE(effective_sparsity(spread), 1);
    const double zero[] = {0.0, 0.0};
    EXPECT_THROW(dd_bound_thresholded(10, 1, zero, 0.1), InfiniteDelay);
    EXPECT_GT(dd_bound_thresholded(10, 1, one, 0.1), 0.0);
}

TEST(ThresholdPlan, TimeVaryingClampsSmallN) {
    TimeVaryingThreshold tv{FaKind::dense, 0, 0, 3, 0.1};
    EXPECT_EQ(tv.at(1), tv.at(2));
    EXPECT_LT(tv.at(2), tv.at(3));
}

TEST(ThresholdPlan, AnalyticBuilders) {
    StatConfig cfg;
    cfg.stats = {StatSpec::dense(), StatSpec::ranked(1), StatSpec::thresholded(2.0)};
    const auto arl = analytic_arl_plan(cfg, 4, 5000);
    EXPECT_EQ(arl.provenance.mode, "arl");
    EXPECT_DOUBLE_EQ(arl.get("dense").at(10), arl_threshold(4, 4, 5000, 2));
    EXPECT_DOUBLE_EQ(arl.get("ranked:1").at(10), arl_threshold(1, 4, 5000, 2));
    const double x = 4 * std::log(10000.0) + std::log(2.0) + std::log(2.0);
    EXPECT_NEAR(arl.get("thresholded:2").at(10), 4 * x + 24 * std::exp(-0.5), 1e-9);

    const auto fa = analytic_fa_plan(cfg, 4, 0.1);
    EXPECT_DOUBLE_EQ(fa.get("ranked:1").at(50), false_alarm_threshold(FaKind::rank1, 1, 0, 4, 50, 0.1));
    EXPECT_DOUBLE_EQ(fa.get("dense").at(50), false_alarm_threshold(FaKind::dense, 0, 0, 4, 50, 0.1));

    cfg.stats.push_back(StatSpec::sum_of_max());
    EXPECT_THROW(analytic_arl_plan(cfg, 4, 5000), ConfigError);
    EXPECT_THROW(analytic_fa_plan(cfg, 4, 0.1), ConfigError);
}

TEST(ThresholdPlan, MissingAndNegativeEntries) {
    ThresholdPlan plan;
    EXPECT_THROW(plan.get("dense"), ConfigError);
    EXPECT_THROW(plan.set_fixed("dense", -1.0), ConfigError);
    StatConfig cfg;
    EXPECT_THROW(plan.require(cfg), ConfigError);
}

TEST(ThresholdPlan, DecideUsesTimeVaryingValue) {
    StatConfig cfg;
    ThresholdPlan plan;
    plan.set("dense", {TimeVaryingThreshold{FaKind::dense, 0, 0, 1, 0.1}});
    StatisticReport rep;
    rep.values = {StatValue{20.0, 0, {}}};
    rep.n = 10;
    EXPECT_EQ(decide(rep, cfg, plan).stop, 20.0 >= plan.get("dense").at(10));
    rep.n = 100000;
    EXPECT_FALSE(decide(rep, cfg, plan).stop);
}
