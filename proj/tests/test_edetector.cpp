#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include <mdfocus/edetector.hpp>

using namespace mdfocus;

namespace {

std::vector<double> bernoulli_stream(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution b(0.5);
    std::vector<double> x(n);
    for (auto& v : x) v = b(rng) ? 1.0 : -1.0;
    return x;
}

std::vector<double> score_stream(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> u(-30, 30);
    std::vector<double> x(n);
    for (auto& v : x) v = u(rng);
    return x;
}

}  // namespace

TEST(EDetectorSpec, Presets) {
    const auto w = EDetectorSpec::preset("winning-rate");
    EXPECT_NEAR(w.score(3.0), 0.51, 1e-15);
    EXPECT_NEAR(w.score(-2.0), -0.49, 1e-15);
    EXPECT_EQ(w.score(0.0), -0.49);
    EXPECT_EQ(w.variance(7.0), 1.0);
    const auto pm = EDetectorSpec::preset("plus-minus");
    EXPECT_NEAR(pm.score(-80.0), -1.0, 1e-15);
    EXPECT_NEAR(pm.score(0.0), 0.5 / 0.494 - 1.0, 1e-15);
    EXPECT_NEAR(pm.variance(0.0), pm.score(0.0) * pm.score(0.0), 1e-15);
    EXPECT_THROW(EDetectorSpec::preset("other"), ConfigError);
}

TEST(EDetectorPoints, WinningRateAbscissaIsTau) {
    const auto x = bernoulli_stream(50, 1);
    const auto pts = edetector_points(EDetectorSpec::winning_rate(), x);
    ASSERT_EQ(pts.size(), 50u);
    double b = 0;
    for (std::size_t t = 0; t < pts.size(); ++t) {
        EXPECT_EQ(pts[t].label, static_cast<std::int64_t>(t));
        EXPECT_EQ(pts[t].coords[0], static_cast<double>(t));
        EXPECT_NEAR(pts[t].coords[1], b, 1e-12);
        b += 0.5 * ((x[t] > 0 ? 1.0 : 0.0) - 0.49);
    }
    EXPECT_THROW(edetector_points(EDetectorSpec::winning_rate(), std::vector<double>{}), InputError);
}

TEST(EDetectorPoints, ConstantScoresGiveTwoVertices) {
    const std::vector<double> x(40, 1.0);
    EXPECT_EQ(hull_vertices(edetector_points(EDetectorSpec::winning_rate(), x)), (VertexSet{0, 39}));
}

TEST(EDetectorPoints, BernoulliVertexEnvelope) {
    std::size_t worst = 0;
    for (std::uint64_t s = 0; s < 100; ++s)
        worst = std::max(worst, hull_vertices(edetector_points(EDetectorSpec::winning_rate(), bernoulli_stream(640, s))).size());
    EXPECT_LE(worst, 25u);
}

TEST(Cusum, ZeroMultiplier) {
    const auto x = bernoulli_stream(30, 2);
    const auto r = cusum_argmax(EDetectorSpec::winning_rate(), x, 0.0, psi_exponential(0.0));
    EXPECT_EQ(r.value, 0.0);
    EXPECT_EQ(cusum_log_value(EDetectorSpec::winning_rate(), x, 0.0, psi_exponential), 0.0);
}

TEST(Cusum, AllWinsGrowLinearly) {
    const std::vector<double> x(25, 1.0);
    const double lambda = 0.3;
    const auto r = cusum_argmax(EDetectorSpec::winning_rate(), x, lambda, 0.0);
    EXPECT_NEAR(r.value, lambda * 0.51 * 25, 1e-12);
    EXPECT_EQ(r.tau, 0);
}

TEST(Cusum, PsiDomain) {
    EXPECT_NEAR(psi_exponential(0.5), -std::log(0.5) - 0.5, 1e-15);
    EXPECT_THROW(psi_exponential(1.0), DomainError);
}

TEST(Cusum, HullRestrictedEqualsFullScan) {
    for (const auto& spec : {EDetectorSpec::winning_rate(), EDetectorSpec::plus_minus()})
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto x = spec.name == "winning-rate" ? bernoulli_stream(640, s) : score_stream(640, s);
            for (std::size_t n : {1u, 2u, 17u, 200u, 640u}) {
                const std::span<const double> pre(x.data(), n);
                const auto hv = hull_vertices(edetector_points(spec, pre));
                for (int k = 1; k <= 190; k += 7) {
                    const double lam = 0.005 * k;
                    const auto full = cusum_argmax(spec, pre, lam, psi_exponential(lam));
                    const auto hull = cusum_argmax(spec, pre, lam, psi_exponential(lam), std::span<const std::int64_t>(hv));
                    ASSERT_NEAR(full.value, hull.value, 1e-9) << spec.name << " n=" << n;
                    ASSERT_TRUE(std::binary_search(hv.begin(), hv.end(), full.tau));
                }
            }
        }
}

TEST(EDetectorHull, MatchesBatchHull) {
    for (const auto& spec : {EDetectorSpec::winning_rate(), EDetectorSpec::plus_minus()}) {
        const auto x = spec.name == "winning-rate" ? bernoulli_stream(400, 9) : score_stream(400, 9);
        EDetectorHull h(spec);
        for (std::size_t n = 1; n <= x.size(); ++n) {
            const auto& v = h.push(x[n - 1]);
            ASSERT_EQ(v, hull_vertices(edetector_points(spec, std::span<const double>(x.data(), n)))) << n;
        }
        EXPECT_EQ(h.n(), 400);
    }
}

TEST(EDetectorHull, DistinctArgmaxBoundedByVertices) {
    const auto x = bernoulli_stream(640, 12);
    const auto spec = EDetectorSpec::winning_rate();
    const auto hv = hull_vertices(edetector_points(spec, x));
    std::set<std::int64_t> taus;
    for (int k = 1; k <= 190; ++k) taus.insert(cusum_argmax(spec, x, 0.005 * k, psi_exponential(0.005 * k)).tau);
    EXPECT_LE(taus.size(), hv.size());
}
