#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include <mdfocus/detector.hpp>
#include <mdfocus/projapprox.hpp>

using namespace mdfocus;

namespace {

using Subsets = std::vector<std::vector<std::size_t>>;

StatConfig config(bool known, std::size_t p) {
    StatConfig c;
    c.stats = {StatSpec::dense(), StatSpec::ranked(1), StatSpec::sum_of_max()};
    if (p > 2) c.stats.push_back(StatSpec::ranked(2));
    if (known) c.prechange = Prechange::known_eta(std::vector<double>(p, 0.0));
    return c;
}

}  // namespace

TEST(ProjectionPlan, DefaultBlocks) {
    EXPECT_EQ(default_plan(4, 2).subsets, (Subsets{{0, 1}, {2, 3}}));
    EXPECT_EQ(default_plan(5, 2).subsets, (Subsets{{0, 1}, {2, 3}, {4}}));
    EXPECT_EQ(default_plan(3, 3).subsets, (Subsets{{0, 1, 2}}));
    EXPECT_THROW(default_plan(3, 4), ConfigError);
    EXPECT_THROW(default_plan(3, 0), ConfigError);
}

TEST(ProjectionPlan, Validation) {
    ProjectionPlan plan;
    plan.p_tilde = 2;
    plan.subsets = {{0, 1}};
    EXPECT_THROW(plan.validate(3), ConfigError);  // coordinate 2 uncovered
    plan.subsets = {{0, 1, 2}};
    EXPECT_THROW(plan.validate(3), ConfigError);  // larger than p_tilde
    plan.subsets = {{0, 3}, {1, 2}};
    EXPECT_THROW(plan.validate(3), ConfigError);  // out of range
    plan.subsets = {{0, 1}, {1, 2}};
    EXPECT_NO_THROW(plan.validate(3));
}

TEST(ApproxDetector, FullBlockEqualsExact) {
    for (std::size_t p = 1; p <= 3; ++p)
        for (bool known : {true, false}) {
            auto exact = make_exact_detector(ModelSpec::gaussian(p), config(known, p));
            auto approx = make_approx_detector(ModelSpec::gaussian(p), config(known, p), default_plan(p, p));
            std::mt19937_64 rng(p * 2 + known);
            std::normal_distribution<double> nd;
            std::vector<double> x(p);
            for (int t = 0; t < 1500; ++t) {
                for (auto& v : x) v = nd(rng) + (t > 1000 ? 0.4 : 0.0);
                const auto a = exact.step(x);
                const auto b = approx.step(x);
                ASSERT_EQ(a.candidates, b.candidates);
                for (std::size_t k = 0; k < a.values.size(); ++k) {
                    ASSERT_EQ(a.values[k].value, b.values[k].value);
                    ASSERT_EQ(a.values[k].tau, b.values[k].tau);
                }
            }
        }
}

TEST(ApproxDetector, NeverExceedsExact) {
    for (std::size_t p : {4u, 6u})
        for (bool known : {true, false}) {
            auto exact = make_exact_detector(ModelSpec::gaussian(p), config(known, p));
            auto approx = make_approx_detector(ModelSpec::gaussian(p), config(known, p), default_plan(p, 2));
            std::mt19937_64 rng(40 + p + known);
            std::normal_distribution<double> nd;
            std::vector<double> x(p);
            for (int t = 0; t < 2000; ++t) {
                for (auto& v : x) v = nd(rng) + (t > 1200 ? 0.3 : 0.0);
                const auto a = exact.step(x);
                const auto& b = approx.step(x);
                for (std::size_t k = 0; k < a.values.size(); ++k)
                    ASSERT_LE(b.values[k].value, a.values[k].value + 1e-12) << "p=" << p << " t=" << t;
            }
        }
}

TEST(ApproxDetector, ZeroStream) {
    auto det = make_approx_detector(ModelSpec::gaussian(4), config(true, 4), default_plan(4, 2));
    const std::vector<double> x(4, 0.0);
    for (int t = 0; t < 200; ++t)
        for (const auto& v : det.step(x).values) EXPECT_EQ(v.value, 0.0);
}

TEST(ApproxDetector, StorageBudgetAndProjectedSoundness) {
    const std::size_t p = 4;
    auto det = make_approx_detector(ModelSpec::gaussian(p), config(false, p), default_plan(p, 2));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    std::vector<std::vector<double>> cums(1, std::vector<double>(p, 0.0));
    std::vector<double> x(p);
    std::vector<std::vector<double>> rows;
    for (int t = 0; t < 1500; ++t) {
        for (auto& v : x) v = nd(rng);
        rows.push_back(x);
        auto c = cums.back();
        for (std::size_t k = 0; k < p; ++k) c[k] += x[k];
        cums.push_back(c);
    }
    std::size_t checked = 0;
    for (auto& store : det.store().stores()) {
        const auto proj = store.projection();
        store.set_observer([&, proj](const RebuildEvent& ev) {
            std::vector<HullPoint> all;
            for (std::int64_t tau = 1; tau < ev.n; ++tau) {
                std::vector<double> pt = {static_cast<double>(tau)};
                for (auto k : proj) pt.push_back(cums[static_cast<std::size_t>(tau)][k]);
                all.push_back({tau, pt});
            }
            for (auto v : hull_vertices(all)) EXPECT_TRUE(std::binary_search(ev.after.begin(), ev.after.end(), v));
            ++checked;
        });
    }
    for (const auto& r : rows) {
        det.step(r);
        std::size_t budget = 0;
        for (const auto& s : det.store().stores()) budget += s.max_size() + 1;
        EXPECT_LE(det.store().total_stored(), budget);
        EXPECT_LE(det.store().size(), det.store().total_stored());
    }
    EXPECT_GT(checked, 10u);
}

TEST(ApproxDetector, OverlappingSubsetsDeduplicate) {
    ProjectionPlan plan;
    plan.p_tilde = 2;
    plan.subsets = {{0, 1}, {1, 2}};
    auto det = make_approx_detector(ModelSpec::gaussian(3), config(false, 3), plan);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> nd;
    std::vector<double> x(3);
    for (int t = 0; t < 500; ++t) {
        for (auto& v : x) v = nd(rng);
        det.step(x);
        const auto& labels = det.store().labels();
        EXPECT_TRUE(std::adjacent_find(labels.begin(), labels.end()) == labels.end());
        EXPECT_TRUE(std::is_sorted(labels.begin(), labels.end()));
    }
}

TEST(ApproxDetector, StoredCountGrowthIsPolyLog) {
    const std::size_t p = 4;
    std::vector<double> ns, mean(7, 0.0);
    for (int i = 0; i < 7; ++i) ns.push_back(std::ldexp(1.0, 10 + i));
    const int reps = 3;
    for (int r = 0; r < reps; ++r) {
        auto det = make_approx_detector(ModelSpec::gaussian(p), config(true, p), default_plan(p, 2));
        std::mt19937_64 rng(500 + r);
        std::normal_distribution<double> nd;
        std::vector<double> x(p);
        std::size_t next = 0;
        for (std::int64_t n = 1; n <= 65536; ++n) {
            for (auto& v : x) v = nd(rng);
            det.step(x);
            if (static_cast<double>(n) == ns[next])
                mean[next++] += static_cast<double>(det.store().total_stored()) / reps;
        }
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        mx += std::log(ns[i]) / ns.size();
        my += std::log(mean[i]) / ns.size();
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        sxy += (std::log(ns[i]) - mx) * (std::log(mean[i]) - my);
        sxx += (std::log(ns[i]) - mx) * (std::log(ns[i]) - mx);
    }
    EXPECT_LE(sxy / sxx, 0.15);
}
