#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include <mdfocus/simlab.hpp>

using namespace mdfocus;

TEST(CounterRng, DeterministicPerStream) {
    CounterRng a(5, 3), b(5, 3), c(5, 4);
    std::vector<double> xa, xb, xc;
    for (int i = 0; i < 100; ++i) {
        xa.push_back(a.normal());
        xb.push_back(b.normal());
        xc.push_back(c.normal());
    }
    EXPECT_EQ(xa, xb);
    EXPECT_NE(xa, xc);
}

TEST(CounterRng, PoissonMoments) {
    CounterRng rng(9, 0);
    const int N = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < N; ++i) {
        const double k = static_cast<double>(rng.poisson(3.0));
        s += k;
        s2 += k * k;
    }
    const double m = s / N, v = s2 / N - m * m;
    EXPECT_NEAR(m, 3.0, 4 * std::sqrt(3.0 / N));
    EXPECT_NEAR(v, 3.0, 0.1);
}

TEST(StreamGenerator, ShiftSplitsMagnitude) {
    StreamScenario sc;
    sc.model = ModelSpec::gaussian(4);
    sc.sparsity = 2;
    sc.magnitude = 8.0;
    StreamGenerator g(sc);
    EXPECT_EQ(g.post_mean(), (std::vector<double>{2.0, 2.0, 0.0, 0.0}));

    sc.model = ModelSpec::uniform(2, CoordModel{Family::poisson});
    sc.sparsity = 1;
    sc.magnitude = 1.0;
    StreamGenerator gp(sc);
    EXPECT_NEAR(gp.post_mean()[0], std::exp(1.0), 1e-12);
    EXPECT_EQ(gp.post_mean()[1], 1.0);
}

TEST(StreamGenerator, ChangeAtBoundary) {
    StreamScenario sc;
    sc.model = ModelSpec::gaussian(1);
    sc.change_at = 50;
    sc.magnitude = 10000.0;
    StreamGenerator g(sc);
    std::vector<double> y;
    for (int t = 1; t <= 100; ++t) {
        g.next(y);
        if (t <= 50) EXPECT_LT(std::abs(y[0]), 10.0);
        else EXPECT_GT(y[0], 90.0);
    }
}

TEST(StreamGenerator, NoChangeMean) {
    StreamScenario sc;
    sc.model = ModelSpec::gaussian(3);
    sc.n = 20000;
    sc.seed = 4;
    double s = 0;
    for (const auto& r : generate(sc)) s += r[0] + r[1] + r[2];
    EXPECT_NEAR(s / (3 * 20000.0), 0.0, 4 / std::sqrt(60000.0));
}

TEST(StreamGenerator, Errors) {
    StreamScenario sc;
    sc.model = ModelSpec::gaussian(2);
    sc.sparsity = 3;
    EXPECT_THROW(StreamGenerator{sc}, ConfigError);
    sc.sparsity = 1;
    sc.pre_mean = {0.0};
    EXPECT_THROW(StreamGenerator{sc}, ConfigError);
    sc.pre_mean.clear();
    sc.model = ModelSpec::uniform(1, CoordModel{Family::exponential});
    EXPECT_THROW(StreamGenerator{sc}, UnsupportedError);
}

TEST(BruteForce, ZeroStreamKnown) {
    StatConfig cfg;
    cfg.prechange = Prechange::known_eta({0.0, 0.0});
    std::vector<std::vector<double>> rows(5, std::vector<double>(2, 0.0));
    for (const auto& r : brute_force_glr(ModelSpec::gaussian(2), cfg, rows)) EXPECT_EQ(r.values[0].value, 0.0);
}

TEST(BruteForce, SingleObservationKnown) {
    StatConfig cfg;
    cfg.prechange = Prechange::known_eta({0.0, 0.0});
    const auto reps = brute_force_glr(ModelSpec::gaussian(2), cfg, {{1.0, 1.0}});
    ASSERT_EQ(reps.size(), 1u);
    EXPECT_NEAR(reps[0].values[0].value, 2.0, 1e-12);
    EXPECT_EQ(reps[0].values[0].tau, 0);
}

TEST(BruteForce, UnknownDirectSums) {
    // unknown pre-change gaussian: 2*max_tau sum_i (S_tau - tau/n S_n)^2 * n / (tau (n - tau))
    StatConfig cfg;
    const std::vector<std::vector<double>> rows = {{0.5}, {-1.0}, {2.0}, {3.0}};
    const auto reps = brute_force_glr(ModelSpec::gaussian(1), cfg, rows);
    std::vector<double> cum = {0.0};
    for (const auto& r : rows) cum.push_back(cum.back() + r[0]);
    for (std::size_t n = 2; n <= rows.size(); ++n) {
        double best = 0;
        for (std::size_t tau = 1; tau < n; ++tau) {
            const double dm = cum[tau] / tau - (cum[n] - cum[tau]) / (n - tau);
            best = std::max(best, dm * dm * tau * (n - tau) / static_cast<double>(n));
        }
        EXPECT_NEAR(reps[n - 1].values[0].value, best, 1e-12) << n;
    }
    EXPECT_THROW(brute_force_glr(ModelSpec::gaussian(1), cfg, std::vector<std::vector<double>>(5001, {0.0})),
                 ConfigError);
}

TEST(Quantile, Type7) {
    EXPECT_EQ(empirical_quantile({3, 1, 2, 4}, 0.5), 2.5);
    EXPECT_EQ(empirical_quantile({3, 1, 2, 4}, 0.0), 1.0);
    EXPECT_EQ(empirical_quantile({3, 1, 2, 4}, 1.0), 4.0);
    EXPECT_NEAR(empirical_quantile({0, 10}, 0.3), 3.0, 1e-12);
    EXPECT_THROW(empirical_quantile({}, 0.5), InputError);
    EXPECT_THROW(empirical_quantile({1}, 1.5), ConfigError);
}

TEST(RunPool, CollectsFailuresAndContinues) {
    std::vector<int> done(10, 0);
    const auto out = run_pool(10, 3, [&](std::size_t r) {
        if (r == 4) throw std::runtime_error("boom");
        done[r] = 1;
    });
    EXPECT_TRUE(out.partial());
    EXPECT_EQ(out.errors[4], "boom");
    for (std::size_t r = 0; r < 10; ++r)
        if (r != 4) {
            EXPECT_EQ(done[r], 1);
        }
}

TEST(MonteCarloPlan, DeterministicAndWorkerInvariant) {
    StatConfig cfg;
    cfg.stats = {StatSpec::dense(), StatSpec::sum_of_max()};
    cfg.prechange = Prechange::known_eta({0.0, 0.0});
    MonteCarloSpec mc;
    mc.horizon = 200;
    mc.replicates = 20;
    const auto a = monte_carlo_plan(ModelSpec::gaussian(2), cfg, {}, mc);
    mc.workers = 3;
    const auto b = monte_carlo_plan(ModelSpec::gaussian(2), cfg, {}, mc);
    EXPECT_EQ(a.get("dense").at(10), b.get("dense").at(10));
    EXPECT_EQ(a.get("sum_of_max").at(10), b.get("sum_of_max").at(10));
    EXPECT_GE(a.get("sum_of_max").at(10), a.get("dense").at(10));
    EXPECT_EQ(a.provenance.mode, "monte_carlo");
    mc.replicates = 1;
    EXPECT_THROW(monte_carlo_plan(ModelSpec::gaussian(2), cfg, {}, mc), ConfigError);
}

TEST(MonteCarloPlan, QuantileLevelControlsExceedance) {
    StatConfig cfg;
    cfg.prechange = Prechange::known_eta({0.0});
    MonteCarloSpec mc;
    mc.horizon = 300;
    mc.replicates = 200;
    mc.level = 0.8;
    const double c = monte_carlo_plan(ModelSpec::gaussian(1), cfg, {}, mc).get("dense").at(1);
    int exceed = 0;
    const int R = 400;
    for (int r = 0; r < R; ++r) {
        StreamScenario sc;
        sc.n = 300;
        sc.seed = 99;
        sc.stream = static_cast<std::uint64_t>(r);
        auto det = make_exact_detector(ModelSpec::gaussian(1), cfg);
        double m = 0;
        for (const auto& y : generate(sc)) m = std::max(m, det.step(y).values[0].value);
        exceed += m >= c;
    }
    EXPECT_NEAR(exceed / static_cast<double>(R), 0.2, 0.08);
}

TEST(Experiment, HullcountSummaryAndCsv) {
    ExperimentGrid g;
    g.ps = {1, 2};
    g.ns = {64};
    const auto res = run_experiment(ExperimentKind::hullcount, g, 30);
    EXPECT_FALSE(res.partial);
    EXPECT_EQ(res.records.size(), 60u);
    EXPECT_NEAR(res.metric("hullcount_p1_n64", "expected_vertices"),
                static_cast<double>(expected_counts(64, 1).vertices), 1e-9);
    std::ostringstream rec, sum;
    write_records_csv(rec, res.records);
    write_summary_csv(sum, res.summary);
    EXPECT_EQ(rec.str().substr(0, rec.str().find('\n')),
              "scenario,replicate,seed,p,n,stat,value,detection_time,delay,candidates,step_seconds,error");
    EXPECT_EQ(sum.str().substr(0, sum.str().find('\n')), "scenario,p,n,metric,value");
    EXPECT_THROW(res.metric("nope", "z"), InputError);
}

TEST(Experiment, AddAndFalseAlarmRun) {
    ExperimentGrid g;
    g.ps = {2};
    g.ns = {400};
    g.change_at = 100;
    g.magnitude = 4.0;
    const auto add = run_experiment(ExperimentKind::add, g, 10);
    EXPECT_GT(add.metric("add_p2_n400", "mean_delay"), 0.0);
    EXPECT_LE(add.metric("add_p2_n400", "mean_delay"), add.metric("add_p2_n400", "add_bound"));
    g.alpha = 0.5;
    const auto fa = run_experiment(ExperimentKind::falsealarm, g, 20);
    EXPECT_LE(fa.metric("falsealarm_p2_n400", "stop_fraction"), 0.5 + 3 * fa.metric("falsealarm_p2_n400", "se"));
}

TEST(Experiment, FailedReplicatesMarkPartial) {
    ExperimentGrid g;
    g.family = Family::exponential;
    g.known = false;
    g.ns = {50};
    const auto res = run_experiment(ExperimentKind::arl, g, 3);
    EXPECT_TRUE(res.partial);
    for (const auto& r : res.records) EXPECT_FALSE(r.error.empty());
}

TEST(Experiment, ParseKinds) {
    EXPECT_EQ(parse_experiment("runtime-slope"), ExperimentKind::runtime_slope);
    EXPECT_EQ(parse_experiment("falsealarm"), ExperimentKind::falsealarm);
    EXPECT_THROW(parse_experiment("x"), ConfigError);
}
