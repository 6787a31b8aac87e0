#ifndef MDFOCUS_SIMLAB_HPP
#define MDFOCUS_SIMLAB_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "calibrate.hpp"
#include "engine.hpp"
#include "expectation.hpp"
#include "hull.hpp"
#include "model.hpp"
#include "statistics.hpp"

namespace mdfocus {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Counter-based generator: draw i of stream (seed, stream) is
// splitmix64(key ^ splitmix64(i)) with key = splitmix64(splitmix64(seed) ^ splitmix64(~stream)).
// Replicate r of an experiment uses stream r.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed = 0, std::uint64_t stream = 0)
        : key_(splitmix64(splitmix64(seed) ^ splitmix64(~stream))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return splitmix64(key_ ^ splitmix64(counter_++)); }

    // Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1p-53; }

    // Box-Muller, both variates used.
    double normal() {
        if (spare_) {
            const double z = *spare_;
            spare_.reset();
            return z;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double th = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(th);
        return r * std::cos(th);
    }

    // Sequential-search inversion.
    std::int64_t poisson(double mean) {
        if (!(mean > 0.0) || mean > 500.0) throw DomainError("poisson sampler needs mean in (0, 500]");
        const double u = uniform();
        double p = std::exp(-mean), F = p;
        std::int64_t k = 0;
        const auto cap = static_cast<std::int64_t>(20.0 * mean + 200.0);
        while (u > F && k < cap) {
            ++k;
            p *= mean / static_cast<double>(k);
            F += p;
        }
        return k;
    }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::optional<double> spare_;
};

struct StreamScenario {
    ModelSpec model = ModelSpec::gaussian(1);
    std::int64_t n = 1000;
    std::optional<std::int64_t> change_at;  // last pre-change index
    std::vector<double> pre_mean;           // empty: 0 for gaussian, 1 for poisson
    int sparsity = 1;
    double magnitude = 0.0;  // squared norm of the natural-parameter change
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

// Per-coordinate shift in the natural parameter.
inline double per_coordinate_shift(double magnitude, int sparsity) {
    if (sparsity < 1) throw ConfigError("sparsity must be >= 1");
    return std::sqrt(magnitude / sparsity);
}

// Raw observations of a scenario, one row at a time.
class StreamGenerator {
public:
    explicit StreamGenerator(const StreamScenario& sc) : sc_(sc), rng_(sc.seed, sc.stream) {
        const auto p = sc_.model.p();
        if (sc_.sparsity < 1 || static_cast<std::size_t>(sc_.sparsity) > p)
            throw ConfigError("sparsity must lie in [1, p]");
        for (std::size_t i = 0; i < p; ++i) {
            const auto f = sc_.model.coord(i).family;
            if (f != Family::gaussian_mean && f != Family::poisson)
                throw UnsupportedError("generator supports gaussian and poisson coordinates");
        }
        pre_ = sc_.pre_mean;
        if (pre_.empty())
            for (std::size_t i = 0; i < p; ++i)
                pre_.push_back(sc_.model.coord(i).family == Family::poisson ? 1.0 : 0.0);
        if (pre_.size() != p) throw ConfigError("pre_mean has wrong dimension");
        post_ = pre_;
        const double h = per_coordinate_shift(sc_.magnitude, sc_.sparsity);
        for (int i = 0; i < sc_.sparsity; ++i) {
            if (sc_.model.coord(static_cast<std::size_t>(i)).family == Family::poisson)
                post_[static_cast<std::size_t>(i)] = pre_[static_cast<std::size_t>(i)] * std::exp(h);
            else
                post_[static_cast<std::size_t>(i)] += h;
        }
    }

    void next(std::vector<double>& y) {
        ++t_;
        const bool after = sc_.change_at && t_ > *sc_.change_at;
        const auto& mean = after ? post_ : pre_;
        y.resize(mean.size());
        for (std::size_t i = 0; i < mean.size(); ++i) {
            if (sc_.model.coord(i).family == Family::poisson)
                y[i] = static_cast<double>(rng_.poisson(mean[i]));
            else
                y[i] = mean[i] + rng_.normal();
        }
    }

    std::int64_t t() const { return t_; }
    const std::vector<double>& pre_mean() const { return pre_; }
    const std::vector<double>& post_mean() const { return post_; }

private:
    StreamScenario sc_;
    CounterRng rng_;
    std::vector<double> pre_, post_;
    std::int64_t t_ = 0;
};

inline std::vector<std::vector<double>> generate(const StreamScenario& sc) {
    StreamGenerator g(sc);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(sc.n));
    for (auto& r : rows) g.next(r);
    return rows;
}

// Per-step statistics by scanning every admissible tau from full cumulative sums.
inline std::vector<StatisticReport> brute_force_glr(const ModelSpec& model, const StatConfig& cfg,
                                                    const std::vector<std::vector<double>>& natural) {
    cfg.validate(model);
    const std::size_t d = model.d_nat(), p = model.p();
    const std::int64_t N = static_cast<std::int64_t>(natural.size());
    if (N > 5000) throw ConfigError("brute force is limited to n <= 5000");
    std::vector<double> cum(static_cast<std::size_t>(N + 1) * d, 0.0);
    for (std::int64_t t = 1; t <= N; ++t) {
        const auto& x = natural[static_cast<std::size_t>(t - 1)];
        if (x.size() != d) throw InputError("observation has wrong dimension");
        for (std::size_t k = 0; k < d; ++k)
            cum[static_cast<std::size_t>(t) * d + k] = cum[static_cast<std::size_t>(t - 1) * d + k] + x[k];
    }
    const std::int64_t first = cfg.prechange.known ? 0 : 1;
    std::vector<StatisticReport> out(static_cast<std::size_t>(N));
    std::vector<double> g(p), post(2), sorted(p), colmax(p);
    std::vector<std::int64_t> coltau(p);
    for (std::int64_t n = 1; n <= N; ++n) {
        auto& rep = out[static_cast<std::size_t>(n - 1)];
        rep.n = n;
        rep.values.assign(cfg.stats.size(), StatValue{});
        for (auto& v : rep.values) {
            v.value = -std::numeric_limits<double>::infinity();
            v.evidences.assign(p, 0.0);
        }
        std::fill(colmax.begin(), colmax.end(), -std::numeric_limits<double>::infinity());
        const double* all = &cum[static_cast<std::size_t>(n) * d];
        bool any = false;
        for (std::int64_t tau = first; tau < n; ++tau) {
            any = true;
            const double* pre = &cum[static_cast<std::size_t>(tau) * d];
            for (std::size_t i = 0; i < p; ++i) {
                const auto& cm = model.coord(i);
                const std::size_t o = model.offset(i);
                for (std::size_t k = 0; k < cm.width(); ++k) post[k] = all[o + k] - pre[o + k];
                const double cpost = static_cast<double>(n - tau);
                double gi;
                if (cfg.prechange.known)
                    gi = coord_maxloglik(cm, cpost, post.data()) -
                         coord_loglik_at(cm, cpost, post.data(), cfg.prechange.eta.data() + o);
                else
                    gi = coord_maxloglik(cm, static_cast<double>(tau), pre + o) + coord_maxloglik(cm, cpost, post.data()) -
                         coord_maxloglik(cm, static_cast<double>(n), all + o);
                g[i] = std::max(gi, 0.0);
                if (g[i] > colmax[i]) {
                    colmax[i] = g[i];
                    coltau[i] = tau;
                }
            }
            sorted = g;
            std::sort(sorted.begin(), sorted.end(), std::greater<>());
            for (std::size_t k = 0; k < cfg.stats.size(); ++k) {
                const auto& st = cfg.stats[k];
                double v = 0.0;
                if (st.kind == StatKind::dense) {
                    for (double x : g) v += x;
                } else if (st.kind == StatKind::ranked) {
                    for (int j = 0; j < st.s; ++j) v += sorted[static_cast<std::size_t>(j)];
                } else if (st.kind == StatKind::thresholded) {
                    for (double x : g)
                        if (std::sqrt(x) >= st.a) v += x;
                } else {
                    continue;
                }
                if (v > rep.values[k].value) {
                    rep.values[k].value = v;
                    rep.values[k].tau = tau;
                    rep.values[k].evidences = g;
                }
            }
        }
        for (std::size_t k = 0; k < cfg.stats.size(); ++k) {
            auto& v = rep.values[k];
            if (!any) {
                v.value = 0.0;
                continue;
            }
            if (cfg.stats[k].kind != StatKind::sum_of_max) continue;
            v.value = 0.0;
            std::size_t lead = 0;
            for (std::size_t i = 0; i < p; ++i) {
                v.value += colmax[i];
                if (colmax[i] > colmax[lead]) lead = i;
            }
            v.tau = coltau[lead];
            v.evidences = colmax;
        }
    }
    return out;
}

// Linear-interpolation empirical quantile (type 7).
inline double empirical_quantile(std::vector<double> values, double level) {
    if (values.empty()) throw InputError("quantile of an empty sample");
    if (!(level >= 0.0 && level <= 1.0)) throw ConfigError("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = level * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

// Runs fn(r) for r in [0, count) on a pool of workers. Failures are collected
// per replicate; the remaining replicates still run.
struct PoolOutcome {
    std::vector<std::string> errors;  // empty string: replicate succeeded
    bool partial() const {
        return std::any_of(errors.begin(), errors.end(), [](const std::string& e) { return !e.empty(); });
    }
};

inline PoolOutcome run_pool(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn) {
    PoolOutcome out;
    out.errors.assign(count, "");
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t r = next++; r < count; r = next++) {
            try {
                fn(r);
            } catch (const std::exception& e) {
                out.errors[r] = e.what();
                if (out.errors[r].empty()) out.errors[r] = "failure";
            }
        }
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return out;
}

inline ModelSpec family_model(Family f, std::size_t p) { return ModelSpec::uniform(p, CoordModel{f}); }

// Pre-change natural parameter matching the generator's default means.
inline std::vector<double> default_prechange_eta(const ModelSpec& model) {
    std::vector<double> eta;
    for (const auto& c : model.coords()) {
        const auto e = coord_natural_from_mean(c, c.family == Family::poisson ? 1.0 : 0.0);
        eta.insert(eta.end(), e.begin(), e.end());
    }
    return eta;
}

// Generator means matching a known pre-change natural parameter.
inline std::vector<double> means_from_eta(const ModelSpec& model, const std::vector<double>& eta) {
    std::vector<double> m;
    for (std::size_t i = 0; i < model.p(); ++i) {
        const double e = eta[model.offset(i)];
        m.push_back(model.coord(i).family == Family::poisson ? std::exp(e) : e);
    }
    return m;
}

struct MonteCarloSpec {
    std::int64_t horizon = 1000;
    double level = 0.5;
    int replicates = 100;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

// Quantile of the running maximum of each statistic over no-change streams.
inline ThresholdPlan monte_carlo_plan(const ModelSpec& model, const StatConfig& cfg, const EngineConfig& ec,
                                      const MonteCarloSpec& mc) {
    cfg.validate(model);
    if (mc.replicates < 2) throw ConfigError("monte-carlo calibration needs at least 2 replicates");
    if (mc.horizon < 2) throw ConfigError("monte-carlo horizon must be >= 2");
    const std::size_t K = cfg.stats.size();
    std::vector<std::vector<double>> maxima(K, std::vector<double>(static_cast<std::size_t>(mc.replicates)));
    const auto outcome = run_pool(static_cast<std::size_t>(mc.replicates), mc.workers, [&](std::size_t r) {
        StreamScenario sc;
        sc.model = model;
        sc.n = mc.horizon;
        if (cfg.prechange.known) sc.pre_mean = means_from_eta(model, cfg.prechange.eta);
        sc.seed = mc.seed;
        sc.stream = r;
        StreamGenerator gen(sc);
        auto det = make_detector(model, cfg, ec);
        std::vector<double> m(K, 0.0), y;
        for (std::int64_t t = 0; t < mc.horizon; ++t) {
            gen.next(y);
            const auto& rep = det.step_raw(y);
            for (std::size_t k = 0; k < K; ++k) m[k] = std::max(m[k], rep.values[k].value);
        }
        for (std::size_t k = 0; k < K; ++k) maxima[k][r] = m[k];
    });
    if (outcome.partial()) throw Error("monte-carlo calibration failed in a replicate");
    ThresholdPlan plan;
    plan.provenance.mode = "monte_carlo";
    plan.provenance.seed = mc.seed;
    plan.provenance.replicates = mc.replicates;
    plan.provenance.horizon = mc.horizon;
    plan.provenance.level = mc.level;
    for (std::size_t k = 0; k < K; ++k) plan.set_fixed(cfg.stats[k].name(), empirical_quantile(maxima[k], mc.level));
    return plan;
}

enum class ExperimentKind { hullcount, runtime_slope, arl, add, falsealarm };

inline ExperimentKind parse_experiment(const std::string& s) {
    if (s == "hullcount") return ExperimentKind::hullcount;
    if (s == "runtime_slope" || s == "runtime-slope") return ExperimentKind::runtime_slope;
    if (s == "arl") return ExperimentKind::arl;
    if (s == "add") return ExperimentKind::add;
    if (s == "falsealarm" || s == "false-alarm") return ExperimentKind::falsealarm;
    throw ConfigError("unknown experiment kind '" + s + "'");
}

inline std::string experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::hullcount: return "hullcount";
        case ExperimentKind::runtime_slope: return "runtime_slope";
        case ExperimentKind::arl: return "arl";
        case ExperimentKind::add: return "add";
        case ExperimentKind::falsealarm: return "falsealarm";
    }
    return "?";
}

// Desk-scale defaults; every field can be overridden.
struct ExperimentGrid {
    std::vector<int> ps{1};
    std::vector<std::int64_t> ns{1024};
    Family family = Family::gaussian_mean;
    StatSpec stat = StatSpec::dense();
    bool known = true;
    EngineConfig engine;
    double gamma = 5000.0;      // arl, add
    double alpha = 0.05;        // falsealarm
    std::int64_t change_at = 200;
    double magnitude = 4.0;
    int sparsity = 0;           // 0: dense change over all p
    std::int64_t warmup = 1000;  // runtime_slope
    std::uint64_t seed = 1;
};

struct ExperimentRecord {
    std::string scenario;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    int p = 0;
    std::int64_t n = 0;
    std::string stat;
    double value = 0.0;
    std::optional<std::int64_t> detection_time;
    std::optional<std::int64_t> delay;
    std::size_t candidates = 0;
    double step_seconds = 0.0;
    std::string error;
};

struct SummaryRow {
    std::string scenario;
    int p = 0;
    std::int64_t n = 0;
    std::string metric;
    double value = 0.0;
};

struct ExperimentResult {
    ExperimentKind kind = ExperimentKind::hullcount;
    std::vector<ExperimentRecord> records;
    std::vector<SummaryRow> summary;
    bool partial = false;

    double metric(const std::string& scenario, const std::string& name) const {
        for (const auto& s : summary)
            if (s.scenario == scenario && s.metric == name) return s.value;
        throw InputError("no summary metric " + name + " for " + scenario);
    }
};

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double se_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// Least-squares slope of y on x.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = mean_of(x), my = mean_of(y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

inline std::string scenario_id(ExperimentKind k, int p, std::int64_t n) {
    return experiment_name(k) + "_p" + std::to_string(p) + "_n" + std::to_string(n);
}

}  // namespace detail

// Vertex count of the hull of P(0), ..., P(n-1) for an i.i.d. standard Gaussian walk.
inline std::size_t walk_hull_vertex_count(int p, std::int64_t n, std::uint64_t seed, std::uint64_t stream) {
    CounterRng rng(seed, stream);
    PointSet pts(static_cast<std::size_t>(p) + 1);
    pts.reserve(static_cast<std::size_t>(n));
    std::vector<double> c(static_cast<std::size_t>(p) + 1, 0.0);
    for (std::int64_t t = 0; t < n; ++t) {
        c[0] = static_cast<double>(t);
        pts.push_back(t, c.data());
        for (int k = 1; k <= p; ++k) c[static_cast<std::size_t>(k)] += rng.normal();
    }
    return hull_vertices(pts).size();
}

inline ExperimentResult run_experiment(ExperimentKind kind, const ExperimentGrid& grid, int replicates,
                                       unsigned workers = 1) {
    if (replicates < 1) throw ConfigError("replicates must be >= 1");
    ExperimentResult res;
    res.kind = kind;
    std::vector<double> slope_x, slope_y;
    for (int p : grid.ps) {
        if (p < 1) throw ConfigError("p must be >= 1");
        slope_x.clear();
        slope_y.clear();
        for (std::int64_t n : grid.ns) {
            if (n < 2) throw ConfigError("n must be >= 2");
            const std::string sid = detail::scenario_id(kind, p, n);
            const ModelSpec model = family_model(grid.family, static_cast<std::size_t>(p));
            StatConfig cfg;
            cfg.stats = {grid.stat};
            cfg.prechange = grid.known ? Prechange::known_eta(default_prechange_eta(model)) : Prechange::unknown();
            if (kind != ExperimentKind::hullcount) cfg.validate(model);
            ThresholdPlan plan;
            if (kind == ExperimentKind::arl || kind == ExperimentKind::add)
                plan = analytic_arl_plan(cfg, p, grid.gamma);
            else if (kind == ExperimentKind::falsealarm)
                plan = analytic_fa_plan(cfg, p, grid.alpha);

            std::vector<ExperimentRecord> recs(static_cast<std::size_t>(replicates));
            const auto outcome = run_pool(recs.size(), workers, [&](std::size_t r) {
                auto& rec = recs[r];
                rec.scenario = sid;
                rec.replicate = r;
                rec.seed = grid.seed;
                rec.p = p;
                rec.n = n;
                rec.stat = grid.stat.name();
                if (kind == ExperimentKind::hullcount) {
                    rec.stat = "vertices";
                    rec.value = static_cast<double>(walk_hull_vertex_count(p, n, grid.seed, r));
                    rec.candidates = static_cast<std::size_t>(rec.value);
                    return;
                }
                StreamScenario sc;
                sc.model = model;
                sc.n = n;
                sc.seed = grid.seed;
                sc.stream = r;
                if (kind == ExperimentKind::add) {
                    sc.change_at = grid.change_at;
                    sc.magnitude = grid.magnitude;
                    sc.sparsity = grid.sparsity > 0 ? grid.sparsity : p;
                }
                StreamGenerator gen(sc);
                auto det = make_detector(model, cfg, grid.engine);
                std::vector<double> y;
                const std::int64_t warm = std::min(grid.warmup, n / 2);
                double secs = 0.0;
                for (std::int64_t t = 1; t <= n; ++t) {
                    gen.next(y);
                    const auto t0 = std::chrono::steady_clock::now();
                    const auto& rep = det.step_raw(y);
                    const auto t1 = std::chrono::steady_clock::now();
                    if (t > warm) secs += std::chrono::duration<double>(t1 - t0).count();
                    rec.value = rep.values[0].value;
                    if (kind == ExperimentKind::runtime_slope) continue;
                    const auto dec = decide(rep, cfg, plan);
                    if (dec.stop) {
                        rec.detection_time = t;
                        if (kind == ExperimentKind::add && t > grid.change_at) rec.delay = t - grid.change_at;
                        break;
                    }
                }
                rec.step_seconds = secs;
                rec.candidates = det.stored_count();
            });
            for (std::size_t r = 0; r < recs.size(); ++r) recs[r].error = outcome.errors[r];
            res.partial = res.partial || outcome.partial();

            std::vector<double> vals;
            auto push = [&](const std::string& metric, double v) { res.summary.push_back({sid, p, n, metric, v}); };
            switch (kind) {
                case ExperimentKind::hullcount: {
                    for (const auto& r : recs) vals.push_back(r.value);
                    const double m = detail::mean_of(vals), se = detail::se_of(vals);
                    const double ev = p <= 5 ? static_cast<double>(expected_counts(n, p).vertices) : std::nan("");
                    const double ev_exact =
                        p <= 5 ? static_cast<double>(expected_counts(n, p, StirlingZero::exact).vertices) : std::nan("");
                    push("mean_vertices", m);
                    push("se", se);
                    push("expected_vertices", ev);
                    push("expected_vertices_exact_zero", ev_exact);
                    push("z", se > 0 ? (m - ev) / se : 0.0);
                    break;
                }
                case ExperimentKind::runtime_slope: {
                    for (const auto& r : recs) vals.push_back(r.step_seconds);
                    const double m = detail::mean_of(vals);
                    push("mean_step_seconds", m);
                    push("se", detail::se_of(vals));
                    slope_x.push_back(std::log(static_cast<double>(n)));
                    slope_y.push_back(std::log(std::max(m, 1e-12)));
                    if (slope_x.size() >= 2 && n == grid.ns.back())
                        res.summary.push_back({"runtime_slope_p" + std::to_string(p), p, n, "slope",
                                               detail::ols_slope(slope_x, slope_y)});
                    break;
                }
                case ExperimentKind::arl: {
                    std::size_t stopped = 0;
                    for (const auto& r : recs) {
                        vals.push_back(static_cast<double>(r.detection_time.value_or(n)));
                        if (r.detection_time) ++stopped;
                    }
                    const double m = detail::mean_of(vals), se = detail::se_of(vals);
                    push("threshold", plan.get(grid.stat.name()).at(n));
                    push("mean_run_length_censored", m);
                    push("ci_low", m - 1.96 * se);
                    push("ci_high", m + 1.96 * se);
                    push("stopped_fraction", static_cast<double>(stopped) / recs.size());
                    break;
                }
                case ExperimentKind::add: {
                    std::size_t early = 0, missed = 0;
                    for (const auto& r : recs) {
                        if (r.delay) vals.push_back(static_cast<double>(*r.delay));
                        else if (r.detection_time) ++early;
                        else ++missed;
                    }
                    const double c = plan.get(grid.stat.name()).at(n);
                    const double m = detail::mean_of(vals), se = detail::se_of(vals);
                    push("threshold", c);
                    push("mean_delay", m);
                    push("ci_low", m - 1.96 * se);
                    push("ci_high", m + 1.96 * se);
                    push("add_bound", add_bound(c, grid.magnitude));
                    push("false_alarms", static_cast<double>(early));
                    push("missed", static_cast<double>(missed));
                    break;
                }
                case ExperimentKind::falsealarm: {
                    for (const auto& r : recs) vals.push_back(r.detection_time ? 1.0 : 0.0);
                    const double f = detail::mean_of(vals);
                    push("stop_fraction", f);
                    push("se", std::sqrt(grid.alpha * (1 - grid.alpha) / static_cast<double>(vals.size())));
                    push("alpha", grid.alpha);
                    break;
                }
            }
            res.records.insert(res.records.end(), recs.begin(), recs.end());
        }
    }
    return res;
}

inline void write_records_csv(std::ostream& os, const std::vector<ExperimentRecord>& recs) {
    os << "scenario,replicate,seed,p,n,stat,value,detection_time,delay,candidates,step_seconds,error\n";
    for (const auto& r : recs) {
        os << r.scenario << ',' << r.replicate << ',' << r.seed << ',' << r.p << ',' << r.n << ',' << r.stat << ','
           << r.value << ',';
        if (r.detection_time) os << *r.detection_time;
        os << ',';
        if (r.delay) os << *r.delay;
        os << ',' << r.candidates << ',' << r.step_seconds << ',' << r.error << '\n';
    }
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << "scenario,p,n,metric,value\n";
    for (const auto& s : rows) os << s.scenario << ',' << s.p << ',' << s.n << ',' << s.metric << ',' << s.value << '\n';
}

}  // namespace mdfocus

#endif
