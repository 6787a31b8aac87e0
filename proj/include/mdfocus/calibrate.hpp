#ifndef MDFOCUS_CALIBRATE_HPP
#define MDFOCUS_CALIBRATE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "statistics.hpp"

namespace mdfocus {

// Fixed threshold for an average run length of at least gamma when m
// sparsity levels are monitored together.
inline double arl_threshold(int s, int p, double gamma, int m) {
    if (s < 1 || s > p) throw ConfigError("sparsity s must lie in [1, p]");
    if (!(gamma > 1.0)) throw ConfigError("gamma must be > 1");
    if (m < 1) throw ConfigError("m must be >= 1");
    double zeta = 4.0 * std::log(gamma) + std::log(static_cast<double>(m)) + 5.0 * std::numbers::ln2;
    if (s != p) zeta += s * std::log(static_cast<double>(p));
    return s + 2.0 * zeta + 2.0 * std::sqrt(s * zeta);
}

enum class FaKind { rank1, rank_s, dense, thresholded };

inline std::string fa_kind_name(FaKind k) {
    switch (k) {
        case FaKind::rank1: return "rank1";
        case FaKind::rank_s: return "rank_s";
        case FaKind::dense: return "dense";
        case FaKind::thresholded: return "thresholded";
    }
    return "?";
}

inline FaKind parse_fa_kind(const std::string& s) {
    if (s == "rank1") return FaKind::rank1;
    if (s == "rank_s") return FaKind::rank_s;
    if (s == "dense") return FaKind::dense;
    if (s == "thresholded") return FaKind::thresholded;
    throw ConfigError("unknown false-alarm kind '" + s + "'");
}

inline double log_binomial(int p, int s) {
    return std::lgamma(p + 1.0) - std::lgamma(s + 1.0) - std::lgamma(p - s + 1.0);
}

// Time-varying threshold c_n(alpha) controlling the probability of ever
// stopping under no change. n is a real so it can be evaluated off the grid.
inline double false_alarm_threshold(FaKind kind, int s, double a, int p, double n, double alpha) {
    if (p < 1) throw ConfigError("p must be >= 1");
    if (!(n >= 2.0)) throw ConfigError("n must be >= 2");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
    const double x = 4.0 * std::log(n) - std::log(alpha);
    switch (kind) {
        case FaKind::rank1: return 2.0 * x + 2.0 * std::log(2.0 * p);
        case FaKind::dense: s = p; [[fallthrough]];
        case FaKind::rank_s: {
            if (s < 1 || s > p) throw ConfigError("sparsity s must lie in [1, p]");
            const double y = x + log_binomial(p, s);
            return 2.0 * y + 2.0 * std::sqrt(s * y) + s;
        }
        case FaKind::thresholded:
            if (!(a >= 0.0)) throw ConfigError("thresholded level must be >= 0");
            return 4.0 * x + 6.0 * p * std::exp(-a * a / 8.0);
    }
    return 0.0;
}

inline double add_bound(double c, double delta_norm2, std::optional<double> thresholded_a = {}, int p = 1) {
    if (!(delta_norm2 > 0.0)) throw InfiniteDelay("change of zero size has no finite delay bound");
    if (!(c >= 0.0)) throw ConfigError("threshold must be >= 0");
    if (thresholded_a) c += p * (*thresholded_a) * (*thresholded_a);
    return (c + std::sqrt(delta_norm2) * std::sqrt(8.0 / std::numbers::pi)) / delta_norm2 + 1.0;
}

// centered_wide uses 4 sqrt(p log(3/alpha)) in place of 2 sqrt(...).
enum class DelayVariant { basic, centered, centered_wide };

inline double dd_bound(double c, int p_or_s, double delta_norm2, double alpha, DelayVariant variant = DelayVariant::basic) {
    if (!(delta_norm2 > 0.0)) throw InfiniteDelay("change of zero size has no finite delay bound");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (variant == DelayVariant::basic) return (2.0 * c - 8.0 * std::log(alpha / 2.0)) / delta_norm2;
    if (!(c > p_or_s)) throw ConfigError("centered delay bound requires c > p");
    const double k = variant == DelayVariant::centered ? 2.0 : 4.0;
    return (2.0 * (c - p_or_s) + k * std::sqrt(p_or_s * std::log(3.0 / alpha)) - 8.0 * std::log(alpha / 3.0)) /
           delta_norm2;
}

// Smallest z in {1, 2, 4, ..} with at least z coordinates above ||delta|| / (z log2 p).
inline int effective_sparsity(std::span<const double> delta) {
    const std::size_t p = delta.size();
    if (p == 0) throw ConfigError("empty change vector");
    double n2 = 0.0;
    for (double v : delta) n2 += v * v;
    const double norm = std::sqrt(n2);
    const double lp = p > 1 ? std::log2(static_cast<double>(p)) : 1.0;
    int z = 1;
    while (static_cast<std::size_t>(z) <= p) {
        std::size_t count = 0;
        for (double v : delta)
            if (std::fabs(v) > norm / (z * lp)) ++count;
        if (count >= static_cast<std::size_t>(z)) return z;
        if (static_cast<std::size_t>(2 * z) > p) break;
        z *= 2;
    }
    return z;
}

// Delay bound of the thresholded statistic through the effective sparsity.
inline double dd_bound_thresholded(double c, double a, std::span<const double> delta, double alpha) {
    double n2 = 0.0;
    for (double v : delta) n2 += v * v;
    if (!(n2 > 0.0)) throw InfiniteDelay("change of zero size has no finite delay bound");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    const int z = effective_sparsity(delta);
    const double lp = delta.size() > 1 ? std::log2(static_cast<double>(delta.size())) : 1.0;
    const double tail = -8.0 * std::log(alpha) + 8.0 * std::log(2.0 * (z + 1));
    return lp * std::max((2.0 * c + tail) / n2, (2.0 * a * a + tail) / (n2 / z));
}

struct FixedThreshold {
    double c = 0.0;
};

struct TimeVaryingThreshold {
    FaKind kind = FaKind::dense;
    int s = 0;
    double a = 0.0;
    int p = 1;
    double alpha = 0.05;

    double at(std::int64_t n) const {
        return false_alarm_threshold(kind, s, a, p, static_cast<double>(std::max<std::int64_t>(n, 2)), alpha);
    }
};

struct Threshold {
    std::variant<FixedThreshold, TimeVaryingThreshold> rule;

    double at(std::int64_t n) const {
        if (const auto* f = std::get_if<FixedThreshold>(&rule)) return f->c;
        return std::get<TimeVaryingThreshold>(rule).at(n);
    }
};

struct Provenance {
    std::string mode = "user";  // arl | false_alarm | monte_carlo | user
    std::optional<double> gamma;
    std::optional<double> alpha;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicates;
    std::optional<std::int64_t> horizon;
    std::optional<double> level;
};

class ThresholdPlan {
public:
    void set(const std::string& stat, Threshold t) {
        if (const auto* f = std::get_if<FixedThreshold>(&t.rule); f && !(f->c >= 0.0))
            throw ConfigError("threshold for " + stat + " must be >= 0");
        entries_[stat] = t;
    }
    void set_fixed(const std::string& stat, double c) { set(stat, {FixedThreshold{c}}); }

    const Threshold* find(const std::string& stat) const {
        auto it = entries_.find(stat);
        return it == entries_.end() ? nullptr : &it->second;
    }
    const Threshold& get(const std::string& stat) const {
        const auto* t = find(stat);
        if (!t) throw ConfigError("threshold plan has no entry for statistic " + stat);
        return *t;
    }

    void require(const StatConfig& cfg) const {
        for (const auto& st : cfg.stats) get(st.name());
    }

    const std::map<std::string, Threshold>& entries() const { return entries_; }
    Provenance provenance;

private:
    std::map<std::string, Threshold> entries_;
};

// Number of sparsity levels (ranked + dense) monitored by a configuration.
inline int sparsity_level_count(const StatConfig& cfg) {
    int m = 0;
    for (const auto& st : cfg.stats)
        if (st.kind == StatKind::ranked || st.kind == StatKind::dense) ++m;
    return std::max(m, 1);
}

inline ThresholdPlan analytic_arl_plan(const StatConfig& cfg, int p, double gamma) {
    ThresholdPlan plan;
    plan.provenance.mode = "arl";
    plan.provenance.gamma = gamma;
    const int m = sparsity_level_count(cfg);
    for (const auto& st : cfg.stats) {
        switch (st.kind) {
            case StatKind::dense: plan.set_fixed(st.name(), arl_threshold(p, p, gamma, m)); break;
            case StatKind::ranked: plan.set_fixed(st.name(), arl_threshold(st.s, p, gamma, m)); break;
            case StatKind::thresholded: {
                // horizon 2 gamma at level 1/2, split over the monitored levels
                const double x = 4.0 * std::log(2.0 * gamma) + std::log(2.0) + std::log(static_cast<double>(m));
                plan.set_fixed(st.name(), 4.0 * x + 6.0 * p * std::exp(-st.a * st.a / 8.0));
                break;
            }
            case StatKind::sum_of_max:
                throw ConfigError("analytic-arl calibration does not cover sum_of_max; use monte-carlo");
        }
    }
    return plan;
}

inline ThresholdPlan analytic_fa_plan(const StatConfig& cfg, int p, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    ThresholdPlan plan;
    plan.provenance.mode = "false_alarm";
    plan.provenance.alpha = alpha;
    for (const auto& st : cfg.stats) {
        TimeVaryingThreshold tv;
        tv.p = p;
        tv.alpha = alpha;
        switch (st.kind) {
            case StatKind::dense: tv.kind = FaKind::dense; break;
            case StatKind::ranked:
                tv.kind = st.s == 1 ? FaKind::rank1 : FaKind::rank_s;
                tv.s = st.s;
                break;
            case StatKind::thresholded:
                tv.kind = FaKind::thresholded;
                tv.a = st.a;
                break;
            case StatKind::sum_of_max:
                throw ConfigError("analytic-fa calibration does not cover sum_of_max; use monte-carlo");
        }
        plan.set(st.name(), {tv});
    }
    return plan;
}

}  // namespace mdfocus

#endif
