#ifndef MDFOCUS_STATISTICS_HPP
#define MDFOCUS_STATISTICS_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "model.hpp"

namespace mdfocus {

enum class StatKind { dense, ranked, thresholded, sum_of_max };

struct StatSpec {
    StatKind kind = StatKind::dense;
    int s = 0;       // ranked
    double a = 0.0;  // thresholded

    static StatSpec dense() { return {StatKind::dense}; }
    static StatSpec ranked(int s) { return {StatKind::ranked, s}; }
    static StatSpec thresholded(double a) { return {StatKind::thresholded, 0, a}; }
    static StatSpec sum_of_max() { return {StatKind::sum_of_max}; }

    std::string name() const {
        switch (kind) {
            case StatKind::dense: return "dense";
            case StatKind::ranked: return "ranked:" + std::to_string(s);
            case StatKind::thresholded: {
                char buf[64];
                auto r = std::to_chars(buf, buf + sizeof buf, a);
                return "thresholded:" + std::string(buf, r.ptr);
            }
            case StatKind::sum_of_max: return "sum_of_max";
        }
        return "?";
    }

    // Inverse of name().
    static StatSpec parse(std::string_view text) {
        if (text == "dense") return dense();
        if (text == "sum_of_max") return sum_of_max();
        const auto colon = text.find(':');
        if (colon == std::string_view::npos) throw ConfigError("unknown statistic '" + std::string(text) + "'");
        const auto head = text.substr(0, colon), arg = text.substr(colon + 1);
        if (head == "ranked") {
            int s = 0;
            auto r = std::from_chars(arg.data(), arg.data() + arg.size(), s);
            if (r.ec != std::errc() || r.ptr != arg.data() + arg.size())
                throw ConfigError("bad ranked level in '" + std::string(text) + "'");
            return ranked(s);
        }
        if (head == "thresholded") {
            double a = 0;
            auto r = std::from_chars(arg.data(), arg.data() + arg.size(), a);
            if (r.ec != std::errc() || r.ptr != arg.data() + arg.size())
                throw ConfigError("bad threshold level in '" + std::string(text) + "'");
            return thresholded(a);
        }
        throw ConfigError("unknown statistic '" + std::string(text) + "'");
    }

    bool operator==(const StatSpec&) const = default;
};

struct Prechange {
    bool known = false;
    std::vector<double> eta;  // natural parameter when known

    static Prechange unknown() { return {}; }
    static Prechange known_eta(std::vector<double> eta) { return {true, std::move(eta)}; }
};

struct StatConfig {
    std::vector<StatSpec> stats{StatSpec::dense()};
    Prechange prechange;

    void validate(const ModelSpec& model) const {
        if (stats.empty()) throw ConfigError("no statistics configured");
        std::set<std::string> names;
        const bool gmv = model.any_of(Family::gaussian_mean_variance);
        for (const auto& st : stats) {
            if (!names.insert(st.name()).second) throw ConfigError("duplicate statistic " + st.name());
            if (st.kind == StatKind::ranked && (st.s < 1 || static_cast<std::size_t>(st.s) > model.p()))
                throw ConfigError("ranked level " + std::to_string(st.s) + " outside [1, p]");
            if (st.kind == StatKind::thresholded && !(st.a >= 0.0 && std::isfinite(st.a)))
                throw ConfigError("thresholded level must be a finite a >= 0");
            if (gmv && st.kind != StatKind::dense)
                throw ConfigError("gaussian_mean_variance admits only the dense statistic");
        }
        if (prechange.known) {
            try {
                check_eta(model, prechange.eta);
            } catch (const Error& e) {
                throw ConfigError(std::string("known pre-change parameter: ") + e.what());
            }
        }
    }

    std::int64_t first_label() const { return prechange.known ? 0 : 1; }
};

struct StatValue {
    double value = 0.0;
    std::optional<std::int64_t> tau;
    std::vector<double> evidences;  // per-coordinate squared evidences at tau
};

struct StatisticReport {
    std::int64_t n = 0;
    std::vector<StatValue> values;  // aligned with StatConfig::stats
    std::size_t candidates = 0;
};

// Prefix sums of the evidences sorted in decreasing order, read at each level.
inline std::vector<double> ranked_values(std::span<const double> evidences, std::span<const int> s_levels) {
    for (double e : evidences)
        if (!std::isfinite(e)) throw InputError("non-finite evidence");
    for (int s : s_levels)
        if (s < 1 || static_cast<std::size_t>(s) > evidences.size())
            throw ConfigError("ranked level " + std::to_string(s) + " outside [1, p]");
    std::vector<double> sorted(evidences.begin(), evidences.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    for (std::size_t i = 1; i < sorted.size(); ++i) sorted[i] += sorted[i - 1];
    std::vector<double> out;
    out.reserve(s_levels.size());
    for (int s : s_levels) out.push_back(sorted[static_cast<std::size_t>(s) - 1]);
    return out;
}

// Ascending candidate labels with their cumulative sums (stride d_nat).
struct CandidateView {
    std::span<const std::int64_t> labels;
    const double* cums = nullptr;
};

// Maximizes every configured statistic over a candidate set.
class GlrEvaluator {
public:
    GlrEvaluator(const ModelSpec& model, const StatConfig& cfg) : model_(model), cfg_(cfg) {
        cfg_.validate(model_);
        p_ = model_.p();
        gaussian_ = model_.all_of(Family::gaussian_mean);
        g_.resize(p_);
        sorted_.resize(p_);
        total_.resize(p_);
        colmax_.resize(p_);
        coltau_.resize(p_);
        for (const auto& st : cfg_.stats)
            if (st.kind == StatKind::ranked) any_ranked_ = true;
    }

    void evaluate(std::int64_t n, const double* running, const CandidateView& cand, StatisticReport& out) {
        const std::size_t K = cfg_.stats.size();
        out.n = n;
        out.values.resize(K);
        for (auto& v : out.values) {
            v.value = -std::numeric_limits<double>::infinity();
            v.tau.reset();
            v.evidences.assign(p_, 0.0);
        }
        std::fill(colmax_.begin(), colmax_.end(), -std::numeric_limits<double>::infinity());
        std::fill(coltau_.begin(), coltau_.end(), -1);
        const double nd = static_cast<double>(n);
        if (!cfg_.prechange.known && !gaussian_)
            for (std::size_t i = 0; i < p_; ++i)
                total_[i] = coord_maxloglik(model_.coord(i), nd, running + model_.offset(i));

        const std::size_t d = model_.d_nat();
        bool any = false;
        for (std::size_t c = 0; c < cand.labels.size(); ++c) {
            const std::int64_t tau = cand.labels[c];
            if (tau >= n || tau < cfg_.first_label()) continue;
            any = true;
            contributions(n, tau, running, cand.cums + c * d);
            if (any_ranked_) {
                std::copy(g_.begin(), g_.end(), sorted_.begin());
                std::sort(sorted_.begin(), sorted_.end(), std::greater<>());
                for (std::size_t i = 1; i < p_; ++i) sorted_[i] += sorted_[i - 1];
            }
            for (std::size_t k = 0; k < K; ++k) {
                const auto& st = cfg_.stats[k];
                double v = 0.0;
                switch (st.kind) {
                    case StatKind::dense:
                        for (double g : g_) v += g;
                        break;
                    case StatKind::ranked: v = sorted_[static_cast<std::size_t>(st.s) - 1]; break;
                    case StatKind::thresholded: {
                        const double a2 = st.a * st.a;
                        for (double g : g_)
                            if (g >= a2) v += g;
                        break;
                    }
                    case StatKind::sum_of_max: continue;
                }
                auto& best = out.values[k];
                if (v > best.value) {
                    best.value = v;
                    best.tau = tau;
                    std::copy(g_.begin(), g_.end(), best.evidences.begin());
                }
            }
            for (std::size_t i = 0; i < p_; ++i)
                if (g_[i] > colmax_[i]) {
                    colmax_[i] = g_[i];
                    coltau_[i] = tau;
                }
        }

        for (std::size_t k = 0; k < K; ++k) {
            auto& best = out.values[k];
            if (!any) {
                best.value = 0.0;
                continue;
            }
            if (cfg_.stats[k].kind != StatKind::sum_of_max) continue;
            double v = 0.0;
            std::size_t lead = 0;
            for (std::size_t i = 0; i < p_; ++i) {
                v += colmax_[i];
                if (colmax_[i] > colmax_[lead]) lead = i;
            }
            best.value = v;
            best.tau = coltau_[lead];
            best.evidences.assign(colmax_.begin(), colmax_.end());
        }
    }

    const StatConfig& config() const { return cfg_; }

private:
    void contributions(std::int64_t n, std::int64_t tau, const double* running, const double* cum) {
        const double cpost = static_cast<double>(n - tau);
        const double tauf = static_cast<double>(tau);
        const bool known = cfg_.prechange.known;
        if (gaussian_) {
            if (known) {
                for (std::size_t i = 0; i < p_; ++i) {
                    const double e = running[i] - cum[i] - cpost * cfg_.prechange.eta[i];
                    g_[i] = e * e / cpost;
                }
            } else {
                const double w = tauf * cpost / static_cast<double>(n);
                for (std::size_t i = 0; i < p_; ++i) {
                    const double e = (running[i] - cum[i]) / cpost - cum[i] / tauf;
                    g_[i] = e * e * w;
                }
            }
            return;
        }
        double post[2];
        for (std::size_t i = 0; i < p_; ++i) {
            const auto& cm = model_.coord(i);
            const std::size_t o = model_.offset(i);
            for (std::size_t k = 0; k < cm.width(); ++k) post[k] = running[o + k] - cum[o + k];
            double g;
            if (known) {
                g = coord_maxloglik(cm, cpost, post) - coord_loglik_at(cm, cpost, post, cfg_.prechange.eta.data() + o);
            } else {
                g = coord_maxloglik(cm, tauf, cum + o) + coord_maxloglik(cm, cpost, post) - total_[i];
            }
            g_[i] = g > 0.0 ? g : 0.0;
        }
    }

    ModelSpec model_;
    StatConfig cfg_;
    std::size_t p_ = 0;
    bool gaussian_ = false;
    bool any_ranked_ = false;
    std::vector<double> g_, sorted_, total_, colmax_;
    std::vector<std::int64_t> coltau_;
};

}  // namespace mdfocus

#endif
