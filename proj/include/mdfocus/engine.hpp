#ifndef MDFOCUS_ENGINE_HPP
#define MDFOCUS_ENGINE_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "detector.hpp"
#include "dyadic.hpp"
#include "projapprox.hpp"

namespace mdfocus {

enum class EngineKind { exact, dyadic, approx };

inline std::string engine_name(EngineKind k) {
    switch (k) {
        case EngineKind::exact: return "exact";
        case EngineKind::dyadic: return "dyadic";
        case EngineKind::approx: return "approx";
    }
    return "?";
}

inline EngineKind parse_engine(const std::string& s) {
    if (s == "exact") return EngineKind::exact;
    if (s == "dyadic") return EngineKind::dyadic;
    if (s == "approx") return EngineKind::approx;
    throw ConfigError("unknown engine '" + s + "'");
}

struct EngineConfig {
    EngineKind kind = EngineKind::exact;
    double alpha = 2.0;
    double beta = 1.0;
    std::size_t max_size = 0;  // 0: d_nat + 2
    int q_min = 0;             // 0: p + 5
    std::size_t p_tilde = 2;
    std::vector<std::vector<std::size_t>> subsets;  // empty: consecutive blocks
    double tol = kDefaultHullTol;
};

// Runtime choice among the three candidate-maintenance engines.
class AnyDetector {
public:
    using Variant = std::variant<ExactDetector, DyadicDetector, ApproxDetector>;

    explicit AnyDetector(Variant v) : v_(std::move(v)) {}

    const StatisticReport& step(std::span<const double> x) {
        return std::visit([&](auto& d) -> const StatisticReport& { return d.step(x); }, v_);
    }
    const StatisticReport& step_raw(std::span<const double> y) {
        return std::visit([&](auto& d) -> const StatisticReport& { return d.step_raw(y); }, v_);
    }
    std::int64_t n() const {
        return std::visit([](const auto& d) { return d.n(); }, v_);
    }
    const StatisticReport& last() const {
        return std::visit([](const auto& d) -> const StatisticReport& { return d.last(); }, v_);
    }
    const ModelSpec& model() const {
        return std::visit([](const auto& d) -> const ModelSpec& { return d.model(); }, v_);
    }
    const StatConfig& config() const {
        return std::visit([](const auto& d) -> const StatConfig& { return d.config(); }, v_);
    }
    std::vector<std::int64_t> candidates() {
        return std::visit([](auto& d) { return std::vector<std::int64_t>(d.store().labels()); }, v_);
    }
    // Labels physically held (per-subset copies counted for the approximation).
    std::size_t stored_count() {
        if (auto* a = std::get_if<ApproxDetector>(&v_)) return a->store().total_stored();
        return candidates().size();
    }
    Variant& variant() { return v_; }

private:
    Variant v_;
};

inline AnyDetector make_detector(const ModelSpec& model, const StatConfig& cfg, const EngineConfig& ec) {
    cfg.validate(model);
    switch (ec.kind) {
        case EngineKind::exact:
            return AnyDetector(make_exact_detector(model, cfg, Schedule{ec.alpha, ec.beta, ec.max_size}, ec.tol));
        case EngineKind::dyadic: return AnyDetector(make_dyadic_detector(model, cfg, ec.q_min, ec.tol));
        case EngineKind::approx: {
            ProjectionPlan plan;
            if (ec.subsets.empty()) {
                plan = default_plan(model.d_nat(), std::min(ec.p_tilde, model.d_nat()));
            } else {
                plan.subsets = ec.subsets;
                plan.p_tilde = ec.p_tilde;
            }
            return AnyDetector(make_approx_detector(model, cfg, plan, ec.alpha, ec.beta, ec.tol));
        }
    }
    throw ConfigError("unknown engine");
}

}  // namespace mdfocus

#endif
