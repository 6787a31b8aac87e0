#ifndef MDFOCUS_DETECTOR_HPP
#define MDFOCUS_DETECTOR_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calibrate.hpp"
#include "error.hpp"
#include "hull.hpp"
#include "model.hpp"
#include "statistics.hpp"

namespace mdfocus {

struct Schedule {
    double alpha = 2.0;
    double beta = 1.0;
    std::size_t initial_max_size = 0;  // 0: dimension + 2
};

struct RebuildEvent {
    std::int64_t n = 0;
    std::vector<std::int64_t> before;
    VertexSet after;
};

// Candidate list with the lazy alpha/beta rebuild schedule. Hull tests use
// the point (tau, cum[projection]); the full cumulative sum is kept for
// statistic evaluation.
class LazyHullStore {
public:
    LazyHullStore(std::size_t d_nat, Schedule sched = {}, std::vector<std::size_t> projection = {},
                  double tol = kDefaultHullTol)
        : d_(d_nat), sched_(sched), proj_(std::move(projection)), tol_(tol) {
        if (proj_.empty())
            for (std::size_t k = 0; k < d_; ++k) proj_.push_back(k);
        for (auto k : proj_)
            if (k >= d_) throw ConfigError("projection coordinate out of range");
        if (!(sched_.alpha >= 1.0)) throw ConfigError("alpha must be >= 1");
        if (!(sched_.beta >= 0.0)) throw ConfigError("beta must be >= 0");
        max_size_ = sched_.initial_max_size ? sched_.initial_max_size : proj_.size() + 2;
        if (max_size_ <= proj_.size() + 1) throw ConfigError("initial maxSize must exceed dimension + 1");
    }

    void insert(std::int64_t label, const double* cum) {
        if (!labels_.empty() && label <= labels_.back()) throw InvariantViolation("candidate labels must increase");
        labels_.push_back(label);
        cums_.insert(cums_.end(), cum, cum + d_);
    }

    void maintain(std::int64_t n) {
        if (labels_.size() > max_size_) rebuild(n);
    }

    void rebuild(std::int64_t n) {
        PointSet pts(proj_.size() + 1);
        pts.reserve(labels_.size());
        std::vector<double> buf(proj_.size() + 1);
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            buf[0] = static_cast<double>(labels_[i]);
            for (std::size_t k = 0; k < proj_.size(); ++k) buf[k + 1] = cums_[i * d_ + proj_[k]];
            pts.push_back(labels_[i], buf.data());
        }
        VertexSet keep = hull_vertices(pts, tol_);
        if (observer_) observer_({n, labels_, keep});
        std::size_t w = 0, j = 0;
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (j < keep.size() && keep[j] == labels_[i]) {
                if (w != i) {
                    labels_[w] = labels_[i];
                    std::copy_n(cums_.begin() + static_cast<std::ptrdiff_t>(i * d_), d_,
                                cums_.begin() + static_cast<std::ptrdiff_t>(w * d_));
                }
                ++w;
                ++j;
            }
        }
        labels_.resize(w);
        cums_.resize(w * d_);
        max_size_ = static_cast<std::size_t>(std::floor(sched_.alpha * static_cast<double>(w) + sched_.beta));
        ++rebuilds_;
    }

    CandidateView view() const { return {labels_, cums_.data()}; }
    std::size_t size() const { return labels_.size(); }
    std::size_t max_size() const { return max_size_; }
    std::size_t rebuilds() const { return rebuilds_; }
    std::size_t d_nat() const { return d_; }
    const std::vector<std::int64_t>& labels() const { return labels_; }
    const std::vector<double>& cums() const { return cums_; }
    const std::vector<std::size_t>& projection() const { return proj_; }
    const Schedule& schedule() const { return sched_; }

    void set_observer(std::function<void(const RebuildEvent&)> f) { observer_ = std::move(f); }

private:
    std::size_t d_;
    Schedule sched_;
    std::vector<std::size_t> proj_;
    double tol_;
    std::size_t max_size_ = 0;
    std::size_t rebuilds_ = 0;
    std::vector<std::int64_t> labels_;
    std::vector<double> cums_;
    std::function<void(const RebuildEvent&)> observer_;
};

// Online state machine for one stream. Store supplies insert/view/maintain/size.
template <class Store>
class BasicDetector {
public:
    BasicDetector(ModelSpec model, StatConfig cfg, Store store)
        : model_(std::move(model)), cfg_(std::move(cfg)), store_(std::move(store)), eval_(model_, cfg_),
          running_(model_.d_nat(), 0.0) {}

    // x is a natural-statistic vector.
    const StatisticReport& step(std::span<const double> x) {
        if (x.size() != model_.d_nat())
            throw InputError("observation has dimension " + std::to_string(x.size()) + ", expected " +
                             std::to_string(model_.d_nat()));
        for (double v : x)
            if (!std::isfinite(v)) throw InputError("non-finite observation");
        ++n_;
        if (n_ - 1 >= cfg_.first_label()) store_.insert(n_ - 1, running_.data());
        for (std::size_t k = 0; k < x.size(); ++k) running_[k] += x[k];
        eval_.evaluate(n_, running_.data(), store_.view(), report_);
        store_.maintain(n_);
        report_.candidates = store_.size();
        return report_;
    }

    // y is a raw observation; mapped through the model first.
    const StatisticReport& step_raw(std::span<const double> y) {
        const auto x = to_natural(model_, y);
        return step(x);
    }

    std::int64_t n() const { return n_; }
    const StatisticReport& last() const { return report_; }
    const Store& store() const { return store_; }
    Store& store() { return store_; }
    const ModelSpec& model() const { return model_; }
    const StatConfig& config() const { return cfg_; }
    const std::vector<double>& running_sum() const { return running_; }

private:
    ModelSpec model_;
    StatConfig cfg_;
    Store store_;
    GlrEvaluator eval_;
    std::vector<double> running_;
    std::int64_t n_ = 0;
    StatisticReport report_;
};

using ExactDetector = BasicDetector<LazyHullStore>;

inline ExactDetector make_exact_detector(const ModelSpec& model, const StatConfig& cfg, Schedule sched = {},
                                         double tol = kDefaultHullTol) {
    if (!sched.initial_max_size) sched.initial_max_size = model.d_nat() + 2;
    return ExactDetector(model, cfg, LazyHullStore(model.d_nat(), sched, {}, tol));
}

struct Decision {
    bool stop = false;
    std::int64_t n = 0;
    std::size_t stat_index = 0;
    std::string stat;
    std::optional<std::int64_t> tau_hat;
    double value = 0.0;
    double threshold = 0.0;
};

inline Decision decide(const StatisticReport& report, const StatConfig& cfg, const ThresholdPlan& plan) {
    if (report.values.size() != cfg.stats.size()) throw InputError("report does not match configuration");
    Decision d;
    d.n = report.n;
    for (std::size_t k = 0; k < cfg.stats.size(); ++k) {
        const auto name = cfg.stats[k].name();
        const double c = plan.get(name).at(report.n);
        const auto& v = report.values[k];
        if (!d.stop && v.value >= c) {
            d.stop = true;
            d.stat_index = k;
            d.stat = name;
            d.tau_hat = v.tau;
            d.value = v.value;
            d.threshold = c;
        }
    }
    return d;
}

}  // namespace mdfocus

#endif
