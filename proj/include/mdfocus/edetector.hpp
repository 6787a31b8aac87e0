#ifndef MDFOCUS_EDETECTOR_HPP
#define MDFOCUS_EDETECTOR_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "hull.hpp"

namespace mdfocus {

struct EDetectorSpec {
    std::string name;
    std::function<double(double)> score;
    std::function<double(double)> variance;

    static EDetectorSpec winning_rate(double p0 = 0.49) {
        return {"winning-rate", [p0](double x) { return (x > 0 ? 1.0 : 0.0) - p0; }, [](double) { return 1.0; }};
    }

    // Raw integer score differences, rescaled to [0, 1] first.
    static EDetectorSpec plus_minus(double m = 0.494, double shift = 80.0, double scale = 160.0) {
        auto s = [=](double x) { return ((x + shift) / scale) / m - 1.0; };
        return {"plus-minus", s, [s](double x) {
                    const double v = s(x);
                    return v * v;
                }};
    }

    static EDetectorSpec preset(const std::string& name) {
        if (name == "winning-rate") return winning_rate();
        if (name == "plus-minus") return plus_minus();
        throw ConfigError("unknown e-detector preset '" + name + "'");
    }
};

// Points (sum of v, half sum of s) for tau = 0..n-1, label tau.
inline std::vector<HullPoint> edetector_points(const EDetectorSpec& spec, std::span<const double> stream) {
    if (stream.empty()) throw InputError("empty score stream");
    std::vector<HullPoint> pts;
    pts.reserve(stream.size());
    double a = 0.0, b = 0.0;
    for (std::size_t t = 0; t < stream.size(); ++t) {
        pts.push_back({static_cast<std::int64_t>(t), {a, b}});
        const double v = spec.variance(stream[t]);
        if (!(v >= 0.0)) throw InputError("variance map returned a negative value");
        a += v;
        b += 0.5 * spec.score(stream[t]);
    }
    return pts;
}

struct CusumValue {
    double value = -std::numeric_limits<double>::infinity();
    std::int64_t tau = -1;
};

// Prefix sums of lambda s - psi v, index t = sum over the first t observations.
inline std::vector<double> cusum_prefix(const EDetectorSpec& spec, std::span<const double> stream, double lambda,
                                        double psi) {
    std::vector<double> pre(stream.size() + 1, 0.0);
    for (std::size_t t = 0; t < stream.size(); ++t)
        pre[t + 1] = pre[t] + lambda * spec.score(stream[t]) - psi * spec.variance(stream[t]);
    return pre;
}

// max over tau < n of the sum over (tau, n]; ties go to the smallest tau.
inline CusumValue cusum_argmax(const EDetectorSpec& spec, std::span<const double> stream, double lambda, double psi,
                               std::optional<std::span<const std::int64_t>> restrict_to = {}) {
    if (stream.empty()) throw InputError("empty score stream");
    const auto pre = cusum_prefix(spec, stream, lambda, psi);
    const double total = pre.back();
    CusumValue best;
    auto consider = [&](std::int64_t tau) {
        const double v = total - pre[static_cast<std::size_t>(tau)];
        if (v > best.value) {
            best.value = v;
            best.tau = tau;
        }
    };
    if (restrict_to) {
        for (auto tau : *restrict_to) consider(tau);
    } else {
        for (std::int64_t tau = 0; tau < static_cast<std::int64_t>(stream.size()); ++tau) consider(tau);
    }
    return best;
}

inline double cusum_log_value(const EDetectorSpec& spec, std::span<const double> stream, double lambda,
                              const std::function<double(double)>& psi_of_lambda) {
    return cusum_argmax(spec, stream, lambda, psi_of_lambda(lambda)).value;
}

// Exponential baseline psi(l) = -log(1 - l) - l, defined for l < 1.
inline double psi_exponential(double lambda) {
    if (!(lambda < 1.0)) throw DomainError("psi_exponential needs lambda < 1");
    return -std::log1p(-lambda) - lambda;
}

// Online tracker of the exact hull vertex set of the e-detector points.
class EDetectorHull {
public:
    explicit EDetectorHull(EDetectorSpec spec, double tol = kDefaultHullTol) : spec_(std::move(spec)), tol_(tol) {}

    // Adds observation x_n and returns the vertex labels among tau < n.
    const VertexSet& push(double x) {
        pts_.push_back({n_, {a_, b_}});
        const double v = spec_.variance(x);
        if (!(v >= 0.0)) throw InputError("variance map returned a negative value");
        a_ += v;
        b_ += 0.5 * spec_.score(x);
        ++n_;
        vertices_ = hull_vertices(pts_, tol_);
        std::vector<HullPoint> kept;
        kept.reserve(vertices_.size());
        std::size_t j = 0;
        for (auto& p : pts_)
            if (j < vertices_.size() && p.label == vertices_[j]) {
                kept.push_back(std::move(p));
                ++j;
            }
        pts_ = std::move(kept);
        return vertices_;
    }

    std::int64_t n() const { return n_; }
    const VertexSet& vertices() const { return vertices_; }

private:
    EDetectorSpec spec_;
    double tol_;
    std::int64_t n_ = 0;
    double a_ = 0.0, b_ = 0.0;
    std::vector<HullPoint> pts_;
    VertexSet vertices_;
};

}  // namespace mdfocus

#endif
