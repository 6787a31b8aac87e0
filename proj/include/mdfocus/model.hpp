#ifndef MDFOCUS_MODEL_HPP
#define MDFOCUS_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace mdfocus {

enum class Family {
    gaussian_mean,
    poisson,
    binomial,
    exponential,
    pareto,
    gaussian_mean_variance,
};

inline std::string_view family_name(Family f) {
    switch (f) {
        case Family::gaussian_mean: return "gaussian";
        case Family::poisson: return "poisson";
        case Family::binomial: return "binomial";
        case Family::exponential: return "exponential";
        case Family::pareto: return "pareto";
        case Family::gaussian_mean_variance: return "gaussian_mean_variance";
    }
    return "?";
}

inline Family parse_family(std::string_view s) {
    if (s == "gaussian" || s == "gaussian_mean") return Family::gaussian_mean;
    if (s == "poisson") return Family::poisson;
    if (s == "binomial") return Family::binomial;
    if (s == "exponential") return Family::exponential;
    if (s == "pareto" || s == "pareto1") return Family::pareto;
    if (s == "gaussian_mean_variance" || s == "gmv") return Family::gaussian_mean_variance;
    throw ConfigError("unknown family '" + std::string(s) + "'");
}

// One observed coordinate and its fixed parameters.
struct CoordModel {
    Family family = Family::gaussian_mean;
    int trials = 1;          // binomial m
    double ym = 1.0;         // pareto scale
    double var_floor = 1.0;  // gaussian mean+variance

    std::size_t width() const { return family == Family::gaussian_mean_variance ? 2 : 1; }

    void validate() const {
        if (family == Family::binomial && trials < 1)
            throw ConfigError("binomial trials must be >= 1");
        if (family == Family::pareto && !(ym > 0.0 && std::isfinite(ym)))
            throw ConfigError("pareto y_m must be positive");
        if (family == Family::gaussian_mean_variance && !(var_floor > 0.0 && std::isfinite(var_floor)))
            throw ConfigError("var_floor must be positive");
    }

    bool operator==(const CoordModel&) const = default;
};

class ModelSpec {
public:
    ModelSpec() = default;

    explicit ModelSpec(std::vector<CoordModel> coords) : coords_(std::move(coords)) {
        if (coords_.empty()) throw ConfigError("model needs at least one coordinate");
        offsets_.reserve(coords_.size());
        for (const auto& c : coords_) {
            c.validate();
            offsets_.push_back(d_nat_);
            d_nat_ += c.width();
        }
    }

    static ModelSpec uniform(std::size_t p, CoordModel proto) {
        return ModelSpec(std::vector<CoordModel>(p, proto));
    }
    static ModelSpec gaussian(std::size_t p) { return uniform(p, {Family::gaussian_mean}); }
    static ModelSpec poisson(std::size_t p) { return uniform(p, {Family::poisson}); }

    std::size_t p() const { return coords_.size(); }
    std::size_t d_nat() const { return d_nat_; }
    const CoordModel& coord(std::size_t i) const { return coords_[i]; }
    std::size_t offset(std::size_t i) const { return offsets_[i]; }
    const std::vector<CoordModel>& coords() const { return coords_; }

    bool all_of(Family f) const {
        for (const auto& c : coords_)
            if (c.family != f) return false;
        return true;
    }
    bool any_of(Family f) const {
        for (const auto& c : coords_)
            if (c.family == f) return true;
        return false;
    }

    bool operator==(const ModelSpec& o) const { return coords_ == o.coords_; }

private:
    std::vector<CoordModel> coords_;
    std::vector<std::size_t> offsets_;
    std::size_t d_nat_ = 0;
};

struct SegmentSummary {
    std::int64_t count = 0;
    std::vector<double> sums;
};

// Clamp applied to exponential/pareto mean estimates before logs.
inline constexpr double kMeanClamp = 1e-12;

namespace detail {

inline double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

inline double softplus(double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace detail

// Natural parameter of a coordinate is inside the family's domain.
inline bool coord_eta_admissible(const CoordModel& m, const double* eta) {
    switch (m.family) {
        case Family::exponential: return std::isfinite(eta[0]) && eta[0] < 0.0;
        case Family::pareto: return std::isfinite(eta[0]) && eta[0] < -1.0;
        case Family::gaussian_mean_variance:
            return std::isfinite(eta[0]) && std::isfinite(eta[1]) && eta[1] < 0.0;
        default: return std::isfinite(eta[0]);
    }
}

// 2<S,eta> - c A'(eta) for one coordinate, eta assumed admissible.
inline double coord_loglik_at(const CoordModel& m, double c, const double* s, const double* eta) {
    const double e = eta[0];
    switch (m.family) {
        case Family::gaussian_mean: return 2.0 * s[0] * e - c * e * e;
        case Family::poisson: return 2.0 * s[0] * e - c * 2.0 * std::exp(e);
        case Family::binomial: return 2.0 * s[0] * e - c * 2.0 * m.trials * detail::softplus(e);
        case Family::exponential: return 2.0 * s[0] * e + c * 2.0 * std::log(-e);
        case Family::pareto:
            return 2.0 * s[0] * e + c * (2.0 * std::log(-1.0 - e) - 2.0 * (1.0 + e) * std::log(m.ym));
        case Family::gaussian_mean_variance: {
            const double theta2 = -1.0 / (2.0 * eta[1]);
            const double theta1 = e * theta2;
            return 2.0 * (s[0] * e + s[1] * eta[1]) - c * (theta1 * theta1 / theta2 + std::log(theta2));
        }
    }
    return 0.0;
}

// Supremum over the parameter of coord_loglik_at (constrained by clamps/floors).
inline double coord_maxloglik(const CoordModel& m, double c, const double* s) {
    switch (m.family) {
        case Family::gaussian_mean: return s[0] * s[0] / c;
        case Family::poisson: {
            const double x = s[0] > 0.0 ? s[0] : 0.0;
            return 2.0 * (detail::xlogy(x, x / c) - x);
        }
        case Family::binomial: {
            const double mc = m.trials * c;
            const double x = std::min(std::max(s[0], 0.0), mc);
            const double pi = x / mc;
            return 2.0 * (detail::xlogy(x, pi) + detail::xlogy(mc - x, 1.0 - pi));
        }
        case Family::exponential: {
            const double mean = std::max(s[0] / c, kMeanClamp);
            const double eta = -1.0 / mean;
            return coord_loglik_at(m, c, s, &eta);
        }
        case Family::pareto: {
            const double g = std::max(s[0] / c - std::log(m.ym), kMeanClamp);
            const double eta = -1.0 - 1.0 / g;
            return coord_loglik_at(m, c, s, &eta);
        }
        case Family::gaussian_mean_variance: {
            const double mean = s[0] / c;
            const double v = s[1] / c - mean * mean;
            const double var = std::max(v, m.var_floor);
            return -c * v / var - c * std::log(var);
        }
    }
    return 0.0;
}

// Raw observation -> natural statistic for coordinate i.
inline void coord_to_natural(const CoordModel& m, std::size_t i, double y, double* out) {
    if (!std::isfinite(y)) throw RejectedObservation(i, "non-finite observation");
    switch (m.family) {
        case Family::pareto:
            if (!(y > 0.0)) throw RejectedObservation(i, "pareto observation must be > 0");
            out[0] = std::log(y);
            return;
        case Family::binomial:
            if (y < 0.0 || y > m.trials) throw RejectedObservation(i, "binomial observation outside [0, m]");
            out[0] = y;
            return;
        case Family::poisson:
            if (y < 0.0) throw RejectedObservation(i, "poisson observation must be >= 0");
            out[0] = y;
            return;
        case Family::exponential:
            if (y < 0.0) throw RejectedObservation(i, "exponential observation must be >= 0");
            out[0] = y;
            return;
        case Family::gaussian_mean_variance:
            out[0] = y;
            out[1] = y * y;
            return;
        case Family::gaussian_mean:
            out[0] = y;
            return;
    }
}

// Natural parameter of the distribution with the given mean (and variance for GMV).
inline std::vector<double> coord_natural_from_mean(const CoordModel& m, double mean, double var = 1.0) {
    switch (m.family) {
        case Family::gaussian_mean: return {mean};
        case Family::poisson:
            if (!(mean > 0)) throw DomainError("poisson mean must be > 0");
            return {std::log(mean)};
        case Family::binomial: {
            const double pi = mean / m.trials;
            if (!(pi > 0 && pi < 1)) throw DomainError("binomial mean must be in (0, m)");
            return {std::log(pi / (1 - pi))};
        }
        case Family::exponential:
            if (!(mean > 0)) throw DomainError("exponential mean must be > 0");
            return {-1.0 / mean};
        case Family::pareto:
            // mean of log(y / y_m)
            if (!(mean > 0)) throw DomainError("pareto log-mean must be > 0");
            return {-1.0 - 1.0 / mean};
        case Family::gaussian_mean_variance:
            if (!(var > 0)) throw DomainError("variance must be > 0");
            return {mean / var, -1.0 / (2.0 * var)};
    }
    return {};
}

inline std::vector<double> to_natural(const ModelSpec& model, std::span<const double> y) {
    if (y.size() != model.p())
        throw InputError("observation has " + std::to_string(y.size()) + " coordinates, model expects " +
                         std::to_string(model.p()));
    std::vector<double> x(model.d_nat());
    for (std::size_t i = 0; i < model.p(); ++i) coord_to_natural(model.coord(i), i, y[i], x.data() + model.offset(i));
    return x;
}

inline double segment_maxloglik(const ModelSpec& model, const SegmentSummary& seg) {
    if (seg.count < 1) throw UndefinedSegment("segment_maxloglik needs at least one observation");
    if (seg.sums.size() != model.d_nat()) throw InputError("segment sums have wrong dimension");
    const double c = static_cast<double>(seg.count);
    double total = 0.0;
    for (std::size_t i = 0; i < model.p(); ++i)
        total += coord_maxloglik(model.coord(i), c, seg.sums.data() + model.offset(i));
    return total;
}

inline void check_eta(const ModelSpec& model, std::span<const double> eta) {
    if (eta.size() != model.d_nat()) throw InputError("natural parameter has wrong dimension");
    for (std::size_t i = 0; i < model.p(); ++i)
        if (!coord_eta_admissible(model.coord(i), eta.data() + model.offset(i)))
            throw DomainError("natural parameter of coordinate " + std::to_string(i) + " outside the " +
                              std::string(family_name(model.coord(i).family)) + " domain");
}

inline double segment_loglik_at(const ModelSpec& model, const SegmentSummary& seg, std::span<const double> eta) {
    if (seg.count < 0) throw InputError("negative segment count");
    if (seg.sums.size() != model.d_nat()) throw InputError("segment sums have wrong dimension");
    check_eta(model, eta);
    const double c = static_cast<double>(seg.count);
    double total = 0.0;
    for (std::size_t i = 0; i < model.p(); ++i) {
        const std::size_t o = model.offset(i);
        total += coord_loglik_at(model.coord(i), c, seg.sums.data() + o, eta.data() + o);
    }
    return total;
}

}  // namespace mdfocus

#endif
