#ifndef MDFOCUS_PROJAPPROX_HPP
#define MDFOCUS_PROJAPPROX_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "detector.hpp"
#include "error.hpp"

namespace mdfocus {

// Coordinate subsets (0-based indices into the natural statistic).
struct ProjectionPlan {
    std::vector<std::vector<std::size_t>> subsets;
    std::size_t p_tilde = 2;

    void validate(std::size_t d_nat) const {
        if (p_tilde < 1) throw ConfigError("p_tilde must be >= 1");
        if (subsets.empty()) throw ConfigError("projection plan has no subsets");
        std::vector<char> seen(d_nat, 0);
        for (const auto& s : subsets) {
            if (s.empty()) throw ConfigError("empty projection subset");
            if (s.size() > p_tilde) throw ConfigError("projection subset larger than p_tilde");
            for (auto k : s) {
                if (k >= d_nat) throw ConfigError("projection coordinate out of range");
                seen[k] = 1;
            }
        }
        for (std::size_t k = 0; k < d_nat; ++k)
            if (!seen[k]) throw ConfigError("coordinate " + std::to_string(k) + " is in no projection subset");
    }
};

// Consecutive blocks of size p_tilde; the last block may be smaller.
inline ProjectionPlan default_plan(std::size_t p, std::size_t p_tilde) {
    if (p_tilde < 1 || p_tilde > p) throw ConfigError("p_tilde must lie in [1, p]");
    ProjectionPlan plan;
    plan.p_tilde = p_tilde;
    for (std::size_t start = 0; start < p; start += p_tilde) {
        std::vector<std::size_t> block;
        for (std::size_t k = start; k < std::min(p, start + p_tilde); ++k) block.push_back(k);
        plan.subsets.push_back(std::move(block));
    }
    return plan;
}

// One lazy store per subset; statistics read the deduplicated union.
class ProjectionStore {
public:
    ProjectionStore(std::size_t d_nat, const ProjectionPlan& plan, double alpha = 2.0, double beta = 1.0,
                    double tol = kDefaultHullTol)
        : d_(d_nat) {
        plan.validate(d_nat);
        for (const auto& s : plan.subsets)
            stores_.emplace_back(d_nat, Schedule{alpha, beta, plan.p_tilde + 2}, s, tol);
    }

    void insert(std::int64_t label, const double* cum) {
        for (auto& s : stores_) s.insert(label, cum);
        dirty_ = true;
    }
    void maintain(std::int64_t n) {
        for (auto& s : stores_) s.maintain(n);
        dirty_ = true;
    }

    CandidateView view() {
        merge();
        return {labels_, cums_.data()};
    }
    std::size_t size() {
        merge();
        return labels_.size();
    }
    std::size_t total_stored() const {
        std::size_t t = 0;
        for (const auto& s : stores_) t += s.size();
        return t;
    }
    const std::vector<LazyHullStore>& stores() const { return stores_; }
    std::vector<LazyHullStore>& stores() { return stores_; }
    const std::vector<std::int64_t>& labels() {
        merge();
        return labels_;
    }

private:
    void merge() {
        if (!dirty_) return;
        dirty_ = false;
        labels_.clear();
        cums_.clear();
        std::vector<std::size_t> pos(stores_.size(), 0);
        while (true) {
            std::int64_t next = std::numeric_limits<std::int64_t>::max();
            std::size_t from = stores_.size();
            for (std::size_t s = 0; s < stores_.size(); ++s) {
                const auto& L = stores_[s].labels();
                if (pos[s] < L.size() && L[pos[s]] < next) {
                    next = L[pos[s]];
                    from = s;
                }
            }
            if (from == stores_.size()) break;
            labels_.push_back(next);
            const auto& C = stores_[from].cums();
            cums_.insert(cums_.end(), C.begin() + static_cast<std::ptrdiff_t>(pos[from] * d_),
                         C.begin() + static_cast<std::ptrdiff_t>((pos[from] + 1) * d_));
            for (std::size_t s = 0; s < stores_.size(); ++s) {
                const auto& L = stores_[s].labels();
                if (pos[s] < L.size() && L[pos[s]] == next) ++pos[s];
            }
        }
    }

    std::size_t d_;
    std::vector<LazyHullStore> stores_;
    std::vector<std::int64_t> labels_;
    std::vector<double> cums_;
    bool dirty_ = true;
};

using ApproxDetector = BasicDetector<ProjectionStore>;

inline ApproxDetector make_approx_detector(const ModelSpec& model, const StatConfig& cfg, const ProjectionPlan& plan,
                                           double alpha = 2.0, double beta = 1.0, double tol = kDefaultHullTol) {
    return ApproxDetector(model, cfg, ProjectionStore(model.d_nat(), plan, alpha, beta, tol));
}

}  // namespace mdfocus

#endif
