#ifndef MDFOCUS_DYADIC_HPP
#define MDFOCUS_DYADIC_HPP

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "detector.hpp"
#include "error.hpp"
#include "hull.hpp"

namespace mdfocus {

// Labels in (lo, hi].
struct ChunkInterval {
    std::int64_t lo = 0;
    std::int64_t hi = 0;

    bool empty() const { return hi <= lo; }
    std::int64_t size() const { return hi > lo ? hi - lo : 0; }
    bool contains(std::int64_t t) const { return t > lo && t <= hi; }
    bool operator==(const ChunkInterval&) const = default;
};

// U_n^q from the binary digits of n - 1: digits above q give the exclusive
// lower end, digits from q upward the inclusive upper end.
inline ChunkInterval chunk_bounds(std::int64_t n, int q) {
    if (n < 2) throw InputError("chunk_bounds needs n >= 2");
    const auto m = static_cast<std::uint64_t>(n - 1);
    const int top = std::bit_width(m) - 1;
    if (q < 0 || q > top) throw InputError("q=" + std::to_string(q) + " outside [0, " + std::to_string(top) + "]");
    const std::uint64_t lo = (m >> (q + 1)) << (q + 1);
    const std::uint64_t hi = (m >> q) << q;
    return {static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)};
}

// Labels of the trailing partial block at time n for a given q_min.
inline ChunkInterval trailing_block(std::int64_t n, int q_min) {
    const auto m = static_cast<std::uint64_t>(n - 1);
    return {static_cast<std::int64_t>((m >> q_min) << q_min), static_cast<std::int64_t>(m)};
}

inline int default_qmin(std::size_t p) { return static_cast<int>(p) + 5; }

// Candidate set maintained by dyadic chunk merges. Labels below 1 (the tau=0
// anchor of the known pre-change case) are kept permanently.
class DyadicState {
public:
    DyadicState(std::size_t d_nat, int q_min, double tol = kDefaultHullTol) : d_(d_nat), q_min_(q_min), tol_(tol) {
        if (q_min_ < 1 || q_min_ > 40) throw ConfigError("q_min must lie in [1, 40]");
    }

    void insert(std::int64_t label, const double* cum) {
        if (!labels_.empty() && label <= labels_.back()) throw InvariantViolation("candidate labels must increase");
        labels_.push_back(label);
        cums_.insert(cums_.end(), cum, cum + d_);
    }

    // Merge every completed chunk ending at the most recent label.
    void merge_after(std::int64_t label) {
        if (label < 1) return;
        for (int q = q_min_; q < 62 && label % (std::int64_t{1} << q) == 0; ++q) {
            const std::int64_t cut = label - (std::int64_t{1} << q);
            const auto first = static_cast<std::size_t>(
                std::upper_bound(labels_.begin(), labels_.end(), cut) - labels_.begin());
            const std::size_t count = labels_.size() - first;
            if (count <= d_ + 2) continue;
            PointSet pts(d_ + 1);
            pts.reserve(count);
            std::vector<double> buf(d_ + 1);
            for (std::size_t i = first; i < labels_.size(); ++i) {
                buf[0] = static_cast<double>(labels_[i]);
                std::copy_n(cums_.begin() + static_cast<std::ptrdiff_t>(i * d_), d_, buf.begin() + 1);
                pts.push_back(labels_[i], buf.data());
            }
            const VertexSet keep = hull_vertices(pts, tol_);
            ++hull_calls_;
            std::size_t w = first, j = 0;
            for (std::size_t i = first; i < labels_.size(); ++i) {
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
        }
    }

    CandidateView view() const { return {labels_, cums_.data()}; }
    std::size_t size() const { return labels_.size(); }
    int q_min() const { return q_min_; }
    std::size_t d_nat() const { return d_; }
    std::size_t hull_calls() const { return hull_calls_; }
    const std::vector<std::int64_t>& labels() const { return labels_; }
    const std::vector<double>& cums() const { return cums_; }

private:
    std::size_t d_;
    int q_min_;
    double tol_;
    std::size_t hull_calls_ = 0;
    std::vector<std::int64_t> labels_;
    std::vector<double> cums_;
};

// Insert a label and merge the chunks it completes.
inline void dyadic_update(DyadicState& state, std::int64_t label, const double* cum) {
    state.insert(label, cum);
    state.merge_after(label);
}

// Store adapter for BasicDetector: merges run after the step's evaluation.
class DyadicStore {
public:
    DyadicStore(std::size_t d_nat, int q_min, double tol = kDefaultHullTol) : state_(d_nat, q_min, tol) {}

    void insert(std::int64_t label, const double* cum) {
        state_.insert(label, cum);
        pending_ = label;
    }
    void maintain(std::int64_t) {
        if (pending_ >= 0) state_.merge_after(pending_);
        pending_ = -1;
    }
    CandidateView view() const { return state_.view(); }
    std::size_t size() const { return state_.size(); }
    const DyadicState& state() const { return state_; }
    const std::vector<std::int64_t>& labels() const { return state_.labels(); }

private:
    DyadicState state_;
    std::int64_t pending_ = -1;
};

using DyadicDetector = BasicDetector<DyadicStore>;

inline DyadicDetector make_dyadic_detector(const ModelSpec& model, const StatConfig& cfg, int q_min = 0,
                                           double tol = kDefaultHullTol) {
    if (q_min == 0) q_min = default_qmin(model.p());
    return DyadicDetector(model, cfg, DyadicStore(model.d_nat(), q_min, tol));
}

}  // namespace mdfocus

#endif
