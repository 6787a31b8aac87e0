#ifndef MDFOCUS_HULL_HPP
#define MDFOCUS_HULL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace mdfocus {

struct HullPoint {
    std::int64_t label = 0;
    std::vector<double> coords;
};

// Vertex labels in increasing order.
using VertexSet = std::vector<std::int64_t>;

inline constexpr double kDefaultHullTol = 1e-9;

// Labels plus row-major coordinates of a fixed dimension.
class PointSet {
public:
    explicit PointSet(std::size_t dim = 0) : dim_(dim) {}

    void reserve(std::size_t n) {
        labels_.reserve(n);
        data_.reserve(n * dim_);
    }
    void clear() {
        labels_.clear();
        data_.clear();
    }
    void push_back(std::int64_t label, const double* coords) {
        labels_.push_back(label);
        data_.insert(data_.end(), coords, coords + dim_);
    }
    void push_back(std::int64_t label, std::span<const double> coords) {
        if (coords.size() != dim_) throw InputError("point dimension mismatch");
        push_back(label, coords.data());
    }

    std::size_t size() const { return labels_.size(); }
    std::size_t dim() const { return dim_; }
    bool empty() const { return labels_.empty(); }
    std::int64_t label(std::size_t i) const { return labels_[i]; }
    const double* coords(std::size_t i) const { return data_.data() + i * dim_; }
    const std::vector<double>& data() const { return data_; }
    const std::vector<std::int64_t>& labels() const { return labels_; }

    static PointSet from(std::span<const HullPoint> pts) {
        if (pts.empty()) throw InputError("empty point set");
        PointSet s(pts.front().coords.size());
        s.reserve(pts.size());
        for (const auto& p : pts) s.push_back(p.label, std::span<const double>(p.coords));
        return s;
    }

private:
    std::size_t dim_;
    std::vector<std::int64_t> labels_;
    std::vector<double> data_;
};

namespace detail {

// Phase-one simplex for: is z a convex combination of the given columns?
// Minimizes the artificial slack of  sum_j l_j y_j = z, sum_j l_j = 1, l >= 0.
// The optimal duals give a separating normal when the slack is positive.
class MembershipLP {
public:
    double solve(const double* data, std::size_t d, const std::uint32_t* idx, std::size_t m, const double* z) {
        const std::size_t D = d + 1;
        binv_.assign(D * D, 0.0);
        for (std::size_t r = 0; r < D; ++r) binv_[r * D + r] = 1.0;
        sign_.assign(D, 1.0);
        xb_.assign(D, 0.0);
        basis_.resize(D);
        for (std::size_t r = 0; r < d; ++r) {
            sign_[r] = z[r] < 0 ? -1.0 : 1.0;
            xb_[r] = std::fabs(z[r]);
        }
        xb_[d] = 1.0;
        for (std::size_t r = 0; r < D; ++r) basis_[r] = m + r;
        y_.assign(D, 0.0);
        w_.assign(d, 0.0);
        u_.assign(D, 0.0);
        col_.assign(D, 0.0);

        const std::size_t max_iter = 50 * (m + D) + 100;
        std::size_t degenerate_run = 0;
        for (std::size_t iter = 0; iter < max_iter; ++iter) {
            duals(D, m);
            for (std::size_t r = 0; r < d; ++r) w_[r] = y_[r] * sign_[r];
            const bool bland = degenerate_run > 30;
            std::size_t enter = m;
            double best = -kPriceTol;
            for (std::size_t j = 0; j < m; ++j) {
                const double* y = data + static_cast<std::size_t>(idx[j]) * d;
                double dot = y_[d];
                for (std::size_t r = 0; r < d; ++r) dot += w_[r] * y[r];
                const double rc = -dot;
                if (rc < best) {
                    best = rc;
                    enter = j;
                    if (bland) break;
                }
            }
            if (enter == m) break;

            const double* ye = data + static_cast<std::size_t>(idx[enter]) * d;
            for (std::size_t r = 0; r < d; ++r) col_[r] = sign_[r] * ye[r];
            col_[d] = 1.0;
            for (std::size_t r = 0; r < D; ++r) {
                double s = 0.0;
                for (std::size_t k = 0; k < D; ++k) s += binv_[r * D + k] * col_[k];
                u_[r] = s;
            }
            std::size_t leave = D;
            double ratio = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < D; ++r) {
                if (u_[r] <= kPivotTol) continue;
                const double t = xb_[r] / u_[r];
                if (t < ratio - 1e-15 ||
                    (t <= ratio + 1e-15 && leave < D && prefer_leave(r, leave, m))) {
                    ratio = t;
                    leave = r;
                }
            }
            if (leave == D) break;
            degenerate_run = ratio <= 1e-14 ? degenerate_run + 1 : 0;

            const double piv = u_[leave];
            for (std::size_t k = 0; k < D; ++k) binv_[leave * D + k] /= piv;
            xb_[leave] /= piv;
            for (std::size_t r = 0; r < D; ++r) {
                if (r == leave || u_[r] == 0.0) continue;
                const double f = u_[r];
                for (std::size_t k = 0; k < D; ++k) binv_[r * D + k] -= f * binv_[leave * D + k];
                xb_[r] -= f * xb_[leave];
                if (xb_[r] < 0.0) xb_[r] = 0.0;
            }
            basis_[leave] = enter;
        }
        duals(D, m);
        for (std::size_t r = 0; r < d; ++r) w_[r] = y_[r] * sign_[r];
        double obj = 0.0;
        for (std::size_t r = 0; r < D; ++r)
            if (basis_[r] >= m) obj += xb_[r];
        return obj;
    }

    // Normal w with w.z > w.y_j for all columns when the last solve had positive slack.
    const std::vector<double>& direction() const { return w_; }

private:
    static constexpr double kPriceTol = 1e-11;
    static constexpr double kPivotTol = 1e-11;

    void duals(std::size_t D, std::size_t m) {
        for (std::size_t k = 0; k < D; ++k) {
            double s = 0.0;
            for (std::size_t r = 0; r < D; ++r)
                if (basis_[r] >= m) s += binv_[r * D + k];
            y_[k] = s;
        }
    }

    bool prefer_leave(std::size_t r, std::size_t cur, std::size_t m) const {
        const bool ra = basis_[r] >= m, ca = basis_[cur] >= m;
        if (ra != ca) return ra;
        return basis_[r] < basis_[cur];
    }

    std::vector<double> binv_, xb_, sign_, y_, w_, u_, col_;
    std::vector<std::size_t> basis_;
};

// Coordinates scaled per dimension by their max absolute value, with
// near-coincident points (within tol in every coordinate) collapsed onto the
// smallest label.
struct Normalized {
    std::size_t d = 0;
    std::vector<double> data;          // kept points only
    std::vector<std::int64_t> labels;  // kept points only
    std::vector<std::size_t> source;   // index into the input
};

inline Normalized normalize(const PointSet& pts, double tol) {
    if (pts.empty()) throw InputError("empty point set");
    const std::size_t n = pts.size(), d = pts.dim();
    if (d == 0) throw InputError("points have no coordinates");
    std::vector<double> scale(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* c = pts.coords(i);
        for (std::size_t k = 0; k < d; ++k) {
            if (!std::isfinite(c[k]))
                throw InputError("non-finite coordinate at label " + std::to_string(pts.label(i)));
            scale[k] = std::max(scale[k], std::fabs(c[k]));
        }
    }
    for (auto& s : scale) s = s > 0.0 ? 1.0 / s : 1.0;

    std::vector<double> all(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) all[i * d + k] = pts.coords(i)[k] * scale[k];

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (all[a * d] != all[b * d]) return all[a * d] < all[b * d];
        return pts.label(a) < pts.label(b);
    });
    std::vector<char> dropped(n, 0);
    for (std::size_t oi = 0; oi < n; ++oi) {
        const std::size_t i = order[oi];
        if (dropped[i]) continue;
        for (std::size_t oj = oi + 1; oj < n && all[order[oj] * d] - all[i * d] <= tol; ++oj) {
            const std::size_t j = order[oj];
            if (dropped[j]) continue;
            bool same = true;
            for (std::size_t k = 1; k < d && same; ++k) same = std::fabs(all[i * d + k] - all[j * d + k]) <= tol;
            if (!same) continue;
            if (pts.label(j) < pts.label(i)) {
                dropped[i] = 1;
                break;
            }
            dropped[j] = 1;
        }
    }

    Normalized out;
    out.d = d;
    for (std::size_t i = 0; i < n; ++i) {
        if (dropped[i]) continue;
        out.labels.push_back(pts.label(i));
        out.source.push_back(i);
        out.data.insert(out.data.end(), all.begin() + static_cast<std::ptrdiff_t>(i * d),
                        all.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    }
    return out;
}

inline bool lex_less(const double* a, const double* b, std::size_t d) {
    for (std::size_t k = 0; k < d; ++k)
        if (a[k] != b[k]) return a[k] < b[k];
    return false;
}

// Andrew's monotone chain; strict (points within tol of an edge are dropped).
inline std::vector<std::size_t> chain_2d(const Normalized& nz, double tol) {
    const std::size_t m = nz.labels.size();
    const double* P = nz.data.data();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (P[2 * a] != P[2 * b]) return P[2 * a] < P[2 * b];
        return P[2 * a + 1] < P[2 * b + 1];
    });
    auto turn_ok = [&](std::size_t o, std::size_t a, std::size_t b) {
        const double ax = P[2 * a] - P[2 * o], ay = P[2 * a + 1] - P[2 * o + 1];
        const double bx = P[2 * b] - P[2 * o], by = P[2 * b + 1] - P[2 * o + 1];
        const double cross = ax * by - ay * bx;
        return cross > tol * std::hypot(bx, by);
    };
    std::vector<std::size_t> h(2 * m);
    std::size_t k = 0;
    for (std::size_t i = 0; i < m; ++i) {
        while (k >= 2 && !turn_ok(h[k - 2], h[k - 1], order[i])) --k;
        h[k++] = order[i];
    }
    for (std::size_t i = m - 1, t = k + 1; i-- > 0;) {
        while (k >= t && !turn_ok(h[k - 2], h[k - 1], order[i])) --k;
        h[k++] = order[i];
    }
    h.resize(k > 1 ? k - 1 : k);
    std::sort(h.begin(), h.end());
    h.erase(std::unique(h.begin(), h.end()), h.end());
    return h;
}

// Output-sensitive extraction: grow a set E of certified extreme points; each
// point is tested against E only, and a failed test yields a direction whose
// maximizer over all points is a new extreme point.
inline std::vector<std::size_t> extreme_points_lp(const Normalized& nz, double tol) {
    const std::size_t m = nz.labels.size(), d = nz.d;
    const double* P = nz.data.data();
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 1; i < m; ++i) {
        if (lex_less(P + i * d, P + lo * d, d)) lo = i;
        if (lex_less(P + hi * d, P + i * d, d)) hi = i;
    }
    std::vector<std::uint32_t> E;
    std::vector<char> inE(m, 0);
    auto add = [&](std::size_t i) {
        if (!inE[i]) {
            inE[i] = 1;
            E.push_back(static_cast<std::uint32_t>(i));
        }
    };
    add(lo);
    add(hi);

    MembershipLP lp;
    for (std::size_t i = 0; i < m; ++i) {
        if (inE[i]) continue;
        while (true) {
            const double r = lp.solve(P, d, E.data(), E.size(), P + i * d);
            if (r <= tol) break;
            const auto& w = lp.direction();
            double wn = 0.0;
            for (double v : w) wn += std::fabs(v);
            const double eps = 1e-12 * wn;
            std::size_t best = m;
            double bv = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < m; ++j) {
                const double* y = P + j * d;
                double v = 0.0;
                for (std::size_t k = 0; k < d; ++k) v += w[k] * y[k];
                if (v > bv + eps || (v >= bv - eps && best < m && lex_less(P + best * d, y, d))) {
                    bv = std::max(bv, v);
                    best = j;
                }
            }
            if (best == m || inE[best]) {
                add(i);
                break;
            }
            add(best);
            if (best == i) break;
        }
    }

    // Certify each member against the others; drop any that are not strict vertices.
    std::vector<std::uint32_t> keep(E.begin(), E.end()), cols;
    std::vector<char> alive(keep.size(), 1);
    for (std::size_t a = 0; a < keep.size(); ++a) {
        cols.clear();
        for (std::size_t b = 0; b < keep.size(); ++b)
            if (b != a && alive[b]) cols.push_back(keep[b]);
        if (cols.empty()) continue;
        if (lp.solve(P, d, cols.data(), cols.size(), P + keep[a] * d) <= tol) alive[a] = 0;
    }
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < keep.size(); ++a)
        if (alive[a]) out.push_back(keep[a]);
    std::sort(out.begin(), out.end());
    return out;
}

inline VertexSet labels_of(const Normalized& nz, const std::vector<std::size_t>& idx) {
    VertexSet v;
    v.reserve(idx.size());
    for (auto i : idx) v.push_back(nz.labels[i]);
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace detail

inline VertexSet hull_vertices(const PointSet& pts, double tol = kDefaultHullTol) {
    const auto nz = detail::normalize(pts, tol);
    const std::size_t m = nz.labels.size(), d = nz.d;
    std::vector<std::size_t> idx;
    if (m <= 2) {
        idx.resize(m);
        std::iota(idx.begin(), idx.end(), 0);
    } else if (d == 1) {
        const auto [lo, hi] = std::minmax_element(nz.data.begin(), nz.data.end());
        idx = {static_cast<std::size_t>(lo - nz.data.begin()), static_cast<std::size_t>(hi - nz.data.begin())};
    } else if (d == 2) {
        idx = detail::chain_2d(nz, tol);
    } else {
        idx = detail::extreme_points_lp(nz, tol);
    }
    return detail::labels_of(nz, idx);
}

inline VertexSet hull_vertices(std::span<const HullPoint> pts, double tol = kDefaultHullTol) {
    return hull_vertices(PointSet::from(pts), tol);
}

// Reference: one convex-combination LP per point against all other points.
inline VertexSet hull_vertices_reference(const PointSet& pts, double tol = kDefaultHullTol) {
    const auto nz = detail::normalize(pts, tol);
    const std::size_t m = nz.labels.size();
    std::vector<std::size_t> idx;
    detail::MembershipLP lp;
    std::vector<std::uint32_t> cols;
    for (std::size_t i = 0; i < m; ++i) {
        cols.clear();
        for (std::size_t j = 0; j < m; ++j)
            if (j != i) cols.push_back(static_cast<std::uint32_t>(j));
        if (cols.empty() || lp.solve(nz.data.data(), nz.d, cols.data(), cols.size(), nz.data.data() + i * nz.d) > tol)
            idx.push_back(i);
    }
    return detail::labels_of(nz, idx);
}

inline VertexSet hull_vertices_reference(std::span<const HullPoint> pts, double tol = kDefaultHullTol) {
    return hull_vertices_reference(PointSet::from(pts), tol);
}

inline bool is_vertex(const PointSet& pts, std::int64_t label, double tol = kDefaultHullTol) {
    const auto& L = pts.labels();
    if (std::find(L.begin(), L.end(), label) == L.end())
        throw InputError("label " + std::to_string(label) + " not in point set");
    const auto nz = detail::normalize(pts, tol);
    const auto it = std::find(nz.labels.begin(), nz.labels.end(), label);
    if (it == nz.labels.end()) return false;  // coincides with a smaller label
    const std::size_t i = static_cast<std::size_t>(it - nz.labels.begin());
    std::vector<std::uint32_t> cols;
    for (std::size_t j = 0; j < nz.labels.size(); ++j)
        if (j != i) cols.push_back(static_cast<std::uint32_t>(j));
    if (cols.empty()) return true;
    detail::MembershipLP lp;
    return lp.solve(nz.data.data(), nz.d, cols.data(), cols.size(), nz.data.data() + i * nz.d) > tol;
}

inline bool is_vertex(std::span<const HullPoint> pts, std::int64_t label, double tol = kDefaultHullTol) {
    return is_vertex(PointSet::from(pts), label, tol);
}

}  // namespace mdfocus

#endif
