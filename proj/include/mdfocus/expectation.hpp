#ifndef MDFOCUS_EXPECTATION_HPP
#define MDFOCUS_EXPECTATION_HPP

#include <array>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include "error.hpp"

namespace mdfocus {

// Convention for the m = 0 Stirling number: the formula tables use [n 0] = 1;
// the combinatorial value is 0 for n >= 1.
enum class StirlingZero { unit, exact };

inline constexpr int kMaxStirlingOrder = 6;

// sigma[k] = sum_{i=1}^{n-1} i^{-k} for k = 1..K (sigma[0] unused).
template <class Real>
std::vector<Real> harmonic_sums(std::int64_t n, int K) {
    if (n < 2) throw InputError("harmonic sums need n >= 2");
    std::vector<Real> sigma(static_cast<std::size_t>(K) + 1, Real(0));
    if constexpr (std::is_floating_point_v<Real>) {
        std::vector<Real> comp(static_cast<std::size_t>(K) + 1, Real(0));
        for (std::int64_t i = n - 1; i >= 1; --i) {
            const Real inv = Real(1) / static_cast<Real>(i);
            Real term = 1;
            for (int k = 1; k <= K; ++k) {
                term *= inv;
                // Neumaier compensated summation
                const Real t = sigma[k] + term;
                if (sigma[k] >= term)
                    comp[k] += (sigma[k] - t) + term;
                else
                    comp[k] += (term - t) + sigma[k];
                sigma[k] = t;
            }
        }
        for (int k = 1; k <= K; ++k) sigma[k] += comp[k];
    } else {
        for (std::int64_t i = 1; i < n; ++i) {
            Real term(1);
            for (int k = 1; k <= K; ++k) {
                term /= Real(i);
                sigma[k] += term;
            }
        }
    }
    return sigma;
}

template <class Real>
Real inverse_factorial(std::int64_t k) {
    Real r(1);
    for (std::int64_t i = 2; i <= k; ++i) r /= Real(i);
    return r;
}

// Rising factorial (x)_k over the integers.
inline std::int64_t pochhammer(std::int64_t x, int k) {
    std::int64_t r = 1;
    for (int j = 0; j < k; ++j) r *= x + j;
    return r;
}

// [n m] / (n-1)! through the explicit harmonic-sum formulas.
template <class Real>
Real stirling_ratio_closed(std::int64_t n, int m, StirlingZero zero = StirlingZero::unit) {
    if (n < 2) throw InputError("stirling_ratio needs n >= 2");
    if (m < 0) throw InputError("stirling order must be >= 0");
    if (m > kMaxStirlingOrder) throw UnsupportedError("stirling order above 6 is not supported");
    if (m == 0) return zero == StirlingZero::unit ? inverse_factorial<Real>(n - 1) : Real(0);
    if (m == 1) return Real(1);
    const auto sg = harmonic_sums<Real>(n, m - 1);
    const Real s1 = sg[1];
    switch (m) {
        case 2: return s1;
        case 3: return (s1 * s1 - sg[2]) / Real(2);
        case 4: return s1 * s1 * s1 / Real(6) - s1 * sg[2] / Real(2) + sg[3] / Real(3);
        case 5:
            return s1 * s1 * s1 * s1 / Real(24) - s1 * s1 * sg[2] / Real(4) + s1 * sg[3] / Real(3) +
                   sg[2] * sg[2] / Real(8) - sg[4] / Real(4);
        default:
            return s1 * s1 * s1 * s1 * s1 / Real(120) - s1 * s1 * s1 * sg[2] / Real(12) +
                   s1 * s1 * sg[3] / Real(6) + s1 * sg[2] * sg[2] / Real(8) - s1 * sg[4] / Real(4) -
                   sg[2] * sg[3] / Real(6) + sg[5] / Real(5);
    }
}

// Same ratio through omega(n, m) = 1{m=0} + sum_k (1-m)_k sigma_{k+1} omega(n, m-1-k).
template <class Real>
Real stirling_ratio_omega(std::int64_t n, int m, StirlingZero zero = StirlingZero::unit) {
    if (n < 2) throw InputError("stirling_ratio needs n >= 2");
    if (m < 0) throw InputError("stirling order must be >= 0");
    if (m > kMaxStirlingOrder) throw UnsupportedError("stirling order above 6 is not supported");
    if (m == 0) return zero == StirlingZero::unit ? inverse_factorial<Real>(n - 1) : Real(0);
    const auto sg = harmonic_sums<Real>(n, m);
    std::vector<Real> omega(static_cast<std::size_t>(m), Real(0));
    for (int j = 0; j < m; ++j) {
        Real w = j == 0 ? Real(1) : Real(0);
        for (int k = 0; k <= j - 1; ++k)
            w += Real(pochhammer(1 - j, k)) * sg[k + 1] * omega[static_cast<std::size_t>(j - 1 - k)];
        omega[static_cast<std::size_t>(j)] = w;
    }
    return omega[static_cast<std::size_t>(m - 1)] * inverse_factorial<Real>(m - 1);
}

inline long double stirling_ratio(std::int64_t n, int m, StirlingZero zero = StirlingZero::unit) {
    return stirling_ratio_closed<long double>(n, m, zero);
}

template <class Real>
struct BasicExpectedCounts {
    Real faces{};
    Real vertices{};
};

using ExpectedCounts = BasicExpectedCounts<long double>;

// Expected face and vertex counts of the hull of the n points P(0), ..., P(n-1)
// of a p-dimensional random walk (P(0) is the origin).
template <class Real>
BasicExpectedCounts<Real> expected_counts_as(std::int64_t n, int p, StirlingZero zero = StirlingZero::unit) {
    if (p < 1) throw InputError("p must be >= 1");
    if (p > kMaxStirlingOrder - 1) throw UnsupportedError("expected counts need p <= 5");
    if (n < 2) throw InputError("expected counts need n >= 2");
    BasicExpectedCounts<Real> out;
    Real fact(1);
    for (int i = 2; i <= p; ++i) fact *= Real(i);
    out.faces = Real(2) * fact * stirling_ratio_closed<Real>(n, p + 1, zero);
    Real v(0);
    for (int m = p + 1; m >= 0; m -= 2) v += stirling_ratio_closed<Real>(n, m, zero);
    out.vertices = Real(2) * v;
    return out;
}

inline ExpectedCounts expected_counts(std::int64_t n, int p, StirlingZero zero = StirlingZero::unit) {
    return expected_counts_as<long double>(n, p, zero);
}

}  // namespace mdfocus

#endif
