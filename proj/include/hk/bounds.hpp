#pragma once

// Exact bound arithmetic: geometric sums k^{<=n}, the rank and block
// recurrences that translate quantifier structure into tcl levels, and
// iterated exponentials 2^x_n with a comparison that never materializes
// the tower.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "hk/error.hpp"

namespace hk {

using BigNat = boost::multiprecision::cpp_int;

/// Largest bit length the bound routines are willing to materialize.
inline constexpr std::size_t kDefaultBitCap = std::size_t{1} << 22;

inline std::size_t bit_length(const BigNat& x)
{
    if (x == 0) return 0;
    return boost::multiprecision::msb(x) + 1;
}

inline BigNat pow_big(std::uint64_t base, const BigNat& exponent, std::size_t bit_cap = kDefaultBitCap)
{
    if (base == 0) return exponent == 0 ? BigNat{1} : BigNat{0};
    if (base == 1) return BigNat{1};
    // base^e has roughly e*log2(base) bits
    const double bits_per = std::log2(static_cast<double>(base));
    if (exponent > BigNat{bit_cap} || static_cast<double>(exponent) * bits_per > static_cast<double>(bit_cap))
        throw CapExceeded("power " + std::to_string(base) + "^" + exponent.str() + " exceeds the bit cap");
    return boost::multiprecision::pow(BigNat{base}, static_cast<unsigned>(exponent));
}

/// sum_{i=0}^{n} k^i, with 0^0 = 1.
inline BigNat k_leq(std::uint64_t k, const BigNat& n, std::size_t bit_cap = kDefaultBitCap)
{
    if (k == 0) return BigNat{1};
    if (k == 1) return n + 1;
    return (pow_big(k, n + 1, bit_cap) - 1) / (k - 1);
}

inline BigNat k_leq(std::uint64_t k, std::uint64_t n) { return k_leq(k, BigNat{n}); }

/// t_k(0) = 0, t_k(n+1) = k^{<= t_k(n)+1} + t_k(n) + 1.
inline BigNat t_rank(std::uint64_t k, std::uint64_t n, std::size_t bit_cap = kDefaultBitCap)
{
    BigNat t = 0;
    for (std::uint64_t i = 0; i < n; ++i)
        t = k_leq(k, t + 1, bit_cap) + t + 1;
    return t;
}

/// t_k(0,q) = 0, t_k(n+1,q) = q k^{<= t_k(n,q)+1} + t_k(n,q) + 1.
inline BigNat t_block(std::uint64_t k, std::uint64_t n, std::uint64_t q, std::size_t bit_cap = kDefaultBitCap)
{
    BigNat t = 0;
    for (std::uint64_t i = 0; i < n; ++i)
        t = BigNat{q} * k_leq(k, t + 1, bit_cap) + t + 1;
    return t;
}

/// 2^x_0 = x, 2^x_{n+1} = 2^{2^x_n}.
inline BigNat supexp(const BigNat& x, std::uint64_t n, std::size_t bit_cap = kDefaultBitCap)
{
    BigNat v = x;
    for (std::uint64_t i = 0; i < n; ++i) {
        if (v > BigNat{bit_cap})
            throw CapExceeded("iterated exponential exceeds the bit cap");
        BigNat next = 1;
        next <<= static_cast<unsigned>(v);
        v = std::move(next);
    }
    return v;
}

/// Smallest e with 2^e >= a (a >= 1).
inline BigNat ceil_log2(const BigNat& a)
{
    if (a <= 1) return BigNat{0};
    return BigNat{bit_length(a - 1)};
}

/// Decides a <= 2^x_n without building the tower.
inline bool leq_supexp(const BigNat& a, const BigNat& x, std::uint64_t n)
{
    BigNat lhs = a;
    for (std::uint64_t level = n; level > 0; --level) {
        if (lhs <= 1) return true; // 2^y >= 1 for every y >= 0
        lhs = ceil_log2(lhs);
    }
    return lhs <= x;
}

namespace detail {

inline std::uint64_t floor_with_snap(long double v)
{
    const long double r = std::round(v);
    if (std::fabs(v - r) < 1e-9L) return static_cast<std::uint64_t>(r);
    return static_cast<std::uint64_t>(std::floor(v));
}

inline std::uint64_t ceil_with_snap(long double v)
{
    const long double r = std::round(v);
    if (std::fabs(v - r) < 1e-9L) return static_cast<std::uint64_t>(r);
    return static_cast<std::uint64_t>(std::ceil(v));
}

inline long double c_k_real(std::uint64_t k)
{
    const long double lk = std::log2(static_cast<long double>(k));
    return (static_cast<long double>(k) + 3) * lk + std::log2(lk) + 2;
}

inline long double block_exponent_real(std::uint64_t k, std::uint64_t q)
{
    return 4.0L * static_cast<long double>(q) * static_cast<long double>(k) * std::log2(static_cast<long double>(k));
}

} // namespace detail

/// ceil((k+3) log k + log log k + 2), k >= 2.
inline std::uint64_t c_k(std::uint64_t k)
{
    if (k < 2) throw PreconditionError("c_k is defined for k >= 2");
    return detail::ceil_with_snap(detail::c_k_real(k));
}

/// Result of comparing a recurrence value against its tower bound.
struct BoundComparison {
    std::optional<BigNat> value; // t_k(n) or t_k(n,q); empty when too large to build
    BigNat log2_upper;           // ceil(log2 t) when exact, a proven upper bound otherwise
    std::uint64_t exponent;      // integer exponent used in the tower
    std::uint64_t height;        // tower height n-1
    bool holds;
};

// The tower bounds are stated for real exponents. Comparing against the
// floor of the exponent checks a stronger inequality, so `holds` implies
// the real-valued statement.

namespace detail {

// t = q k^{<=p+1} + p + 1 with p the previous term. When t cannot be built,
// log2 t <= log2(q+1) + (p+2) log2 k gives an integer upper bound U, and
// U <= 2^x_{h-1} implies t <= 2^x_h.
inline BoundComparison compare_step(std::uint64_t k, std::uint64_t q, const BigNat& prev, std::uint64_t exponent,
                                    std::uint64_t height)
{
    BoundComparison c;
    c.exponent = exponent;
    c.height = height;
    try {
        BigNat t = BigNat{q} * k_leq(k, prev + 1) + prev + 1;
        c.log2_upper = ceil_log2(t);
        c.holds = leq_supexp(t, BigNat{exponent}, height);
        c.value = std::move(t);
        return c;
    } catch (const CapExceeded&) {
    }
    c.log2_upper = ceil_log2(BigNat{q + 1}) + (prev + 2) * ceil_log2(BigNat{k});
    if (height == 0) {
        c.holds = false;
        return c;
    }
    c.holds = leq_supexp(c.log2_upper, BigNat{exponent}, height - 1);
    if (!c.holds) throw CapExceeded("bound comparison is inconclusive without materializing the value");
    return c;
}

} // namespace detail

inline BoundComparison compare_rank_bound(std::uint64_t k, std::uint64_t n)
{
    if (k < 2 || n < 1) throw PreconditionError("rank bound needs k >= 2 and n >= 1");
    return detail::compare_step(k, 1, t_rank(k, n - 1), detail::floor_with_snap(detail::c_k_real(k)), n - 1);
}

inline BoundComparison compare_block_bound(std::uint64_t k, std::uint64_t n, std::uint64_t q)
{
    if (k < 2 || n < 1 || q < 1) throw PreconditionError("block bound needs k >= 2 and n, q >= 1");
    return detail::compare_step(k, q, t_block(k, n - 1, q),
                                detail::floor_with_snap(detail::block_exponent_real(k, q)), n - 1);
}

inline bool bound_check(std::uint64_t k, std::uint64_t n) { return compare_rank_bound(k, n).holds; }

inline bool bound_check(std::uint64_t k, std::uint64_t n, std::uint64_t q)
{
    return compare_block_bound(k, n, q).holds;
}

/// Narrows a level to 64 bits. Levels beyond that saturate: no structure
/// that can be materialized is deep enough to tell the difference.
inline std::uint64_t saturate_level(const BigNat& m)
{
    if (m > BigNat{std::numeric_limits<std::uint64_t>::max()}) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(m);
}

/// Node bound l * k^{<=m} for enumeration at level m; saturates on overflow.
inline std::uint64_t node_bound(std::uint64_t k, std::uint64_t m, std::uint64_t l)
{
    if (l == 0) return 0;
    if (k == 0) return l;
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    if (k == 1) {
        if (m >= kMax / l - 1) return kMax;
        return l * (m + 1);
    }
    // k >= 2 grows fast; stop as soon as the sum passes any sensible cap.
    std::uint64_t sum = 0, term = 1;
    for (std::uint64_t i = 0; i <= m; ++i) {
        sum += term;
        if (sum > (kMax >> 8) / l) return kMax;
        if (i < m) {
            if (term > kMax / k) return kMax;
            term *= k;
        }
    }
    return sum * l;
}

} // namespace hk
