#pragma once

// Frequency arithmetic on the torus T^d = R^d / Z^d.
//
// |k| is the max-norm of an integer vector throughout. Integer vectors k and
// -k produce the same value of ||k . omega||, so scans report the canonical
// representative whose first nonzero entry is positive.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "qpcocycle/error.hpp"

namespace qpc {

using IntVec = std::vector<std::int64_t>;

/// Distance from t to the nearest integer, in [0, 1/2].
inline double dist_to_Z(double t) noexcept { return std::abs(t - std::round(t)); }

/// Reduce t into [0, 1).
inline double wrap_unit(double t) noexcept
{
    double r = t - std::floor(t);
    return r >= 1.0 ? 0.0 : r;
}

inline std::int64_t max_norm(std::span<const std::int64_t> k) noexcept
{
    std::int64_t m = 0;
    for (auto v : k)
        m = std::max<std::int64_t>(m, std::abs(v));
    return m;
}

class Frequency {
public:
    Frequency() = default;

    explicit Frequency(std::vector<double> components) : c_(std::move(components))
    {
        require(!c_.empty(), ErrorKind::InvalidArgument, "frequency dimension must be >= 1");
        for (double& v : c_) {
            require(std::isfinite(v), ErrorKind::InvalidArgument, "frequency component not finite");
            v = wrap_unit(v);
        }
    }

    Frequency(std::initializer_list<double> components)
        : Frequency(std::vector<double>(components))
    {
    }

    std::size_t dim() const noexcept { return c_.size(); }
    double operator[](std::size_t j) const { return c_[j]; }
    const std::vector<double>& components() const noexcept { return c_; }

    /// Components [first, first + count) as a frequency of lower dimension.
    /// An empty range yields a default-constructed (0-dimensional) value.
    Frequency slice(std::size_t first, std::size_t count) const
    {
        Frequency out;
        out.c_.assign(c_.begin() + static_cast<std::ptrdiff_t>(first),
                      c_.begin() + static_cast<std::ptrdiff_t>(first + count));
        return out;
    }

    static Frequency concat(const Frequency& a, const Frequency& b)
    {
        Frequency out;
        out.c_ = a.c_;
        out.c_.insert(out.c_.end(), b.c_.begin(), b.c_.end());
        return out;
    }

    bool operator==(const Frequency&) const = default;

private:
    std::vector<double> c_;
};

/// ||q omega|| = sum_j dist_to_Z(q omega_j).
inline double freq_norm(const Frequency& omega, std::int64_t q)
{
    require(q >= 1, ErrorKind::InvalidArgument, "freq_norm requires q >= 1");
    double s = 0.0;
    for (double w : omega.components())
        s += dist_to_Z(static_cast<double>(q) * w);
    return s;
}

/// The torus distance sum_j dist_to_Z(a_j - b_j).
inline double torus_distance(std::span<const double> a, std::span<const double> b)
{
    require(a.size() == b.size(), ErrorKind::InvalidArgument, "dimension mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        s += dist_to_Z(a[j] - b[j]);
    return s;
}

inline double dot(std::span<const std::int64_t> k, const Frequency& omega)
{
    double s = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j)
        s += static_cast<double>(k[j]) * omega[j];
    return s;
}

struct DiophantineReport {
    std::int64_t K = 0;
    double delta = std::numeric_limits<double>::infinity();
    IntVec argmin;
};

inline constexpr double kScanLimit = 1e9;

namespace detail {

inline void check_scan(std::size_t d, std::int64_t K)
{
    require(K >= 1, ErrorKind::InvalidArgument, "scan cutoff K must be >= 1");
    const double cost = std::pow(static_cast<double>(K), static_cast<double>(d));
    require(cost <= kScanLimit, ErrorKind::ScanTooLarge,
            "K^d = " + std::to_string(cost) + " exceeds the scan guard 1e9");
}

inline bool canonical(std::span<const std::int64_t> k) noexcept
{
    for (auto v : k)
        if (v != 0)
            return v > 0;
    return false;
}

// Visits every canonical k with 0 < |k| <= K in lexicographic order.
template <class Fn>
void for_each_canonical(std::size_t d, std::int64_t K, Fn&& fn)
{
    IntVec k(d, -K);
    for (;;) {
        if (canonical(k))
            fn(std::span<const std::int64_t>(k));
        std::size_t j = d;
        while (j > 0) {
            --j;
            if (k[j] < K) {
                ++k[j];
                break;
            }
            k[j] = -K;
            if (j == 0)
                return;
        }
    }
}

inline bool lex_less(std::span<const std::int64_t> a, std::span<const std::int64_t> b)
{
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

} // namespace detail

/// Exact brute-force minimum of ||k . omega|| over 0 < |k| <= K. Ties go to
/// the smallest |k|, then to the lexicographically smallest canonical k.
inline DiophantineReport min_dot_norm(const Frequency& omega, std::int64_t K)
{
    const std::size_t d = omega.dim();
    detail::check_scan(d, K);
    DiophantineReport best;
    best.K = K;
    std::int64_t best_norm = 0;
    auto consider = [&](std::span<const std::int64_t> k) {
        const double v = dist_to_Z(dot(k, omega));
        const std::int64_t n = max_norm(k);
        if (best.argmin.empty() || v < best.delta || (v == best.delta && n < best_norm)) {
            best.delta = v;
            best.argmin.assign(k.begin(), k.end());
            best_norm = n;
        }
    };
    if (d == 1) {
        IntVec k(1);
        for (std::int64_t m = 1; m <= K; ++m) {
            k[0] = m;
            consider(k);
        }
    } else {
        detail::for_each_canonical(d, K, consider);
    }
    return best;
}

/// Some k with 0 < |k| <= K and ||k . omega|| <= tol, smallest |k| first,
/// lexicographic among equals. With tol = 0 this detects k . omega being an
/// integer exactly in floating point.
inline std::optional<IntVec> rational_dependence(const Frequency& omega, std::int64_t K, double tol)
{
    require(tol >= 0.0, ErrorKind::InvalidArgument, "tolerance must be >= 0");
    const std::size_t d = omega.dim();
    detail::check_scan(d, K);
    std::optional<IntVec> found;
    std::int64_t found_norm = 0;
    detail::for_each_canonical(d, K, [&](std::span<const std::int64_t> k) {
        if (dist_to_Z(dot(k, omega)) > tol)
            return;
        const std::int64_t n = max_norm(k);
        if (!found || n < found_norm || (n == found_norm && detail::lex_less(k, *found))) {
            found = IntVec(k.begin(), k.end());
            found_norm = n;
        }
    });
    return found;
}

// ---------------------------------------------------------------------------
// SL(d, Z) automorphisms
// ---------------------------------------------------------------------------

using IntMatrix = std::vector<IntVec>;

namespace detail {

// Extended Euclid on signed inputs: returns (g, x, y) with a x + b y = g >= 0.
inline std::tuple<std::int64_t, std::int64_t, std::int64_t> ext_gcd(std::int64_t a, std::int64_t b)
{
    std::int64_t old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
    while (r != 0) {
        const std::int64_t q = old_r / r;
        std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
        std::tie(old_s, s) = std::make_pair(s, old_s - q * s);
        std::tie(old_t, t) = std::make_pair(t, old_t - q * t);
    }
    if (old_r < 0) {
        old_r = -old_r;
        old_s = -old_s;
        old_t = -old_t;
    }
    return {old_r, old_s, old_t};
}

inline std::int64_t gcd_all(std::span<const std::int64_t> k)
{
    std::int64_t g = 0;
    for (auto v : k)
        g = std::gcd(g, std::abs(v));
    return g;
}

using Wide = __int128;

// Exact determinant by fraction-free (Bareiss) elimination.
inline Wide determinant(const IntMatrix& m)
{
    const std::size_t n = m.size();
    if (n == 0)
        return 1;
    std::vector<std::vector<Wide>> a(n, std::vector<Wide>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a[i][j] = m[i][j];
    Wide sign = 1, prev = 1;
    for (std::size_t p = 0; p + 1 < n; ++p) {
        if (a[p][p] == 0) {
            std::size_t swap_row = p + 1;
            while (swap_row < n && a[swap_row][p] == 0)
                ++swap_row;
            if (swap_row == n)
                return 0;
            std::swap(a[p], a[swap_row]);
            sign = -sign;
        }
        for (std::size_t i = p + 1; i < n; ++i)
            for (std::size_t j = p + 1; j < n; ++j)
                a[i][j] = (a[i][j] * a[p][p] - a[i][p] * a[p][j]) / prev;
        prev = a[p][p];
    }
    return sign * a[n - 1][n - 1];
}

inline IntMatrix multiply(const IntMatrix& a, const IntMatrix& b)
{
    const std::size_t n = a.size();
    IntMatrix c(n, IntVec(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j)
                c[i][j] += a[i][k] * b[k][j];
    return c;
}

// Completes a primitive k to a unimodular matrix with first row k using a
// recursive extended-Euclid step; entries stay bounded by max |k_l|.
inline IntMatrix complete_row(const IntVec& k)
{
    const std::size_t d = k.size();
    if (d == 1) {
        require(k[0] == 1, ErrorKind::InvalidArgument, "SL(1,Z) is trivial; first row must be (1)");
        return {{1}};
    }
    const std::int64_t k1 = k[0];
    IntVec rest(k.begin() + 1, k.end());
    std::int64_t g = gcd_all(rest);
    if (g == 0) {
        // k = (+-1, 0, ..., 0)
        IntMatrix m(d, IntVec(d, 0));
        for (std::size_t i = 0; i < d; ++i)
            m[i][i] = 1;
        m[0][0] = k1;
        m[1][1] = k1;
        return m;
    }
    if (rest.size() == 1)
        g = rest[0]; // signed, so the reduced row is (1)
    IntVec u(rest.size());
    for (std::size_t j = 0; j < rest.size(); ++j)
        u[j] = rest[j] / g;
    auto [one, x, y] = ext_gcd(k1, g);
    (void)one;
    // Block [[k1, g], [-y, x]] has determinant k1 x + g y = 1.
    IntMatrix sub = complete_row(u);
    IntMatrix m(d, IntVec(d, 0));
    m[0][0] = k1;
    m[1][0] = -y;
    for (std::size_t j = 0; j + 1 < d; ++j) {
        m[0][j + 1] = g * sub[0][j];
        m[1][j + 1] = x * sub[0][j];
    }
    for (std::size_t i = 2; i < d; ++i)
        for (std::size_t j = 0; j + 1 < d; ++j)
            m[i][j + 1] = sub[i - 1][j];
    return m;
}

inline bool entries_bounded(const IntMatrix& m, std::int64_t bound)
{
    for (const auto& row : m)
        if (max_norm(row) > bound)
            return false;
    return true;
}

// Bounded exhaustive search over rows 2..d with entries in [-bound, bound].
inline std::optional<IntMatrix> search_completion(const IntVec& k, std::int64_t bound)
{
    const std::size_t d = k.size();
    const std::size_t free = d * (d - 1);
    const double cost = std::pow(2.0 * static_cast<double>(bound) + 1.0, static_cast<double>(free));
    if (cost > 1e7)
        return std::nullopt;
    IntVec entries(free, -bound);
    IntMatrix m(d, IntVec(d, 0));
    m[0] = k;
    for (;;) {
        for (std::size_t i = 1; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                m[i][j] = entries[(i - 1) * d + j];
        if (determinant(m) == 1)
            return m;
        std::size_t p = free;
        while (p > 0) {
            --p;
            if (entries[p] < bound) {
                ++entries[p];
                break;
            }
            entries[p] = -bound;
            if (p == 0)
                return std::nullopt;
        }
    }
}

} // namespace detail

/// An element of SL(d, Z) together with its exact integer inverse.
class Automorphism {
public:
    /// Validates det = +1 and computes the inverse by cofactors.
    explicit Automorphism(IntMatrix entries) : m_(std::move(entries))
    {
        const std::size_t d = m_.size();
        require(d >= 1, ErrorKind::InvalidArgument, "automorphism dimension must be >= 1");
        for (const auto& row : m_)
            require(row.size() == d, ErrorKind::InvalidArgument, "automorphism must be square");
        const auto det = detail::determinant(m_);
        require(det == 1, ErrorKind::InvalidArgument,
                "automorphism determinant must be +1, got " + std::to_string(static_cast<long long>(det)));
        inv_.assign(d, IntVec(d, 0));
        if (d == 1) {
            inv_[0][0] = 1;
        } else {
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) {
                    IntMatrix minor;
                    for (std::size_t r = 0; r < d; ++r) {
                        if (r == i)
                            continue;
                        IntVec row;
                        for (std::size_t c = 0; c < d; ++c)
                            if (c != j)
                                row.push_back(m_[r][c]);
                        minor.push_back(std::move(row));
                    }
                    const auto cof = detail::determinant(minor);
                    inv_[j][i] = static_cast<std::int64_t>(((i + j) % 2 == 0) ? cof : -cof);
                }
        }
        const IntMatrix check = detail::multiply(inv_, m_);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                require(check[i][j] == (i == j ? 1 : 0), ErrorKind::InvalidArgument,
                        "integer inverse failed");
    }

    static Automorphism identity(std::size_t d)
    {
        IntMatrix m(d, IntVec(d, 0));
        for (std::size_t i = 0; i < d; ++i)
            m[i][i] = 1;
        return Automorphism(std::move(m));
    }

    std::size_t dim() const noexcept { return m_.size(); }
    const IntMatrix& entries() const noexcept { return m_; }
    const IntMatrix& inverse() const noexcept { return inv_; }

    /// B x (no reduction mod 1).
    std::vector<double> apply(std::span<const double> x) const { return mul(m_, x); }
    std::vector<double> apply_inverse(std::span<const double> x) const { return mul(inv_, x); }

    Frequency apply(const Frequency& w) const { return Frequency(apply(w.components())); }
    Frequency apply_inverse(const Frequency& w) const
    {
        return Frequency(apply_inverse(w.components()));
    }

private:
    static std::vector<double> mul(const IntMatrix& m, std::span<const double> x)
    {
        require(x.size() == m.size(), ErrorKind::InvalidArgument, "dimension mismatch");
        std::vector<double> y(m.size(), 0.0);
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = 0; j < m.size(); ++j)
                y[i] += static_cast<double>(m[i][j]) * x[j];
        return y;
    }

    IntMatrix m_;
    IntMatrix inv_;
};

/// A matrix in SL(d, Z) whose first row is k and whose entries are bounded by
/// max |k_l|. Requires gcd(k) = 1.
inline Automorphism build_automorphism(const IntVec& k)
{
    require(!k.empty(), ErrorKind::InvalidArgument, "empty row");
    require(detail::gcd_all(k) == 1, ErrorKind::NotCoprime, "gcd of the row must be 1");
    const std::int64_t bound = max_norm(k);
    IntMatrix m = detail::complete_row(k);
    if (!detail::entries_bounded(m, bound) || detail::determinant(m) != 1) {
        auto searched = k.size() <= 3 ? detail::search_completion(k, bound) : std::nullopt;
        require(searched.has_value(), ErrorKind::PreconditionFailed,
                "no bounded SL(d,Z) completion found");
        m = std::move(*searched);
    }
    return Automorphism(std::move(m));
}

} // namespace qpc
