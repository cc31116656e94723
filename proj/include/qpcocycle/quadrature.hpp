#pragma once

// Node sets for integrals over T^d: uniform grids (optionally shifted to
// cell midpoints), Halton low-discrepancy points and seeded Monte Carlo.
// All rules carry equal weights 1/n.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qpcocycle/error.hpp"
#include "qpcocycle/parallel.hpp"

namespace qpc {

enum class QuadratureKind { UniformGrid, LowDiscrepancy, MonteCarlo };

inline std::string to_string(QuadratureKind k)
{
    switch (k) {
    case QuadratureKind::UniformGrid: return "uniform-grid";
    case QuadratureKind::LowDiscrepancy: return "low-discrepancy";
    case QuadratureKind::MonteCarlo: return "monte-carlo";
    }
    return "unknown";
}

inline QuadratureKind quadrature_kind_from_string(const std::string& s)
{
    if (s == "uniform-grid")
        return QuadratureKind::UniformGrid;
    if (s == "low-discrepancy")
        return QuadratureKind::LowDiscrepancy;
    if (s == "monte-carlo")
        return QuadratureKind::MonteCarlo;
    throw Error(ErrorKind::InvalidArgument, "unknown quadrature kind '" + s + "'");
}

struct QuadratureSpec {
    QuadratureKind kind = QuadratureKind::UniformGrid;
    std::size_t points_per_dim = 4096; // uniform grid
    std::size_t total_points = 65536;  // low-discrepancy and Monte Carlo
    std::uint64_t seed = 0;            // Monte Carlo only
    double clip_floor = std::exp(-700.0);
    // Grid nodes sit at (i + offset) / M. 0.5 gives the midpoint rule; 0
    // gives the lattice (1/M) Z^d that integer matrices map onto itself.
    double grid_offset = 0.5;

    static QuadratureSpec grid(std::size_t per_dim, double offset = 0.5)
    {
        QuadratureSpec q;
        q.kind = QuadratureKind::UniformGrid;
        q.points_per_dim = per_dim;
        q.grid_offset = offset;
        return q;
    }

    static QuadratureSpec halton(std::size_t total)
    {
        QuadratureSpec q;
        q.kind = QuadratureKind::LowDiscrepancy;
        q.total_points = total;
        return q;
    }

    static QuadratureSpec monte_carlo(std::size_t total, std::uint64_t seed)
    {
        QuadratureSpec q;
        q.kind = QuadratureKind::MonteCarlo;
        q.total_points = total;
        q.seed = seed;
        return q;
    }

    bool operator==(const QuadratureSpec&) const = default;
};

/// 2^12 grid points for d = 1, 2^7 per dimension for d = 2, 2^16 Halton
/// points for d >= 3.
inline QuadratureSpec default_quadrature(std::size_t d)
{
    if (d == 1)
        return QuadratureSpec::grid(4096);
    if (d == 2)
        return QuadratureSpec::grid(128);
    return QuadratureSpec::halton(65536);
}

struct NodeSet {
    std::size_t d = 0;
    std::vector<double> points;       // n * d, row-major
    std::vector<unsigned char> coarse; // membership in the embedded coarse rule

    std::size_t size() const { return d == 0 ? 0 : points.size() / d; }
    std::span<const double> point(std::size_t i) const { return {points.data() + i * d, d}; }
};

namespace detail {

inline std::uint64_t nth_prime(std::size_t n)
{
    std::vector<std::uint64_t> primes;
    for (std::uint64_t c = 2; primes.size() <= n; ++c) {
        bool prime = true;
        for (auto p : primes) {
            if (p * p > c)
                break;
            if (c % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime)
            primes.push_back(c);
    }
    return primes[n];
}

inline double radical_inverse(std::uint64_t i, std::uint64_t base)
{
    double inv = 1.0 / static_cast<double>(base);
    double f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

} // namespace detail

/// Nodes of the rule. `coarse` marks the embedded rule used for the error
/// indicator: the even-index subgrid for grids, the first half of the
/// sequence for Halton points; Monte Carlo leaves it empty.
inline NodeSet make_nodes(const QuadratureSpec& q, std::size_t d)
{
    require(d >= 1, ErrorKind::InvalidArgument, "dimension must be >= 1");
    NodeSet nodes;
    nodes.d = d;
    switch (q.kind) {
    case QuadratureKind::UniformGrid: {
        const std::size_t M = q.points_per_dim;
        require(M >= 1, ErrorKind::InvalidArgument, "grid needs >= 1 point per dimension");
        const double total = std::pow(static_cast<double>(M), static_cast<double>(d));
        require(total <= 1e9, ErrorKind::InvalidArgument, "grid too large");
        const auto n = static_cast<std::size_t>(total);
        nodes.points.resize(n * d);
        nodes.coarse.assign(n, 0);
        std::vector<std::size_t> idx(d, 0);
        for (std::size_t i = 0; i < n; ++i) {
            bool even = true;
            for (std::size_t j = 0; j < d; ++j) {
                nodes.points[i * d + j] =
                    (static_cast<double>(idx[j]) + q.grid_offset) / static_cast<double>(M);
                even = even && (idx[j] % 2 == 0);
            }
            nodes.coarse[i] = (M % 2 == 0 && even) ? 1 : 0;
            // first coordinate varies slowest
            std::size_t j = d;
            while (j > 0) {
                --j;
                if (++idx[j] < M)
                    break;
                idx[j] = 0;
            }
        }
        break;
    }
    case QuadratureKind::LowDiscrepancy: {
        const std::size_t n = q.total_points;
        require(n >= 1, ErrorKind::InvalidArgument, "need >= 1 point");
        nodes.points.resize(n * d);
        nodes.coarse.assign(n, 0);
        std::vector<std::uint64_t> bases(d);
        for (std::size_t j = 0; j < d; ++j)
            bases[j] = detail::nth_prime(j);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j)
                nodes.points[i * d + j] = detail::radical_inverse(i + 1, bases[j]);
            nodes.coarse[i] = (i < n / 2) ? 1 : 0;
        }
        break;
    }
    case QuadratureKind::MonteCarlo: {
        const std::size_t n = q.total_points;
        require(n >= 1, ErrorKind::InvalidArgument, "need >= 1 point");
        nodes.points.resize(n * d);
        std::mt19937_64 rng(q.seed);
        // 53 random mantissa bits: identical streams on every platform
        for (auto& p : nodes.points)
            p = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        break;
    }
    }
    return nodes;
}

struct SampleMean {
    double value = 0.0;
    double excised_mass = 0.0;
    double error = 0.0;
    std::size_t retained = 0;
};

/// Equal-weight mean over the finite samples; non-finite samples are excised
/// and the weights renormalized. The error indicator is the discrepancy to
/// the embedded coarse rule, or the standard error for Monte Carlo.
inline SampleMean sample_mean(std::span<const double> values, const NodeSet& nodes)
{
    SampleMean out;
    std::vector<double> kept, kept_coarse;
    kept.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            continue;
        kept.push_back(values[i]);
        if (!nodes.coarse.empty() && nodes.coarse[i])
            kept_coarse.push_back(values[i]);
    }
    out.retained = kept.size();
    out.excised_mass = values.empty() ? 0.0
                                      : static_cast<double>(values.size() - kept.size()) /
                                            static_cast<double>(values.size());
    if (kept.empty())
        return out;
    out.value = pairwise_sum(kept) / static_cast<double>(kept.size());
    if (!nodes.coarse.empty()) {
        if (!kept_coarse.empty())
            out.error = std::abs(out.value - pairwise_sum(kept_coarse) /
                                                 static_cast<double>(kept_coarse.size()));
    } else if (kept.size() > 1) {
        std::vector<double> sq(kept.size());
        for (std::size_t i = 0; i < kept.size(); ++i)
            sq[i] = (kept[i] - out.value) * (kept[i] - out.value);
        const double var = pairwise_sum(sq) / static_cast<double>(kept.size() - 1);
        out.error = std::sqrt(var / static_cast<double>(kept.size()));
    }
    return out;
}

} // namespace qpc
