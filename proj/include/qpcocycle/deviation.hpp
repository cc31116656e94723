#pragma once

// Empirical statistics of x -> L_N(x) on uniform grids: Fourier decay,
// large-deviation and shift-difference set measures, step drift,
// Lojasiewicz sublevel fits and uniform L2 bounds. Every "measure" is a grid
// fraction and resolves only to 1/M^d.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <fftw3.h>
#include <nlohmann/json.hpp>

#include "qpcocycle/cocycle.hpp"
#include "qpcocycle/error.hpp"
#include "qpcocycle/lyapunov.hpp"
#include "qpcocycle/parallel.hpp"
#include "qpcocycle/quadrature.hpp"

namespace qpc {

struct Profile {
    std::size_t d = 0;
    std::size_t M = 0;
    std::int64_t N = 0;
    std::vector<double> nodes;  ///< M^d * d, node (i_1..i_d)/M, first index slowest
    std::vector<double> values; ///< L_N at the nodes; -inf marks underflow
    double mean = 0.0;          ///< over retained (finite) values
    std::size_t retained = 0;

    std::size_t size() const { return values.size(); }
    std::span<const double> node(std::size_t i) const { return {nodes.data() + i * d, d}; }
};

namespace detail {

inline bool is_power_of_two(std::size_t M) { return M >= 1 && (M & (M - 1)) == 0; }

inline void finish_profile(Profile& p)
{
    std::vector<double> kept;
    kept.reserve(p.values.size());
    for (double v : p.values)
        if (std::isfinite(v))
            kept.push_back(v);
    p.retained = kept.size();
    p.mean = kept.empty() ? 0.0 : pairwise_sum(kept) / static_cast<double>(kept.size());
}

} // namespace detail

/// (1/N) ln ||A_N(x)|| on the lattice grid (1/M) Z^d. Pass a renormalized
/// cocycle to sample L_N instead of L'_N.
template <MatrixFunction F>
Profile profile(const Cocycle<F>& C, std::int64_t N, std::size_t M)
{
    require(detail::is_power_of_two(M), ErrorKind::InvalidArgument, "grid size must be a power of two");
    const NodeSet nodes = make_nodes(QuadratureSpec::grid(M, 0.0), C.dim());
    Profile p;
    p.d = C.dim();
    p.M = M;
    p.N = N;
    p.nodes = nodes.points;
    p.values = log_norm_samples(C, N, nodes);
    detail::finish_profile(p);
    return p;
}

/// Wrap an externally computed sample vector on the lattice grid (tests and
/// synthetic tones).
inline Profile profile_from_values(std::size_t d, std::size_t M, std::vector<double> values,
                                   std::int64_t N = 0)
{
    require(detail::is_power_of_two(M), ErrorKind::InvalidArgument, "grid size must be a power of two");
    const NodeSet nodes = make_nodes(QuadratureSpec::grid(M, 0.0), d);
    require(values.size() == nodes.size(), ErrorKind::InvalidArgument, "expected M^d values");
    Profile p;
    p.d = d;
    p.M = M;
    p.N = N;
    p.nodes = nodes.points;
    p.values = std::move(values);
    detail::finish_profile(p);
    return p;
}

// ---------------------------------------------------------------------------
// Fourier coefficients
// ---------------------------------------------------------------------------

struct FourierReport {
    std::size_t d = 0;
    std::size_t M = 0;
    std::size_t K0 = 0;
    std::vector<cplx> coeffs; ///< c_k = M^{-d} sum f(x) e^{-2 pi i k.x}, FFT index order
    double clip_level = 0.0;  ///< T; values below -T and sentinels become -T
    std::size_t clipped = 0;
    double mean = 0.0;            ///< mean of the clipped profile
    double energy = 0.0;          ///< sum_k |c_k|^2
    double mean_square = 0.0;     ///< mean of the clipped profile squared
    double max_k_coeff = 0.0;     ///< d = 1: max_k |k| |c_k| over 0 < |k| <= M/2
    double tail_energy = 0.0;     ///< K0 * sum_{|k| > K0} |c_k|^2, |k| the max norm

    /// Signed frequency of FFT index i along one axis.
    std::int64_t frequency(std::size_t i) const
    {
        const auto s = static_cast<std::int64_t>(i);
        return i <= M / 2 ? s : s - static_cast<std::int64_t>(M);
    }

    cplx coeff(std::span<const std::int64_t> k) const
    {
        std::size_t idx = 0;
        for (std::size_t j = 0; j < d; ++j) {
            const auto m = static_cast<std::int64_t>(M);
            idx = idx * M + static_cast<std::size_t>(((k[j] % m) + m) % m);
        }
        return coeffs[idx];
    }
};

inline FourierReport fourier_coeffs(const Profile& p, std::size_t K0)
{
    require(K0 < p.M / 2, ErrorKind::InvalidArgument, "K0 must be < M/2");
    FourierReport r;
    r.d = p.d;
    r.M = p.M;
    r.K0 = K0;
    const std::size_t n = p.size();

    double ms = 0.0;
    {
        std::vector<double> sq;
        sq.reserve(n);
        for (double v : p.values)
            if (std::isfinite(v))
                sq.push_back(v * v);
        ms = sq.empty() ? 0.0 : pairwise_sum(sq) / static_cast<double>(sq.size());
    }
    r.clip_level = 2.0 * (std::sqrt(ms) + 10.0);

    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = p.values[i];
        if (!std::isfinite(v) || v < -r.clip_level) {
            f[i] = -r.clip_level;
            ++r.clipped;
        } else {
            f[i] = v;
        }
    }
    r.mean = pairwise_sum(f) / static_cast<double>(n);
    {
        std::vector<double> sq(n);
        for (std::size_t i = 0; i < n; ++i)
            sq[i] = f[i] * f[i];
        r.mean_square = pairwise_sum(sq) / static_cast<double>(n);
    }

    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    std::vector<int> dims(p.d, static_cast<int>(p.M));
    fftw_plan plan = fftw_plan_dft(static_cast<int>(p.d), dims.data(), buf, buf, FFTW_FORWARD,
                                   FFTW_ESTIMATE);
    for (std::size_t i = 0; i < n; ++i) {
        buf[i][0] = f[i];
        buf[i][1] = 0.0;
    }
    fftw_execute(plan);
    r.coeffs.resize(n);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        r.coeffs[i] = cplx(buf[i][0] * scale, buf[i][1] * scale);
    fftw_destroy_plan(plan);
    fftw_free(buf);

    std::vector<double> energy(n), tail;
    std::vector<std::size_t> idx(p.d, 0);
    for (std::size_t i = 0; i < n; ++i) {
        energy[i] = std::norm(r.coeffs[i]);
        std::int64_t kmax = 0;
        for (std::size_t j = 0; j < p.d; ++j)
            kmax = std::max(kmax, std::abs(r.frequency(idx[j])));
        if (kmax > static_cast<std::int64_t>(K0))
            tail.push_back(energy[i]);
        if (p.d == 1 && kmax > 0)
            r.max_k_coeff = std::max(r.max_k_coeff, static_cast<double>(kmax) * std::abs(r.coeffs[i]));
        std::size_t j = p.d;
        while (j > 0) {
            --j;
            if (++idx[j] < p.M)
                break;
            idx[j] = 0;
        }
    }
    r.energy = pairwise_sum(energy);
    r.tail_energy = static_cast<double>(K0) * pairwise_sum(tail);
    return r;
}

// ---------------------------------------------------------------------------
// Set measures
// ---------------------------------------------------------------------------

struct MeasureEstimate {
    double threshold = 0.0;
    double measured_fraction = 0.0;
    std::size_t count = 0; ///< nodes exceeding
    std::size_t total = 0; ///< nodes counted
    std::optional<double> predicted_bound;
    std::map<std::string, double> parameters;
};

inline nlohmann::json to_json(const MeasureEstimate& m)
{
    nlohmann::json j{{"threshold", m.threshold}, {"measured_fraction", m.measured_fraction},
                     {"count", m.count},         {"total", m.total},
                     {"parameters", m.parameters}};
    j["predicted_bound"] = m.predicted_bound ? nlohmann::json(*m.predicted_bound) : nlohmann::json();
    return j;
}

namespace detail {

inline MeasureEstimate measure(double threshold, std::size_t count, std::size_t total)
{
    MeasureEstimate m;
    m.threshold = threshold;
    m.count = count;
    m.total = total;
    m.measured_fraction = total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total);
    return m;
}

/// |u - v| > t, with a lone sentinel counted as exceeding; both sentinel
/// returns nullopt (node not counted).
inline std::optional<bool> exceeds(double u, double v, double t)
{
    const bool fu = std::isfinite(u), fv = std::isfinite(v);
    if (!fu && !fv)
        return std::nullopt;
    if (fu != fv)
        return true;
    return std::abs(u - v) > t;
}

template <MatrixFunction F>
std::vector<double> shifted_samples(const Cocycle<F>& C, std::int64_t N, const Profile& p,
                                    std::span<const double> shift)
{
    std::vector<double> out(p.size());
    parallel_for(p.size(), [&](std::size_t i) {
        std::vector<double> x(p.d);
        for (std::size_t j = 0; j < p.d; ++j)
            x[j] = wrap_unit(p.nodes[i * p.d + j] + shift[j]);
        out[i] = iterate_log_norm(C, N, x).log_norm_avg;
    });
    return out;
}

} // namespace detail

/// Fraction of retained nodes with |L_N(x) - mean| > kappa.
inline MeasureEstimate ldt_empirical(const Profile& p, double kappa)
{
    std::size_t count = 0;
    for (double v : p.values)
        if (std::isfinite(v) && std::abs(v - p.mean) > kappa)
            ++count;
    MeasureEstimate m = detail::measure(kappa, count, p.retained);
    m.parameters = {{"kappa", kappa}, {"N", static_cast<double>(p.N)}};
    return m;
}

/// Fraction of grid nodes with |L_N(x) - L_N(x + a)| > kappa; predicted bound
/// kappa^{-3} |a| up to the caller's constant.
template <MatrixFunction F>
MeasureEstimate cdt_empirical(const Cocycle<F>& C, std::int64_t N, std::span<const double> a,
                              double kappa, std::size_t M)
{
    require(a.size() == C.dim(), ErrorKind::InvalidArgument, "shift dimension mismatch");
    require(kappa > 0.0, ErrorKind::InvalidArgument, "kappa must be positive");
    double anorm = 0.0;
    for (double aj : a)
        anorm += dist_to_Z(aj);
    const double bound = anorm / (kappa * kappa * kappa);
    require(bound < 1.0, ErrorKind::PreconditionFailed,
            "kappa^-3 |a| >= 1: the shift is too large for this kappa");
    const Profile p = profile(C, N, M);
    const auto shifted = detail::shifted_samples(C, N, p, a);
    std::size_t count = 0, total = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (auto e = detail::exceeds(p.values[i], shifted[i], kappa)) {
            ++total;
            count += *e ? 1 : 0;
        }
    }
    MeasureEstimate m = detail::measure(kappa, count, total);
    m.predicted_bound = bound;
    m.parameters = {{"kappa", kappa}, {"N", static_cast<double>(N)}, {"a_norm", anorm},
                    {"M", static_cast<double>(M)}};
    return m;
}

/// Fraction of nodes violating |L_N(x) - L_N(x + omega)| <= C N^{-a},
/// reported against e^{-N^{1-a}}.
template <MatrixFunction F>
MeasureEstimate shift_drift_empirical(const Cocycle<F>& C, std::int64_t N, double a_exponent,
                                      double C_const, std::size_t M)
{
    require(a_exponent > 0.0 && a_exponent < 1.0, ErrorKind::InvalidArgument,
            "exponent a must lie in (0, 1)");
    const Profile p = profile(C, N, M);
    const auto shifted = detail::shifted_samples(C, N, p, C.omega.components());
    const double Nd = static_cast<double>(N);
    const double t = C_const * std::pow(Nd, -a_exponent);
    std::size_t count = 0, total = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (auto e = detail::exceeds(p.values[i], shifted[i], t)) {
            ++total;
            count += *e ? 1 : 0;
        }
    }
    MeasureEstimate m = detail::measure(t, count, total);
    m.predicted_bound = std::exp(-std::pow(Nd, 1.0 - a_exponent));
    m.parameters = {{"a", a_exponent}, {"C", C_const}, {"N", Nd}, {"M", static_cast<double>(M)}};
    return m;
}

// ---------------------------------------------------------------------------
// Lojasiewicz sublevel sets
// ---------------------------------------------------------------------------

struct LojasiewiczFit {
    std::vector<MeasureEstimate> estimates; ///< one per t, in the order given
    std::optional<double> S;
    std::optional<double> b;
    std::size_t points_used = 0;
};

/// |{x : |g(x)| < t}| on the midpoint grid, and a least-squares fit of
/// ln(fraction) = ln S + b ln t over points with at least 10 nodes and
/// fraction <= 1/4.
inline LojasiewiczFit lojasiewicz_fit(const TrigPoly& g, std::span<const double> t_grid, std::size_t M)
{
    require(!g.is_zero(), ErrorKind::IdenticallyZero, "g vanishes identically");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        require(t_grid[i] > 0.0, ErrorKind::InvalidArgument, "thresholds must be positive");
        if (i > 0)
            require(t_grid[i] < t_grid[i - 1], ErrorKind::InvalidArgument,
                    "thresholds must be decreasing");
    }
    const NodeSet nodes = make_nodes(QuadratureSpec::grid(M, 0.5), g.dim());
    std::vector<double> mod(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) { mod[i] = std::abs(g(nodes.point(i))); });
    std::sort(mod.begin(), mod.end());

    LojasiewiczFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double t : t_grid) {
        const auto count = static_cast<std::size_t>(std::lower_bound(mod.begin(), mod.end(), t) - mod.begin());
        MeasureEstimate m = detail::measure(t, count, mod.size());
        m.parameters = {{"t", t}, {"M", static_cast<double>(M)}};
        if (count >= 10 && m.measured_fraction <= 0.25) {
            const double x = std::log(t), y = std::log(m.measured_fraction);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++fit.points_used;
        }
        fit.estimates.push_back(std::move(m));
    }
    if (fit.points_used >= 2) {
        const double n = static_cast<double>(fit.points_used);
        const double den = n * sxx - sx * sx;
        if (den > 0.0) {
            fit.b = (n * sxy - sx * sy) / den;
            fit.S = std::exp((sy - *fit.b * sx) / n);
        }
    }
    return fit;
}

// ---------------------------------------------------------------------------
// Uniform L2 bounds
// ---------------------------------------------------------------------------

struct L2Row {
    std::int64_t N = 0;
    double rms = 0.0;
    double retained_fraction = 0.0;
};

struct L2Table {
    std::vector<L2Row> rows;
    double det_log_rms = 0.0; ///< RMS of ln |det A| on the midpoint grid, clipped at ln(clip_floor)
    std::size_t det_clipped = 0;
    double max_min_ratio = 0.0;
    bool growth_flag = false; ///< ratio above 2
};

template <MatrixFunction F>
L2Table l2_uniform_check(const Cocycle<F>& C, std::span<const std::int64_t> N_list, std::size_t M,
                         double clip_floor = std::exp(-700.0))
{
    require(!N_list.empty(), ErrorKind::InvalidArgument, "empty N list");
    L2Table t;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (auto N : N_list) {
        const Profile p = profile(C, N, M);
        std::vector<double> sq;
        sq.reserve(p.size());
        for (double v : p.values)
            if (std::isfinite(v))
                sq.push_back(v * v);
        L2Row row;
        row.N = N;
        row.rms = sq.empty() ? 0.0 : std::sqrt(pairwise_sum(sq) / static_cast<double>(sq.size()));
        row.retained_fraction = static_cast<double>(p.retained) / static_cast<double>(p.size());
        lo = std::min(lo, row.rms);
        hi = std::max(hi, row.rms);
        t.rows.push_back(row);
    }
    t.max_min_ratio = lo > 0.0 ? hi / lo : (hi > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    t.growth_flag = t.max_min_ratio > 2.0;

    // midpoint nodes: the lattice contains the zeros of typical a(x) = cos 2 pi x
    const NodeSet nodes = make_nodes(QuadratureSpec::grid(M, 0.5), C.dim());
    const double floor_log = std::log(clip_floor);
    std::vector<double> sq(nodes.size());
    std::vector<unsigned char> clipped(nodes.size(), 0);
    parallel_for(nodes.size(), [&](std::size_t i) {
        const double ad = std::abs(C.A(nodes.point(i)).det());
        double l = floor_log;
        if (ad >= clip_floor)
            l = std::log(ad);
        else
            clipped[i] = 1;
        sq[i] = l * l;
    });
    for (auto c : clipped)
        t.det_clipped += c;
    t.det_log_rms = std::sqrt(pairwise_sum(sq) / static_cast<double>(sq.size()));
    return t;
}

} // namespace qpc
