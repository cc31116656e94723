#pragma once

// Checkers for the Avalanche Principle and its consequence for cocycles.
//
// For a chain A_1..A_n of SL(2, C) matrices the standard form compares
//   ln||A_n ... A_1|| + sum_{j=2}^{n-1} ln||A_j|| - sum_{j=1}^{n-1} ln||A_{j+1} A_j||
// against C n / mu, mu = min ||A_j||. The variant keeps the whole middle sum
// j = 1..n and bounds the residual by n / mu^{1/3} + 4 C ln mu under the
// norm window mu <= ||A_j|| <= mu^C. The constants are never known; they are
// parameters here and ensemble runs estimate empirical ceilings.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpcocycle/cocycle.hpp"
#include "qpcocycle/error.hpp"
#include "qpcocycle/mat2.hpp"
#include "qpcocycle/parallel.hpp"

namespace qpc {

enum class APVariant { Standard, Variant };

struct APReport {
    APVariant variant = APVariant::Standard;
    std::size_t n = 0;
    double mu = 0.0;
    double C = 0.0;
    bool hypothesis_min_norm_ok = false; ///< mu > n (standard) or max ||A_j|| <= mu^C (variant)
    bool hypothesis_gap_ok = false;      ///< max_gap <= ln(mu) / 2
    double max_gap = 0.0;
    double residual = 0.0;
    double bound = 0.0;
};

namespace detail {

// ln of the per-step renormalization factors of A_k ... A_1; their sum is
// ln ||A_k ... A_1||. Keeping the individual terms lets the residuals be
// formed by one correctly rounded sum, so exact telescoping cancels to 0.
inline std::vector<double> chain_step_logs(std::span<const Mat2> chain)
{
    std::vector<double> logs;
    logs.reserve(chain.size());
    Mat2 M = Mat2::identity();
    for (const auto& A : chain) {
        M = A * M;
        const double n = op_norm(M);
        if (!(n >= kUnderflowFloor) || !std::isfinite(n))
            throw Error(ErrorKind::Singular, "chain product underflowed");
        logs.push_back(std::log(n));
        M *= 1.0 / n;
    }
    return logs;
}

inline APReport ap_core(std::span<const Mat2> chain, APVariant variant)
{
    const std::size_t n = chain.size();
    require(n >= 3, ErrorKind::ChainTooShort, "the chain needs n >= 3 matrices");
    for (std::size_t j = 0; j < n; ++j)
        require(std::abs(chain[j].det() - 1.0) <= 1e-9, ErrorKind::NotUnimodular,
                "matrix " + std::to_string(j + 1) + " is not in SL(2, C)");

    std::vector<double> single(n);
    for (std::size_t j = 0; j < n; ++j)
        single[j] = chain_step_logs(chain.subspan(j, 1))[0];

    std::vector<double> terms = chain_step_logs(chain);
    const std::size_t first = variant == APVariant::Standard ? 1 : 0;
    const std::size_t last = variant == APVariant::Standard ? n - 1 : n;
    for (std::size_t j = first; j < last; ++j)
        terms.push_back(single[j]);

    APReport r;
    r.variant = variant;
    r.n = n;
    r.max_gap = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const auto pair = chain_step_logs(chain.subspan(j, 2));
        terms.push_back(-pair[0]);
        terms.push_back(-pair[1]);
        const double g[4] = {single[j], single[j + 1], -pair[0], -pair[1]};
        r.max_gap = std::max(r.max_gap, std::abs(exact_sum(g)));
    }
    r.residual = std::abs(exact_sum(terms));
    double min_log = std::numeric_limits<double>::infinity();
    for (double s : single)
        min_log = std::min(min_log, s);
    r.mu = std::exp(min_log);
    r.hypothesis_gap_ok = r.max_gap <= 0.5 * min_log;
    return r;
}

} // namespace detail

/// Standard Avalanche Principle check with caller-supplied constant C.
inline APReport ap_check(std::span<const Mat2> chain, double C_assumed)
{
    APReport r = detail::ap_core(chain, APVariant::Standard);
    r.C = C_assumed;
    r.hypothesis_min_norm_ok = r.mu > static_cast<double>(r.n);
    r.bound = C_assumed * static_cast<double>(r.n) / r.mu;
    return r;
}

/// Variant check: mu = min ||A_j||, window max ||A_j|| <= mu^C.
inline APReport ap_variant_check(std::span<const Mat2> chain, double C_exponent)
{
    APReport r = detail::ap_core(chain, APVariant::Variant);
    r.C = C_exponent;
    double max_log = 0.0;
    for (const auto& A : chain)
        max_log = std::max(max_log, std::log(op_norm(A)));
    r.hypothesis_min_norm_ok = max_log <= C_exponent * std::log(r.mu) * (1.0 + 1e-12);
    r.bound = static_cast<double>(r.n) / std::cbrt(r.mu) + 4.0 * C_exponent * std::log(r.mu);
    return r;
}

/// Smallest exponent C with max ||A_j|| <= (min ||A_j||)^C.
inline double norm_window_exponent(std::span<const Mat2> chain)
{
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& A : chain) {
        const double l = std::log(op_norm(A));
        lo = std::min(lo, l);
        hi = std::max(hi, l);
    }
    return hi / lo;
}

inline nlohmann::json to_json(const APReport& r)
{
    return {{"variant", r.variant == APVariant::Standard ? "standard" : "variant"},
            {"n", r.n},
            {"mu", r.mu},
            {"C", r.C},
            {"hypothesis_min_norm_ok", r.hypothesis_min_norm_ok},
            {"hypothesis_gap_ok", r.hypothesis_gap_ok},
            {"max_gap", r.max_gap},
            {"residual", r.residual},
            {"bound", r.bound},
            {"middle_sum", r.variant == APVariant::Standard ? "j=2..n-1" : "j=1..n"}};
}

// ---------------------------------------------------------------------------
// Consequence for cocycles: compare L_{N1}(x) with L_{N0}(x) and L_{2 N0}(x).
// ---------------------------------------------------------------------------

struct APConsequenceReport {
    std::map<std::string, bool> hypotheses; ///< keyed "eq:169", "eq:170", "eq:171"
    double L_N0 = 0.0, L_2N0 = 0.0, L_N1 = 0.0;
    double lhs = 0.0; ///< |L_{N1}(x) + L_{N0}(x) - 2 L_{2N0}(x)|
    double rhs = 0.0; ///< delta / 20 + C |L_{N0}(x)| N0 / N1
    bool hypotheses_hold = false;
    std::optional<bool> conclusion_holds; ///< only when every hypothesis holds
};

/// Pointwise check of the two-scale consequence. The cocycle should already
/// be renormalized (or SL(2)); C is the caller's absolute constant.
template <MatrixFunction F>
APConsequenceReport ap_consequence_check(const Cocycle<F>& cocycle, std::span<const double> x,
                                         std::int64_t N0, std::int64_t N1, double delta,
                                         double C_const)
{
    require(N0 >= 1 && N1 >= N0, ErrorKind::InvalidArgument, "need 1 <= N0 <= N1");
    require(N1 % N0 == 0, ErrorKind::NotDivisible, "N0 must divide N1");
    auto L = [&](std::int64_t N, std::span<const double> at) {
        return iterate_log_norm(cocycle, N, at).log_norm_avg;
    };
    APConsequenceReport r;
    r.L_N0 = L(N0, x);
    r.L_2N0 = L(2 * N0, x);
    r.L_N1 = L(N1, x);
    r.hypotheses["eq:169"] = r.L_N0 > delta;
    r.hypotheses["eq:170"] = std::abs(r.L_N0 - r.L_2N0) < r.L_N0 / 100.0;
    bool shifts_ok = true;
    std::vector<double> shifted(x.size());
    for (std::int64_t j = 1; j <= N1 / N0 && shifts_ok; ++j) {
        for (std::size_t i = 0; i < x.size(); ++i)
            shifted[i] = wrap_unit(x[i] + static_cast<double>(j * N0) * cocycle.omega[i]);
        for (std::int64_t N : {N0, 2 * N0})
            if (!(std::abs(L(N, x) - L(N, shifted)) < delta / 100.0))
                shifts_ok = false;
    }
    r.hypotheses["eq:171"] = shifts_ok;
    r.lhs = std::abs(r.L_N1 + r.L_N0 - 2.0 * r.L_2N0);
    r.rhs = delta / 20.0 + C_const * std::abs(r.L_N0) * static_cast<double>(N0) /
                               static_cast<double>(N1);
    r.hypotheses_hold = r.hypotheses["eq:169"] && r.hypotheses["eq:170"] && shifts_ok;
    if (r.hypotheses_hold)
        r.conclusion_holds = r.lhs < r.rhs;
    return r;
}

inline nlohmann::json to_json(const APConsequenceReport& r)
{
    nlohmann::json j{{"hypotheses", r.hypotheses}, {"L_N0", r.L_N0}, {"L_2N0", r.L_2N0},
                     {"L_N1", r.L_N1},             {"lhs", r.lhs},   {"rhs", r.rhs},
                     {"hypotheses_hold", r.hypotheses_hold}};
    j["conclusion_holds"] = r.conclusion_holds ? nlohmann::json(*r.conclusion_holds) : nlohmann::json();
    return j;
}

// ---------------------------------------------------------------------------
// Seeded ensembles of hyperbolic chains
// ---------------------------------------------------------------------------

namespace detail {

inline double unit_uniform(std::mt19937_64& rng)
{
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double std_normal(std::mt19937_64& rng)
{
    const double u = unit_uniform(rng), v = unit_uniform(rng);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

inline Mat2 random_su2(std::mt19937_64& rng)
{
    cplx a(std_normal(rng), std_normal(rng)), b(std_normal(rng), std_normal(rng));
    const double n = std::sqrt(std::norm(a) + std::norm(b));
    a /= n;
    b /= n;
    return Mat2{{a, -std::conj(b), b, std::conj(a)}};
}

} // namespace detail

/// U_j diag(s_j, 1/s_j) V_j with Haar-like SU(2) factors and ln s_j uniform in
/// [ln mu_lo, ln mu_hi]; every factor has norm exactly s_j and det 1.
inline std::vector<Mat2> random_hyperbolic_chain(std::mt19937_64& rng, std::size_t n, double mu_lo,
                                                 double mu_hi)
{
    std::vector<Mat2> chain;
    chain.reserve(n);
    const double a = std::log(mu_lo), b = std::log(mu_hi);
    for (std::size_t j = 0; j < n; ++j) {
        const double s = std::exp(a + (b - a) * detail::unit_uniform(rng));
        chain.push_back(detail::random_su2(rng) * Mat2::diag(s, 1.0 / s) * detail::random_su2(rng));
    }
    return chain;
}

struct APEnsembleSpec {
    std::size_t chains = 1000;
    std::size_t n_min = 3;
    std::size_t n_max = 100;
    double mu_min = 1e3;
    double window_exponent = 101.0 / 99.0; ///< norms drawn in [mu_min, mu_min^window]
    double C_assumed = 10.0;
    std::uint64_t seed = 1;
    std::size_t max_attempts = 100; ///< redraws per chain until both hypotheses hold
};

struct APEnsembleRow {
    APReport standard;
    APReport variant;
    std::size_t attempts = 0;
};

/// Chains satisfying both hypotheses of the standard form, with both checks
/// evaluated. Deterministic per seed.
inline std::vector<APEnsembleRow> ap_ensemble(const APEnsembleSpec& spec)
{
    require(spec.n_min >= 3 && spec.n_max >= spec.n_min, ErrorKind::InvalidArgument,
            "chain lengths must satisfy 3 <= n_min <= n_max");
    std::mt19937_64 rng(spec.seed);
    std::vector<APEnsembleRow> rows;
    rows.reserve(spec.chains);
    const double mu_hi = std::pow(spec.mu_min, spec.window_exponent);
    for (std::size_t c = 0; c < spec.chains; ++c) {
        const std::size_t n = spec.n_min + static_cast<std::size_t>(rng() % (spec.n_max - spec.n_min + 1));
        for (std::size_t attempt = 1;; ++attempt) {
            auto chain = random_hyperbolic_chain(rng, n, spec.mu_min, mu_hi);
            APReport s = ap_check(chain, spec.C_assumed);
            if ((s.hypothesis_min_norm_ok && s.hypothesis_gap_ok) || attempt >= spec.max_attempts) {
                rows.push_back({s, ap_variant_check(chain, norm_window_exponent(chain)), attempt});
                break;
            }
        }
    }
    return rows;
}

} // namespace qpc
