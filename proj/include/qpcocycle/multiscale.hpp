#pragma once

// Scale arithmetic of the multiscale argument: Liouville gates and ladders,
// mixed-frequency gates and ladders, the induction schedule with its
// automorphism steps, empirical verification of a ladder, and the
// change-of-variables invariance check.
//
// Infinite caps are carried as +inf and serialized as the string
// "unbounded"; every ladder is clamped by a caller-supplied max scale.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpcocycle/cocycle.hpp"
#include "qpcocycle/error.hpp"
#include "qpcocycle/lyapunov.hpp"
#include "qpcocycle/quadrature.hpp"
#include "qpcocycle/torus.hpp"

namespace qpc {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Finite doubles as numbers, +inf as "unbounded", -inf as "-unbounded".
inline nlohmann::json json_real(double v)
{
    if (std::isnan(v))
        return nullptr;
    if (std::isinf(v))
        return v > 0 ? "unbounded" : "-unbounded";
    return v;
}

// ---------------------------------------------------------------------------
// Gates
// ---------------------------------------------------------------------------

struct GateReport {
    std::map<std::string, bool> conditions; ///< keyed by equation name
    std::map<std::string, double> values;   ///< both sides of each inequality
    double freq_norm = 0.0;                 ///< ||q0 omega|| (or of omega_1)
    double cap = kUnbounded;                ///< largest admissible scale (exclusive)
    bool passes = false;
};

inline nlohmann::json to_json(const GateReport& g)
{
    nlohmann::json values = nlohmann::json::object();
    for (const auto& [k, v] : g.values)
        values[k] = json_real(v);
    return {{"conditions", g.conditions}, {"values", values}, {"freq_norm", g.freq_norm},
            {"cap", json_real(g.cap)},    {"passes", g.passes}};
}

namespace detail {

inline void check_kappa(double kappa)
{
    require(kappa > 0.0 && kappa < 1.0, ErrorKind::InvalidArgument, "kappa must lie in (0, 1)");
}

} // namespace detail

/// Liouville-type hypotheses at base scale N0:
///   ||q0 omega|| < kappa^C rho^4 q0 / N0,   N0 kappa^C > q0,
/// and the admissible next scale N1 < kappa^{C/2} rho^2 sqrt(N0 q0 / ||q0 omega||).
inline GateReport liouville_gate(std::int64_t N0, std::int64_t q0, const Frequency& omega, double rho,
                                 double kappa, double C)
{
    require(q0 >= 1 && N0 >= 1, ErrorKind::InvalidArgument, "need q0 >= 1 and N0 >= 1");
    require(rho > 0.0, ErrorKind::InvalidArgument, "rho must be positive");
    detail::check_kappa(kappa);
    GateReport g;
    g.freq_norm = freq_norm(omega, q0);
    const double kC = std::pow(kappa, C);
    const double q = static_cast<double>(q0), n = static_cast<double>(N0);
    const double liouv_rhs = kC * std::pow(rho, 4) * q / n;
    g.conditions["eq:LiouvCondition"] = g.freq_norm < liouv_rhs;
    g.conditions["eq:N0LargeCondition"] = n * kC > q;
    g.values["eq:LiouvCondition.lhs"] = g.freq_norm;
    g.values["eq:LiouvCondition.rhs"] = liouv_rhs;
    g.values["eq:N0LargeCondition.lhs"] = n * kC;
    g.values["eq:N0LargeCondition.rhs"] = q;
    g.values["eq:N1SmallCondition.rhs"] =
        g.freq_norm == 0.0 ? kUnbounded : std::pow(kappa, C / 2) * rho * rho * std::sqrt(n * q / g.freq_norm);
    g.cap = g.freq_norm == 0.0 ? kUnbounded : kC * std::pow(rho, 4) * q / g.freq_norm;
    g.passes = g.conditions["eq:LiouvCondition"] && g.conditions["eq:N0LargeCondition"];
    return g;
}

/// Mixed-frequency hypotheses. omega splits as (omega_1,
/// omega_2) with omega_1 the first d1 components. With d2 = 0 the Diophantine
/// hypotheses are vacuous and only the Liouville-type cap remains.
inline GateReport mixed_gate(std::int64_t N0, std::int64_t q0, std::int64_t K0, const Frequency& omega,
                             std::size_t d1, double rho, double kappa, double delta, double C, double c)
{
    require(q0 >= 1 && N0 >= 1 && K0 >= 1, ErrorKind::InvalidArgument, "need q0, N0, K0 >= 1");
    require(d1 <= omega.dim(), ErrorKind::InvalidArgument, "split index exceeds the dimension");
    require(rho > 0.0 && delta > 0.0, ErrorKind::InvalidArgument, "rho and delta must be positive");
    detail::check_kappa(kappa);
    const std::size_t d2 = omega.dim() - d1;
    GateReport g;
    g.freq_norm = d1 == 0 ? 0.0 : freq_norm(omega.slice(0, d1), q0);
    const double kC = std::pow(kappa, C);
    const double q = static_cast<double>(q0), n = static_cast<double>(N0), K = static_cast<double>(K0);

    const double hyp1_rhs = kC * std::pow(rho, 3) * q / n;
    g.conditions["eq:Mixed:hyp1"] = g.freq_norm < hyp1_rhs;
    g.values["eq:Mixed:hyp1.lhs"] = g.freq_norm;
    g.values["eq:Mixed:hyp1.rhs"] = hyp1_rhs;
    const double cap1 = g.freq_norm == 0.0 ? kUnbounded : kC * std::pow(rho, 3) * q / g.freq_norm;

    if (d2 == 0) {
        g.conditions["eq:Mixed:hyp2"] = true;
        g.conditions["eq:Mixed:hyp3"] = true;
        g.cap = cap1;
    } else {
        const auto scan = min_dot_norm(omega.slice(d1, d2), K0);
        require(delta <= scan.delta, ErrorKind::InconsistentDelta,
                "delta exceeds min ||k . omega_2|| over 0 < |k| <= K0");
        g.values["delta_scan"] = scan.delta;
        const double hyp2_rhs = std::pow(std::pow(rho, 1.0 + c) * kappa, -C) * q;
        const double hyp3_rhs = K / (kC * delta);
        g.conditions["eq:Mixed:hyp2"] = K > hyp2_rhs;
        g.conditions["eq:Mixed:hyp3"] = n > hyp3_rhs;
        g.values["eq:Mixed:hyp2.rhs"] = hyp2_rhs;
        g.values["eq:Mixed:hyp3.rhs"] = hyp3_rhs;
        const double cap2 = n * std::exp(std::pow(K / q, c));
        g.values["cap.diophantine"] = cap2;
        g.cap = std::min(cap1, cap2);
    }
    g.values["cap.liouville"] = cap1;
    g.passes = g.conditions["eq:Mixed:hyp1"] && g.conditions["eq:Mixed:hyp2"] &&
               g.conditions["eq:Mixed:hyp3"];
    return g;
}

// ---------------------------------------------------------------------------
// Ladders
// ---------------------------------------------------------------------------

struct LadderParams {
    std::int64_t N0 = 1;
    std::int64_t q0 = 1;
    std::int64_t K0 = 0;
    std::size_t d1 = 0; ///< omega_1 = first d1 components (mixed and induction)
    double rho = 1.0;
    double kappa = 0.5;
    double delta0 = kUnbounded;
    double eps0 = 0.0; ///< 0 means exact resonance (infinite cap)
    double C = 10.0;
    double c = 0.1;
    double C3 = 10.0;
    double k_growth = 20.0; ///< K_s = K_{s-1}^{k_growth}
    std::int64_t max_scale = std::int64_t{1} << 40;
    std::size_t max_stages = 8;
};

inline nlohmann::json to_json(const LadderParams& p)
{
    return {{"N0", p.N0},           {"q0", p.q0},         {"K0", p.K0},
            {"d1", p.d1},           {"rho", p.rho},       {"kappa", p.kappa},
            {"delta0", json_real(p.delta0)}, {"eps0", p.eps0}, {"C", p.C},
            {"c", p.c},             {"C3", p.C3},         {"k_growth", p.k_growth},
            {"max_scale", p.max_scale}, {"max_stages", p.max_stages}};
}

/// One step N_{s-1} -> N_s. `binding` names the bound that stopped further
/// doubling: "growth", "cap", "max_scale".
struct LadderStep {
    std::int64_t from = 0;
    std::int64_t to = 0;
    std::string binding;
    double growth_bound = kUnbounded;
    double cap = kUnbounded;
    std::map<std::string, bool> flags;
};

/// One stage of the induction: the Diophantine scan at K_s, the resonant
/// direction and the automorphism straightening it.
struct InductionStage {
    std::size_t s = 0;
    double log_K = 0.0; ///< ln K_s (K_s itself may exceed 2^63)
    double K = 0.0;
    double delta = 0.0;
    IntVec argmin;
    std::int64_t q1 = 1;           ///< gcd of the resonant k
    IntMatrix automorphism;        ///< first row is the primitive part of k (full dimension)
    double rho = 0.0;              ///< K_s^{1-d} rho
    double budget = 0.0;           ///< K_{s-1}^{-c}
    double closing_lhs = 0.0;      ///< K_{s-1}^{40} / delta_s + N_{s-1}
    double closing_rhs = kUnbounded; ///< eps0^{-1} K_{s-1}^{-1}
    std::map<std::string, bool> flags;
};

struct ScaleLadder {
    std::string kind; ///< "liouville", "mixed" or "induction"
    LadderParams params;
    std::vector<std::int64_t> scales;
    std::vector<LadderStep> steps;
    std::vector<InductionStage> stages;
    GateReport gate;
    std::string halt; ///< why generation stopped
    std::map<std::string, bool> assumptions;

    double budget_total() const
    {
        double s = 0.0;
        for (const auto& st : stages)
            s += st.budget;
        return s;
    }
};

inline nlohmann::json to_json(const ScaleLadder& L)
{
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : L.steps)
        steps.push_back({{"from", s.from},
                         {"to", s.to},
                         {"binding", s.binding},
                         {"growth_bound", json_real(s.growth_bound)},
                         {"cap", json_real(s.cap)},
                         {"step_flags", s.flags}});
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& st : L.stages)
        stages.push_back({{"s", st.s},
                          {"log_K", st.log_K},
                          {"K", json_real(st.K)},
                          {"delta", st.delta},
                          {"argmin", st.argmin},
                          {"q1", st.q1},
                          {"automorphism", st.automorphism},
                          {"rho", st.rho},
                          {"budget", st.budget},
                          {"closing_lhs", json_real(st.closing_lhs)},
                          {"closing_rhs", json_real(st.closing_rhs)},
                          {"step_flags", st.flags}});
    return {{"kind", L.kind},     {"params", to_json(L.params)}, {"scales", L.scales},
            {"steps", steps},     {"stages", stages},            {"gate", to_json(L.gate)},
            {"halt", L.halt},     {"assumptions", L.assumptions}};
}

namespace detail {

/// Largest 2^j * N (j >= 0) with value <= bound and value < strict_cap.
inline std::int64_t largest_dyadic_multiple(std::int64_t N, double bound, double strict_cap)
{
    std::int64_t v = N;
    while (v <= std::numeric_limits<std::int64_t>::max() / 2) {
        const std::int64_t next = 2 * v;
        const double nd = static_cast<double>(next);
        if (nd > bound || !(nd < strict_cap))
            break;
        v = next;
    }
    return v;
}

/// The tightest of the three bounds on the next doubling.
inline std::string binding_bound(double growth, double cap, std::int64_t max_scale)
{
    const double m = static_cast<double>(max_scale);
    if (cap <= growth && cap <= m)
        return "cap";
    return growth <= m ? "growth" : "max_scale";
}

} // namespace detail

/// N_s = largest 2^j N_{s-1} not exceeding N_{s-1}^{2/3} (q0 rho^4 / ||q0 omega||)^{1/3}
/// and strictly below the cap kappa^C rho^4 q0 / ||q0 omega||, until no step is possible.
inline ScaleLadder liouville_ladder(const Frequency& omega, const LadderParams& params)
{
    ScaleLadder L;
    L.kind = "liouville";
    L.params = params;
    L.gate = liouville_gate(params.N0, params.q0, omega, params.rho, params.kappa, params.C);
    require(L.gate.passes, ErrorKind::GateFailed, "Liouville hypotheses fail at N0");
    require(params.max_scale >= params.N0, ErrorKind::InvalidArgument, "max_scale below N0");
    const double norm = L.gate.freq_norm;
    const double cap = L.gate.cap;
    const double q = static_cast<double>(params.q0);
    const double maxs = static_cast<double>(params.max_scale);
    L.scales.push_back(params.N0);

    while (true) {
        const std::int64_t N = L.scales.back();
        const double growth = norm == 0.0 ? kUnbounded
                                          : std::pow(static_cast<double>(N), 2.0 / 3.0) *
                                                std::cbrt(q * std::pow(params.rho, 4) / norm);
        const std::int64_t next = detail::largest_dyadic_multiple(N, std::min(growth, maxs), cap);
        if (next == N) {
            L.halt = detail::binding_bound(growth, cap, params.max_scale);
            break;
        }
        LadderStep st;
        st.from = N;
        st.to = next;
        st.growth_bound = growth;
        st.cap = cap;
        st.binding = detail::binding_bound(growth, cap, params.max_scale);
        const double n = static_cast<double>(next), n_prev = static_cast<double>(N);
        const double kC = std::pow(params.kappa, params.C);
        st.flags["eq:LiouvCondition"] = norm < kC * std::pow(params.rho, 4) * q / n;
        st.flags["eq:N0LargeCondition"] = n_prev * kC > q;
        st.flags["eq:N1SmallCondition"] =
            norm == 0.0 || n < std::pow(params.kappa, params.C / 2) * params.rho * params.rho *
                                   std::sqrt(n_prev * q / norm);
        L.steps.push_back(st);
        L.scales.push_back(next);
        if (norm == 0.0) {
            L.halt = "unbounded cap: single step to max_scale";
            break;
        }
    }
    return L;
}

/// Every admissible scale N = 2^j N0 below the mixed-frequency cap, one
/// doubling per step.
inline ScaleLadder mixed_ladder(const Frequency& omega, const LadderParams& params, double delta)
{
    ScaleLadder L;
    L.kind = "mixed";
    L.params = params;
    L.gate = mixed_gate(params.N0, params.q0, params.K0, omega, params.d1, params.rho, params.kappa,
                        delta, params.C, params.c);
    require(L.gate.passes, ErrorKind::GateFailed, "mixed-frequency hypotheses fail at N0");
    require(params.max_scale >= params.N0, ErrorKind::InvalidArgument, "max_scale below N0");
    L.scales.push_back(params.N0);
    const double maxs = static_cast<double>(params.max_scale);
    while (true) {
        const std::int64_t N = L.scales.back();
        const std::int64_t next = detail::largest_dyadic_multiple(N, std::min(2.0 * static_cast<double>(N), maxs),
                                                                  L.gate.cap);
        if (next == N) {
            L.halt = 2.0 * static_cast<double>(N) > maxs && maxs < L.gate.cap ? "max_scale" : "cap";
            break;
        }
        LadderStep st;
        st.from = N;
        st.to = next;
        st.growth_bound = 2.0 * static_cast<double>(N);
        st.cap = L.gate.cap;
        st.binding = "growth";
        st.flags["eq:Mixed:hyp1"] = L.gate.conditions["eq:Mixed:hyp1"];
        st.flags["eq:Mixed:hyp2"] = L.gate.conditions["eq:Mixed:hyp2"];
        st.flags["eq:Mixed:hyp3"] = L.gate.conditions["eq:Mixed:hyp3"];
        st.flags["cap"] = static_cast<double>(next) < L.gate.cap;
        L.steps.push_back(st);
        L.scales.push_back(next);
    }
    return L;
}

/// Plan of the induction on the Diophantine block. Preconditions
///   q0 < K0^{1/10},  K0^2 / (2 delta0) <= N0 < 1 / (eps0 K0),  rho > K0^{-c}
/// are checked and named. Stage s sets K_s = K_{s-1}^{k_growth}, scans
/// delta_s = min ||k . omega_2|| over 0 < |k| <= K_s, closes when
/// K_{s-1}^{40} / delta_s + N_{s-1} reaches eps0^{-1} K_{s-1}^{-1}, and
/// otherwise extends the scale to the largest 2^j N_{s-1} <= K_s^2 / delta_s + N_{s-1}.
/// The automorphism straightening the resonant direction is recorded.
inline ScaleLadder induction_schedule(const Frequency& omega, const LadderParams& params)
{
    const auto& p = params;
    require(p.d1 <= omega.dim(), ErrorKind::InvalidArgument, "split index exceeds the dimension");
    require(p.q0 >= 1 && p.K0 >= 1 && p.N0 >= 1, ErrorKind::InvalidArgument, "need q0, K0, N0 >= 1");
    require(p.k_growth > 1.0, ErrorKind::InvalidArgument, "k_growth must exceed 1");
    require(p.eps0 >= 0.0 && p.delta0 > 0.0, ErrorKind::InvalidArgument,
            "need eps0 >= 0 and delta0 > 0");
    const double K0 = static_cast<double>(p.K0);
    const double N0 = static_cast<double>(p.N0);
    require(static_cast<double>(p.q0) < std::pow(K0, 0.1), ErrorKind::PreconditionFailed,
            "q0 < K0^{1/10} fails");
    require(0.5 * K0 * K0 / p.delta0 <= N0, ErrorKind::PreconditionFailed,
            "K0^2 / (2 delta0) <= N0 fails");
    const double n0_cap = p.eps0 == 0.0 ? kUnbounded : 1.0 / (p.eps0 * K0);
    require(N0 < n0_cap, ErrorKind::PreconditionFailed, "N0 < eps0^{-1} K0^{-1} fails");
    require(p.rho > std::pow(K0, -p.c), ErrorKind::PreconditionFailed, "rho > K0^{-c} fails");

    ScaleLadder L;
    L.kind = "induction";
    L.params = p;
    L.gate.freq_norm = p.eps0;
    L.gate.cap = n0_cap;
    L.gate.conditions["q0 < K0^{1/10}"] = true;
    L.gate.conditions["K0^2/(2 delta0) <= N0 < eps0^{-1} K0^{-1}"] = true;
    L.gate.conditions["rho > K0^{-c}"] = true;
    L.gate.passes = true;
    // the largeness threshold K0 > K'(d2) has no explicit value
    L.assumptions["K0 > K'(d2)"] = true;
    L.scales.push_back(p.N0);

    const std::size_t d = omega.dim();
    const std::size_t d2 = d - p.d1;
    if (d2 == 0) {
        L.halt = "base case d2 = 0";
        return L;
    }
    const Frequency omega2 = omega.slice(p.d1, d2);
    double log_K_prev = std::log(K0);
    for (std::size_t s = 1; s <= p.max_stages; ++s) {
        const double log_K = p.k_growth * log_K_prev;
        if (static_cast<double>(d2) * log_K > std::log(kScanLimit)) {
            L.halt = "ScanTooLarge";
            break;
        }
        InductionStage st;
        st.s = s;
        st.log_K = log_K;
        st.K = std::round(std::exp(log_K));
        const auto K_int = static_cast<std::int64_t>(st.K);
        const auto scan = min_dot_norm(omega2, K_int);
        st.delta = scan.delta;
        st.budget = std::exp(-p.c * log_K_prev);
        st.rho = std::exp((1.0 - static_cast<double>(d)) * log_K) * p.rho;

        const double N_prev = static_cast<double>(L.scales.back());
        st.closing_lhs = std::exp(40.0 * log_K_prev) / st.delta + N_prev;
        st.closing_rhs = p.eps0 == 0.0 ? kUnbounded : std::exp(-log_K_prev) / p.eps0;
        st.flags["eq:RestrN1Cond"] = st.closing_lhs < st.closing_rhs;

        // resonant direction, padded to the full dimension: (0, k) acts on omega_2
        IntVec k_full(d, 0);
        for (std::size_t j = 0; j < d2; ++j)
            k_full[p.d1 + j] = scan.argmin[j];
        st.argmin = scan.argmin;
        st.q1 = detail::gcd_all(scan.argmin);
        IntVec primitive(d2);
        for (std::size_t j = 0; j < d2; ++j)
            primitive[j] = scan.argmin[j] / st.q1;
        const Automorphism B2 = build_automorphism(primitive);
        IntMatrix B(d, IntVec(d, 0));
        for (std::size_t i = 0; i < p.d1; ++i)
            B[i][i] = 1;
        for (std::size_t i = 0; i < d2; ++i)
            for (std::size_t j = 0; j < d2; ++j)
                B[p.d1 + i][p.d1 + j] = B2.entries()[i][j];
        st.automorphism = B;
        st.flags["Lem:CoV"] = Automorphism(B).dim() == d;

        if (!st.flags["eq:RestrN1Cond"]) {
            L.stages.push_back(st);
            L.halt = "closing: eq:RestrN1Cond reached";
            break;
        }
        const double growth = std::exp(2.0 * log_K) / st.delta + N_prev;
        const std::int64_t next = detail::largest_dyadic_multiple(
            L.scales.back(), std::min(growth, static_cast<double>(p.max_scale)), kUnbounded);
        st.flags["max_scale"] = growth > static_cast<double>(p.max_scale);
        L.stages.push_back(st);
        if (next == L.scales.back()) {
            L.halt = "max_scale";
            break;
        }
        LadderStep step;
        step.from = L.scales.back();
        step.to = next;
        step.growth_bound = growth;
        step.cap = st.closing_rhs;
        step.binding = st.flags["max_scale"] ? "max_scale" : "growth";
        step.flags = st.flags;
        L.steps.push_back(step);
        L.scales.push_back(next);
        log_K_prev = log_K;
        if (s == p.max_stages)
            L.halt = "max_stages";
    }
    return L;
}

/// K_{s-1}^{-c} for s = 1..count with K_s = K_{s-1}^{k_growth}, in log space.
inline std::vector<double> budget_series(double K0, double c, double k_growth, std::size_t count)
{
    std::vector<double> out;
    double log_K = std::log(K0);
    for (std::size_t s = 0; s < count; ++s) {
        out.push_back(std::exp(-c * log_K));
        log_K *= k_growth;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

struct LadderPair {
    std::int64_t N_i = 0;
    std::int64_t N_j = 0;
    double difference = 0.0;
    double budget = 0.0;
    bool passed = false;
};

struct LadderVerification {
    std::vector<LEEstimate> estimates; ///< one per verified scale
    std::vector<LadderPair> pairs;     ///< consecutive pairs, then base-to-top
    std::vector<std::int64_t> skipped; ///< scales above max_verify_scale
    bool all_passed = false;
};

inline nlohmann::json to_json(const LadderVerification& v)
{
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : v.pairs)
        pairs.push_back({{"N_i", p.N_i},
                         {"N_j", p.N_j},
                         {"difference", p.difference},
                         {"budget", p.budget},
                         {"passed", p.passed}});
    nlohmann::json est = nlohmann::json::array();
    for (const auto& e : v.estimates)
        est.push_back({{"N", e.N}, {"value", e.value}, {"excised_mass", e.excised_mass}});
    return {{"estimates", est}, {"pairs", pairs}, {"skipped", v.skipped}, {"all_passed", v.all_passed}};
}

/// L'_N at every ladder scale up to max_verify_scale, compared pairwise.
/// Budgets: C' kappa^{1/6} for Liouville and mixed ladders; for induction
/// ladders C' K_{s-1}^{-c} per step and C' times their sum base-to-top.
/// Pass a renormalized cocycle to compare L_N instead.
template <MatrixFunction F>
LadderVerification ladder_verify(const Cocycle<F>& C, const ScaleLadder& ladder,
                                 const QuadratureSpec& quad, double C_prime,
                                 std::int64_t max_verify_scale = std::int64_t{1} << 16)
{
    require(ladder.scales.size() >= 2, ErrorKind::InvalidArgument, "ladder has a single scale");
    LadderVerification v;
    std::vector<std::int64_t> used;
    for (auto N : ladder.scales) {
        if (N > max_verify_scale) {
            v.skipped.push_back(N);
            continue;
        }
        used.push_back(N);
        v.estimates.push_back(L_prime_N(C, N, quad));
    }
    const bool induction = ladder.kind == "induction";
    auto step_budget = [&](std::size_t i) {
        if (!induction)
            return C_prime * std::pow(ladder.params.kappa, 1.0 / 6.0);
        return C_prime * (i < ladder.stages.size() ? ladder.stages[i].budget : 0.0);
    };
    for (std::size_t i = 0; i + 1 < used.size(); ++i) {
        LadderPair p{used[i], used[i + 1], std::abs(v.estimates[i + 1].value - v.estimates[i].value),
                     step_budget(i), false};
        p.passed = p.difference <= p.budget;
        v.pairs.push_back(p);
    }
    if (used.size() > 2) {
        const double total = induction ? C_prime * ladder.budget_total()
                                       : C_prime * std::pow(ladder.params.kappa, 1.0 / 6.0);
        LadderPair p{used.front(), used.back(),
                     std::abs(v.estimates.back().value - v.estimates.front().value), total, false};
        p.passed = p.difference <= p.budget;
        v.pairs.push_back(p);
    }
    v.all_passed = true;
    for (const auto& p : v.pairs)
        v.all_passed = v.all_passed && p.passed;
    return v;
}

struct CoVReport {
    double L_A = 0.0;
    double L_AB = 0.0;
    double difference = 0.0;
};

/// |L'_N(A, omega) - L'_N(A o B, B^{-1} omega)| on the lattice grid (1/M) Z^d,
/// which B permutes.
inline CoVReport cov_invariance_check(const Cocycle<TrigPolyMatrix>& C, const Automorphism& B,
                                      std::int64_t N, std::size_t M)
{
    const auto q = QuadratureSpec::grid(M, 0.0);
    CoVReport r;
    r.L_A = L_prime_N(C, N, q).value;
    r.L_AB = L_prime_N(change_variables(C, B), N, q).value;
    r.difference = std::abs(r.L_A - r.L_AB);
    return r;
}

} // namespace qpc
