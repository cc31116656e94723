#pragma once

// Experiment runner behind the qpc-lab tool. A run takes a subcommand, a
// JSON config, an output directory and optional thread/seed overrides, and
// writes CSV tables and JSON reports stamped with the config hash. Exit
// codes: 0 success, 2 config schema violation, 3 numerical failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpcocycle/avalanche.hpp"
#include "qpcocycle/cocycle.hpp"
#include "qpcocycle/deviation.hpp"
#include "qpcocycle/io.hpp"
#include "qpcocycle/lyapunov.hpp"
#include "qpcocycle/multiscale.hpp"
#include "qpcocycle/parallel.hpp"
#include "qpcocycle/quadrature.hpp"
#include "qpcocycle/torus.hpp"

namespace qpc::cli {

using nlohmann::json;
namespace fs = std::filesystem;

inline const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> names = {
        "le",   "le-limit", "continuity", "ap",     "ldt", "cdt", "drift",
        "loja", "l2",       "fourier",    "ladder", "cov", "example-discontinuity"};
    return names;
}

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Config accessors
// ---------------------------------------------------------------------------

inline const json& need(const json& j, const std::string& key)
{
    if (!j.is_object() || !j.contains(key))
        throw SchemaError("missing key '" + key + "'");
    return j.at(key);
}

template <class T>
T get(const json& j, const std::string& key)
{
    try {
        return need(j, key).get<T>();
    } catch (const json::exception& e) {
        throw SchemaError("key '" + key + "': " + e.what());
    }
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback)
{
    if (!j.is_object() || !j.contains(key))
        return fallback;
    return get<T>(j, key);
}

inline double parse_real(const json& j, const std::string& what)
{
    if (j.is_number())
        return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "golden")
            return (std::sqrt(5.0) - 1.0) / 2.0;
        if (s == "sqrt2-1")
            return std::sqrt(2.0) - 1.0;
        if (s == "sqrt3-1")
            return std::sqrt(3.0) - 1.0;
    }
    if (j.is_object() && j.contains("p") && j.contains("q"))
        return get<double>(j, "p") / get<double>(j, "q");
    throw SchemaError(what + ": expected a number, \"golden\", \"sqrt2-1\", \"sqrt3-1\" or {p, q}");
}

inline Frequency parse_frequency(const json& config)
{
    const json& f = need(config, "frequency");
    if (!f.is_array() || f.empty())
        throw SchemaError("'frequency' must be a non-empty array");
    std::vector<double> w;
    for (const auto& c : f)
        w.push_back(parse_real(c, "frequency component"));
    return Frequency(std::move(w));
}

inline cplx parse_complex(const json& j)
{
    if (j.is_number())
        return j.get<double>();
    if (j.is_array() && j.size() == 2)
        return {j[0].get<double>(), j[1].get<double>()};
    throw SchemaError("complex values are numbers or [re, im]");
}

/// Scalar trigonometric polynomial in d variables.
inline TrigPoly parse_trig_poly(const json& j, std::size_t d)
{
    const auto kind = get<std::string>(j, "kind");
    if (kind == "zero")
        return TrigPoly(d);
    if (kind == "constant")
        return TrigPoly::constant(d, parse_complex(need(j, "value")));
    if (kind == "cosine_sum")
        return cosine_potential(d, get<double>(j, "lambda"));
    if (kind == "cosine" || kind == "sine") {
        const auto k = get<IntVec>(j, "k");
        if (k.size() != d)
            throw SchemaError("trig poly index has the wrong dimension");
        const double amp = get_or<double>(j, "amplitude", 1.0);
        return kind == "cosine" ? TrigPoly::cosine(k, amp) : TrigPoly::sine(k, amp);
    }
    if (kind == "terms") {
        TrigPoly out(d);
        for (const auto& t : need(j, "terms")) {
            const auto k = get<IntVec>(t, "k");
            if (k.size() != d)
                throw SchemaError("trig poly index has the wrong dimension");
            out += TrigPoly::monomial(k, parse_complex(need(t, "c")));
        }
        return out;
    }
    if (kind == "sum" || kind == "product") {
        const json& parts = need(j, "of");
        if (!parts.is_array() || parts.empty())
            throw SchemaError("'of' must be a non-empty array");
        TrigPoly out = parse_trig_poly(parts[0], d);
        for (std::size_t i = 1; i < parts.size(); ++i)
            out = kind == "sum" ? out + parse_trig_poly(parts[i], d) : out * parse_trig_poly(parts[i], d);
        return out;
    }
    throw SchemaError("unknown trig poly kind '" + kind + "'");
}

inline Mat2 parse_mat2(const json& j)
{
    if (!j.is_array() || j.size() != 4)
        throw SchemaError("matrices are [a, b, c, d] in row-major order");
    return Mat2{{parse_complex(j[0]), parse_complex(j[1]), parse_complex(j[2]), parse_complex(j[3])}};
}

using AnyCocycle = std::variant<Cocycle<TrigPolyMatrix>, Cocycle<DiscontinuityExample>>;

inline AnyCocycle parse_cocycle(const json& config)
{
    const Frequency omega = parse_frequency(config);
    const std::size_t d = omega.dim();
    const json& c = need(config, "cocycle");
    const auto type = get<std::string>(c, "type");
    const double rho = get_or<double>(c, "rho", 1.0);
    if (type == "schrodinger")
        return Cocycle(schrodinger(parse_trig_poly(need(c, "potential"), d), get<double>(c, "E"), rho), omega);
    if (type == "jacobi" || type == "jacobi_periodic") {
        const TrigPoly v = c.contains("potential") ? parse_trig_poly(c.at("potential"), d) : TrigPoly(d);
        const TrigPoly a = parse_trig_poly(need(c, "a"), d);
        const double E = get<double>(c, "E");
        if (type == "jacobi")
            return Cocycle(jacobi(v, a, E, omega, rho), omega);
        const auto v_per = get<std::vector<double>>(c, "v_per");
        std::vector<double> qw(omega.components());
        for (auto& x : qw)
            x *= static_cast<double>(v_per.size());
        return Cocycle(jacobi_periodic(v, a, v_per, E, omega, rho), Frequency(qw));
    }
    if (type == "constant")
        return Cocycle(TrigPolyMatrix::constant(d, parse_mat2(need(c, "matrix")), rho), omega);
    if (type == "discontinuity") {
        const auto k = get<IntVec>(c, "k");
        if (k.size() != d)
            throw SchemaError("discontinuity k has the wrong dimension");
        return Cocycle(discontinuity_example(k, rho), omega);
    }
    if (type == "serialized") {
        try {
            return Cocycle(trig_poly_matrix_from_json(need(c, "matrix")), omega);
        } catch (const json::exception& e) {
            throw SchemaError(std::string("serialized matrix: ") + e.what());
        }
    }
    throw SchemaError("unknown cocycle type '" + type + "'");
}

inline Cocycle<TrigPolyMatrix> parse_trig_cocycle(const json& config)
{
    auto any = parse_cocycle(config);
    if (auto* c = std::get_if<Cocycle<TrigPolyMatrix>>(&any))
        return *c;
    throw SchemaError("this experiment needs a trigonometric-polynomial cocycle");
}

/// Calls f with the configured cocycle, renormalized when "renormalize" is true.
template <class Fn>
void with_cocycle(const json& config, Fn&& f)
{
    const bool renorm = get_or<bool>(config, "renormalize", false);
    std::visit(
        [&](const auto& C) {
            if (renorm)
                f(renormalized(C));
            else
                f(C);
        },
        parse_cocycle(config));
}

inline QuadratureSpec parse_quadrature(const json& config, std::size_t d)
{
    QuadratureSpec q = default_quadrature(d);
    if (!config.contains("quadrature"))
        return q;
    const json& j = config.at("quadrature");
    try {
        q.kind = quadrature_kind_from_string(get_or<std::string>(j, "kind", to_string(q.kind)));
    } catch (const Error& e) {
        throw SchemaError(e.what());
    }
    q.points_per_dim = get_or<std::size_t>(j, "points_per_dim", q.points_per_dim);
    q.total_points = get_or<std::size_t>(j, "total_points", q.total_points);
    q.grid_offset = get_or<double>(j, "offset", q.grid_offset);
    q.seed = get_or<std::uint64_t>(j, "seed", get_or<std::uint64_t>(config, "seed", 0));
    if (j.contains("clip_floor"))
        q.clip_floor = get<double>(j, "clip_floor");
    return q;
}

inline json quadrature_json(const QuadratureSpec& q)
{
    return {{"kind", to_string(q.kind)},          {"points_per_dim", q.points_per_dim},
            {"total_points", q.total_points},     {"offset", q.grid_offset},
            {"seed", q.seed},                     {"clip_floor", q.clip_floor}};
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct Context {
    json config;
    fs::path out;
    Stamp stamp;
    std::vector<fs::path> files;

    fs::path file(const std::string& name)
    {
        files.push_back(out / name);
        return out / name;
    }
    bool plot() const { return get_or<bool>(config, "plot", false); }
};

inline void le_table(Context& ctx, const std::string& stem, const std::vector<LEEstimate>& rows, json extra)
{
    CsvWriter csv(ctx.file(stem + ".csv"), ctx.stamp, {"N", "value", "excised_mass", "stderr"});
    json jrows = json::array();
    PlotSeries s{"L_N", {}, {}};
    for (const auto& e : rows) {
        const double se = e.stderr_estimate.value_or(std::nan(""));
        csv.row({static_cast<double>(e.N), e.value, e.excised_mass, se});
        jrows.push_back({{"N", e.N}, {"value", e.value}, {"excised_mass", e.excised_mass}, {"stderr", json_real(se)}});
        s.x.push_back(static_cast<double>(e.N));
        s.y.push_back(e.value);
    }
    extra["rows"] = jrows;
    if (!rows.empty())
        extra["quadrature"] = quadrature_json(rows.front().quad);
    write_json(ctx.file(stem + ".json"), ctx.stamp, extra);
    if (ctx.plot())
        write_svg_plot(ctx.file(stem + ".svg"), ctx.stamp, stem, "N", "L_N", {s}, true);
}

inline void run_le(Context& ctx)
{
    const auto Ns = get<std::vector<std::int64_t>>(ctx.config, "N_list");
    with_cocycle(ctx.config, [&](const auto& C) {
        const auto q = parse_quadrature(ctx.config, C.dim());
        std::vector<LEEstimate> rows;
        for (auto N : Ns)
            rows.push_back(L_prime_N(C, N, q));
        le_table(ctx, "le", rows, json::object());
    });
}

inline void run_le_limit(Context& ctx)
{
    const auto schedule = get<std::vector<std::int64_t>>(ctx.config, "schedule");
    with_cocycle(ctx.config, [&](const auto& C) {
        const auto ex = le_extrapolate(C, schedule, parse_quadrature(ctx.config, C.dim()));
        le_table(ctx, "le_limit", ex.table, {{"limit", ex.limit}, {"increments", ex.increments}});
    });
}

inline void run_continuity(Context& ctx)
{
    const auto C = parse_trig_cocycle(ctx.config);
    const std::size_t d = C.dim();
    const json& dir = need(ctx.config, "direction");
    const auto entry = get_or<std::vector<int>>(dir, "entry", {0, 0});
    if (entry.size() != 2 || entry[0] < 0 || entry[0] > 1 || entry[1] < 0 || entry[1] > 1)
        throw SchemaError("direction.entry must be [i, j] with i, j in {0, 1}");
    const TrigPoly p = parse_trig_poly(need(dir, "poly"), d);
    TrigPoly e[4] = {TrigPoly(d), TrigPoly(d), TrigPoly(d), TrigPoly(d)};
    e[2 * entry[0] + entry[1]] = p;
    const TrigPolyMatrix P = TrigPolyMatrix::from_entries(e[0], e[1], e[2], e[3], C.A.rho());
    std::vector<TrigPolyMatrix> perts;
    for (double eps : get<std::vector<double>>(ctx.config, "epsilons"))
        perts.push_back(C.A + cplx(eps) * P);
    const auto N = get<std::int64_t>(ctx.config, "N");
    const auto t = finite_scale_modulus(C.A, C.omega, N, perts, parse_quadrature(ctx.config, d),
                                        get_or<std::size_t>(ctx.config, "strip_samples", 64));
    CsvWriter csv(ctx.file("continuity.csv"), ctx.stamp, {"distance", "difference", "envelope"});
    PlotSeries s{"|L_N(A) - L_N(B)|", {}, {}};
    for (const auto& r : t.rows) {
        csv.row({r.distance, r.difference, r.envelope});
        s.x.push_back(r.distance);
        s.y.push_back(r.difference);
    }
    write_json(ctx.file("continuity.json"), ctx.stamp,
               {{"N", t.N}, {"empirical_constant", t.empirical_constant}, {"rows", t.rows.size()}});
    if (ctx.plot())
        write_svg_plot(ctx.file("continuity.svg"), ctx.stamp, "finite-scale modulus", "||A - B||_rho",
                       "difference", {s}, true);
}

inline void run_ap(Context& ctx)
{
    const json& j = ctx.config.contains("ensemble") ? ctx.config.at("ensemble") : json::object();
    APEnsembleSpec spec;
    spec.chains = get_or<std::size_t>(j, "chains", spec.chains);
    spec.n_min = get_or<std::size_t>(j, "n_min", spec.n_min);
    spec.n_max = get_or<std::size_t>(j, "n_max", spec.n_max);
    spec.mu_min = get_or<double>(j, "mu_min", spec.mu_min);
    spec.window_exponent = get_or<double>(j, "window_exponent", spec.window_exponent);
    spec.C_assumed = get_or<double>(j, "C", spec.C_assumed);
    spec.max_attempts = get_or<std::size_t>(j, "max_attempts", spec.max_attempts);
    spec.seed = get_or<std::uint64_t>(ctx.config, "seed", spec.seed);
    const auto rows = ap_ensemble(spec);

    CsvWriter csv(ctx.file("ap.csv"), ctx.stamp,
                  {"n", "mu", "max_gap", "residual", "bound", "variant_residual", "variant_bound", "variant_C"});
    double ceiling = 0.0;
    std::size_t hyp_ok = 0, within = 0, variant_within = 0;
    for (const auto& r : rows) {
        const auto& s = r.standard;
        csv.row({static_cast<double>(s.n), s.mu, s.max_gap, s.residual, s.bound, r.variant.residual,
                 r.variant.bound, r.variant.C});
        const bool ok = s.hypothesis_min_norm_ok && s.hypothesis_gap_ok;
        if (ok) {
            ++hyp_ok;
            ceiling = std::max(ceiling, s.residual * s.mu / static_cast<double>(s.n));
            within += s.residual <= spec.C_assumed * static_cast<double>(s.n) / s.mu ? 1 : 0;
        }
        variant_within += r.variant.residual <= r.variant.bound ? 1 : 0;
    }
    write_json(ctx.file("ap.json"), ctx.stamp,
               {{"chains", rows.size()},
                {"hypotheses_satisfied", hyp_ok},
                {"within_bound", within},
                {"variant_within_bound", variant_within},
                {"empirical_C_ceiling", ceiling},
                {"C_assumed", spec.C_assumed},
                {"seed", spec.seed},
                {"middle_sum", {{"standard", "j=2..n-1"}, {"variant", "j=1..n"}}}});
}

inline void profile_csv(Context& ctx, const Profile& p)
{
    std::vector<std::string> header;
    for (std::size_t j = 0; j < p.d; ++j)
        header.push_back("x" + std::to_string(j + 1));
    header.push_back("value");
    CsvWriter csv(ctx.file("profile.csv"), ctx.stamp, header);
    for (std::size_t i = 0; i < p.size(); ++i) {
        std::vector<double> row(p.node(i).begin(), p.node(i).end());
        row.push_back(p.values[i]);
        csv.row(row);
    }
}

inline void run_ldt(Context& ctx)
{
    const auto N = get<std::int64_t>(ctx.config, "N");
    const auto M = get<std::size_t>(ctx.config, "M");
    const auto kappas = get<std::vector<double>>(ctx.config, "kappas");
    with_cocycle(ctx.config, [&](const auto& C) {
        const Profile p = profile(C, N, M);
        json est = json::array();
        for (double k : kappas)
            est.push_back(to_json(ldt_empirical(p, k)));
        if (get_or<bool>(ctx.config, "write_profile", false))
            profile_csv(ctx, p);
        write_json(ctx.file("ldt.json"), ctx.stamp,
                   {{"N", N}, {"M", M}, {"mean", p.mean}, {"retained", p.retained}, {"estimates", est}});
    });
}

inline void run_cdt(Context& ctx)
{
    const auto N = get<std::int64_t>(ctx.config, "N");
    const auto M = get<std::size_t>(ctx.config, "M");
    const auto kappa = get<double>(ctx.config, "kappa");
    const auto shifts = get<std::vector<std::vector<double>>>(ctx.config, "shifts");
    with_cocycle(ctx.config, [&](const auto& C) {
        json est = json::array();
        for (const auto& a : shifts)
            est.push_back(to_json(cdt_empirical(C, N, a, kappa, M)));
        write_json(ctx.file("cdt.json"), ctx.stamp, {{"N", N}, {"M", M}, {"kappa", kappa}, {"estimates", est}});
    });
}

inline void run_drift(Context& ctx)
{
    const auto N = get<std::int64_t>(ctx.config, "N");
    const auto M = get<std::size_t>(ctx.config, "M");
    const auto a = get<double>(ctx.config, "a_exponent");
    const auto Cc = get<double>(ctx.config, "C");
    with_cocycle(ctx.config, [&](const auto& C) {
        write_json(ctx.file("drift.json"), ctx.stamp, {{"estimate", to_json(shift_drift_empirical(C, N, a, Cc, M))}});
    });
}

inline void run_loja(Context& ctx)
{
    const auto d = get_or<std::size_t>(ctx.config, "dimension", 1);
    const TrigPoly g = parse_trig_poly(need(ctx.config, "g"), d);
    const auto ts = get<std::vector<double>>(ctx.config, "t_grid");
    const auto M = get<std::size_t>(ctx.config, "M");
    const auto fit = lojasiewicz_fit(g, ts, M);
    CsvWriter csv(ctx.file("loja.csv"), ctx.stamp, {"t", "fraction"});
    json est = json::array();
    PlotSeries s{"sublevel fraction", {}, {}};
    for (const auto& m : fit.estimates) {
        csv.row({m.threshold, m.measured_fraction});
        est.push_back(to_json(m));
        s.x.push_back(m.threshold);
        s.y.push_back(m.measured_fraction);
    }
    write_json(ctx.file("loja.json"), ctx.stamp,
               {{"S", fit.S ? json(*fit.S) : json()},
                {"b", fit.b ? json(*fit.b) : json()},
                {"points_used", fit.points_used},
                {"estimates", est}});
    if (ctx.plot())
        write_svg_plot(ctx.file("loja.svg"), ctx.stamp, "sublevel sets", "t", "fraction", {s}, true);
}

inline void run_l2(Context& ctx)
{
    const auto Ns = get<std::vector<std::int64_t>>(ctx.config, "N_list");
    const auto M = get<std::size_t>(ctx.config, "M");
    with_cocycle(ctx.config, [&](const auto& C) {
        const auto t = l2_uniform_check(C, Ns, M);
        CsvWriter csv(ctx.file("l2.csv"), ctx.stamp, {"N", "rms", "retained_fraction"});
        for (const auto& r : t.rows)
            csv.row({static_cast<double>(r.N), r.rms, r.retained_fraction});
        write_json(ctx.file("l2.json"), ctx.stamp,
                   {{"det_log_rms", t.det_log_rms},
                    {"det_clipped", t.det_clipped},
                    {"max_min_ratio", json_real(t.max_min_ratio)},
                    {"growth_flag", t.growth_flag}});
    });
}

inline void run_fourier(Context& ctx)
{
    const auto N = get<std::int64_t>(ctx.config, "N");
    const auto M = get<std::size_t>(ctx.config, "M");
    const auto K0 = get<std::size_t>(ctx.config, "K0");
    with_cocycle(ctx.config, [&](const auto& C) {
        const Profile p = profile(C, N, M);
        const auto r = fourier_coeffs(p, K0);
        std::vector<std::string> header;
        for (std::size_t j = 0; j < r.d; ++j)
            header.push_back("k" + std::to_string(j + 1));
        header.insert(header.end(), {"re", "im", "abs"});
        CsvWriter csv(ctx.file("fourier.csv"), ctx.stamp, header);
        PlotSeries s{"|k| |c_k|", {}, {}};
        std::vector<std::size_t> idx(r.d, 0);
        for (std::size_t i = 0; i < r.coeffs.size(); ++i) {
            std::vector<double> row;
            for (std::size_t j = 0; j < r.d; ++j)
                row.push_back(static_cast<double>(r.frequency(idx[j])));
            row.insert(row.end(), {r.coeffs[i].real(), r.coeffs[i].imag(), std::abs(r.coeffs[i])});
            csv.row(row);
            if (r.d == 1 && r.frequency(idx[0]) > 0) {
                s.x.push_back(static_cast<double>(r.frequency(idx[0])));
                s.y.push_back(s.x.back() * std::abs(r.coeffs[i]));
            }
            std::size_t j = r.d;
            while (j > 0) {
                --j;
                if (++idx[j] < r.M)
                    break;
                idx[j] = 0;
            }
        }
        write_json(ctx.file("fourier.json"), ctx.stamp,
                   {{"N", N},
                    {"M", M},
                    {"K0", K0},
                    {"profile_mean", p.mean},
                    {"coeff_0", {r.coeffs[0].real(), r.coeffs[0].imag()}},
                    {"energy", r.energy},
                    {"mean_square", r.mean_square},
                    {"max_k_coeff", r.max_k_coeff},
                    {"tail_energy", r.tail_energy},
                    {"clip_level", r.clip_level},
                    {"clipped", r.clipped}});
        if (ctx.plot())
            write_svg_plot(ctx.file("fourier.svg"), ctx.stamp, "Fourier decay", "k", "|k| |c_k|", {s}, true);
    });
}

inline LadderParams parse_ladder_params(const json& j, const Frequency& omega)
{
    LadderParams p;
    p.N0 = get<std::int64_t>(j, "N0");
    p.q0 = get_or<std::int64_t>(j, "q0", p.q0);
    p.K0 = get_or<std::int64_t>(j, "K0", p.K0);
    p.d1 = get_or<std::size_t>(j, "d1", p.d1);
    p.rho = get_or<double>(j, "rho", p.rho);
    p.kappa = get_or<double>(j, "kappa", p.kappa);
    p.eps0 = get_or<double>(j, "eps0", p.eps0);
    p.C = get_or<double>(j, "C", p.C);
    p.c = get_or<double>(j, "c", p.c);
    p.C3 = get_or<double>(j, "C3", p.C3);
    p.k_growth = get_or<double>(j, "k_growth", p.k_growth);
    p.max_scale = get_or<std::int64_t>(j, "max_scale", p.max_scale);
    p.max_stages = get_or<std::size_t>(j, "max_stages", p.max_stages);
    if (j.contains("delta0")) {
        const json& d0 = j.at("delta0");
        if (d0.is_string() && d0.get<std::string>() == "scan") {
            if (p.d1 >= omega.dim())
                throw SchemaError("delta0 = \"scan\" needs a nonempty Diophantine block");
            p.delta0 = min_dot_norm(omega.slice(p.d1, omega.dim() - p.d1), p.K0).delta;
        } else {
            p.delta0 = parse_real(d0, "delta0");
        }
    }
    return p;
}

inline void run_ladder(Context& ctx)
{
    const Frequency omega = parse_frequency(ctx.config);
    const json& j = need(ctx.config, "ladder");
    const auto type = get<std::string>(j, "type");
    const LadderParams p = parse_ladder_params(j, omega);
    ScaleLadder L;
    if (type == "liouville")
        L = liouville_ladder(omega, p);
    else if (type == "mixed") {
        double delta = 0.0;
        const json& dj = need(j, "delta");
        if (dj.is_string() && dj.get<std::string>() == "scan")
            delta = min_dot_norm(omega.slice(p.d1, omega.dim() - p.d1), p.K0).delta;
        else
            delta = parse_real(dj, "delta");
        L = mixed_ladder(omega, p, delta);
    } else if (type == "induction")
        L = induction_schedule(omega, p);
    else
        throw SchemaError("unknown ladder type '" + type + "'");
    write_json(ctx.file("ladder.json"), ctx.stamp, to_json(L));

    if (ctx.config.contains("verify")) {
        const json& v = ctx.config.at("verify");
        const double Cp = get_or<double>(v, "C_prime", 10.0);
        const auto max_verify = get_or<std::int64_t>(v, "max_verify_scale", std::int64_t{1} << 16);
        with_cocycle(ctx.config, [&](const auto& C) {
            const auto res = ladder_verify(C, L, parse_quadrature(ctx.config, C.dim()), Cp, max_verify);
            write_json(ctx.file("verify.json"), ctx.stamp, to_json(res));
        });
    }
}

inline void run_cov(Context& ctx)
{
    const auto C = parse_trig_cocycle(ctx.config);
    const auto B = get<IntMatrix>(ctx.config, "B");
    const auto r = cov_invariance_check(C, Automorphism(B), get<std::int64_t>(ctx.config, "N"),
                                        get<std::size_t>(ctx.config, "M"));
    write_json(ctx.file("cov.json"), ctx.stamp,
               {{"B", B}, {"L_A", r.L_A}, {"L_AB", r.L_AB}, {"difference", r.difference}});
}

inline void run_example_discontinuity(Context& ctx)
{
    const Frequency omega = parse_frequency(ctx.config);
    const auto k = get<IntVec>(ctx.config, "k");
    if (k.size() != omega.dim())
        throw SchemaError("k has the wrong dimension");
    const auto Ns = get<std::vector<std::int64_t>>(ctx.config, "N_list");
    const Cocycle C(discontinuity_example(k), omega);
    auto q = parse_quadrature(ctx.config, omega.dim());
    double ksum = 0.0;
    for (auto v : k)
        ksum += static_cast<double>(v);
    const double resonant_value = 2.0 / std::numbers::pi * std::exp(-2.0 * std::numbers::pi * ksum);
    const bool resonant = dist_to_Z(dot(k, omega)) == 0.0;
    const double limit = resonant ? resonant_value : 0.0;
    CsvWriter csv(ctx.file("example_discontinuity.csv"), ctx.stamp, {"N", "value", "abs_error"});
    json rows = json::array();
    for (auto N : Ns) {
        const auto e = L_prime_N(C, N, q);
        csv.row({static_cast<double>(N), e.value, std::abs(e.value - limit)});
        rows.push_back({{"N", N}, {"value", e.value}, {"abs_error", std::abs(e.value - limit)}});
    }
    write_json(ctx.file("example_discontinuity.json"), ctx.stamp,
               {{"k", k},
                {"resonant", resonant},
                {"resonant_value", resonant_value},
                {"limit", limit},
                {"quadrature", quadrature_json(q)},
                {"rows", rows}});
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

struct RunOptions {
    fs::path out = ".";
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
};

struct RunResult {
    int exit_code = 0;
    std::vector<fs::path> files;
    json error;
};

inline RunResult run(const std::string& subcommand, json config, const RunOptions& opt)
{
    RunResult res;
    Context ctx;
    ctx.out = opt.out;
    auto fail = [&](int code, const std::string& kind, const std::string& message) {
        res.exit_code = code;
        res.error = {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}},
                     {"experiment", subcommand}};
        std::error_code ec;
        fs::create_directories(ctx.out, ec);
        try {
            write_json(ctx.out / "error.json", ctx.stamp, res.error);
            res.files.push_back(ctx.out / "error.json");
        } catch (...) {
        }
        std::cerr << res.error.dump() << '\n';
    };
    const unsigned saved_threads = detail::thread_setting().load();
    try {
        if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end())
            throw SchemaError("unknown experiment '" + subcommand + "'");
        if (!config.is_object())
            throw SchemaError("the config must be a JSON object");
        if (config.contains("experiment") && config.at("experiment") != subcommand)
            throw SchemaError("config is for experiment " + config.at("experiment").dump());
        config["experiment"] = subcommand;
        if (opt.seed)
            config["seed"] = *opt.seed;
        ctx.config = config;
        ctx.stamp.config_hash = config_hash(config);
        if (opt.threads)
            set_thread_count(*opt.threads);
        fs::create_directories(ctx.out);

        if (subcommand == "le")
            run_le(ctx);
        else if (subcommand == "le-limit")
            run_le_limit(ctx);
        else if (subcommand == "continuity")
            run_continuity(ctx);
        else if (subcommand == "ap")
            run_ap(ctx);
        else if (subcommand == "ldt")
            run_ldt(ctx);
        else if (subcommand == "cdt")
            run_cdt(ctx);
        else if (subcommand == "drift")
            run_drift(ctx);
        else if (subcommand == "loja")
            run_loja(ctx);
        else if (subcommand == "l2")
            run_l2(ctx);
        else if (subcommand == "fourier")
            run_fourier(ctx);
        else if (subcommand == "ladder")
            run_ladder(ctx);
        else if (subcommand == "cov")
            run_cov(ctx);
        else
            run_example_discontinuity(ctx);
        res.files = ctx.files;
    } catch (const SchemaError& e) {
        fail(2, "SchemaError", e.what());
    } catch (const json::exception& e) {
        fail(2, "SchemaError", e.what());
    } catch (const Error& e) {
        // bad parameter values are schema violations; the rest are numerical
        fail(e.kind() == ErrorKind::InvalidArgument ? 2 : 3, std::string(to_string(e.kind())), e.what());
    } catch (const std::exception& e) {
        fail(3, "NumericalFailure", e.what());
    }
    set_thread_count(saved_threads);
    return res;
}

} // namespace qpc::cli
