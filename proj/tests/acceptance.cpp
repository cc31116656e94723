// Acceptance run: one PASS/FAIL line per criterion with its measured runtime
// and budget. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qpcocycle/qpcocycle.hpp"

using namespace qpc;

namespace {

constexpr double kGolden = 0.6180339887498949;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<void(Outcome&)> body;
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

Cocycle<TrigPolyMatrix> singular_jacobi(const Frequency& w)
{
    return Cocycle(jacobi(TrigPoly(1), TrigPoly::cosine({1}, 1.0), 0.5, w), w);
}

Cocycle<TrigPolyMatrix> amo(double E, const Frequency& w)
{
    return Cocycle(schrodinger(cosine_potential(1, 3.0), E), w);
}

void resonant_discontinuity(Outcome& o)
{
    const double expected = 2.0 / std::numbers::pi * std::exp(-2.0 * std::numbers::pi);
    const Cocycle C(discontinuity_example({1}), Frequency({0.0}));
    double worst = 0.0;
    for (std::int64_t N : {1, 10, 100})
        worst = std::max(worst, std::abs(L_prime_N(C, N, QuadratureSpec::grid(4096)).value - expected));
    o.detail << "max |L'_N - (2/pi)e^{-2pi}| = " << fmt(worst);
    o.check(worst <= 1e-6, "error <= 1e-6");
}

void nonresonant_discontinuity(Outcome& o)
{
    const Cocycle C(discontinuity_example({1}), Frequency({kGolden}));
    const double l100 = L_prime_N(C, 100, QuadratureSpec::grid(4096)).value;
    const double l1000 = L_prime_N(C, 1000, QuadratureSpec::grid(4096)).value;
    o.detail << "L'_100 = " << fmt(l100) << ", L'_1000 = " << fmt(l1000);
    o.check(l100 <= 1e-2 && l1000 <= 1e-2, "both <= 1e-2");
    o.check(l1000 < l100, "L'_1000 < L'_100");
}

void renormalization_identity(Outcome& o)
{
    // rational 3/8, 8 | 4096: the orbit of a grid node stays on the grid
    const auto q = QuadratureSpec::grid(4096);
    double rational = 0.0;
    const auto J = singular_jacobi(Frequency({3.0 / 8.0}));
    const double dl = det_log_integral(J.A, q).value;
    for (std::int64_t N : {1, 8, 50, 200})
        rational = std::max(rational,
                            std::abs(L_N_renormalized(J, N, q).value - L_prime_N(J, N, q).value + 0.5 * dl));

    const auto G = singular_jacobi(Frequency({kGolden}));
    const auto ln = L_N_renormalized(G, 200, q);
    const auto lp = L_prime_N(G, 200, q);
    const auto dg = det_log_integral(G.A, q);
    const double golden = std::abs(ln.value - lp.value + 0.5 * dg.value);
    const double err = *ln.stderr_estimate + *lp.stderr_estimate + 0.5 * dg.error;

    const double det14 = det_log_integral(G.A, QuadratureSpec::grid(1 << 14)).value;
    o.detail << "rational residual " << fmt(rational) << ", golden residual " << fmt(golden) << " vs 5 x err "
             << fmt(5 * err) << ", int ln|det| + 2 ln 2 = " << fmt(det14 + 2 * std::log(2.0));
    o.check(rational <= 1e-8, "rational <= 1e-8");
    o.check(golden <= 5 * err, "golden within 5x quadrature error");
    o.check(std::abs(det14 + 2 * std::log(2.0)) <= 1e-3, "int ln|det| = -2 ln 2");
}

void change_of_variables(Outcome& o)
{
    const Automorphism B(IntMatrix{{2, 3}, {1, 2}});
    const Frequency w({kGolden, std::sqrt(2.0) - 1.0});
    const TrigPoly v = TrigPoly::cosine({1, 0}, 2.0) + TrigPoly::cosine({0, 1}, 1.0);
    const TrigPoly a = TrigPoly::constant(2, 1.0) + TrigPoly::cosine({0, 1}, 0.5);
    const Cocycle S(schrodinger(v, 0.3), w);
    const Cocycle J(jacobi(TrigPoly::cosine({1, 1}, 1.0), a, 0.2, w), w);
    const auto q = QuadratureSpec::grid(64, 0.0);
    const double ds = std::abs(L_prime_N(S, 50, q).value - L_prime_N(change_variables(S, B), 50, q).value);
    const double dj = std::abs(L_prime_N(J, 50, q).value - L_prime_N(change_variables(J, B), 50, q).value);
    o.detail << "Schrodinger diff " << fmt(ds) << ", Jacobi diff " << fmt(dj);
    o.check(ds <= 1e-10 && dj <= 1e-10, "both <= 1e-10");
}

void avalanche(Outcome& o)
{
    std::vector<Mat2> chain(50, Mat2::diag(1e3, 1e-3));
    const double r0 = ap_check(chain, 1.0).residual;
    APEnsembleSpec spec;
    spec.chains = 1000;
    const auto rows = ap_ensemble(spec);
    std::size_t ok = 0, variant_ok = 0, hyp = 0;
    double ceiling = 0.0;
    for (const auto& r : rows) {
        const auto& s = r.standard;
        hyp += s.hypothesis_min_norm_ok && s.hypothesis_gap_ok && s.mu >= 1e3 && s.n <= 100 ? 1 : 0;
        ok += s.residual <= 10.0 * static_cast<double>(s.n) / s.mu ? 1 : 0;
        variant_ok += r.variant.residual <= r.variant.bound ? 1 : 0;
        ceiling = std::max(ceiling, s.residual * s.mu / static_cast<double>(s.n));
    }
    o.detail << "diagonal residual " << fmt(r0) << ", " << hyp << "/1000 satisfy hypotheses, " << ok
             << " within 10n/mu (max residual*mu/n " << fmt(ceiling) << "), variant " << variant_ok
             << " within bound";
    o.check(r0 == 0.0, "diagonal residual exactly 0");
    o.check(rows.size() == 1000 && hyp == 1000, "hypotheses");
    o.check(ok == 1000, "standard bound");
    o.check(variant_ok == 1000, "variant bound");
}

void herman_floor(Outcome& o)
{
    const Frequency w({kGolden});
    const auto q = QuadratureSpec::grid(1024);
    for (double E : {-2.0, 0.0, 2.0}) {
        const double l800 = L_prime_N(amo(E, w), 800, q).value;
        const double l3200 = L_prime_N(amo(E, w), 3200, q).value;
        o.detail << "E=" << E << ": L_800 " << fmt(l800) << " L_3200 " << fmt(l3200) << "; ";
        o.check(l800 >= std::log(3.0) - 0.05, "floor at E=" + fmt(E));
        o.check(std::abs(l800 - l3200) <= 0.02, "N=3200 agreement at E=" + fmt(E));
    }
}

void deviation_suite(Outcome& o)
{
    // LDT sweep
    const Profile p = profile(amo(0.0, Frequency({kGolden})), 1000, 1024);
    double prev = 2.0;
    bool monotone = true;
    o.detail << "LDT";
    for (double k : {0.0005, 0.001, 0.002, 0.004, 0.008}) {
        const double f = ldt_empirical(p, k).measured_fraction;
        monotone = monotone && f <= prev;
        prev = f;
        o.detail << " " << fmt(f);
    }
    o.check(monotone, "LDT non-increasing in kappa");

    // CDT halving, renormalized singular Jacobi at a short scale
    const auto Jr = renormalized(singular_jacobi(Frequency({kGolden})));
    std::vector<double> fr;
    for (double a : {1e-4, 5e-5, 2.5e-5, 1.25e-5}) {
        const double s[] = {a};
        fr.push_back(cdt_empirical(Jr, 10, s, 0.05, 65536).measured_fraction);
    }
    o.detail << "; CDT ratios";
    for (std::size_t i = 1; i < fr.size(); ++i) {
        const double r = fr[i - 1] > 0 ? fr[i] / fr[i - 1] : std::nan("");
        o.detail << " " << fmt(r);
        o.check(r >= 0.25 && r <= 0.75, "CDT halving step " + std::to_string(i));
    }

    // Lojasiewicz exponents
    const double ts[] = {0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001};
    const TrigPoly s1 = TrigPoly::sine({1}, 1.0);
    const auto f1 = lojasiewicz_fit(s1, ts, 65536);
    const auto f2 = lojasiewicz_fit(s1 * s1, ts, 65536);
    const double b1 = f1.b.value_or(std::nan("")), b2 = f2.b.value_or(std::nan(""));
    o.detail << "; b(sin) " << fmt(b1) << ", b(sin^2) " << fmt(b2);
    o.check(b1 >= 0.9 && b1 <= 1.1, "b(sin)");
    o.check(b2 >= 0.4 && b2 <= 0.6, "b(sin^2)");

    // uniform L2 bound
    const std::int64_t Ns[] = {10, 100, 1000};
    const auto t = l2_uniform_check(singular_jacobi(Frequency({kGolden})), Ns, 1024);
    o.detail << "; L2 max/min " << fmt(t.max_min_ratio);
    o.check(t.max_min_ratio <= 2.0, "L2 ratio <= 2");
}

void fourier_decay(Outcome& o)
{
    const auto C = amo(0.0, Frequency({kGolden}));
    const Profile p1 = profile(C, 64, 4096);
    const Profile p2 = profile(C, 64, 8192);
    const auto r1 = fourier_coeffs(p1, 64);
    const auto r2 = fourier_coeffs(p2, 64);
    const double mean_err = std::abs(r1.coeffs[0] - cplx(p1.mean));
    const double pars = std::abs(r1.energy - r1.mean_square);
    const double change = std::abs(r2.max_k_coeff - r1.max_k_coeff) / r1.max_k_coeff;
    o.detail << "|c_0 - mean| " << fmt(mean_err) << ", Parseval gap " << fmt(pars) << ", max |k c_k| "
             << fmt(r1.max_k_coeff) << " -> " << fmt(r2.max_k_coeff) << " (" << fmt(100 * change) << "%)";
    o.check(r1.clipped == 0, "no clipped nodes");
    o.check(mean_err <= 1e-12, "c_0 equals the mean");
    o.check(pars <= 1e-10, "Parseval");
    o.check(change < 0.25, "grid-doubling stability");
}

LadderParams liouville_demo()
{
    LadderParams p;
    p.N0 = 256;
    p.q0 = 89;
    p.kappa = 0.5;
    p.C = 1.0;
    p.rho = 1.0;
    return p;
}

LadderParams induction_demo(const Frequency& w)
{
    LadderParams p;
    p.N0 = std::int64_t{1} << 31;
    p.q0 = 2;
    p.K0 = 1100;
    p.d1 = 1;
    p.k_growth = 2.0;
    p.max_scale = std::int64_t{1} << 62;
    p.delta0 = min_dot_norm(w.slice(1, 1), p.K0).delta;
    return p;
}

void ladder_replay(Outcome& o)
{
    const Frequency g({kGolden});
    const Frequency m({0.5, kGolden});
    std::vector<std::string> lv, iv;
    for (unsigned threads : {1u, 1u, 4u}) {
        set_thread_count(threads);
        lv.push_back(to_json(liouville_ladder(g, liouville_demo())).dump());
        iv.push_back(to_json(induction_schedule(m, induction_demo(m))).dump());
    }
    set_thread_count(0);
    const bool same = lv[0] == lv[1] && lv[0] == lv[2] && iv[0] == iv[1] && iv[0] == iv[2];

    const Cocycle C(TrigPolyMatrix::constant(1, Mat2::diag(2.0, 0.5)), g);
    const auto L = liouville_ladder(g, liouville_demo());
    const auto v = ladder_verify(C, L, QuadratureSpec::grid(16), 1.0);
    double worst = 0.0;
    for (const auto& pr : v.pairs)
        worst = std::max(worst, pr.difference);
    o.detail << "replays identical: " << (same ? "yes" : "no") << ", constant cocycle " << v.pairs.size()
             << " pairs, max difference " << fmt(worst);
    o.check(same, "byte-identical JSON");
    o.check(v.all_passed && worst == 0.0 && !v.pairs.empty(), "constant ladder differences 0");
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria = {
        {1, "discontinuity example, resonant", 1, resonant_discontinuity},
        {2, "discontinuity example, non-resonant", 10, nonresonant_discontinuity},
        {3, "renormalization identity", 30, renormalization_identity},
        {4, "change-of-variables invariance", 30, change_of_variables},
        {5, "avalanche principle", 10, avalanche},
        {6, "AMO floor ln 3", 60, herman_floor},
        {7, "deviation suite", 120, deviation_suite},
        {8, "Fourier decay", 10, fourier_decay},
        {9, "ladder replay determinism", 5, ladder_replay},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.body(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_s) {
            o.pass = false;
            o.detail << " [over time budget]";
        }
        failed += o.pass ? 0 : 1;
        std::printf("[%s] %d %s: %s (%.2f s, budget %.0f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    o.detail.str().c_str(), secs, c.budget_s);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
