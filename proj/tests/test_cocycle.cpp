#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qpcocycle/cocycle.hpp"

using namespace qpc;

namespace {

constexpr double kGolden = 0.6180339887;
const double kTwoPi = 2.0 * std::numbers::pi;

void expect_mat_near(const Mat2& a, const Mat2& b, double tol)
{
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_LT(std::abs(a.e[i] - b.e[i]), tol) << "entry " << i;
}

std::vector<double> pt(double x) { return {x}; }

TrigPoly cos1(double amp = 1.0) { return TrigPoly::cosine({1}, amp); }

} // namespace

TEST(Mat2, OperatorNormMatchesSingularValues)
{
    // Oracle: power iteration on M^* M.
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int t = 0; t < 100; ++t) {
        Mat2 m{{cplx(g(rng), g(rng)), cplx(g(rng), g(rng)), cplx(g(rng), g(rng)), cplx(g(rng), g(rng))}};
        Mat2 h{{std::conj(m.e[0]), std::conj(m.e[2]), std::conj(m.e[1]), std::conj(m.e[3])}};
        Mat2 p = h * m;
        std::array<cplx, 2> v{1.0, 0.3};
        double lambda = 0.0;
        for (int it = 0; it < 500; ++it) {
            std::array<cplx, 2> w{p.e[0] * v[0] + p.e[1] * v[1], p.e[2] * v[0] + p.e[3] * v[1]};
            lambda = std::sqrt(std::norm(w[0]) + std::norm(w[1]));
            v = {w[0] / lambda, w[1] / lambda};
        }
        EXPECT_NEAR(op_norm(m), std::sqrt(lambda), 1e-10 * std::sqrt(lambda));
    }
}

TEST(Eval, Examples)
{
    auto A = TrigPolyMatrix::constant(1, Mat2::diag(2.0, 0.5));
    expect_mat_near(A(pt(0.37)), Mat2::diag(2.0, 0.5), 0.0 + 1e-15);

    TrigPolyMatrix unit(1, {{IntVec{1}, Mat2::identity()}});
    expect_mat_near(unit(pt(0.25)), Mat2::diag(cplx(0, 1), cplx(0, 1)), 1e-15);

    auto amo = schrodinger(cosine_potential(1, 3.0), 0.0);
    expect_mat_near(amo(pt(0.0)), Mat2{{-6.0, -1.0, 1.0, 0.0}}, 1e-14);
}

TEST(EvalStrip, Examples)
{
    auto A = TrigPolyMatrix::constant(1, Mat2::diag(2.0, 0.5), 0.3);
    std::vector<cplx> z{cplx(0.2, 0.25)};
    expect_mat_near(A.eval_strip(z), Mat2::diag(2.0, 0.5), 1e-15);

    TrigPolyMatrix unit(1, {{IntVec{1}, Mat2::identity()}}, 0.5);
    const double y = 0.3;
    std::vector<cplx> iy{cplx(0.0, y)};
    const double expect = std::exp(-kTwoPi * y);
    expect_mat_near(unit.eval_strip(iy), Mat2::diag(expect, expect), 1e-14);

    std::vector<cplx> outside{cplx(0.0, 0.6)};
    try {
        unit.eval_strip(outside);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::OutsideStrip);
    }

    // Discontinuity example at Im z = rho / 2: finite, bounded by the e^{e^pi}
    // budget (|lambda(z)| <= e^{-2 pi} e^{2 pi rho / 2} <= e^{pi} for rho = 1).
    auto A0 = discontinuity_example({1}, 1.0);
    std::vector<cplx> half{cplx(0.3, -0.5)};
    const Mat2 m = A0.eval_strip(half);
    EXPECT_TRUE(is_finite(m));
    EXPECT_LE(max_abs_entry(m), std::exp(std::exp(std::numbers::pi)));
}

TEST(StripNorm, Examples)
{
    auto A = schrodinger(cosine_potential(1, 1.0), 0.3, 0.5);
    EXPECT_EQ(strip_norm(A, A, 0.1).value, 0.0);

    const double eps = 1e-3;
    auto shifted = A + TrigPolyMatrix::constant(1, Mat2::diag(eps, 0.0), 0.5);
    EXPECT_NEAR(strip_norm(shifted, A, 0.1).value, eps, 1e-15);

    TrigPolyMatrix mono(1, {{IntVec{1}, Mat2::diag(1.0, 0.0)}}, 0.5);
    TrigPolyMatrix zero = TrigPolyMatrix::constant(1, Mat2{}, 0.5);
    auto r = strip_norm(mono, zero, 0.1, 32);
    EXPECT_NEAR(r.value, 1.8744560875853382, 1e-12); // e^{2 pi 0.1}
    EXPECT_EQ(r.samples, 32u * 3u);
}

TEST(IterateLogNorm, ConstantDiagonal)
{
    Cocycle C(TrigPolyMatrix::constant(1, Mat2::diag(2.0, 0.5)), Frequency{kGolden});
    for (std::int64_t N : {1, 7, 100, 1000}) {
        auto r = iterate_log_norm(C, N, pt(0.123));
        EXPECT_FALSE(r.underflowed);
        EXPECT_NEAR(r.log_norm_avg, std::log(2.0), 1e-13);
    }
}

TEST(IterateLogNorm, FreeSchrodingerHyperbolic)
{
    // Oracle: spectral radius of (3 -1; 1 0) is (3 + sqrt 5)/2.
    Cocycle C(schrodinger(TrigPoly(1), 3.0), Frequency{kGolden});
    const double limit = 0.9624236501192069;
    auto r = iterate_log_norm(C, 4000, pt(0.0));
    EXPECT_NEAR(r.log_norm_avg, limit, 1e-3);
}

TEST(IterateLogNorm, DiscontinuityExampleResonant)
{
    Cocycle C(discontinuity_example({1}), Frequency{0.0});
    const double expected = std::exp(-kTwoPi);
    for (std::int64_t N : {1, 2, 10, 100}) {
        EXPECT_NEAR(iterate_log_norm(C, N, pt(0.0)).log_norm_avg, expected, 1e-13);
    }
    // Oracle: direct product of diagonal factors.
    const double x = 0.1;
    const int N = 5;
    cplx acc = 0.0;
    for (int j = 0; j < N; ++j)
        acc += std::exp(cplx(0.0, kTwoPi * x)) * std::exp(-kTwoPi);
    EXPECT_NEAR(iterate_log_norm(C, N, pt(x)).log_norm_avg, std::abs(acc.real()) / N, 1e-15);
}

TEST(IterateLogNorm, SingleStepMatchesDirectNorm)
{
    auto A = jacobi(cosine_potential(1, 1.5), cos1(), 0.4, Frequency{kGolden});
    Cocycle C(A, Frequency{kGolden});
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        const double x = u(rng);
        EXPECT_NEAR(iterate_log_norm(C, 1, pt(x)).log_norm_avg, std::log(op_norm(A(pt(x)))), 1e-15);
    }
}

TEST(IterateLogNorm, Submultiplicative)
{
    Cocycle C(jacobi(cosine_potential(1, 2.0), cos1(0.7) + TrigPoly::constant(1, 0.4), 0.2,
                     Frequency{kGolden}),
              Frequency{kGolden});
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        const double x = u(rng);
        const std::int64_t M = 1 + rng() % 40, N = 1 + rng() % 40;
        const double total = (M + N) * iterate_log_norm(C, M + N, pt(x)).log_norm_avg;
        const double tail = M * iterate_log_norm(C, M, pt(x + N * kGolden)).log_norm_avg;
        const double head = N * iterate_log_norm(C, N, pt(x)).log_norm_avg;
        EXPECT_LE(total, tail + head + 1e-11);
    }
}

TEST(IterateLogNorm, NonNegativeForSL2)
{
    Cocycle C(schrodinger(cosine_potential(1, 0.8), 0.5), Frequency{kGolden});
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const std::int64_t N = 1 + rng() % 200;
        EXPECT_GE(iterate_log_norm(C, N, pt(u(rng))).log_norm_avg, -1e-15);
    }
}

TEST(IterateLogNorm, ZeroProductUnderflows)
{
    // (1 0; 0 0) followed by (0 0; 0 1) annihilates everything.
    TrigPolyMatrix A(1, {{IntVec{0}, Mat2{{0.5, 0.0, 0.0, 0.5}}},
                         {IntVec{1}, Mat2{{0.25, 0.0, 0.0, -0.25}}},
                         {IntVec{-1}, Mat2{{0.25, 0.0, 0.0, -0.25}}}});
    // A(0) = diag(1, 0), A(1/2) = diag(0, 1)
    Cocycle C(A, Frequency{0.5});
    auto r = iterate_log_norm(C, 2, pt(0.0));
    EXPECT_TRUE(r.underflowed);
    EXPECT_TRUE(std::isinf(r.log_norm_avg));
}

TEST(Schrodinger, Constructor)
{
    auto A = schrodinger(TrigPoly(1), 0.0);
    expect_mat_near(A(pt(0.4)), Mat2{{0.0, -1.0, 1.0, 0.0}}, 1e-15);

    auto B = schrodinger(cosine_potential(1, 1.0), 1.0);
    auto e11 = B.entry(0, 0);
    EXPECT_NEAR(std::abs(e11.coeff({0}) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(e11.coeff({1}) + 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(e11.coeff({-1}) + 1.0), 0.0, 1e-15);

    auto det = B.det_scalar();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 20; ++t)
        EXPECT_NEAR(std::abs(B(pt(u(rng))).det() - 1.0), 0.0, 1e-13);
    EXPECT_EQ(det.degree(), 0);
    EXPECT_NEAR(std::abs(det.coeff({0}) - 1.0), 0.0, 1e-15);

    EXPECT_THROW(schrodinger(TrigPoly::sine({1}, 1.0) * cplx(0, 1), 0.0), Error);
}

TEST(Jacobi, ReducesToSchrodingerAndVanishesWithA)
{
    Frequency w{kGolden};
    auto v = cosine_potential(1, 1.3);
    auto J = jacobi(v, TrigPoly::constant(1, 1.0), 0.7, w);
    auto S = schrodinger(v, 0.7);
    for (double x : {0.0, 0.1, 0.77})
        expect_mat_near(J(pt(x)), S(pt(x)), 1e-14);

    auto Jc = jacobi(TrigPoly(1), cos1(), 0.5, w);
    EXPECT_NEAR(std::abs(Jc(pt(0.25)).det()), 0.0, 1e-15);

    try {
        jacobi(v, TrigPoly(1), 0.0, w);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IdenticallySingular);
    }
}

TEST(Jacobi, EntriesMatchDefinition)
{
    Frequency w{0.3819};
    TrigPoly a = cos1(0.8) + TrigPoly::sine({2}, 0.3) * cplx(0.2, 1.0) + TrigPoly::constant(1, 0.1);
    auto v = cosine_potential(1, 0.9);
    auto J = jacobi(v, a, 1.1, w);
    for (double x : {0.05, 0.4, 0.93}) {
        const Mat2 m = J(pt(x));
        EXPECT_NEAR(std::abs(m(0, 0) - (1.1 - v(pt(x)))), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(m(0, 1) + std::conj(a(pt(x - w[0])))), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(m(1, 0) - a(pt(x))), 0.0, 1e-14);
        EXPECT_EQ(m(1, 1), cplx{});
    }
}

TEST(DetScalar, MatchesPointwiseDeterminant)
{
    Frequency w{kGolden};
    auto J = jacobi(TrigPoly(1), cos1(), 0.5, w);
    auto det = J.det_scalar();
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 16; ++t) {
        const double x = u(rng);
        EXPECT_LT(std::abs(det(pt(x)) - J(pt(x)).det()), 1e-12);
    }
    // diag(f, g) -> f g
    auto f = cos1(2.0) + TrigPoly::constant(1, 1.0);
    auto g = TrigPoly::sine({1}, 1.0);
    auto D = TrigPolyMatrix::from_entries(f, TrigPoly(1), TrigPoly(1), g);
    auto fg = f * g;
    for (const auto& [k, c] : fg.coeffs())
        EXPECT_LT(std::abs(D.det_scalar().coeff(k) - c), 1e-15);
}

TEST(JacobiPeriodic, Examples)
{
    Frequency w{kGolden};
    auto v = cosine_potential(1, 0.6);
    auto a = cos1(0.5) + TrigPoly::constant(1, 1.0);
    const std::vector<double> zero1{0.0};
    auto P1 = jacobi_periodic(v, a, zero1, 0.3, w);
    auto J = jacobi(v, a, 0.3, w);
    // q = 1: the single factor is J(x + omega)
    for (double x : {0.1, 0.6})
        expect_mat_near(P1(pt(x)), J(pt(x + w[0])), 1e-13);

    const double c = 0.4;
    const std::vector<double> cc{c, c};
    auto P2 = jacobi_periodic(TrigPoly(1), TrigPoly::constant(1, 1.0), cc, 1.0, w);
    auto S = schrodinger(TrigPoly(1), 1.0 - c)(pt(0.0));
    expect_mat_near(P2(pt(0.2)), S * S, 1e-14);

    // Hand product: (-1 -1; 1 0)(0 -1; 1 0) = (-1 1; 0 -1)
    const std::vector<double> bg{0.0, 1.0};
    auto P3 = jacobi_periodic(TrigPoly(1), TrigPoly::constant(1, 1.0), bg, 0.0, w);
    expect_mat_near(P3(pt(0.77)), Mat2{{-1.0, 1.0, 0.0, -1.0}}, 1e-14);
}

TEST(JacobiPeriodic, ZeroBackgroundIsIterate)
{
    Frequency w{0.2718};
    auto v = cosine_potential(1, 1.2);
    auto a = cos1(1.0) + TrigPoly::sine({1}, 0.3);
    const std::vector<double> zeros(3, 0.0);
    auto P = jacobi_periodic(v, a, zeros, -0.4, w);
    auto J = jacobi(v, a, -0.4, w);
    for (double x : {0.0, 0.31, 0.58}) {
        Mat2 prod = Mat2::identity();
        for (int j = 1; j <= 3; ++j)
            prod = J(pt(x + j * w[0])) * prod;
        expect_mat_near(P(pt(x)), prod, 1e-12);
    }
    EXPECT_EQ(P.degree(), 3 * 1 + 0); // degree grows q-fold
}

TEST(Renormalize, Examples)
{
    auto S = schrodinger(cosine_potential(1, 2.0), 0.3);
    auto R = renormalize(S);
    for (double x : {0.1, 0.5})
        expect_mat_near(R(pt(x)), S(pt(x)), 1e-14);

    auto D = renormalize(TrigPolyMatrix::constant(1, Mat2::diag(2.0, 2.0)));
    expect_mat_near(D(pt(0.3)), Mat2::identity(), 1e-15);

    auto J = renormalize(jacobi(TrigPoly(1), cos1(), 0.5, Frequency{kGolden}));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 100; ++t)
        EXPECT_NEAR(std::abs(J(pt(u(rng))).det()), 1.0, 1e-12);

    auto Z = renormalize(TrigPolyMatrix::constant(1, Mat2::diag(1.0, 0.0)));
    try {
        Z.evaluate_checked(pt(0.1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Singular);
    }
    EXPECT_EQ(Z(pt(0.1)), Mat2{});
}

TEST(DiscontinuityExample, PointValues)
{
    auto A0 = discontinuity_example({1});
    const double l = std::exp(-kTwoPi);
    expect_mat_near(A0(pt(0.0)), Mat2::diag(std::exp(l), std::exp(-l)), 1e-15);
    const Mat2 q = A0(pt(0.25));
    EXPECT_NEAR(std::abs(q(0, 0)), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(q(1, 1)), 1.0, 1e-15);
    EXPECT_THROW(discontinuity_example({0, 0}), Error);
}

TEST(ChangeVariables, ComposedPolynomialEvaluatesAtBx)
{
    Automorphism B(IntMatrix{{2, 3}, {1, 2}});
    auto v = cosine_potential(2, 0.5) + TrigPoly::cosine({1, -1}, 0.2);
    Cocycle C(schrodinger(v, 0.4), Frequency{0.31, 0.77});
    auto Cb = change_variables(C, B);
    for (double x1 : {0.1, 0.45})
        for (double x2 : {0.0, 0.8}) {
            std::vector<double> x{x1, x2};
            auto bx = B.apply(x);
            expect_mat_near(Cb.A(x), C.A(bx), 1e-12);
        }
}

TEST(Json, RoundTripIsBitExact)
{
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g;
    for (int t = 0; t < 25; ++t) {
        const std::size_t d = 1 + rng() % 3;
        TrigPolyMatrix::Coeffs coeffs;
        for (int c = 0; c < 5; ++c) {
            IntVec k(d);
            for (auto& e : k)
                e = static_cast<std::int64_t>(rng() % 7) - 3;
            Mat2 m;
            for (auto& e : m.e)
                e = cplx(g(rng) * std::exp(g(rng) * 20), g(rng));
            coeffs[k] = m;
        }
        TrigPolyMatrix A(d, coeffs, 0.1 + std::abs(g(rng)));
        const std::string text = to_json(A).dump();
        TrigPolyMatrix back = trig_poly_matrix_from_json(nlohmann::json::parse(text));
        EXPECT_EQ(back.coeffs(), A.coeffs());
        EXPECT_EQ(back.rho(), A.rho());
        EXPECT_EQ(to_json(back).dump(), text);
    }
}
