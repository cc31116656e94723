#pragma once

// Quasiperiodic cocycles (A, omega) acting by (w, x) -> (A(x) w, x + omega),
// their iterates A_N(x) = A(x + (N-1) omega) ... A(x), and the standard
// constructors (Schrodinger, Jacobi, Jacobi with periodic background).

#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "qpcocycle/error.hpp"
#include "qpcocycle/mat2.hpp"
#include "qpcocycle/torus.hpp"
#include "qpcocycle/trig_poly.hpp"

namespace qpc {

/// Anything that evaluates a 2x2 matrix at a real point of T^d.
template <class F>
concept MatrixFunction = requires(const F& f, std::span<const double> x) {
    { f.dim() } -> std::convertible_to<std::size_t>;
    { f(x) } -> std::convertible_to<Mat2>;
};

template <MatrixFunction F>
struct Cocycle {
    F A;
    Frequency omega;

    Cocycle(F a, Frequency w) : A(std::move(a)), omega(std::move(w))
    {
        require(A.dim() == omega.dim(), ErrorKind::InvalidArgument,
                "cocycle and frequency dimensions differ");
    }

    std::size_t dim() const { return omega.dim(); }
};

template <MatrixFunction F>
Cocycle(F, Frequency) -> Cocycle<F>;

/// Norms below this are treated as an underflowed (zero) product.
inline constexpr double kUnderflowFloor = 1e-300;

namespace detail {

/// Running sum with Neumaier compensation.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v)
    {
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

} // namespace detail

struct LogNormResult {
    double log_norm_avg = 0.0; ///< (1/N) ln ||A_N(x)||; -inf when underflowed
    bool underflowed = false;
    std::vector<double> partial_logs; ///< running ln ||A_n(x)||, only when requested
};

/// (1/N) ln ||A_N(x)|| with renormalization after every step: the product is
/// kept at unit norm and the logarithms of the discarded factors accumulate.
template <MatrixFunction F>
LogNormResult iterate_log_norm(const Cocycle<F>& C, std::int64_t N, std::span<const double> x,
                               bool keep_partials = false)
{
    require(N >= 1, ErrorKind::InvalidArgument, "N must be >= 1");
    const std::size_t d = C.dim();
    require(x.size() == d, ErrorKind::InvalidArgument, "point dimension mismatch");
    LogNormResult out;
    if (keep_partials)
        out.partial_logs.reserve(static_cast<std::size_t>(N));
    std::vector<double> pos(d);
    Mat2 M = Mat2::identity();
    detail::CompensatedSum acc;
    for (std::int64_t j = 0; j < N; ++j) {
        for (std::size_t i = 0; i < d; ++i)
            pos[i] = wrap_unit(x[i] + static_cast<double>(j) * C.omega[i]);
        M = C.A(std::span<const double>(pos)) * M;
        const double n = op_norm(M);
        if (!(n >= kUnderflowFloor) || !std::isfinite(n)) {
            out.underflowed = true;
            out.log_norm_avg = -std::numeric_limits<double>::infinity();
            return out;
        }
        acc.add(std::log(n));
        M *= 1.0 / n;
        if (keep_partials)
            out.partial_logs.push_back(acc.value());
    }
    out.log_norm_avg = acc.value() / static_cast<double>(N);
    return out;
}

/// ln ||M_n ... M_1|| for an explicit chain, renormalized per step.
/// Returns -inf when the product underflows.
inline double chain_log_norm(std::span<const Mat2> chain)
{
    Mat2 M = Mat2::identity();
    detail::CompensatedSum acc;
    for (const auto& A : chain) {
        M = A * M;
        const double n = op_norm(M);
        if (!(n >= kUnderflowFloor) || !std::isfinite(n))
            return -std::numeric_limits<double>::infinity();
        acc.add(std::log(n));
        M *= 1.0 / n;
    }
    return acc.value();
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

/// 2 lambda sum_j cos(2 pi x_j): the almost Mathieu potential for d = 1.
inline TrigPoly cosine_potential(std::size_t d, double lambda)
{
    TrigPoly v(d);
    for (std::size_t j = 0; j < d; ++j) {
        IntVec k(d, 0);
        k[j] = 1;
        v += TrigPoly::cosine(k, 2.0 * lambda);
    }
    return v;
}

/// A(x) = (E - v(x), -1; 1, 0).
inline TrigPolyMatrix schrodinger(const TrigPoly& v, double E, double rho = 1.0)
{
    require(v.dim() >= 1, ErrorKind::InvalidArgument, "potential dimension must be >= 1");
    require(v.is_real_valued(), ErrorKind::InvalidArgument, "potential must be real-valued");
    const std::size_t d = v.dim();
    return TrigPolyMatrix::from_entries(TrigPoly::constant(d, E) - v, TrigPoly::constant(d, -1.0),
                                        TrigPoly::constant(d, 1.0), TrigPoly(d), rho);
}

/// A(x) = (E - v(x), -conj(a(x - omega)); a(x), 0).
inline TrigPolyMatrix jacobi(const TrigPoly& v, const TrigPoly& a, double E, const Frequency& omega,
                             double rho = 1.0)
{
    require(!a.is_zero(), ErrorKind::IdenticallySingular, "off-diagonal a vanishes identically");
    require(v.dim() == a.dim() && a.dim() == omega.dim(), ErrorKind::InvalidArgument,
            "dimension mismatch");
    require(v.is_real_valued(), ErrorKind::InvalidArgument, "potential must be real-valued");
    std::vector<double> back(omega.components());
    for (auto& b : back)
        b = -b;
    const std::size_t d = v.dim();
    return TrigPolyMatrix::from_entries(TrigPoly::constant(d, E) - v, -a.shifted(back).conj_real(), a,
                                        TrigPoly(d), rho);
}

/// One period of the Jacobi transfer matrix with a q-periodic background:
/// A(x) = P_q(x) ... P_1(x) with
/// P_j(x) = (E - v(x + j omega) - v_per[j-1], -conj(a(x + (j-1) omega)); a(x + j omega), 0).
/// The regrouped cocycle runs at frequency q omega.
inline TrigPolyMatrix jacobi_periodic(const TrigPoly& v, const TrigPoly& a,
                                      std::span<const double> v_per, double E,
                                      const Frequency& omega, double rho = 1.0)
{
    require(!v_per.empty(), ErrorKind::InvalidArgument, "period q must be >= 1");
    require(!a.is_zero(), ErrorKind::IdenticallySingular, "off-diagonal a vanishes identically");
    const std::size_t d = omega.dim();
    std::optional<TrigPolyMatrix> product;
    std::vector<double> shift(d);
    for (std::size_t j = 1; j <= v_per.size(); ++j) {
        for (std::size_t i = 0; i < d; ++i)
            shift[i] = static_cast<double>(j) * omega[i];
        const TrigPolyMatrix site = jacobi(v.shifted(shift), a.shifted(shift), E - v_per[j - 1],
                                           omega, rho);
        product = product ? site * *product : site;
    }
    return *product;
}

/// Pointwise A / |det A|^{1/2}. At points with |det A| below the floor the
/// evaluator returns the zero matrix, which iterate_log_norm reports as
/// underflow; evaluate_checked throws Singular there instead.
template <MatrixFunction F>
class Renormalized {
public:
    explicit Renormalized(F a, double floor = kUnderflowFloor) : a_(std::move(a)), floor_(floor) {}

    std::size_t dim() const { return a_.dim(); }
    const F& base() const { return a_; }
    double floor() const { return floor_; }

    Mat2 operator()(std::span<const double> x) const
    {
        Mat2 m = a_(x);
        const double ad = std::abs(m.det());
        if (!(ad >= floor_) || !std::isfinite(ad))
            return Mat2{};
        return m * cplx(1.0 / std::sqrt(ad));
    }

    Mat2 evaluate_checked(std::span<const double> x) const
    {
        Mat2 m = a_(x);
        const double ad = std::abs(m.det());
        require(ad >= floor_ && std::isfinite(ad), ErrorKind::Singular,
                "|det A(x)| below the renormalization floor");
        return m * cplx(1.0 / std::sqrt(ad));
    }

private:
    F a_;
    double floor_;
};

template <MatrixFunction F>
Renormalized<F> renormalize(F a, double floor = kUnderflowFloor)
{
    return Renormalized<F>(std::move(a), floor);
}

template <MatrixFunction F>
Cocycle<Renormalized<F>> renormalized(const Cocycle<F>& C, double floor = kUnderflowFloor)
{
    return Cocycle<Renormalized<F>>(Renormalized<F>(C.A, floor), C.omega);
}

/// A_0(x) = diag(e^{lambda(x)}, e^{-lambda(x)}) with
/// lambda(x) = e^{2 pi i k.x} e^{-2 pi (k_1 + ... + k_d)}.
/// Entries are exponentials of a trigonometric monomial, so this is a
/// pointwise evaluator rather than a trigonometric polynomial.
class DiscontinuityExample {
public:
    explicit DiscontinuityExample(IntVec k, double rho = 1.0) : k_(std::move(k)), rho_(rho)
    {
        require(!k_.empty() && max_norm(k_) > 0, ErrorKind::InvalidArgument, "k must be nonzero");
        double s = 0.0;
        for (auto v : k_)
            s += static_cast<double>(v);
        scale_ = std::exp(-detail::two_pi * s);
    }

    std::size_t dim() const noexcept { return k_.size(); }
    const IntVec& k() const noexcept { return k_; }
    double rho() const noexcept { return rho_; }

    template <class T>
    cplx lambda(std::span<const T> z) const
    {
        cplx phase = 0.0;
        for (std::size_t j = 0; j < k_.size(); ++j)
            phase += static_cast<double>(k_[j]) * cplx(z[j]);
        return std::exp(cplx(0.0, detail::two_pi) * phase) * scale_;
    }

    Mat2 operator()(std::span<const double> x) const
    {
        require(x.size() == dim(), ErrorKind::InvalidArgument, "point dimension mismatch");
        const cplx l = lambda(x);
        return Mat2::diag(std::exp(l), std::exp(-l));
    }

    Mat2 eval_strip(std::span<const cplx> z) const
    {
        require(z.size() == dim(), ErrorKind::InvalidArgument, "point dimension mismatch");
        for (const auto& zj : z)
            require(std::abs(zj.imag()) <= rho_, ErrorKind::OutsideStrip, "point outside the strip");
        const cplx l = lambda(z);
        return Mat2::diag(std::exp(l), std::exp(-l));
    }

private:
    IntVec k_;
    double rho_;
    double scale_;
};

inline DiscontinuityExample discontinuity_example(IntVec k, double rho = 1.0)
{
    return DiscontinuityExample(std::move(k), rho);
}

/// (A o B, B^{-1} omega): the cocycle after the change of variables x -> B x.
inline Cocycle<TrigPolyMatrix> change_variables(const Cocycle<TrigPolyMatrix>& C,
                                                const Automorphism& B)
{
    require(B.dim() == C.dim(), ErrorKind::InvalidArgument, "automorphism dimension mismatch");
    return Cocycle<TrigPolyMatrix>(C.A.composed(B.entries()), B.apply_inverse(C.omega));
}

} // namespace qpc
