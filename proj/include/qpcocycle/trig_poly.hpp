#pragma once

// Trigonometric polynomials on T^d, scalar and 2x2-matrix valued.
//
// f(x) = sum_k c_k e^{2 pi i k.x} with finitely many k in Z^d. Being entire,
// they evaluate anywhere in C^d; the strip radius rho is the budget used for
// strip-norm computations and the bound checked by eval_strip.

#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpcocycle/error.hpp"
#include "qpcocycle/mat2.hpp"
#include "qpcocycle/torus.hpp"

namespace qpc {

namespace detail {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Table of e^{2 pi i m z_j} for m in [-D, D], one row per dimension.
class PhaseTable {
public:
    template <class T>
    PhaseTable(std::span<const T> z, std::int64_t degree) : D_(degree), stride_(2 * degree + 1)
    {
        table_.resize(z.size() * stride_);
        for (std::size_t j = 0; j < z.size(); ++j) {
            cplx* row = &table_[j * stride_ + static_cast<std::size_t>(D_)];
            row[0] = 1.0;
            if (D_ == 0)
                continue;
            const cplx base = std::exp(cplx(0.0, two_pi) * cplx(z[j]));
            const cplx inv = std::exp(cplx(0.0, -two_pi) * cplx(z[j]));
            for (std::int64_t m = 1; m <= D_; ++m) {
                row[m] = row[m - 1] * base;
                row[-m] = row[-m + 1] * inv;
            }
        }
    }

    cplx monomial(std::span<const std::int64_t> k) const
    {
        cplx v = 1.0;
        for (std::size_t j = 0; j < k.size(); ++j)
            v *= table_[j * stride_ + static_cast<std::size_t>(D_ + k[j])];
        return v;
    }

private:
    std::int64_t D_;
    std::size_t stride_;
    std::vector<cplx> table_;
};

inline IntVec transpose_apply(const IntMatrix& B, std::span<const std::int64_t> k)
{
    IntVec out(k.size(), 0);
    for (std::size_t i = 0; i < k.size(); ++i)
        for (std::size_t j = 0; j < k.size(); ++j)
            out[i] += B[j][i] * k[j];
    return out;
}

} // namespace detail

/// Scalar trigonometric polynomial on T^d with complex coefficients.
class TrigPoly {
public:
    using Coeffs = std::map<IntVec, cplx>;

    TrigPoly() = default;
    explicit TrigPoly(std::size_t d) : d_(d) {}
    TrigPoly(std::size_t d, Coeffs coeffs) : d_(d), c_(std::move(coeffs))
    {
        for (const auto& [k, v] : c_)
            require(k.size() == d_, ErrorKind::InvalidArgument, "index dimension mismatch");
        prune();
    }

    static TrigPoly constant(std::size_t d, cplx c) { return TrigPoly(d, {{IntVec(d, 0), c}}); }

    static TrigPoly monomial(const IntVec& k, cplx c) { return TrigPoly(k.size(), {{k, c}}); }

    /// amplitude * cos(2 pi k.x)
    static TrigPoly cosine(const IntVec& k, double amplitude)
    {
        IntVec neg(k);
        for (auto& v : neg)
            v = -v;
        TrigPoly p(k.size());
        p.c_[k] += 0.5 * amplitude;
        p.c_[neg] += 0.5 * amplitude;
        p.prune();
        return p;
    }

    /// amplitude * sin(2 pi k.x)
    static TrigPoly sine(const IntVec& k, double amplitude)
    {
        IntVec neg(k);
        for (auto& v : neg)
            v = -v;
        TrigPoly p(k.size());
        p.c_[k] += cplx(0.0, -0.5 * amplitude);
        p.c_[neg] += cplx(0.0, 0.5 * amplitude);
        p.prune();
        return p;
    }

    std::size_t dim() const noexcept { return d_; }
    const Coeffs& coeffs() const noexcept { return c_; }
    bool is_zero() const noexcept { return c_.empty(); }

    cplx coeff(const IntVec& k) const
    {
        auto it = c_.find(k);
        return it == c_.end() ? cplx{} : it->second;
    }

    std::int64_t degree() const
    {
        std::int64_t D = 0;
        for (const auto& [k, v] : c_)
            D = std::max(D, max_norm(k));
        return D;
    }

    template <class T>
    cplx eval_at(std::span<const T> z) const
    {
        require(z.size() == d_, ErrorKind::InvalidArgument, "evaluation point dimension mismatch");
        detail::PhaseTable phases(z, degree());
        cplx s = 0.0;
        for (const auto& [k, v] : c_)
            s += v * phases.monomial(k);
        return s;
    }

    cplx operator()(std::span<const double> x) const { return eval_at(x); }

    /// True when conjugate-symmetric coefficients make f real on the real torus.
    bool is_real_valued(double tol = 1e-14) const
    {
        for (const auto& [k, v] : c_) {
            IntVec neg(k);
            for (auto& e : neg)
                e = -e;
            if (std::abs(v - std::conj(coeff(neg))) > tol * std::max(1.0, std::abs(v)))
                return false;
        }
        return true;
    }

    /// x -> f(x + s)
    TrigPoly shifted(std::span<const double> s) const
    {
        Coeffs out;
        for (const auto& [k, v] : c_) {
            double phase = 0.0;
            for (std::size_t j = 0; j < d_; ++j)
                phase += static_cast<double>(k[j]) * s[j];
            out[k] = v * std::exp(cplx(0.0, detail::two_pi * phase));
        }
        return TrigPoly(d_, std::move(out));
    }

    /// x -> conj(f(x)) for real x.
    TrigPoly conj_real() const
    {
        Coeffs out;
        for (const auto& [k, v] : c_) {
            IntVec neg(k);
            for (auto& e : neg)
                e = -e;
            out[neg] = std::conj(v);
        }
        return TrigPoly(d_, std::move(out));
    }

    /// x -> f(B x); the coefficient at k moves to B^T k.
    TrigPoly composed(const IntMatrix& B) const
    {
        Coeffs out;
        for (const auto& [k, v] : c_)
            out[detail::transpose_apply(B, k)] += v;
        return TrigPoly(d_, std::move(out));
    }

    TrigPoly& operator+=(const TrigPoly& o)
    {
        require(o.d_ == d_, ErrorKind::InvalidArgument, "dimension mismatch");
        for (const auto& [k, v] : o.c_)
            c_[k] += v;
        prune();
        return *this;
    }
    TrigPoly& operator-=(const TrigPoly& o)
    {
        require(o.d_ == d_, ErrorKind::InvalidArgument, "dimension mismatch");
        for (const auto& [k, v] : o.c_)
            c_[k] -= v;
        prune();
        return *this;
    }
    TrigPoly& operator*=(cplx s)
    {
        for (auto& [k, v] : c_)
            v *= s;
        prune();
        return *this;
    }

    friend TrigPoly operator+(TrigPoly a, const TrigPoly& b) { return a += b; }
    friend TrigPoly operator-(TrigPoly a, const TrigPoly& b) { return a -= b; }
    friend TrigPoly operator*(TrigPoly a, cplx s) { return a *= s; }
    friend TrigPoly operator*(cplx s, TrigPoly a) { return a *= s; }
    friend TrigPoly operator-(TrigPoly a) { return a *= -1.0; }

    /// Coefficient convolution.
    friend TrigPoly operator*(const TrigPoly& a, const TrigPoly& b)
    {
        require(a.d_ == b.d_, ErrorKind::InvalidArgument, "dimension mismatch");
        Coeffs out;
        IntVec k(a.d_);
        for (const auto& [ka, va] : a.c_)
            for (const auto& [kb, vb] : b.c_) {
                for (std::size_t j = 0; j < a.d_; ++j)
                    k[j] = ka[j] + kb[j];
                out[k] += va * vb;
            }
        return TrigPoly(a.d_, std::move(out));
    }

private:
    void prune()
    {
        std::erase_if(c_, [](const auto& kv) { return kv.second == cplx{}; });
    }

    std::size_t d_ = 0;
    Coeffs c_;
};

/// 2x2-matrix-valued trigonometric polynomial with a strip radius.
class TrigPolyMatrix {
public:
    using Coeffs = std::map<IntVec, Mat2>;

    TrigPolyMatrix() = default;

    TrigPolyMatrix(std::size_t d, Coeffs coeffs, double rho = 1.0)
        : d_(d), rho_(rho), c_(std::move(coeffs))
    {
        require(d_ >= 1, ErrorKind::InvalidArgument, "dimension must be >= 1");
        require(rho_ > 0.0, ErrorKind::InvalidArgument, "strip radius must be > 0");
        for (const auto& [k, m] : c_)
            require(k.size() == d_, ErrorKind::InvalidArgument, "index dimension mismatch");
        rebuild();
    }

    /// Assemble from four scalar entries (a b; c d).
    static TrigPolyMatrix from_entries(const TrigPoly& a, const TrigPoly& b, const TrigPoly& c,
                                       const TrigPoly& d, double rho = 1.0)
    {
        const std::size_t dim = a.dim();
        require(b.dim() == dim && c.dim() == dim && d.dim() == dim, ErrorKind::InvalidArgument,
                "entry dimensions differ");
        Coeffs out;
        const TrigPoly* entries[4] = {&a, &b, &c, &d};
        for (std::size_t e = 0; e < 4; ++e)
            for (const auto& [k, v] : entries[e]->coeffs())
                out[k].e[e] += v;
        return TrigPolyMatrix(dim, std::move(out), rho);
    }

    static TrigPolyMatrix constant(std::size_t d, const Mat2& m, double rho = 1.0)
    {
        return TrigPolyMatrix(d, {{IntVec(d, 0), m}}, rho);
    }

    std::size_t dim() const noexcept { return d_; }
    double rho() const noexcept { return rho_; }
    std::int64_t degree() const noexcept { return degree_; }
    const Coeffs& coeffs() const noexcept { return c_; }

    TrigPolyMatrix with_rho(double rho) const { return TrigPolyMatrix(d_, c_, rho); }

    TrigPoly entry(int i, int j) const
    {
        TrigPoly::Coeffs out;
        for (const auto& [k, m] : c_)
            out[k] = m(i, j);
        return TrigPoly(d_, std::move(out));
    }

    /// A(x) for real x.
    Mat2 operator()(std::span<const double> x) const { return eval_at(x); }
    Mat2 eval(std::span<const double> x) const { return eval_at(x); }

    /// Analytic extension at complex z; requires |Im z_j| <= rho.
    Mat2 eval_strip(std::span<const cplx> z) const
    {
        for (const auto& zj : z)
            require(std::abs(zj.imag()) <= rho_, ErrorKind::OutsideStrip,
                    "|Im z| = " + std::to_string(std::abs(zj.imag())) + " exceeds rho");
        return eval_at(z);
    }

    /// Coefficient-level determinant.
    TrigPoly det_scalar() const
    {
        return entry(0, 0) * entry(1, 1) - entry(0, 1) * entry(1, 0);
    }

    /// x -> A(B x).
    TrigPolyMatrix composed(const IntMatrix& B) const
    {
        require(B.size() == d_, ErrorKind::InvalidArgument, "automorphism dimension mismatch");
        Coeffs out;
        for (const auto& [k, m] : c_)
            out[detail::transpose_apply(B, k)] += m;
        return TrigPolyMatrix(d_, std::move(out), rho_);
    }

    friend TrigPolyMatrix operator*(const TrigPolyMatrix& a, const TrigPolyMatrix& b)
    {
        require(a.d_ == b.d_, ErrorKind::InvalidArgument, "dimension mismatch");
        Coeffs out;
        IntVec k(a.d_);
        for (const auto& [ka, ma] : a.c_)
            for (const auto& [kb, mb] : b.c_) {
                for (std::size_t j = 0; j < a.d_; ++j)
                    k[j] = ka[j] + kb[j];
                out[k] += ma * mb;
            }
        return TrigPolyMatrix(a.d_, std::move(out), std::min(a.rho_, b.rho_));
    }

    friend TrigPolyMatrix operator+(const TrigPolyMatrix& a, const TrigPolyMatrix& b)
    {
        require(a.d_ == b.d_, ErrorKind::InvalidArgument, "dimension mismatch");
        Coeffs out = a.c_;
        for (const auto& [k, m] : b.c_)
            out[k] += m;
        return TrigPolyMatrix(a.d_, std::move(out), std::min(a.rho_, b.rho_));
    }

    friend TrigPolyMatrix operator-(const TrigPolyMatrix& a, const TrigPolyMatrix& b)
    {
        require(a.d_ == b.d_, ErrorKind::InvalidArgument, "dimension mismatch");
        Coeffs out = a.c_;
        for (const auto& [k, m] : b.c_)
            out[k] -= m;
        return TrigPolyMatrix(a.d_, std::move(out), std::min(a.rho_, b.rho_));
    }

    friend TrigPolyMatrix operator*(cplx s, const TrigPolyMatrix& a)
    {
        Coeffs out = a.c_;
        for (auto& [k, m] : out)
            m *= s;
        return TrigPolyMatrix(a.d_, std::move(out), a.rho_);
    }

private:
    template <class T>
    Mat2 eval_at(std::span<const T> z) const
    {
        require(z.size() == d_, ErrorKind::InvalidArgument, "evaluation point dimension mismatch");
        if (degree_ == 0)
            return constant_term_;
        detail::PhaseTable phases(z, degree_);
        Mat2 s{};
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            const cplx p = phases.monomial(terms_[t]);
            for (std::size_t e = 0; e < 4; ++e)
                s.e[e] += mats_[t].e[e] * p;
        }
        return s;
    }

    void rebuild()
    {
        std::erase_if(c_, [](const auto& kv) { return kv.second == Mat2{}; });
        terms_.clear();
        mats_.clear();
        degree_ = 0;
        constant_term_ = Mat2{};
        for (const auto& [k, m] : c_) {
            terms_.push_back(k);
            mats_.push_back(m);
            degree_ = std::max(degree_, max_norm(k));
            if (max_norm(k) == 0)
                constant_term_ = m;
        }
    }

    std::size_t d_ = 0;
    double rho_ = 1.0;
    Coeffs c_;
    std::vector<IntVec> terms_;
    std::vector<Mat2> mats_;
    std::int64_t degree_ = 0;
    Mat2 constant_term_{};
};

/// Grid approximation of sup over the closed polystrip of the entrywise-max
/// modulus of A(z) - B(z). Samples the real torus and the 2^d faces with
/// Im z_j = +-rho, using `per_dim` real nodes per dimension.
struct StripNormResult {
    double value = 0.0;
    std::size_t samples = 0;
};

inline StripNormResult strip_norm(const TrigPolyMatrix& A, const TrigPolyMatrix& B, double rho,
                                  std::size_t per_dim = 64)
{
    require(A.dim() == B.dim(), ErrorKind::InvalidArgument, "dimension mismatch");
    require(rho > 0.0 && A.rho() >= rho && B.rho() >= rho, ErrorKind::InvalidArgument,
            "both functions must be defined on the requested strip");
    require(per_dim >= 1, ErrorKind::InvalidArgument, "per_dim must be >= 1");
    const TrigPolyMatrix diff = A - B;
    const std::size_t d = A.dim();
    StripNormResult out;
    std::vector<std::size_t> idx(d, 0);
    std::vector<cplx> z(d);
    const std::size_t faces = std::size_t{1} << d;
    for (;;) {
        // real torus plus every sign pattern of the imaginary parts
        for (std::size_t face = 0; face <= faces; ++face) {
            for (std::size_t j = 0; j < d; ++j) {
                const double re = static_cast<double>(idx[j]) / static_cast<double>(per_dim);
                double im = 0.0;
                if (face < faces)
                    im = ((face >> j) & 1u) ? rho : -rho;
                z[j] = cplx(re, im);
            }
            out.value = std::max(out.value, max_abs_entry(diff.eval_strip(z)));
            ++out.samples;
        }
        std::size_t j = 0;
        while (j < d && ++idx[j] == per_dim)
            idx[j++] = 0;
        if (j == d)
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON: {d, degree, rho, coeffs: [{k: [...], m: [[re, im] x 4]}]}
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const TrigPolyMatrix& A)
{
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& [k, m] : A.coeffs()) {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& v : m.e)
            entries.push_back({v.real(), v.imag()});
        coeffs.push_back({{"k", k}, {"m", entries}});
    }
    return {{"d", A.dim()}, {"degree", A.degree()}, {"rho", A.rho()}, {"coeffs", coeffs}};
}

inline TrigPolyMatrix trig_poly_matrix_from_json(const nlohmann::json& j)
{
    const auto d = j.at("d").get<std::size_t>();
    const auto rho = j.at("rho").get<double>();
    TrigPolyMatrix::Coeffs coeffs;
    for (const auto& entry : j.at("coeffs")) {
        auto k = entry.at("k").get<IntVec>();
        const auto& m = entry.at("m");
        require(m.size() == 4, ErrorKind::InvalidArgument, "matrix coefficient needs 4 entries");
        Mat2 mat;
        for (std::size_t e = 0; e < 4; ++e)
            mat.e[e] = cplx(m[e].at(0).get<double>(), m[e].at(1).get<double>());
        coeffs[k] += mat;
    }
    TrigPolyMatrix out(d, std::move(coeffs), rho);
    if (j.contains("degree"))
        require(j.at("degree").get<std::int64_t>() == out.degree(), ErrorKind::InvalidArgument,
                "declared degree does not match coefficients");
    return out;
}

} // namespace qpc
