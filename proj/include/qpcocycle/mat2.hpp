#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace qpc {

using cplx = std::complex<double>;

/// 2x2 complex matrix, row-major: (a b; c d).
struct Mat2 {
    std::array<cplx, 4> e{};

    static constexpr Mat2 identity() { return Mat2{{cplx{1.0}, cplx{0.0}, cplx{0.0}, cplx{1.0}}}; }
    static constexpr Mat2 diag(cplx a, cplx d) { return Mat2{{a, cplx{0.0}, cplx{0.0}, d}}; }

    cplx& operator()(int i, int j) { return e[static_cast<std::size_t>(2 * i + j)]; }
    const cplx& operator()(int i, int j) const { return e[static_cast<std::size_t>(2 * i + j)]; }

    cplx det() const { return e[0] * e[3] - e[1] * e[2]; }

    Mat2& operator+=(const Mat2& o)
    {
        for (std::size_t i = 0; i < 4; ++i)
            e[i] += o.e[i];
        return *this;
    }
    Mat2& operator-=(const Mat2& o)
    {
        for (std::size_t i = 0; i < 4; ++i)
            e[i] -= o.e[i];
        return *this;
    }
    Mat2& operator*=(cplx s)
    {
        for (auto& v : e)
            v *= s;
        return *this;
    }

    friend Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
    friend Mat2 operator-(Mat2 a, const Mat2& b) { return a -= b; }
    friend Mat2 operator*(Mat2 a, cplx s) { return a *= s; }
    friend Mat2 operator*(cplx s, Mat2 a) { return a *= s; }

    friend Mat2 operator*(const Mat2& a, const Mat2& b)
    {
        return Mat2{{a.e[0] * b.e[0] + a.e[1] * b.e[2], a.e[0] * b.e[1] + a.e[1] * b.e[3],
                     a.e[2] * b.e[0] + a.e[3] * b.e[2], a.e[2] * b.e[1] + a.e[3] * b.e[3]}};
    }

    bool operator==(const Mat2&) const = default;
};

inline double frobenius_sq(const Mat2& m)
{
    return std::norm(m.e[0]) + std::norm(m.e[1]) + std::norm(m.e[2]) + std::norm(m.e[3]);
}

/// Operator 2-norm (largest singular value), closed form:
/// sigma_max^2 = (F^2 + sqrt((F^2 - 2|det|)(F^2 + 2|det|))) / 2.
inline double op_norm(const Mat2& m)
{
    const double f2 = frobenius_sq(m);
    const double ad = std::abs(m.det());
    const double disc = std::max(0.0, (f2 - 2.0 * ad) * (f2 + 2.0 * ad));
    return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
}

inline double max_abs_entry(const Mat2& m)
{
    double r = 0.0;
    for (const auto& v : m.e)
        r = std::max(r, std::abs(v));
    return r;
}

inline bool is_finite(const Mat2& m)
{
    for (const auto& v : m.e)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            return false;
    return true;
}

} // namespace qpc
