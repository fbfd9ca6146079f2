#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "tslin/errors.hpp"
#include "tslin/matrix.hpp"
#include "tslin/polynomial.hpp"

namespace tslin {

inline constexpr std::size_t kMaxOrder = 64;

/// Monic characteristic polynomial det(xI - A) by the Faddeev-LeVerrier recurrence.
/// Coefficients come out ascending; the leading coefficient is exactly 1.
inline Polynomial char_poly(const Matrix& a) {
    if (!a.is_square())
        throw DomainError("char_poly: matrix not square");
    const std::size_t n = a.rows();
    if (n == 0)
        throw DomainError("char_poly: empty matrix");
    if (n > kMaxOrder)
        throw DomainError("char_poly: order above supported limit 64");

    Vector c(n + 1, 0.0);
    c[n] = 1.0;
    Matrix b = Matrix::identity(n);
    for (std::size_t k = 1; k <= n; ++k) {
        const Matrix ab = a * b;
        const double ck = -ab.trace() / static_cast<double>(k);
        c[n - k] = ck;
        b = ab;
        for (std::size_t i = 0; i < n; ++i)
            b(i, i) += ck;
    }
    return Polynomial(std::move(c));
}

/// Eigenvalues with multiplicity, via the characteristic polynomial.
inline Spectrum spectrum(const Matrix& a, const RootOptions& opts = {}) {
    return poly_roots(char_poly(a), opts);
}

/// max |lambda| over the spectrum.
inline double spectral_radius(const Matrix& a) {
    double r = 0.0;
    for (const Complex& z : spectrum(a))
        r = std::max(r, std::abs(z));
    return r;
}

/// max Re lambda over the spectrum.
inline double spectral_abscissa(const Matrix& a) {
    double eta = -std::numeric_limits<double>::infinity();
    for (const Complex& z : spectrum(a))
        eta = std::max(eta, z.real());
    return eta;
}

/// Rank of the complex matrix Re + i*Im through its 2r-by-2c real embedding
/// [[Re, -Im], [Im, Re]]; the embedding has exactly twice the complex rank.
inline std::size_t complex_matrix_rank(const Matrix& re, const Matrix& im, double tol = 1e-9) {
    if (re.rows() != im.rows() || re.cols() != im.cols())
        throw DomainError("complex_matrix_rank: real and imaginary parts differ in shape");
    const std::size_t r = re.rows(), c = re.cols();
    Matrix emb(2 * r, 2 * c);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            emb(i, j) = re(i, j);
            emb(i, j + c) = -im(i, j);
            emb(i + r, j) = im(i, j);
            emb(i + r, j + c) = re(i, j);
        }
    }
    return matrix_rank(emb, tol) / 2;
}

namespace detail {

// Diagonal Pade [6/6] coefficients of exp, computed once.
inline const double* pade6_coefficients() {
    static const double coeffs[] = {
        1.0, 1.0 / 2.0, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
    return coeffs;
}

} // namespace detail

/// exp(A*dt) by scaling-and-squaring with a diagonal Pade approximant.
/// Requires dt >= 0 and finite entries; throws NumericalError when the scaled
/// norm is beyond what squaring can recover.
inline Matrix expm(const Matrix& a, double dt) {
    if (!a.is_square())
        throw DomainError("expm: matrix not square");
    if (!(dt >= 0.0) || !std::isfinite(dt))
        throw DomainError("expm: dt must be finite and nonnegative");
    const std::size_t n = a.rows();
    if (dt == 0.0)
        return Matrix::identity(n);

    const double eta = a.norm_inf() * dt;
    if (!std::isfinite(eta) || eta > 1e12)
        throw NumericalError("expm: ||A*dt|| too large");

    int squarings = 0;
    if (eta > 0.25)
        squarings = static_cast<int>(std::ceil(std::log2(eta / 0.25)));
    const double scale = dt / std::ldexp(1.0, squarings);

    Matrix x = a * scale;
    const Matrix x2 = x * x;
    const double* c = detail::pade6_coefficients();

    Matrix even = Matrix::identity(n) * c[0] + x2 * c[2] + (x2 * x2) * c[4] + (x2 * x2 * x2) * c[6];
    Matrix odd = x * (Matrix::identity(n) * c[1] + x2 * c[3] + (x2 * x2) * c[5]);

    Matrix num = even + odd;
    Matrix den = even - odd;
    Matrix result = LuDecomposition(den).solve(num);

    for (int i = 0; i < squarings; ++i)
        result = result * result;
    return result;
}

} // namespace tslin
