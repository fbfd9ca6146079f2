#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <vector>

#include "tslin/errors.hpp"
#include "tslin/matrix.hpp"

namespace tslin {

using Complex = std::complex<double>;

/// Eigenvalues / polynomial roots with multiplicity.
using Spectrum = std::vector<Complex>;

/// Real-coefficient polynomial stored ascending: c[0] + c[1] x + ... + c[d] x^d.
class Polynomial {
public:
    Polynomial() : coeffs_{0.0} {}

    explicit Polynomial(Vector coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty())
            coeffs_.push_back(0.0);
    }

    static Polynomial constant(double c) { return Polynomial(Vector{c}); }

    const Vector& coefficients() const { return coeffs_; }
    std::size_t degree() const { return coeffs_.size() - 1; }
    double coeff(std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : 0.0; }
    double leading() const { return coeffs_.back(); }

    double operator()(double x) const {
        double r = 0.0;
        for (std::size_t i = coeffs_.size(); i-- > 0;)
            r = r * x + coeffs_[i];
        return r;
    }

    Complex operator()(Complex x) const {
        Complex r = 0.0;
        for (std::size_t i = coeffs_.size(); i-- > 0;)
            r = r * x + coeffs_[i];
        return r;
    }

    Polynomial derivative() const {
        if (degree() == 0)
            return Polynomial::constant(0.0);
        Vector d(degree());
        for (std::size_t i = 1; i < coeffs_.size(); ++i)
            d[i - 1] = coeffs_[i] * static_cast<double>(i);
        return Polynomial(std::move(d));
    }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        Vector c(a.degree() + b.degree() + 1, 0.0);
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j)
                c[i + j] += a.coeffs_[i] * b.coeffs_[j];
        return Polynomial(std::move(c));
    }

    std::string to_string() const {
        std::ostringstream os;
        for (std::size_t i = coeffs_.size(); i-- > 0;) {
            os << coeffs_[i];
            if (i > 0)
                os << "*x^" << i << " + ";
        }
        return os.str();
    }

private:
    Vector coeffs_;
};

struct RootOptions {
    double residual_tol = 1e-9; ///< accepted |p(root)| relative to the evaluation scale
    int max_iterations = 500;
    int restarts = 3;
};

namespace detail {

inline void eval_with_derivative(const Vector& c, Complex z, Complex& p, Complex& dp) {
    p = c.back();
    dp = 0.0;
    for (std::size_t i = c.size() - 1; i-- > 0;) {
        dp = dp * z + p;
        p = p * z + c[i];
    }
}

/// Magnitude scale of evaluating the polynomial at z; used for backward-error checks.
inline double eval_scale(const Vector& c, Complex z) {
    const double az = std::abs(z);
    double s = 0.0;
    double zp = 1.0;
    for (double ck : c) {
        s += std::abs(ck) * zp;
        zp *= az;
    }
    return s;
}

/// One Aberth-Ehrlich sweep over all current root estimates. Returns the largest relative move.
inline double aberth_sweep(const Vector& c, std::vector<Complex>& z) {
    const std::size_t d = z.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        Complex p, dp;
        eval_with_derivative(c, z[i], p, dp);
        if (std::abs(p) == 0.0)
            continue;
        if (std::abs(dp) == 0.0) {
            z[i] += Complex(1e-8, 1e-8) * (1.0 + std::abs(z[i]));
            worst = std::max(worst, 1.0);
            continue;
        }
        const Complex newton = p / dp;
        Complex repulsion = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (j == i)
                continue;
            const Complex diff = z[i] - z[j];
            if (std::abs(diff) == 0.0)
                continue;
            repulsion += 1.0 / diff;
        }
        const Complex denom = 1.0 - newton * repulsion;
        const Complex step = (std::abs(denom) == 0.0) ? newton : newton / denom;
        z[i] -= step;
        worst = std::max(worst, std::abs(step) / (1.0 + std::abs(z[i])));
    }
    return worst;
}

/// Pair near-conjugate estimates and average them so the returned spectrum of a
/// real polynomial is exactly closed under conjugation.
inline void symmetrize_conjugates(std::vector<Complex>& roots) {
    const double tol = 1e-8;
    for (Complex& z : roots)
        if (std::abs(z.imag()) <= tol * (1.0 + std::abs(z.real())))
            z = Complex(z.real(), 0.0);

    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (roots[i].imag() == 0.0)
            continue;
        bool matched = false;
        for (auto it = open.begin(); it != open.end(); ++it) {
            Complex& other = roots[*it];
            const double scale = 1.0 + std::abs(roots[i]);
            if (std::abs(other.real() - roots[i].real()) <= 1e-6 * scale &&
                std::abs(other.imag() + roots[i].imag()) <= 1e-6 * scale) {
                const double re = 0.5 * (other.real() + roots[i].real());
                const double im = 0.5 * (std::abs(other.imag()) + std::abs(roots[i].imag()));
                const double so = other.imag() > 0 ? 1.0 : -1.0;
                other = Complex(re, so * im);
                roots[i] = Complex(re, -so * im);
                open.erase(it);
                matched = true;
                break;
            }
        }
        if (!matched)
            open.push_back(i);
    }
    // Anything left unpaired is numerically real.
    for (std::size_t i : open)
        roots[i] = Complex(roots[i].real(), 0.0);
}

} // namespace detail

/// All complex roots of p, with multiplicity. Simultaneous (Aberth-Ehrlich) iteration
/// with exact deflation of zero roots and closed forms for degree one and two.
/// Throws NumericalError if the residual check fails after all restarts.
inline Spectrum poly_roots(const Polynomial& p, const RootOptions& opts = {}) {
    if (p.degree() < 1)
        throw DomainError("poly_roots: degree must be at least 1");
    if (p.leading() == 0.0)
        throw DomainError("poly_roots: leading coefficient is zero");

    // Monic, ascending coefficients.
    Vector c = p.coefficients();
    const double lead = c.back();
    for (double& x : c)
        x /= lead;

    Spectrum roots;
    // Exact zero roots deflate exactly.
    std::size_t zeros = 0;
    while (zeros < c.size() - 1 && c[zeros] == 0.0)
        ++zeros;
    roots.assign(zeros, Complex(0.0, 0.0));
    if (zeros > 0)
        c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(zeros));

    const std::size_t d = c.size() - 1;
    if (d == 0)
        return roots;

    if (d == 1) {
        roots.emplace_back(-c[0], 0.0);
        return roots;
    }
    if (d == 2) {
        const double b = c[1], a0 = c[0];
        const double disc = b * b - 4.0 * a0;
        if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            const double q = -0.5 * (b + (b >= 0.0 ? s : -s));
            const double r1 = q;
            const double r2 = (q != 0.0) ? a0 / q : 0.0;
            roots.emplace_back(r1, 0.0);
            roots.emplace_back(r2, 0.0);
        } else {
            const double im = 0.5 * std::sqrt(-disc);
            roots.emplace_back(-0.5 * b, im);
            roots.emplace_back(-0.5 * b, -im);
        }
        return roots;
    }

    double cmax = 0.0;
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
        cmax = std::max(cmax, std::abs(c[i]));
    const double cauchy = 1.0 + cmax;

    std::vector<Complex> best;
    double best_residual = std::numeric_limits<double>::infinity();

    for (int attempt = 0; attempt < opts.restarts; ++attempt) {
        const double radius = cauchy * (0.6 + 0.5 * attempt);
        const double phase = 0.39 + 0.83 * attempt;
        std::vector<Complex> z(d);
        for (std::size_t i = 0; i < d; ++i) {
            const double angle =
                2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(d) + phase;
            z[i] = radius * Complex(std::cos(angle), std::sin(angle));
        }

        for (int iter = 0; iter < opts.max_iterations; ++iter) {
            if (detail::aberth_sweep(c, z) < 1e-15)
                break;
        }

        double residual = 0.0;
        for (const Complex& zi : z) {
            Complex pv, dv;
            detail::eval_with_derivative(c, zi, pv, dv);
            const double scale = std::max(detail::eval_scale(c, zi), 1e-300);
            residual = std::max(residual, std::abs(pv) / scale);
        }
        if (residual < best_residual) {
            best_residual = residual;
            best = z;
        }
        if (residual <= opts.residual_tol)
            break;
    }

    if (best_residual > opts.residual_tol) {
        std::ostringstream os;
        os << "poly_roots: residual " << best_residual << " above tolerance " << opts.residual_tol
           << "; best iterate:";
        for (const Complex& zi : best)
            os << " (" << zi.real() << "," << zi.imag() << ")";
        throw NumericalError(os.str());
    }

    detail::symmetrize_conjugates(best);
    roots.insert(roots.end(), best.begin(), best.end());
    return roots;
}

} // namespace tslin
