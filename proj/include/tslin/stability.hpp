#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "tslin/errors.hpp"
#include "tslin/linalg.hpp"
#include "tslin/matrix.hpp"
#include "tslin/positivity.hpp"
#include "tslin/timescale.hpp"

namespace tslin {

enum class StabilityVerdict { Stable, Unstable, Inconclusive };

enum class StabilityMethod {
    CoefficientTest, ///< all characteristic coefficients strictly positive (positive systems)
    DiscTest,        ///< every eigenvalue inside the disc |z + gamma| < gamma
    HalfPlaneTest,   ///< every eigenvalue in the open left half plane (gamma infinite)
};

struct StabilityReport {
    StabilityVerdict verdict = StabilityVerdict::Inconclusive;
    StabilityMethod method = StabilityMethod::DiscTest;
    Vector chi_coefficients;          ///< ascending, leading coefficient 1
    Spectrum spectrum;
    std::vector<double> disc_margins; ///< per eigenvalue: gamma - |z + gamma| (or -Re z)
    bool exact_region = false;        ///< the verdict region is exact, not merely sufficient
    bool marginal = false;            ///< some |coefficient| < 1e-9: numerically on the boundary
};

/// Coefficient positivity test: computes the characteristic polynomial and
/// checks that every coefficient below the leading 1 is strictly positive.
inline std::pair<bool, Vector> coefficient_test(const Matrix& a) {
    const Polynomial chi = char_poly(a);
    const Vector& c = chi.coefficients();
    bool all_positive = true;
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
        all_positive = all_positive && c[i] > 0.0;
    return {all_positive, c};
}

/// Membership of lambda in the certified stable region for the given gamma.
/// Finite gamma: the open disc of radius gamma centred at -gamma, with margin
/// gamma - |lambda + gamma|. Infinite gamma: the open left half plane.
inline std::pair<bool, double> disc_membership(Complex lambda, double gamma) {
    if (gamma == 0.0)
        throw PreconditionError("disc_membership: gamma = 0 (unbounded graininess)");
    if (!(gamma > 0.0))
        throw DomainError("disc_membership: gamma must be positive or infinite");
    if (std::isinf(gamma)) {
        const double margin = -lambda.real();
        return {margin > 0.0, margin};
    }
    const double margin = gamma - std::abs(lambda + Complex(gamma, 0.0));
    return {margin > 0.0, margin};
}

/// Uniform exponential stability of x^delta = A x on the scale.
///
/// Positive systems route through the coefficient test, which is exact for
/// every bounded-graininess scale. Otherwise each eigenvalue is placed against
/// the disc (or half plane); the disc is exact for homogeneous scales and only
/// sufficient for mixed ones, where an eigenvalue that is neither inside the
/// disc nor in the closed right half plane leaves the verdict Inconclusive.
inline StabilityReport assess_stability(const Matrix& a, const TimeScale& ts) {
    if (!ts.bounded_graininess())
        throw PreconditionError(
            "assess_stability: requires bounded graininess (mu_bar < +inf)");

    StabilityReport rep;
    const Polynomial chi = char_poly(a);
    rep.chi_coefficients = chi.coefficients();
    rep.spectrum = poly_roots(chi);

    for (std::size_t i = 0; i + 1 < rep.chi_coefficients.size(); ++i)
        if (std::abs(rep.chi_coefficients[i]) < 1e-9)
            rep.marginal = true;

    const double gamma = ts.gamma();
    rep.disc_margins.reserve(rep.spectrum.size());
    for (const Complex& z : rep.spectrum)
        rep.disc_margins.push_back(disc_membership(z, gamma).second);

    const bool positive = check_positive_system(a, Matrix(), ts).verdict;
    if (positive) {
        rep.method = StabilityMethod::CoefficientTest;
        rep.exact_region = true; // exact for every bounded-graininess scale
        bool all_positive = true;
        for (std::size_t i = 0; i + 1 < rep.chi_coefficients.size(); ++i)
            all_positive = all_positive && rep.chi_coefficients[i] > 0.0;
        rep.verdict = all_positive ? StabilityVerdict::Stable : StabilityVerdict::Unstable;
        return rep;
    }

    rep.method = std::isinf(gamma) ? StabilityMethod::HalfPlaneTest : StabilityMethod::DiscTest;
    rep.exact_region = std::isinf(gamma) || ts.is_uniform_discrete();

    bool all_inside = true;
    bool any_right_half = false;
    for (const Complex& z : rep.spectrum) {
        if (!disc_membership(z, gamma).first)
            all_inside = false;
        if (z.real() >= 0.0)
            any_right_half = true;
    }
    if (all_inside)
        rep.verdict = StabilityVerdict::Stable;
    else if (any_right_half || rep.exact_region)
        rep.verdict = StabilityVerdict::Unstable;
    else
        rep.verdict = StabilityVerdict::Inconclusive;
    return rep;
}

inline StabilityReport assess_stability(const PositiveSystem& sys) {
    return assess_stability(sys.a, sys.ts);
}

} // namespace tslin
