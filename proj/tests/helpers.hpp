#pragma once

// Shared generators and independent oracles for the test suites. Everything
// here is deliberately implemented from definitions (step recursions, closed
// forms, elementary symmetric functions) rather than through the library
// call paths it is used to check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "tslin/matrix.hpp"
#include "tslin/polynomial.hpp"
#include "tslin/positivity.hpp"
#include "tslin/simulate.hpp"
#include "tslin/timescale.hpp"

namespace testutil {

using tslin::Complex;
using tslin::Matrix;
using tslin::Spectrum;
using tslin::TimeScale;
using tslin::Vector;

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Matrix random_matrix(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a(i, j) = uniform(rng, lo, hi);
    return a;
}

/// Metzler matrix with off-diagonal entries in [0, off_hi] and diagonal
/// entries in [diag_lo, diag_hi].
inline Matrix random_metzler(Rng& rng, std::size_t n, double off_hi, double diag_lo,
                             double diag_hi) {
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a(i, j) = i == j ? uniform(rng, diag_lo, diag_hi) : uniform(rng, 0.0, off_hi);
    return a;
}

inline Matrix random_nonnegative(Rng& rng, std::size_t n, double hi = 1.0) {
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a(i, j) = uniform(rng, 0.0, hi);
    return a;
}

/// Metzler matrix with c(A) <= gamma, i.e. positive as x^delta = A x on a
/// scale with that gamma. Roughly half of the draws are made diagonally
/// dominant (hence stable), the rest are left as they fall.
inline Matrix random_positive_matrix(Rng& rng, std::size_t n, double gamma, bool force_stable) {
    const double diag_cap = std::isinf(gamma) ? 3.0 : std::min(gamma, 3.0);
    Matrix a = random_metzler(rng, n, 0.6, -diag_cap, 0.0);
    if (force_stable) {
        // Strict row dominance pins the spectral abscissa below zero.
        for (std::size_t i = 0; i < n; ++i) {
            double off = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i)
                    off += a(i, j);
            a(i, i) = -(off + uniform(rng, 0.05, 0.5));
        }
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            c = std::max(c, -a(i, i));
        if (std::isfinite(gamma) && c > gamma) {
            const double s = gamma / c * 0.999;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    a(i, j) *= s;
        }
    }
    return a;
}

inline Vector random_nonneg_vector(Rng& rng, std::size_t n, double hi = 1.0) {
    Vector v(n);
    for (double& x : v)
        x = uniform(rng, 0.0, hi);
    return v;
}

/// Nonnegative single-input vector with a random zero pattern, never all zero.
inline Vector random_input_vector(Rng& rng, std::size_t n) {
    Vector b(n, 0.0);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (uniform(rng, 0.0, 1.0) < 0.6) {
            b[i] = uniform(rng, 0.1, 1.0);
            any = true;
        }
    }
    if (!any)
        b[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(n) - 1))] =
            uniform(rng, 0.1, 1.0);
    return b;
}

// ---------------------------------------------------------------------------
// time scales
// ---------------------------------------------------------------------------

inline TimeScale continuous_scale(double t0, double t1) {
    return tslin::make_timescale(tslin::ContinuousSpec{t0, t1});
}

inline TimeScale uniform_scale(double h, double t0, double t1) {
    return tslin::make_timescale(tslin::UniformGridSpec{h, t0, t1});
}

/// Mixed pattern of points and intervals repeated forever.
inline TimeScale mixed_scale(Rng& rng) {
    tslin::ExplicitAtomsSpec spec;
    double cursor = 0.0;
    const int atoms = uniform_int(rng, 1, 3);
    for (int i = 0; i < atoms; ++i) {
        if (uniform(rng, 0.0, 1.0) < 0.5) {
            spec.atoms.push_back(tslin::TimeScaleAtom::point(cursor));
        } else {
            const double len = uniform(rng, 0.2, 0.8);
            spec.atoms.push_back(tslin::TimeScaleAtom::interval(cursor, cursor + len));
            cursor += len;
        }
        cursor += uniform(rng, 0.2, 1.0);
    }
    const double span = spec.atoms.back().b - spec.atoms.front().a;
    spec.extension = tslin::PeriodicExtension{span + uniform(rng, 0.3, 1.0), std::nullopt};
    return tslin::make_timescale(spec);
}

/// Draws one of: continuous, a uniform grid, or a mixed periodic pattern.
inline TimeScale random_scale(Rng& rng) {
    switch (uniform_int(rng, 0, 2)) {
    case 0:
        return continuous_scale(0.0, uniform(rng, 20.0, 50.0));
    case 1: {
        const double h = std::vector<double>{0.25, 0.5, 1.0}[static_cast<std::size_t>(
            uniform_int(rng, 0, 2))];
        return uniform_scale(h, 0.0, uniform(rng, 30.0, 80.0));
    }
    default:
        return mixed_scale(rng);
    }
}

// ---------------------------------------------------------------------------
// oracles
// ---------------------------------------------------------------------------

/// Greedy multiset matching distance between two spectra.
inline double spectra_distance(Spectrum a, Spectrum b) {
    if (a.size() != b.size())
        return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (const Complex& z : a) {
        std::size_t best = 0;
        double dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < b.size(); ++i) {
            const double d = std::abs(z - b[i]);
            if (d < dist) {
                dist = d;
                best = i;
            }
        }
        worst = std::max(worst, dist);
        b.erase(b.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return worst;
}

/// Expands prod (x - r_i) over the complex roots; returns real parts.
inline Vector poly_from_roots(const Spectrum& roots) {
    std::vector<Complex> c{1.0};
    for (const Complex& r : roots) {
        std::vector<Complex> next(c.size() + 1, Complex(0.0, 0.0));
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i + 1] += c[i];
            next[i] -= c[i] * r;
        }
        c = std::move(next);
    }
    Vector real(c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        real[i] = c[i].real();
    return real;
}

/// Roots of x^2 + p x + q by the numerically stable quadratic formula.
inline Spectrum quadratic_roots(double p, double q) {
    const double disc = p * p - 4.0 * q;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        const double t = -0.5 * (p + (p >= 0.0 ? s : -s));
        return {Complex(t, 0.0), Complex(t != 0.0 ? q / t : 0.0, 0.0)};
    }
    const double im = 0.5 * std::sqrt(-disc);
    return {Complex(-0.5 * p, im), Complex(-0.5 * p, -im)};
}

/// All isolated points of the scale within [t0, t1], in order.
inline std::vector<double> grid_points(const TimeScale& ts, double t0, double t1) {
    std::vector<double> pts;
    for (const tslin::TimeScaleAtom& at : ts.atoms_in_range(t0, t1))
        if (at.is_point())
            pts.push_back(at.a);
    return pts;
}

/// Independent step recursion x_{i+1} = (I + mu_i A) x_i + mu_i B u(t_i) on a
/// purely discrete scale.
inline std::vector<Vector> brute_force_discrete(const Matrix& a, const Matrix& b,
                                                const std::vector<double>& points,
                                                const Vector& x0,
                                                const tslin::InputSignal& u) {
    std::vector<Vector> states{x0};
    Vector x = x0;
    const std::size_t n = x0.size();
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const double mu = points[i + 1] - points[i];
        const Vector ax = a * x;
        Vector next(n);
        Vector bu(n, 0.0);
        if (!b.empty()) {
            const Vector uc = u(points[i]);
            if (!uc.empty())
                bu = b * uc;
        }
        for (std::size_t r = 0; r < n; ++r)
            next[r] = x[r] + mu * (ax[r] + bu[r]);
        x = std::move(next);
        states.push_back(x);
    }
    return states;
}

/// For a false positivity certificate, follows the first violating entry and
/// checks that a basis initial state / basis control pulse really produces a
/// strictly negative component. Returns the most negative component seen.
inline double construct_violation(const Matrix& a, const Matrix& b, const TimeScale& ts,
                                  const tslin::PositivityReport& report) {
    using tslin::ViolatingEntry;
    const std::size_t n = a.rows();
    double worst = 0.0;

    // The largest scattered gap within the first stretch of the scale, if any.
    const double t0 = ts.min_time();
    const double sup = ts.sup_time();
    const double window_end =
        std::isfinite(sup) ? sup
                           : t0 + 2.0 * (ts.extension() ? ts.extension()->period : 1.0);
    const auto atoms = ts.atoms_in_range(t0, ts.floor_time(window_end));
    double max_gap = 0.0;
    double max_gap_at = t0;
    for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
        const double gap = atoms[i + 1].a - atoms[i].b;
        if (gap > max_gap) {
            max_gap = gap;
            max_gap_at = atoms[i].b;
        }
    }

    for (const ViolatingEntry& v : report.violating_entries) {
        Vector x0(n, 0.0);
        tslin::InputSignal u = tslin::zero_input(b.cols());
        double start = t0;
        if (v.kind == ViolatingEntry::Kind::Input) {
            Vector pulse(b.cols(), 0.0);
            pulse[v.j] = 1.0;
            u = tslin::constant_input(pulse);
        } else {
            x0[v.j] = 1.0;
            if (v.kind == ViolatingEntry::Kind::Diagonal && max_gap > 0.0)
                start = max_gap_at;
        }
        const double horizon = ts.floor_time(std::min(start + 1.0 + max_gap, window_end));
        if (horizon <= start)
            continue;
        const tslin::Trajectory traj = tslin::simulate(a, b, ts, x0, u, start, horizon);
        worst = std::min(worst, traj.min_component());
    }
    return worst;
}

} // namespace testutil
