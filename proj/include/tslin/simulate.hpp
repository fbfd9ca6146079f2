#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "tslin/errors.hpp"
#include "tslin/linalg.hpp"
#include "tslin/matrix.hpp"
#include "tslin/timescale.hpp"

namespace tslin {

/// One move along a time scale: a scattered jump of width mu at time t, or a
/// dense flow of the given length starting at t.
struct PathStep {
    bool scattered = false;
    double t = 0.0;
    double dt = 0.0;
};

/// Ordered steps from t0 to t1 through the scale structure.
inline std::vector<PathStep> scale_path(const TimeScale& ts, double t0, double t1) {
    if (!(t1 >= t0))
        throw DomainError("scale_path: t1 must not precede t0");
    if (!ts.contains(t0) || !ts.contains(t1))
        throw DomainError("scale_path: endpoints must belong to the stored horizon");
    std::vector<PathStep> steps;
    const std::vector<TimeScaleAtom> atoms = ts.atoms_in_range(t0, t1);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const TimeScaleAtom& at = atoms[i];
        if (!at.is_point() && at.length() > 0.0)
            steps.push_back({false, at.a, at.length()});
        if (i + 1 < atoms.size()) {
            const double gap = atoms[i + 1].a - at.b;
            if (gap > 0.0)
                steps.push_back({true, at.b, gap});
        }
    }
    return steps;
}

/// Transition matrix of x^delta = A x from t0 to t: an ordered product of
/// (I + mu*A) factors at scattered points and exp(A*l) over dense runs.
inline Matrix transition_matrix(const Matrix& a, const TimeScale& ts, double t0, double t) {
    if (!a.is_square())
        throw DomainError("transition_matrix: matrix not square");
    Matrix x = Matrix::identity(a.rows());
    for (const PathStep& step : scale_path(ts, t0, t)) {
        if (step.scattered) {
            Matrix factor = a * step.dt;
            for (std::size_t i = 0; i < a.rows(); ++i)
                factor(i, i) += 1.0;
            x = factor * x;
        } else {
            x = expm(a, step.dt) * x;
        }
    }
    return x;
}

/// Input signal evaluated at cell starts and held constant across the cell.
using InputSignal = std::function<Vector(double)>;

inline InputSignal constant_input(Vector u) {
    return [u = std::move(u)](double) { return u; };
}

inline InputSignal zero_input(std::size_t m) { return constant_input(Vector(m, 0.0)); }

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<Vector> inputs; ///< aligned with times; the last entry is unused

    double min_component() const {
        double m = std::numeric_limits<double>::infinity();
        for (const Vector& x : states)
            for (double v : x)
                m = std::min(m, v);
        return m;
    }
};

struct SimulateOptions {
    /// Reporting (and input-refresh) cells per dense segment.
    int dense_subsamples = 32;
    /// Cap on reported samples in transition_norms; stepping stays exact.
    std::size_t max_norm_reports = 512;
};

namespace detail {

/// Exact affine step over a dense run with constant input: the augmented
/// matrix [[A, B*u], [0, 0]] exponentiated over the cell.
inline Vector dense_affine_step(const Matrix& a, const Vector& bu, const Vector& x, double len) {
    const std::size_t n = a.rows();
    Matrix aug(n + 1, n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            aug(i, j) = a(i, j);
        aug(i, n) = bu[i];
    }
    const Matrix e = expm(aug, len);
    Vector next(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = e(i, n);
        for (std::size_t j = 0; j < n; ++j)
            s += e(i, j) * x[j];
        next[i] = s;
    }
    return next;
}

} // namespace detail

/// Forward simulation of x^delta = A x + B u from x0 at t0 through t_end.
///
/// Scattered step: x <- x + mu*(A x + B u). Dense runs advance by the exact
/// affine step per reporting cell, with u refreshed at each cell start.
inline Trajectory simulate(const Matrix& a, const Matrix& b, const TimeScale& ts, const Vector& x0,
                           const InputSignal& u, double t0, double t_end,
                           const SimulateOptions& opts = {}) {
    const std::size_t n = a.rows();
    if (!a.is_square())
        throw DomainError("simulate: A not square");
    if (x0.size() != n)
        throw DomainError("simulate: x0 length must match A");
    if (!b.empty() && b.rows() != n)
        throw DomainError("simulate: B row count must match A");

    Trajectory traj;
    Vector x = x0;
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.inputs.push_back(u(t));
    };
    record(t0);

    for (const PathStep& step : scale_path(ts, t0, t_end)) {
        if (step.scattered) {
            const Vector& uc = traj.inputs.back();
            Vector rate = a * x;
            if (!b.empty() && !uc.empty()) {
                const Vector bu = b * uc;
                for (std::size_t i = 0; i < n; ++i)
                    rate[i] += bu[i];
            }
            for (std::size_t i = 0; i < n; ++i)
                x[i] += step.dt * rate[i];
            record(step.t + step.dt);
        } else {
            const int cells = std::max(1, opts.dense_subsamples);
            for (int c = 0; c < cells; ++c) {
                const double cell_len = step.dt / cells;
                const Vector uc = traj.inputs.back();
                Vector bu(n, 0.0);
                if (!b.empty() && !uc.empty())
                    bu = b * uc;
                x = detail::dense_affine_step(a, bu, x, cell_len);
                record(step.t + cell_len * (c + 1));
            }
        }
    }
    return traj;
}

/// Closed-loop convenience: simulates x^delta = (A + b K) x and records u = K x.
inline Trajectory simulate_feedback(const Matrix& a, const Matrix& b, const Vector& k,
                                    const TimeScale& ts, const Vector& x0, double t0, double t_end,
                                    const SimulateOptions& opts = {}) {
    if (b.cols() != 1 || b.rows() != a.rows())
        throw DomainError("simulate_feedback: b must be a single column matching A");
    if (k.size() != a.rows())
        throw DomainError("simulate_feedback: gain length must match A");
    Matrix acl = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            acl(i, j) += b(i, 0) * k[j];

    Trajectory traj = simulate(acl, Matrix(), ts, x0, zero_input(0), t0, t_end, opts);
    traj.inputs.clear();
    traj.inputs.reserve(traj.times.size());
    for (const Vector& x : traj.states)
        traj.inputs.push_back(Vector{dot(k, x)});
    return traj;
}

/// Exponential envelope fitted to a decaying (or growing) norm sequence.
struct DecayFit {
    double k_hat = 1.0;     ///< envelope constant, at least 1
    double alpha_hat = 0.0; ///< fitted decay rate; negative when the norm grows
    double residual = 0.0;  ///< max log slack of the envelope; <= 0 when the bound holds
};

/// Least-squares fit of log(norm) against time; k_hat is then inflated so the
/// envelope k_hat * exp(-alpha_hat (t - t0)) * norm0 covers every sample.
inline DecayFit decay_fit(const std::vector<double>& times, const std::vector<double>& norms) {
    if (times.size() != norms.size())
        throw DomainError("decay_fit: times and norms differ in length");
    std::size_t count = norms.size();
    while (count > 0 && norms[count - 1] <= 0.0)
        --count;
    for (std::size_t i = 0; i < count; ++i)
        if (norms[i] <= 0.0)
            throw DataError("decay_fit: vanishing norm before the zero tail");
    if (count < 3)
        throw DataError("decay_fit: needs at least 3 samples with positive norm");

    const double t0 = times[0];
    const double n0 = norms[0];
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double x = times[i] - t0;
        const double y = std::log(norms[i] / n0);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(count);
    const double denom = m * sxx - sx * sx;
    const double slope = denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;

    DecayFit fit;
    fit.alpha_hat = -slope;
    double k = 1.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double x = times[i] - t0;
        k = std::max(k, norms[i] / n0 * std::exp(fit.alpha_hat * x));
    }
    fit.k_hat = k;
    double slack = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < count; ++i) {
        const double x = times[i] - t0;
        slack = std::max(slack, std::log(norms[i] / n0) - (std::log(fit.k_hat) - fit.alpha_hat * x));
    }
    fit.residual = slack;
    return fit;
}

inline DecayFit decay_fit(const Trajectory& traj) {
    std::vector<double> norms;
    norms.reserve(traj.states.size());
    for (const Vector& x : traj.states)
        norms.push_back(norm2(x));
    return decay_fit(traj.times, norms);
}

/// Spectral norm of the transition matrix along the scale, as (times, norms).
/// Steps and reporting use the same path, so the product is exact per cell;
/// norms are sampled at a stride when the path is longer than the report cap.
inline void transition_norms(const Matrix& a, const TimeScale& ts, double t0, double t_end,
                             std::vector<double>& times, std::vector<double>& norms,
                             const SimulateOptions& opts = {}) {
    const std::vector<PathStep> path = scale_path(ts, t0, t_end);
    const int cells = std::max(1, opts.dense_subsamples);
    std::size_t total = 0;
    for (const PathStep& step : path)
        total += step.scattered ? 1 : static_cast<std::size_t>(cells);
    const std::size_t stride =
        std::max<std::size_t>(1, total / std::max<std::size_t>(1, opts.max_norm_reports));

    Matrix x = Matrix::identity(a.rows());
    times.clear();
    norms.clear();
    times.push_back(t0);
    norms.push_back(spectral_norm(x));

    std::size_t tick = 0;
    auto report = [&](double t) {
        ++tick;
        if (tick % stride == 0 || tick == total) {
            times.push_back(t);
            norms.push_back(spectral_norm(x));
        }
    };
    for (const PathStep& step : path) {
        if (step.scattered) {
            Matrix factor = a * step.dt;
            for (std::size_t i = 0; i < a.rows(); ++i)
                factor(i, i) += 1.0;
            x = factor * x;
            report(step.t + step.dt);
        } else {
            const Matrix cell = expm(a, step.dt / cells);
            for (int c = 0; c < cells; ++c) {
                x = cell * x;
                report(step.t + step.dt / cells * (c + 1));
            }
        }
    }
}

} // namespace tslin
