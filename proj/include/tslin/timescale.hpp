#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

#include "tslin/errors.hpp"

namespace tslin {

inline constexpr double kTimeInfinity = std::numeric_limits<double>::infinity();

/// Absolute tolerance for deciding membership at atom boundaries.
inline constexpr double kBoundaryTol = 1e-12;

/// One building block of a time scale: an isolated point (a == b) or a closed
/// dense interval [a, b] with a < b.
struct TimeScaleAtom {
    double a = 0.0;
    double b = 0.0;

    static TimeScaleAtom point(double t) { return {t, t}; }
    static TimeScaleAtom interval(double a, double b) { return {a, b}; }

    bool is_point() const { return a == b; }
    double length() const { return b - a; }
};

/// Repeats the atom pattern every `period`. `repetitions` empty means the
/// pattern repeats forever (the scale is unbounded above).
struct PeriodicExtension {
    double period = 0.0;
    std::optional<long> repetitions; ///< total number of copies, including the base
};

struct ContinuousSpec {
    double t0 = 0.0;
    double t1 = 0.0;
};

struct UniformGridSpec {
    double h = 0.0;
    double t0 = 0.0;
    double t1 = 0.0;
};

struct ExplicitAtomsSpec {
    std::vector<TimeScaleAtom> atoms;
    std::optional<PeriodicExtension> extension;
};

/// Points t0 * q^k for q > 1, up to the horizon. The gaps grow without bound,
/// so the graininess supremum of the extended pattern is infinite.
struct GeometricSpec {
    double q = 2.0;
    double t0 = 1.0;
    double t1 = 1.0;
};

using TimeScaleSpec = std::variant<ContinuousSpec, UniformGridSpec, ExplicitAtomsSpec, GeometricSpec>;

struct JumpData {
    double sigma = 0.0; ///< forward jump
    double rho = 0.0;   ///< backward jump
    double mu = 0.0;    ///< forward graininess sigma - t
    double nu = 0.0;    ///< backward graininess t - rho
};

/// Finite-horizon model of a time scale with an optional periodic extension.
///
/// The atom pattern carries the structure; analysis quantities (graininess
/// supremum mu_bar and gamma = 1/mu_bar) account for the extension, while
/// path queries unroll copies on demand. Immutable after construction.
class TimeScale {
public:
    const std::vector<TimeScaleAtom>& atoms() const { return atoms_; }
    const std::optional<PeriodicExtension>& extension() const { return ext_; }

    /// Supremum of the forward graininess over the (extended) scale.
    double mu_bar() const { return mu_bar_; }

    /// gamma = 1/mu_bar with 1/0 = +inf and 1/inf = 0.
    double gamma() const { return gamma_; }

    double min_time() const { return atoms_.front().a; }

    /// Supremum of the scale; +inf for unbounded periodic extensions.
    double sup_time() const {
        if (!ext_)
            return atoms_.back().b;
        if (!ext_->repetitions)
            return kTimeInfinity;
        return atoms_.back().b + (*ext_->repetitions - 1) * ext_->period;
    }

    bool bounded_graininess() const { return std::isfinite(mu_bar_); }

    /// Every point isolated with the same gap; the scalar stability region is
    /// then exactly the disc.
    bool is_uniform_discrete() const { return uniform_discrete_; }

    /// No isolated points at all (mu identically zero).
    bool is_continuous() const { return mu_bar_ == 0.0; }

    double uniform_step() const { return uniform_step_; }

    bool contains(double t) const {
        long copy = 0;
        std::size_t idx = 0;
        double canonical = 0.0;
        return locate(t, copy, idx, canonical);
    }

    /// Forward/backward jumps and graininess at a member time t.
    JumpData jump_data(double t) const {
        long copy = 0;
        std::size_t idx = 0;
        double canonical = 0.0;
        if (!locate(t, copy, idx, canonical))
            throw DomainError("jump_data: time does not belong to the time scale");

        const double shift = copy * period_or_zero();
        const TimeScaleAtom& at = atoms_[idx];
        JumpData jd;

        const bool at_left = canonical == at.a + shift;
        const bool at_right = canonical == at.b + shift;

        // forward jump
        if (!at.is_point() && !at_right) {
            jd.sigma = canonical; // right-dense inside the interval
        } else {
            const double next = next_start(copy, idx);
            jd.sigma = std::isfinite(next) ? next : canonical;
        }
        // backward jump
        if (!at.is_point() && !at_left) {
            jd.rho = canonical; // left-dense inside the interval
        } else {
            const double prev = prev_end(copy, idx);
            jd.rho = std::isfinite(prev) ? prev : canonical;
        }
        jd.mu = jd.sigma - canonical;
        jd.nu = canonical - jd.rho;
        return jd;
    }

    /// Unrolled atoms intersecting [lo, hi], clipped to the range, in order.
    std::vector<TimeScaleAtom> atoms_in_range(double lo, double hi) const {
        std::vector<TimeScaleAtom> out;
        if (hi < lo)
            return out;
        const double p = period_or_zero();
        long c_lo = 0, c_hi = 0;
        if (ext_) {
            c_lo = std::max(0L, static_cast<long>(std::floor((lo - min_time()) / p)) - 1);
            c_hi = static_cast<long>(std::floor((hi - min_time()) / p)) + 1;
            if (ext_->repetitions)
                c_hi = std::min(c_hi, *ext_->repetitions - 1);
        }
        for (long c = c_lo; c <= c_hi; ++c) {
            const double shift = c * p;
            for (const TimeScaleAtom& at : atoms_) {
                double a = at.a + shift;
                double b = at.b + shift;
                if (b < lo - kBoundaryTol)
                    continue;
                if (a > hi + kBoundaryTol)
                    break;
                a = std::max(a, lo);
                b = std::min(b, hi);
                if (std::abs(a - lo) <= kBoundaryTol)
                    a = lo;
                if (std::abs(b - hi) <= kBoundaryTol)
                    b = hi;
                if (a > b)
                    a = b;
                out.push_back({a, b});
            }
        }
        return out;
    }

    /// Largest scale point <= t. Requires t at or above the scale minimum.
    double floor_time(double t) const {
        if (t < min_time() - kBoundaryTol)
            throw DomainError("floor_time: below the time scale minimum");
        const double sup = sup_time();
        if (t >= sup)
            return sup;
        const double p = period_or_zero();
        long c = 0;
        if (ext_) {
            c = static_cast<long>(std::floor((t - min_time()) / p));
            if (ext_->repetitions)
                c = std::min(c, *ext_->repetitions - 1);
            c = std::max(c, 0L);
        }
        const double shift = c * p;
        double best = min_time();
        for (const TimeScaleAtom& at : atoms_) {
            const double a = at.a + shift, b = at.b + shift;
            if (a > t + kBoundaryTol)
                break;
            best = std::min(std::max(t, a), b);
        }
        // t may fall in the wrap gap before this copy's first atom
        if (t < atoms_.front().a + shift - kBoundaryTol && c > 0)
            best = atoms_.back().b + (c - 1) * p;
        return best;
    }

    friend TimeScale make_timescale(const TimeScaleSpec& spec);

private:
    double period_or_zero() const { return ext_ ? ext_->period : 0.0; }

    bool copy_allowed(long c) const {
        if (c < 0)
            return false;
        if (c == 0)
            return true;
        if (!ext_)
            return false;
        return !ext_->repetitions || c < *ext_->repetitions;
    }

    /// Start of the atom following atoms_[idx] in copy `copy`, or +inf at the scale supremum.
    double next_start(long copy, std::size_t idx) const {
        if (idx + 1 < atoms_.size())
            return atoms_[idx + 1].a + copy * period_or_zero();
        if (copy_allowed(copy + 1))
            return atoms_.front().a + (copy + 1) * period_or_zero();
        return kTimeInfinity;
    }

    /// End of the atom preceding atoms_[idx] in copy `copy`, or -inf at the scale minimum.
    double prev_end(long copy, std::size_t idx) const {
        if (idx > 0)
            return atoms_[idx - 1].b + copy * period_or_zero();
        if (copy > 0)
            return atoms_.back().b + (copy - 1) * period_or_zero();
        return -kTimeInfinity;
    }

    /// Finds the copy/atom containing t and snaps t to the exact boundary value
    /// when it is within tolerance.
    bool locate(double t, long& copy, std::size_t& idx, double& canonical) const {
        const double p = period_or_zero();
        long c_mid = 0;
        if (ext_)
            c_mid = static_cast<long>(std::floor((t - min_time()) / p));
        for (long c : {c_mid - 1, c_mid, c_mid + 1}) {
            if (!copy_allowed(c))
                continue;
            const double shift = c * p;
            for (std::size_t i = 0; i < atoms_.size(); ++i) {
                const double a = atoms_[i].a + shift;
                const double b = atoms_[i].b + shift;
                if (t < a - kBoundaryTol)
                    break;
                if (t > b + kBoundaryTol)
                    continue;
                copy = c;
                idx = i;
                canonical = std::clamp(t, a, b);
                if (std::abs(t - a) <= kBoundaryTol)
                    canonical = a;
                else if (std::abs(t - b) <= kBoundaryTol)
                    canonical = b;
                return true;
            }
            if (!ext_)
                break;
        }
        return false;
    }

    std::vector<TimeScaleAtom> atoms_;
    std::optional<PeriodicExtension> ext_;
    double mu_bar_ = 0.0;
    double gamma_ = kTimeInfinity;
    bool uniform_discrete_ = false;
    double uniform_step_ = 0.0;
};

namespace detail {

inline void validate_atoms(const std::vector<TimeScaleAtom>& atoms) {
    if (atoms.empty())
        throw ValidationError("time scale needs at least one atom");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (!(atoms[i].a <= atoms[i].b))
            throw ValidationError("atom with negative length");
        if (!std::isfinite(atoms[i].a) || !std::isfinite(atoms[i].b))
            throw ValidationError("atom bounds must be finite");
        if (i > 0 && !(atoms[i].a > atoms[i - 1].b))
            throw ValidationError("atoms must be strictly ordered and disjoint");
    }
}

inline double max_internal_gap(const std::vector<TimeScaleAtom>& atoms) {
    double g = 0.0;
    for (std::size_t i = 1; i < atoms.size(); ++i)
        g = std::max(g, atoms[i].a - atoms[i - 1].b);
    return g;
}

} // namespace detail

/// Builds a validated TimeScale with mu_bar and gamma computed.
inline TimeScale make_timescale(const TimeScaleSpec& spec) {
    TimeScale ts;
    if (const auto* c = std::get_if<ContinuousSpec>(&spec)) {
        if (!(c->t0 < c->t1))
            throw ValidationError("continuous scale needs t0 < t1");
        ts.atoms_ = {TimeScaleAtom::interval(c->t0, c->t1)};
        ts.mu_bar_ = 0.0;
        ts.gamma_ = kTimeInfinity;
        return ts;
    }
    if (const auto* u = std::get_if<UniformGridSpec>(&spec)) {
        if (!(u->h > 0.0))
            throw ValidationError("uniform grid needs h > 0");
        if (!(u->t1 >= u->t0))
            throw ValidationError("uniform grid needs t1 >= t0");
        const long count = static_cast<long>(std::floor((u->t1 - u->t0) / u->h + 1e-9)) + 1;
        ts.atoms_.reserve(static_cast<std::size_t>(count));
        for (long i = 0; i < count; ++i)
            ts.atoms_.push_back(TimeScaleAtom::point(u->t0 + static_cast<double>(i) * u->h));
        // The grid models the homogeneous scale of step h; pin the graininess
        // supremum to h exactly rather than to rounded point differences.
        ts.mu_bar_ = u->h;
        ts.gamma_ = 1.0 / u->h;
        ts.uniform_discrete_ = true;
        ts.uniform_step_ = u->h;
        return ts;
    }
    if (const auto* e = std::get_if<ExplicitAtomsSpec>(&spec)) {
        detail::validate_atoms(e->atoms);
        ts.atoms_ = e->atoms;
        ts.ext_ = e->extension;
        double gap = detail::max_internal_gap(ts.atoms_);
        if (ts.ext_) {
            const double span = ts.atoms_.back().b - ts.atoms_.front().a;
            if (!(ts.ext_->period > span))
                throw ValidationError("periodic extension period must exceed the pattern span");
            if (ts.ext_->repetitions && *ts.ext_->repetitions < 1)
                throw ValidationError("periodic extension needs at least one repetition");
            gap = std::max(gap, ts.ext_->period - span);
        }
        ts.mu_bar_ = gap;
        ts.gamma_ = gap == 0.0 ? kTimeInfinity : 1.0 / gap;

        // Detect a homogeneous all-points pattern.
        bool uniform = ts.atoms_.size() >= 2 || (ts.ext_ && ts.atoms_.size() == 1);
        for (const TimeScaleAtom& at : ts.atoms_)
            uniform = uniform && at.is_point();
        if (uniform) {
            double h = ts.atoms_.size() >= 2 ? ts.atoms_[1].a - ts.atoms_[0].a : ts.ext_->period;
            for (std::size_t i = 1; i < ts.atoms_.size() && uniform; ++i)
                uniform = std::abs((ts.atoms_[i].a - ts.atoms_[i - 1].a) - h) <= 1e-12 * std::max(1.0, h);
            if (ts.ext_) {
                const double wrap = ts.ext_->period - (ts.atoms_.back().b - ts.atoms_.front().a);
                uniform = uniform && std::abs(wrap - h) <= 1e-12 * std::max(1.0, h);
            }
            if (uniform) {
                ts.uniform_discrete_ = true;
                ts.uniform_step_ = h;
            }
        }
        return ts;
    }
    const auto& g = std::get<GeometricSpec>(spec);
    if (!(g.q > 1.0))
        throw ValidationError("geometric scale needs q > 1");
    if (!(g.t0 > 0.0) || !(g.t1 >= g.t0))
        throw ValidationError("geometric scale needs 0 < t0 <= t1");
    double t = g.t0;
    while (t <= g.t1 * (1.0 + 1e-12)) {
        ts.atoms_.push_back(TimeScaleAtom::point(t));
        t *= g.q;
    }
    // The extended pattern has unbounded gaps; flag it so stability-side
    // operations can reject it.
    ts.mu_bar_ = kTimeInfinity;
    ts.gamma_ = 0.0;
    return ts;
}

/// Function values on a finite grid of member times. Carrier for the delta
/// derivative and delta integral.
struct SampledFunction {
    std::vector<double> grid;
    std::vector<double> values;

    static constexpr double kSampleTol = 1e-9;

    /// Index of the sample at time t, or npos.
    std::size_t find(double t) const {
        auto it = std::lower_bound(grid.begin(), grid.end(), t - kSampleTol);
        if (it == grid.end() || std::abs(*it - t) > kSampleTol)
            return npos;
        return static_cast<std::size_t>(it - grid.begin());
    }

    /// Index of the first sample strictly after t, or npos.
    std::size_t find_after(double t) const {
        auto it = std::upper_bound(grid.begin(), grid.end(), t + kSampleTol);
        if (it == grid.end())
            return npos;
        return static_cast<std::size_t>(it - grid.begin());
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Samples fn on [a, b]: every isolated point plus dense segments subdivided at
/// the given resolution (fraction of the segment length).
inline SampledFunction sample_on(const TimeScale& ts, const std::function<double(double)>& fn,
                                 double a, double b, double dense_resolution = 1e-3) {
    if (!(dense_resolution > 0.0))
        throw DomainError("sample_on: resolution must be positive");
    SampledFunction f;
    for (const TimeScaleAtom& at : ts.atoms_in_range(a, b)) {
        if (at.is_point()) {
            f.grid.push_back(at.a);
        } else {
            const long m = std::max(1L, static_cast<long>(std::llround(1.0 / dense_resolution)));
            for (long j = 0; j <= m; ++j)
                f.grid.push_back(at.a + (at.b - at.a) * static_cast<double>(j) / static_cast<double>(m));
        }
    }
    f.grid.erase(std::unique(f.grid.begin(), f.grid.end(),
                             [](double x, double y) { return std::abs(x - y) <= kBoundaryTol; }),
                 f.grid.end());
    f.values.reserve(f.grid.size());
    for (double t : f.grid)
        f.values.push_back(fn(t));
    return f;
}

/// Delta derivative of a sampled function at a member time t.
///
/// Right-scattered t: exact forward difference (f(sigma) - f(t)) / mu.
/// Right-dense t: one-sided quotient against the nearest right sample, an
/// O(sample step) approximation of the limit.
inline double delta_derivative(const SampledFunction& f, const TimeScale& ts, double t) {
    const JumpData jd = ts.jump_data(t);
    const std::size_t it = f.find(t);
    if (it == SampledFunction::npos)
        throw DataError("delta_derivative: t is not sampled");

    if (jd.mu > 0.0) {
        const std::size_t is = f.find(jd.sigma);
        if (is == SampledFunction::npos)
            throw DataError("delta_derivative: sigma(t) is not sampled");
        return (f.values[is] - f.values[it]) / jd.mu;
    }

    // Right-dense. The left-scattered maximum is outside the differentiable set.
    if (t >= ts.sup_time() - kBoundaryTol && jd.nu > 0.0)
        throw DomainError("delta_derivative: t is the left-scattered maximum");
    const std::size_t is = f.find_after(t);
    if (is == SampledFunction::npos)
        throw DataError("delta_derivative: no sample to the right of a right-dense point");
    const double s = f.grid[is];
    if (!ts.contains(0.5 * (t + s)))
        throw DataError("delta_derivative: right sample lies across a gap");
    return (f.values[is] - f.values[it]) / (s - t);
}

/// Delta integral of f over [a, b): exact sum f(t)*mu(t) at scattered points
/// plus trapezoidal quadrature over dense stretches.
inline double delta_integral(const SampledFunction& f, const TimeScale& ts, double a, double b) {
    if (a > b)
        throw DomainError("delta_integral: a > b");
    if (!ts.contains(a) || !ts.contains(b))
        throw DomainError("delta_integral: bounds must belong to the time scale");
    if (a == b)
        return 0.0;

    const std::vector<TimeScaleAtom> atoms = ts.atoms_in_range(a, b);
    double total = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const TimeScaleAtom& at = atoms[i];
        if (!at.is_point()) {
            std::size_t lo = f.find(at.a);
            std::size_t hi = f.find(at.b);
            if (lo == SampledFunction::npos || hi == SampledFunction::npos || hi < lo)
                throw DataError("delta_integral: dense segment endpoints are not sampled");
            for (std::size_t k = lo; k < hi; ++k)
                total += 0.5 * (f.values[k] + f.values[k + 1]) * (f.grid[k + 1] - f.grid[k]);
        }
        if (i + 1 < atoms.size()) {
            const double gap = atoms[i + 1].a - at.b;
            if (gap > 0.0) {
                const std::size_t ie = f.find(at.b);
                if (ie == SampledFunction::npos)
                    throw DataError("delta_integral: scattered point is not sampled");
                total += f.values[ie] * gap;
            }
        }
    }
    return total;
}

} // namespace tslin
