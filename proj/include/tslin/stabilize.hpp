#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tslin/errors.hpp"
#include "tslin/linalg.hpp"
#include "tslin/lp.hpp"
#include "tslin/matrix.hpp"
#include "tslin/positivity.hpp"
#include "tslin/simulate.hpp"
#include "tslin/stability.hpp"
#include "tslin/timescale.hpp"

namespace tslin {

inline constexpr double kNegInfinity = -std::numeric_limits<double>::infinity();

/// Outcome of the eigenvalue-wise rank test for stabilizability.
struct PbhResult {
    bool ok = false;
    Spectrum failing; ///< eigenvalues outside the region where the rank drops
    /// On mixed scales the disc under-approximates the stable region, so a
    /// failure here may reject systems a sharper region test would accept.
    bool conservative = false;
};

/// rank [lambda I - A, B] = n for every eigenvalue lambda outside the
/// certified stable region of the scale.
inline PbhResult pbh_stabilizable(const Matrix& a, const Matrix& b, const TimeScale& ts,
                                  double rank_tol = 1e-9) {
    if (!ts.bounded_graininess())
        throw PreconditionError("pbh_stabilizable: requires bounded graininess (mu_bar < +inf)");
    if (!a.is_square() || b.rows() != a.rows())
        throw DomainError("pbh_stabilizable: dimension mismatch");

    const std::size_t n = a.rows();
    const double gamma = ts.gamma();
    PbhResult res;
    res.conservative = !(std::isinf(gamma) || ts.is_uniform_discrete());
    res.ok = true;

    for (const Complex& lambda : spectrum(a)) {
        if (disc_membership(lambda, gamma).first)
            continue;
        Matrix re(n, n + b.cols());
        Matrix im(n, n + b.cols());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                re(i, j) = (i == j ? lambda.real() : 0.0) - a(i, j);
                im(i, j) = (i == j ? lambda.imag() : 0.0);
            }
            for (std::size_t j = 0; j < b.cols(); ++j)
                re(i, n + j) = b(i, j);
        }
        if (complex_matrix_rank(re, im, rank_tol) != n) {
            res.ok = false;
            res.failing.push_back(lambda);
        }
    }
    return res;
}

/// Order in which standard basis vectors complete the controllable basis.
enum class CompletionOrder { Forward, Reverse };

/// Controllability decomposition of a single-input pair (A, b): the similarity
/// T = (v_1 ... v_n) puts A into a companion controllable block over an
/// uncontrollable tail block A22, with T^{-1} b the k-th unit vector.
struct Decomposition {
    std::size_t k = 0;         ///< rank of the controllability matrix
    Vector a;                  ///< recurrence coefficients a_1..a_k of A^k b
    std::vector<Vector> basis; ///< v_1..v_n; v_k equals b
    Matrix t;
    Matrix t_inverse;
    Matrix a_tilde;
    Matrix b_tilde;
    Matrix a22;           ///< (n-k) x (n-k); empty when k = n
    double pattern_error; ///< worst deviation from the companion/zero pattern
};

namespace detail {

using LdVector = std::vector<long double>;
using LdColumns = std::vector<LdVector>;

inline long double ld_dot(const LdVector& x, const LdVector& y) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += x[i] * y[i];
    return s;
}

inline long double ld_norm(const LdVector& x) { return std::sqrt(ld_dot(x, x)); }

/// Solves T X = rhs (columns) in extended precision by Gaussian elimination
/// with partial pivoting; T is given column-major and consumed.
inline LdColumns ld_solve(LdColumns t, LdColumns rhs) {
    const std::size_t n = t.size();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i)
        perm[i] = i;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        long double best = std::abs(t[col][perm[col]]);
        for (std::size_t i = col + 1; i < n; ++i) {
            const long double v = std::abs(t[col][perm[i]]);
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0L)
            throw NumericalError("control_decomposition: basis matrix is singular");
        std::swap(perm[col], perm[piv]);
        const long double pivot = t[col][perm[col]];
        for (std::size_t i = col + 1; i < n; ++i) {
            const long double f = t[col][perm[i]] / pivot;
            if (f == 0.0L)
                continue;
            t[col][perm[i]] = f;
            for (std::size_t j = col + 1; j < n; ++j)
                t[j][perm[i]] -= f * t[j][perm[col]];
            for (LdVector& r : rhs)
                r[perm[i]] -= f * r[perm[col]];
        }
    }
    LdColumns x(rhs.size(), LdVector(n, 0.0L));
    for (std::size_t c = 0; c < rhs.size(); ++c) {
        for (std::size_t i = n; i-- > 0;) {
            long double s = rhs[c][perm[i]];
            for (std::size_t j = i + 1; j < n; ++j)
                s -= t[j][perm[i]] * x[c][j];
            x[c][i] = s / t[i][perm[i]];
        }
    }
    return x;
}

} // namespace detail

inline Decomposition control_decomposition(const Matrix& a, const Vector& b,
                                           CompletionOrder order = CompletionOrder::Forward,
                                           double rank_tol = 1e-9) {
    if (!a.is_square())
        throw DomainError("control_decomposition: A not square");
    const std::size_t n = a.rows();
    if (b.size() != n)
        throw DomainError("control_decomposition: b length must match A");
    if (norm2(b) == 0.0)
        throw DomainError("control_decomposition: b must be nonzero");

    // The chain basis is as skewed as the Krylov matrix itself, so the
    // internals run in extended precision; only the results are rounded.
    std::vector<detail::LdVector> a_rows(n, detail::LdVector(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a_rows[i][j] = a(i, j);
    auto apply_a = [&](const detail::LdVector& x) {
        detail::LdVector y(n, 0.0L);
        for (std::size_t i = 0; i < n; ++i)
            y[i] = detail::ld_dot(a_rows[i], x);
        return y;
    };

    detail::LdColumns krylov(n + 1);
    krylov[0].assign(b.begin(), b.end());
    for (std::size_t j = 1; j <= n; ++j)
        krylov[j] = apply_a(krylov[j - 1]);

    long double scale = 0.0L;
    for (std::size_t j = 0; j < n; ++j)
        scale = std::max(scale, detail::ld_norm(krylov[j]));

    // Rank of [b, Ab, ...]: Gram-Schmidt with re-orthogonalization, keeping the
    // triangular factor; the first dependent column ends the controllable chain.
    detail::LdColumns ortho;
    detail::LdColumns r_factor; // r_factor[j][s] = <q_s, kry_j>, diagonal last
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
        detail::LdVector w = krylov[j];
        detail::LdVector coeffs(ortho.size(), 0.0L);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t s = 0; s < ortho.size(); ++s) {
                const long double c = detail::ld_dot(ortho[s], w);
                coeffs[s] += c;
                for (std::size_t i = 0; i < n; ++i)
                    w[i] -= c * ortho[s][i];
            }
        }
        const long double res = detail::ld_norm(w);
        if (res > static_cast<long double>(rank_tol) * 10.0L * scale) {
            coeffs.push_back(res);
            r_factor.push_back(std::move(coeffs));
            for (long double& x : w)
                x /= res;
            ortho.push_back(std::move(w));
            ++k;
            continue;
        }
        if (res > static_cast<long double>(rank_tol) * 0.1L * scale) {
            std::ostringstream os;
            os << "control_decomposition: controllability rank is ambiguous between " << k
               << " and " << k + 1 << " (residual " << static_cast<double>(res) << " vs scale "
               << static_cast<double>(scale) << ")";
            throw NumericalError(os.str());
        }
        break;
    }

    Decomposition dec;
    dec.k = k;

    // A^k b = -(a_1 b + ... + a_k A^{k-1} b): least squares through the
    // orthonormal basis, which keeps the recurrence residual at machine scale
    // however skewed the chain is.
    detail::LdVector proj(k, 0.0L);
    for (std::size_t s = 0; s < k; ++s)
        proj[s] = detail::ld_dot(ortho[s], krylov[k]);
    detail::LdVector chain(k, 0.0L);
    for (std::size_t i = k; i-- > 0;) {
        long double s = -proj[i];
        for (std::size_t j = i + 1; j < k; ++j)
            s -= r_factor[j][i] * chain[j];
        chain[i] = s / r_factor[i][i];
    }
    dec.a.assign(k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
        dec.a[i] = static_cast<double>(chain[i]);

    detail::LdVector reconstruction = krylov[k];
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t r = 0; r < n; ++r)
            reconstruction[r] += chain[i] * krylov[i][r];
    const long double target = detail::ld_norm(krylov[k]);
    if (target > 0.0L && detail::ld_norm(reconstruction) > 1e-8L * target)
        throw NumericalError("control_decomposition: recurrence residual above tolerance");

    // v_{k-i} = A^i b + a_k A^{i-1} b + ... + a_{k-i+1} b.
    detail::LdColumns basis_ld(n, detail::LdVector(n, 0.0L));
    for (std::size_t i = 0; i < k; ++i) {
        detail::LdVector v = krylov[i];
        for (std::size_t s = 1; s <= i; ++s)
            for (std::size_t r = 0; r < n; ++r)
                v[r] += chain[k - s] * krylov[i - s][r];
        basis_ld[k - i - 1] = std::move(v);
    }

    // Orthogonal completion from standard basis vectors, deterministic order.
    if (k < n) {
        detail::LdColumns accepted = ortho;
        std::size_t placed = k;
        for (std::size_t step = 0; step < n && placed < n; ++step) {
            const std::size_t idx = order == CompletionOrder::Forward ? step : n - 1 - step;
            detail::LdVector w(n, 0.0L);
            w[idx] = 1.0L;
            for (int pass = 0; pass < 2; ++pass) {
                for (const detail::LdVector& q : accepted) {
                    const long double c = detail::ld_dot(q, w);
                    for (std::size_t r = 0; r < n; ++r)
                        w[r] -= c * q[r];
                }
            }
            const long double res = detail::ld_norm(w);
            if (res <= 1e-6L)
                continue;
            for (long double& x : w)
                x /= res;
            basis_ld[placed++] = w;
            accepted.push_back(std::move(w));
        }
        if (placed < n)
            throw NumericalError("control_decomposition: failed to complete the basis");
    }

    dec.basis.assign(n, Vector(n, 0.0));
    dec.t = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            dec.basis[j][i] = static_cast<double>(basis_ld[j][i]);
            dec.t(i, j) = dec.basis[j][i];
        }
    }

    // T^{-1} [A T | b | I] in one extended-precision elimination.
    detail::LdColumns rhs;
    for (std::size_t j = 0; j < n; ++j)
        rhs.push_back(apply_a(basis_ld[j]));
    rhs.emplace_back(b.begin(), b.end());
    for (std::size_t j = 0; j < n; ++j) {
        detail::LdVector e(n, 0.0L);
        e[j] = 1.0L;
        rhs.push_back(std::move(e));
    }
    const detail::LdColumns solved = detail::ld_solve(basis_ld, std::move(rhs));

    dec.a_tilde = Matrix(n, n);
    dec.b_tilde = Matrix(n, 1);
    dec.t_inverse = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            dec.a_tilde(i, j) = static_cast<double>(solved[j][i]);
            dec.t_inverse(i, j) = static_cast<double>(solved[n + 1 + j][i]);
        }
        dec.b_tilde(i, 0) = static_cast<double>(solved[n][i]);
    }
    dec.a22 = k < n ? dec.a_tilde.block(k, k, n - k, n - k) : Matrix();

    double err = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            err = std::max(err, std::abs(dec.a_tilde(i, j) - (j == i + 1 ? 1.0 : 0.0)));
    for (std::size_t j = 0; j < k; ++j)
        err = std::max(err, std::abs(dec.a_tilde(k - 1, j) + dec.a[j]));
    for (std::size_t i = k; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j)
            err = std::max(err, std::abs(dec.a_tilde(i, j)));
    dec.pattern_error = err;
    return dec;
}

/// Lower bounds alpha_1..alpha_n on the gain entries; -inf means unbounded.
struct AlphaBounds {
    Vector alphas;
};

/// Per-entry positivity bounds for the closed loop: the largest of -a_ij/b_i
/// over i != j with b_i != 0, joined by (-a_jj - gamma)/b_j when gamma is
/// finite and b_j != 0. An empty candidate set gives -inf.
inline AlphaBounds alpha_bounds(const Matrix& a, const Vector& b, double gamma) {
    const std::size_t n = a.rows();
    if (!a.is_square() || b.size() != n)
        throw DomainError("alpha_bounds: dimension mismatch");
    if (!is_metzler(a) || !(metzler_offset(a) <= gamma))
        throw DomainError("alpha_bounds: system is not positive on the scale");
    for (double bi : b)
        if (bi < 0.0)
            throw DomainError("alpha_bounds: b must be nonnegative");

    AlphaBounds bounds;
    bounds.alphas.assign(n, kNegInfinity);
    for (std::size_t j = 0; j < n; ++j) {
        double best = kNegInfinity;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == j || b[i] == 0.0)
                continue;
            best = std::max(best, -a(i, j) / b[i]);
        }
        if (std::isfinite(gamma) && b[j] != 0.0)
            best = std::max(best, (-a(j, j) - gamma) / b[j]);
        bounds.alphas[j] = best;
    }
    return bounds;
}

/// The gain must satisfy K >= alpha entrywise and K.v_i < a_i for each
/// controllable-chain row.
struct InequalitySystem {
    Vector lower_bounds;
    std::vector<std::pair<Vector, double>> strict_rows; ///< (v_i, a_i)
};

inline InequalitySystem build_constraints(const Decomposition& dec, const AlphaBounds& alphas) {
    InequalitySystem sys;
    sys.lower_bounds = alphas.alphas;
    sys.strict_rows.reserve(dec.k);
    for (std::size_t i = 0; i < dec.k; ++i)
        sys.strict_rows.emplace_back(dec.basis[i], dec.a[i]);
    return sys;
}

struct FeasibilityResult {
    bool feasible = false;
    Vector gain;
};

/// Decides the margin-tightened system: strict rows become
/// K.v_i <= a_i - margin * max(1, |v_i|). Exact for the tightened system.
inline FeasibilityResult solve_feasibility(const InequalitySystem& ineqs, double margin) {
    if (!(margin > 0.0))
        throw DomainError("solve_feasibility: margin must be positive");
    const std::size_t n = ineqs.lower_bounds.size();

    if (ineqs.strict_rows.empty()) {
        FeasibilityResult res;
        res.feasible = true;
        res.gain.assign(n, 0.0);
        for (std::size_t j = 0; j < n; ++j)
            res.gain[j] = std::isfinite(ineqs.lower_bounds[j])
                              ? std::max(0.0, ineqs.lower_bounds[j])
                              : 0.0;
        return res;
    }

    LpProblem lp;
    lp.lower = ineqs.lower_bounds;
    for (const auto& [v, ai] : ineqs.strict_rows) {
        lp.rows.push_back(v);
        lp.rhs.push_back(ai - margin * std::max(1.0, norm2(v)));
    }
    auto sol = lp_solve(lp);
    FeasibilityResult res;
    if (sol) {
        res.feasible = true;
        res.gain = std::move(sol->first);
        for (std::size_t j = 0; j < n; ++j)
            if (std::isfinite(ineqs.lower_bounds[j]))
                res.gain[j] = std::max(res.gain[j], ineqs.lower_bounds[j]);
    }
    return res;
}

/// Evidence that a gain closes the loop correctly: positivity of A + bK on the
/// scale, strictly positive characteristic coefficients, the factorization of
/// the closed-loop polynomial through the decomposition, and a decay fit of
/// the simulated transition norm.
struct ClosedLoopReport {
    PositivityReport positivity;
    Vector chi_coefficients;
    bool coefficients_positive = false;
    double factorization_error = 0.0;
    bool factorization_ok = false;
    DecayFit decay;
    bool decay_ok = false;
    double fit_horizon = 0.0;

    bool passed() const {
        return positivity.verdict && coefficients_positive && factorization_ok && decay_ok;
    }
};

inline Matrix closed_loop_matrix(const Matrix& a, const Vector& b, const Vector& k) {
    Matrix acl = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            acl(i, j) += b[i] * k[j];
    return acl;
}

inline ClosedLoopReport verify_closed_loop(const Matrix& a, const Vector& b, const Vector& k,
                                           const TimeScale& ts) {
    const std::size_t n = a.rows();
    if (!a.is_square() || b.size() != n || k.size() != n)
        throw DomainError("verify_closed_loop: dimension mismatch");

    ClosedLoopReport rep;
    const Matrix acl = closed_loop_matrix(a, b, k);

    rep.positivity = check_positive_system(acl, Matrix(), ts);

    const Polynomial chi = char_poly(acl);
    rep.chi_coefficients = chi.coefficients();
    rep.coefficients_positive = true;
    for (std::size_t i = 0; i + 1 < rep.chi_coefficients.size(); ++i)
        rep.coefficients_positive = rep.coefficients_positive && rep.chi_coefficients[i] > 0.0;

    // chi_{A+bK} = (x^k + sum (a_i - K v_i) x^{i-1}) * chi_{A22}
    const Decomposition dec = control_decomposition(a, b);
    Vector factor(dec.k + 1, 0.0);
    factor[dec.k] = 1.0;
    for (std::size_t i = 0; i < dec.k; ++i)
        factor[i] = dec.a[i] - dot(k, dec.basis[i]);
    const Polynomial tail = dec.k < n ? char_poly(dec.a22) : Polynomial::constant(1.0);
    const Polynomial claim = Polynomial(factor) * tail;

    double err = 0.0;
    double mag = 1.0;
    for (std::size_t i = 0; i <= n; ++i) {
        err = std::max(err, std::abs(claim.coeff(i) - chi.coeff(i)));
        mag = std::max(mag, std::abs(chi.coeff(i)));
    }
    rep.factorization_error = err;
    rep.factorization_ok = err <= 1e-8 * mag;

    // Horizon long enough for the fitted rate to have the right sign even for
    // slowly decaying loops, clipped to what the scale can provide.
    double eta = -std::numeric_limits<double>::infinity();
    for (const Complex& z : poly_roots(chi))
        eta = std::max(eta, z.real());
    const double want =
        eta < 0.0 ? std::clamp(10.0 / std::max(-eta, 5e-4), 20.0, 2e4) : 20.0;
    const double t0 = ts.min_time();
    const double sup = ts.sup_time();
    const double t_end = ts.floor_time(std::isfinite(sup) ? std::min(sup, t0 + want) : t0 + want);
    rep.fit_horizon = t_end - t0;

    std::vector<double> times, norms;
    transition_norms(acl, ts, t0, t_end, times, norms);
    try {
        rep.decay = decay_fit(times, norms);
        rep.decay_ok = rep.decay.alpha_hat > 0.0;
    } catch (const DataError&) {
        rep.decay_ok = false;
    }
    return rep;
}

enum class StabilizationStatus { Feasible, Infeasible, NotStabilizable };

struct StabilizationResult {
    StabilizationStatus status = StabilizationStatus::Infeasible;
    Vector gain;      ///< populated when Feasible
    Spectrum failing; ///< eigenvalues breaking the rank test, when NotStabilizable
    std::string witness;
    std::optional<Decomposition> decomposition;
    std::optional<AlphaBounds> alphas;
    std::optional<InequalitySystem> constraints;
    std::optional<ClosedLoopReport> closed_loop;
    bool conservative_gate = false;
};

struct StabilizeOptions {
    double margin = 1e-6;
    double rank_tol = 1e-9;
    /// Re-centres the gain at the maximum-slack point of the row polytope, so
    /// the closed-loop coefficients sit well inside the positive orthant.
    bool recenter = true;
    double recenter_cap = 1.0;
};

namespace detail {

/// Nudges entries resting exactly on a finite lower bound slightly inside, so
/// the closed-loop entries they pin stay nonnegative after rounding.
inline void snap_to_bounds(Vector& gain, const Vector& lower) {
    for (std::size_t j = 0; j < gain.size(); ++j) {
        if (!std::isfinite(lower[j]))
            continue;
        const double lift = 1e-9 * std::max(1.0, std::abs(lower[j]));
        if (gain[j] < lower[j] + lift)
            gain[j] = lower[j] + lift;
    }
}

/// Deletion filter: drops constraints whose removal keeps the system
/// infeasible; what survives is a contradicting subset.
inline std::string infeasibility_witness(const InequalitySystem& ineqs, double margin) {
    auto infeasible = [&](const InequalitySystem& s) {
        return !solve_feasibility(s, margin).feasible;
    };

    InequalitySystem core = ineqs;
    for (std::size_t j = 0; j < core.lower_bounds.size(); ++j) {
        if (!std::isfinite(core.lower_bounds[j]))
            continue;
        const double saved = core.lower_bounds[j];
        core.lower_bounds[j] = kNegInfinity;
        if (!infeasible(core))
            core.lower_bounds[j] = saved;
    }
    for (std::size_t i = core.strict_rows.size(); i-- > 0;) {
        InequalitySystem trial = core;
        trial.strict_rows.erase(trial.strict_rows.begin() + static_cast<std::ptrdiff_t>(i));
        if (infeasible(trial))
            core.strict_rows = std::move(trial.strict_rows);
    }

    std::ostringstream os;
    os << "contradicting constraints:";
    for (std::size_t j = 0; j < core.lower_bounds.size(); ++j)
        if (std::isfinite(core.lower_bounds[j]))
            os << " k_" << (j + 1) << " >= " << core.lower_bounds[j] << ";";
    for (const auto& [v, ai] : core.strict_rows) {
        os << " K.[";
        for (std::size_t r = 0; r < v.size(); ++r)
            os << (r ? "," : "") << v[r];
        os << "] < " << ai << ";";
    }
    return os.str();
}

} // namespace detail

/// Single-input positive stabilization: rank gate, decomposition, positivity
/// bounds, and the linear inequality system for the gain. Returns a verified
/// gain, a certified contradiction, or the eigenvalues breaking the rank test.
inline StabilizationResult positive_stabilize(const Matrix& a, const Vector& b, const TimeScale& ts,
                                              const StabilizeOptions& opts = {}) {
    const std::size_t n = a.rows();
    if (!a.is_square() || b.size() != n)
        throw DomainError("positive_stabilize: dimension mismatch");
    if (!ts.bounded_graininess())
        throw PreconditionError("positive_stabilize: requires bounded graininess (mu_bar < +inf)");

    const PositivityReport cert = check_positive_system(a, Matrix::column(b), ts);
    if (!cert.verdict)
        throw DomainError("positive_stabilize: (A, b) is not a positive system on this scale");

    StabilizationResult result;

    const PbhResult pbh = pbh_stabilizable(a, Matrix::column(b), ts, opts.rank_tol);
    result.conservative_gate = pbh.conservative;
    if (!pbh.ok) {
        result.status = StabilizationStatus::NotStabilizable;
        result.failing = pbh.failing;
        return result;
    }

    result.decomposition = control_decomposition(a, b, CompletionOrder::Forward, opts.rank_tol);
    const Decomposition& dec = *result.decomposition;

    if (dec.k < n) {
        const double gamma = ts.gamma();
        for (const Complex& z : poly_roots(char_poly(dec.a22))) {
            if (!disc_membership(z, gamma).first) {
                result.status = StabilizationStatus::NotStabilizable;
                result.failing.push_back(z);
            }
        }
        if (result.status == StabilizationStatus::NotStabilizable)
            return result;
    }

    result.alphas = alpha_bounds(a, b, ts.gamma());
    result.constraints = build_constraints(dec, *result.alphas);

    const double margins[2] = {opts.margin, opts.margin / 100.0};
    FeasibilityResult feas;
    double margin_used = margins[0];
    for (double margin : margins) {
        feas = solve_feasibility(*result.constraints, margin);
        margin_used = margin;
        if (feas.feasible)
            break;
    }

    if (!feas.feasible) {
        result.status = StabilizationStatus::Infeasible;
        std::ostringstream os;
        os << "infeasible at margin " << margin_used << "; "
           << detail::infeasibility_witness(*result.constraints, margin_used);
        result.witness = os.str();
        return result;
    }

    Vector gain = std::move(feas.gain);
    if (opts.recenter && !result.constraints->strict_rows.empty()) {
        LpProblem lp;
        lp.lower = result.constraints->lower_bounds;
        Vector scales;
        for (const auto& [v, ai] : result.constraints->strict_rows) {
            lp.rows.push_back(v);
            lp.rhs.push_back(ai);
            scales.push_back(std::max(1.0, norm2(v)));
        }
        if (auto centered = lp_solve(lp, scales, opts.recenter_cap);
            centered && centered->second > margin_used)
            gain = std::move(centered->first);
    }
    detail::snap_to_bounds(gain, result.constraints->lower_bounds);

    result.status = StabilizationStatus::Feasible;
    result.gain = gain;
    result.closed_loop = verify_closed_loop(a, b, gain, ts);
    return result;
}

} // namespace tslin
