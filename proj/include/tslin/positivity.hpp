#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "tslin/errors.hpp"
#include "tslin/matrix.hpp"
#include "tslin/timescale.hpp"

namespace tslin {

/// Entry of a matrix that breaks a sign requirement.
struct ViolatingEntry {
    std::size_t i = 0;
    std::size_t j = 0;
    double value = 0.0;
    enum class Kind { OffDiagonal, Diagonal, Input } kind = Kind::OffDiagonal;
};

/// Evidence for (or against) positivity of x^delta = A x + B u on a scale.
struct PositivityReport {
    bool verdict = false;
    bool is_metzler = false;
    double c_of_a = 0.0; ///< smallest shift making A + cI nonnegative
    double gamma = 0.0;
    std::vector<ViolatingEntry> violating_entries;
    /// Entries in (-1e-12, 0): formally violations, flagged separately so the
    /// caller can spot rounding artifacts in the model data.
    std::vector<ViolatingEntry> near_zero_warnings;
};

/// True iff every off-diagonal entry is >= 0. Exact comparison: positivity is
/// a structural property of the model data.
inline bool is_metzler(const Matrix& a) {
    if (!a.is_square())
        throw DomainError("is_metzler: matrix not square");
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j && a(i, j) < 0.0)
                return false;
    return true;
}

/// Smallest c >= 0 with A + cI entrywise nonnegative. For a Metzler matrix this
/// is max(0, -min diagonal).
inline double metzler_offset(const Matrix& a) {
    if (!is_metzler(a))
        throw DomainError("metzler_offset: matrix is not Metzler");
    double c = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        c = std::max(c, -a(i, i));
    return c;
}

/// Positivity certificate: A Metzler, c(A) <= gamma (extended-real order), and
/// B entrywise nonnegative. When gamma is infinite the diagonal condition is
/// vacuous.
inline PositivityReport check_positive_system(const Matrix& a, const Matrix& b, const TimeScale& ts) {
    if (!a.is_square())
        throw DomainError("check_positive_system: A not square");
    if (!b.empty() && b.rows() != a.rows())
        throw DomainError("check_positive_system: B row count must match A");

    PositivityReport rep;
    rep.gamma = ts.gamma();

    rep.is_metzler = true;
    double c = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double v = a(i, j);
            if (i == j) {
                c = std::max(c, -v);
                continue;
            }
            if (v < 0.0) {
                rep.is_metzler = false;
                rep.violating_entries.push_back({i, j, v, ViolatingEntry::Kind::OffDiagonal});
                if (v > -1e-12)
                    rep.near_zero_warnings.push_back({i, j, v, ViolatingEntry::Kind::OffDiagonal});
            }
        }
    }
    rep.c_of_a = c;

    // Diagonal condition: a_jj + gamma >= 0, vacuous for infinite gamma.
    if (std::isfinite(rep.gamma)) {
        for (std::size_t j = 0; j < a.rows(); ++j) {
            const double shifted = a(j, j) + rep.gamma;
            if (shifted < 0.0)
                rep.violating_entries.push_back({j, j, shifted, ViolatingEntry::Kind::Diagonal});
        }
    }

    bool b_nonneg = true;
    for (std::size_t i = 0; i < b.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            const double v = b(i, j);
            if (v < 0.0) {
                b_nonneg = false;
                rep.violating_entries.push_back({i, j, v, ViolatingEntry::Kind::Input});
                if (v > -1e-12)
                    rep.near_zero_warnings.push_back({i, j, v, ViolatingEntry::Kind::Input});
            }
        }
    }

    rep.verdict = rep.is_metzler && (rep.c_of_a <= rep.gamma) && b_nonneg;
    return rep;
}

/// (A, B, time scale) bundle with its cached positivity certificate.
struct PositiveSystem {
    Matrix a;
    Matrix b;
    TimeScale ts;
    PositivityReport certificate;
};

inline PositiveSystem make_positive_system(Matrix a, Matrix b, TimeScale ts) {
    PositivityReport rep = check_positive_system(a, b, ts);
    return PositiveSystem{std::move(a), std::move(b), std::move(ts), std::move(rep)};
}

} // namespace tslin
