#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <vector>

#include "tslin/errors.hpp"

namespace tslin {

using Vector = std::vector<double>;

/// Dense real matrix, row-major storage. Value type; all operations are pure.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_)
                throw ValidationError("Matrix: ragged initializer list");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix I(n, n);
        for (std::size_t i = 0; i < n; ++i)
            I(i, i) = 1.0;
        return I;
    }

    static Matrix zero(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

    /// Column vector as an n-by-1 matrix.
    static Matrix column(const Vector& v) {
        Matrix m(v.size(), 1);
        for (std::size_t i = 0; i < v.size(); ++i)
            m(i, 0) = v[i];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }
    bool is_square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }

    Matrix& operator+=(const Matrix& other) {
        require_same_shape(other, "+");
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] += other.data_[i];
        return *this;
    }

    Matrix& operator-=(const Matrix& other) {
        require_same_shape(other, "-");
        for (std::size_t i = 0; i < data_.size(); ++i)
            data_[i] -= other.data_[i];
        return *this;
    }

    Matrix& operator*=(double s) {
        for (double& x : data_)
            x *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_)
            throw DomainError("Matrix multiply: inner dimensions disagree");
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0)
                    continue;
                for (std::size_t j = 0; j < b.cols_; ++j)
                    c(i, j) += aik * b(k, j);
            }
        }
        return c;
    }

    friend Vector operator*(const Matrix& a, const Vector& x) {
        if (a.cols_ != x.size())
            throw DomainError("Matrix-vector multiply: dimensions disagree");
        Vector y(a.rows_, 0.0);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < a.cols_; ++j)
                s += a(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                t(j, i) = (*this)(i, j);
        return t;
    }

    double trace() const {
        if (!is_square())
            throw DomainError("trace: matrix not square");
        double t = 0.0;
        for (std::size_t i = 0; i < rows_; ++i)
            t += (*this)(i, i);
        return t;
    }

    /// Largest entry magnitude.
    double max_abs() const {
        double m = 0.0;
        for (double x : data_)
            m = std::max(m, std::abs(x));
        return m;
    }

    /// Row-sum norm.
    double norm_inf() const {
        double m = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j)
                s += std::abs((*this)(i, j));
            m = std::max(m, s);
        }
        return m;
    }

    double norm_frobenius() const {
        double s = 0.0;
        for (double x : data_)
            s += x * x;
        return std::sqrt(s);
    }

    Vector col(std::size_t j) const {
        Vector v(rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            v[i] = (*this)(i, j);
        return v;
    }

    Matrix block(std::size_t i0, std::size_t j0, std::size_t nrows, std::size_t ncols) const {
        Matrix b(nrows, ncols);
        for (std::size_t i = 0; i < nrows; ++i)
            for (std::size_t j = 0; j < ncols; ++j)
                b(i, j) = (*this)(i0 + i, j0 + j);
        return b;
    }

    std::string to_string() const {
        std::ostringstream os;
        os << "[";
        for (std::size_t i = 0; i < rows_; ++i) {
            os << (i ? "; " : "");
            for (std::size_t j = 0; j < cols_; ++j)
                os << (j ? " " : "") << (*this)(i, j);
        }
        os << "]";
        return os.str();
    }

private:
    void require_same_shape(const Matrix& other, const char* op) const {
        if (rows_ != other.rows_ || cols_ != other.cols_) {
            std::ostringstream os;
            os << "Matrix " << op << ": shape mismatch (" << rows_ << "x" << cols_ << " vs "
               << other.rows_ << "x" << other.cols_ << ")";
            throw DomainError(os.str());
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

inline double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

inline double norm_inf(const Vector& v) {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

/// LU decomposition with partial pivoting, kept as a compact solver handle.
class LuDecomposition {
public:
    explicit LuDecomposition(Matrix a) : lu_(std::move(a)) {
        if (!lu_.is_square())
            throw DomainError("LU: matrix not square");
        const std::size_t n = lu_.rows();
        perm_.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            perm_[i] = i;

        for (std::size_t k = 0; k < n; ++k) {
            std::size_t piv = k;
            double best = std::abs(lu_(k, k));
            for (std::size_t i = k + 1; i < n; ++i) {
                const double v = std::abs(lu_(i, k));
                if (v > best) {
                    best = v;
                    piv = i;
                }
            }
            if (piv != k) {
                for (std::size_t j = 0; j < n; ++j)
                    std::swap(lu_(k, j), lu_(piv, j));
                std::swap(perm_[k], perm_[piv]);
                sign_ = -sign_;
            }
            const double pivot = lu_(k, k);
            if (pivot == 0.0) {
                singular_ = true;
                continue;
            }
            for (std::size_t i = k + 1; i < n; ++i) {
                lu_(i, k) /= pivot;
                const double lik = lu_(i, k);
                if (lik == 0.0)
                    continue;
                for (std::size_t j = k + 1; j < n; ++j)
                    lu_(i, j) -= lik * lu_(k, j);
            }
        }
    }

    bool singular() const { return singular_; }

    double determinant() const {
        if (singular_)
            return 0.0;
        double d = sign_;
        for (std::size_t i = 0; i < lu_.rows(); ++i)
            d *= lu_(i, i);
        return d;
    }

    Vector solve(const Vector& b) const {
        if (singular_)
            throw NumericalError("LU solve: matrix is singular");
        const std::size_t n = lu_.rows();
        Vector x(n);
        for (std::size_t i = 0; i < n; ++i)
            x[i] = b[perm_[i]];
        for (std::size_t i = 1; i < n; ++i) {
            double s = x[i];
            for (std::size_t j = 0; j < i; ++j)
                s -= lu_(i, j) * x[j];
            x[i] = s;
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = x[i];
            for (std::size_t j = i + 1; j < n; ++j)
                s -= lu_(i, j) * x[j];
            x[i] = s / lu_(i, i);
        }
        return x;
    }

    Matrix solve(const Matrix& b) const {
        Matrix x(b.rows(), b.cols());
        for (std::size_t j = 0; j < b.cols(); ++j) {
            Vector xm = solve(b.col(j));
            for (std::size_t i = 0; i < b.rows(); ++i)
                x(i, j) = xm[i];
        }
        return x;
    }

private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
    double sign_ = 1.0;
    bool singular_ = false;
};

inline Matrix inverse(const Matrix& a) {
    LuDecomposition lu(a);
    return lu.solve(Matrix::identity(a.rows()));
}

inline Vector solve(const Matrix& a, const Vector& b) { return LuDecomposition(a).solve(b); }

/// Numerical rank by row elimination with partial pivoting.
/// A pivot counts while its magnitude exceeds tol times the largest entry magnitude.
inline std::size_t matrix_rank(const Matrix& m, double tol = 1e-9) {
    if (tol <= 0.0)
        throw DomainError("matrix_rank: tolerance must be positive");
    if (m.empty())
        return 0;
    Matrix a = m;
    const std::size_t rows = a.rows(), cols = a.cols();
    const double threshold = tol * std::max(a.max_abs(), std::numeric_limits<double>::min());

    std::size_t rank = 0;
    std::size_t row = 0;
    for (std::size_t col = 0; col < cols && row < rows; ++col) {
        std::size_t piv = row;
        double best = std::abs(a(row, col));
        for (std::size_t i = row + 1; i < rows; ++i) {
            const double v = std::abs(a(i, col));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best <= threshold)
            continue;
        if (piv != row)
            for (std::size_t j = 0; j < cols; ++j)
                std::swap(a(row, j), a(piv, j));
        for (std::size_t i = row + 1; i < rows; ++i) {
            const double f = a(i, col) / a(row, col);
            if (f == 0.0)
                continue;
            for (std::size_t j = col; j < cols; ++j)
                a(i, j) -= f * a(row, j);
        }
        ++rank;
        ++row;
    }
    return rank;
}

/// Spectral norm (largest singular value) via power iteration on A^T A.
/// Deterministic start vector; n is small so the fixed iteration budget is cheap.
inline double spectral_norm(const Matrix& a) {
    if (a.empty())
        return 0.0;
    const Matrix at = a.transposed();
    Vector v(a.cols());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = 1.0 + 0.01 * static_cast<double>(i);
    double nv = norm2(v);
    for (double& x : v)
        x /= nv;

    double lambda = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        Vector w = at * (a * v);
        const double nw = norm2(w);
        if (nw == 0.0)
            return 0.0;
        for (double& x : w)
            x /= nw;
        const double next = nw;
        v = std::move(w);
        if (iter > 4 && std::abs(next - lambda) <= 1e-14 * std::max(1.0, next)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return std::sqrt(lambda);
}

} // namespace tslin
