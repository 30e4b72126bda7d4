#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "spdpower/errors.hpp"

namespace spdpower {

/// Dense symmetric m-by-m matrix. Only the upper triangle is stored, as a
/// vech vector in row-major order: (0,0), (0,1), ..., (0,m-1), (1,1), ...
/// Symmetry therefore holds by construction and every entry is finite.
class SymMatrix {
public:
    explicit SymMatrix(int dim) : dim_(check_dim(dim)), v_(vech_size(dim), 0.0) {}

    SymMatrix(int dim, std::span<const double> vech_values) : SymMatrix(dim) {
        if (vech_values.size() != v_.size())
            throw std::invalid_argument("vech length " + std::to_string(vech_values.size()) +
                                        " does not match dimension " + std::to_string(dim));
        for (std::size_t k = 0; k < v_.size(); ++k) set_vech(k, vech_values[k]);
    }

    static SymMatrix identity(int dim) {
        SymMatrix s(dim);
        for (int i = 0; i < dim; ++i) s.set(i, i, 1.0);
        return s;
    }

    static SymMatrix diagonal(std::span<const double> d) {
        SymMatrix s(static_cast<int>(d.size()));
        for (int i = 0; i < s.dim(); ++i) s.set(i, i, d[i]);
        return s;
    }

    static SymMatrix diagonal(std::initializer_list<double> d) {
        return diagonal(std::span<const double>(d.begin(), d.size()));
    }

    int dim() const { return dim_; }

    double operator()(int i, int j) const { return v_[index(i, j)]; }

    void set(int i, int j, double value) {
        check_finite(value);
        v_[index(i, j)] = value;
    }

    void set_vech(std::size_t k, double value) {
        check_finite(value);
        v_[k] = value;
    }

    const std::vector<double>& vech() const { return v_; }

    static std::size_t vech_size(int dim) {
        return static_cast<std::size_t>(dim) * (dim + 1) / 2;
    }

    SymMatrix& operator+=(const SymMatrix& other) {
        require_same_dim(other);
        for (std::size_t k = 0; k < v_.size(); ++k) set_vech(k, v_[k] + other.v_[k]);
        return *this;
    }

    SymMatrix& operator-=(const SymMatrix& other) {
        require_same_dim(other);
        for (std::size_t k = 0; k < v_.size(); ++k) set_vech(k, v_[k] - other.v_[k]);
        return *this;
    }

    SymMatrix& operator*=(double c) {
        for (std::size_t k = 0; k < v_.size(); ++k) set_vech(k, v_[k] * c);
        return *this;
    }

    friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
    friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
    friend SymMatrix operator*(SymMatrix a, double c) { return a *= c; }
    friend SymMatrix operator*(double c, SymMatrix a) { return a *= c; }

    friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
        return a.dim_ == b.dim_ && a.v_ == b.v_;
    }

private:
    static int check_dim(int dim) {
        if (dim < 1) throw std::invalid_argument("matrix dimension must be >= 1");
        return dim;
    }

    static void check_finite(double value) {
        if (!std::isfinite(value)) throw DomainError("non-finite matrix entry");
    }

    void require_same_dim(const SymMatrix& other) const {
        if (other.dim_ != dim_) throw std::invalid_argument("dimension mismatch");
    }

    // row-major upper-triangle index of (i, j) with i <= j
    std::size_t index(int i, int j) const {
        if (i > j) std::swap(i, j);
        return static_cast<std::size_t>(i) * dim_ - static_cast<std::size_t>(i) * (i - 1) / 2 +
               static_cast<std::size_t>(j - i);
    }

    int dim_;
    std::vector<double> v_;
};

/// vech(S): the m(m+1)/2 upper-triangle entries in row-major order.
inline std::vector<double> vech(const SymMatrix& s) { return s.vech(); }

/// Inverse of vech: rebuilds the symmetric matrix. Throws on length mismatch.
inline SymMatrix unvech(std::span<const double> v, int dim) { return SymMatrix(dim, v); }

inline SymMatrix unvech(const std::vector<double>& v, int dim) {
    return SymMatrix(dim, std::span<const double>(v.data(), v.size()));
}

/// Frobenius norm over the full matrix: off-diagonal entries count twice.
inline double frobenius_norm(const SymMatrix& s) {
    double sum = 0.0;
    for (int i = 0; i < s.dim(); ++i) {
        sum += s(i, i) * s(i, i);
        for (int j = i + 1; j < s.dim(); ++j) sum += 2.0 * s(i, j) * s(i, j);
    }
    return std::sqrt(sum);
}

/// Dense square matrix, row-major. Used for eigenvector bases, rotations and
/// other non-symmetric intermediates.
class Matrix {
public:
    explicit Matrix(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim, 0.0) {
        if (dim < 1) throw std::invalid_argument("matrix dimension must be >= 1");
    }

    static Matrix identity(int dim) {
        Matrix m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    int dim() const { return dim_; }

    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * dim_ + j]; }
    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * dim_ + j]; }

    Matrix transposed() const {
        Matrix t(dim_);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        Matrix c(a.dim_);
        for (int i = 0; i < a.dim_; ++i)
            for (int k = 0; k < a.dim_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                for (int j = 0; j < a.dim_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    std::vector<double> column(int j) const {
        std::vector<double> c(dim_);
        for (int i = 0; i < dim_; ++i) c[i] = (*this)(i, j);
        return c;
    }

private:
    int dim_;
    std::vector<double> a_;
};

inline Matrix to_dense(const SymMatrix& s) {
    Matrix m(s.dim());
    for (int i = 0; i < s.dim(); ++i)
        for (int j = 0; j < s.dim(); ++j) m(i, j) = s(i, j);
    return m;
}

inline double frobenius_norm(const Matrix& m) {
    double sum = 0.0;
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) sum += m(i, j) * m(i, j);
    return std::sqrt(sum);
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
class Cholesky {
public:
    /// Returns std::nullopt when a pivot is non-positive (matrix not PD).
    static std::optional<Cholesky> factor(const SymMatrix& s) {
        const int n = s.dim();
        Cholesky c(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j <= i; ++j) {
                double sum = s(i, j);
                for (int k = 0; k < j; ++k) sum -= c.l_(i, k) * c.l_(j, k);
                if (i == j) {
                    if (sum <= 0.0 || !std::isfinite(sum)) return std::nullopt;
                    c.l_(i, i) = std::sqrt(sum);
                } else {
                    c.l_(i, j) = sum / c.l_(j, j);
                }
            }
        }
        return c;
    }

    /// Solves L y = b in place.
    void forward_solve(std::span<double> b) const {
        const int n = l_.dim();
        for (int i = 0; i < n; ++i) {
            double sum = b[i];
            for (int k = 0; k < i; ++k) sum -= l_(i, k) * b[k];
            b[i] = sum / l_(i, i);
        }
    }

    double log_det() const {
        double sum = 0.0;
        for (int i = 0; i < l_.dim(); ++i) sum += std::log(l_(i, i));
        return 2.0 * sum;
    }

    const Matrix& lower() const { return l_; }

private:
    explicit Cholesky(int dim) : l_(dim) {}
    Matrix l_;
};

} // namespace spdpower
