#pragma once

#include <cmath>
#include <vector>

#include "spdpower/errors.hpp"
#include "spdpower/matrix.hpp"
#include "spdpower/spectral.hpp"

namespace spdpower {

/// Power parameter of the metric family. alpha = 0 selects the
/// log-Euclidean branch.
struct PowerParam {
    double alpha = 1.0;

    PowerParam() = default;
    PowerParam(double a) : alpha(a) {
        if (!std::isfinite(a)) throw std::invalid_argument("power parameter must be finite");
    }

    bool log_euclidean() const { return alpha == 0.0; }
};

/// || log S1 - log S2 ||_F. Both inputs must be positive definite.
inline double dist_log_euclidean(const SymMatrix& s1, const SymMatrix& s2) {
    return frobenius_norm(matrix_log(s1) - matrix_log(s2));
}

/// (1/|alpha|) || S1^alpha - S2^alpha ||_F, log-Euclidean at alpha = 0.
inline double dist_power(const SymMatrix& s1, const SymMatrix& s2, PowerParam p) {
    if (p.log_euclidean()) return dist_log_euclidean(s1, s2);
    return frobenius_norm(matrix_power(s1, p.alpha) - matrix_power(s2, p.alpha)) /
           std::abs(p.alpha);
}

namespace detail {

/// Singular value decomposition A = W diag(sv) U^T of a small square matrix,
/// built on the symmetric eigen-solver: A^T A = U diag(sv^2) U^T gives the
/// right vectors, the left vectors are A u_i / sv_i. Singular values sorted
/// descending. Columns for (near-)zero singular values are completed to an
/// orthonormal basis deterministically, so rank-deficient inputs are fine.
struct Svd {
    Matrix left;  // W
    Matrix right; // U
    std::vector<double> singular_values;
};

inline Svd svd(const Matrix& a) {
    const int n = a.dim();
    SymMatrix ata(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double sum = 0.0;
            for (int k = 0; k < n; ++k) sum += a(k, i) * a(k, j);
            ata.set(i, j, sum);
        }
    const SpectralDecomp dec = spectral_decompose(ata);

    Svd out{Matrix(n), dec.eigenvectors, std::vector<double>(n)};
    double sv_max = 0.0;
    for (int k = 0; k < n; ++k) {
        const double s2 = std::max(dec.eigenvalues[k], 0.0);
        out.singular_values[k] = std::sqrt(s2);
        sv_max = std::max(sv_max, out.singular_values[k]);
    }

    const double tiny = 1e-300;
    const double drop = std::max(1e-12 * sv_max, tiny);
    for (int k = 0; k < n; ++k) {
        std::vector<double> w(n, 0.0);
        double norm = 0.0;
        if (out.singular_values[k] > drop) {
            for (int i = 0; i < n; ++i) {
                double sum = 0.0;
                for (int j = 0; j < n; ++j) sum += a(i, j) * out.right(j, k);
                w[i] = sum;
            }
        } else {
            // deficient direction: fall back to the unit basis, re-orthogonalized below
            w[k] = 1.0;
        }
        // modified Gram-Schmidt against the columns already placed
        for (int pass = 0; pass < 2; ++pass) {
            for (int c = 0; c < k; ++c) {
                double dot = 0.0;
                for (int i = 0; i < n; ++i) dot += w[i] * out.left(i, c);
                for (int i = 0; i < n; ++i) w[i] -= dot * out.left(i, c);
            }
        }
        norm = 0.0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        if (norm <= drop) {
            // basis vector was swallowed; scan for one that survives
            for (int e = 0; e < n && norm <= drop; ++e) {
                std::fill(w.begin(), w.end(), 0.0);
                w[e] = 1.0;
                for (int c = 0; c < k; ++c) {
                    double dot = 0.0;
                    for (int i = 0; i < n; ++i) dot += w[i] * out.left(i, c);
                    for (int i = 0; i < n; ++i) w[i] -= dot * out.left(i, c);
                }
                norm = 0.0;
                for (double x : w) norm += x * x;
                norm = std::sqrt(norm);
            }
        }
        for (int i = 0; i < n; ++i) out.left(i, k) = w[i] / norm;
    }
    return out;
}

} // namespace detail

struct ProcrustesResult {
    double distance = 0.0;
    Matrix rotation; // orthogonal; minimizes || S1^a - S2^a R ||_F
};

/// Procrustes power metric: min over orthogonal R of
/// (1/|alpha|) || S1^alpha - S2^alpha R ||_F, solved by the SVD of
/// (S2^alpha)^T S1^alpha. Defined for alpha != 0 only. For rank-deficient
/// cross-products the minimizer is not unique; the SVD's deterministic
/// completion picks one.
inline ProcrustesResult dist_procrustes_power(const SymMatrix& s1, const SymMatrix& s2,
                                              PowerParam p) {
    if (p.log_euclidean())
        throw DomainError("procrustes power metric is defined for alpha != 0 only");

    const Matrix a = to_dense(matrix_power(s1, p.alpha));
    const Matrix b = to_dense(matrix_power(s2, p.alpha));
    const detail::Svd svd = detail::svd(b.transposed() * a);
    const Matrix rotation = svd.left * svd.right.transposed();

    const int n = a.dim();
    const Matrix br = b * rotation;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double d = a(i, j) - br(i, j);
            sum += d * d;
        }
    return ProcrustesResult{std::sqrt(sum) / std::abs(p.alpha), rotation};
}

} // namespace spdpower
