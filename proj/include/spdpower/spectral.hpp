#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "spdpower/errors.hpp"
#include "spdpower/matrix.hpp"

namespace spdpower {

/// Eigendecomposition S = U diag(eigenvalues) U^T with eigenvalues sorted
/// descending and column i of `eigenvectors` paired with eigenvalue i.
/// Columns are sign-normalized: the largest-magnitude component of each
/// column is positive (first such component on ties).
struct SpectralDecomp {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;

    int dim() const { return eigenvectors.dim(); }

    /// U diag(f(eigenvalues)) U^T for the given per-eigenvalue values.
    SymMatrix reconstruct(std::span<const double> values) const {
        const int m = dim();
        SymMatrix out(m);
        for (int i = 0; i < m; ++i) {
            for (int j = i; j < m; ++j) {
                double sum = 0.0;
                for (int k = 0; k < m; ++k)
                    sum += eigenvectors(i, k) * values[k] * eigenvectors(j, k);
                out.set(i, j, sum);
            }
        }
        return out;
    }

    SymMatrix reconstruct() const {
        return reconstruct(std::span<const double>(eigenvalues.data(), eigenvalues.size()));
    }
};

enum class DefinitenessClass { PositiveDefinite, PositiveSemiDefinite, Indefinite };

/// Eigenvalue tolerance separating "zero" from "negative" for PSD checks.
inline double psd_tolerance(double lambda_max) {
    return 1e-12 * std::max(1.0, lambda_max);
}

namespace detail {

inline constexpr int kJacobiMaxSweeps = 100;
inline constexpr double kJacobiTol = 1e-13;

// Cyclic Jacobi rotations. A is overwritten with the diagonalized matrix,
// V accumulates the rotations (columns are eigenvectors).
inline void jacobi_diagonalize(Matrix& a, Matrix& v) {
    const int n = a.dim();
    v = Matrix::identity(n);
    if (n == 1) return;

    double norm2 = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) norm2 += a(i, j) * a(i, j);
    const double threshold2 = kJacobiTol * kJacobiTol * norm2;

    for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
        double off2 = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off2 += 2.0 * a(i, j) * a(i, j);
        if (off2 <= threshold2) return;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double app = a(p, p);
                const double aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (int r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double arp = a(r, p);
                        const double arq = a(r, q);
                        a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
                        a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
                    }
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    // final convergence check after the sweep cap
    double off2 = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) off2 += 2.0 * a(i, j) * a(i, j);
    if (off2 > threshold2)
        throw ConvergenceError("eigen-solver did not converge within " +
                               std::to_string(kJacobiMaxSweeps) + " sweeps");
}

} // namespace detail

inline SpectralDecomp spectral_decompose(const SymMatrix& s) {
    const int n = s.dim();
    Matrix a = to_dense(s);
    Matrix v(n);
    detail::jacobi_diagonalize(a, v);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return a(x, x) > a(y, y); });

    SpectralDecomp dec{std::vector<double>(n), Matrix(n)};
    for (int k = 0; k < n; ++k) {
        const int src = order[k];
        dec.eigenvalues[k] = a(src, src);
        // sign convention: largest-magnitude component positive, first on ties
        int pivot = 0;
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
            const double mag = std::abs(v(i, src));
            if (mag > best) {
                best = mag;
                pivot = i;
            }
        }
        const double sign = v(pivot, src) < 0.0 ? -1.0 : 1.0;
        for (int i = 0; i < n; ++i) dec.eigenvectors(i, k) = sign * v(i, src);
    }
    return dec;
}

inline DefinitenessClass classify(const SpectralDecomp& dec) {
    const double lambda_max = dec.eigenvalues.front();
    const double lambda_min = dec.eigenvalues.back();
    const double tol = psd_tolerance(lambda_max);
    if (lambda_min > tol) return DefinitenessClass::PositiveDefinite;
    if (lambda_min >= -tol) return DefinitenessClass::PositiveSemiDefinite;
    return DefinitenessClass::Indefinite;
}

inline DefinitenessClass classify(const SymMatrix& s) { return classify(spectral_decompose(s)); }

namespace detail {

// Eigenvalues ready for the power/log domain. For alpha <= 0 every
// eigenvalue must be strictly positive; for alpha > 0 negatives inside the
// PSD tolerance are clamped to zero, anything below it is rejected.
inline std::vector<double> power_domain_eigenvalues(const SpectralDecomp& dec, double alpha) {
    const double tol = psd_tolerance(dec.eigenvalues.front());
    std::vector<double> lam = dec.eigenvalues;
    for (double& x : lam) {
        if (alpha <= 0.0) {
            if (x <= tol)
                throw DomainError("matrix power with alpha <= 0 requires a positive-definite "
                                  "matrix; offending eigenvalue " +
                                  std::to_string(x));
        } else {
            if (x < -tol)
                throw DomainError("matrix power requires a positive semi-definite matrix; "
                                  "offending eigenvalue " +
                                  std::to_string(x));
            if (x < 0.0) x = 0.0;
        }
    }
    return lam;
}

} // namespace detail

/// S^alpha = U diag(lambda_i^alpha) U^T, with 0^alpha = 0 for alpha > 0.
inline SymMatrix matrix_power(const SymMatrix& s, double alpha) {
    const SpectralDecomp dec = spectral_decompose(s);
    std::vector<double> lam = detail::power_domain_eigenvalues(dec, alpha);
    for (double& x : lam) x = (x == 0.0 && alpha > 0.0) ? 0.0 : std::pow(x, alpha);
    return dec.reconstruct(lam);
}

/// log S = U diag(log lambda_i) U^T; requires a positive-definite input.
inline SymMatrix matrix_log(const SymMatrix& s) {
    const SpectralDecomp dec = spectral_decompose(s);
    const double tol = psd_tolerance(dec.eigenvalues.front());
    std::vector<double> lam = dec.eigenvalues;
    for (double& x : lam) {
        if (x <= tol)
            throw DomainError("matrix log requires a positive-definite matrix; offending "
                              "eigenvalue " +
                              std::to_string(x));
        x = std::log(x);
    }
    return dec.reconstruct(lam);
}

inline SymMatrix matrix_exp(const SymMatrix& s) {
    const SpectralDecomp dec = spectral_decompose(s);
    std::vector<double> lam = dec.eigenvalues;
    for (double& x : lam) x = std::exp(x);
    return dec.reconstruct(lam);
}

} // namespace spdpower
