#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "spdpower/errors.hpp"
#include "spdpower/matrix.hpp"
#include "spdpower/metrics.hpp"
#include "spdpower/spectral.hpp"

namespace spdpower {

struct FrechetMeanResult {
    SymMatrix mean;
    double alpha = 0.0;
    std::size_t n = 0;
};

/// Fréchet mean under the power metric: (mean of S_i^alpha)^(1/alpha),
/// exp(mean of log S_i) for alpha = 0. Minimizes the sum of squared
/// distances over the sample.
inline FrechetMeanResult frechet_mean(std::span<const SymMatrix> samples, PowerParam p) {
    if (samples.empty()) throw EmptyInputError("frechet_mean of an empty sample");
    const int m = samples.front().dim();
    for (const SymMatrix& s : samples)
        if (s.dim() != m) throw std::invalid_argument("samples must share a dimension");

    SymMatrix acc(m);
    for (const SymMatrix& s : samples)
        acc += p.log_euclidean() ? matrix_log(s) : matrix_power(s, p.alpha);
    acc *= 1.0 / static_cast<double>(samples.size());

    SymMatrix mean = p.log_euclidean() ? matrix_exp(acc) : matrix_power(acc, 1.0 / p.alpha);
    return FrechetMeanResult{std::move(mean), p.alpha, samples.size()};
}

inline FrechetMeanResult frechet_mean(const std::vector<SymMatrix>& samples, PowerParam p) {
    return frechet_mean(std::span<const SymMatrix>(samples.data(), samples.size()), p);
}

/// Fractional anisotropy of the powered eigenvalues:
/// sqrt( (m/(m-1)) sum_i (l_i^a - mean(l^a))^2 / sum_i l_i^(2a) ).
/// 0 for isotropic input, 1 at maximal anisotropy; clamped to [0,1] against
/// sub-1e-12 floating-point overshoot.
inline double fractional_anisotropy(const SymMatrix& s, PowerParam p) {
    const int m = s.dim();
    if (m < 2) throw std::invalid_argument("fractional anisotropy needs dimension >= 2");
    const SpectralDecomp dec = spectral_decompose(s);
    std::vector<double> lam = detail::power_domain_eigenvalues(dec, p.alpha);

    double denom = 0.0;
    double mean = 0.0;
    for (double& x : lam) {
        x = (x == 0.0 && p.alpha > 0.0) ? 0.0 : std::pow(x, p.alpha);
        mean += x;
        denom += x * x;
    }
    mean /= m;
    if (denom == 0.0) throw DegenerateError("all powered eigenvalues are zero");

    double num = 0.0;
    for (double x : lam) num += (x - mean) * (x - mean);
    const double fa = std::sqrt(num / denom * m / (m - 1.0));
    return std::min(std::max(fa, 0.0), 1.0);
}

/// Straight-line interpolation in S^alpha coordinates:
/// ((1-t) S1^a + t S2^a)^(1/a), log/exp for alpha = 0. t must lie in [0,1];
/// extrapolation can leave the PSD cone and is rejected.
inline SymMatrix interpolate(const SymMatrix& s1, const SymMatrix& s2, double t, PowerParam p) {
    if (!(t >= 0.0 && t <= 1.0))
        throw std::invalid_argument("interpolation parameter t must lie in [0, 1]");
    if (p.log_euclidean())
        return matrix_exp(matrix_log(s1) * (1.0 - t) + matrix_log(s2) * t);
    return matrix_power(matrix_power(s1, p.alpha) * (1.0 - t) + matrix_power(s2, p.alpha) * t,
                        1.0 / p.alpha);
}

} // namespace spdpower
