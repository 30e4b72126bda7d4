#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "spdpower/errors.hpp"
#include "spdpower/matrix.hpp"
#include "spdpower/spectral.hpp"

namespace spdpower {

/// Parameters of the Gaussian model on vech of the power-transformed matrix:
/// mu has length m(m+1)/2 and sigma is the positive-definite covariance of
/// the same size.
struct GaussianParams {
    std::vector<double> mu;
    SymMatrix sigma{1};
};

namespace detail {

// switchover thresholds for the stabilized ratio evaluation
inline constexpr double kGapSeriesTol = 1e-3;   // on |lambda_b/lambda_a - 1|
inline constexpr double kAlphaSeriesTol = 1e-3; // on |alpha|
inline constexpr double kSigmaConditionCap = 1e12;

// (lambda_a^alpha - lambda_b^alpha) / (alpha (lambda_a - lambda_b)),
// evaluated literally. Fine while the eigenvalue gap and alpha are both
// away from zero.
inline double log_ratio_direct(double lambda_a, double lambda_b, double alpha) {
    const double num = std::pow(lambda_a, alpha) - std::pow(lambda_b, alpha);
    const double den = alpha * (lambda_a - lambda_b);
    return std::log(num / den);
}

// expansion in the relative eigenvalue gap mu = lambda_b/lambda_a - 1,
// carried to the mu^3 term
inline double log_ratio_gap_series(double lambda_a, double mu, double alpha) {
    const double a1 = alpha - 1.0;
    const double corr = a1 * mu / 2.0 + a1 * (alpha - 2.0) * mu * mu / 6.0 +
                        a1 * (alpha - 2.0) * (alpha - 3.0) * mu * mu * mu / 24.0;
    return a1 * std::log(lambda_a) + std::log1p(corr);
}

// expansion in alpha, carried to the alpha^3 term
inline double log_ratio_alpha_series(double lambda_a, double mu, double alpha) {
    const double q = std::log1p(mu);
    const double corr = alpha * q / 2.0 + alpha * alpha * q * q / 6.0 +
                        alpha * alpha * alpha * q * q * q / 24.0;
    return (alpha - 1.0) * std::log(lambda_a) + std::log(q / mu) + std::log1p(corr);
}

} // namespace detail

/// Log of the eigenvalue-pair Jacobian factor
/// (lambda_a^alpha - lambda_b^alpha) / (alpha (lambda_a - lambda_b)).
/// Near-equal eigenvalues and small |alpha| switch to Taylor expansions; at
/// alpha = 0 the factor is the log-map limit
/// (log lambda_a - log lambda_b) / (lambda_a - lambda_b), and exactly equal
/// eigenvalues use the limit lambda^(alpha-1).
inline double log_jacobian_ratio(double lambda_a, double lambda_b, double alpha) {
    if (!(lambda_a > 0.0) || !(lambda_b > 0.0))
        throw DomainError("jacobian ratio requires strictly positive eigenvalues");

    if (lambda_a == lambda_b)
        return alpha == 0.0 ? -std::log(lambda_a) : (alpha - 1.0) * std::log(lambda_a);

    const double mu = lambda_b / lambda_a - 1.0;
    if (alpha == 0.0) return std::log(std::log1p(mu) / mu) - std::log(lambda_a);
    if (std::abs(mu) < detail::kGapSeriesTol)
        return detail::log_ratio_gap_series(lambda_a, mu, alpha);
    if (std::abs(alpha) < detail::kAlphaSeriesTol)
        return detail::log_ratio_alpha_series(lambda_a, mu, alpha);
    return detail::log_ratio_direct(lambda_a, lambda_b, alpha);
}

/// log |det| of the Jacobian of vech(S) -> vech(S^alpha) as a function of
/// the eigenvalues of S: the eigenvalue derivatives contribute
/// |alpha|^m prod d_i^(alpha-1), the eigen-basis off-diagonals contribute
/// one ratio factor per pair, and together the alpha scales add up to
/// |alpha|^(m(m+1)/2). At alpha = 0 the transform is vech(S) -> vech(log S)
/// with derivative 1/d_i per eigenvalue. Exactly zero at alpha = 1.
inline double log_power_jacobian(std::span<const double> eigenvalues, double alpha) {
    const int m = static_cast<int>(eigenvalues.size());
    double sum = 0.0;
    for (double d : eigenvalues) {
        if (!(d > 0.0))
            throw DomainError("power-transform jacobian requires positive eigenvalues; "
                              "offending eigenvalue " +
                              std::to_string(d));
        sum += (alpha == 0.0 ? -1.0 : alpha - 1.0) * std::log(d);
    }
    if (alpha != 0.0)
        sum += SymMatrix::vech_size(m) * std::log(std::abs(alpha));
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            sum += log_jacobian_ratio(eigenvalues[i], eigenvalues[j], alpha);
    return sum;
}

namespace detail {

struct TransformedSample {
    std::vector<double> x; // vech of the power-transformed matrix
    double log_jac;
};

inline TransformedSample transform_sample(const SpectralDecomp& dec, double alpha) {
    if (classify(dec) != DefinitenessClass::PositiveDefinite)
        throw DomainError("likelihood requires strictly positive-definite tensors; "
                          "offending eigenvalue " +
                          std::to_string(dec.eigenvalues.back()));
    std::vector<double> vals = dec.eigenvalues;
    for (double& d : vals) d = alpha == 0.0 ? std::log(d) : std::pow(d, alpha);
    return TransformedSample{dec.reconstruct(vals).vech(),
                             log_power_jacobian(dec.eigenvalues, alpha)};
}

inline double gaussian_loglik(std::span<const double> x, std::span<const double> mu,
                              const Cholesky& chol, double log_det) {
    std::vector<double> r(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) r[k] = x[k] - mu[k];
    chol.forward_solve(r);
    double quad = 0.0;
    for (double y : r) quad += y * y;
    return -0.5 * (static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi) + log_det +
                   quad);
}

} // namespace detail

/// Log-density of a positive-definite S under the model
/// vech(S^alpha) ~ N(mu, sigma): the Gaussian evaluated at vech(S^alpha)
/// plus the log-Jacobian of the power transform, so that the density
/// integrates to one over the cone. alpha = 0 uses vech(log S).
inline double log_density(const SymMatrix& s, double alpha, const GaussianParams& params) {
    if (params.mu.size() != SymMatrix::vech_size(s.dim()) ||
        params.sigma.dim() != static_cast<int>(params.mu.size()))
        throw std::invalid_argument("parameter size does not match the tensor dimension");
    const detail::TransformedSample ts =
        detail::transform_sample(spectral_decompose(s), alpha);
    const auto chol = Cholesky::factor(params.sigma);
    if (!chol) throw SingularSigmaError("covariance is not positive definite");
    return detail::gaussian_loglik(ts.x, params.mu, *chol, chol->log_det()) + ts.log_jac;
}

struct ProfilePoint {
    double loglik = 0.0;
    GaussianParams params;
};

namespace detail {

inline ProfilePoint profile_core(std::span<const SpectralDecomp> decs, double alpha) {
    const std::size_t n = decs.size();
    const std::size_t p = SymMatrix::vech_size(decs.front().dim());

    std::vector<TransformedSample> ts;
    ts.reserve(n);
    for (const SpectralDecomp& dec : decs) ts.push_back(transform_sample(dec, alpha));

    std::vector<double> mu(p, 0.0);
    for (const TransformedSample& t : ts)
        for (std::size_t k = 0; k < p; ++k) mu[k] += t.x[k];
    for (double& v : mu) v /= static_cast<double>(n);

    // covariance MLE: divisor n
    SymMatrix sigma(static_cast<int>(p));
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) {
            double sum = 0.0;
            for (const TransformedSample& t : ts)
                sum += (t.x[i] - mu[i]) * (t.x[j] - mu[j]);
            sigma.set(static_cast<int>(i), static_cast<int>(j), sum / static_cast<double>(n));
        }

    const SpectralDecomp sig_dec = spectral_decompose(sigma);
    const double lam_max = sig_dec.eigenvalues.front();
    const double lam_min = sig_dec.eigenvalues.back();
    if (!(lam_min > 0.0) || lam_max / lam_min > kSigmaConditionCap)
        throw SingularSigmaError("fitted covariance is singular or ill-conditioned");
    const auto chol = Cholesky::factor(sigma);
    if (!chol) throw SingularSigmaError("fitted covariance is not positive definite");
    const double log_det = chol->log_det();

    double total = 0.0;
    for (const TransformedSample& t : ts)
        total += gaussian_loglik(t.x, mu, *chol, log_det) + t.log_jac;
    return ProfilePoint{total, GaussianParams{std::move(mu), std::move(sigma)}};
}

inline std::vector<SpectralDecomp> decompose_samples(std::span<const SymMatrix> samples) {
    if (samples.empty()) throw EmptyInputError("empty sample");
    const int m = samples.front().dim();
    std::vector<SpectralDecomp> decs;
    decs.reserve(samples.size());
    for (const SymMatrix& s : samples) {
        if (s.dim() != m) throw std::invalid_argument("samples must share a dimension");
        decs.push_back(spectral_decompose(s));
    }
    return decs;
}

} // namespace detail

/// Profile log-likelihood at a fixed alpha: mu and sigma are replaced by
/// their Gaussian MLEs (covariance divisor n) computed from the transformed
/// sample, and the returned value is the summed log-density of the sample at
/// those parameters. Requires n > m(m+1)/2 strictly positive-definite
/// samples. Throws SingularSigmaError when the fitted covariance has
/// condition number above 1e12.
inline ProfilePoint profile_loglik(std::span<const SymMatrix> samples, double alpha) {
    const std::vector<SpectralDecomp> decs = detail::decompose_samples(samples);
    if (samples.size() <= SymMatrix::vech_size(decs.front().dim()))
        throw std::invalid_argument("profile likelihood needs n > m(m+1)/2 samples");
    return detail::profile_core(decs, alpha);
}

inline ProfilePoint profile_loglik(const std::vector<SymMatrix>& samples, double alpha) {
    return profile_loglik(std::span<const SymMatrix>(samples.data(), samples.size()), alpha);
}

/// Evaluation grid for the power parameter. Points are lo, lo+step, ...;
/// anything within 1e-12 of zero is snapped to exactly 0 so the
/// log-Euclidean branch is hit.
struct AlphaGrid {
    double lo = -0.1;
    double hi = 0.7;
    double step = 0.02;

    std::vector<double> points() const {
        if (!(std::isfinite(lo) && std::isfinite(hi) && lo <= hi))
            throw std::invalid_argument("alpha grid requires finite lo <= hi");
        if (!(step > 0.0)) throw std::invalid_argument("alpha grid step must be positive");
        const std::size_t count =
            static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
        std::vector<double> pts(count);
        for (std::size_t i = 0; i < count; ++i) {
            double a = lo + static_cast<double>(i) * step;
            if (std::abs(a) < 1e-12) a = 0.0;
            pts[i] = a;
        }
        return pts;
    }
};

/// Result of the profile sweep. loglik holds one value per grid point with
/// NaN marking points whose covariance fit failed; failed points never enter
/// the argmax or the confidence interval.
struct AlphaFit {
    AlphaGrid grid;
    std::vector<double> loglik;
    double alpha_hat = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    GaussianParams params_at_mle;
    std::size_t n = 0;
};

inline bool is_failure_marker(double loglik) { return std::isnan(loglik); }

/// Default half-width of the Wilks interval on the log-likelihood scale.
/// The asymptotically exact value chi2_{1,0.95}/2 = 1.9207 may be passed
/// instead.
inline constexpr double kDefaultCiDrop = 2.0;

/// Profile-likelihood estimate of alpha over a grid. alpha_hat is the
/// arg-max grid point (ties resolved toward the point closest to zero, then
/// the smaller alpha); the confidence interval spans the grid points whose
/// profile log-likelihood lies within ci_drop of the maximum.
inline AlphaFit fit_alpha(std::span<const SymMatrix> samples, const AlphaGrid& grid,
                          double ci_drop = kDefaultCiDrop) {
    if (!(ci_drop > 0.0)) throw std::invalid_argument("ci_drop must be positive");
    const std::vector<SpectralDecomp> decs = detail::decompose_samples(samples);
    if (samples.size() <= SymMatrix::vech_size(decs.front().dim()))
        throw std::invalid_argument("profile likelihood needs n > m(m+1)/2 samples");
    for (const SpectralDecomp& dec : decs) {
        if (classify(dec) != DefinitenessClass::PositiveDefinite)
            throw DomainError("likelihood requires strictly positive-definite tensors; "
                              "offending eigenvalue " +
                              std::to_string(dec.eigenvalues.back()));
    }

    const std::vector<double> pts = grid.points();
    AlphaFit fit;
    fit.grid = grid;
    fit.n = samples.size();
    fit.loglik.assign(pts.size(), std::numeric_limits<double>::quiet_NaN());

    for (std::size_t i = 0; i < pts.size(); ++i) {
        try {
            fit.loglik[i] = detail::profile_core(decs, pts[i]).loglik;
        } catch (const SingularSigmaError&) {
            // failure marker stays in place
        }
    }

    bool found = false;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double ll = fit.loglik[i];
        if (is_failure_marker(ll)) continue;
        const bool better =
            !found || ll > best ||
            (ll == best && (std::abs(pts[i]) < std::abs(fit.alpha_hat) ||
                            (std::abs(pts[i]) == std::abs(fit.alpha_hat) &&
                             pts[i] < fit.alpha_hat)));
        if (better) {
            found = true;
            best = ll;
            fit.alpha_hat = pts[i];
        }
    }
    if (!found) throw AllPointsFailedError("no grid point yielded a valid likelihood");

    fit.ci_lo = fit.alpha_hat;
    fit.ci_hi = fit.alpha_hat;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (fit.loglik[i] >= best - ci_drop) {
            fit.ci_lo = std::min(fit.ci_lo, pts[i]);
            fit.ci_hi = std::max(fit.ci_hi, pts[i]);
        }
    }
    fit.params_at_mle = detail::profile_core(decs, fit.alpha_hat).params;
    return fit;
}

inline AlphaFit fit_alpha(const std::vector<SymMatrix>& samples, const AlphaGrid& grid,
                          double ci_drop = kDefaultCiDrop) {
    return fit_alpha(std::span<const SymMatrix>(samples.data(), samples.size()), grid, ci_drop);
}

} // namespace spdpower
