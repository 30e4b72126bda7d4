#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "spdpower/errors.hpp"
#include "spdpower/likelihood.hpp"
#include "spdpower/matrix.hpp"
#include "spdpower/parallel.hpp"
#include "spdpower/rng.hpp"
#include "spdpower/spectral.hpp"
#include "spdpower/textio.hpp"

namespace spdpower {

/// Monte Carlo design: vech(X) ~ N(mu, sigma2 I) and the tensor is
/// S = (alpha_true X)^(1/alpha_true). Defaults: 3x3 tensors around
/// diag(2,1,1) with sigma2 = 0.02, alpha_true = 0.3, grid [-0.1, 0.7] in
/// steps of 0.02.
struct SimDesign {
    int m = 3;
    std::vector<double> mu = {2.0, 0.0, 0.0, 1.0, 0.0, 1.0}; // vech(diag(2,1,1))
    double sigma2 = 0.02;
    double alpha_true = 0.3;
    int n_v = 0;
    int n_s = 0;
    AlphaGrid grid{};
    double ci_drop = kDefaultCiDrop;
    int replications = 1000;
    std::uint64_t seed = 1;
    int threads = 1;

    int sample_count() const { return n_v * n_s; }

    void validate() const {
        if (m < 1) throw std::invalid_argument("dimension must be >= 1");
        if (mu.size() != SymMatrix::vech_size(m))
            throw std::invalid_argument("mu must have length m(m+1)/2");
        if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
        if (alpha_true == 0.0)
            throw std::invalid_argument("the sampling transform needs alpha_true != 0");
        if (replications < 1) throw std::invalid_argument("replications must be >= 1");
        if (n_v < 1 || n_s < 1) throw std::invalid_argument("n_v and n_s must be >= 1");
        if (static_cast<std::size_t>(sample_count()) <= SymMatrix::vech_size(m))
            throw std::invalid_argument("n_v * n_s must exceed m(m+1)/2");
        if (!(ci_drop > 0.0)) throw std::invalid_argument("ci_drop must be positive");
        grid.points(); // validates the grid
    }
};

struct CoverageReport {
    SimDesign design;
    double coverage = 0.0;  // fraction of successful replications covering alpha_true
    double mc_stderr = 0.0; // sqrt(p (1-p) / replications)
    int failures = 0;       // replications where the sweep had no valid point
};

namespace detail {

inline constexpr int kRejectionCap = 100;

} // namespace detail

/// One draw from the design: vech(X) i.i.d. Gaussian around mu, redrawn
/// (up to 100 attempts) until alpha_true * X is positive definite, then
/// powered to 1/alpha_true. Rejections are counted into *rejections when
/// given.
inline SymMatrix sample_tensor(const SimDesign& design, Rng& rng, int* rejections = nullptr) {
    const double sd = std::sqrt(design.sigma2);
    const std::size_t p = SymMatrix::vech_size(design.m);
    std::vector<double> v(p);
    for (int attempt = 0; attempt < detail::kRejectionCap; ++attempt) {
        for (std::size_t k = 0; k < p; ++k)
            v[k] = design.alpha_true * (design.mu[k] + sd * rng.next_gaussian());
        const SpectralDecomp dec = spectral_decompose(unvech(v, design.m));
        if (classify(dec) == DefinitenessClass::PositiveDefinite) {
            std::vector<double> lam = dec.eigenvalues;
            for (double& d : lam) d = std::pow(d, 1.0 / design.alpha_true);
            return dec.reconstruct(lam);
        }
        if (rejections) ++(*rejections);
    }
    throw RejectionLimitError("no positive-definite draw after " +
                              std::to_string(detail::kRejectionCap) +
                              " attempts; the design is infeasible");
}

/// Runs the coverage study: per replication, n_v * n_s i.i.d. tensors are
/// drawn from the design's substream, alpha is fitted over the grid, and a
/// hit is recorded when alpha_true lies in the Wilks interval. Failed sweeps
/// are excluded from the coverage denominator and reported separately.
/// Bit-identical for a fixed design (including seed), whatever the thread
/// count.
inline CoverageReport run_coverage(const SimDesign& design) {
    design.validate();
    const std::size_t reps = static_cast<std::size_t>(design.replications);
    enum : std::uint8_t { kMiss = 0, kHit = 1, kFailed = 2 };
    std::vector<std::uint8_t> status(reps, kMiss);

    parallel_for(reps, design.threads, [&](std::size_t rep) {
        Rng rng = Rng::substream(design.seed, rep);
        std::vector<SymMatrix> samples;
        samples.reserve(design.sample_count());
        for (int i = 0; i < design.sample_count(); ++i)
            samples.push_back(sample_tensor(design, rng));
        try {
            const AlphaFit fit = fit_alpha(samples, design.grid, design.ci_drop);
            // grid points carry float-step noise; compare with a slack far
            // below the grid resolution
            const double slack = 1e-9;
            status[rep] = (design.alpha_true >= fit.ci_lo - slack &&
                           design.alpha_true <= fit.ci_hi + slack)
                              ? kHit
                              : kMiss;
        } catch (const AllPointsFailedError&) {
            status[rep] = kFailed;
        }
    });

    int hits = 0;
    int failures = 0;
    for (std::uint8_t s : status) {
        if (s == kHit) ++hits;
        if (s == kFailed) ++failures;
    }
    const int successes = design.replications - failures;
    CoverageReport report;
    report.design = design;
    report.failures = failures;
    report.coverage = successes > 0 ? static_cast<double>(hits) / successes : 0.0;
    report.mc_stderr =
        std::sqrt(report.coverage * (1.0 - report.coverage) / design.replications);
    return report;
}

inline std::string coverage_csv_header() {
    return "n_v,n_s,replications,coverage,mc_stderr,failures,seed";
}

inline std::string coverage_csv_row(const CoverageReport& r) {
    return std::to_string(r.design.n_v) + "," + std::to_string(r.design.n_s) + "," +
           std::to_string(r.design.replications) + "," + format_double(r.coverage) + "," +
           format_double(r.mc_stderr) + "," + std::to_string(r.failures) + "," +
           std::to_string(r.design.seed);
}

inline std::string coverage_json(const CoverageReport& r) {
    return std::string("{\"schema_version\":1,\"n_v\":") + std::to_string(r.design.n_v) +
           ",\"n_s\":" + std::to_string(r.design.n_s) +
           ",\"replications\":" + std::to_string(r.design.replications) +
           ",\"coverage\":" + format_double(r.coverage) +
           ",\"mc_stderr\":" + format_double(r.mc_stderr) +
           ",\"failures\":" + std::to_string(r.failures) +
           ",\"seed\":" + std::to_string(r.design.seed) + "}";
}

} // namespace spdpower
