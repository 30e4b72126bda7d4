#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spdpower/metrics.hpp"
#include "support/test_util.hpp"

using namespace spdpower;
using testutil::frob_dist;

namespace {

// brute-force Procrustes oracle for 2x2: scan rotations and reflections over
// a fine angle grid, then refine by golden section around the best angle
double procrustes_brute_force_2x2(const SymMatrix& s1, const SymMatrix& s2, double alpha) {
    const Matrix a = to_dense(matrix_power(s1, alpha));
    const Matrix b = to_dense(matrix_power(s2, alpha));
    const auto objective = [&](double theta, bool reflect) {
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        // R = rotation(theta) * diag(1, +-1)
        const double r00 = c, r01 = reflect ? s : -s;
        const double r10 = s, r11 = reflect ? -c : c;
        const double e00 = a(0, 0) - (b(0, 0) * r00 + b(0, 1) * r10);
        const double e01 = a(0, 1) - (b(0, 0) * r01 + b(0, 1) * r11);
        const double e10 = a(1, 0) - (b(1, 0) * r00 + b(1, 1) * r10);
        const double e11 = a(1, 1) - (b(1, 0) * r01 + b(1, 1) * r11);
        return std::sqrt(e00 * e00 + e01 * e01 + e10 * e10 + e11 * e11);
    };

    double best = std::numeric_limits<double>::infinity();
    for (int reflect = 0; reflect < 2; ++reflect) {
        double best_theta = 0.0;
        double best_val = std::numeric_limits<double>::infinity();
        const int steps = 4000;
        for (int k = 0; k < steps; ++k) {
            const double theta = 2.0 * std::numbers::pi * k / steps;
            const double v = objective(theta, reflect != 0);
            if (v < best_val) {
                best_val = v;
                best_theta = theta;
            }
        }
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = best_theta - 2.0 * std::numbers::pi / steps;
        double hi = best_theta + 2.0 * std::numbers::pi / steps;
        for (int it = 0; it < 80; ++it) {
            const double x1 = hi - gr * (hi - lo);
            const double x2 = lo + gr * (hi - lo);
            if (objective(x1, reflect != 0) < objective(x2, reflect != 0))
                hi = x2;
            else
                lo = x1;
        }
        best = std::min(best, objective(0.5 * (lo + hi), reflect != 0));
    }
    return best / std::abs(alpha);
}

} // namespace

// ============================================================================
// log-Euclidean and power distances
// ============================================================================

TEST_CASE("dist_log_euclidean: hand values") {
    const double e = std::exp(1.0);
    CHECK(dist_log_euclidean(SymMatrix::identity(3), SymMatrix::identity(3)) == 0.0);
    CHECK(dist_log_euclidean(SymMatrix::diagonal({e * e, 1.0, 1.0}), SymMatrix::identity(3)) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(dist_log_euclidean(SymMatrix::diagonal({e, e}), SymMatrix::diagonal({1.0, 1.0})) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(dist_log_euclidean(SymMatrix::diagonal({1.0, 0.0}), SymMatrix::identity(2)),
                    DomainError);
}

TEST_CASE("dist_power: hand values and log-Euclidean dispatch") {
    const SymMatrix a = SymMatrix::diagonal({2.0, 1.0, 1.0});
    const SymMatrix i3 = SymMatrix::identity(3);
    CHECK(dist_power(a, i3, PowerParam(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(dist_power(a, i3, PowerParam(2.0)) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(dist_power(a, i3, PowerParam(0.0)) ==
          doctest::Approx(dist_log_euclidean(a, i3)).epsilon(1e-15));
}

TEST_CASE("dist_power: approaches the log-Euclidean metric as alpha -> 0") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const SymMatrix s1 = testutil::random_spd(rng, 3, 0.5, 2.0);
        const SymMatrix s2 = testutil::random_spd(rng, 3, 0.5, 2.0);
        const double dl = dist_log_euclidean(s1, s2);
        const double da = dist_power(s1, s2, PowerParam(1e-4));
        CHECK(std::abs(da - dl) <= 1e-3 * dl);
    }
}

TEST_CASE("dist_power: metric axioms on sampled triples") {
    Rng rng(37);
    for (double alpha : {-0.5, 0.5, 1.0, 2.0}) {
        const PowerParam p(alpha);
        for (int trial = 0; trial < 40; ++trial) {
            const SymMatrix x = testutil::random_spd(rng, 3, 0.2, 5.0);
            const SymMatrix y = testutil::random_spd(rng, 3, 0.2, 5.0);
            const SymMatrix z = testutil::random_spd(rng, 3, 0.2, 5.0);
            const double dxy = dist_power(x, y, p);
            CHECK(dxy >= 0.0);
            CHECK(dist_power(x, x, p) == 0.0);
            CHECK(dxy == dist_power(y, x, p)); // exact: same squares
            CHECK(dxy <= dist_power(x, z, p) + dist_power(z, y, p) + 1e-10);
        }
    }
}

TEST_CASE("dist_power: invariant under orthogonal conjugation") {
    Rng rng(41);
    for (double alpha : {-0.5, 0.5, 2.0}) {
        for (int trial = 0; trial < 30; ++trial) {
            const SymMatrix s1 = testutil::random_spd(rng, 3, 0.2, 5.0);
            const SymMatrix s2 = testutil::random_spd(rng, 3, 0.2, 5.0);
            const Matrix q = testutil::random_orthogonal(rng, 3);
            const double d0 = dist_power(s1, s2, PowerParam(alpha));
            const double d1 = dist_power(testutil::conjugate(q, s1),
                                         testutil::conjugate(q, s2), PowerParam(alpha));
            CHECK(d1 == doctest::Approx(d0).epsilon(1e-8));
        }
    }
}

// ============================================================================
// frobenius norm
// ============================================================================

TEST_CASE("frobenius_norm: hand values") {
    CHECK(frobenius_norm(SymMatrix::identity(3)) == doctest::Approx(std::sqrt(3.0)));
    CHECK(frobenius_norm(SymMatrix::diagonal({3.0, 4.0})) == doctest::Approx(5.0));
    SymMatrix off(2);
    off.set(0, 1, 1.0);
    CHECK(frobenius_norm(off) == doctest::Approx(std::sqrt(2.0))); // both copies count
}

// ============================================================================
// Procrustes power metric
// ============================================================================

TEST_CASE("procrustes: identical inputs give zero and identity rotation") {
    Rng rng(43);
    const SymMatrix s = testutil::random_spd(rng, 3, 0.3, 4.0);
    for (double alpha : {0.5, 1.0, -0.5}) {
        const ProcrustesResult res = dist_procrustes_power(s, s, PowerParam(alpha));
        CHECK(res.distance <= 1e-10);
        double err2 = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double target = i == j ? 1.0 : 0.0;
                err2 += (res.rotation(i, j) - target) * (res.rotation(i, j) - target);
            }
        CHECK(std::sqrt(err2) <= 1e-8);
    }
}

TEST_CASE("procrustes: hand case diag(4,1) vs identity at alpha 1/2") {
    const ProcrustesResult res = dist_procrustes_power(SymMatrix::diagonal({4.0, 1.0}),
                                                       SymMatrix::identity(2), PowerParam(0.5));
    CHECK(res.distance == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(res.rotation(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.rotation(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(res.rotation(0, 1)) <= 1e-12);
}

TEST_CASE("procrustes: bounded by the power distance, orthogonal rotation") {
    Rng rng(47);
    const PowerParam p(0.5);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = trial % 2 ? 2 : 3;
        const SymMatrix s1 = testutil::random_spd(rng, m, 0.2, 5.0);
        const SymMatrix s2 = testutil::random_spd(rng, m, 0.2, 5.0);
        const ProcrustesResult res = dist_procrustes_power(s1, s2, p);
        CHECK(res.distance >= 0.0);
        CHECK(res.distance <= dist_power(s1, s2, p) + 1e-12);

        // R R^T = I to 1e-10
        double err2 = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                double dot = 0.0;
                for (int k = 0; k < m; ++k) dot += res.rotation(i, k) * res.rotation(j, k);
                const double target = i == j ? 1.0 : 0.0;
                err2 += (dot - target) * (dot - target);
            }
        CHECK(std::sqrt(err2) <= 1e-10);

        const ProcrustesResult rev = dist_procrustes_power(s2, s1, p);
        CHECK(rev.distance == doctest::Approx(res.distance).epsilon(1e-8));
    }
}

TEST_CASE("procrustes: distance satisfies its own definition") {
    // returned distance equals (1/alpha) ||S1^a - S2^a R|| for the returned R
    Rng rng(59);
    const double alpha = 0.5;
    for (int trial = 0; trial < 50; ++trial) {
        const SymMatrix s1 = testutil::random_spd(rng, 3, 0.2, 5.0);
        const SymMatrix s2 = testutil::random_spd(rng, 3, 0.2, 5.0);
        const ProcrustesResult res = dist_procrustes_power(s1, s2, PowerParam(alpha));
        const Matrix a = to_dense(matrix_power(s1, alpha));
        const Matrix br = to_dense(matrix_power(s2, alpha)) * res.rotation;
        double sum = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double d = a(i, j) - br(i, j);
                sum += d * d;
            }
        CHECK(res.distance == doctest::Approx(std::sqrt(sum) / alpha).epsilon(1e-12));
    }
}

TEST_CASE("procrustes: matches brute-force minimization on 2x2") {
    Rng rng(53);
    for (int trial = 0; trial < 40; ++trial) {
        const SymMatrix s1 = testutil::random_spd(rng, 2, 0.2, 5.0);
        const SymMatrix s2 = testutil::random_spd(rng, 2, 0.2, 5.0);
        const double oracle = procrustes_brute_force_2x2(s1, s2, 0.5);
        const double got = dist_procrustes_power(s1, s2, PowerParam(0.5)).distance;
        CHECK(got == doctest::Approx(oracle).epsilon(1e-6));
        CHECK(got <= oracle + 1e-9); // never worse than any sampled rotation
    }
}

TEST_CASE("procrustes: rank-deficient cross-product stays finite and optimal") {
    // S1^a and S2^a have orthogonal ranges; the objective is flat in R
    const SymMatrix s1 = SymMatrix::diagonal({1.0, 0.0});
    const SymMatrix s2 = SymMatrix::diagonal({0.0, 1.0});
    const ProcrustesResult res = dist_procrustes_power(s1, s2, PowerParam(0.5));
    CHECK(res.distance == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(res.distance ==
          doctest::Approx(procrustes_brute_force_2x2(s1, s2, 0.5)).epsilon(1e-9));
}

TEST_CASE("procrustes: rejected at alpha = 0") {
    CHECK_THROWS_AS(
        dist_procrustes_power(SymMatrix::identity(2), SymMatrix::identity(2), PowerParam(0.0)),
        DomainError);
}
