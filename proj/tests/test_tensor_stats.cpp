#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "spdpower/tensor_stats.hpp"
#include "support/test_util.hpp"

using namespace spdpower;
using testutil::frob_dist;

namespace {

// brute-force Frechet oracle: minimize the sum of squared power distances
// directly over vech space (Nelder-Mead plus a Newton polish), no use of the
// closed form
SymMatrix frechet_brute_force(const std::vector<SymMatrix>& samples, PowerParam p) {
    const int m = samples.front().dim();
    const auto objective = [&](std::span<const double> v) {
        try {
            const SymMatrix candidate = unvech(v, m);
            double sum = 0.0;
            for (const SymMatrix& s : samples) {
                const double d = dist_power(s, candidate, p);
                sum += d * d;
            }
            return sum;
        } catch (const DomainError&) {
            return 1e100; // outside the cone
        }
    };
    // start from the Euclidean mean
    SymMatrix start(m);
    for (const SymMatrix& s : samples) start += s;
    start *= 1.0 / static_cast<double>(samples.size());
    std::vector<double> x = start.vech();
    testutil::nelder_mead(objective, x, 0.25, 4000);
    testutil::newton_polish(objective, x, 60);
    return unvech(x, m);
}

} // namespace

// ============================================================================
// Frechet mean
// ============================================================================

TEST_CASE("frechet_mean: constant sample returns the sample") {
    Rng rng(61);
    const SymMatrix s = testutil::random_spd(rng, 3, 0.3, 4.0);
    for (double alpha : {-0.5, 0.0, 0.5, 1.0, 2.0}) {
        const std::vector<SymMatrix> samples = {s, s, s};
        CHECK(frob_dist(frechet_mean(samples, PowerParam(alpha)).mean, s) <= 1e-10);
    }
}

TEST_CASE("frechet_mean: arithmetic and geometric special cases") {
    const std::vector<SymMatrix> a = {SymMatrix::diagonal({2.0, 0.0}),
                                      SymMatrix::diagonal({0.0, 2.0})};
    CHECK(frob_dist(frechet_mean(a, PowerParam(1.0)).mean, SymMatrix::identity(2)) <= 1e-14);

    const double e = std::exp(1.0);
    const std::vector<SymMatrix> b = {SymMatrix::diagonal({e * e, 1.0}), SymMatrix::identity(2)};
    CHECK(frob_dist(frechet_mean(b, PowerParam(0.0)).mean, SymMatrix::diagonal({e, 1.0})) <=
          1e-12);
}

TEST_CASE("frechet_mean: matches the brute-force minimizer") {
    Rng rng(67);
    for (double alpha : {-0.5, 0.0, 0.5, 1.0, 2.0}) {
        for (int trial = 0; trial < 4; ++trial) {
            const int m = trial % 2 ? 3 : 2;
            const int n = 3 + static_cast<int>(rng.next_u64() % 4);
            std::vector<SymMatrix> samples;
            for (int i = 0; i < n; ++i) samples.push_back(testutil::random_spd(rng, m, 0.4, 3.0));
            const SymMatrix closed = frechet_mean(samples, PowerParam(alpha)).mean;
            const SymMatrix brute = frechet_brute_force(samples, PowerParam(alpha));
            CHECK(frob_dist(closed, brute) <= 1e-5);
        }
    }
}

TEST_CASE("frechet_mean: result stays in the cone") {
    Rng rng(71);
    for (double alpha : {-0.5, 0.0, 0.5, 2.0}) {
        std::vector<SymMatrix> samples;
        for (int i = 0; i < 5; ++i) samples.push_back(testutil::random_spd(rng, 3, 0.2, 6.0));
        const SymMatrix mean = frechet_mean(samples, PowerParam(alpha)).mean;
        const DefinitenessClass cls = classify(mean);
        if (alpha == 0.0)
            CHECK(cls == DefinitenessClass::PositiveDefinite);
        else
            CHECK(cls != DefinitenessClass::Indefinite);
    }
}

TEST_CASE("frechet_mean: smaller alpha resists the outlier more") {
    const double k = 100.0;
    const std::vector<SymMatrix> samples = {SymMatrix::identity(3),
                                            SymMatrix::diagonal({k, 1.0, 1.0})};
    const double m_half = frechet_mean(samples, PowerParam(0.5)).mean(0, 0);
    const double m_one = frechet_mean(samples, PowerParam(1.0)).mean(0, 0);
    CHECK(m_one == doctest::Approx((k + 1.0) / 2.0).epsilon(1e-12));
    CHECK(m_half < m_one);
}

TEST_CASE("frechet_mean: errors") {
    CHECK_THROWS_AS(frechet_mean(std::vector<SymMatrix>{}, PowerParam(1.0)), EmptyInputError);
    // negative alpha needs strictly positive-definite samples
    const std::vector<SymMatrix> singular = {SymMatrix::diagonal({1.0, 0.0}),
                                             SymMatrix::identity(2)};
    CHECK_THROWS_AS(frechet_mean(singular, PowerParam(-0.5)), DomainError);
    const std::vector<SymMatrix> mixed = {SymMatrix::identity(2), SymMatrix::identity(3)};
    CHECK_THROWS_AS(frechet_mean(mixed, PowerParam(1.0)), std::invalid_argument);
}

// ============================================================================
// fractional anisotropy
// ============================================================================

TEST_CASE("fa: hand values") {
    for (double alpha : {-0.5, 0.5, 1.0, 2.0})
        CHECK(fractional_anisotropy(SymMatrix::identity(3), PowerParam(alpha)) ==
              doctest::Approx(0.0).epsilon(1e-14));
    // eigenvalues (2,1,1) at alpha 1: sqrt(1/6)
    CHECK(fractional_anisotropy(SymMatrix::diagonal({2.0, 1.0, 1.0}), PowerParam(1.0)) ==
          doctest::Approx(std::sqrt(1.0 / 6.0)).epsilon(1e-13));
    // maximal anisotropy
    CHECK(fractional_anisotropy(SymMatrix::diagonal({1.0, 0.0, 0.0}), PowerParam(1.0)) ==
          doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("fa: scale and rotation invariant, bounded") {
    Rng rng(73);
    for (int trial = 0; trial < 50; ++trial) {
        const SymMatrix s = testutil::random_spd(rng, 3, 0.2, 5.0);
        for (double alpha : {-0.5, 0.5, 1.0, 2.0}) {
            const double fa = fractional_anisotropy(s, PowerParam(alpha));
            CHECK(fa >= 0.0);
            CHECK(fa <= 1.0);
            const double fa_scaled = fractional_anisotropy(s * 3.7, PowerParam(alpha));
            CHECK(std::abs(fa_scaled - fa) <= 1e-10);
            const Matrix q = testutil::random_orthogonal(rng, 3);
            const double fa_rot =
                fractional_anisotropy(testutil::conjugate(q, s), PowerParam(alpha));
            CHECK(fa_rot == doctest::Approx(fa).epsilon(1e-9));
        }
    }
}

TEST_CASE("fa: degenerate and domain errors") {
    CHECK_THROWS_AS(fractional_anisotropy(SymMatrix(3), PowerParam(1.0)), DegenerateError);
    CHECK_THROWS_AS(fractional_anisotropy(SymMatrix::diagonal({1.0, 0.0, 0.0}), PowerParam(-1.0)),
                    DomainError);
}

// ============================================================================
// interpolation
// ============================================================================

TEST_CASE("interpolate: endpoints reproduce the inputs") {
    Rng rng(79);
    const SymMatrix s1 = testutil::random_spd(rng, 3, 0.3, 4.0);
    const SymMatrix s2 = testutil::random_spd(rng, 3, 0.3, 4.0);
    for (double alpha : {0.0, 0.5, 1.0, 2.0}) {
        CHECK(frob_dist(interpolate(s1, s2, 0.0, PowerParam(alpha)), s1) <= 1e-8);
        CHECK(frob_dist(interpolate(s1, s2, 1.0, PowerParam(alpha)), s2) <= 1e-8);
    }
}

TEST_CASE("interpolate: hand values") {
    CHECK(frob_dist(
              interpolate(SymMatrix::diagonal({2.0, 2.0}), SymMatrix::diagonal({4.0, 4.0}), 0.5,
                          PowerParam(1.0)),
              SymMatrix::diagonal({3.0, 3.0})) <= 1e-14);
    CHECK(frob_dist(
              interpolate(SymMatrix::diagonal({1.0, 1.0}), SymMatrix::diagonal({3.0, 1.0}), 0.5,
                          PowerParam(2.0)),
              SymMatrix::diagonal({std::sqrt(5.0), 1.0})) <= 1e-13);
}

TEST_CASE("interpolate: traces the straight line in transformed coordinates") {
    Rng rng(83);
    for (double alpha : {0.0, 0.5, 2.0}) {
        const PowerParam p(alpha);
        for (int trial = 0; trial < 20; ++trial) {
            const SymMatrix s1 = testutil::random_spd(rng, 3, 0.3, 4.0);
            const SymMatrix s2 = testutil::random_spd(rng, 3, 0.3, 4.0);
            const double d = dist_power(s1, s2, p);
            for (double t : {0.25, 0.5, 0.75}) {
                const SymMatrix mid = interpolate(s1, s2, t, p);
                CHECK(dist_power(s1, mid, p) == doctest::Approx(t * d).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("interpolate: extrapolation rejected") {
    const SymMatrix i2 = SymMatrix::identity(2);
    CHECK_THROWS_AS(interpolate(i2, i2, -0.1, PowerParam(1.0)), std::invalid_argument);
    CHECK_THROWS_AS(interpolate(i2, i2, 1.1, PowerParam(1.0)), std::invalid_argument);
}
