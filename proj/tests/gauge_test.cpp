#include "ccc/gauge.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ccc/errors.hpp"
#include "ccc/factorization.hpp"

namespace {

using ccc::Factorization;
using ccc::SampleFunction;
using ccc::ScaleSpec;
using ccc::WeightedSpace;
using ccc::minimal_factorization;
using ccc::orlicz_distance;

std::vector<double> random_values(std::mt19937& rng, std::size_t n, double lo,
                                  double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

WeightedSpace random_space(std::mt19937& rng, std::size_t n,
                           bool with_zeros = true) {
    std::uniform_real_distribution<double> u(0.1, 2.0);
    std::bernoulli_distribution zero(0.2);
    std::vector<double> w(n);
    for (double& x : w) x = (with_zeros && zero(rng)) ? 0.0 : u(rng);
    if (*std::max_element(w.begin(), w.end()) == 0.0) w[0] = 1.0;
    return WeightedSpace(std::move(w));
}

WeightedSpace probability_space(std::mt19937& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.1, 2.0);
    std::vector<double> w(n);
    double sum = 0.0;
    for (double& x : w) sum += (x = u(rng));
    for (double& x : w) x /= sum;
    return WeightedSpace(std::move(w));
}

// Closed form for theta = r^p: (sum w |f-g|^p)^(1/p) if p >= 1,
// sum w |f-g|^p if p <= 1.
double p_power_reference(const std::vector<double>& f,
                         const std::vector<double>& g,
                         const WeightedSpace& w, double p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        acc += w.weight(i) * std::pow(std::abs(f[i] - g[i]), p);
    return p >= 1.0 ? std::pow(acc, 1.0 / p) : acc;
}

TEST(Gauge, MatchesPPowerClosedForm) {
    std::mt19937 rng(7);
    for (double p : {0.5, 1.0, 2.0, 3.0}) {
        const Factorization fact = minimal_factorization(ScaleSpec::power(p));
        for (int rep = 0; rep < 20; ++rep) {
            const std::size_t n = 2 + rng() % 31;
            const auto fv = random_values(rng, n, -3.0, 3.0);
            const auto gv = random_values(rng, n, -3.0, 3.0);
            const WeightedSpace w = random_space(rng, n);
            const double want = p_power_reference(fv, gv, w, p);
            const auto res = orlicz_distance(SampleFunction(fv),
                                             SampleFunction(gv), fact, w);
            EXPECT_NEAR(res.distance, want, 1e-7 * (1.0 + want))
                << "p=" << p << " rep=" << rep;
            EXPECT_LE(res.modular_at_t, 1.0 + 1e-12);
        }
    }
}

TEST(Gauge, ZeroForEqualInputs) {
    const Factorization fact = minimal_factorization(ScaleSpec::exp_sqrt());
    const SampleFunction f({0.3, -1.0, 2.5});
    const auto res = orlicz_distance(f, f, fact, WeightedSpace({1, 2, 3}));
    EXPECT_DOUBLE_EQ(res.distance, 0.0);
    EXPECT_EQ(res.bisection_iterations, 0);
}

TEST(Gauge, MetricAxioms) {
    const Factorization fact = minimal_factorization(ScaleSpec::exp_sqrt());
    std::mt19937 rng(11);
    const std::size_t n = 8;
    for (int rep = 0; rep < 25; ++rep) {
        const WeightedSpace w = random_space(rng, n, false);
        const SampleFunction f(random_values(rng, n, -2.0, 2.0));
        const SampleFunction g(random_values(rng, n, -2.0, 2.0));
        const SampleFunction h(random_values(rng, n, -2.0, 2.0));
        const double dfg = orlicz_distance(f, g, fact, w).distance;
        const double dgf = orlicz_distance(g, f, fact, w).distance;
        const double dgh = orlicz_distance(g, h, fact, w).distance;
        const double dfh = orlicz_distance(f, h, fact, w).distance;
        EXPECT_DOUBLE_EQ(dfg, dgf);
        EXPECT_LE(dfh, dfg + dgh + 1e-8);
        EXPECT_GT(dfg, 0.0);
    }
}

TEST(Gauge, TranslationInvarianceIsExact) {
    // With dyadic inputs the differences are computed exactly, so the whole
    // bisection replays bit for bit.
    const Factorization fact = minimal_factorization(ScaleSpec::exp_sqrt());
    const WeightedSpace w({0.5, 0.25, 1.0, 0.75});
    const SampleFunction f({0.125, -1.5, 2.0, 0.0});
    const SampleFunction g({1.0, 0.25, -0.5, 3.0});
    std::vector<double> fs, gs;
    for (double x : f.values()) fs.push_back(x + 0.5);
    for (double x : g.values()) gs.push_back(x + 0.5);
    const auto a = orlicz_distance(f, g, fact, w);
    const auto b =
        orlicz_distance(SampleFunction(fs), SampleFunction(gs), fact, w);
    EXPECT_DOUBLE_EQ(a.distance, b.distance);
    EXPECT_DOUBLE_EQ(a.modular_at_t, b.modular_at_t);
}

TEST(Gauge, NormHomogeneityForConvexScales) {
    // For convex theta the inner factor is the identity and the gauge is a
    // norm of f - g, hence positively homogeneous.
    std::mt19937 rng(23);
    for (const auto& theta : {ScaleSpec::power(2.0), ScaleSpec::exp_minus_one()}) {
        const Factorization fact = minimal_factorization(theta);
        for (double lambda : {0.25, 3.0}) {
            for (int rep = 0; rep < 10; ++rep) {
                const std::size_t n = 3 + rng() % 10;
                const WeightedSpace w = probability_space(rng, n);
                const auto fv = random_values(rng, n, -1.0, 1.0);
                const auto gv = random_values(rng, n, -1.0, 1.0);
                std::vector<double> fl(n), gl(n);
                for (std::size_t i = 0; i < n; ++i) {
                    fl[i] = lambda * fv[i];
                    gl[i] = lambda * gv[i];
                }
                const double base = orlicz_distance(SampleFunction(fv),
                                                    SampleFunction(gv), fact, w)
                                        .distance;
                const double scaled = orlicz_distance(SampleFunction(fl),
                                                      SampleFunction(gl), fact, w)
                                          .distance;
                EXPECT_NEAR(scaled, lambda * base, 1e-8 * (1.0 + lambda * base))
                    << theta.label() << " lambda=" << lambda;
            }
        }
    }
}

TEST(Gauge, JensenComparisonWithUnitFixedOuter) {
    // Post-composing the convex factor with a convex Phi fixing 1 can only
    // increase the distance when the weights form a probability. The lifted
    // distance must share the inner factor, hence compose_outer rather than
    // a fresh minimal factorization of Phi o theta.
    std::mt19937 rng(31);
    const std::vector<std::pair<ScaleSpec, double>> bases = {
        {ScaleSpec::exp_sqrt(), 40.0}, {ScaleSpec::power(0.5), 1e5}};
    for (const auto& [theta, r_max] : bases) {
        const Factorization base = minimal_factorization(theta, 2048, r_max);
        for (const auto& outer : ccc::jensen_outer_catalog()) {
            ccc::require_unit_fixed_point(outer);
            const Factorization lifted = ccc::compose_outer(outer, base);
            const double span = 0.45 * std::min(lifted.psi_hat.x_max(), 10.0);
            for (int rep = 0; rep < 8; ++rep) {
                const std::size_t n = 3 + rng() % 10;
                const WeightedSpace w = probability_space(rng, n);
                const SampleFunction f(random_values(rng, n, -span, span));
                const SampleFunction g(random_values(rng, n, -span, span));
                const double d_base = orlicz_distance(f, g, base, w).distance;
                const double d_lift = orlicz_distance(f, g, lifted, w).distance;
                EXPECT_GE(d_lift, d_base - 1e-8 * (1.0 + d_base))
                    << theta.label() << " under " << outer.label();
            }
        }
    }
}

TEST(Gauge, MinimalRefactorizationOfComposedCanShrinkDistance) {
    // The same composite theta admits different gauge values under different
    // factorizations: squaring then refactoring sqrt minimally turns r back
    // into the identity pair, and the resulting distance drops below the
    // shared-inner-factor value. This is why the Jensen comparison pins the
    // inner factor.
    const WeightedSpace w({1.0});
    const SampleFunction f({0.01});
    const SampleFunction g({0.0});
    const Factorization base = minimal_factorization(ScaleSpec::power(0.5));
    const Factorization shared =
        ccc::compose_outer(ScaleSpec::power(2.0), base);
    const Factorization minimal = minimal_factorization(ScaleSpec::power(1.0));
    const double d_base = orlicz_distance(f, g, base, w).distance;
    const double d_shared = orlicz_distance(f, g, shared, w).distance;
    const double d_minimal = orlicz_distance(f, g, minimal, w).distance;
    EXPECT_NEAR(d_base, 0.1, 1e-8);     // sum of sqrt differences
    EXPECT_NEAR(d_shared, 0.1, 1e-7);   // sqrt of summed squares of sqrt
    EXPECT_NEAR(d_minimal, 0.01, 1e-9); // plain weighted mean
    EXPECT_GE(d_shared, d_base - 1e-7);
}

TEST(Gauge, UnitFixedPointGuard) {
    EXPECT_NO_THROW(ccc::require_unit_fixed_point(ScaleSpec::power(2.0)));
    EXPECT_THROW(ccc::require_unit_fixed_point(ScaleSpec::exp_minus_one()),
                 ccc::ValidationError);
}

TEST(Gauge, ModularIsDecreasingInTAndMatchesThetaAtOne) {
    const ScaleSpec theta = ScaleSpec::exp_sqrt();
    const Factorization fact = minimal_factorization(theta);
    const WeightedSpace w({0.4, 0.6, 1.1});
    const SampleFunction f({0.0, 1.0, -2.0});
    const SampleFunction g({0.5, -0.5, 0.3});
    // At t = 1 the modular is the plain weighted sum of theta(|f-g|).
    double want = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        want += w.weight(i) * theta(std::abs(f[i] - g[i]));
    EXPECT_NEAR(ccc::modular(f, g, 1.0, fact, w), want, 1e-6 * want);
    double prev = ccc::modular(f, g, 0.5, fact, w);
    for (double t : {0.8, 1.3, 2.1, 3.4}) {
        const double cur = ccc::modular(f, g, t, fact, w);
        EXPECT_LT(cur, prev);
        prev = cur;
    }
}

TEST(Gauge, ConcaveClosedFormAgrees) {
    std::mt19937 rng(41);
    const ScaleSpec theta = ScaleSpec::log1p();
    const Factorization fact = minimal_factorization(theta);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 2 + rng() % 12;
        const WeightedSpace w = random_space(rng, n);
        const SampleFunction f(random_values(rng, n, -4.0, 4.0));
        const SampleFunction g(random_values(rng, n, -4.0, 4.0));
        const double direct = ccc::orlicz_distance_concave(f, g, theta, w);
        const double via_gauge = orlicz_distance(f, g, fact, w).distance;
        EXPECT_NEAR(via_gauge, direct, 1e-7 * (1.0 + direct));
    }
    EXPECT_THROW(ccc::orlicz_distance_concave(SampleFunction({0.0, 1.0}),
                                              SampleFunction({1.0, 3.0}),
                                              ScaleSpec::power(2.0),
                                              WeightedSpace({1.0, 1.0})),
                 ccc::ValidationError);
}

TEST(Gauge, InvariantUnderFactorRescaling) {
    const Factorization fact = minimal_factorization(ScaleSpec::exp_sqrt());
    const Factorization resc = fact.rescaled(3.0);
    const WeightedSpace w({0.3, 0.8, 0.9, 0.5});
    const SampleFunction f({1.2, -0.7, 0.0, 2.2});
    const SampleFunction g({-0.3, 0.9, 1.5, -1.1});
    const double a = orlicz_distance(f, g, fact, w, 1e-12).distance;
    const double b = orlicz_distance(f, g, resc, w, 1e-12).distance;
    EXPECT_NEAR(a, b, 1e-10 * (1.0 + a));
}

TEST(Gauge, ZeroWeightPointsAreIgnored) {
    const Factorization fact = minimal_factorization(ScaleSpec::exp_sqrt());
    // The difference at the zero-weight point is far beyond the table.
    const WeightedSpace w({1.0, 0.0, 1.0});
    const SampleFunction f({0.5, 100.0, -0.5});
    const SampleFunction g({-0.5, -100.0, 0.5});
    const auto with_spike = orlicz_distance(f, g, fact, w);
    const auto without = orlicz_distance(SampleFunction({0.5, 0.0, -0.5}),
                                         SampleFunction({-0.5, 0.0, 0.5}),
                                         fact, w);
    EXPECT_DOUBLE_EQ(with_spike.distance, without.distance);
    // With positive weight the same spike is rejected.
    EXPECT_THROW(orlicz_distance(f, g, fact, WeightedSpace({1.0, 1.0, 1.0})),
                 ccc::ValidationError);
}

TEST(Gauge, LowerBracketStaysAboveOne) {
    const Factorization fact = minimal_factorization(ScaleSpec::exp_sqrt());
    const WeightedSpace w({0.7, 1.3});
    const SampleFunction f({0.0, 2.0});
    const SampleFunction g({1.0, -1.0});
    const auto res = orlicz_distance(f, g, fact, w);
    ASSERT_GT(res.bracket_lo, 0.0);
    EXPECT_GT(ccc::modular(f, g, res.bracket_lo, fact, w), 1.0);
    EXPECT_LE(res.modular_at_t, 1.0);
    EXPECT_LE((res.bracket_hi - res.bracket_lo) / res.bracket_hi, 1e-9 * 1.01);
}

TEST(Gauge, TinyMassNeedsWiderTable) {
    // Mass 0.001 pushes the unit level of the modular beyond the range that
    // r_max = 10 tabulates for exp_sqrt, which is a NumericError; a wider
    // table resolves the same query.
    const WeightedSpace w({0.001});
    const SampleFunction f({1.0});
    const SampleFunction g({0.0});
    const Factorization narrow = minimal_factorization(ScaleSpec::exp_sqrt());
    EXPECT_THROW(orlicz_distance(f, g, narrow, w), ccc::NumericError);

    const Factorization wide =
        minimal_factorization(ScaleSpec::exp_sqrt(), 4096, 60.0);
    const auto res = orlicz_distance(f, g, wide, w);
    // Solve 0.001 * phi(psi(1)/t) = 1 by hand: psi(1)/t = psi((log 1001)^2).
    const double arg = std::pow(std::log(1001.0), 2.0);
    const double want = wide.psi_hat(1.0) / wide.psi_hat(arg);
    EXPECT_NEAR(res.distance, want, 1e-6 * want);
}

}  // namespace
