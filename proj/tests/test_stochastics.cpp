#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <gtest/gtest.h>

#include "canepi/distributions.hpp"
#include "canepi/rng.hpp"
#include "test_support.hpp"

using namespace canepi;

namespace {

constexpr int kDraws = 100000;

template <class Draw>
std::vector<double> draw_many(Draw draw, int count = kDraws) {
    std::vector<double> xs;
    xs.reserve(count);
    for (int i = 0; i < count; ++i) {
        xs.push_back(static_cast<double>(draw()));
    }
    return xs;
}

// Within three standard errors of the analytic mean.
void expect_mean(const std::vector<double>& xs, double mu, double var) {
    const auto m = test::moments(xs);
    const double se = std::sqrt(var / static_cast<double>(xs.size()));
    EXPECT_NEAR(m.mean, mu, 3.0 * se);
}

// Sample variance within three standard errors; the SE uses the fourth central moment `mu4`.
void expect_variance(const std::vector<double>& xs, double var, double mu4) {
    const auto m = test::moments(xs);
    const double n = static_cast<double>(xs.size());
    const double se = std::sqrt((mu4 - var * var * (n - 3.0) / (n - 1.0)) / n);
    EXPECT_NEAR(m.variance, var, 3.0 * se);
}

std::map<std::int64_t, std::int64_t> histogram(const std::vector<double>& xs) {
    std::map<std::int64_t, std::int64_t> h;
    for (double x : xs) {
        ++h[static_cast<std::int64_t>(x)];
    }
    return h;
}

} // namespace

TEST(RngStream, SameSeedAndStreamReproduce) {
    RngStream a(1984, 7);
    RngStream b(1984, 7);
    for (int i = 0; i < 1000; ++i) {
        ASSERT_EQ(a.next_u64(), b.next_u64());
    }
}

TEST(RngStream, DistinctStreamsDiffer) {
    RngStream a(1984, 0);
    RngStream b(1984, 1);
    RngStream c(1985, 0);
    int same_ab = 0;
    int same_ac = 0;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        same_ab += x == b.next_u64();
        same_ac += x == c.next_u64();
    }
    EXPECT_EQ(same_ab, 0);
    EXPECT_EQ(same_ac, 0);
}

TEST(RngStream, DeriveIgnoresParentPosition) {
    RngStream a(42, 3);
    const RngStream fresh_child = a.derive({1, 2, 3});
    for (int i = 0; i < 57; ++i) {
        a.next_u64();
    }
    EXPECT_EQ(a.derive({1, 2, 3}), fresh_child);
    EXPECT_FALSE(a.derive({1, 2, 4}) == fresh_child);
    EXPECT_FALSE(a.derive({2, 1, 3}) == fresh_child);
}

TEST(RngStream, UniformUnitInterval) {
    RngStream rng(5, 5);
    double lo = 1.0;
    double hi = 0.0;
    for (int i = 0; i < kDraws; ++i) {
        const double u = rng.uniform01();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
    EXPECT_LT(lo, 1e-3);
    EXPECT_GT(hi, 1.0 - 1e-3);
}

TEST(RngStream, UniformBelowIsUniform) {
    RngStream rng(11, 0);
    std::map<std::int64_t, std::int64_t> counts;
    std::map<std::int64_t, double> p;
    for (int k = 0; k < 7; ++k) {
        p[k] = 1.0 / 7.0;
    }
    for (int i = 0; i < kDraws; ++i) {
        ++counts[static_cast<std::int64_t>(rng.uniform_below(7))];
    }
    EXPECT_TRUE(test::chi_square(counts, p, kDraws).passes());
}

TEST(Shuffle, ProducesPermutation) {
    RngStream rng(1, 1);
    std::vector<int> v(100);
    std::iota(v.begin(), v.end(), 0);
    auto w = v;
    canepi::shuffle(w.begin(), w.end(), rng);
    EXPECT_NE(v, w);
    std::sort(w.begin(), w.end());
    EXPECT_EQ(v, w);
}

TEST(DiscreteUniform, BoundsAndMean) {
    RngStream rng(2, 0);
    const auto xs = draw_many([&] { return sample_discrete_uniform(1, 2, rng); });
    EXPECT_EQ(*std::min_element(xs.begin(), xs.end()), 1.0);
    EXPECT_EQ(*std::max_element(xs.begin(), xs.end()), 2.0);
    expect_mean(xs, 1.5, 0.25);
    expect_variance(xs, 0.25, 0.0625);
}

TEST(DiscreteUniform, ChiSquare) {
    RngStream rng(2, 1);
    const auto xs = draw_many([&] { return sample_discrete_uniform(-3, 6, rng); });
    std::map<std::int64_t, double> p;
    for (int k = -3; k <= 6; ++k) {
        p[k] = 0.1;
    }
    EXPECT_TRUE(test::chi_square(histogram(xs), p, kDraws).passes());
}

TEST(DiscreteUniform, DegenerateAndErrors) {
    RngStream rng(2, 2);
    EXPECT_EQ(sample_discrete_uniform(4, 4, rng), 4);
    EXPECT_THROW(sample_discrete_uniform(3, 2, rng), ParameterError);
}

TEST(Binomial, MeansOfApDurations) {
    RngStream rng(3, 0);
    const auto untreated = draw_many([&] { return sample_binomial(26, 0.5, rng); });
    expect_mean(untreated, 13.0, 6.5);
    expect_variance(untreated, 6.5, 3.0 * 6.5 * 6.5 + 6.5 * (1.0 - 6.0 * 0.25));
    const auto treated = draw_many([&] { return sample_binomial(52, 0.5, rng); });
    expect_mean(treated, 26.0, 13.0);
}

TEST(Binomial, ChiSquareAgainstBoostPmf) {
    RngStream rng(3, 1);
    for (const auto& [n, p] : std::vector<std::pair<int, double>>{{26, 0.5}, {52, 0.5}, {40, 0.07}, {2000, 0.3}}) {
        const auto xs = draw_many([&] { return sample_binomial(n, p, rng); });
        boost::math::binomial_distribution<double> dist(n, p);
        std::map<std::int64_t, double> pmf;
        for (int k = 0; k <= n; ++k) {
            pmf[k] = boost::math::pdf(dist, k);
        }
        const auto chi = test::chi_square(histogram(xs), pmf, kDraws);
        EXPECT_TRUE(chi.passes()) << "B(" << n << "," << p << ") chi2=" << chi.statistic << " crit=" << chi.critical;
    }
}

TEST(Binomial, EdgeCasesAndErrors) {
    RngStream rng(3, 2);
    EXPECT_EQ(sample_binomial(0, 0.5, rng), 0);
    EXPECT_EQ(sample_binomial(17, 0.0, rng), 0);
    EXPECT_EQ(sample_binomial(17, 1.0, rng), 17);
    EXPECT_THROW(sample_binomial(-1, 0.5, rng), ParameterError);
    EXPECT_THROW(sample_binomial(5, 1.5, rng), ParameterError);
    EXPECT_THROW(sample_binomial(5, -0.1, rng), ParameterError);
}

TEST(Poisson, ZeroRate) {
    RngStream rng(4, 0);
    for (int i = 0; i < 1000; ++i) {
        ASSERT_EQ(sample_poisson(0.0, rng), 0);
    }
    EXPECT_THROW(sample_poisson(-1.0, rng), ParameterError);
}

TEST(Poisson, SteadyActsMeanThirty) {
    RngStream rng(4, 1);
    const auto xs = draw_many([&] { return sample_poisson(30.0, rng); });
    EXPECT_NEAR(test::moments(xs).mean, 30.0, 0.1);
    expect_mean(xs, 30.0, 30.0);
}

TEST(Poisson, WindowActsVarianceEight) {
    RngStream rng(4, 2);
    const auto xs = draw_many([&] { return sample_poisson(8.0, rng); });
    EXPECT_NEAR(test::moments(xs).variance, 8.0, 0.2);
    expect_variance(xs, 8.0, 8.0 + 3.0 * 64.0);
}

TEST(Poisson, ChiSquareAgainstBoostPmf) {
    RngStream rng(4, 3);
    for (double lambda : {0.7, 8.0, 22.0, 30.0, 450.0}) {
        const auto xs = draw_many([&] { return sample_poisson(lambda, rng); });
        boost::math::poisson_distribution<double> dist(lambda);
        std::map<std::int64_t, double> pmf;
        const auto top = static_cast<std::int64_t>(lambda + 12.0 * std::sqrt(lambda) + 20.0);
        for (std::int64_t k = 0; k <= top; ++k) {
            pmf[k] = boost::math::pdf(dist, static_cast<double>(k));
        }
        const auto chi = test::chi_square(histogram(xs), pmf, kDraws);
        EXPECT_TRUE(chi.passes()) << "P(" << lambda << ") chi2=" << chi.statistic << " crit=" << chi.critical;
    }
}

TEST(ContinuousUniform, Degenerate) {
    RngStream rng(5, 0);
    for (int i = 0; i < 100; ++i) {
        ASSERT_EQ(sample_continuous_uniform(0.3, 0.3, rng), 0.3);
    }
    EXPECT_THROW(sample_continuous_uniform(0.5, 0.1, rng), ParameterError);
}

TEST(ContinuousUniform, ModerateMean) {
    RngStream rng(5, 1);
    const auto xs = draw_many([&] { return sample_continuous_uniform(0.1, 0.5, rng); });
    EXPECT_NEAR(test::moments(xs).mean, 0.3, 0.002);
    const double var = 0.16 / 12.0;
    expect_mean(xs, 0.3, var);
    expect_variance(xs, var, std::pow(0.4, 4) / 80.0);
}

TEST(ContinuousUniform, OptimisticBoundsAndDecileChiSquare) {
    RngStream rng(5, 2);
    const auto xs = draw_many([&] { return sample_continuous_uniform(0.01, 0.1, rng); });
    std::map<std::int64_t, std::int64_t> bins;
    for (double x : xs) {
        ASSERT_GE(x, 0.01);
        ASSERT_LT(x, 0.1);
        ++bins[static_cast<std::int64_t>((x - 0.01) / 0.009)];
    }
    std::map<std::int64_t, double> p;
    for (int k = 0; k < 10; ++k) {
        p[k] = 0.1;
    }
    EXPECT_TRUE(test::chi_square(bins, p, kDraws).passes());
}

TEST(PowerLaw, ForcedZero) {
    RngStream rng(6, 0);
    const PowerLawDegreeTable table(1.6, 200, 1.0);
    for (int i = 0; i < 1000; ++i) {
        ASSERT_EQ(table(rng), 0);
    }
    EXPECT_EQ(sample_power_law_degree(1.6, 200, 1.0, rng), 0);
}

TEST(PowerLaw, RatioOfFirstTwoMasses) {
    RngStream rng(6, 1);
    const PowerLawDegreeTable table(1.6, 200, 0.0);
    std::int64_t ones = 0;
    std::int64_t twos = 0;
    std::int64_t max_seen = 0;
    for (int i = 0; i < 1000000; ++i) {
        const auto k = table(rng);
        ones += k == 1;
        twos += k == 2;
        max_seen = std::max(max_seen, k);
        ASSERT_GE(k, 1);
    }
    const double expected = std::pow(2.0, 1.6);
    EXPECT_NEAR(expected, 3.031, 5e-4);
    EXPECT_NEAR(static_cast<double>(ones) / static_cast<double>(twos), expected, 0.05 * expected);
    EXPECT_LE(max_seen, 200);
}

TEST(PowerLaw, TableNormalisedToOne) {
    for (double p0 : {0.0, 0.01, 0.5}) {
        const PowerLawDegreeTable table(1.6, 200, p0);
        double total = 0.0;
        for (std::int64_t k = 0; k <= 200; ++k) {
            total += table.probability(k);
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
        EXPECT_EQ(table.probability(201), 0.0);
        EXPECT_EQ(table.probability(-1), 0.0);
    }
}

TEST(PowerLaw, ChiSquare) {
    RngStream rng(6, 2);
    const PowerLawDegreeTable table(1.6, 200, 0.01);
    std::map<std::int64_t, std::int64_t> counts;
    for (int i = 0; i < kDraws; ++i) {
        ++counts[table(rng)];
    }
    std::map<std::int64_t, double> p;
    for (std::int64_t k = 0; k <= 200; ++k) {
        p[k] = table.probability(k);
    }
    const auto chi = test::chi_square(counts, p, kDraws);
    EXPECT_TRUE(chi.passes()) << chi.statistic << " vs " << chi.critical;
}

TEST(PowerLaw, Errors) {
    EXPECT_THROW(PowerLawDegreeTable(1.6, 0, 0.01), ParameterError);
    EXPECT_THROW(PowerLawDegreeTable(0.0, 200, 0.01), ParameterError);
    EXPECT_THROW(PowerLawDegreeTable(1.6, 200, 1.5), ParameterError);
}

TEST(DistributionSpec, MeansAndValidation) {
    EXPECT_DOUBLE_EQ(mean(Binomial{26, 0.5}), 13.0);
    EXPECT_DOUBLE_EQ(mean(Poisson{30.0}), 30.0);
    EXPECT_DOUBLE_EQ(mean(DiscreteUniform{1, 2}), 1.5);
    EXPECT_DOUBLE_EQ(mean(ContinuousUniform{0.1, 0.5}), 0.3);
    EXPECT_NO_THROW(validate(PowerLawDegree{1.6, 200, 0.01}));
    EXPECT_THROW(validate(DiscreteUniform{2, 1}), ParameterError);
    EXPECT_THROW(validate(Binomial{-1, 0.5}), ParameterError);
    EXPECT_THROW(validate(Poisson{-2.0}), ParameterError);
    EXPECT_THROW(validate(ContinuousUniform{1.0, 0.0}), ParameterError);
    EXPECT_THROW(validate(PowerLawDegree{1.6, 0, 0.01}), ParameterError);

    RngStream a(9, 9);
    RngStream b(9, 9);
    const DistributionSpec spec = Binomial{26, 0.5};
    EXPECT_EQ(sample(spec, a), static_cast<double>(sample_binomial(26, 0.5, b)));
}
