#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <gtest/gtest.h>

#include "canepi/analysis.hpp"
#include "published_incidence.hpp"

using namespace canepi;

TEST(Incidence, Examples) {
    EXPECT_EQ(incidence(0, 123.4), 0.0);
    EXPECT_EQ(incidence(0, 0.0), 0.0);
    EXPECT_NEAR(incidence(2, 511.12), 0.3913, 5e-5);
    EXPECT_NEAR(incidence(5, 374.54), 1.3350, 5e-5);
    EXPECT_THROW(incidence(1, 0.0), ComputationError);
    EXPECT_THROW(incidence(1, -5.0), ComputationError);
}

TEST(Incidence, Homogeneous) {
    for (double c : {0.5, 3.0, 17.0}) {
        EXPECT_NEAR(incidence(static_cast<std::int64_t>(4 * c), 300.0 * c), incidence(4, 300.0), 1e-12);
    }
}

TEST(PersonYears, MidYearConvention) {
    EXPECT_DOUBLE_EQ(susceptible_person_years(100, 0), 100.0);
    EXPECT_DOUBLE_EQ(susceptible_person_years(100, 10), 95.0);
    EXPECT_DOUBLE_EQ(susceptible_person_years(0, 0), 0.0);
}

TEST(StudentT, CriticalValue) {
    EXPECT_NEAR(student_t_quantile(0.975, 21), 2.07961, 1e-5);
    const boost::math::students_t dist(21);
    EXPECT_NEAR(student_t_quantile(0.975, 21), boost::math::quantile(dist, 0.975), 1e-10);
    EXPECT_NEAR(student_t_two_sided_p(2.0796138447276626, 21), 0.05, 1e-10);
}

TEST(StudentT, PValuesAgainstBoost) {
    for (double df : {1.0, 2.0, 4.0, 9.0, 21.0, 58.0, 300.0}) {
        const boost::math::students_t dist(df);
        for (double t : {0.0, 0.05, 0.2721655, 1.0, 2.5, 6.0, 25.0}) {
            const double expected = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
            EXPECT_NEAR(student_t_two_sided_p(t, df), expected, 1e-10) << "t=" << t << " df=" << df;
            EXPECT_NEAR(student_t_two_sided_p(-t, df), expected, 1e-10);
            EXPECT_NEAR(student_t_cdf(t, df), boost::math::cdf(dist, t), 1e-10);
        }
    }
}

TEST(IncompleteBeta, KnownValues) {
    EXPECT_DOUBLE_EQ(regularized_incomplete_beta(2.0, 3.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(regularized_incomplete_beta(2.0, 3.0, 1.0), 1.0);
    // I_x(1, 1) = x; I_x(a, 1) = x^a.
    EXPECT_NEAR(regularized_incomplete_beta(1.0, 1.0, 0.37), 0.37, 1e-14);
    EXPECT_NEAR(regularized_incomplete_beta(3.5, 1.0, 0.6), std::pow(0.6, 3.5), 1e-13);
    EXPECT_THROW(regularized_incomplete_beta(0.0, 1.0, 0.5), ParameterError);
    EXPECT_THROW(regularized_incomplete_beta(1.0, 1.0, 1.5), ParameterError);
}

TEST(PairedTTest, HandComputedExample) {
    // d = a - b = (-0.1, 0.1, -0.2, 0.2, -0.1): mean -0.02, sample variance
    // 0.108 / 4 = 0.027, so t = -0.02 / sqrt(0.027 / 5) = -0.2721655...
    const std::vector<double> a{1, 2, 3, 4, 5};
    const std::vector<double> b{1.1, 1.9, 3.2, 3.8, 5.1};
    const auto r = paired_t_test(a, b, 0.05);
    const double t_oracle = -0.02 / std::sqrt(0.027 / 5.0);
    EXPECT_NEAR(r.t, t_oracle, 1e-6);
    EXPECT_NEAR(r.t, -0.2721655, 1e-6);
    EXPECT_EQ(r.df, 4);
    EXPECT_NEAR(r.mean_difference, -0.02, 1e-12);
    const boost::math::students_t dist(4);
    EXPECT_NEAR(r.p_value, 2.0 * boost::math::cdf(dist, t_oracle), 1e-10);
    EXPECT_NEAR(r.p_value, 0.7989659, 1e-6);
    EXPECT_FALSE(r.reject);
}

TEST(PairedTTest, Antisymmetric) {
    const std::vector<double> a{1.3, 2.1, 0.4, 5.5, 3.3, 2.2};
    const std::vector<double> b{1.0, 2.6, 0.1, 4.9, 3.0, 2.0};
    const auto ab = paired_t_test(a, b);
    const auto ba = paired_t_test(b, a);
    EXPECT_NEAR(ab.t, -ba.t, 1e-14);
    EXPECT_NEAR(ab.p_value, ba.p_value, 1e-14);
}

TEST(PairedTTest, AlphaOneAlwaysRejects) {
    const std::vector<double> a{1, 2, 3, 4, 5};
    const std::vector<double> b{1.1, 1.9, 3.2, 3.8, 5.1};
    EXPECT_TRUE(paired_t_test(a, b, 1.0).reject);
}

TEST(PairedTTest, Errors) {
    const std::vector<double> a{1, 2, 3};
    EXPECT_THROW(paired_t_test(a, a), ComputationError);
    const std::vector<double> shifted{2, 3, 4};
    EXPECT_THROW(paired_t_test(a, shifted), ComputationError);
    EXPECT_THROW(paired_t_test(a, std::vector<double>{1, 2}), ParameterError);
    EXPECT_THROW(paired_t_test(std::vector<double>{1}, std::vector<double>{2}), ParameterError);
    EXPECT_THROW(paired_t_test(a, std::vector<double>{1, 2, 4}, 0.0), ParameterError);
}

TEST(Comparison, SelfComparisonIsZero) {
    std::map<std::string, IncidenceSeries> series{{"rs", {{2010, 1.5}, {2015, 1.7}}}, {"p1", {{2010, 1.5}, {2015, 1.7}}}};
    const std::vector<int> years{2010, 2015};
    const auto rows = scenario_comparison_table(series, years);
    ASSERT_EQ(rows.size(), 4U);
    EXPECT_EQ(rows[0].scenario, "rs");
    EXPECT_FALSE(rows[0].pct_vs_reference.has_value());
    EXPECT_EQ(rows[1].pct_vs_reference, 0.0);
    EXPECT_STREQ(rows[1].direction(), "=");
    EXPECT_EQ(rows[3].pct_vs_reference, 0.0);
}

TEST(Comparison, PublishedPercentagesReproduced) {
    const auto series = test::published_series();
    std::vector<int> years;
    for (const auto& row : test::kPublishedIncidence) {
        years.push_back(row.year);
    }
    const auto rows = scenario_comparison_table(series, years);
    ASSERT_EQ(rows.size(), 42U);
    int checked = 0;
    for (const auto& published : test::kPublishedIncidence) {
        for (std::size_t s = 1; s < 6; ++s) {
            const auto it = std::find_if(rows.begin(), rows.end(), [&](const ComparisonRow& r) {
                return r.year == published.year && r.scenario == test::kScenarioOrder[s];
            });
            ASSERT_NE(it, rows.end());
            ASSERT_TRUE(it->pct_vs_reference.has_value());
            EXPECT_NEAR(*it->pct_vs_reference, published.pct[s - 1], 0.02)
                << published.year << " " << test::kScenarioOrder[s];
            EXPECT_STREQ(it->direction(), published.pct[s - 1] > 0 ? "up" : "down");
            ++checked;
        }
    }
    EXPECT_EQ(checked, 35);
}

TEST(Comparison, HeadlineValues) {
    std::map<std::string, IncidenceSeries> s2010{{"rs", {{2010, 1.61423}}}, {"p5", {{2010, 2.18211}}}};
    const std::vector<int> y2010{2010};
    EXPECT_NEAR(*scenario_comparison_table(s2010, y2010)[1].pct_vs_reference, 35.18, 0.02);
    std::map<std::string, IncidenceSeries> s2040{{"rs", {{2040, 1.59973}}}, {"p2", {{2040, 1.14059}}}};
    const std::vector<int> y2040{2040};
    EXPECT_NEAR(*scenario_comparison_table(s2040, y2040)[1].pct_vs_reference, -28.70, 0.02);
}

TEST(Comparison, Errors) {
    std::map<std::string, IncidenceSeries> series{{"rs", {{2010, 1.5}}}, {"p1", {{2015, 1.5}}}};
    const std::vector<int> years{2010};
    EXPECT_THROW(scenario_comparison_table(series, years), ParameterError);
    std::map<std::string, IncidenceSeries> no_ref{{"p1", {{2010, 1.5}}}};
    EXPECT_THROW(scenario_comparison_table(no_ref, years), ParameterError);
    std::map<std::string, IncidenceSeries> zero{{"rs", {{2010, 0.0}}}, {"p1", {{2010, 1.5}}}};
    EXPECT_THROW(scenario_comparison_table(zero, years), ComputationError);
}

TEST(Csv, ScenarioAndComparisonFormat) {
    SimulationResult r;
    r.scenario = "rs";
    AveragedYear y;
    y.year = 1985;
    y.mean_incidence = 1.5;
    y.sd_incidence = 0.25;
    y.mean_diagnosed_fraction = 0.4;
    y.mean_new_infections = 30;
    y.mean_negative = 1700;
    y.mean_pi = 30;
    y.mean_ap = 540;
    y.mean_aids = 29;
    r.averaged.push_back(y);
    std::ostringstream os;
    const std::vector<std::string> meta{"seed: 1", "config: {}"};
    write_scenario_csv(os, r, meta);
    EXPECT_EQ(os.str(),
              "# seed: 1\n# config: {}\n"
              "year,mean_incidence_per_100py,sd_incidence,mean_diagnosed_fraction,new_infections_mean,"
              "stage_negative,stage_pi,stage_ap,stage_aids\n"
              "1985,1.500000,0.250000,0.400000,30.000000,1700.000000,30.000000,540.000000,29.000000\n");

    std::ostringstream cmp;
    const std::vector<ComparisonRow> rows{{2010, "rs", 1.61423, std::nullopt}, {2010, "p5", 2.18211, 35.1796}};
    write_comparison_csv(cmp, rows);
    EXPECT_EQ(cmp.str(), "year,scenario,incidence,pct_vs_rs\n2010,rs,1.614230,\n2010,p5,2.182110,35.18\n");
}

TEST(Csv, HistoricalSeries) {
    std::istringstream in("year,incidence_per_100py\n# comment\n1988,0.3913\r\n\n2002,1.335\n");
    const auto s = read_historical_csv(in);
    ASSERT_EQ(s.size(), 2U);
    EXPECT_DOUBLE_EQ(s.at(1988), 0.3913);
    EXPECT_DOUBLE_EQ(s.at(2002), 1.335);

    std::istringstream no_header("1990,1.0\n1991,2.0\n");
    EXPECT_EQ(read_historical_csv(no_header).size(), 2U);

    std::istringstream bad("year,incidence\n1990,abc\n");
    EXPECT_THROW(read_historical_csv(bad), ConfigError);
    std::istringstream one_column("year,incidence\n1990\n");
    EXPECT_THROW(read_historical_csv(one_column), ConfigError);
}

TEST(Averaging, MeanAndSampleSd) {
    std::vector<std::vector<YearMetrics>> runs(3, std::vector<YearMetrics>(1));
    const double inc[] = {1.0, 2.0, 4.0};
    for (int r = 0; r < 3; ++r) {
        runs[r][0].year = 2000;
        runs[r][0].incidence_per_100py = inc[r];
        runs[r][0].census.negative = 10 * (r + 1);
    }
    const auto avg = average_realizations(runs);
    ASSERT_EQ(avg.size(), 1U);
    EXPECT_NEAR(avg[0].mean_incidence, 7.0 / 3.0, 1e-12);
    EXPECT_NEAR(avg[0].sd_incidence, std::sqrt(((1 - 7.0 / 3) * (1 - 7.0 / 3) + (2 - 7.0 / 3) * (2 - 7.0 / 3) +
                                                (4 - 7.0 / 3) * (4 - 7.0 / 3)) / 2.0),
                1e-12);
    EXPECT_NEAR(avg[0].mean_negative, 20.0, 1e-12);
}
