// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Tolerances are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "canepi/analysis.hpp"
#include "canepi/engine.hpp"
#include "published_incidence.hpp"
#include "test_support.hpp"

using namespace canepi;

namespace {

// 1. RS magnitude
constexpr double kRsBandLo = 1.0;
constexpr double kRsBandHi = 2.5;
constexpr double kAnchorTolerance = 0.5;
const std::map<int, double> kAnchors{{2006, 1.66}, {2015, 1.69}, {2020, 1.74}};
// 3. Long-run counterbalance
constexpr double kP5Tolerance = 0.25;
constexpr double kP2Margin = 0.2;
// 4. Diagnosed fraction
constexpr double kDiagLo = 0.30;
constexpr double kDiagHi = 0.60;
constexpr double kDiagTarget = 0.41;
constexpr double kDiagTolerance = 0.06;
// 5. Percentage regression
constexpr double kPctTolerance = 0.02;
// 6-8. Property suites
constexpr int kNetworks = 100;
constexpr double kChiAlpha = 0.01;
constexpr int kDraws = 100000;
constexpr double kSigmas = 3.0;
constexpr int kActLists = 20;
constexpr int kActTrials = 1000000;
// 12. t-test oracle
constexpr double kTTolerance = 1e-6;

struct Verdict {
    bool pass;
    std::string detail;
};

std::string fmt(double x, int precision = 4) { return format_number(x, precision); }

double mean_over(const SimulationResult& r, int from, int to, double AveragedYear::*field) {
    double sum = 0;
    int n = 0;
    for (const auto& y : r.averaged) {
        if (y.year >= from && y.year <= to) {
            sum += y.*field;
            ++n;
        }
    }
    return n ? sum / n : std::nan("");
}

double at(const SimulationResult& r, int year) { return r.find_year(year)->mean_incidence; }

class Acceptance {
public:
    Acceptance() {
        config_.realizations = 30;
        config_.seed = 1984;
        for (const auto& name : preset_names()) {
            results_.emplace(name, run_scenario(*make_preset(name, config_), config_));
        }
    }

    Verdict rs_magnitude() const {
        const auto& rs = results_.at("rs");
        const double m = mean_over(rs, 2006, 2020, &AveragedYear::mean_incidence);
        bool ok = m >= kRsBandLo && m <= kRsBandHi;
        std::string detail = "mean 2006-2020 = " + fmt(m);
        for (const auto& [year, anchor] : kAnchors) {
            const double v = at(rs, year);
            ok = ok && std::fabs(v - anchor) <= kAnchorTolerance;
            detail += "; " + std::to_string(year) + " = " + fmt(v) + " (anchor " + fmt(anchor, 2) + ")";
        }
        return {ok, detail};
    }

    Verdict ordering_2010() const {
        auto v = [&](const char* s) { return at(results_.at(s), 2010); };
        const double rs = v("rs"), p1 = v("p1"), p2 = v("p2"), p3 = v("p3"), p4 = v("p4"), p5 = v("p5");
        const bool ok = p5 > p4 && p4 > p3 && p4 > p1 && p3 > p2 && p1 > p2 && p2 >= rs;
        return {ok, "P5 " + fmt(p5) + ", P4 " + fmt(p4) + ", P3 " + fmt(p3) + ", P1 " + fmt(p1) + ", P2 " + fmt(p2) +
                        ", RS " + fmt(rs)};
    }

    Verdict counterbalance() const {
        const double rs = mean_over(results_.at("rs"), 2030, 2044, &AveragedYear::mean_incidence);
        const double p5 = mean_over(results_.at("p5"), 2030, 2044, &AveragedYear::mean_incidence);
        const double p2 = mean_over(results_.at("p2"), 2030, 2044, &AveragedYear::mean_incidence);
        const bool ok = std::fabs(p5 - rs) <= kP5Tolerance && p2 <= rs - kP2Margin;
        return {ok, "mean 2030-2044: RS " + fmt(rs) + ", P5 " + fmt(p5) + " (|diff| " + fmt(std::fabs(p5 - rs)) +
                        "), P2 " + fmt(p2) + " (diff " + fmt(p2 - rs) + ")"};
    }

    Verdict diagnosed_fraction() const {
        const auto& rs = results_.at("rs");
        double lo = 1.0;
        double hi = 0.0;
        for (const auto& y : rs.averaged) {
            if (y.year > 1990) {
                lo = std::min(lo, y.mean_diagnosed_fraction);
                hi = std::max(hi, y.mean_diagnosed_fraction);
            }
        }
        const double late = mean_over(rs, 2035, 2044, &AveragedYear::mean_diagnosed_fraction);
        const bool ok = lo >= kDiagLo && hi <= kDiagHi && std::fabs(late - kDiagTarget) <= kDiagTolerance;
        return {ok, "range after 1990 [" + fmt(lo) + ", " + fmt(hi) + "], mean 2035-2044 = " + fmt(late)};
    }

    static Verdict percentage_regression() {
        const auto series = test::published_series();
        std::vector<int> years;
        for (const auto& row : test::kPublishedIncidence) {
            years.push_back(row.year);
        }
        const auto rows = scenario_comparison_table(series, years);
        double worst = 0.0;
        int checked = 0;
        for (const auto& published : test::kPublishedIncidence) {
            for (std::size_t s = 1; s < test::kScenarioOrder.size(); ++s) {
                for (const auto& r : rows) {
                    if (r.year == published.year && r.scenario == test::kScenarioOrder[s]) {
                        worst = std::max(worst, std::fabs(*r.pct_vs_reference - published.pct[s - 1]));
                        ++checked;
                    }
                }
            }
        }
        return {checked == 35 && worst <= kPctTolerance,
                std::to_string(checked) + " percentages, max deviation " + fmt(worst, 4) + " points"};
    }

    static Verdict network_suite() {
        RngStream rng(1984, 6);
        const PowerLawDegreeTable table(1.6, 200, 0.01);
        int valid = 0;
        for (int i = 0; i < kNetworks; ++i) {
            const auto seq = generate_degree_sequence(2299, table, rng);
            valid += validate_network(wire_configuration_model(seq, rng), seq).ok ? 1 : 0;
        }
        const auto big = generate_degree_sequence(100000, table, rng);
        std::map<std::int64_t, std::int64_t> observed;
        for (auto d : big.degrees) {
            ++observed[d];
        }
        std::map<std::int64_t, double> p;
        for (std::int64_t k = 0; k <= 200; ++k) {
            p[k] = table.probability(k);
        }
        const auto chi = test::chi_square(observed, p, 100000, kChiAlpha);
        int odd = 0;
        for (int i = 0; i < 1000; ++i) {
            odd += generate_degree_sequence(2 + static_cast<std::size_t>(i), table, rng).sum() % 2 != 0;
        }
        const bool ok = valid == kNetworks && chi.passes() && odd == 0;
        return {ok, std::to_string(valid) + "/" + std::to_string(kNetworks) + " networks valid; chi2 " +
                        fmt(chi.statistic, 2) + " <= " + fmt(chi.critical, 2) + " (df " + std::to_string(chi.df) +
                        "); odd sums " + std::to_string(odd) + "/1000"};
    }

    static Verdict distribution_suite() {
        RngStream rng(1984, 7);
        struct Case {
            std::string name;
            std::function<double()> draw;
            double mean;
            double var;
            double mu4;
        };
        const std::vector<Case> cases{
            {"B(26,.5)", [&] { return double(sample_binomial(26, 0.5, rng)); }, 13.0, 6.5, 6.5 * (1 + 3 * 24 * 0.25)},
            {"B(52,.5)", [&] { return double(sample_binomial(52, 0.5, rng)); }, 26.0, 13.0, 13.0 * (1 + 3 * 50 * 0.25)},
            {"P(30)", [&] { return double(sample_poisson(30.0, rng)); }, 30.0, 30.0, 30.0 + 3 * 900.0},
            {"DU(1,2)", [&] { return double(sample_discrete_uniform(1, 2, rng)); }, 1.5, 0.25, 0.0625},
            {"CU(.1,.5)", [&] { return sample_continuous_uniform(0.1, 0.5, rng); }, 0.3, 0.16 / 12, 0.0256 / 80},
        };
        bool ok = true;
        std::string detail;
        for (const auto& c : cases) {
            std::vector<double> xs(kDraws);
            for (auto& x : xs) {
                x = c.draw();
            }
            const auto m = test::moments(xs);
            const double n = kDraws;
            const double z_mean = (m.mean - c.mean) / std::sqrt(c.var / n);
            const double se_var = std::sqrt((c.mu4 - c.var * c.var * (n - 3) / (n - 1)) / n);
            const double z_var = (m.variance - c.var) / se_var;
            ok = ok && std::fabs(z_mean) <= kSigmas && std::fabs(z_var) <= kSigmas;
            detail += c.name + " z=" + fmt(z_mean, 2) + "/" + fmt(z_var, 2) + "; ";
        }
        bool bounds = true;
        for (int i = 0; i < kDraws; ++i) {
            const double x = sample_continuous_uniform(0.01, 0.1, rng);
            bounds = bounds && x >= 0.01 && x < 0.1;
        }
        ok = ok && bounds;
        detail += std::string("CU(.01,.1) bounds ") + (bounds ? "held" : "violated");
        return {ok, detail};
    }

    static Verdict transmission_oracle() {
        RngStream gen(1984, 8);
        RngStream sim(1984, 9);
        double worst = 0.0;
        for (int list = 0; list < kActLists; ++list) {
            std::vector<double> acts(static_cast<std::size_t>(sample_discrete_uniform(1, 60, gen)));
            for (auto& p : acts) {
                p = 0.25 * gen.uniform01() * gen.uniform01();
            }
            const double p = per_year_probability(acts);
            int hits = 0;
            for (int t = 0; t < kActTrials; ++t) {
                for (double q : acts) {
                    if (sim.uniform01() < q) {
                        ++hits;
                        break;
                    }
                }
            }
            const double se = std::sqrt(p * (1 - p) / kActTrials);
            worst = std::max(worst, std::fabs(static_cast<double>(hits) / kActTrials - p) / se);
        }
        return {worst <= kSigmas, std::to_string(kActLists) + " act lists, worst deviation " + fmt(worst, 2) + " sigma"};
    }

    Verdict determinism() const {
        SimulationConfig c = config_;
        c.realizations = 3;
        const auto rs = *make_preset("rs", c);
        auto csv = [&](const SimulationConfig& cfg) {
            std::ostringstream os;
            write_scenario_csv(os, run_scenario(rs, cfg));
            return os.str();
        };
        const auto a = csv(c);
        const auto b = csv(c);
        c.seed += 1;
        const auto other = csv(c);
        return {a == b && a != other, std::string("same seed ") + (a == b ? "identical" : "DIFFERENT") +
                                          ", other seed " + (a != other ? "differs" : "IDENTICAL")};
    }

    Verdict conservation() const {
        bool sizes = true;
        for (const auto& [name, result] : results_) {
            for (const auto& run : result.realizations) {
                for (const auto& y : run) {
                    sizes = sizes && y.census.total() == 2299;
                }
            }
        }
        // Stage letters per node slot and occupant over full runs.
        const std::regex pattern("N*(PA+D+)?|N*(P(A+D*)?)?|A*D*");
        const std::regex completed_fresh("N*PA+D+");
        const std::regex completed_seeded("A*D+");
        std::int64_t bad = 0;
        std::int64_t paths_checked = 0;
        const auto rs = *make_preset("rs", config_);
        for (std::uint64_t r = 0; r < 5; ++r) {
            std::map<std::pair<NodeId, std::uint32_t>, std::string> paths;
            run_realization(rs, config_, r, nullptr, [&](const State& s, const YearMetrics&) {
                sizes = sizes && s.population.size() == 2299;
                for (const auto& ind : s.population) {
                    paths[{ind.id, ind.replacements}] += "NPAD"[static_cast<int>(ind.stage)];
                }
            });
            for (const auto& [key, path] : paths) {
                ++paths_checked;
                const bool ended = paths.contains({key.first, key.second + 1});
                const bool seeded = key.second == 0 && path.front() != 'N' && path.front() != 'P';
                const std::regex& re = ended ? (seeded ? completed_seeded : completed_fresh) : pattern;
                bad += std::regex_match(path, re) ? 0 : 1;
            }
        }
        return {sizes && bad == 0, std::string("population ") + (sizes ? "2299 in every year" : "VARIED") + "; " +
                                       std::to_string(bad) + "/" + std::to_string(paths_checked) +
                                       " trajectories off-pattern"};
    }

    Verdict coupled_monotonicity() const {
        // P5 (risk 1.69) and P2 (risk 1.365) share therapy and random numbers.
        const auto& hi = results_.at("p5");
        const auto& lo = results_.at("p2");
        double cum_hi = 0;
        double cum_lo = 0;
        int violations = 0;
        int first_bad = 0;
        for (std::size_t i = 0; i < hi.averaged.size(); ++i) {
            cum_hi += hi.averaged[i].mean_new_infections;
            cum_lo += lo.averaged[i].mean_new_infections;
            if (cum_hi < cum_lo) {
                ++violations;
                first_bad = first_bad ? first_bad : hi.averaged[i].year;
            }
        }
        return {violations == 0, "cumulative mean infections 2044: " + fmt(cum_hi, 1) + " (1.69) vs " +
                                     fmt(cum_lo, 1) + " (1.365); years violated " + std::to_string(violations) +
                                     (first_bad ? " from " + std::to_string(first_bad) : "")};
    }

    static Verdict t_test_oracle() {
        const std::vector<double> a{1, 2, 3, 4, 5};
        const std::vector<double> b{1.1, 1.9, 3.2, 3.8, 5.1};
        const auto r = paired_t_test(a, b, 0.05);
        const double t_oracle = -0.02 / std::sqrt(0.027 / 5.0);
        bool degenerate = false;
        try {
            paired_t_test(a, a);
        } catch (const ComputationError&) {
            degenerate = true;
        }
        const bool ok = std::fabs(r.t - t_oracle) <= kTTolerance && r.df == 4 && !r.reject && degenerate;
        return {ok, "t = " + fmt(r.t, 7) + " (oracle " + fmt(t_oracle, 7) + "), df = " + std::to_string(int(r.df)) +
                        ", p = " + fmt(r.p_value, 4) + ", identical series " +
                        (degenerate ? "rejected" : "NOT rejected")};
    }

private:
    SimulationConfig config_;
    std::map<std::string, SimulationResult> results_;
};

} // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    const Acceptance acc;
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"RS magnitude", [&] { return acc.rs_magnitude(); }},
        {"scenario ordering 2010", [&] { return acc.ordering_2010(); }},
        {"long-run counterbalance", [&] { return acc.counterbalance(); }},
        {"diagnosed fraction", [&] { return acc.diagnosed_fraction(); }},
        {"percentage table regression", [] { return Acceptance::percentage_regression(); }},
        {"network suite", [] { return Acceptance::network_suite(); }},
        {"distribution suite", [] { return Acceptance::distribution_suite(); }},
        {"transmission oracle", [] { return Acceptance::transmission_oracle(); }},
        {"determinism", [&] { return acc.determinism(); }},
        {"conservation", [&] { return acc.conservation(); }},
        {"coupled monotonicity", [&] { return acc.coupled_monotonicity(); }},
        {"t-test oracle", [] { return Acceptance::t_test_oracle(); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v{false, ""};
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += v.pass ? 0 : 1;
        std::printf("[%2zu] %s  %-28s %s\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    v.detail.c_str());
        std::fflush(stdout);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%d/%zu criteria passed in %.1f s\n", static_cast<int>(criteria.size()) - failed, criteria.size(),
                secs);
    return failed == 0 ? 0 : 1;
}
