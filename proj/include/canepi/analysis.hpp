#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "canepi/errors.hpp"
#include "canepi/metrics.hpp"

namespace canepi {

/// New infections per 100 susceptible person-years; 0 when both inputs are 0.
inline double incidence(std::int64_t new_infections, double susceptible_py) {
    if (susceptible_py < 0.0) {
        throw ComputationError("incidence: negative person-years");
    }
    if (susceptible_py == 0.0) {
        if (new_infections == 0) {
            return 0.0;
        }
        throw ComputationError("incidence: infections with zero person-years at risk");
    }
    return 100.0 * static_cast<double>(new_infections) / susceptible_py;
}

/// Mid-year convention: incident cases contribute half a year at risk.
inline double susceptible_person_years(std::int64_t negatives_at_start, std::int64_t new_infections) {
    return static_cast<double>(negatives_at_start) - 0.5 * static_cast<double>(new_infections);
}

// ---------------------------------------------------------------------------
// Student t distribution via the regularized incomplete beta function.

namespace detail {

// Continued fraction for I_x(a, b), modified Lentz.
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr int max_iter = 10000;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) {
        d = tiny;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) {
            return h;
        }
    }
    throw ComputationError("incomplete beta: continued fraction did not converge");
}

} // namespace detail

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
inline double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
        throw ParameterError("incomplete beta requires a, b > 0 and x in [0, 1]");
    }
    if (x == 0.0 || x == 1.0) {
        return x;
    }
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// P(|T| >= |t|) for T ~ Student t with `df` degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) {
        throw ParameterError("t distribution requires df > 0");
    }
    if (std::isinf(t)) {
        return 0.0;
    }
    return regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

/// P(T <= t).
inline double student_t_cdf(double t, double df) {
    const double tail = 0.5 * student_t_two_sided_p(t, df);
    return t >= 0.0 ? 1.0 - tail : tail;
}

/// Inverse CDF by bisection on the monotone CDF.
inline double student_t_quantile(double prob, double df) {
    if (!(prob > 0.0 && prob < 1.0)) {
        throw ParameterError("t quantile requires prob in (0, 1)");
    }
    double lo = -1.0;
    double hi = 1.0;
    while (student_t_cdf(lo, df) > prob) {
        lo *= 2.0;
    }
    while (student_t_cdf(hi, df) < prob) {
        hi *= 2.0;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, std::fabs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (student_t_cdf(mid, df) < prob ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct TTestReport {
    double t = 0.0;
    int df = 0;
    double p_value = 1.0;
    double alpha = 0.05;
    double mean_difference = 0.0;
    bool reject = false;
};

/// Two-sided paired-sample t-test on a - b.
inline TTestReport paired_t_test(std::span<const double> a, std::span<const double> b, double alpha = 0.05) {
    if (a.size() != b.size()) {
        throw ParameterError("paired t-test: series lengths differ (" + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()) + ")");
    }
    if (a.size() < 2) {
        throw ParameterError("paired t-test: need at least 2 paired observations");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw ParameterError("paired t-test: alpha must be in (0, 1]");
    }
    const std::size_t n = a.size();
    std::vector<double> d(n);
    bool all_equal = true;
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = a[i] - b[i];
        all_equal = all_equal && d[i] == d[0];
    }
    double mean = 0.0;
    for (double x : d) {
        mean += x;
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : d) {
        ss += (x - mean) * (x - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (all_equal || sd == 0.0) {
        throw ComputationError("paired t-test: all differences are identical (zero variance)");
    }
    TTestReport report;
    report.df = static_cast<int>(n - 1);
    report.mean_difference = mean;
    report.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    report.p_value = student_t_two_sided_p(report.t, report.df);
    report.alpha = alpha;
    report.reject = report.p_value < alpha;
    return report;
}

// ---------------------------------------------------------------------------
// Scenario comparison.

using IncidenceSeries = std::map<int, double>;

struct ComparisonRow {
    int year = 0;
    std::string scenario;
    double incidence = 0.0;
    /// 100 * (P - RS) / RS; empty on the reference row.
    std::optional<double> pct_vs_reference;

    const char* direction() const {
        if (!pct_vs_reference || *pct_vs_reference == 0.0) {
            return "=";
        }
        return *pct_vs_reference > 0.0 ? "up" : "down";
    }
};

/// One row per (year, scenario), reference scenario first within each year.
inline std::vector<ComparisonRow> scenario_comparison_table(const std::map<std::string, IncidenceSeries>& series,
                                                            std::span<const int> years,
                                                            std::string_view reference = "rs") {
    const auto ref = series.find(std::string(reference));
    if (ref == series.end()) {
        throw ParameterError("comparison table: reference scenario '" + std::string(reference) + "' missing");
    }
    auto value = [](const std::string& name, const IncidenceSeries& s, int year) {
        const auto it = s.find(year);
        if (it == s.end()) {
            throw ParameterError("comparison table: scenario '" + name + "' has no value for year " +
                                 std::to_string(year));
        }
        return it->second;
    };
    std::vector<ComparisonRow> rows;
    for (int year : years) {
        const double base = value(ref->first, ref->second, year);
        rows.push_back({year, ref->first, base, std::nullopt});
        for (const auto& [name, s] : series) {
            if (name == ref->first) {
                continue;
            }
            const double v = value(name, s, year);
            if (base == 0.0) {
                throw ComputationError("comparison table: reference incidence is 0 in " + std::to_string(year));
            }
            rows.push_back({year, name, v, 100.0 * (v - base) / base});
        }
    }
    return rows;
}

inline IncidenceSeries incidence_series(const SimulationResult& result) {
    IncidenceSeries s;
    for (const auto& row : result.averaged) {
        s[row.year] = row.mean_incidence;
    }
    return s;
}

inline std::vector<ComparisonRow> scenario_comparison_table(const std::vector<SimulationResult>& results,
                                                            std::span<const int> years,
                                                            std::string_view reference = "rs") {
    std::map<std::string, IncidenceSeries> series;
    for (const auto& r : results) {
        series[r.scenario] = incidence_series(r);
    }
    return scenario_comparison_table(series, years, reference);
}

// ---------------------------------------------------------------------------
// CSV I/O. Fixed six-decimal notation, '.' separator, LF endings.

inline std::string format_number(double x, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, x);
    return buf;
}

inline void write_metadata(std::ostream& os, std::span<const std::string> lines) {
    for (const auto& line : lines) {
        std::istringstream in(line);
        std::string part;
        while (std::getline(in, part)) {
            os << "# " << part << '\n';
        }
    }
}

inline constexpr std::string_view scenario_csv_header =
    "year,mean_incidence_per_100py,sd_incidence,mean_diagnosed_fraction,new_infections_mean,"
    "stage_negative,stage_pi,stage_ap,stage_aids";

inline void write_scenario_csv(std::ostream& os, const SimulationResult& result,
                               std::span<const std::string> metadata = {}) {
    write_metadata(os, metadata);
    os << scenario_csv_header << '\n';
    for (const auto& r : result.averaged) {
        os << r.year << ',' << format_number(r.mean_incidence) << ',' << format_number(r.sd_incidence) << ','
           << format_number(r.mean_diagnosed_fraction) << ',' << format_number(r.mean_new_infections) << ','
           << format_number(r.mean_negative) << ',' << format_number(r.mean_pi) << ',' << format_number(r.mean_ap)
           << ',' << format_number(r.mean_aids) << '\n';
    }
}

inline void write_comparison_csv(std::ostream& os, std::span<const ComparisonRow> rows,
                                 std::span<const std::string> metadata = {}) {
    write_metadata(os, metadata);
    os << "year,scenario,incidence,pct_vs_rs\n";
    for (const auto& row : rows) {
        os << row.year << ',' << row.scenario << ',' << format_number(row.incidence) << ',';
        if (row.pct_vs_reference) {
            os << format_number(*row.pct_vs_reference, 2);
        }
        os << '\n';
    }
}

/// Two-column `year,incidence_per_100py` series. A non-numeric first row is
/// taken as a header; blank and `#` lines are skipped.
inline IncidenceSeries read_historical_csv(std::istream& in, const std::string& source = "historical series") {
    IncidenceSeries series;
    std::string line;
    int line_no = 0;
    bool first_data_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto comma = line.find(',');
        auto fail = [&](const std::string& why) {
            throw ConfigError(source + ":" + std::to_string(line_no), why);
        };
        if (comma == std::string::npos) {
            fail("expected two comma-separated columns");
        }
        const std::string y = line.substr(0, comma);
        const std::string v = line.substr(comma + 1);
        std::size_t used_y = 0;
        std::size_t used_v = 0;
        int year = 0;
        double value = 0.0;
        try {
            year = std::stoi(y, &used_y);
            value = std::stod(v, &used_v);
        } catch (const std::exception&) {
            if (first_data_line) {
                first_data_line = false;
                continue;
            }
            fail("cannot parse '" + line + "'");
        }
        first_data_line = false;
        if (used_y != y.size() || used_v != v.size() || v.find(',') != std::string::npos) {
            fail("cannot parse '" + line + "'");
        }
        if (!std::isfinite(value) || value < 0.0) {
            fail("incidence must be a finite non-negative number");
        }
        if (!series.emplace(year, value).second) {
            fail("duplicate year " + std::to_string(year));
        }
    }
    return series;
}

} // namespace canepi
