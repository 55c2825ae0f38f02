#pragma once

#include <array>
#include <map>
#include <string>

namespace canepi::test {

inline constexpr std::array<const char*, 6> kScenarioOrder{"rs", "p1", "p2", "p3", "p4", "p5"};

struct PublishedYear {
    int year;
    std::array<double, 6> incidence;
    /// Reported signed percentage vs rs for p1..p5.
    std::array<double, 5> pct;
};

// Averaged incidence per 100 PY at five-year intervals and the percentages printed beside them.
inline constexpr std::array<PublishedYear, 7> kPublishedIncidence{{
    {2010, {1.61423, 1.76164, 1.62148, 1.7568, 1.8583, 2.18211}, {9.13, 0.45, 8.83, 15.12, 35.18}},
    {2015, {1.69397, 1.77855, 1.68189, 1.75922, 1.87763, 2.15311}, {4.99, -0.71, 3.85, 10.84, 27.1}},
    {2020, {1.73505, 1.79063, 1.50065, 1.56831, 1.84138, 2.0057}, {3.2, -13.51, -9.61, 6.13, 15.6}},
    {2025, {1.60215, 1.77855, 1.54657, 1.57556, 1.59248, 1.71331}, {11.01, -3.47, -1.66, -0.6, 6.94}},
    {2030, {1.63356, 1.81238, 1.44991, 1.40399, 1.52482, 1.64081}, {10.95, -11.24, -14.05, -6.66, 0.44}},
    {2035, {1.5804, 1.76647, 1.16476, 1.41124, 1.42816, 1.66739}, {11.77, -26.3, -10.7, -9.63, 5.5}},
    {2040, {1.59973, 1.64564, 1.14059, 1.3025, 1.37016, 1.57556}, {2.87, -28.7, -18.58, -14.35, -1.51}},
}};

inline std::map<std::string, std::map<int, double>> published_series() {
    std::map<std::string, std::map<int, double>> series;
    for (const auto& row : kPublishedIncidence) {
        for (std::size_t s = 0; s < kScenarioOrder.size(); ++s) {
            series[kScenarioOrder[s]][row.year] = row.incidence[s];
        }
    }
    return series;
}

} // namespace canepi::test
