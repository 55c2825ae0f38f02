#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "canepi/errors.hpp"

namespace canepi {

struct StageCensus {
    std::int64_t negative = 0;
    std::int64_t pi = 0;
    std::int64_t ap = 0;
    std::int64_t aids = 0;

    std::int64_t total() const noexcept { return negative + pi + ap + aids; }
    std::int64_t infected() const noexcept { return pi + ap + aids; }

    friend bool operator==(const StageCensus&, const StageCensus&) = default;
};

/// One simulated year of one realization. Census and diagnosed fraction are
/// taken at the end of the year; incidence counts this year's infections.
struct YearMetrics {
    int year = 0;
    std::int64_t new_infections = 0;
    double susceptible_person_years = 0.0;
    double incidence_per_100py = 0.0;
    double diagnosed_fraction = 0.0;
    StageCensus census;

    friend bool operator==(const YearMetrics&, const YearMetrics&) = default;
};

/// Realization-averaged values for one year.
struct AveragedYear {
    int year = 0;
    double mean_incidence = 0.0;
    /// Sample standard deviation across realizations (0 for a single realization).
    double sd_incidence = 0.0;
    double mean_diagnosed_fraction = 0.0;
    double mean_new_infections = 0.0;
    double mean_negative = 0.0;
    double mean_pi = 0.0;
    double mean_ap = 0.0;
    double mean_aids = 0.0;

    friend bool operator==(const AveragedYear&, const AveragedYear&) = default;
};

struct SimulationResult {
    std::string scenario;
    std::uint64_t seed = 0;
    std::string rng_algorithm;
    /// realizations[r][y] is year index y of realization r.
    std::vector<std::vector<YearMetrics>> realizations;
    std::vector<AveragedYear> averaged;
    /// Years in which residual rewiring failed and last year's casual edges were kept.
    std::int64_t rewire_fallbacks = 0;
    /// Realizations that had to be restarted on a fresh stream.
    std::int64_t realization_retries = 0;

    const AveragedYear* find_year(int year) const {
        for (const auto& row : averaged) {
            if (row.year == year) {
                return &row;
            }
        }
        return nullptr;
    }
};

/// Per-year arithmetic mean over realizations. All realizations must cover the same years.
inline std::vector<AveragedYear> average_realizations(const std::vector<std::vector<YearMetrics>>& runs) {
    std::vector<AveragedYear> out;
    if (runs.empty()) {
        return out;
    }
    const std::size_t years = runs.front().size();
    const auto n = static_cast<double>(runs.size());
    for (const auto& run : runs) {
        if (run.size() != years) {
            throw ComputationError("realizations cover different year ranges");
        }
    }
    out.resize(years);
    for (std::size_t y = 0; y < years; ++y) {
        AveragedYear& row = out[y];
        row.year = runs.front()[y].year;
        for (const auto& run : runs) {
            const YearMetrics& m = run[y];
            row.mean_incidence += m.incidence_per_100py;
            row.mean_diagnosed_fraction += m.diagnosed_fraction;
            row.mean_new_infections += static_cast<double>(m.new_infections);
            row.mean_negative += static_cast<double>(m.census.negative);
            row.mean_pi += static_cast<double>(m.census.pi);
            row.mean_ap += static_cast<double>(m.census.ap);
            row.mean_aids += static_cast<double>(m.census.aids);
        }
        row.mean_incidence /= n;
        row.mean_diagnosed_fraction /= n;
        row.mean_new_infections /= n;
        row.mean_negative /= n;
        row.mean_pi /= n;
        row.mean_ap /= n;
        row.mean_aids /= n;
        if (runs.size() > 1) {
            double ss = 0.0;
            for (const auto& run : runs) {
                const double d = run[y].incidence_per_100py - row.mean_incidence;
                ss += d * d;
            }
            row.sd_incidence = std::sqrt(ss / (n - 1.0));
        }
    }
    return out;
}

} // namespace canepi
