#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <span>
#include <string>

#include "canepi/errors.hpp"
#include "canepi/network.hpp"

namespace canepi {

/// Role of the susceptible partner in an act.
enum class ActRole : std::uint8_t { Receptive, Insertive };

/// Which per-act base applies: the elevated primary-infection window or the
/// asymptomatic level (also used for the rest of the infection year).
enum class InfectivityLevel : std::uint8_t { PiWindow, ApLevel };

enum class TherapyMode : std::uint8_t { Moderate, Optimistic };

inline const char* to_string(TherapyMode m) { return m == TherapyMode::Optimistic ? "optimistic" : "moderate"; }

/// Per-act transmission probabilities keyed by infectivity level and role.
struct PerActBase {
    double pi_receptive = 0.22;
    double pi_insertive = 0.044;
    double ap_receptive = 0.011;
    double ap_insertive = 0.0022;

    double at(InfectivityLevel level, ActRole role) const noexcept {
        if (level == InfectivityLevel::PiWindow) {
            return role == ActRole::Receptive ? pi_receptive : pi_insertive;
        }
        return role == ActRole::Receptive ? ap_receptive : ap_insertive;
    }

    friend bool operator==(const PerActBase&, const PerActBase&) = default;
};

/// clamp(base * infectivity_reduction * risk * agreement * susceptibility, 0, 1)
inline double per_act_probability(double base, double infectivity_reduction, double risk, double agreement,
                                  double susceptibility = 1.0) noexcept {
    return std::clamp(base * infectivity_reduction * risk * agreement * susceptibility, 0.0, 1.0);
}

/// Probability that at least one of a set of independent acts transmits.
inline double per_year_probability(std::span<const double> acts) noexcept {
    double escape = 1.0;
    for (double p : acts) {
        escape *= 1.0 - p;
    }
    return 1.0 - escape;
}

/// Same as above for `count` identical acts.
inline double per_year_probability(double p, std::int64_t count) noexcept {
    if (count <= 0) {
        return 0.0;
    }
    return 1.0 - std::pow(1.0 - p, static_cast<double>(count));
}

/// Safety-agreement reduction: applies to casual edges where either member
/// currently has a steady partner.
inline double agreement_factor(EdgeTag tag, bool source_partnered, bool target_partnered,
                               double reduction = 0.84) noexcept {
    return tag == EdgeTag::Casual && (source_partnered || target_partnered) ? reduction : 1.0;
}

/// Piecewise-constant year -> value map. The value at `year` is the entry with
/// the greatest key <= year.
template <class T>
class YearSchedule {
public:
    YearSchedule() = default;
    explicit YearSchedule(T constant, int from_year) { points_[from_year] = constant; }

    void set(int from_year, T value) { points_[from_year] = value; }

    /// Drops every change point after `year`.
    void truncate_after(int year) { points_.erase(points_.upper_bound(year), points_.end()); }

    bool covers(int year) const { return !points_.empty() && points_.begin()->first <= year; }

    T at(int year) const {
        auto it = points_.upper_bound(year);
        if (it == points_.begin()) {
            throw ParameterError("schedule has no value for year " + std::to_string(year));
        }
        return std::prev(it)->second;
    }

    const std::map<int, T>& points() const noexcept { return points_; }

    friend bool operator==(const YearSchedule&, const YearSchedule&) = default;

private:
    std::map<int, T> points_;
};

using RiskSchedule = YearSchedule<double>;
using TherapySchedule = YearSchedule<TherapyMode>;

} // namespace canepi
