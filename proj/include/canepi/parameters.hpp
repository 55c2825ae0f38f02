#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "canepi/disease.hpp"
#include "canepi/errors.hpp"
#include "canepi/partnerships.hpp"
#include "canepi/transmission.hpp"

namespace canepi {

enum class SeedingMode : std::uint8_t { Uniform, DegreeWeighted };

struct PopulationParams {
    std::int64_t size = 2299;
    std::int64_t initial_infected = 571;
    double initial_diagnosed_fraction = 0.4;
    SeedingMode seeding = SeedingMode::Uniform;

    friend bool operator==(const PopulationParams&, const PopulationParams&) = default;
};

struct NetworkParams {
    double gamma = 1.6;
    std::int64_t k_max = 200;
    double p_zero = 0.01;
    std::int64_t repair_budget_per_node = 100;

    friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

struct TransmissionParams {
    PerActBase per_act;
    double casual_agreement_factor = 0.84;
    /// Susceptibility of the receiving partner; no data, fixed at 1.
    double susceptibility = 1.0;
    /// Risk factor before a scenario's switch year.
    RiskSchedule risk_schedule{1.30, 1985};

    friend bool operator==(const TransmissionParams&, const TransmissionParams&) = default;
};

/// Everything a scenario may override.
struct ModelParameters {
    PopulationParams population;
    NetworkParams network;
    DiseaseParams disease;
    PartnershipParams partnerships;
    TransmissionParams transmission;

    friend bool operator==(const ModelParameters&, const ModelParameters&) = default;
};

struct SimulationConfig {
    ModelParameters model;
    /// First simulated year; the initial state describes the year before.
    int start_year = 1985;
    int end_year = 2044;
    int realizations = 30;
    std::uint64_t seed = 1984;
    /// All realizations share one degree sequence and initial wiring.
    bool shared_network = false;
};

/// Named overlay of risk and therapy schedules, optionally with its own model parameters.
struct ScenarioSpec {
    std::string name;
    RiskSchedule risk_schedule;
    TherapySchedule therapy_schedule;
    int switch_year = 2006;
    std::optional<ModelParameters> parameters;

    const ModelParameters& model(const SimulationConfig& config) const {
        return parameters ? *parameters : config.model;
    }
};

struct ScenarioFactors {
    double risk;
    TherapyMode therapy;
};

inline ScenarioFactors scenario_factors(const ScenarioSpec& scenario, int year) {
    return {scenario.risk_schedule.at(year), scenario.therapy_schedule.at(year)};
}

/// Scenario that keeps `base_risk` and moderate therapy up to and including
/// `switch_year`, then uses `risk_after` and `therapy_after`.
inline ScenarioSpec make_switch_scenario(std::string name, const RiskSchedule& base_risk, int start_year,
                                         int switch_year, double risk_after, TherapyMode therapy_after) {
    ScenarioSpec spec;
    spec.name = std::move(name);
    spec.switch_year = switch_year;
    spec.risk_schedule = base_risk;
    spec.risk_schedule.truncate_after(switch_year);
    spec.risk_schedule.set(switch_year + 1, risk_after);
    spec.therapy_schedule = TherapySchedule(TherapyMode::Moderate, std::min(start_year, switch_year));
    spec.therapy_schedule.set(switch_year + 1, therapy_after);
    return spec;
}

struct PresetRow {
    std::string_view name;
    double risk_scale;
    TherapyMode therapy;
};

/// The reference scenario and the five prediction scenarios. Risk after the
/// switch is `risk_scale` times the 2000-2005 level of 1.30.
inline constexpr std::array<PresetRow, 6> preset_table{{
    {"rs", 1.00, TherapyMode::Moderate},
    {"p1", 1.05, TherapyMode::Moderate},
    {"p2", 1.05, TherapyMode::Optimistic},
    {"p3", 1.10, TherapyMode::Optimistic},
    {"p4", 1.20, TherapyMode::Optimistic},
    {"p5", 1.30, TherapyMode::Optimistic},
}};

inline constexpr double reference_risk = 1.30;

inline std::optional<ScenarioSpec> make_preset(std::string_view name, const SimulationConfig& config,
                                               int switch_year = 2006) {
    for (const auto& row : preset_table) {
        if (row.name == name) {
            return make_switch_scenario(std::string(name), config.model.transmission.risk_schedule, config.start_year,
                                        switch_year, row.risk_scale * reference_risk, row.therapy);
        }
    }
    return std::nullopt;
}

inline std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& row : preset_table) {
        names.emplace_back(row.name);
    }
    return names;
}

} // namespace canepi
