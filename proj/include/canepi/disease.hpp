#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>

#include "canepi/distributions.hpp"
#include "canepi/errors.hpp"
#include "canepi/network.hpp"
#include "canepi/transmission.hpp"

namespace canepi {

/// Infection stage. Transitions only run forward: Negative -> PI -> AP -> AIDS.
enum class Stage : std::uint8_t { Negative, PI, AP, AIDS };

inline const char* to_string(Stage s) {
    switch (s) {
    case Stage::Negative:
        return "negative";
    case Stage::PI:
        return "pi";
    case Stage::AP:
        return "ap";
    case Stage::AIDS:
        return "aids";
    }
    return "?";
}

inline bool infected(Stage s) noexcept { return s != Stage::Negative; }

struct DiseaseParams {
    Binomial ap_duration_untreated{26, 0.5};
    Binomial ap_duration_treated{52, 0.5};
    DiscreteUniform aids_duration{1, 2};
    ContinuousUniform moderate_reduction{0.1, 0.5};
    ContinuousUniform optimistic_reduction{0.01, 0.1};
    /// Yearly probability that an undiagnosed infected agent is diagnosed.
    double p_diag = 0.04;
    double p_success = 0.9;
    int treatment_start_year = 1985;
    bool aids_sexually_active = false;

    friend bool operator==(const DiseaseParams&, const DiseaseParams&) = default;
};

struct Individual {
    NodeId id = 0;
    Stage stage = Stage::Negative;
    std::int32_t years_in_stage = 0;
    std::int32_t ap_duration = 0;
    std::int32_t aids_duration = 0;
    bool diagnosed = false;
    bool treated = false;
    bool treatment_successful = false;
    bool dead = false;
    /// Multiplier on per-act transmission probability; 1 unless treated successfully.
    double infectivity_reduction = 1.0;
    std::optional<NodeId> steady_partner;
    std::int32_t steady_years_left = 0;
    /// Calendar year of the most recent infection, if any.
    std::optional<int> infection_year;
    /// Times this node slot has been refilled after a death.
    std::uint32_t replacements = 0;

    bool is_infected() const noexcept { return infected(stage); }

    /// Takes part in sexual acts this year.
    bool sexually_active(const DiseaseParams& params) const noexcept {
        return stage != Stage::AIDS || params.aids_sexually_active;
    }
};

/// Negative -> PI. The primary-infection window is spent in the next yearly
/// step; the engine skips progression for agents infected in the current step.
inline Individual infect(Individual ind, int year) {
    if (ind.stage != Stage::Negative) {
        throw StateError("infect: individual " + std::to_string(ind.id) + " is already infected");
    }
    ind.stage = Stage::PI;
    ind.years_in_stage = 0;
    ind.ap_duration = 0;
    ind.aids_duration = 0;
    ind.diagnosed = false;
    ind.treated = false;
    ind.treatment_successful = false;
    ind.infectivity_reduction = 1.0;
    ind.infection_year = year;
    return ind;
}

/// One year of natural history. PI lasts one step; AP and AIDS last their
/// drawn durations; the agent is flagged dead when AIDS time runs out.
inline Individual advance_year(Individual ind, RngStream& rng, const DiseaseParams& params) {
    switch (ind.stage) {
    case Stage::Negative:
        break;
    case Stage::PI: {
        const auto& dist = ind.treatment_successful ? params.ap_duration_treated : params.ap_duration_untreated;
        ind.stage = Stage::AP;
        ind.years_in_stage = 0;
        ind.ap_duration = static_cast<std::int32_t>(sample_binomial(dist.n, dist.p, rng));
        break;
    }
    case Stage::AP:
        if (++ind.years_in_stage >= ind.ap_duration) {
            ind.stage = Stage::AIDS;
            ind.years_in_stage = 0;
            ind.aids_duration = static_cast<std::int32_t>(
                sample_discrete_uniform(params.aids_duration.lo, params.aids_duration.hi, rng));
        }
        break;
    case Stage::AIDS:
        if (++ind.years_in_stage >= ind.aids_duration) {
            ind.dead = true;
        }
        break;
    }
    return ind;
}

/// Yearly diagnosis hazard for undiagnosed infected agents, followed by
/// treatment when it is available. Diagnosed agents still waiting for
/// treatment start it as soon as it becomes available.
inline Individual diagnose_and_treat_step(Individual ind, TherapyMode mode, RngStream& rng,
                                          const DiseaseParams& params, bool treatment_available = true) {
    if (!ind.is_infected() || ind.dead) {
        return ind;
    }
    if (!ind.diagnosed) {
        if (!(rng.uniform01() < params.p_diag)) {
            return ind;
        }
        ind.diagnosed = true;
    }
    if (ind.treated || !treatment_available) {
        return ind;
    }
    ind.treated = true;
    ind.treatment_successful = rng.uniform01() < params.p_success;
    if (!ind.treatment_successful) {
        ind.infectivity_reduction = 1.0;
        return ind;
    }
    const auto& range = mode == TherapyMode::Optimistic ? params.optimistic_reduction : params.moderate_reduction;
    ind.infectivity_reduction = sample_continuous_uniform(range.a, range.b, rng);
    if (ind.stage == Stage::AP) {
        const auto& dist = params.ap_duration_treated;
        const auto redrawn = static_cast<std::int32_t>(sample_binomial(dist.n, dist.p, rng));
        ind.ap_duration = std::max(redrawn, ind.years_in_stage + 1);
    }
    return ind;
}

/// Fresh susceptible in the same node slot. Partner bookkeeping on the other
/// side is handled by the population overload.
inline Individual replace_dead(const Individual& ind) {
    if (!ind.dead) {
        throw StateError("replace_dead: individual " + std::to_string(ind.id) + " is alive");
    }
    Individual fresh;
    fresh.id = ind.id;
    fresh.replacements = ind.replacements + 1;
    return fresh;
}

/// Replaces `population[id]` and dissolves its steady partnership on both sides.
inline void replace_dead(std::span<Individual> population, NodeId id) {
    Individual& ind = population[id];
    if (ind.steady_partner) {
        Individual& partner = population[*ind.steady_partner];
        partner.steady_partner.reset();
        partner.steady_years_left = 0;
    }
    ind = replace_dead(ind);
}

} // namespace canepi
