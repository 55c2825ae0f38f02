#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "canepi/analysis.hpp"
#include "canepi/disease.hpp"
#include "canepi/metrics.hpp"
#include "canepi/network.hpp"
#include "canepi/parameters.hpp"
#include "canepi/partnerships.hpp"
#include "canepi/rng.hpp"
#include "canepi/transmission.hpp"

namespace canepi {

/// Keys for splitting a realization stream by purpose.
namespace stream_key {
inline constexpr std::uint64_t network = 0x4E45;
inline constexpr std::uint64_t seeding = 0x5345;
inline constexpr std::uint64_t initial_partnerships = 0x4950;
inline constexpr std::uint64_t rewire = 0x5257;
inline constexpr std::uint64_t partnerships = 0x5041;
inline constexpr std::uint64_t acts = 0x4143;
inline constexpr std::uint64_t infection = 0x494E;
inline constexpr std::uint64_t diagnosis = 0x4449;
inline constexpr std::uint64_t progression = 0x5052;
inline constexpr std::uint64_t retry = 0x5254;
} // namespace stream_key

struct Network {
    DegreeSequence degrees;
    EdgeSet edges;
};

/// One realization's mutable state.
struct State {
    /// Last completed year; start_year - 1 right after initialization.
    int year = 0;
    std::vector<Individual> population;
    DegreeSequence degrees;
    EdgeSet edges;
    std::int64_t rewire_fallbacks = 0;

    StageCensus census() const {
        StageCensus c;
        for (const auto& ind : population) {
            switch (ind.stage) {
            case Stage::Negative:
                ++c.negative;
                break;
            case Stage::PI:
                ++c.pi;
                break;
            case Stage::AP:
                ++c.ap;
                break;
            case Stage::AIDS:
                ++c.aids;
                break;
            }
        }
        return c;
    }
};

inline WiringOptions wiring_options(const NetworkParams& params) {
    WiringOptions opts;
    opts.repair_budget_per_node = params.repair_budget_per_node;
    return opts;
}

inline Network build_network(const ModelParameters& model, RngStream rng) {
    const PowerLawDegreeTable table(model.network.gamma, model.network.k_max, model.network.p_zero);
    Network net;
    net.degrees = generate_degree_sequence(static_cast<std::size_t>(model.population.size), table, rng);
    net.edges = wire_configuration_model(net.degrees, rng, wiring_options(model.network));
    return net;
}

namespace detail {

inline std::vector<NodeId> choose_initial_infected(const ModelParameters& model, const DegreeSequence& degrees,
                                                   RngStream& rng) {
    const auto n = static_cast<std::size_t>(model.population.size);
    const auto k = static_cast<std::size_t>(model.population.initial_infected);
    std::vector<NodeId> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        ids[i] = static_cast<NodeId>(i);
    }
    if (model.population.seeding == SeedingMode::Uniform) {
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + rng.uniform_below(n - i);
            std::swap(ids[i], ids[j]);
        }
        ids.resize(k);
    } else {
        // Weighted sampling without replacement (exponential keys); degree-0
        // nodes are only taken once every positive-degree node is.
        std::vector<std::pair<double, NodeId>> keys(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = static_cast<double>(degrees[i]);
            const double u = rng.uniform01();
            keys[i] = {w > 0.0 ? std::log1p(-u) / w : -std::numeric_limits<double>::infinity(), ids[i]};
        }
        std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k), keys.end(),
                          [](const auto& x, const auto& y) { return x.first > y.first || (x.first == y.first && x.second < y.second); });
        ids.clear();
        for (std::size_t i = 0; i < k; ++i) {
            ids.push_back(keys[i].second);
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

} // namespace detail

/// State at the end of `start_year - 1`: network wired, initial positives
/// placed in AP part-way through their asymptomatic period, steady
/// partnerships seeded by one formation pass.
inline State initialize(const ModelParameters& model, int start_year, const RngStream& rng,
                        const Network* shared = nullptr) {
    State state;
    state.year = start_year - 1;
    if (shared) {
        state.degrees = shared->degrees;
        state.edges = shared->edges;
    } else {
        Network net = build_network(model, rng.derive({stream_key::network}));
        state.degrees = std::move(net.degrees);
        state.edges = std::move(net.edges);
    }
    const auto n = static_cast<std::size_t>(model.population.size);
    state.population.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        state.population[i].id = static_cast<NodeId>(i);
    }

    RngStream seed_rng = rng.derive({stream_key::seeding});
    const auto& ap = model.disease.ap_duration_untreated;
    for (NodeId id : detail::choose_initial_infected(model, state.degrees, seed_rng)) {
        Individual& ind = state.population[id];
        ind.stage = Stage::AP;
        ind.ap_duration = static_cast<std::int32_t>(sample_binomial(ap.n, ap.p, seed_rng));
        ind.years_in_stage =
            static_cast<std::int32_t>(sample_discrete_uniform(0, std::max(ind.ap_duration - 1, 0), seed_rng));
        ind.diagnosed = seed_rng.uniform01() < model.population.initial_diagnosed_fraction;
    }

    RngStream partner_rng = rng.derive({stream_key::initial_partnerships});
    form_and_dissolve_steady(state.population, state.edges, model.partnerships, partner_rng);
    return state;
}

/// Advances `state` through `year`:
///   1. rewire casual edges around current steady pairs
///   2. age, dissolve and form steady partnerships
///   3. schedule acts against the start-of-year infection census
///   4. one Bernoulli trial per serodiscordant pair with the composed yearly probability
///   5. infect new cases (they transmit from next year on)
///   6. diagnosis and treatment for all infected
///   7. natural history for everyone not infected this year
///   8. replace the dead
inline YearMetrics step_year(State& state, const ScenarioSpec& scenario, const ModelParameters& model, int year,
                             const RngStream& rng) {
    auto& pop = state.population;

    RngStream rewire_rng = rng.derive({static_cast<std::uint64_t>(year), stream_key::rewire});
    const auto pairs = steady_pairs(pop);
    auto rewired = annual_rewire(state.edges, state.degrees, pairs, rewire_rng, wiring_options(model.network));
    state.edges = std::move(rewired.edges);
    state.rewire_fallbacks += rewired.kept_previous ? 1 : 0;

    RngStream partner_rng = rng.derive({static_cast<std::uint64_t>(year), stream_key::partnerships});
    form_and_dissolve_steady(pop, state.edges, model.partnerships, partner_rng);

    std::int64_t negatives_at_start = 0;
    for (const auto& ind : pop) {
        negatives_at_start += ind.stage == Stage::Negative ? 1 : 0;
    }

    const ScenarioFactors factors = scenario_factors(scenario, year);
    const auto& tx = model.transmission;
    const ActSchedule schedule = schedule_acts(pop, state.edges, model.partnerships, model.disease,
                                               rng.derive({static_cast<std::uint64_t>(year), stream_key::acts}));

    std::vector<NodeId> newly_infected;
    for (std::size_t i = 0; i < schedule.entries.size();) {
        const NodeId src = schedule.entries[i].source;
        const NodeId dst = schedule.entries[i].target;
        const Individual& source = pop[src];
        const Individual& target = pop[dst];
        double escape = 1.0;
        for (; i < schedule.entries.size() && schedule.entries[i].source == src && schedule.entries[i].target == dst;
             ++i) {
            const ActEntry& entry = schedule.entries[i];
            const double agreement = agreement_factor(entry.tag, source.steady_partner.has_value(),
                                                      target.steady_partner.has_value(), tx.casual_agreement_factor);
            const double p_r = per_act_probability(tx.per_act.at(entry.level, ActRole::Receptive),
                                                   source.infectivity_reduction, factors.risk, agreement,
                                                   tx.susceptibility);
            const double p_i = per_act_probability(tx.per_act.at(entry.level, ActRole::Insertive),
                                                   source.infectivity_reduction, factors.risk, agreement,
                                                   tx.susceptibility);
            escape *= (1.0 - per_year_probability(p_r, entry.receptive)) * (1.0 - per_year_probability(p_i, entry.insertive));
        }
        RngStream trial = rng.derive({static_cast<std::uint64_t>(year), stream_key::infection, src, dst});
        if (trial.uniform01() < 1.0 - escape) {
            newly_infected.push_back(dst);
        }
    }
    std::sort(newly_infected.begin(), newly_infected.end());
    newly_infected.erase(std::unique(newly_infected.begin(), newly_infected.end()), newly_infected.end());
    for (NodeId id : newly_infected) {
        pop[id] = infect(pop[id], year);
    }

    const bool treatment_available = year >= model.disease.treatment_start_year;
    for (auto& ind : pop) {
        if (!ind.is_infected()) {
            continue;
        }
        RngStream diag_rng = rng.derive({static_cast<std::uint64_t>(year), stream_key::diagnosis, ind.id});
        ind = diagnose_and_treat_step(ind, factors.therapy, diag_rng, model.disease, treatment_available);
    }

    for (auto& ind : pop) {
        if (!ind.is_infected() || ind.infection_year == year) {
            continue;
        }
        RngStream prog_rng = rng.derive({static_cast<std::uint64_t>(year), stream_key::progression, ind.id});
        ind = advance_year(ind, prog_rng, model.disease);
    }

    for (auto& ind : pop) {
        if (!ind.dead) {
            continue;
        }
        if (ind.steady_partner) {
            detail::set_tag(state.edges, ind.id, *ind.steady_partner, EdgeTag::Casual);
        }
        replace_dead(pop, ind.id);
    }

    YearMetrics m;
    m.year = year;
    m.new_infections = static_cast<std::int64_t>(newly_infected.size());
    m.susceptible_person_years = susceptible_person_years(negatives_at_start, m.new_infections);
    m.incidence_per_100py = incidence(m.new_infections, m.susceptible_person_years);
    m.census = state.census();
    std::int64_t diagnosed = 0;
    for (const auto& ind : pop) {
        diagnosed += ind.is_infected() && ind.diagnosed ? 1 : 0;
    }
    const auto infected_now = m.census.infected();
    m.diagnosed_fraction = infected_now > 0 ? static_cast<double>(diagnosed) / static_cast<double>(infected_now) : 0.0;
    state.year = year;
    return m;
}

using YearObserver = std::function<void(const State&, const YearMetrics&)>;

struct RealizationOutput {
    std::vector<YearMetrics> years;
    std::int64_t rewire_fallbacks = 0;
    std::int64_t retries = 0;
};

inline void validate(const SimulationConfig& config) {
    if (config.realizations < 1) {
        throw ParameterError("realizations must be >= 1");
    }
    if (config.start_year >= config.end_year) {
        throw ParameterError("start_year must be before end_year");
    }
}

/// Stream of realization `index`. Identical across scenarios, so scenarios
/// run with the same seed use common random numbers.
inline RngStream realization_stream(std::uint64_t seed, std::uint64_t index, int attempt = 0) {
    RngStream base(seed, index);
    return attempt == 0 ? base : base.derive({stream_key::retry, static_cast<std::uint64_t>(attempt)});
}

inline std::optional<Network> shared_network_for(const SimulationConfig& config, const ModelParameters& model) {
    if (!config.shared_network) {
        return std::nullopt;
    }
    return build_network(model, RngStream(config.seed, ~std::uint64_t{0}).derive({stream_key::network}));
}

inline RealizationOutput run_realization(const ScenarioSpec& scenario, const SimulationConfig& config,
                                         std::uint64_t index, const Network* shared = nullptr,
                                         const YearObserver& observer = {}) {
    const ModelParameters& model = scenario.model(config);
    constexpr int max_retries = 3;
    RealizationOutput out;
    for (int attempt = 0;; ++attempt) {
        try {
            const RngStream rng = realization_stream(config.seed, index, attempt);
            State state = initialize(model, config.start_year, rng, shared);
            out.years.clear();
            out.years.reserve(static_cast<std::size_t>(config.end_year - config.start_year + 1));
            for (int year = config.start_year; year <= config.end_year; ++year) {
                out.years.push_back(step_year(state, scenario, model, year, rng));
                if (observer) {
                    observer(state, out.years.back());
                }
            }
            out.rewire_fallbacks = state.rewire_fallbacks;
            out.retries = attempt;
            return out;
        } catch (const GenerationError&) {
            if (attempt >= max_retries) {
                throw;
            }
        }
    }
}

/// Runs every realization (concurrently when `threads` > 1) and averages.
/// Output does not depend on the thread count.
inline SimulationResult run_scenario(const ScenarioSpec& scenario, const SimulationConfig& config,
                                     unsigned threads = 0) {
    validate(config);
    const ModelParameters& model = scenario.model(config);
    const auto shared = shared_network_for(config, model);
    const auto count = static_cast<std::size_t>(config.realizations);
    std::vector<RealizationOutput> outputs(count);

    if (threads == 0) {
        threads = std::max(1U, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t r = next++; r < count; r = next++) {
            try {
                outputs[r] = run_realization(scenario, config, r, shared ? &*shared : nullptr);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    SimulationResult result;
    result.scenario = scenario.name;
    result.seed = config.seed;
    result.rng_algorithm = std::string(RngStream::algorithm_name);
    for (auto& out : outputs) {
        result.rewire_fallbacks += out.rewire_fallbacks;
        result.realization_retries += out.retries;
        result.realizations.push_back(std::move(out.years));
    }
    result.averaged = average_realizations(result.realizations);
    return result;
}

} // namespace canepi
