#pragma once

#include <cstdint>
#include <span>
#include <unordered_set>
#include <utility>
#include <vector>

#include "canepi/disease.hpp"
#include "canepi/distributions.hpp"
#include "canepi/network.hpp"
#include "canepi/transmission.hpp"

namespace canepi {

struct PartnershipParams {
    /// Yearly probability that a single agent forms a steady partnership.
    double p_form = 0.023;
    DiscreteUniform duration{1, 2};
    double steady_acts_per_year = 30.0;
    /// Infection-year split: acts in the primary window and in the remaining months.
    double pi_window_acts = 8.0;
    double pi_remainder_acts = 22.0;
    /// Probability that the susceptible partner is receptive in an act.
    double p_receptive = 0.5;
    /// Steady partners are chosen among current network neighbours. When false,
    /// any single agent with a free stub qualifies and the steady edge is
    /// created by a degree-preserving swap.
    bool along_network_edges = true;

    friend bool operator==(const PartnershipParams&, const PartnershipParams&) = default;
};

using SteadyPair = std::pair<NodeId, NodeId>;

/// Current steady pairs, each listed once with first < second.
inline std::vector<SteadyPair> steady_pairs(std::span<const Individual> population) {
    std::vector<SteadyPair> pairs;
    for (const auto& ind : population) {
        if (ind.steady_partner && ind.id < *ind.steady_partner) {
            pairs.emplace_back(ind.id, *ind.steady_partner);
        }
    }
    return pairs;
}

namespace detail {

inline void set_tag(EdgeSet& edges, NodeId i, NodeId j, EdgeTag tag) {
    const auto key = pair_key(i, j);
    auto it = std::lower_bound(edges.edges.begin(), edges.edges.end(), key,
                               [](const Edge& e, std::uint64_t k) { return e.key() < k; });
    if (it != edges.edges.end() && it->key() == key) {
        it->tag = tag;
    }
}

// Turns a casual edge (i, a) and a casual edge (j, b) into steady (i, j) and
// casual (a, b). Returns false when the swap would break simplicity.
inline bool swap_in_steady_edge(EdgeSet& edges, std::unordered_set<std::uint64_t>& present, NodeId i, NodeId j,
                                const std::vector<std::vector<std::pair<NodeId, std::uint32_t>>>& adj,
                                RngStream& rng) {
    auto casual_of = [&](NodeId v) {
        std::vector<std::uint32_t> out;
        for (const auto& [u, e] : adj[v]) {
            if (edges.edges[e].tag == EdgeTag::Casual) {
                out.push_back(e);
            }
        }
        return out;
    };
    const auto ci = casual_of(i);
    const auto cj = casual_of(j);
    if (ci.empty() || cj.empty()) {
        return false;
    }
    const std::uint32_t ei = ci[rng.uniform_below(ci.size())];
    const std::uint32_t ej = cj[rng.uniform_below(cj.size())];
    const NodeId a = edges.edges[ei].a == i ? edges.edges[ei].b : edges.edges[ei].a;
    const NodeId b = edges.edges[ej].a == j ? edges.edges[ej].b : edges.edges[ej].a;
    if (ei == ej || a == b || a == j || b == i || present.contains(pair_key(i, j)) || present.contains(pair_key(a, b))) {
        return false;
    }
    present.erase(edges.edges[ei].key());
    present.erase(edges.edges[ej].key());
    edges.edges[ei] = Edge::make(i, j, EdgeTag::Steady);
    edges.edges[ej] = Edge::make(a, b, EdgeTag::Casual);
    present.insert(pair_key(i, j));
    present.insert(pair_key(a, b));
    return true;
}

} // namespace detail

/// Ages partnerships, dissolves expired ones, then lets each single agent (in
/// random order) form one with probability p_form. Edge tags are kept in
/// sync. Returns the resulting steady pairs.
inline std::vector<SteadyPair> form_and_dissolve_steady(std::span<Individual> population, EdgeSet& edges,
                                                        const PartnershipParams& params, RngStream& rng) {
    for (auto& ind : population) {
        if (!ind.steady_partner || ind.id > *ind.steady_partner) {
            continue;
        }
        Individual& partner = population[*ind.steady_partner];
        --ind.steady_years_left;
        partner.steady_years_left = ind.steady_years_left;
        if (ind.steady_years_left <= 0) {
            detail::set_tag(edges, ind.id, partner.id, EdgeTag::Casual);
            ind.steady_partner.reset();
            partner.steady_partner.reset();
            ind.steady_years_left = 0;
            partner.steady_years_left = 0;
        }
    }

    std::vector<NodeId> order(population.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = static_cast<NodeId>(i);
    }
    canepi::shuffle(order.begin(), order.end(), rng);

    std::vector<std::int32_t> degree(population.size(), 0);
    for (const auto& e : edges.edges) {
        ++degree[e.a];
        ++degree[e.b];
    }

    auto adj = edges.adjacency(population.size());
    std::unordered_set<std::uint64_t> present;
    if (!params.along_network_edges) {
        present.reserve(edges.size() * 2);
        for (const auto& e : edges.edges) {
            present.insert(e.key());
        }
    }

    std::vector<NodeId> candidates;
    for (NodeId i : order) {
        Individual& ind = population[i];
        if (ind.steady_partner || degree[i] == 0) {
            continue;
        }
        if (!(rng.uniform01() < params.p_form)) {
            continue;
        }
        candidates.clear();
        if (params.along_network_edges) {
            for (const auto& [j, e] : adj[i]) {
                if (!population[j].steady_partner) {
                    candidates.push_back(j);
                }
            }
        } else {
            for (const auto& other : population) {
                if (other.id != i && !other.steady_partner && degree[other.id] > 0) {
                    candidates.push_back(other.id);
                }
            }
        }
        if (candidates.empty()) {
            continue;
        }
        const NodeId j = candidates[rng.uniform_below(candidates.size())];
        if (params.along_network_edges) {
            detail::set_tag(edges, i, j, EdgeTag::Steady);
        } else if (present.contains(pair_key(i, j))) {
            detail::set_tag(edges, i, j, EdgeTag::Steady);
        } else {
            if (!detail::swap_in_steady_edge(edges, present, i, j, adj, rng)) {
                continue;
            }
            detail::sort_edges(edges.edges);
            adj = edges.adjacency(population.size());
        }
        const auto years = static_cast<std::int32_t>(sample_discrete_uniform(params.duration.lo, params.duration.hi, rng));
        ind.steady_partner = j;
        population[j].steady_partner = i;
        ind.steady_years_left = years;
        population[j].steady_years_left = years;
    }
    return steady_pairs(population);
}

/// Acts from `source` (infected) to `target` (susceptible) along one edge at
/// one infectivity level.
struct ActEntry {
    NodeId source;
    NodeId target;
    InfectivityLevel level;
    std::int32_t receptive;
    std::int32_t insertive;
    EdgeTag tag;

    std::int32_t total() const noexcept { return receptive + insertive; }
};

struct ActSchedule {
    std::vector<ActEntry> entries;
};

/// Acts for every serodiscordant edge this year, against the current
/// (start-of-year) infection census. Steady pairs: P(30), or P(8) in the
/// primary window plus P(22) at asymptomatic level when the infected partner
/// is in PI. Casual edges: one act.
///
/// `rng` is split per (source, target), so a pair's act counts do not depend
/// on which other pairs are serodiscordant.
inline ActSchedule schedule_acts(std::span<const Individual> population, const EdgeSet& edges,
                                 const PartnershipParams& params, const DiseaseParams& disease, const RngStream& rng) {
    ActSchedule schedule;
    auto split_roles = [&](std::int64_t n, RngStream& pair_rng) {
        const auto receptive = static_cast<std::int32_t>(sample_binomial(n, params.p_receptive, pair_rng));
        return std::pair{receptive, static_cast<std::int32_t>(n) - receptive};
    };
    for (const auto& e : edges.edges) {
        const Individual& x = population[e.a];
        const Individual& y = population[e.b];
        const Individual* src = nullptr;
        const Individual* dst = nullptr;
        if (x.is_infected() && y.stage == Stage::Negative) {
            src = &x;
            dst = &y;
        } else if (y.is_infected() && x.stage == Stage::Negative) {
            src = &y;
            dst = &x;
        } else {
            continue;
        }
        if (!src->sexually_active(disease)) {
            continue;
        }
        RngStream pair_rng = rng.derive({src->id, dst->id});
        if (e.tag == EdgeTag::Steady) {
            if (src->stage == Stage::PI) {
                const auto window = sample_poisson(params.pi_window_acts, pair_rng);
                const auto rest = sample_poisson(params.pi_remainder_acts, pair_rng);
                const auto [wr, wi] = split_roles(window, pair_rng);
                const auto [rr, ri] = split_roles(rest, pair_rng);
                if (window > 0) {
                    schedule.entries.push_back({src->id, dst->id, InfectivityLevel::PiWindow, wr, wi, e.tag});
                }
                if (rest > 0) {
                    schedule.entries.push_back({src->id, dst->id, InfectivityLevel::ApLevel, rr, ri, e.tag});
                }
            } else {
                const auto n = sample_poisson(params.steady_acts_per_year, pair_rng);
                const auto [r, i] = split_roles(n, pair_rng);
                if (n > 0) {
                    schedule.entries.push_back({src->id, dst->id, InfectivityLevel::ApLevel, r, i, e.tag});
                }
            }
        } else {
            const bool receptive = pair_rng.uniform01() < params.p_receptive;
            schedule.entries.push_back(
                {src->id, dst->id, InfectivityLevel::ApLevel, receptive ? 1 : 0, receptive ? 0 : 1, e.tag});
        }
    }
    return schedule;
}

} // namespace canepi
