#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "canepi/distributions.hpp"
#include "canepi/errors.hpp"
#include "canepi/rng.hpp"

namespace canepi {

using NodeId = std::uint32_t;

enum class EdgeTag : std::uint8_t { Casual, Steady };

inline const char* to_string(EdgeTag tag) { return tag == EdgeTag::Steady ? "steady" : "casual"; }

/// Undirected edge stored with a <= b.
struct Edge {
    NodeId a;
    NodeId b;
    EdgeTag tag = EdgeTag::Casual;

    static Edge make(NodeId i, NodeId j, EdgeTag tag = EdgeTag::Casual) {
        return i <= j ? Edge{i, j, tag} : Edge{j, i, tag};
    }

    std::uint64_t key() const noexcept { return (static_cast<std::uint64_t>(a) << 32) | b; }

    friend bool operator==(const Edge&, const Edge&) = default;
};

inline std::uint64_t pair_key(NodeId i, NodeId j) noexcept {
    return i <= j ? (static_cast<std::uint64_t>(i) << 32) | j : (static_cast<std::uint64_t>(j) << 32) | i;
}

struct DegreeSequence {
    std::vector<std::int32_t> degrees;

    std::size_t size() const noexcept { return degrees.size(); }
    std::int64_t sum() const noexcept { return std::accumulate(degrees.begin(), degrees.end(), std::int64_t{0}); }
    std::int32_t operator[](std::size_t i) const { return degrees[i]; }
};

struct EdgeSet {
    std::vector<Edge> edges;

    std::size_t size() const noexcept { return edges.size(); }

    /// Per-node list of (neighbor, edge index).
    std::vector<std::vector<std::pair<NodeId, std::uint32_t>>> adjacency(std::size_t n) const {
        std::vector<std::vector<std::pair<NodeId, std::uint32_t>>> adj(n);
        for (std::uint32_t e = 0; e < edges.size(); ++e) {
            adj[edges[e].a].emplace_back(edges[e].b, e);
            adj[edges[e].b].emplace_back(edges[e].a, e);
        }
        return adj;
    }
};

struct WiringOptions {
    /// Failed swap attempts allowed per matching, as a multiple of the node count.
    std::int64_t repair_budget_per_node = 100;
    /// Fresh stub matchings tried before giving up.
    int max_matchings = 20;
};

/// i.i.d. power-law degrees with parity repair: if the sum is odd, one
/// uniformly chosen node with degree in [1, k_max - 1] gets one more stub.
inline DegreeSequence generate_degree_sequence(std::size_t n, const PowerLawDegreeTable& table, RngStream& rng) {
    if (n < 2) {
        throw ParameterError("degree sequence requires a population of at least 2");
    }
    const auto k_max = static_cast<std::int32_t>(table.k_max());
    DegreeSequence seq;
    seq.degrees.resize(n);
    constexpr int max_resamples = 1000;
    for (int attempt = 0; attempt < max_resamples; ++attempt) {
        std::int64_t total = 0;
        for (auto& d : seq.degrees) {
            d = static_cast<std::int32_t>(table(rng));
            total += d;
        }
        if (total % 2 == 0) {
            return seq;
        }
        std::vector<std::size_t> repairable;
        for (std::size_t i = 0; i < n; ++i) {
            if (seq.degrees[i] >= 1 && seq.degrees[i] <= k_max - 1) {
                repairable.push_back(i);
            }
        }
        if (!repairable.empty()) {
            ++seq.degrees[repairable[rng.uniform_below(repairable.size())]];
            return seq;
        }
    }
    throw GenerationError("degree sequence: parity cannot be repaired (every degree is 0 or k_max)");
}

inline DegreeSequence generate_degree_sequence(std::size_t n, double gamma, std::int64_t k_max, double p_zero,
                                               RngStream& rng) {
    return generate_degree_sequence(n, PowerLawDegreeTable(gamma, k_max, p_zero), rng);
}

namespace detail {

// Stub matching with double-edge-swap repair of loops and multi-edges.
// `fixed` holds pairs that already exist (steady edges) and must not be
// duplicated; they are never swapped. Returns false if the budget runs out.
inline bool match_stubs(std::span<const std::int32_t> residual, const std::vector<std::uint64_t>& fixed,
                        RngStream& rng, std::int64_t failure_budget, std::vector<Edge>& out) {
    std::vector<NodeId> stubs;
    for (std::size_t v = 0; v < residual.size(); ++v) {
        stubs.insert(stubs.end(), static_cast<std::size_t>(residual[v]), static_cast<NodeId>(v));
    }
    out.clear();
    if (stubs.empty()) {
        return true;
    }
    canepi::shuffle(stubs.begin(), stubs.end(), rng);

    std::unordered_map<std::uint64_t, std::int32_t> count;
    count.reserve(stubs.size() + fixed.size());
    for (auto k : fixed) {
        ++count[k];
    }
    out.reserve(stubs.size() / 2);
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
        out.push_back(Edge::make(stubs[i], stubs[i + 1]));
        ++count[out.back().key()];
    }

    auto illegal = [&](const Edge& e) { return e.a == e.b || count[e.key()] > 1; };
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (illegal(out[i])) {
            bad.push_back(i);
        }
    }

    std::int64_t failures = 0;
    while (!bad.empty()) {
        const std::size_t e = bad.back();
        if (!illegal(out[e])) {
            bad.pop_back();
            continue;
        }
        if (out.size() < 2 || failures >= failure_budget) {
            return false;
        }
        std::size_t f = rng.uniform_below(out.size() - 1);
        if (f >= e) {
            ++f;
        }
        const Edge old_e = out[e];
        const Edge old_f = out[f];
        const bool cross = (rng.next_u64() & 1U) != 0;
        const NodeId c = cross ? old_f.b : old_f.a;
        const NodeId d = cross ? old_f.a : old_f.b;
        const Edge ne = Edge::make(old_e.a, c);
        const Edge nf = Edge::make(old_e.b, d);

        --count[old_e.key()];
        --count[old_f.key()];
        const bool legal = ne.a != ne.b && nf.a != nf.b && ne.key() != nf.key() && count[ne.key()] == 0 &&
                           count[nf.key()] == 0;
        if (legal) {
            out[e] = ne;
            out[f] = nf;
            ++count[ne.key()];
            ++count[nf.key()];
        } else {
            ++count[old_e.key()];
            ++count[old_f.key()];
            ++failures;
        }
    }
    return true;
}

inline void sort_edges(std::vector<Edge>& edges) {
    std::sort(edges.begin(), edges.end(),
              [](const Edge& x, const Edge& y) { return x.key() < y.key(); });
}

} // namespace detail

/// Configuration-model wiring into a simple graph; all edges Casual.
inline EdgeSet wire_configuration_model(const DegreeSequence& seq, RngStream& rng, const WiringOptions& opts = {}) {
    if (seq.sum() % 2 != 0) {
        throw ParameterError("configuration model requires an even degree sum");
    }
    const auto n = static_cast<std::int64_t>(seq.size());
    for (auto d : seq.degrees) {
        if (d < 0 || d > n - 1) {
            throw GenerationError("degree " + std::to_string(d) + " cannot be realised in a simple graph of " +
                                  std::to_string(n) + " nodes");
        }
    }
    EdgeSet result;
    for (int attempt = 0; attempt < opts.max_matchings; ++attempt) {
        if (detail::match_stubs(seq.degrees, {}, rng, opts.repair_budget_per_node * n, result.edges)) {
            detail::sort_edges(result.edges);
            return result;
        }
    }
    throw GenerationError("configuration model: repair budget exhausted on every matching");
}

struct RewireOutcome {
    EdgeSet edges;
    /// True when residual wiring failed and the previous casual edges were kept.
    bool kept_previous = false;
};

/// Yearly refresh: steady pairs stay as Steady edges, everything else is
/// rewired on residual degrees (degree minus one per steady partnership).
inline RewireOutcome annual_rewire(const EdgeSet& previous, const DegreeSequence& seq,
                                   std::span<const std::pair<NodeId, NodeId>> steady_pairs, RngStream& rng,
                                   const WiringOptions& opts = {}, int retries = 5) {
    std::vector<std::int32_t> residual = seq.degrees;
    std::vector<std::uint64_t> fixed;
    fixed.reserve(steady_pairs.size());
    for (const auto& [i, j] : steady_pairs) {
        if (i == j || --residual[i] < 0 || --residual[j] < 0) {
            throw ParameterError("steady pair inconsistent with degree sequence");
        }
        fixed.push_back(pair_key(i, j));
    }

    RewireOutcome outcome;
    const auto n = static_cast<std::int64_t>(seq.size());
    for (int attempt = 0; attempt < retries; ++attempt) {
        if (detail::match_stubs(residual, fixed, rng, opts.repair_budget_per_node * n, outcome.edges.edges)) {
            for (const auto& [i, j] : steady_pairs) {
                outcome.edges.edges.push_back(Edge::make(i, j, EdgeTag::Steady));
            }
            detail::sort_edges(outcome.edges.edges);
            return outcome;
        }
    }

    outcome.kept_previous = true;
    std::vector<std::uint64_t> steady_keys = fixed;
    std::sort(steady_keys.begin(), steady_keys.end());
    outcome.edges = previous;
    for (auto& e : outcome.edges.edges) {
        e.tag = std::binary_search(steady_keys.begin(), steady_keys.end(), e.key()) ? EdgeTag::Steady
                                                                                     : EdgeTag::Casual;
    }
    return outcome;
}

struct NetworkReport {
    bool ok = true;
    std::vector<std::string> violations;

    void fail(std::string what) {
        ok = false;
        violations.push_back(std::move(what));
    }
};

/// Checks parity, loops, multi-edges, per-node degree and steady-edge uniqueness.
inline NetworkReport validate_network(const EdgeSet& edges, const DegreeSequence& seq) {
    NetworkReport report;
    const std::size_t n = seq.size();
    if (seq.sum() % 2 != 0) {
        report.fail("parity: degree sum " + std::to_string(seq.sum()) + " is odd");
    }
    std::vector<std::int32_t> incident(n, 0);
    std::vector<std::int32_t> steady(n, 0);
    std::vector<std::uint64_t> keys;
    keys.reserve(edges.size());
    for (const auto& e : edges.edges) {
        if (e.a >= n || e.b >= n) {
            report.fail("node out of range in edge {" + std::to_string(e.a) + "," + std::to_string(e.b) + "}");
            continue;
        }
        if (e.a == e.b) {
            report.fail("loop at node " + std::to_string(e.a));
        }
        ++incident[e.a];
        ++incident[e.b];
        if (e.tag == EdgeTag::Steady) {
            ++steady[e.a];
            ++steady[e.b];
        }
        keys.push_back(pair_key(e.a, e.b));
    }
    std::sort(keys.begin(), keys.end());
    for (std::size_t i = 1; i < keys.size(); ++i) {
        if (keys[i] == keys[i - 1] && (i == 1 || keys[i - 1] != keys[i - 2])) {
            report.fail("multi-edge between " + std::to_string(keys[i] >> 32) + " and " +
                        std::to_string(keys[i] & 0xFFFFFFFFULL));
        }
    }
    for (std::size_t v = 0; v < n; ++v) {
        if (incident[v] != seq.degrees[v]) {
            report.fail("degree mismatch at node " + std::to_string(v) + ": " + std::to_string(incident[v]) +
                        " incident edges, degree " + std::to_string(seq.degrees[v]));
        }
        if (steady[v] > 1) {
            report.fail("node " + std::to_string(v) + " has " + std::to_string(steady[v]) + " steady edges");
        }
    }
    return report;
}

/// Edge list as `node_i,node_j,tag` rows.
inline void write_edge_csv(std::ostream& os, const EdgeSet& edges) {
    os << "node_i,node_j,tag\n";
    for (const auto& e : edges.edges) {
        os << e.a << ',' << e.b << ',' << to_string(e.tag) << '\n';
    }
}

} // namespace canepi
