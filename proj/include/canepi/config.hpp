#pragma once

#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "canepi/errors.hpp"
#include "canepi/parameters.hpp"

namespace canepi {

using json = nlohmann::json;

/// Parsed configuration: simulation settings plus user-defined scenario blocks.
struct ResolvedConfig {
    SimulationConfig simulation;
    /// User scenario blocks keyed by name. They shadow presets of the same name.
    std::map<std::string, ScenarioSpec> scenarios;
    /// Scenario blocks as written (after validation), for metadata echo.
    json scenario_blocks = json::object();
};

namespace config_detail {

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) {
            throw ConfigError(path_, "expected an object");
        }
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return node_.contains(key); }

    const json* raw(const std::string& key) {
        seen_.insert(key);
        const auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out, const std::function<bool(double)>& ok, const char* rule) {
        if (const json* v = raw(key)) {
            if (!v->is_number()) {
                throw ConfigError(key_path(key), "expected a number");
            }
            const double x = v->get<double>();
            if (!std::isfinite(x) || !ok(x)) {
                throw ConfigError(key_path(key), std::string("value out of range (") + rule + ")");
            }
            out = x;
        }
    }

    template <class Int>
    void integer(const std::string& key, Int& out, const std::function<bool(long long)>& ok, const char* rule) {
        if (const json* v = raw(key)) {
            if (!v->is_number_integer()) {
                throw ConfigError(key_path(key), "expected an integer");
            }
            const auto x = v->get<long long>();
            if (!ok(x)) {
                throw ConfigError(key_path(key), std::string("value out of range (") + rule + ")");
            }
            out = static_cast<Int>(x);
        }
    }

    void probability(const std::string& key, double& out) {
        number(key, out, [](double x) { return x >= 0.0 && x <= 1.0; }, "0 <= p <= 1");
    }

    void boolean(const std::string& key, bool& out) {
        if (const json* v = raw(key)) {
            if (!v->is_boolean()) {
                throw ConfigError(key_path(key), "expected true or false");
            }
            out = v->get<bool>();
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const json* v = raw(key)) {
            if (!v->is_string()) {
                throw ConfigError(key_path(key), "expected a string");
            }
            out = v->get<std::string>();
        }
    }

    void finish() const {
        for (const auto& [key, value] : node_.items()) {
            if (!seen_.contains(key)) {
                throw ConfigError(key_path(key), "unknown key");
            }
        }
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

inline const json& empty_object() {
    static const json obj = json::object();
    return obj;
}

inline const json& section(const json& root, const char* name) {
    const auto it = root.find(name);
    return it == root.end() ? empty_object() : *it;
}

inline void read_binomial(Reader& parent, const std::string& key, Binomial& out) {
    if (const json* v = parent.raw(key)) {
        Reader r(*v, parent.key_path(key));
        r.integer("n", out.n, [](long long x) { return x >= 0; }, "n >= 0");
        r.probability("p", out.p);
        r.finish();
    }
}

inline void read_discrete_uniform(Reader& parent, const std::string& key, DiscreteUniform& out, long long min_lo) {
    if (const json* v = parent.raw(key)) {
        Reader r(*v, parent.key_path(key));
        r.integer("lo", out.lo, [min_lo](long long x) { return x >= min_lo; }, "lo above minimum");
        r.integer("hi", out.hi, [min_lo](long long x) { return x >= min_lo; }, "hi above minimum");
        r.finish();
        if (out.lo > out.hi) {
            throw ConfigError(parent.key_path(key), "lo must not exceed hi");
        }
    }
}

inline void read_reduction(Reader& parent, const std::string& key, ContinuousUniform& out) {
    if (const json* v = parent.raw(key)) {
        Reader r(*v, parent.key_path(key));
        auto in_unit = [](double x) { return x > 0.0 && x <= 1.0; };
        r.number("a", out.a, in_unit, "0 < a <= 1");
        r.number("b", out.b, in_unit, "0 < b <= 1");
        r.finish();
        if (out.a > out.b) {
            throw ConfigError(parent.key_path(key), "a must not exceed b");
        }
    }
}

inline int parse_year_key(const std::string& key, const std::string& path) {
    std::size_t used = 0;
    int year = 0;
    try {
        year = std::stoi(key, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != key.size()) {
        throw ConfigError(path + "." + key, "schedule keys must be calendar years");
    }
    return year;
}

inline RiskSchedule read_risk_schedule(const json& node, const std::string& path) {
    if (!node.is_object() || node.empty()) {
        throw ConfigError(path, "expected a non-empty object of year: factor");
    }
    RiskSchedule schedule;
    for (const auto& [key, value] : node.items()) {
        const int year = parse_year_key(key, path);
        if (!value.is_number() || !(value.get<double>() > 0.0) || !std::isfinite(value.get<double>())) {
            throw ConfigError(path + "." + key, "risk factor must be a positive number");
        }
        schedule.set(year, value.get<double>());
    }
    return schedule;
}

inline TherapyMode parse_therapy(const json& value, const std::string& path) {
    if (value == "moderate") {
        return TherapyMode::Moderate;
    }
    if (value == "optimistic") {
        return TherapyMode::Optimistic;
    }
    throw ConfigError(path, "therapy must be \"moderate\" or \"optimistic\"");
}

inline TherapySchedule read_therapy_schedule(const json& node, const std::string& path) {
    if (!node.is_object() || node.empty()) {
        throw ConfigError(path, "expected a non-empty object of year: therapy");
    }
    TherapySchedule schedule;
    for (const auto& [key, value] : node.items()) {
        schedule.set(parse_year_key(key, path), parse_therapy(value, path + "." + key));
    }
    return schedule;
}

inline ModelParameters read_model(const json& root, int start_year) {
    ModelParameters m;

    Reader pop(section(root, "population"), "population");
    pop.integer("size", m.population.size, [](long long x) { return x >= 2 && x <= (1LL << 31); }, "size >= 2");
    pop.integer("initial_infected", m.population.initial_infected, [](long long x) { return x >= 0; }, ">= 0");
    pop.probability("initial_diagnosed_fraction", m.population.initial_diagnosed_fraction);
    if (const json* v = pop.raw("seeding")) {
        if (*v == "uniform") {
            m.population.seeding = SeedingMode::Uniform;
        } else if (*v == "degree_weighted") {
            m.population.seeding = SeedingMode::DegreeWeighted;
        } else {
            throw ConfigError("population.seeding", "expected \"uniform\" or \"degree_weighted\"");
        }
    }
    pop.finish();
    if (m.population.initial_infected > m.population.size) {
        throw ConfigError("population.initial_infected", "exceeds population size");
    }

    Reader net(section(root, "network"), "network");
    net.number("gamma", m.network.gamma, [](double x) { return x > 0.0; }, "gamma > 0");
    net.integer("k_max", m.network.k_max, [](long long x) { return x >= 1; }, "k_max >= 1");
    net.probability("p_zero", m.network.p_zero);
    net.integer("repair_budget_per_node", m.network.repair_budget_per_node, [](long long x) { return x >= 1; },
                ">= 1");
    net.finish();
    if (m.network.k_max > m.population.size - 1) {
        throw ConfigError("network.k_max", "must be below the population size");
    }

    Reader dis(section(root, "disease"), "disease");
    read_binomial(dis, "ap_duration_untreated", m.disease.ap_duration_untreated);
    read_binomial(dis, "ap_duration_treated", m.disease.ap_duration_treated);
    read_discrete_uniform(dis, "aids_duration", m.disease.aids_duration, 1);
    read_reduction(dis, "moderate_reduction", m.disease.moderate_reduction);
    read_reduction(dis, "optimistic_reduction", m.disease.optimistic_reduction);
    dis.probability("p_diag", m.disease.p_diag);
    dis.probability("p_success", m.disease.p_success);
    dis.integer("treatment_start_year", m.disease.treatment_start_year, [](long long) { return true; }, "");
    dis.boolean("aids_sexually_active", m.disease.aids_sexually_active);
    dis.finish();

    Reader par(section(root, "partnerships"), "partnerships");
    par.probability("p_form", m.partnerships.p_form);
    read_discrete_uniform(par, "duration", m.partnerships.duration, 1);
    auto non_negative = [](double x) { return x >= 0.0; };
    par.number("steady_acts_per_year", m.partnerships.steady_acts_per_year, non_negative, ">= 0");
    par.number("pi_window_acts", m.partnerships.pi_window_acts, non_negative, ">= 0");
    par.number("pi_remainder_acts", m.partnerships.pi_remainder_acts, non_negative, ">= 0");
    par.probability("p_receptive", m.partnerships.p_receptive);
    par.boolean("along_network_edges", m.partnerships.along_network_edges);
    par.finish();

    Reader tx(section(root, "transmission"), "transmission");
    if (const json* v = tx.raw("per_act")) {
        Reader pa(*v, "transmission.per_act");
        pa.probability("pi_urai", m.transmission.per_act.pi_receptive);
        pa.probability("pi_uiai", m.transmission.per_act.pi_insertive);
        pa.probability("ap_urai", m.transmission.per_act.ap_receptive);
        pa.probability("ap_uiai", m.transmission.per_act.ap_insertive);
        pa.finish();
    }
    tx.number("casual_agreement_factor", m.transmission.casual_agreement_factor,
              [](double x) { return x > 0.0 && x <= 1.0; }, "0 < factor <= 1");
    tx.number("susceptibility", m.transmission.susceptibility, [](double x) { return x > 0.0; }, "> 0");
    if (const json* v = tx.raw("risk_schedule")) {
        m.transmission.risk_schedule = read_risk_schedule(*v, "transmission.risk_schedule");
    }
    tx.finish();
    if (!m.transmission.risk_schedule.covers(start_year)) {
        throw ConfigError("transmission.risk_schedule", "must have an entry at or before the start year");
    }
    return m;
}

inline bool valid_scenario_name(const std::string& name) {
    if (name.empty() || name.size() > 64) {
        return false;
    }
    for (char c : name) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
            return false;
        }
    }
    return true;
}

inline const std::set<std::string>& model_sections() {
    static const std::set<std::string> names{"population", "network", "disease", "partnerships", "transmission"};
    return names;
}

inline ScenarioSpec read_scenario(const std::string& name, const json& block, const json& root,
                                  const SimulationConfig& sim) {
    const std::string path = "scenarios." + name;
    if (!valid_scenario_name(name)) {
        throw ConfigError(path, "scenario names may only use letters, digits, '_' and '-'");
    }
    Reader r(block, path);
    int switch_year = 2006;
    r.integer("switch_year", switch_year, [](long long) { return true; }, "");
    double risk_scale = 1.0;
    double risk_after = reference_risk;
    const bool has_scale = r.has("risk_scale");
    const bool has_after = r.has("risk_after");
    if (has_scale && has_after) {
        throw ConfigError(path, "give either risk_scale or risk_after, not both");
    }
    r.number("risk_scale", risk_scale, [](double x) { return x > 0.0; }, "> 0");
    r.number("risk_after", risk_after, [](double x) { return x > 0.0; }, "> 0");
    if (has_scale) {
        risk_after = risk_scale * reference_risk;
    }
    TherapyMode therapy_after = TherapyMode::Moderate;
    if (const json* v = r.raw("therapy_after")) {
        therapy_after = parse_therapy(*v, path + ".therapy_after");
    }

    ScenarioSpec spec;
    ModelParameters model = sim.model;
    if (const json* v = r.raw("overrides")) {
        if (!v->is_object()) {
            throw ConfigError(path + ".overrides", "expected an object");
        }
        json merged = root;
        merged.erase("scenarios");
        merged.erase("simulation");
        for (const auto& [key, value] : v->items()) {
            if (!model_sections().contains(key)) {
                throw ConfigError(path + ".overrides." + key, "unknown section");
            }
            if (!merged.contains(key)) {
                merged[key] = json::object();
            }
            merged[key].merge_patch(value);
        }
        try {
            model = read_model(merged, sim.start_year);
        } catch (const ConfigError& e) {
            throw ConfigError(path + ".overrides." + e.key_path(), e.what());
        }
        spec.parameters = model;
    }

    spec = [&] {
        ScenarioSpec s = make_switch_scenario(name, model.transmission.risk_schedule, sim.start_year, switch_year,
                                              risk_after, therapy_after);
        s.parameters = spec.parameters;
        return s;
    }();
    if (const json* v = r.raw("risk_schedule")) {
        spec.risk_schedule = read_risk_schedule(*v, path + ".risk_schedule");
    }
    if (const json* v = r.raw("therapy_schedule")) {
        spec.therapy_schedule = read_therapy_schedule(*v, path + ".therapy_schedule");
    }
    r.finish();
    if (!spec.risk_schedule.covers(sim.start_year)) {
        throw ConfigError(path + ".risk_schedule", "must have an entry at or before the start year");
    }
    if (!spec.therapy_schedule.covers(sim.start_year)) {
        throw ConfigError(path + ".therapy_schedule", "must have an entry at or before the start year");
    }
    return spec;
}

} // namespace config_detail

/// Parses a configuration document. Missing keys take their defaults; unknown
/// keys and out-of-range values raise ConfigError naming the key path.
inline ResolvedConfig parse_config_json(const json& root) {
    using namespace config_detail;
    if (!root.is_object()) {
        throw ConfigError("", "configuration must be a JSON object");
    }
    for (const auto& [key, value] : root.items()) {
        if (key != "simulation" && key != "scenarios" && !model_sections().contains(key)) {
            throw ConfigError(key, "unknown section");
        }
    }

    ResolvedConfig out;
    SimulationConfig& sim = out.simulation;
    Reader s(section(root, "simulation"), "simulation");
    s.integer("start_year", sim.start_year, [](long long x) { return x > -100000 && x < 100000; }, "a calendar year");
    s.integer("end_year", sim.end_year, [](long long x) { return x > -100000 && x < 100000; }, "a calendar year");
    s.integer("realizations", sim.realizations, [](long long x) { return x >= 1 && x <= 1000000; }, ">= 1");
    if (const json* v = s.raw("seed")) {
        if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
            throw ConfigError("simulation.seed", "expected a non-negative 64-bit integer");
        }
        sim.seed = v->get<std::uint64_t>();
    }
    s.boolean("shared_network", sim.shared_network);
    s.finish();
    if (sim.start_year >= sim.end_year) {
        throw ConfigError("simulation.end_year", "must be after start_year");
    }

    sim.model = read_model(root, sim.start_year);

    const json& scenarios = section(root, "scenarios");
    if (!scenarios.is_object()) {
        throw ConfigError("scenarios", "expected an object");
    }
    for (const auto& [name, block] : scenarios.items()) {
        out.scenarios.emplace(name, read_scenario(name, block, root, sim));
    }
    out.scenario_blocks = scenarios;
    return out;
}

/// Text form; empty or whitespace-only text means "all defaults".
inline ResolvedConfig parse_config_text(const std::string& text, const std::string& source = "config") {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        return parse_config_json(json::object());
    }
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", source + ": malformed JSON: " + e.what());
    }
    return parse_config_json(root);
}

inline ResolvedConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("", "cannot open config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

/// Named scenario: a user block if one exists, otherwise a preset.
inline ScenarioSpec resolve_scenario(const ResolvedConfig& config, const std::string& name) {
    if (const auto it = config.scenarios.find(name); it != config.scenarios.end()) {
        return it->second;
    }
    if (auto preset = make_preset(name, config.simulation)) {
        return *preset;
    }
    throw ConfigError("scenarios." + name, "unknown scenario (not a preset or a config block)");
}

// ---------------------------------------------------------------------------
// Serialization (resolved config echo and presets block).

inline json to_json(const RiskSchedule& s) {
    json j = json::object();
    for (const auto& [year, value] : s.points()) {
        j[std::to_string(year)] = value;
    }
    return j;
}

inline json to_json(const TherapySchedule& s) {
    json j = json::object();
    for (const auto& [year, value] : s.points()) {
        j[std::to_string(year)] = to_string(value);
    }
    return j;
}

inline json to_json(const ModelParameters& m) {
    json j;
    j["population"] = {{"size", m.population.size},
                       {"initial_infected", m.population.initial_infected},
                       {"initial_diagnosed_fraction", m.population.initial_diagnosed_fraction},
                       {"seeding", m.population.seeding == SeedingMode::Uniform ? "uniform" : "degree_weighted"}};
    j["network"] = {{"gamma", m.network.gamma},
                    {"k_max", m.network.k_max},
                    {"p_zero", m.network.p_zero},
                    {"repair_budget_per_node", m.network.repair_budget_per_node}};
    const auto& d = m.disease;
    j["disease"] = {{"ap_duration_untreated", {{"n", d.ap_duration_untreated.n}, {"p", d.ap_duration_untreated.p}}},
                    {"ap_duration_treated", {{"n", d.ap_duration_treated.n}, {"p", d.ap_duration_treated.p}}},
                    {"aids_duration", {{"lo", d.aids_duration.lo}, {"hi", d.aids_duration.hi}}},
                    {"moderate_reduction", {{"a", d.moderate_reduction.a}, {"b", d.moderate_reduction.b}}},
                    {"optimistic_reduction", {{"a", d.optimistic_reduction.a}, {"b", d.optimistic_reduction.b}}},
                    {"p_diag", d.p_diag},
                    {"p_success", d.p_success},
                    {"treatment_start_year", d.treatment_start_year},
                    {"aids_sexually_active", d.aids_sexually_active}};
    const auto& p = m.partnerships;
    j["partnerships"] = {{"p_form", p.p_form},
                         {"duration", {{"lo", p.duration.lo}, {"hi", p.duration.hi}}},
                         {"steady_acts_per_year", p.steady_acts_per_year},
                         {"pi_window_acts", p.pi_window_acts},
                         {"pi_remainder_acts", p.pi_remainder_acts},
                         {"p_receptive", p.p_receptive},
                         {"along_network_edges", p.along_network_edges}};
    const auto& t = m.transmission;
    j["transmission"] = {{"per_act",
                          {{"pi_urai", t.per_act.pi_receptive},
                           {"pi_uiai", t.per_act.pi_insertive},
                           {"ap_urai", t.per_act.ap_receptive},
                           {"ap_uiai", t.per_act.ap_insertive}}},
                         {"casual_agreement_factor", t.casual_agreement_factor},
                         {"susceptibility", t.susceptibility},
                         {"risk_schedule", to_json(t.risk_schedule)}};
    return j;
}

inline json to_json(const ResolvedConfig& config) {
    json j = to_json(config.simulation.model);
    const auto& s = config.simulation;
    j["simulation"] = {{"start_year", s.start_year},
                       {"end_year", s.end_year},
                       {"realizations", s.realizations},
                       {"seed", s.seed},
                       {"shared_network", s.shared_network}};
    j["scenarios"] = config.scenario_blocks;
    return j;
}

/// The six preset scenarios as a `scenarios` block that parses back to the presets.
inline json presets_block() {
    json scenarios = json::object();
    for (const auto& row : preset_table) {
        scenarios[std::string(row.name)] = {
            {"risk_scale", row.risk_scale}, {"therapy_after", to_string(row.therapy)}, {"switch_year", 2006}};
    }
    return json{{"scenarios", scenarios}};
}

} // namespace canepi
