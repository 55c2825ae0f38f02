#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "canepi/analysis.hpp"
#include "canepi/config.hpp"
#include "canepi/engine.hpp"

namespace canepi::cli {

inline constexpr std::string_view version = "1.0.0";

enum ExitCode : int { Ok = 0, ConfigFailure = 2, RuntimeFailure = 3 };

struct RunManifest {
    std::optional<std::string> config_path;
    std::vector<std::string> scenarios = preset_names();
    std::optional<std::uint64_t> seed;
    std::filesystem::path out_dir = "out";
    std::optional<int> realizations;
    std::optional<std::pair<int, int>> years;
    std::optional<std::string> historical_path;
    bool export_network = false;
    unsigned threads = 0;
};

/// "START:END" with START < END.
inline std::pair<int, int> parse_years(const std::string& text) {
    const auto colon = text.find(':');
    auto number = [&](const std::string& part) {
        std::size_t used = 0;
        int value = 0;
        try {
            value = std::stoi(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != part.size()) {
            throw ConfigError("--years", "expected START:END, got '" + text + "'");
        }
        return value;
    };
    if (colon == std::string::npos) {
        throw ConfigError("--years", "expected START:END, got '" + text + "'");
    }
    const int start = number(text.substr(0, colon));
    const int end = number(text.substr(colon + 1));
    if (start >= end) {
        throw ConfigError("--years", "START must be before END");
    }
    return {start, end};
}

inline std::uint64_t parse_seed(const std::string& text, const std::string& source) {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError(source, "expected an unsigned 64-bit integer, got '" + text + "'");
    }
    try {
        return std::stoull(text);
    } catch (const std::exception&) {
        throw ConfigError(source, "seed out of range: '" + text + "'");
    }
}

/// Flag, then CANEPI_SEED, then the config file, then the built-in default.
inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const char* env,
                                  std::uint64_t from_config) {
    if (flag) {
        return *flag;
    }
    if (env != nullptr && *env != '\0') {
        return parse_seed(env, "CANEPI_SEED");
    }
    return from_config;
}

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

/// Years of the comparison table: every fifth year from 2010 to 2040 that was simulated.
inline std::vector<int> comparison_years(int start_year, int end_year) {
    std::vector<int> years;
    for (int y = 2010; y <= 2040; y += 5) {
        if (y >= start_year && y <= end_year) {
            years.push_back(y);
        }
    }
    return years;
}

inline ResolvedConfig load_config(const RunManifest& m) {
    ResolvedConfig config = m.config_path ? parse_config(*m.config_path) : parse_config_json(json::object());
    auto& sim = config.simulation;
    sim.seed = resolve_seed(m.seed, std::getenv("CANEPI_SEED"), sim.seed);
    if (m.realizations) {
        if (*m.realizations < 1) {
            throw ConfigError("--realizations", "must be >= 1");
        }
        sim.realizations = *m.realizations;
    }
    if (m.years) {
        sim.start_year = m.years->first;
        sim.end_year = m.years->second;
    }
    return config;
}

inline std::vector<ScenarioSpec> resolve_scenarios(const ResolvedConfig& config,
                                                   const std::vector<std::string>& names) {
    if (names.empty()) {
        throw ConfigError("--scenarios", "no scenarios given");
    }
    std::set<std::string> seen;
    std::vector<ScenarioSpec> specs;
    for (const auto& name : names) {
        if (!seen.insert(name).second) {
            throw ConfigError("--scenarios", "scenario '" + name + "' listed twice");
        }
        ScenarioSpec spec = resolve_scenario(config, name);
        const int start = config.simulation.start_year;
        if (!spec.risk_schedule.covers(start) || !spec.therapy_schedule.covers(start)) {
            throw ConfigError("scenarios." + name, "schedules do not cover start year " + std::to_string(start));
        }
        specs.push_back(std::move(spec));
    }
    return specs;
}

inline std::vector<std::string> run_metadata(const ResolvedConfig& config) {
    const auto& sim = config.simulation;
    return {
        "canepi " + std::string(version),
        "seed: " + std::to_string(sim.seed),
        "rng: " + std::string(RngStream::algorithm_name),
        "realizations: " + std::to_string(sim.realizations),
        "years: " + std::to_string(sim.start_year) + ":" + std::to_string(sim.end_year),
        "config: " + to_json(config).dump(),
    };
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    os << content;
    if (!os) {
        throw std::runtime_error("error while writing '" + path.string() + "'");
    }
}

/// Edge lists of realization 0, one CSV per simulated year.
inline std::vector<std::pair<int, std::string>> capture_network(const ScenarioSpec& scenario,
                                                               const SimulationConfig& config) {
    std::vector<std::pair<int, std::string>> files;
    const auto shared = shared_network_for(config, scenario.model(config));
    run_realization(scenario, config, 0, shared ? &*shared : nullptr, [&](const State& state, const YearMetrics& m) {
        std::ostringstream os;
        write_edge_csv(os, state.edges);
        files.emplace_back(m.year, os.str());
    });
    return files;
}

inline int run(const RunManifest& manifest, std::ostream& out, std::ostream& err) {
    ResolvedConfig config;
    std::vector<ScenarioSpec> specs;
    std::optional<IncidenceSeries> historical;
    try {
        config = load_config(manifest);
        validate(config.simulation);
        specs = resolve_scenarios(config, manifest.scenarios);
        if (manifest.historical_path) {
            std::ifstream in(*manifest.historical_path, std::ios::binary);
            if (!in) {
                throw ConfigError("--historical", "cannot open '" + *manifest.historical_path + "'");
            }
            historical = read_historical_csv(in, *manifest.historical_path);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return ConfigFailure;
    } catch (const ParameterError& e) {
        err << "config error: " << e.what() << '\n';
        return ConfigFailure;
    }

    try {
        const auto& sim = config.simulation;
        const auto metadata = run_metadata(config);
        std::vector<SimulationResult> results;
        for (const auto& spec : specs) {
            results.push_back(run_scenario(spec, sim, manifest.threads));
            if (results.back().rewire_fallbacks > 0) {
                err << "note: " << spec.name << ": " << results.back().rewire_fallbacks
                    << " rewiring fallbacks (previous casual edges kept)\n";
            }
        }

        std::filesystem::create_directories(manifest.out_dir);
        for (const auto& r : results) {
            std::ostringstream os;
            auto lines = metadata;
            lines.push_back("scenario: " + r.scenario);
            write_scenario_csv(os, r, lines);
            const auto path = manifest.out_dir / (r.scenario + ".csv");
            write_file(path, os.str());
            out << "wrote " << path.string() << '\n';
        }

        const bool has_reference =
            std::any_of(results.begin(), results.end(), [](const auto& r) { return r.scenario == "rs"; });
        const auto years = comparison_years(sim.start_year, sim.end_year);
        if (has_reference && results.size() > 1 && !years.empty()) {
            const auto rows = scenario_comparison_table(results, years);
            std::ostringstream os;
            write_comparison_csv(os, rows, metadata);
            const auto path = manifest.out_dir / "comparison.csv";
            write_file(path, os.str());
            out << "wrote " << path.string() << '\n';
        }

        if (manifest.export_network) {
            for (const auto& spec : specs) {
                const auto dir = manifest.out_dir / "network" / spec.name;
                std::filesystem::create_directories(dir);
                for (const auto& [year, text] : capture_network(spec, sim)) {
                    write_file(dir / ("edges_" + std::to_string(year) + ".csv"), text);
                }
                out << "wrote " << dir.string() << "/edges_<year>.csv\n";
            }
        }

        if (historical) {
            for (const auto& r : results) {
                std::vector<double> simulated;
                std::vector<double> observed;
                for (const auto& [year, value] : *historical) {
                    if (const auto* row = r.find_year(year)) {
                        simulated.push_back(row->mean_incidence);
                        observed.push_back(value);
                    }
                }
                if (simulated.size() < 2) {
                    err << "config error: historical series overlaps " << simulated.size()
                        << " simulated years of '" << r.scenario << "'; need at least 2\n";
                    return ConfigFailure;
                }
                const auto t = paired_t_test(simulated, observed, 0.05);
                out << "t-test " << r.scenario << " vs historical: n=" << simulated.size()
                    << " t=" << format_number(t.t) << " df=" << t.df << " p=" << format_number(t.p_value)
                    << " mean_diff=" << format_number(t.mean_difference) << " alpha=" << format_number(t.alpha, 2)
                    << (t.reject ? " reject" : " fail to reject") << " H0 (no difference)\n";
            }
        }
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return RuntimeFailure;
    }
    return Ok;
}

inline int validate_config(const std::string& path, std::ostream& out, std::ostream& err) {
    try {
        const auto config = parse_config(path);
        out << to_json(config).dump(2) << '\n';
        return Ok;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return ConfigFailure;
    }
}

inline int print_presets(std::ostream& out) {
    out << presets_block().dump(2) << '\n';
    return Ok;
}

/// Parses the command line and dispatches. Returns the process exit code.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Agent-based HIV transmission scenarios on a scale-free contact network"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);

    RunManifest manifest;
    std::string scenario_list;
    std::string seed_text;
    std::string years_text;
    std::string config_path;
    std::string out_dir = "out";
    std::string historical_path;
    int realizations = 0;

    auto* run_cmd = app.add_subcommand("run", "Simulate scenarios and write CSV output");
    run_cmd->add_option("--config", config_path, "Configuration file (JSON)");
    run_cmd->add_option("--scenarios", scenario_list, "Comma-separated scenario names")->default_str("rs,p1,p2,p3,p4,p5");
    run_cmd->add_option("--seed", seed_text, "Master seed (unsigned 64-bit)");
    run_cmd->add_option("--realizations", realizations, "Realizations per scenario");
    run_cmd->add_option("--years", years_text, "Simulated years as START:END");
    run_cmd->add_option("--out", out_dir, "Output directory")->default_str("out");
    run_cmd->add_option("--historical", historical_path, "Observed series CSV (year,incidence_per_100py)");
    run_cmd->add_flag("--export-network", manifest.export_network, "Write yearly edge lists of realization 0");
    run_cmd->add_option("--threads", manifest.threads, "Worker threads (0 = hardware concurrency)");

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate-config", "Check a configuration file and print it resolved");
    validate_cmd->add_option("path", validate_path, "Configuration file")->required();

    auto* presets_cmd = app.add_subcommand("presets", "Print the six preset scenarios as a config block");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return Ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return Ok;
    } catch (const CLI::CallForVersion& e) {
        out << version << '\n';
        return Ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return ConfigFailure;
    }

    if (*presets_cmd) {
        return print_presets(out);
    }
    if (*validate_cmd) {
        return validate_config(validate_path, out, err);
    }

    try {
        if (run_cmd->count("--config") > 0) {
            manifest.config_path = config_path;
        }
        if (run_cmd->count("--scenarios") > 0) {
            manifest.scenarios = split_list(scenario_list);
        }
        if (run_cmd->count("--seed") > 0) {
            manifest.seed = parse_seed(seed_text, "--seed");
        }
        if (run_cmd->count("--realizations") > 0) {
            manifest.realizations = realizations;
        }
        if (run_cmd->count("--years") > 0) {
            manifest.years = parse_years(years_text);
        }
        if (run_cmd->count("--historical") > 0) {
            manifest.historical_path = historical_path;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return ConfigFailure;
    }
    manifest.out_dir = out_dir;
    return run(manifest, out, err);
}

} // namespace canepi::cli
