#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rotor {

// Flat key = value configuration with one [section] per experiment
// (TOML-compatible syntax for the subset we use).  Values are kept as raw
// strings; typed access goes through the experiment schema below, which also
// rejects unknown keys and fills defaults so a validated config is complete.

using ConfigSection = std::map<std::string, std::string>;
using ConfigFile = std::map<std::string, ConfigSection>;

namespace detail {
inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}
} // namespace detail

inline ConfigFile parse_config_text(const std::string& text) {
    ConfigFile file;
    std::string section;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": malformed section header");
            section = detail::trim(t.substr(1, t.size() - 2));
            file[section];
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        std::string key = detail::trim(t.substr(0, eq));
        std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": key outside any [section]");
        file[section][key] = value;
    }
    return file;
}

inline std::string serialize_config(const ConfigFile& file) {
    std::string out;
    for (const auto& [section, kv] : file) {
        out += "[" + section + "]\n";
        for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
        out += "\n";
    }
    return out;
}

// One experiment's validated parameter set.
struct ExperimentConfig {
    std::string experiment;
    ConfigSection values;

    bool has(const std::string& key) const { return values.count(key) > 0; }

    const std::string& raw(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end())
            throw std::invalid_argument("config key missing: " + key);
        return it->second;
    }

    long get_int(const std::string& key) const {
        try {
            std::size_t pos = 0;
            long v = std::stol(raw(key), &pos);
            if (pos != raw(key).size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("config key " + key + ": not an integer");
        }
    }

    std::uint64_t get_u64(const std::string& key) const {
        try {
            std::size_t pos = 0;
            std::uint64_t v = std::stoull(raw(key), &pos);
            if (pos != raw(key).size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("config key " + key + ": not an unsigned integer");
        }
    }

    double get_double(const std::string& key) const {
        try {
            std::size_t pos = 0;
            double v = std::stod(raw(key), &pos);
            if (pos != raw(key).size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("config key " + key + ": not a number");
        }
    }

    std::string get_string(const std::string& key) const { return raw(key); }

    std::vector<double> get_double_list(const std::string& key) const {
        std::vector<double> out;
        std::stringstream ss(raw(key));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            std::string item = detail::trim(tok);
            if (item.empty()) continue;
            try {
                std::size_t pos = 0;
                double v = std::stod(item, &pos);
                if (pos != item.size()) throw std::invalid_argument("trailing characters");
                out.push_back(v);
            } catch (const std::exception&) {
                throw std::invalid_argument("config key " + key + ": bad list entry '" + item +
                                            "'");
            }
        }
        if (out.empty()) throw std::invalid_argument("config key " + key + ": empty list");
        return out;
    }

    std::vector<int> get_int_list(const std::string& key) const {
        std::vector<int> out;
        for (double v : get_double_list(key)) out.push_back(static_cast<int>(v));
        return out;
    }
};

struct ConfigKey {
    const char* key;
    const char* default_value;
};

// Parameter schema per experiment; every key has a desk-scale default.
inline const std::map<std::string, std::vector<ConfigKey>>& experiment_schemas() {
    static const std::map<std::string, std::vector<ConfigKey>> schemas = {
        {"kernel-table",
         {{"t_values", "0.5,1,2,5"}, {"n_delta", "64"}, {"seed", "1"}}},
        {"groundstate-scan",
         {{"beta_j_values", "0.5,1,5,20"}, {"t_values", "1,2,4"}, {"seed", "1"}}},
        {"dobrushin",
         {{"beta_j_min", "0.1"}, {"beta_j_max", "0.3"}, {"beta_j_step", "0.05"},
          {"dimension", "2"}, {"seed", "1"}}},
        {"girsanov-check",
         {{"L", "2"}, {"beta_j", "0.5"}, {"t", "0.5"}, {"dt", "0.001"},
          {"n_paths", "100000"}, {"seed", "1"}}},
        {"metastability",
         {{"L", "16"}, {"beta_j", "20"}, {"t", "2"}, {"sweeps", "100000"},
          {"burn_in", "0"}, {"thin", "10"}, {"width", "0.2"}, {"start", "ri"},
          {"replicas", "2"}, {"seed", "1"}}},
        {"percolation-scan",
         {{"L", "16"}, {"beta_j", "20"}, {"t", "2"}, {"sweeps", "3000"},
          {"burn_in", "1000"}, {"width", "0.2"}, {"start", "ri"},
          {"n_configs", "5"}, {"delta_values", "2"}, {"seed", "1"}}},
        {"badprobe",
         {{"L_values", "8,12,16"}, {"beta_j", "20"}, {"t", "2"}, {"sweeps", "20000"},
          {"burn_in", "4000"}, {"width", "0.2"},
          {"ring_xi", "1.5707963267948966"}, {"ring_eta", "4.7123889803846899"},
          {"seed", "1"}}},
        {"chessboard",
         {{"beta_j_values", "0.5,5"}, {"t", "2"}, {"n_grid", "16"}, {"n_fsets", "20"},
          {"seed", "1"}}},
        {"polymer-check",
         {{"n_systems", "50"}, {"max_polymers", "8"}, {"n_sites", "6"},
          {"max_order", "12"}, {"input_file", ""}, {"seed", "1"}}},
    };
    return schemas;
}

// Validate the section against the experiment's schema: unknown keys are
// rejected, missing ones take their defaults.  Throws before any computation
// happens.
inline ExperimentConfig validate_config(const std::string& experiment, const ConfigSection& kv) {
    const auto& schemas = experiment_schemas();
    auto it = schemas.find(experiment);
    if (it == schemas.end())
        throw std::invalid_argument("unknown experiment: " + experiment);
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    for (const ConfigKey& k : it->second) cfg.values[k.key] = k.default_value;
    for (const auto& [key, value] : kv) {
        if (!cfg.values.count(key))
            throw std::invalid_argument("unknown config key for " + experiment + ": " + key);
        cfg.values[key] = value;
    }
    return cfg;
}

inline ExperimentConfig config_from_file_text(const std::string& experiment,
                                              const std::string& text) {
    ConfigFile file = parse_config_text(text);
    auto it = file.find(experiment);
    return validate_config(experiment, it == file.end() ? ConfigSection{} : it->second);
}

inline std::string serialize_experiment_config(const ExperimentConfig& cfg) {
    return serialize_config({{cfg.experiment, cfg.values}});
}

} // namespace rotor
