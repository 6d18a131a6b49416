#pragma once

// Flat `key = value` configuration shared by every CLI subcommand.
// Blank lines and lines starting with '#' are ignored; unknown keys are errors.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "samprio/error.hpp"
#include "samprio/pipeline.hpp"
#include "samprio/priority.hpp"
#include "samprio/simharness.hpp"

namespace samprio {

/// Malformed configuration or an unknown key; a usage problem, not a data one.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct SimulationConfig {
    std::size_t dims = 8;
    std::size_t core_n = 2000;
    std::size_t ft_n = 2200;
    double outlier_fraction = 0.02;
    std::vector<std::size_t> novel_sizes{60, 140};
    std::vector<std::size_t> budgets = budget_range(250, 2150, 100);
    std::size_t seeds = 20;
    std::vector<SweepStrategy> strategies{SweepStrategy::priority_bps, SweepStrategy::priority_mps, SweepStrategy::random};
    /// 0 = hardware concurrency.
    std::size_t threads = 0;

    friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

struct Config {
    std::string core;
    std::string finetune;
    std::string out_dir = ".";
    Strategy strategy = Strategy::bps;
    PipelineOptions pipeline;
    SimulationConfig sim;

    SyntheticSpec synthetic_spec() const {
        SyntheticSpec s = default_synthetic_spec(sim.dims);
        s.core_n = sim.core_n;
        s.ft_n = sim.ft_n;
        s.outlier_fraction = sim.outlier_fraction;
        s.novel_sizes = sim.novel_sizes;
        s.seed = pipeline.seed;
        return s;
    }

    friend bool operator==(const Config&, const Config&) = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T config_number(const std::string& key, std::string_view v) {
    T out{};
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || p != end) throw ConfigError("invalid value \"" + std::string(v) + "\" for " + key);
    return out;
}

inline bool config_bool(const std::string& key, std::string_view v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("invalid boolean \"" + std::string(v) + "\" for " + key);
}

inline std::vector<std::string> split_list(std::string_view v) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        const auto comma = v.find(',', start);
        const auto end = comma == std::string_view::npos ? v.size() : comma;
        auto item = trim(v.substr(start, end - start));
        if (!item.empty()) out.push_back(std::move(item));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::vector<std::size_t> config_sizes(const std::string& key, std::string_view v) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(v)) out.push_back(config_number<std::size_t>(key, item));
    return out;
}

/// "first:last:step" or a comma list.
inline std::vector<std::size_t> config_budgets(const std::string& key, std::string_view v) {
    if (v.find(':') == std::string_view::npos) return config_sizes(key, v);
    std::vector<std::size_t> parts;
    std::size_t start = 0;
    for (;;) {
        const auto colon = v.find(':', start);
        parts.push_back(config_number<std::size_t>(key, trim(v.substr(start, colon - start))));
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    if (parts.size() != 3) throw ConfigError(key + " range must be first:last:step");
    try {
        return budget_range(parts[0], parts[1], parts[2]);
    } catch (const ArgumentError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

// Shortest text that parses back to the same double.
inline std::string config_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

template <typename T>
std::string join(const std::vector<T>& xs) {
    std::ostringstream out;
    for (std::size_t i = 0; i < xs.size(); ++i) out << (i ? "," : "") << xs[i];
    return out.str();
}

struct ConfigField {
    std::string key;
    std::function<void(Config&, const std::string&)> set;
    std::function<std::string(const Config&)> get;
};

#define SAMPRIO_SIZE_FIELD(name, member)                                                                            \
    ConfigField {                                                                                                   \
        name, [](Config& c, const std::string& v) { c.member = config_number<std::size_t>(name, v); },             \
            [](const Config& c) { return std::to_string(c.member); }                                                \
    }
#define SAMPRIO_DOUBLE_FIELD(name, member)                                                                          \
    ConfigField {                                                                                                   \
        name, [](Config& c, const std::string& v) { c.member = config_number<double>(name, v); },                  \
            [](const Config& c) { return config_double(c.member); }                                                 \
    }
#define SAMPRIO_STRING_FIELD(name, member)                                                                          \
    ConfigField {                                                                                                   \
        name, [](Config& c, const std::string& v) { c.member = v; }, [](const Config& c) { return c.member; }       \
    }

inline const std::vector<ConfigField>& config_fields() {
    static const std::vector<ConfigField> fields = {
        SAMPRIO_STRING_FIELD("core", core),
        SAMPRIO_STRING_FIELD("finetune", finetune),
        SAMPRIO_STRING_FIELD("out_dir", out_dir),
        {"seed", [](Config& c, const std::string& v) { c.pipeline.seed = config_number<std::uint64_t>("seed", v); },
         [](const Config& c) { return std::to_string(c.pipeline.seed); }},
        {"strategy",
         [](Config& c, const std::string& v) {
             try {
                 c.strategy = parse_strategy(v);
             } catch (const ArgumentError& e) {
                 throw ConfigError(std::string("strategy: ") + e.what());
             }
         },
         [](const Config& c) { return std::string(to_string(c.strategy)); }},
        SAMPRIO_SIZE_FIELD("pca.components", pipeline.pca_components),
        SAMPRIO_DOUBLE_FIELD("pca.variance", pipeline.pca_variance),
        SAMPRIO_SIZE_FIELD("pca.max_components", pipeline.pca_max_components),
        {"pca.core_only", [](Config& c, const std::string& v) { c.pipeline.pca_core_only = config_bool("pca.core_only", v); },
         [](const Config& c) { return std::string(c.pipeline.pca_core_only ? "true" : "false"); }},
        SAMPRIO_SIZE_FIELD("knn.k", pipeline.knn_k),
        SAMPRIO_SIZE_FIELD("cluster.k", pipeline.cluster_k),
        SAMPRIO_SIZE_FIELD("cluster.k_err", pipeline.k_err),
        SAMPRIO_SIZE_FIELD("cluster.k_ft", pipeline.k_ft),
        SAMPRIO_DOUBLE_FIELD("cluster.iou_weight", pipeline.iou_weight),
        SAMPRIO_SIZE_FIELD("loop.k_nn", pipeline.loop_k),
        SAMPRIO_DOUBLE_FIELD("loop.lambda", pipeline.loop_lambda),
        {"loop.pool_core", [](Config& c, const std::string& v) { c.pipeline.loop_pool_core = config_bool("loop.pool_core", v); },
         [](const Config& c) { return std::string(c.pipeline.loop_pool_core ? "true" : "false"); }},
        SAMPRIO_DOUBLE_FIELD("coeff.bps_a", pipeline.coeffs.bps_a),
        SAMPRIO_DOUBLE_FIELD("coeff.bps_b", pipeline.coeffs.bps_b),
        SAMPRIO_DOUBLE_FIELD("coeff.mps_a", pipeline.coeffs.mps_a),
        SAMPRIO_DOUBLE_FIELD("coeff.mps_b", pipeline.coeffs.mps_b),
        SAMPRIO_DOUBLE_FIELD("coeff.mps_c", pipeline.coeffs.mps_c),
        SAMPRIO_DOUBLE_FIELD("coeff.mps_d", pipeline.coeffs.mps_d),
        SAMPRIO_SIZE_FIELD("sim.dims", sim.dims),
        SAMPRIO_SIZE_FIELD("sim.core_n", sim.core_n),
        SAMPRIO_SIZE_FIELD("sim.ft_n", sim.ft_n),
        SAMPRIO_DOUBLE_FIELD("sim.outlier_fraction", sim.outlier_fraction),
        {"sim.novel_sizes", [](Config& c, const std::string& v) { c.sim.novel_sizes = config_sizes("sim.novel_sizes", v); },
         [](const Config& c) { return join(c.sim.novel_sizes); }},
        {"sim.budgets", [](Config& c, const std::string& v) { c.sim.budgets = config_budgets("sim.budgets", v); },
         [](const Config& c) { return join(c.sim.budgets); }},
        SAMPRIO_SIZE_FIELD("sim.seeds", sim.seeds),
        {"sim.strategies",
         [](Config& c, const std::string& v) {
             c.sim.strategies.clear();
             for (const auto& s : split_list(v)) {
                 try {
                     c.sim.strategies.push_back(parse_sweep_strategy(s));
                 } catch (const ArgumentError& e) {
                     throw ConfigError(std::string("sim.strategies: ") + e.what());
                 }
             }
         },
         [](const Config& c) {
             std::string out;
             for (auto s : c.sim.strategies) out += (out.empty() ? "" : ",") + std::string(to_string(s));
             return out;
         }},
        SAMPRIO_SIZE_FIELD("sim.threads", sim.threads),
    };
    return fields;
}

#undef SAMPRIO_SIZE_FIELD
#undef SAMPRIO_DOUBLE_FIELD
#undef SAMPRIO_STRING_FIELD

} // namespace detail

/// Range checks that do not need any input data.
inline void validate(const Config& c) {
    const auto& p = c.pipeline;
    try {
        p.coeffs.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
    }
    if (!(p.pca_variance > 0.0 && p.pca_variance <= 1.0)) throw ConfigError("pca.variance must lie in (0, 1]");
    if (p.pca_max_components < 1) throw ConfigError("pca.max_components must be at least 1");
    if (p.knn_k < 1) throw ConfigError("knn.k must be at least 1");
    if (!(p.iou_weight > 0.0) || !std::isfinite(p.iou_weight)) throw ConfigError("cluster.iou_weight must be positive");
    if (p.loop_k < 1) throw ConfigError("loop.k_nn must be at least 1");
    if (!(p.loop_lambda > 0.0) || !std::isfinite(p.loop_lambda)) throw ConfigError("loop.lambda must be positive");
    if (c.sim.seeds < 1) throw ConfigError("sim.seeds must be at least 1");
    if (c.sim.budgets.empty()) throw ConfigError("sim.budgets must not be empty");
    if (c.sim.strategies.empty()) throw ConfigError("sim.strategies must not be empty");
    if (c.out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

inline void set_config_value(Config& c, const std::string& key, const std::string& value) {
    for (const auto& f : detail::config_fields())
        if (f.key == key) {
            f.set(c, value);
            return;
        }
    throw ConfigError("unknown config key \"" + key + "\"");
}

/// Applies `key = value` lines on top of `base`.
inline Config parse_config(std::istream& in, Config base = {}) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const auto key = detail::trim(std::string_view(t).substr(0, eq));
        const auto value = detail::trim(std::string_view(t).substr(eq + 1));
        try {
            set_config_value(base, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

inline Config load_config(const std::string& path, Config base = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    try {
        return parse_config(in, std::move(base));
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

/// Every key with its current value, in a form parse_config() reads back.
inline std::string dump_config(const Config& c) {
    std::ostringstream out;
    for (const auto& f : detail::config_fields()) out << f.key << " = " << f.get(c) << '\n';
    return out.str();
}

} // namespace samprio
