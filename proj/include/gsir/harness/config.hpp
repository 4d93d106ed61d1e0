#pragma once

// Experiment configuration: a JSON document with a schema version. Unknown
// fields are rejected.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gsir/datagen.hpp"
#include "gsir/errors.hpp"
#include "gsir/gsir.hpp"
#include "gsir/kernel.hpp"
#include "gsir/spectral_sim.hpp"

namespace gsir::harness {

inline constexpr int kSchemaVersion = 1;

enum class Mode { sim_rate, kernel_recovery, theory_table };

inline std::string to_string(Mode m) {
    switch (m) {
        case Mode::sim_rate: return "sim_rate";
        case Mode::kernel_recovery: return "kernel_recovery";
        case Mode::theory_table: return "theory_table";
    }
    return "unknown";
}

/// Kernel family plus either a fixed gamma or the median heuristic.
struct KernelChoice {
    KernelFamily family = KernelFamily::gaussian;
    std::optional<double> gamma;  // empty: median heuristic on the training sample

    KernelSpec resolve(const MatrixXd& points) const {
        if (family == KernelFamily::linear) return KernelSpec::linear();
        return {family, gamma ? *gamma : median_bandwidth(points)};
    }
};

struct ExperimentConfig {
    int version = kSchemaVersion;
    Mode mode = Mode::sim_rate;
    std::uint64_t base_seed = 0;
    std::vector<Index> n_grid;
    int replications = 1;
    std::string output_path;

    // epsilon = epsilon_constant * n^{-delta}; delta empty means "optimal".
    // More than one delta turns a run into a delta sweep.
    std::vector<double> deltas;
    double epsilon_constant = 1.0;
    std::optional<double> epsilon;  // fixed epsilon (kernel_recovery only)

    // sim_rate
    double alpha = 2.0;
    double beta = 1.0;
    Index J = 200;
    Index Jy = 2;
    sim::SKind s_kind = sim::SKind::identity;
    sim::ResidualKind residual_kind = sim::ResidualKind::independent;
    double alpha_u = 2.0;

    // kernel_recovery
    datagen::SyntheticModel model;
    KernelChoice kernel_x;
    KernelChoice kernel_y;
    int d = 1;
    Index test_size = 2000;
    std::vector<GsirVariant> variants{GsirVariant::gsir1, GsirVariant::gsir2};

    // theory_table
    std::vector<std::pair<double, double>> grid;  // (alpha, beta)
    double theory_n = 10000.0;

    bool optimal_delta() const { return deltas.empty(); }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& item : j.items())
        if (!allowed.contains(item.key())) throw ConfigError("unknown field '" + item.key() + "' in " + where);
}

template <typename T>
T get_field(const json& j, const std::string& key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("field '" + key + "' in " + where + " is missing or has the wrong type");
    }
}

template <typename T>
void read_optional(const json& j, const std::string& key, T& out, const std::string& where) {
    if (j.contains(key)) out = get_field<T>(j, key, where);
}

inline KernelChoice parse_kernel(const json& j, const std::string& where) {
    reject_unknown(j, {"family", "gamma"}, where);
    KernelChoice k;
    try {
        k.family = kernel_family_from_string(get_field<std::string>(j, "family", where));
    } catch (const InputError& e) {
        throw ConfigError(where + ".family: " + e.what());
    }
    if (j.contains("gamma")) {
        const json& g = j.at("gamma");
        if (g.is_string()) {
            if (g.get<std::string>() != "median") throw ConfigError(where + ".gamma must be a number or \"median\"");
        } else if (g.is_number()) {
            k.gamma = g.get<double>();
            if (!(*k.gamma > 0.0)) throw ConfigError(where + ".gamma must be > 0");
        } else {
            throw ConfigError(where + ".gamma must be a number or \"median\"");
        }
    }
    return k;
}

inline std::vector<double> parse_deltas(const json& j) {
    std::vector<double> out;
    if (j.is_string()) {
        if (j.get<std::string>() != "optimal") throw ConfigError("field 'delta' must be \"optimal\", a number or an array");
        return out;
    }
    if (j.is_number()) {
        out.push_back(j.get<double>());
    } else if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number()) throw ConfigError("field 'delta' array must contain numbers");
            out.push_back(v.get<double>());
        }
        if (out.empty()) throw ConfigError("field 'delta' array is empty");
    } else {
        throw ConfigError("field 'delta' must be \"optimal\", a number or an array");
    }
    for (double d : out)
        if (!(d > 0.0 && d < 1.0)) throw ConfigError("field 'delta' values must lie in (0, 1)");
    return out;
}

inline void validate_grid(const ExperimentConfig& c) {
    if (c.n_grid.empty()) throw ConfigError("field 'n_grid' must be non-empty");
    for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
        if (c.n_grid[i] < 10) throw ConfigError("field 'n_grid' entries must be >= 10");
        if (i > 0 && c.n_grid[i] <= c.n_grid[i - 1]) throw ConfigError("field 'n_grid' must be strictly increasing");
    }
    if (c.replications < 1) throw ConfigError("field 'replications' must be >= 1");
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    using detail::get_field;
    using detail::read_optional;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig c;
    c.version = j.contains("version") ? get_field<int>(j, "version", "config") : -1;
    if (c.version != kSchemaVersion)
        throw ConfigError("field 'version' must be " + std::to_string(kSchemaVersion));
    const auto mode = get_field<std::string>(j, "mode", "config");
    const std::set<std::string> common{"version", "mode", "base_seed", "output_path"};
    auto allowed = [&](std::initializer_list<const char*> extra) {
        std::set<std::string> s = common;
        for (const char* e : extra) s.insert(e);
        return s;
    };

    if (mode == "sim_rate") {
        c.mode = Mode::sim_rate;
        detail::reject_unknown(j, allowed({"n_grid", "replications", "alpha", "beta", "delta", "epsilon_constant", "J",
                                           "Jy", "s_kind", "residual_kind", "alpha_u"}),
                               "config");
    } else if (mode == "kernel_recovery") {
        c.mode = Mode::kernel_recovery;
        detail::reject_unknown(j, allowed({"n_grid", "replications", "model", "kernel_x", "kernel_y", "epsilon",
                                           "delta", "epsilon_constant", "d", "test_size", "variants"}),
                               "config");
    } else if (mode == "theory_table") {
        c.mode = Mode::theory_table;
        detail::reject_unknown(j, allowed({"grid", "n", "epsilon_constant"}), "config");
    } else {
        throw ConfigError("field 'mode' must be sim_rate, kernel_recovery or theory_table");
    }

    read_optional(j, "base_seed", c.base_seed, "config");
    read_optional(j, "output_path", c.output_path, "config");
    read_optional(j, "epsilon_constant", c.epsilon_constant, "config");
    if (!(c.epsilon_constant > 0.0)) throw ConfigError("field 'epsilon_constant' must be > 0");

    if (c.mode == Mode::theory_table) {
        if (!j.contains("grid") || !j.at("grid").is_array() || j.at("grid").empty())
            throw ConfigError("field 'grid' must be a non-empty array of [alpha, beta] pairs");
        for (const auto& pair : j.at("grid")) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
                throw ConfigError("field 'grid' entries must be [alpha, beta] pairs");
            const double a = pair[0].get<double>(), b = pair[1].get<double>();
            if (!(a > 1.0)) throw ConfigError("field 'grid': alpha must be > 1");
            if (!(b > 0.0)) throw ConfigError("field 'grid': beta must be > 0");
            c.grid.emplace_back(a, b);
        }
        read_optional(j, "n", c.theory_n, "config");
        if (!(c.theory_n >= 10.0)) throw ConfigError("field 'n' must be >= 10");
        return c;
    }

    c.n_grid = get_field<std::vector<Index>>(j, "n_grid", "config");
    read_optional(j, "replications", c.replications, "config");
    detail::validate_grid(c);
    if (j.contains("delta")) c.deltas = detail::parse_deltas(j.at("delta"));

    if (c.mode == Mode::sim_rate) {
        read_optional(j, "alpha", c.alpha, "config");
        read_optional(j, "beta", c.beta, "config");
        read_optional(j, "J", c.J, "config");
        read_optional(j, "Jy", c.Jy, "config");
        read_optional(j, "alpha_u", c.alpha_u, "config");
        if (!(c.alpha > 1.0)) throw ConfigError("field 'alpha' must be > 1");
        if (!(c.beta > 0.0)) throw ConfigError("field 'beta' must be > 0");
        if (c.J < 1 || c.Jy < 1) throw ConfigError("fields 'J' and 'Jy' must be >= 1");
        if (!(c.alpha_u > 1.0)) throw ConfigError("field 'alpha_u' must be > 1");
        try {
            if (j.contains("s_kind")) c.s_kind = sim::s_kind_from_string(get_field<std::string>(j, "s_kind", "config"));
            if (j.contains("residual_kind"))
                c.residual_kind = sim::residual_kind_from_string(get_field<std::string>(j, "residual_kind", "config"));
        } catch (const InputError& e) {
            throw ConfigError(e.what());
        }
        return c;
    }

    // kernel_recovery
    if (!j.contains("model")) throw ConfigError("field 'model' is required for kernel_recovery");
    const auto& mj = j.at("model");
    detail::reject_unknown(mj, {"id", "p", "sigma_noise"}, "model");
    try {
        c.model.id = datagen::model_id_from_string(get_field<std::string>(mj, "id", "model"));
    } catch (const InputError& e) {
        throw ConfigError(std::string("model.id: ") + e.what());
    }
    read_optional(mj, "p", c.model.p, "model");
    read_optional(mj, "sigma_noise", c.model.sigma_noise, "model");
    try {
        c.model.validate();
    } catch (const InputError& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    if (j.contains("kernel_x")) c.kernel_x = detail::parse_kernel(j.at("kernel_x"), "kernel_x");
    if (j.contains("kernel_y")) c.kernel_y = detail::parse_kernel(j.at("kernel_y"), "kernel_y");
    if (j.contains("epsilon")) {
        c.epsilon = get_field<double>(j, "epsilon", "config");
        if (!(*c.epsilon > 0.0)) throw ConfigError("field 'epsilon' must be > 0");
    } else if (c.deltas.empty()) {
        throw ConfigError("kernel_recovery needs 'epsilon' or a numeric 'delta'");
    }
    read_optional(j, "d", c.d, "config");
    read_optional(j, "test_size", c.test_size, "config");
    if (c.d < 1) throw ConfigError("field 'd' must be >= 1");
    if (c.d > c.n_grid.front() - 1) throw ConfigError("field 'd' must be <= n-1 for every n in 'n_grid'");
    if (c.test_size <= c.d + c.model.d_true()) throw ConfigError("field 'test_size' is too small");
    if (j.contains("variants")) {
        c.variants.clear();
        for (const auto& v : get_field<std::vector<std::string>>(j, "variants", "config")) {
            try {
                c.variants.push_back(gsir_variant_from_string(v));
            } catch (const InputError& e) {
                throw ConfigError(std::string("variants: ") + e.what());
            }
        }
        if (c.variants.empty()) throw ConfigError("field 'variants' must be non-empty");
    }
    return c;
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline ExperimentConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

}  // namespace gsir::harness
