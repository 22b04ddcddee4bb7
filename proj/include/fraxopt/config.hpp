#pragma once

// JSON problem configuration. Schema (versioned, unknown keys rejected):
//
// {
//   "schema_version": 1,
//   "tumor": {"alpha0": 0.35, "beta0": 0.035},
//   "proliferation": {"t_lag": 7, "t_double": 2.0},       // optional
//   "oars": [{"name": "cord", "rho": 0.3333, "tolerance_dose": 45.0,
//             "conventional_fractions": 35,
//             "rho_min": 0.2, "rho_max": 0.5}, ...],      // interval optional
//   "n_max": 100,                                         // optional
//   "grid": {"t_lag": [...], "t_double": [...],
//            "delta": [...], "theta": [...]}              // optional
// }
//
// Omitting "proliferation" disables the repopulation penalty. Omitting an
// OAR's interval collapses it to the nominal ratio; sweeps rebuild intervals
// from delta anyway.

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "fraxopt/experiments.hpp"
#include "fraxopt/model.hpp"

namespace fraxopt {

inline constexpr int kConfigSchemaVersion = 1;

struct RunConfig {
    ProblemInstance instance;
    SweepGrid grid;
};

namespace detail {

inline void expect_keys(const nlohmann::json& j, const std::string& where,
                        std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) { ok = true; break; }
        if (!ok)
            throw std::invalid_argument("config: unknown key '" + item.key() +
                                        "' in " + where);
    }
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: not valid json: ") + e.what());
    }

    try {
        if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
        detail::expect_keys(j, "top level",
                            {"schema_version", "tumor", "proliferation", "oars", "n_max", "grid"});

        const int version = j.at("schema_version").get<int>();
        if (version != kConfigSchemaVersion)
            throw std::invalid_argument("config: unsupported schema_version " +
                                        std::to_string(version));

        RunConfig cfg;
        const auto& tumor = j.at("tumor");
        detail::expect_keys(tumor, "tumor", {"alpha0", "beta0"});
        cfg.instance.tumor.alpha0 = tumor.at("alpha0").get<double>();
        cfg.instance.tumor.beta0 = tumor.at("beta0").get<double>();

        if (j.contains("proliferation")) {
            const auto& p = j.at("proliferation");
            detail::expect_keys(p, "proliferation", {"t_lag", "t_double"});
            cfg.instance.proliferation.t_lag = p.at("t_lag").get<int>();
            cfg.instance.proliferation.t_double = p.at("t_double").get<double>();
        }

        for (const auto& jo : j.at("oars")) {
            detail::expect_keys(jo, "oars[]",
                                {"name", "rho", "rho_min", "rho_max", "tolerance_dose",
                                 "conventional_fractions"});
            OarSpec o;
            o.name = jo.at("name").get<std::string>();
            o.rho_nominal = jo.at("rho").get<double>();
            o.rho_min = jo.contains("rho_min") ? jo.at("rho_min").get<double>() : o.rho_nominal;
            o.rho_max = jo.contains("rho_max") ? jo.at("rho_max").get<double>() : o.rho_nominal;
            o.tolerance_dose = jo.at("tolerance_dose").get<double>();
            o.conventional_fractions = jo.at("conventional_fractions").get<int>();
            cfg.instance.oars.push_back(std::move(o));
        }

        if (j.contains("n_max")) cfg.instance.n_max = j.at("n_max").get<int>();

        cfg.grid = SweepGrid::defaults();
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            detail::expect_keys(g, "grid", {"t_lag", "t_double", "delta", "theta"});
            if (g.contains("t_lag")) cfg.grid.t_lag_values = g.at("t_lag").get<std::vector<int>>();
            if (g.contains("t_double"))
                cfg.grid.t_double_values = g.at("t_double").get<std::vector<double>>();
            if (g.contains("delta")) cfg.grid.delta_values = g.at("delta").get<std::vector<double>>();
            if (g.contains("theta")) cfg.grid.theta_values = g.at("theta").get<std::vector<double>>();
        }

        cfg.instance.validate();
        cfg.grid.validate();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace fraxopt
