#pragma once

// ScenarioConfig and its JSON form. The JSON schema is documented in
// docs/config.md; every key has a default, unknown keys are rejected.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "noma_ris/channel.hpp"
#include "noma_ris/common.hpp"
#include "noma_ris/controller.hpp"
#include "noma_ris/environment.hpp"
#include "noma_ris/linklevel.hpp"
#include "noma_ris/pathloss.hpp"

namespace noma_ris {

using json = nlohmann::ordered_json;

enum class Strategy { Dynamic, Equal };

inline const char* to_string(Strategy s) { return s == Strategy::Dynamic ? "dynamic" : "equal"; }

struct SweepSettings {
    std::vector<double> theta_deg{10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60, 65, 70, 75, 80, 85, 90};
    std::vector<Strategy> strategies{Strategy::Dynamic, Strategy::Equal};
    double theta_high = 80.0;
    std::size_t histogram_bins = 50;
    double histogram_min = 0.0;
    double histogram_max = 20.0;
    std::vector<std::size_t> user_counts{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<double> r_values{0.02, 0.05, 0.08};
    double theta_users = 80.0;
    std::size_t feedback_iterations = 100;
    std::size_t feedback_trials = 200;
    double feedback_theta = 80.0;
    std::size_t calibration_trials = 100;
    double target_gain = 1.2;  // C_tar = target_gain × equal-allocation capacity
    std::size_t k_grid_points = 41;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    std::size_t trials = 2000;

    channel::Dimensions dims{10, 6, 500};
    double bandwidth_hz = 1.0e6;
    double temperature_k = 290.0;
    double p_total_w = 10.0;
    double satellite_gain_db = 75.0;
    linklevel::AlphaDomain alpha_domain = linklevel::AlphaDomain::Power;

    pathloss::LinkBudgetConfig link;
    channel::ShadowedRicianParams fading;

    channel::RisStrategy ris_strategy = channel::RisStrategy::AlignToStrongest;
    std::size_t ris_target_user = 0;
    double ris_amplitude = 1.0;

    environment::TransitionInputs environment;
    bool inject_environment = true;

    controller::ControllerParams controller;
    std::optional<double> k_prime_initial;  // unset → ΔC_max/C_tar
    SweepSettings sweep;

    double noise() const { return linklevel::noise_variance(bandwidth_hz, temperature_k); }

    linklevel::LinkBudget budget() const { return {p_total_w, bandwidth_hz, noise(), alpha_domain}; }

    /// Controller with its transition parameters derived from the
    /// environment models at θ0.
    controller::ControllerParams resolved_controller() const {
        controller::ControllerParams p = controller;
        p.transition = environment::derive_transition(environment, p.theta0);
        return p;
    }

    void validate() const {
        require(trials > 0, "trials", "must be > 0");
        require(dims.users > 0, "system.users", "must be > 0");
        require(dims.antennas > 0, "system.antennas", "must be > 0");
        require(dims.elements > 0, "system.ris_elements", "must be > 0");
        require_positive(link.frequency_hz, "system.frequency_hz");
        require_positive(bandwidth_hz, "system.bandwidth_hz");
        require_positive(temperature_k, "system.temperature_k");
        require_positive(p_total_w, "system.p_total_w");
        require_finite(satellite_gain_db, "system.satellite_gain_db");
        require_positive(link.d_sat_user_m, "geometry.d_sat_user_m");
        require_positive(link.d_sat_ris_m, "geometry.d_sat_ris_m");
        require_positive(link.d_bs_user_m, "geometry.d_bs_user_m");
        require_positive(link.d_bs_ris_m, "geometry.d_bs_ris_m");
        require_positive(link.d_ris_user_m, "geometry.d_ris_user_m");
        fading.validate();
        require(ris_amplitude >= 0.0 && ris_amplitude <= 1.0, "ris.amplitude", "must lie in [0, 1]");
        if (ris_strategy == channel::RisStrategy::AlignToUser)
            require(ris_target_user < dims.users, "ris.target_user", "index out of range");
        controller.validate();
        (void)resolved_controller();
        require(sweep.histogram_bins > 0, "sweep.histogram_bins", "must be > 0");
        require(sweep.histogram_max > sweep.histogram_min, "sweep.histogram_max", "must exceed histogram_min");
        require(sweep.target_gain > 0.0, "sweep.target_gain", "must be > 0");
        require(sweep.k_grid_points >= 2, "sweep.k_grid_points", "must be >= 2");
        require(!sweep.strategies.empty(), "sweep.strategy", "needs at least one strategy");
    }
};

/// Defaults for the dense-urban S-band link budget.
inline ScenarioConfig default_scenario() {
    ScenarioConfig cfg;
    cfg.link.zenith = pathloss::ZenithAttenuationTable({1.0e9, 2.0e9, 4.0e9, 10.0e9}, {0.06, 0.07, 0.08, 0.12});
    cfg.link.clutter = pathloss::PathLossTable({10, 20, 30, 40, 50, 60, 70, 80, 90},
                                               {34.3, 30.9, 29.0, 27.7, 26.8, 26.2, 25.8, 25.5, 25.5});
    cfg.link.shadowing = pathloss::PathLossTable({10, 20, 30, 40, 50, 60, 70, 80, 90},
                                                 {15.5, 13.9, 12.4, 11.7, 10.6, 10.5, 10.1, 9.2, 9.2});
    cfg.environment.low = {0.5, 0.2};
    // Two-component mixture with overall mean 0.9 and standard deviation 0.1.
    cfg.environment.high = environment::GmmModel({{0.6, 0.85, 0.0790569415042095}, {0.4, 0.975, 0.0790569415042095}});
    cfg.controller = controller::ControllerParams::from_endpoints(10.0, 90.0);
    return cfg;
}

namespace detail {

inline json table_json(const pathloss::PathLossTable& t) {
    return json{{"elevation_deg", t.elevation_deg()}, {"loss_db", t.loss_db()}};
}

inline const char* ris_strategy_name(channel::RisStrategy s) {
    switch (s) {
        case channel::RisStrategy::Random: return "random";
        case channel::RisStrategy::AlignToUser: return "align-user";
        case channel::RisStrategy::AlignToStrongest: return "align-strongest";
    }
    return "align-strongest";
}

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

/// Rejects keys in `user` that the schema (`ref`) does not know.
inline void check_keys(const json& user, const json& ref, const std::string& path) {
    if (!user.is_object()) throw DomainError(path.empty() ? "config" : path, "expected an object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!ref.contains(it.key())) throw DomainError(key, "unknown configuration key");
        if (ref[it.key()].is_object() && !it.value().is_null()) check_keys(it.value(), ref[it.key()], key);
    }
}

/// Recursive overlay that keeps explicit nulls (unlike RFC 7386 merge patch).
inline void overlay(json& base, const json& user) {
    for (auto it = user.begin(); it != user.end(); ++it) {
        if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object())
            overlay(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
}

template <class T>
T get(const json& j, const char* section, const char* key) {
    const std::string name = std::string(section) + "." + key;
    try {
        return j.at(section).at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw DomainError(name, "missing or wrong type");
    }
}

inline std::optional<double> get_optional(const json& j, const char* section, const char* key) {
    const json& v = j.at(section).at(key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number()) throw DomainError(std::string(section) + "." + key, "expected a number or null");
    return v.get<double>();
}

inline pathloss::PathLossTable table_from(const json& j, const std::string& name) {
    try {
        return {j.at("elevation_deg").get<std::vector<double>>(), j.at("loss_db").get<std::vector<double>>()};
    } catch (const nlohmann::json::exception&) {
        throw DomainError(name, "expected {elevation_deg: [...], loss_db: [...]}");
    }
}

}  // namespace detail

inline json to_json(const ScenarioConfig& c) {
    json gmm = json::array();
    for (const auto& comp : c.environment.high.components())
        gmm.push_back({{"weight", comp.weight}, {"mean", comp.mean}, {"stddev", comp.stddev}});
    json strategies = json::array();
    for (auto s : c.sweep.strategies) strategies.push_back(to_string(s));

    json j;
    j["seed"] = c.seed;
    j["trials"] = c.trials;
    j["system"] = {{"frequency_hz", c.link.frequency_hz},
                   {"antennas", c.dims.antennas},
                   {"ris_elements", c.dims.elements},
                   {"bandwidth_hz", c.bandwidth_hz},
                   {"users", c.dims.users},
                   {"temperature_k", c.temperature_k},
                   {"p_total_w", c.p_total_w},
                   {"satellite_gain_db", c.satellite_gain_db},
                   {"alpha_domain", c.alpha_domain == linklevel::AlphaDomain::Power ? "power" : "amplitude"}};
    j["geometry"] = {{"d_sat_user_m", c.link.d_sat_user_m},
                     {"d_sat_ris_m", c.link.d_sat_ris_m},
                     {"d_bs_user_m", c.link.d_bs_user_m},
                     {"d_bs_ris_m", c.link.d_bs_ris_m},
                     {"d_ris_user_m", c.link.d_ris_user_m}};
    j["pathloss"] = {{"zenith_table",
                      {{"frequency_hz", c.link.zenith.frequency_hz()}, {"zenith_db", c.link.zenith.zenith_db()}}},
                     {"clutter_table", detail::table_json(c.link.clutter)},
                     {"clutter_table_csv", nullptr},
                     {"shadowing_table", detail::table_json(c.link.shadowing)},
                     {"shadowing_table_csv", nullptr}};
    j["fading"] = {{"b_scatter", c.fading.b_scatter}, {"m_shadow", c.fading.m_shadow}, {"omega_los", c.fading.omega_los}};
    j["ris"] = {{"strategy", detail::ris_strategy_name(c.ris_strategy)},
                {"target_user", c.ris_target_user},
                {"amplitude", c.ris_amplitude}};
    j["environment"] = {{"lognormal", {{"mu", c.environment.low.mu_log}, {"sigma", c.environment.low.sigma_log}}},
                        {"gmm", gmm},
                        {"energy", detail::optional_json(c.environment.energy_E)},
                        {"lambda", c.environment.lambda},
                        {"c_const", c.environment.c_const},
                        {"inject_into_link_budget", c.inject_environment}};
    j["controller"] = {{"theta_L", c.controller.theta_L},
                       {"theta_H", c.controller.theta_H},
                       {"theta0", c.controller.theta0},
                       {"r", c.controller.r},
                       {"k_prime", detail::optional_json(c.k_prime_initial)},
                       {"c_target", detail::optional_json(c.controller.c_target)},
                       {"delta_c_max", detail::optional_json(c.controller.delta_c_max)},
                       {"vartheta", c.controller.vartheta},
                       {"beta", c.controller.beta},
                       {"r_min", c.controller.r_min},
                       {"r_max", c.controller.r_max}};
    j["sweep"] = {{"theta_deg", c.sweep.theta_deg},
                  {"strategy", strategies},
                  {"theta_high", c.sweep.theta_high},
                  {"histogram_bins", c.sweep.histogram_bins},
                  {"histogram_min", c.sweep.histogram_min},
                  {"histogram_max", c.sweep.histogram_max},
                  {"user_counts", c.sweep.user_counts},
                  {"r_values", c.sweep.r_values},
                  {"theta_users", c.sweep.theta_users},
                  {"feedback_iterations", c.sweep.feedback_iterations},
                  {"feedback_trials", c.sweep.feedback_trials},
                  {"feedback_theta", c.sweep.feedback_theta},
                  {"calibration_trials", c.sweep.calibration_trials},
                  {"target_gain", c.sweep.target_gain},
                  {"k_grid_points", c.sweep.k_grid_points}};
    return j;
}

/// Parses a (possibly partial) config document on top of the defaults.
/// Without an explicit `controller.theta0`, θ0 is the midpoint of [θ_L, θ_H].
inline ScenarioConfig from_json(const json& user) {
    json ref = to_json(default_scenario());
    detail::check_keys(user, ref, "");
    json j = ref;
    detail::overlay(j, user);
    using detail::get;

    ScenarioConfig c;
    try {
        c.seed = j.at("seed").get<std::uint64_t>();
        c.trials = j.at("trials").get<std::size_t>();
    } catch (const nlohmann::json::exception&) {
        throw DomainError("seed/trials", "expected non-negative integers");
    }
    c.link.frequency_hz = get<double>(j, "system", "frequency_hz");
    c.dims.antennas = get<std::size_t>(j, "system", "antennas");
    c.dims.elements = get<std::size_t>(j, "system", "ris_elements");
    c.bandwidth_hz = get<double>(j, "system", "bandwidth_hz");
    c.dims.users = get<std::size_t>(j, "system", "users");
    c.temperature_k = get<double>(j, "system", "temperature_k");
    c.p_total_w = get<double>(j, "system", "p_total_w");
    c.satellite_gain_db = get<double>(j, "system", "satellite_gain_db");
    const auto domain = get<std::string>(j, "system", "alpha_domain");
    if (domain == "power") c.alpha_domain = linklevel::AlphaDomain::Power;
    else if (domain == "amplitude") c.alpha_domain = linklevel::AlphaDomain::Amplitude;
    else throw DomainError("system.alpha_domain", "expected 'power' or 'amplitude'");

    c.link.d_sat_user_m = get<double>(j, "geometry", "d_sat_user_m");
    c.link.d_sat_ris_m = get<double>(j, "geometry", "d_sat_ris_m");
    c.link.d_bs_user_m = get<double>(j, "geometry", "d_bs_user_m");
    c.link.d_bs_ris_m = get<double>(j, "geometry", "d_bs_ris_m");
    c.link.d_ris_user_m = get<double>(j, "geometry", "d_ris_user_m");

    const json& pl = j.at("pathloss");
    try {
        c.link.zenith = pathloss::ZenithAttenuationTable(pl.at("zenith_table").at("frequency_hz").get<std::vector<double>>(),
                                                         pl.at("zenith_table").at("zenith_db").get<std::vector<double>>());
    } catch (const nlohmann::json::exception&) {
        throw DomainError("pathloss.zenith_table", "expected {frequency_hz: [...], zenith_db: [...]}");
    }
    c.link.clutter = pl.at("clutter_table_csv").is_string()
                         ? pathloss::load_table_csv(pl.at("clutter_table_csv").get<std::string>())
                         : detail::table_from(pl.at("clutter_table"), "pathloss.clutter_table");
    c.link.shadowing = pl.at("shadowing_table_csv").is_string()
                           ? pathloss::load_table_csv(pl.at("shadowing_table_csv").get<std::string>())
                           : detail::table_from(pl.at("shadowing_table"), "pathloss.shadowing_table");

    c.fading.b_scatter = get<double>(j, "fading", "b_scatter");
    c.fading.m_shadow = get<double>(j, "fading", "m_shadow");
    c.fading.omega_los = get<double>(j, "fading", "omega_los");

    const auto ris = get<std::string>(j, "ris", "strategy");
    if (ris == "random") c.ris_strategy = channel::RisStrategy::Random;
    else if (ris == "align-user") c.ris_strategy = channel::RisStrategy::AlignToUser;
    else if (ris == "align-strongest") c.ris_strategy = channel::RisStrategy::AlignToStrongest;
    else throw DomainError("ris.strategy", "expected 'random', 'align-user' or 'align-strongest'");
    c.ris_target_user = get<std::size_t>(j, "ris", "target_user");
    c.ris_amplitude = get<double>(j, "ris", "amplitude");

    const json& env = j.at("environment");
    c.environment.low.mu_log = get<double>(env, "lognormal", "mu");
    c.environment.low.sigma_log = get<double>(env, "lognormal", "sigma");
    std::vector<environment::GmmComponent> comps;
    try {
        for (const auto& comp : env.at("gmm"))
            comps.push_back({comp.at("weight").get<double>(), comp.at("mean").get<double>(), comp.at("stddev").get<double>()});
    } catch (const nlohmann::json::exception&) {
        throw DomainError("environment.gmm", "expected a list of {weight, mean, stddev}");
    }
    c.environment.high = environment::GmmModel(std::move(comps));
    c.environment.energy_E = detail::get_optional(j, "environment", "energy");
    c.environment.lambda = get<double>(j, "environment", "lambda");
    c.environment.c_const = get<double>(j, "environment", "c_const");
    c.inject_environment = get<bool>(j, "environment", "inject_into_link_budget");

    auto& ctl = c.controller;
    ctl.theta_L = get<double>(j, "controller", "theta_L");
    ctl.theta_H = get<double>(j, "controller", "theta_H");
    // θ0 follows the endpoints unless the document pins it.
    const bool theta0_given = user.contains("controller") && user["controller"].is_object() &&
                              user["controller"].contains("theta0") && !user["controller"]["theta0"].is_null();
    ctl.theta0 = theta0_given ? get<double>(j, "controller", "theta0") : 0.5 * (ctl.theta_L + ctl.theta_H);
    ctl.r = get<double>(j, "controller", "r");
    c.k_prime_initial = detail::get_optional(j, "controller", "k_prime");
    if (c.k_prime_initial) ctl.k_prime = *c.k_prime_initial;
    ctl.c_target = detail::get_optional(j, "controller", "c_target");
    ctl.delta_c_max = detail::get_optional(j, "controller", "delta_c_max");
    ctl.vartheta = get<double>(j, "controller", "vartheta");
    ctl.beta = get<double>(j, "controller", "beta");
    ctl.r_min = get<double>(j, "controller", "r_min");
    ctl.r_max = get<double>(j, "controller", "r_max");
    ctl.gamma_current = ctl.vartheta;

    auto& sw = c.sweep;
    sw.theta_deg = get<std::vector<double>>(j, "sweep", "theta_deg");
    sw.strategies.clear();
    for (const auto& s : get<std::vector<std::string>>(j, "sweep", "strategy")) {
        if (s == "dynamic") sw.strategies.push_back(Strategy::Dynamic);
        else if (s == "equal") sw.strategies.push_back(Strategy::Equal);
        else throw DomainError("sweep.strategy", "expected 'dynamic' or 'equal'");
    }
    sw.theta_high = get<double>(j, "sweep", "theta_high");
    sw.histogram_bins = get<std::size_t>(j, "sweep", "histogram_bins");
    sw.histogram_min = get<double>(j, "sweep", "histogram_min");
    sw.histogram_max = get<double>(j, "sweep", "histogram_max");
    sw.user_counts = get<std::vector<std::size_t>>(j, "sweep", "user_counts");
    sw.r_values = get<std::vector<double>>(j, "sweep", "r_values");
    sw.theta_users = get<double>(j, "sweep", "theta_users");
    sw.feedback_iterations = get<std::size_t>(j, "sweep", "feedback_iterations");
    sw.feedback_trials = get<std::size_t>(j, "sweep", "feedback_trials");
    sw.feedback_theta = get<double>(j, "sweep", "feedback_theta");
    sw.calibration_trials = get<std::size_t>(j, "sweep", "calibration_trials");
    sw.target_gain = get<double>(j, "sweep", "target_gain");
    sw.k_grid_points = get<std::size_t>(j, "sweep", "k_grid_points");

    c.validate();
    return c;
}

/// Applies `dotted.path=value`; the value is read as JSON when it parses,
/// otherwise as a string.
inline void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw DomainError("--set", "expected key=value, got '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw DomainError(path, "empty path component");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            break;
        }
        if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = json::object();
        node = &(*node)[key];
        start = dot + 1;
    }
}

/// FNV-1a over the canonical JSON text.
inline std::uint64_t config_hash(const ScenarioConfig& c) {
    const std::string text = to_json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << v;
    return os.str();
}

}  // namespace noma_ris
