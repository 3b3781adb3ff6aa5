#pragma once

// Command-line front end. Exit codes: 0 success, 1 domain/config error,
// 2 usage error, 3 I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "noma_ris/montecarlo.hpp"
#include "noma_ris/report.hpp"
#include "noma_ris/scenario.hpp"

namespace noma_ris::cli {

enum ExitCode : int { kOk = 0, kDomainError = 1, kUsageError = 2, kIoError = 3 };

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CliCommand {
    std::string subcommand;
    std::string config_path;
    std::string out_dir = "results";
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
};

struct ParseOutcome {
    std::optional<CliCommand> command;
    int exit_code = kOk;  // meaningful when `command` is empty
};

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"sweep-elevation", "sinr-hist", "sweep-users",
                                                "feedback",        "r-range",   "validate-config"};
    return names;
}

inline ParseOutcome parse_args(int argc, const char* const* argv, std::ostream& out = std::cout,
                               std::ostream& err = std::cerr) {
    CLI::App app{"RIS-assisted satellite-terrestrial NOMA power allocation simulator", "noma_ris"};
    app.require_subcommand(1, 1);
    CliCommand cmd;
    std::uint64_t seed = 0;
    std::size_t threads = 0;

    const std::vector<std::pair<std::string, std::string>> descriptions{
        {"sweep-elevation", "Mean sum capacity versus elevation, dynamic vs equal allocation"},
        {"sinr-hist", "Pooled per-user SINR histograms at a high elevation"},
        {"sweep-users", "Mean capacity versus number of users for several steepness values"},
        {"feedback", "Closed-loop k' tuning trajectory"},
        {"r-range", "Steepness r as a function of k' with the stable bounds"},
        {"validate-config", "Parse and validate a scenario, print the resolved configuration"}};
    for (const auto& [name, help] : descriptions) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", cmd.config_path, "Scenario JSON file")->required();
        sub->add_option("--out", cmd.out_dir, "Output directory")->capture_default_str();
        sub->add_option("--set", cmd.overrides, "Override a config value, e.g. controller.r=0.05")
            ->allow_extra_args(false);
        sub->add_option("--seed", seed, "Override the RNG seed");
        sub->add_option("--threads", threads, "Worker threads (default: NOMA_RIS_THREADS or all cores)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return {std::nullopt, code == 0 ? kOk : kUsageError};
    }
    for (const CLI::App* sub : app.get_subcommands()) {
        cmd.subcommand = sub->get_name();
        if (sub->count("--seed")) cmd.seed = seed;
        if (sub->count("--threads")) cmd.threads = threads;
    }
    return {cmd, kOk};
}

/// Reads a config document; a run sidecar is accepted and unwrapped.
inline json load_config_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    json doc = json::parse(buf.str(), nullptr, false);
    if (doc.is_discarded()) throw DomainError("config", "'" + path + "' is not valid JSON");
    if (doc.is_object() && doc.contains("command") && doc.contains("config")) doc = doc["config"];
    return doc;
}

inline ScenarioConfig resolve_config(const CliCommand& cmd) {
    json doc = load_config_document(cmd.config_path);
    for (const auto& o : cmd.overrides) apply_override(doc, o);
    if (cmd.seed) doc["seed"] = *cmd.seed;
    return from_json(doc);
}

inline std::filesystem::path prepare_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
    return dir;
}

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    writer(out);
    out.flush();
    if (!out) throw IoError("error while writing '" + path.string() + "'");
}

inline void write_sidecar(const std::filesystem::path& dir, const std::string& stem, const json& doc) {
    write_file(dir / (stem + ".config.json"), [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
}

inline int run_command(const CliCommand& cmd, std::ostream& out) {
    const ScenarioConfig cfg = resolve_config(cmd);
    const std::size_t threads = montecarlo::resolve_threads(cmd.threads);
    const std::string& sub = cmd.subcommand;

    if (sub == "validate-config") {
        const auto ctl = cfg.resolved_controller();
        const auto& t = ctl.transition;
        out << to_json(cfg).dump(2) << '\n';
        out << "derived: theta0=" << ctl.theta0 << " sigma_c=" << t.sigma_c << " delta_mu=" << t.delta_mu
            << " psi=" << t.psi << " A=" << t.amplitude_A << " B=" << t.steepness_B
            << " noise_w=" << cfg.noise() << " config_hash=" << hex(config_hash(cfg)) << '\n';
        return kOk;
    }

    const auto dir = prepare_out_dir(cmd.out_dir);
    if (sub == "sweep-elevation") {
        const auto run = montecarlo::run_elevation_sweep(cfg, cfg.sweep.theta_deg, cfg.sweep.strategies, threads);
        write_file(dir / "elevation_sweep.csv", [&](std::ostream& o) { report::write_elevation_csv(o, run); });
        write_sidecar(dir, "elevation_sweep", report::sidecar(cfg, sub, run.meta));
    } else if (sub == "sinr-hist") {
        const auto run = montecarlo::run_sinr_histogram(cfg, cfg.sweep.theta_high, cfg.sweep.strategies, threads);
        write_file(dir / "sinr_histogram.csv", [&](std::ostream& o) { report::write_sinr_histogram_csv(o, run); });
        write_file(dir / "sinr_summary.csv", [&](std::ostream& o) { report::write_sinr_summary_csv(o, run); });
        write_sidecar(dir, "sinr_histogram", report::sidecar(cfg, sub, run.meta));
    } else if (sub == "sweep-users") {
        const auto run =
            montecarlo::run_user_sweep(cfg, cfg.sweep.user_counts, cfg.sweep.r_values, cfg.sweep.theta_users, threads);
        write_file(dir / "user_sweep.csv", [&](std::ostream& o) { report::write_user_sweep_csv(o, run); });
        write_sidecar(dir, "user_sweep", report::sidecar(cfg, sub, run.meta));
    } else if (sub == "feedback") {
        const auto run = montecarlo::run_feedback_session(cfg, cfg.sweep.feedback_iterations, threads);
        write_file(dir / "feedback.csv", [&](std::ostream& o) { report::write_feedback_csv(o, run); });
        json side = report::sidecar(cfg, sub, run.meta);
        side["c_target_bps_per_hz"] = run.c_target;
        side["delta_c_max_bps_per_hz"] = run.delta_c_max;
        side["k_initial"] = run.k_initial;
        side["k_bounds"] = {run.bounds.k_min, run.bounds.k_max};
        write_sidecar(dir, "feedback", side);
    } else if (sub == "r-range") {
        const auto rows = montecarlo::r_range_curve(cfg);
        write_file(dir / "r_range.csv", [&](std::ostream& o) { report::write_r_range_csv(o, rows); });
        write_sidecar(dir, "r_range", report::sidecar(cfg, sub, montecarlo::meta_of(cfg, 0)));
    } else {
        throw std::logic_error("unhandled subcommand " + sub);
    }
    out << sub << ": wrote results to " << dir.string() << '\n';
    return kOk;
}

/// Runs a parsed command and maps failures onto the exit-code contract.
inline int execute(const CliCommand& cmd, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        return run_command(cmd, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const DomainError& e) {
        err << "error: invalid parameter " << e.what() << '\n';
        return kDomainError;
    } catch (const nlohmann::json::exception& e) {
        err << "error: invalid parameter config: " << e.what() << '\n';
        return kDomainError;
    } catch (const std::runtime_error& e) {
        // Table CSV files that cannot be opened surface here.
        err << "error: " << e.what() << '\n';
        return kIoError;
    }
}

inline int main(int argc, const char* const* argv) {
    const ParseOutcome parsed = parse_args(argc, argv);
    if (!parsed.command) return parsed.exit_code;
    return execute(*parsed.command);
}

}  // namespace noma_ris::cli
