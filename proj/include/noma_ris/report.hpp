#pragma once

// CSV serialization of experiment results. Column layouts are documented in
// docs/outputs.md. Numbers use 17 significant digits so reruns compare
// byte-for-byte.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>

#include "noma_ris/montecarlo.hpp"
#include "noma_ris/scenario.hpp"

namespace noma_ris::report {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_elevation_csv(std::ostream& out, const montecarlo::ElevationSweep& run) {
    out << "theta_deg,strategy,alpha,p_s_w,p_b_w,trials,mean_sum_capacity_bps,std_sum_capacity_bps,"
           "sem_sum_capacity_bps,q10_sum_capacity_bps,q50_sum_capacity_bps,q90_sum_capacity_bps,mean_sinr\n";
    for (const auto& p : run.points) {
        const auto& c = p.sum_capacity;
        out << num(p.theta) << ',' << to_string(p.strategy) << ',' << num(p.alpha) << ',' << num(p.power.satellite)
            << ',' << num(p.power.terrestrial) << ',' << c.n << ',' << num(c.mean) << ',' << num(c.stddev) << ','
            << num(c.sem) << ',' << num(c.q10) << ',' << num(c.q50) << ',' << num(c.q90) << ','
            << num(p.mean_sinr.mean) << '\n';
    }
}

inline void write_sinr_histogram_csv(std::ostream& out, const montecarlo::SinrHistogramRun& run) {
    out << "theta_deg,strategy,bin_lo,bin_hi,count,mass\n";
    for (const auto& d : run.distributions) {
        const auto& h = d.histogram;
        for (std::size_t i = 0; i < h.counts.size(); ++i)
            out << num(run.theta) << ',' << to_string(d.strategy) << ',' << num(h.edges[i]) << ','
                << num(h.edges[i + 1]) << ',' << h.counts[i] << ',' << num(h.mass[i]) << '\n';
    }
}

inline void write_sinr_summary_csv(std::ostream& out, const montecarlo::SinrHistogramRun& run) {
    out << "theta_deg,strategy,alpha,samples,mean_sinr,std_sinr,q10_sinr,q50_sinr,q90_sinr,spread_10_90\n";
    for (const auto& d : run.distributions) {
        const auto& s = d.stats;
        out << num(run.theta) << ',' << to_string(d.strategy) << ',' << num(d.alpha) << ',' << s.n << ','
            << num(s.mean) << ',' << num(s.stddev) << ',' << num(s.q10) << ',' << num(s.q50) << ','
            << num(s.q90) << ',' << num(s.q90 - s.q10) << '\n';
    }
}

inline void write_user_sweep_csv(std::ostream& out, const montecarlo::UserSweep& run) {
    out << "users,r,theta_deg,alpha,trials,mean_sum_capacity_bps,std_sum_capacity_bps,sem_sum_capacity_bps,"
           "mean_per_user_capacity_bps,sem_per_user_capacity_bps\n";
    for (const auto& c : run.cells)
        out << c.users << ',' << num(c.r) << ',' << num(run.theta) << ',' << num(c.alpha) << ','
            << c.sum_capacity.n << ',' << num(c.sum_capacity.mean) << ',' << num(c.sum_capacity.stddev) << ','
            << num(c.sum_capacity.sem) << ',' << num(c.per_user_capacity.mean) << ','
            << num(c.per_user_capacity.sem) << '\n';
}

/// `t,k_prime,gamma,error,c_obs` with capacities in bits/s/Hz.
inline void write_feedback_csv(std::ostream& out, const montecarlo::FeedbackSession& run) {
    out << "t,k_prime,gamma,error,c_obs\n";
    for (const auto& h : run.state.history)
        out << h.t << ',' << num(h.k_prime) << ',' << num(h.gamma) << ',' << num(h.error) << ',' << num(h.c_obs)
            << '\n';
}

inline void write_r_range_csv(std::ostream& out, const std::vector<montecarlo::RRangeRow>& rows) {
    out << "k_prime,r,r_min_flag,r_max_flag,in_range\n";
    for (const auto& r : rows)
        out << num(r.k_prime) << ',' << num(r.r) << ',' << int(r.at_r_min) << ',' << int(r.at_r_max) << ','
            << int(r.in_range) << '\n';
}

/// Resolved configuration plus provenance; feeding `config` back through
/// --config reproduces the run.
inline json sidecar(const ScenarioConfig& cfg, const std::string& command, const montecarlo::RunMeta& meta) {
    return json{{"command", command},
                {"seed", meta.seed},
                {"trials", meta.trials},
                {"config_hash", hex(meta.config_hash)},
                {"config", to_json(cfg)}};
}

}  // namespace noma_ris::report
