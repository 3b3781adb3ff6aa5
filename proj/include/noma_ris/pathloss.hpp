#pragma once

// Deterministic link budgets. Losses are composed in dB and only turned into
// linear amplitudes where a channel is divided by sqrt(PL).

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "noma_ris/common.hpp"

namespace noma_ris::pathloss {

/// Free-space loss in dB with f in Hz and d in meters.
inline double free_space_loss(double frequency_hz, double distance_m) {
    require_positive(frequency_hz, "frequency");
    require_positive(distance_m, "distance");
    return 20.0 * std::log10(frequency_hz) + 20.0 * std::log10(distance_m) - 147.55;
}

struct TableLookup {
    double loss_db = 0.0;
    bool clamped = false;  // query fell outside the breakpoints
};

namespace detail {

inline TableLookup interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return {ys.front(), x < xs.front()};
    if (x >= xs.back()) return {ys.back(), x > xs.back()};
    auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    const std::size_t lo = hi - 1;
    if (x == xs[lo]) return {ys[lo], false};
    const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return {ys[lo] + t * (ys[hi] - ys[lo]), false};
}

inline void validate_breakpoints(const std::vector<double>& xs, const std::vector<double>& ys, const char* name) {
    require(xs.size() == ys.size(), name, "breakpoints and values differ in length");
    require(xs.size() >= 2, name, "needs at least two entries");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        require(std::isfinite(xs[i]) && std::isfinite(ys[i]), name, "entries must be finite");
        require(ys[i] >= 0.0, name, "losses must be >= 0");
        if (i > 0) require(xs[i] > xs[i - 1], name, "breakpoints must be strictly increasing");
    }
}

}  // namespace detail

/// Elevation-indexed loss table (clutter L_x(θ), shadowing L_s(θ)).
class PathLossTable {
public:
    PathLossTable() = default;

    PathLossTable(std::vector<double> elevation_deg, std::vector<double> loss_db)
        : elevation_(std::move(elevation_deg)), loss_(std::move(loss_db)) {
        detail::validate_breakpoints(elevation_, loss_, "path_loss_table");
    }

    static PathLossTable constant(double loss_db) { return {{0.0, 90.0}, {loss_db, loss_db}}; }

    const std::vector<double>& elevation_deg() const noexcept { return elevation_; }
    const std::vector<double>& loss_db() const noexcept { return loss_; }
    bool empty() const noexcept { return elevation_.empty(); }

    friend bool operator==(const PathLossTable&, const PathLossTable&) = default;

private:
    std::vector<double> elevation_;
    std::vector<double> loss_;
};

/// Piecewise-linear interpolation; out-of-range elevations clamp to the
/// nearest endpoint and set `clamped`.
inline TableLookup table_loss(const PathLossTable& table, double elevation_deg) {
    require(!table.empty(), "path_loss_table", "table is empty");
    require_finite(elevation_deg, "elevation");
    return detail::interpolate(table.elevation_deg(), table.loss_db(), elevation_deg);
}

/// Reads a CSV with header `elevation_deg,loss_db`.
inline PathLossTable load_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open path loss table: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DomainError("path_loss_table", "empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "elevation_deg,loss_db")
        throw DomainError("path_loss_table", "expected header 'elevation_deg,loss_db' in " + path);
    std::vector<double> xs, ys;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b))
            throw DomainError("path_loss_table", "malformed row '" + line + "'");
        try {
            xs.push_back(std::stod(a));
            ys.push_back(std::stod(b));
        } catch (const std::exception&) {
            throw DomainError("path_loss_table", "non-numeric row '" + line + "'");
        }
    }
    return {std::move(xs), std::move(ys)};
}

/// Zenith atmospheric absorption A_zenith(f), interpolated linearly in frequency.
class ZenithAttenuationTable {
public:
    ZenithAttenuationTable() = default;
    ZenithAttenuationTable(std::vector<double> frequency_hz, std::vector<double> zenith_db)
        : frequency_(std::move(frequency_hz)), zenith_(std::move(zenith_db)) {
        detail::validate_breakpoints(frequency_, zenith_, "zenith_table");
    }

    double at(double frequency_hz) const {
        require(!frequency_.empty(), "zenith_table", "table is empty");
        return detail::interpolate(frequency_, zenith_, frequency_hz).loss_db;
    }

    const std::vector<double>& frequency_hz() const noexcept { return frequency_; }
    const std::vector<double>& zenith_db() const noexcept { return zenith_; }

private:
    std::vector<double> frequency_;
    std::vector<double> zenith_;
};

/// Atmospheric absorption A_zenith(f)/sin(θ). Defined for 0 < θ <= 90.
inline double atmospheric_loss(double zenith_db, double elevation_deg) {
    require_finite(zenith_db, "zenith_attenuation");
    require(elevation_deg > 0.0 && elevation_deg <= 90.0, "elevation", "must lie in (0, 90] degrees");
    if (elevation_deg == 90.0) return zenith_db;
    return zenith_db / std::sin(elevation_deg * kDegToRad);
}

inline double atmospheric_loss(const ZenithAttenuationTable& table, double frequency_hz, double elevation_deg) {
    require_positive(frequency_hz, "frequency");
    return atmospheric_loss(table.at(frequency_hz), elevation_deg);
}

/// Geometry and loss tables shared by every user of a scenario.
struct LinkBudgetConfig {
    double frequency_hz = 2.0e9;
    double d_sat_user_m = 550.0e3;
    double d_sat_ris_m = 550.0e3;
    double d_bs_user_m = 500.0;
    double d_bs_ris_m = 100.0;
    double d_ris_user_m = 60.0;
    ZenithAttenuationTable zenith;
    PathLossTable clutter;    // L_x(θ)
    PathLossTable shadowing;  // L_s(θ)
};

struct LinkPathLosses {
    double pl_sat_user = 0.0;  // PL_{s,u}
    double pl_bs_user = 0.0;   // PL_{c,u}
    double pl_bs_ris = 0.0;    // PL_G
    double pl_ris_user = 0.0;  // PL_{r,u}
    double pl_sat_ris = 0.0;   // PL_H
    bool table_clamped = false;
};

/// Extra dB added on top of the tabulated terms, e.g. sampled environment
/// attenuation for one user and trial.
struct LossOffsets {
    double shadowing_db = 0.0;
    double clutter_db = 0.0;
};

/// Link losses at elevation θ. The satellite→RIS hop uses the satellite→user
/// form without clutter: the surface is mounted above the clutter layer.
inline LinkPathLosses compute_link_losses(const LinkBudgetConfig& cfg, double elevation_deg,
                                          LossOffsets offsets = {}) {
    require(elevation_deg >= 0.0 && elevation_deg <= 90.0, "elevation", "must lie in [0, 90] degrees");
    const TableLookup shadow = table_loss(cfg.shadowing, elevation_deg);
    const TableLookup clutter = table_loss(cfg.clutter, elevation_deg);
    const double l_s = shadow.loss_db + offsets.shadowing_db;
    const double l_x = clutter.loss_db + offsets.clutter_db;
    const double l_tau = atmospheric_loss(cfg.zenith, cfg.frequency_hz, elevation_deg);

    LinkPathLosses out;
    out.pl_ris_user = free_space_loss(cfg.frequency_hz, cfg.d_ris_user_m) + l_s;
    out.pl_bs_user = free_space_loss(cfg.frequency_hz, cfg.d_bs_user_m) + l_s;
    out.pl_bs_ris = free_space_loss(cfg.frequency_hz, cfg.d_bs_ris_m);
    out.pl_sat_user = free_space_loss(cfg.frequency_hz, cfg.d_sat_user_m) + l_tau + l_x;
    out.pl_sat_ris = free_space_loss(cfg.frequency_hz, cfg.d_sat_ris_m) + l_tau;
    out.table_clamped = shadow.clamped || clutter.clamped;
    for (double v : {out.pl_ris_user, out.pl_bs_user, out.pl_bs_ris, out.pl_sat_user, out.pl_sat_ris})
        require_finite(v, "path_loss");
    return out;
}

}  // namespace noma_ris::pathloss
