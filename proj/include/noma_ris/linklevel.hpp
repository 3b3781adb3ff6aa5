#pragma once

// Per-snapshot NOMA downlink: SIC ordering, matched-filter beamformers, SINR
// with the satellite contribution split by α, and Shannon capacity.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "noma_ris/channel.hpp"
#include "noma_ris/common.hpp"

namespace noma_ris::linklevel {

using channel::ChannelSnapshot;
using channel::Complex;
using channel::ComplexVec;

/// σ² = B·k·T in watts.
inline double noise_variance(double bandwidth_hz, double temperature_k) {
    require_positive(bandwidth_hz, "bandwidth");
    require_positive(temperature_k, "temperature");
    return bandwidth_hz * kBoltzmann * temperature_k;
}

/// Effective channels of every user for a fixed RIS configuration.
struct EffectiveChannels {
    std::vector<ComplexVec> terrestrial;  // row vectors e_u, length M
    std::vector<Complex> satellite;       // scalars
};

inline EffectiveChannels effective_channels(const ChannelSnapshot& s, const ComplexVec& ris_diag) {
    EffectiveChannels out;
    out.terrestrial.reserve(s.users());
    out.satellite.reserve(s.users());
    for (std::size_t u = 0; u < s.users(); ++u) {
        out.terrestrial.push_back(channel::effective_terrestrial_channel(u, s, ris_diag));
        out.satellite.push_back(channel::effective_satellite_channel(u, s, ris_diag));
    }
    return out;
}

/// Decoding order: position 0 decodes first. A user cancels every signal
/// ahead of it and sees the ones behind it as interference.
struct NomaOrdering {
    std::vector<std::size_t> order;
};

/// Sorts users by decreasing gain; equal gains keep ascending index.
inline NomaOrdering sic_order(const std::vector<double>& gains) {
    NomaOrdering out;
    out.order.resize(gains.size());
    std::iota(out.order.begin(), out.order.end(), std::size_t{0});
    std::stable_sort(out.order.begin(), out.order.end(),
                     [&gains](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });
    return out;
}

inline std::vector<double> terrestrial_gains(const EffectiveChannels& eff) {
    std::vector<double> g;
    g.reserve(eff.terrestrial.size());
    for (const auto& e : eff.terrestrial) g.push_back(e.squaredNorm());
    return g;
}

inline NomaOrdering sic_order(const EffectiveChannels& eff) { return sic_order(terrestrial_gains(eff)); }

inline NomaOrdering sic_order(const ChannelSnapshot& s, const channel::RisConfig& ris) {
    return sic_order(effective_channels(s, channel::ris_matrix(ris)));
}

/// Power fractions ∝ 1/‖e_u‖², normalized. Zero-gain users get the share of
/// the weakest non-zero user; an all-zero set falls back to equal shares.
inline std::vector<double> inverse_gain_fractions(const std::vector<double>& gains) {
    require(!gains.empty(), "users", "must be > 0");
    std::vector<double> f(gains.size(), 0.0);
    double min_positive = 0.0;
    for (double g : gains)
        if (g > 0.0 && (min_positive == 0.0 || g < min_positive)) min_positive = g;
    if (min_positive == 0.0) return std::vector<double>(gains.size(), 1.0 / static_cast<double>(gains.size()));
    double total = 0.0;
    for (std::size_t u = 0; u < gains.size(); ++u) total += f[u] = 1.0 / (gains[u] > 0.0 ? gains[u] : min_positive);
    for (auto& x : f) x /= total;
    return f;
}

struct Beamformers {
    std::vector<ComplexVec> w;       // length M each
    std::vector<double> fractions;   // sums to 1
    bool fallback_used = false;      // some user had a zero-norm channel

    double total_power() const {
        double p = 0.0;
        for (const auto& v : w) p += v.squaredNorm();
        return p;
    }
};

/// w_u = √(fraction_u·P)·e_u^*/‖e_u‖. A zero channel gets a uniform unit
/// direction instead and sets `fallback_used`.
inline Beamformers design_beamformers(const EffectiveChannels& eff, double p_total, const std::vector<double>& fractions) {
    require(p_total >= 0.0 && std::isfinite(p_total), "p_total", "must be >= 0");
    require(fractions.size() == eff.terrestrial.size(), "fractions", "need one fraction per user");
    double sum = 0.0;
    for (double f : fractions) {
        require(f >= 0.0 && std::isfinite(f), "fractions", "must be >= 0");
        sum += f;
    }
    require(std::abs(sum - 1.0) <= 1e-9, "fractions", "must sum to 1");

    Beamformers out;
    out.fractions = fractions;
    out.w.reserve(fractions.size());
    for (std::size_t u = 0; u < fractions.size(); ++u) {
        const ComplexVec& e = eff.terrestrial[u];
        const double amp = std::sqrt(fractions[u] * p_total);
        const double norm = e.norm();
        if (norm > 0.0) {
            out.w.push_back(e.conjugate() * (amp / norm));
        } else {
            out.fallback_used = true;
            out.w.push_back(ComplexVec::Constant(e.size(), Complex(amp / std::sqrt(static_cast<double>(e.size())), 0.0)));
        }
    }
    return out;
}

/// How α weights the satellite signal: as a power fraction (α, 1−α) or as an
/// amplitude (α², (1−α)²).
enum class AlphaDomain { Power, Amplitude };

struct SatelliteDrive {
    double alpha = 0.0;
    double p_sat = 0.0;  // watts
    AlphaDomain domain = AlphaDomain::Power;

    double desired_weight() const { return domain == AlphaDomain::Power ? alpha : alpha * alpha; }
    double interference_weight() const {
        return domain == AlphaDomain::Power ? 1.0 - alpha : (1.0 - alpha) * (1.0 - alpha);
    }
};

/// SINR of user u:
///   (|e_u·w_u|² + a_d·p_sat·|h_u|²) / (Σ_{k after u} |e_u·w_k|² + a_i·p_sat·|h_u|² + σ²)
inline double sinr(std::size_t u, const EffectiveChannels& eff, const Beamformers& beams, const NomaOrdering& ordering,
                   const SatelliteDrive& sat, double noise) {
    require(noise > 0.0, "noise_variance", "must be > 0");
    require(sat.alpha >= 0.0 && sat.alpha <= 1.0, "alpha", "must lie in [0, 1]");
    require(u < eff.terrestrial.size(), "user", "index out of range");
    const ComplexVec& e = eff.terrestrial[u];
    const double sat_power = std::norm(eff.satellite[u]) * sat.p_sat;

    auto pos = std::find(ordering.order.begin(), ordering.order.end(), u);
    require(pos != ordering.order.end(), "ordering", "user missing from ordering");
    double interference = 0.0;
    for (auto it = std::next(pos); it != ordering.order.end(); ++it)
        interference += std::norm(e.cwiseProduct(beams.w[*it]).sum());

    const double desired = std::norm(e.cwiseProduct(beams.w[u]).sum()) + sat.desired_weight() * sat_power;
    return desired / (interference + sat.interference_weight() * sat_power + noise);
}

/// B·log2(1 + SINR).
inline double capacity(double bandwidth_hz, double sinr_value) {
    require(sinr_value >= 0.0, "sinr", "must be >= 0");
    return bandwidth_hz * std::log2(1.0 + sinr_value);
}

struct LinkResult {
    std::vector<double> sinr;
    std::vector<double> capacity;  // bits/s
    double sum_capacity = 0.0;     // bits/s
    bool beam_fallback = false;
};

struct LinkBudget {
    double p_total = 10.0;        // watts, shared by satellite and BS
    double bandwidth_hz = 1.0e6;
    double noise = 0.0;           // watts
    AlphaDomain alpha_domain = AlphaDomain::Power;
};

/// Full evaluation at one α: the satellite carries P_s = αP_t (of which the
/// α-weighted part is useful and the rest interferes), the BS carries
/// P_b = (1−α)P_t split across users by inverse-gain NOMA fractions.
inline LinkResult evaluate(const EffectiveChannels& eff, double alpha, const LinkBudget& budget) {
    require(alpha >= 0.0 && alpha <= 1.0, "alpha", "must lie in [0, 1]");
    const std::vector<double> gains = terrestrial_gains(eff);
    const NomaOrdering ordering = sic_order(gains);
    const double p_sat = alpha * budget.p_total;
    const double p_bs = budget.p_total - p_sat;
    const Beamformers beams = design_beamformers(eff, p_bs, inverse_gain_fractions(gains));
    const SatelliteDrive drive{alpha, p_sat, budget.alpha_domain};

    LinkResult out;
    out.beam_fallback = beams.fallback_used;
    const std::size_t U = gains.size();
    out.sinr.resize(U);
    out.capacity.resize(U);
    for (std::size_t u = 0; u < U; ++u) {
        out.sinr[u] = sinr(u, eff, beams, ordering, drive, budget.noise);
        out.capacity[u] = capacity(budget.bandwidth_hz, out.sinr[u]);
        out.sum_capacity += out.capacity[u];
    }
    return out;
}

inline LinkResult evaluate_snapshot(const ChannelSnapshot& s, const channel::RisConfig& ris, double alpha,
                                    const LinkBudget& budget) {
    s.validate();
    return evaluate(effective_channels(s, channel::ris_matrix(ris)), alpha, budget);
}

}  // namespace noma_ris::linklevel
