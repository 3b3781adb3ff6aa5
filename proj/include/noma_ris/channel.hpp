#pragma once

// Small-scale fading, RIS reflection and the effective channels that appear in
// the received signal of each NOMA user.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "noma_ris/common.hpp"
#include "noma_ris/pathloss.hpp"
#include "noma_ris/rng.hpp"

namespace noma_ris::channel {

using Complex = std::complex<double>;
using ComplexVec = Eigen::VectorXcd;
using ComplexMat = Eigen::MatrixXcd;

/// Shadowed-Rician parameters: b = half the average scatter power, m the
/// Nakagami shadowing severity, omega the average LOS power.
struct ShadowedRicianParams {
    double b_scatter = 0.126;
    double m_shadow = 10.1;
    double omega_los = 0.835;

    void validate() const {
        require_positive(b_scatter, "shadowed_rician.b_scatter");
        require_positive(m_shadow, "shadowed_rician.m_shadow");
        require(omega_los >= 0.0 && std::isfinite(omega_los), "shadowed_rician.omega_los", "must be >= 0");
    }

    double mean_power() const { return omega_los + 2.0 * b_scatter; }
};

/// i.i.d. CN(0, 1) entries.
template <class Rng>
ComplexVec sample_rayleigh(std::size_t dim, Rng& rng) {
    require(dim > 0, "dimension", "must be > 0");
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    ComplexVec out(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        out[i] = {re, im};
    }
    return out;
}

/// LOS term with Nakagami-m amplitude (Gamma power of mean omega) and uniform
/// phase, plus CN(0, 2b) scatter.
template <class Rng>
ComplexVec sample_shadowed_rician(const ShadowedRicianParams& p, std::size_t dim, Rng& rng) {
    p.validate();
    require(dim > 0, "dimension", "must be > 0");
    std::normal_distribution<double> scatter(0.0, std::sqrt(p.b_scatter));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    ComplexVec out(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        double los_power = 0.0;
        if (p.omega_los > 0.0) {
            std::gamma_distribution<double> gamma(p.m_shadow, p.omega_los / p.m_shadow);
            los_power = gamma(rng);
        }
        const double phi = phase(rng);
        const double re = scatter(rng);
        const double im = scatter(rng);
        out[i] = std::polar(std::sqrt(los_power), phi) + Complex(re, im);
    }
    return out;
}

/// Per-element phase shifts φ_n with a common amplitude Γ.
struct RisConfig {
    std::vector<double> phases;
    double amplitude = 1.0;

    std::size_t size() const noexcept { return phases.size(); }
};

/// Diagonal of Θ = diag(Γ e^{jφ_n}).
inline ComplexVec ris_matrix(const RisConfig& cfg) {
    require(cfg.amplitude >= 0.0 && std::isfinite(cfg.amplitude), "ris.amplitude", "must be >= 0");
    ComplexVec diag(static_cast<Eigen::Index>(cfg.phases.size()));
    for (std::size_t n = 0; n < cfg.phases.size(); ++n)
        diag[static_cast<Eigen::Index>(n)] = std::polar(cfg.amplitude, cfg.phases[n]);
    return diag;
}

/// Applies Θ to a length-N vector.
inline ComplexVec apply_ris(const ComplexVec& diag, const ComplexVec& v) {
    require(diag.size() == v.size(), "ris", "dimension mismatch");
    return diag.cwiseProduct(v);
}

/// One realization of every link for U users. Rows of the per-user matrices
/// are the users' channel vectors (not conjugated).
struct ChannelSnapshot {
    ComplexVec h_sat_user;   // U, satellite is single-antenna
    ComplexVec h_sat_ris;    // N
    ComplexMat g_bs_user;    // U x M
    ComplexMat g_bs_ris;     // N x M
    ComplexMat f_ris_user;   // U x N
    std::vector<pathloss::LinkPathLosses> losses;  // one per user
    double satellite_gain_db = 0.0;  // antenna gain of the satellite link, both ends

    std::size_t users() const noexcept { return static_cast<std::size_t>(g_bs_user.rows()); }
    std::size_t antennas() const noexcept { return static_cast<std::size_t>(g_bs_user.cols()); }
    std::size_t elements() const noexcept { return static_cast<std::size_t>(g_bs_ris.rows()); }

    void validate() const {
        const auto u = g_bs_user.rows();
        const auto n = g_bs_ris.rows();
        const auto m = g_bs_user.cols();
        require(u > 0 && n > 0 && m > 0, "snapshot", "empty dimension");
        require(h_sat_user.size() == u, "snapshot.h_sat_user", "expected one entry per user");
        require(h_sat_ris.size() == n, "snapshot.h_sat_ris", "expected N entries");
        require(g_bs_ris.cols() == m, "snapshot.g_bs_ris", "expected N x M");
        require(f_ris_user.rows() == u && f_ris_user.cols() == n, "snapshot.f_ris_user", "expected U x N");
        require(losses.size() == static_cast<std::size_t>(u), "snapshot.losses", "expected one entry per user");
    }
};

struct Dimensions {
    std::size_t users = 10;
    std::size_t antennas = 6;
    std::size_t elements = 500;
};

/// Draws the fading of one trial. Each link reads its own counter stream keyed
/// by (seed, trial, link) and users are drawn in index order, so user u sees
/// the same fading regardless of U or of the worker that runs the trial.
inline ChannelSnapshot draw_fading(const Dimensions& dims, const ShadowedRicianParams& sat, std::uint64_t seed,
                                   std::uint64_t trial) {
    require(dims.users > 0, "users", "must be > 0");
    require(dims.antennas > 0, "antennas", "must be > 0");
    require(dims.elements > 0, "ris_elements", "must be > 0");
    const auto U = static_cast<Eigen::Index>(dims.users);
    const auto M = static_cast<Eigen::Index>(dims.antennas);
    const auto N = static_cast<Eigen::Index>(dims.elements);

    ChannelSnapshot s;
    CounterStream sat_user(seed, trial, StreamId::SatUser);
    CounterStream sat_ris(seed, trial, StreamId::SatRis);
    CounterStream bs_user(seed, trial, StreamId::BsUser);
    CounterStream bs_ris(seed, trial, StreamId::BsRis);
    CounterStream ris_user(seed, trial, StreamId::RisUser);

    s.h_sat_user = sample_shadowed_rician(sat, dims.users, sat_user);
    s.h_sat_ris = sample_shadowed_rician(sat, dims.elements, sat_ris);
    s.g_bs_user.resize(U, M);
    for (Eigen::Index u = 0; u < U; ++u) s.g_bs_user.row(u) = sample_rayleigh(dims.antennas, bs_user).transpose();
    s.g_bs_ris.resize(N, M);
    for (Eigen::Index n = 0; n < N; ++n) s.g_bs_ris.row(n) = sample_rayleigh(dims.antennas, bs_ris).transpose();
    s.f_ris_user.resize(U, N);
    for (Eigen::Index u = 0; u < U; ++u) s.f_ris_user.row(u) = sample_rayleigh(dims.elements, ris_user).transpose();
    s.losses.assign(dims.users, pathloss::LinkPathLosses{});
    return s;
}

/// Row vector e_u such that the terrestrial part of y_u is e_u · w:
/// g_u^H/√PL_{c,u} + f_u^H Θ G/√(PL_{r,u} PL_G).
inline ComplexVec effective_terrestrial_channel(std::size_t u, const ChannelSnapshot& s, const ComplexVec& ris_diag) {
    require(u < s.users(), "user", "index out of range");
    require(ris_diag.size() == s.g_bs_ris.rows(), "ris", "dimension mismatch with snapshot");
    const auto& pl = s.losses[u];
    const auto ui = static_cast<Eigen::Index>(u);
    const double direct_amp = loss_amplitude(pl.pl_bs_user);
    const double cascade_amp = loss_amplitude(pl.pl_ris_user) * loss_amplitude(pl.pl_bs_ris);
    const ComplexVec reflected = s.f_ris_user.row(ui).conjugate().transpose().cwiseProduct(ris_diag);
    return s.g_bs_user.row(ui).conjugate().transpose() * direct_amp +
           s.g_bs_ris.transpose() * reflected * cascade_amp;
}

inline ComplexVec effective_terrestrial_channel(std::size_t u, const ChannelSnapshot& s, const RisConfig& ris) {
    return effective_terrestrial_channel(u, s, ris_matrix(ris));
}

/// h_u^*/√PL_{s,u} + f_u^H Θ H/√(PL_{r,u} PL_H), scaled by the satellite link gain.
inline Complex effective_satellite_channel(std::size_t u, const ChannelSnapshot& s, const ComplexVec& ris_diag) {
    require(u < s.users(), "user", "index out of range");
    require(ris_diag.size() == s.h_sat_ris.size(), "ris", "dimension mismatch with snapshot");
    const auto& pl = s.losses[u];
    const auto ui = static_cast<Eigen::Index>(u);
    const double gain = std::pow(10.0, s.satellite_gain_db / 20.0);
    const Complex direct = std::conj(s.h_sat_user[ui]) * loss_amplitude(pl.pl_sat_user);
    const Complex cascade = (s.f_ris_user.row(ui).conjugate().transpose().cwiseProduct(ris_diag))
                                .cwiseProduct(s.h_sat_ris)
                                .sum() *
                            (loss_amplitude(pl.pl_ris_user) * loss_amplitude(pl.pl_sat_ris));
    return gain * (direct + cascade);
}

inline Complex effective_satellite_channel(std::size_t u, const ChannelSnapshot& s, const RisConfig& ris) {
    return effective_satellite_channel(u, s, ris_matrix(ris));
}

enum class RisStrategy { Random, AlignToUser, AlignToStrongest };

/// Index of the user with the largest direct BS gain ‖g_u‖²/PL_{c,u}; ties go to the lower index.
inline std::size_t strongest_direct_user(const ChannelSnapshot& s) {
    std::size_t best = 0;
    double best_gain = -1.0;
    for (std::size_t u = 0; u < s.users(); ++u) {
        const double gain =
            s.g_bs_user.row(static_cast<Eigen::Index>(u)).squaredNorm() * db_to_linear(-s.losses[u].pl_bs_user);
        if (gain > best_gain) {
            best_gain = gain;
            best = u;
        }
    }
    return best;
}

/// Random: φ_n uniform on [0, 2π). Align: each reflected term, projected onto
/// the matched filter of user u's direct path, is rotated onto the direct term
/// so that all N reflections add coherently with it.
template <class Rng>
RisConfig ris_phase_strategy(RisStrategy strategy, const ChannelSnapshot& s, Rng& rng, std::size_t target_user = 0,
                             double amplitude = 1.0) {
    const std::size_t N = s.elements();
    RisConfig cfg;
    cfg.amplitude = amplitude;
    cfg.phases.resize(N);
    if (strategy == RisStrategy::Random) {
        std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
        for (auto& p : cfg.phases) p = phase(rng);
        return cfg;
    }
    const std::size_t u = strategy == RisStrategy::AlignToStrongest ? strongest_direct_user(s) : target_user;
    require(u < s.users(), "ris.target_user", "index out of range");
    const auto ui = static_cast<Eigen::Index>(u);

    const ComplexVec direct = s.g_bs_user.row(ui).conjugate().transpose();
    ComplexVec reference;
    if (direct.norm() > 0.0) {
        reference = direct.conjugate() / direct.norm();
    } else {
        reference = ComplexVec::Zero(direct.size());
        reference[0] = 1.0;
    }
    // projected[n] = conj(f_un) * (G_n · reference)
    const ComplexVec per_element =
        s.f_ris_user.row(ui).conjugate().transpose().cwiseProduct(s.g_bs_ris * reference);
    // The projected direct term d·reference = ‖d‖ is real and non-negative.
    for (std::size_t n = 0; n < N; ++n) {
        double phi = -std::arg(per_element[static_cast<Eigen::Index>(n)]);
        phi = std::fmod(phi, 2.0 * kPi);
        if (phi < 0.0) phi += 2.0 * kPi;
        cfg.phases[n] = phi;
    }
    return cfg;
}

/// One row per complex entry: `link,user,index,re,im`. Links without a user
/// dimension carry user -1; matrices are flattened row-major.
inline void write_snapshot_csv(std::ostream& out, const ChannelSnapshot& s) {
    out.precision(17);
    out << "link,user,index,re,im\n";
    auto row = [&out](const char* link, long user, long index, Complex v) {
        out << link << ',' << user << ',' << index << ',' << v.real() << ',' << v.imag() << '\n';
    };
    for (Eigen::Index u = 0; u < s.h_sat_user.size(); ++u) row("sat_user", u, 0, s.h_sat_user[u]);
    for (Eigen::Index n = 0; n < s.h_sat_ris.size(); ++n) row("sat_ris", -1, n, s.h_sat_ris[n]);
    for (Eigen::Index u = 0; u < s.g_bs_user.rows(); ++u)
        for (Eigen::Index m = 0; m < s.g_bs_user.cols(); ++m) row("bs_user", u, m, s.g_bs_user(u, m));
    for (Eigen::Index n = 0; n < s.g_bs_ris.rows(); ++n)
        for (Eigen::Index m = 0; m < s.g_bs_ris.cols(); ++m)
            row("bs_ris", -1, n * s.g_bs_ris.cols() + m, s.g_bs_ris(n, m));
    for (Eigen::Index u = 0; u < s.f_ris_user.rows(); ++u)
        for (Eigen::Index n = 0; n < s.f_ris_user.cols(); ++n) row("ris_user", u, n, s.f_ris_user(u, n));
}

}  // namespace noma_ris::channel
