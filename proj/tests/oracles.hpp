#pragma once

// Scalar reference implementations used to cross-check the library. They
// work from the raw snapshot with explicit loops and share no code with it.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "noma_ris/channel.hpp"

namespace oracle {

using cd = std::complex<double>;

inline double amp(double loss_db) { return std::pow(10.0, -loss_db / 20.0); }

struct TinyInstance {
    noma_ris::channel::ChannelSnapshot snapshot;
    noma_ris::channel::RisConfig ris;
    double alpha = 0.5;
    double p_total = 1.0;
    double noise = 1.0;
};

inline TinyInstance random_tiny_instance(std::mt19937_64& gen) {
    std::uniform_int_distribution<int> users(1, 3), antennas(1, 2), elements(1, 2);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> loss(0.0, 20.0), unit(0.0, 1.0), phase(0.0, 6.283185307179586);
    const int U = users(gen), M = antennas(gen), N = elements(gen);
    auto c = [&] { return cd(n01(gen), n01(gen)); };

    TinyInstance t;
    auto& s = t.snapshot;
    s.h_sat_user.resize(U);
    s.h_sat_ris.resize(N);
    s.g_bs_user.resize(U, M);
    s.g_bs_ris.resize(N, M);
    s.f_ris_user.resize(U, N);
    for (int u = 0; u < U; ++u) s.h_sat_user[u] = c();
    for (int n = 0; n < N; ++n) s.h_sat_ris[n] = c();
    for (int u = 0; u < U; ++u)
        for (int m = 0; m < M; ++m) s.g_bs_user(u, m) = c();
    for (int n = 0; n < N; ++n)
        for (int m = 0; m < M; ++m) s.g_bs_ris(n, m) = c();
    for (int u = 0; u < U; ++u)
        for (int n = 0; n < N; ++n) s.f_ris_user(u, n) = c();
    s.losses.resize(U);
    for (auto& l : s.losses) {
        l.pl_sat_user = loss(gen);
        l.pl_sat_ris = loss(gen);
        l.pl_bs_user = loss(gen);
        l.pl_bs_ris = loss(gen);
        l.pl_ris_user = loss(gen);
    }
    s.satellite_gain_db = 10.0 * unit(gen);
    t.ris.amplitude = 0.5 + 0.5 * unit(gen);
    for (int n = 0; n < N; ++n) t.ris.phases.push_back(phase(gen));
    t.alpha = unit(gen);
    t.p_total = 0.1 + 10.0 * unit(gen);
    t.noise = 0.01 + unit(gen);
    return t;
}

/// Per-user SINR with power-domain α, inverse-gain power fractions,
/// matched-filter beams and SIC by decreasing terrestrial gain.
inline std::vector<double> brute_force_sinr(const TinyInstance& t) {
    const auto& s = t.snapshot;
    const int U = static_cast<int>(s.g_bs_user.rows());
    const int M = static_cast<int>(s.g_bs_user.cols());
    const int N = static_cast<int>(s.g_bs_ris.rows());

    std::vector<cd> theta(N);
    for (int n = 0; n < N; ++n) theta[n] = std::polar(t.ris.amplitude, t.ris.phases[n]);

    std::vector<std::vector<cd>> e(U, std::vector<cd>(M));
    std::vector<cd> h(U);
    std::vector<double> gain(U, 0.0);
    for (int u = 0; u < U; ++u) {
        const auto& l = s.losses[u];
        for (int m = 0; m < M; ++m) {
            cd acc = std::conj(s.g_bs_user(u, m)) * amp(l.pl_bs_user);
            for (int n = 0; n < N; ++n)
                acc += std::conj(s.f_ris_user(u, n)) * theta[n] * s.g_bs_ris(n, m) * amp(l.pl_ris_user) * amp(l.pl_bs_ris);
            e[u][m] = acc;
            gain[u] += std::norm(acc);
        }
        cd sat = std::conj(s.h_sat_user[u]) * amp(l.pl_sat_user);
        for (int n = 0; n < N; ++n)
            sat += std::conj(s.f_ris_user(u, n)) * theta[n] * s.h_sat_ris[n] * amp(l.pl_ris_user) * amp(l.pl_sat_ris);
        h[u] = sat * std::pow(10.0, s.satellite_gain_db / 20.0);
    }

    // rank[u] = number of users decoded before u
    std::vector<int> rank(U, 0);
    for (int u = 0; u < U; ++u)
        for (int k = 0; k < U; ++k)
            if (gain[k] > gain[u] || (gain[k] == gain[u] && k < u)) ++rank[u];

    const double p_sat = t.alpha * t.p_total;
    const double p_bs = t.p_total - p_sat;
    double inv_sum = 0.0;
    for (int u = 0; u < U; ++u) inv_sum += 1.0 / gain[u];

    std::vector<std::vector<cd>> w(U, std::vector<cd>(M));
    for (int u = 0; u < U; ++u) {
        const double power = (1.0 / gain[u]) / inv_sum * p_bs;
        for (int m = 0; m < M; ++m) w[u][m] = std::conj(e[u][m]) * std::sqrt(power / gain[u]);
    }

    auto inner = [&](int u, int k) {
        cd acc = 0.0;
        for (int m = 0; m < M; ++m) acc += e[u][m] * w[k][m];
        return std::norm(acc);
    };

    std::vector<double> out(U);
    for (int u = 0; u < U; ++u) {
        double interference = 0.0;
        for (int k = 0; k < U; ++k)
            if (rank[k] > rank[u]) interference += inner(u, k);
        const double sat_power = std::norm(h[u]) * p_sat;
        out[u] = (inner(u, u) + t.alpha * sat_power) / (interference + (1.0 - t.alpha) * sat_power + t.noise);
    }
    return out;
}

}  // namespace oracle
