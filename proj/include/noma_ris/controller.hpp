#pragma once

// Elevation-dependent power split α(θ) between the satellite and terrestrial
// signals, its steepness r, and the feedback loop that tunes r through k′.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "noma_ris/common.hpp"
#include "noma_ris/environment.hpp"

namespace noma_ris::controller {

/// Stable steepness range: r <= 4γ with γ in [0.005, 0.02].
inline constexpr double kRMin = 0.02;
inline constexpr double kRMax = 0.08;

struct ControllerParams {
    double theta_L = 10.0;
    double theta_H = 90.0;
    double theta0 = 50.0;
    double r = 0.08;
    double k_prime = 1.0;
    std::optional<double> c_target;     // normalized capacity units
    std::optional<double> delta_c_max;  // same units as c_target
    double vartheta = 0.02;
    double beta = 1.0;
    double gamma_current = 0.02;
    double r_min = kRMin;
    double r_max = kRMax;
    environment::TransitionParams transition;

    /// Places θ0 at the midpoint of [θ_L, θ_H].
    static ControllerParams from_endpoints(double theta_L, double theta_H) {
        require(theta_H > theta_L, "controller.theta_H", "must exceed theta_L");
        ControllerParams p;
        p.theta_L = theta_L;
        p.theta_H = theta_H;
        p.theta0 = 0.5 * (theta_L + theta_H);
        p.transition.theta0 = p.theta0;
        return p;
    }

    void validate() const {
        require_finite(theta_L, "controller.theta_L");
        require_finite(theta_H, "controller.theta_H");
        require(theta_H > theta_L, "controller.theta_H", "must exceed theta_L");
        require(theta_L < theta0 && theta0 < theta_H, "controller.theta0", "must lie strictly inside (theta_L, theta_H)");
        require_positive(r, "controller.r");
        require_finite(k_prime, "controller.k_prime");
        require_positive(vartheta, "controller.vartheta");
        require(beta >= 0.0, "controller.beta", "must be >= 0");
        require(r_min > 0.0 && r_max > r_min, "controller.r_max", "need 0 < r_min < r_max");
        if (c_target) require_positive(*c_target, "controller.c_target");
        if (delta_c_max) require_positive(*delta_c_max, "controller.delta_c_max");
    }
};

/// α(θ) = 1/(1 + e^{−r(θ−θ0)}).
inline double alpha_basic(double theta, double r, double theta0) {
    require_positive(r, "r");
    return 1.0 / (1.0 + std::exp(-r * (theta - theta0)));
}

/// Steepness that puts α(θ_L) = a and α(θ_H) = b with θ0 at the midpoint.
inline double r_from_endpoints(double a, double b, double theta_L, double theta_H) {
    require(a > 0.0 && a < 1.0, "a", "must lie in (0, 1)");
    require(b > 0.0 && b < 1.0, "b", "must lie in (0, 1)");
    require(a <= b, "a", "must not exceed b");
    require(theta_H > theta_L, "theta_H", "must exceed theta_L");
    return (std::log((1.0 - a) / a) - std::log((1.0 - b) / b)) / (theta_H - theta_L);
}

/// α(θ) = 1/(1 + e^{−r(θ−θ0) + A·tanh(B(θ−θ0))}).
inline double alpha_adaptive(double theta, double r, double theta0, const environment::TransitionParams& t) {
    require_positive(r, "r");
    const double exponent = r * (theta - theta0) - t.amplitude_A * std::tanh(t.steepness_B * (theta - theta0));
    return 1.0 / (1.0 + std::exp(-exponent));
}

/// r = k′Δμ/(σ_c(θ_H − θ_L)).
inline double r_from_k(double k_prime, double delta_mu, double sigma_c, double theta_L, double theta_H) {
    require_positive(sigma_c, "sigma_c");
    require(theta_H > theta_L, "theta_H", "must exceed theta_L");
    return k_prime * delta_mu / (sigma_c * (theta_H - theta_L));
}

struct KBounds {
    double k_min = 0.0;
    double k_max = 0.0;
};

/// k′ interval that keeps r_from_k inside [r_min, r_max].
inline KBounds k_bounds(double sigma_c, double theta_L, double theta_H, double delta_mu, double r_min = kRMin,
                        double r_max = kRMax) {
    require_positive(sigma_c, "sigma_c");
    require(theta_H > theta_L, "theta_H", "must exceed theta_L");
    require(delta_mu > 0.0, "delta_mu", "must be > 0");
    const double scale = sigma_c * (theta_H - theta_L) / delta_mu;
    return {r_min * scale, r_max * scale};
}

inline KBounds k_bounds(const ControllerParams& p) {
    return k_bounds(p.transition.sigma_c, p.theta_L, p.theta_H, p.transition.delta_mu, p.r_min, p.r_max);
}

/// k′ = ΔC_max/C_tar, clamped into `bounds` when given.
inline double k_init(double delta_c_max, double c_target, std::optional<KBounds> bounds = std::nullopt) {
    require_positive(delta_c_max, "delta_c_max");
    require_positive(c_target, "c_target");
    const double k = delta_c_max / c_target;
    return bounds ? std::clamp(k, bounds->k_min, bounds->k_max) : k;
}

/// γ = ϑ/(1 + β|e|).
inline double learning_rate(double vartheta, double beta, double error) {
    require_positive(vartheta, "vartheta");
    require(beta >= 0.0, "beta", "must be >= 0");
    return vartheta / (1.0 + beta * std::abs(error));
}

struct FeedbackRecord {
    std::size_t t = 0;
    double k_prime = 0.0;  // value after the update
    double gamma = 0.0;
    double error = 0.0;
    double c_obs = 0.0;
    double r = 0.0;  // steepness implied by k_prime
};

struct FeedbackState {
    double k_prime = 1.0;
    std::size_t time_step = 0;
    double last_error = 0.0;
    std::vector<FeedbackRecord> history;
};

/// r implied by the current k′ and the controller's transition statistics.
inline double current_r(const ControllerParams& p, double k_prime) {
    return r_from_k(k_prime, p.transition.delta_mu, p.transition.sigma_c, p.theta_L, p.theta_H);
}

/// One feedback step: e = C_tar − C_obs, k′ += γ(e)·e, with k′ then clamped
/// so the implied r stays in [r_min, r_max].
inline FeedbackState k_update(FeedbackState state, double c_obs, const ControllerParams& p) {
    require(p.c_target.has_value(), "controller.c_target", "must be set before feedback updates");
    require_finite(c_obs, "c_obs");
    const double error = *p.c_target - c_obs;
    const double gamma = learning_rate(p.vartheta, p.beta, error);
    const KBounds bounds = k_bounds(p);
    state.k_prime = std::clamp(state.k_prime + gamma * error, bounds.k_min, bounds.k_max);
    state.last_error = error;
    state.history.push_back({state.time_step, state.k_prime, gamma, error, c_obs, current_r(p, state.k_prime)});
    ++state.time_step;
    return state;
}

/// Runs `iterations` feedback steps starting from k0. `plant(r)` returns the
/// observed capacity when the controller runs with steepness r.
template <class Plant>
FeedbackState run_feedback_loop(const ControllerParams& p, double k0, std::size_t iterations, Plant&& plant) {
    require(iterations >= 1, "iterations", "must be >= 1");
    const KBounds bounds = k_bounds(p);
    FeedbackState state;
    state.k_prime = std::clamp(k0, bounds.k_min, bounds.k_max);
    for (std::size_t i = 0; i < iterations; ++i) state = k_update(std::move(state), plant(current_r(p, state.k_prime)), p);
    return state;
}

struct StabilityReport {
    double midpoint_slope = 0.0;           // r/4, basic sigmoid
    double adaptive_midpoint_slope = 0.0;  // (r − A·B)/4, with the tanh transition
    bool stable = false;                   // r <= 4γ
};

inline StabilityReport stability_check(double r, double gamma, const environment::TransitionParams& t = {}) {
    require_positive(r, "r");
    StabilityReport out;
    out.midpoint_slope = r / 4.0;
    out.adaptive_midpoint_slope = (r - t.amplitude_A * t.steepness_B) / 4.0;
    out.stable = r <= 4.0 * gamma * (1.0 + 1e-12);
    return out;
}

struct PowerSplit {
    double satellite = 0.0;    // P_s
    double terrestrial = 0.0;  // P_b
};

/// P_s = αP_t, P_b = (1 − α)P_t. The smaller share is the one obtained by
/// subtraction, which is exact and makes P_s + P_b == P_t bit for bit.
inline PowerSplit power_split(double alpha, double p_total) {
    require(alpha >= 0.0 && alpha <= 1.0, "alpha", "must lie in [0, 1]");
    require_positive(p_total, "p_total");
    if (alpha >= 0.5) {
        const double ps = alpha * p_total;
        return {ps, p_total - ps};
    }
    const double pb = (1.0 - alpha) * p_total;
    return {p_total - pb, pb};
}

/// CSV `t,k_prime,gamma,error,c_obs`.
inline void write_feedback_csv(std::ostream& out, const FeedbackState& state) {
    out.precision(17);
    out << "t,k_prime,gamma,error,c_obs\n";
    for (const auto& h : state.history)
        out << h.t << ',' << h.k_prime << ',' << h.gamma << ',' << h.error << ',' << h.c_obs << '\n';
}

}  // namespace noma_ris::controller
