#pragma once

// Attenuation statistics on either side of the transition elevation θ0:
// log-normal shadowing below it, a Gaussian mixture for excess path loss above
// it, and the tanh transition e(θ) = A·tanh(B(θ−θ0)) that blends them into α(θ).

#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "noma_ris/common.hpp"

namespace noma_ris::environment {

/// Shadowing attenuation whose logarithm is N(mu, sigma²).
struct LogNormalModel {
    double mu_log = 0.5;
    double sigma_log = 0.2;

    void validate() const {
        require_finite(mu_log, "environment.lognormal.mu");
        require_positive(sigma_log, "environment.lognormal.sigma");
    }
};

/// Log-domain draw g ~ N(mu, sigma²).
template <class Rng>
double sample_log_attenuation(const LogNormalModel& m, Rng& rng) {
    m.validate();
    std::normal_distribution<double> normal(m.mu_log, m.sigma_log);
    return normal(rng);
}

/// Linear attenuation exp(g).
template <class Rng>
double sample_lognormal(const LogNormalModel& m, Rng& rng) {
    return std::exp(sample_log_attenuation(m, rng));
}

struct GmmComponent {
    double weight = 1.0;
    double mean = 0.0;
    double stddev = 1.0;
};

/// Gaussian mixture Σ π_i N(μ_i, σ_i²). Weights are checked on construction.
class GmmModel {
public:
    GmmModel() : GmmModel(std::vector<GmmComponent>{{1.0, 0.9, 0.1}}) {}

    explicit GmmModel(std::vector<GmmComponent> components) : components_(std::move(components)) {
        require(!components_.empty(), "environment.gmm", "needs at least one component");
        double total = 0.0;
        for (const auto& c : components_) {
            require(c.weight >= 0.0 && std::isfinite(c.weight), "environment.gmm.weight", "must be >= 0");
            require_finite(c.mean, "environment.gmm.mean");
            require_positive(c.stddev, "environment.gmm.stddev");
            total += c.weight;
        }
        require(std::abs(total - 1.0) <= 1e-12, "environment.gmm.weight", "weights must sum to 1");
        cumulative_.reserve(components_.size());
        double acc = 0.0;
        for (const auto& c : components_) cumulative_.push_back(acc += c.weight);
        cumulative_.back() = 1.0;
    }

    const std::vector<GmmComponent>& components() const noexcept { return components_; }

    double mean() const {
        double m = 0.0;
        for (const auto& c : components_) m += c.weight * c.mean;
        return m;
    }

    double variance() const {
        double second = 0.0;
        for (const auto& c : components_) second += c.weight * (c.stddev * c.stddev + c.mean * c.mean);
        const double m = mean();
        return second - m * m;
    }

    double stddev() const { return std::sqrt(variance()); }

    /// Picks component i with probability π_i, then draws from it.
    template <class Rng>
    double sample(Rng& rng) const {
        std::uniform_real_distribution<double> pick(0.0, 1.0);
        const double u = pick(rng);
        std::size_t i = 0;
        while (i + 1 < cumulative_.size() && u >= cumulative_[i]) ++i;
        std::normal_distribution<double> normal(components_[i].mean, components_[i].stddev);
        return normal(rng);
    }

private:
    std::vector<GmmComponent> components_;
    std::vector<double> cumulative_;
};

template <class Rng>
double sample_gmm(const GmmModel& m, Rng& rng) {
    return m.sample(rng);
}

/// Converts a natural-log power attenuation into dB.
inline double log_attenuation_to_db(double g) { return 10.0 * std::log10(std::exp(1.0)) * g; }

inline double combined_sigma(double sigma_low, double sigma_high) {
    require_positive(sigma_low, "sigma_L");
    require_positive(sigma_high, "sigma_H");
    return std::hypot(sigma_low, sigma_high);
}

/// ψ = E/(Δμ + λσ_c).
inline double psi(double energy, double delta_mu, double lambda, double sigma_c) {
    const double denom = delta_mu + lambda * sigma_c;
    require(denom != 0.0 && std::isfinite(denom), "psi", "delta_mu + lambda*sigma_c must be non-zero");
    return energy / denom;
}

inline double transition_amplitude(double delta_mu, double psi_value) {
    require(delta_mu >= 0.0, "delta_mu", "must be >= 0");
    return psi_value * delta_mu;
}

/// B = 1/(C + σ_c).
inline double transition_steepness(double c_const, double sigma_low, double sigma_high) {
    require(c_const >= 0.0, "c_const", "must be >= 0");
    const double denom = c_const + std::sqrt(sigma_low * sigma_low + sigma_high * sigma_high);
    require(denom > 0.0, "c_const", "C + sigma_c must be > 0");
    return 1.0 / denom;
}

struct TransitionParams {
    double amplitude_A = 0.0;
    double steepness_B = 1.0;
    double theta0 = 45.0;
    double psi = 0.0;
    double lambda = 1.0;
    double energy_E = 0.0;
    double c_const = 1.0;
    double sigma_c = 0.0;
    double delta_mu = 0.0;
};

/// e(θ) = A·tanh(B(θ−θ0)).
inline double transition_term(double theta, const TransitionParams& p) {
    return p.amplitude_A * std::tanh(p.steepness_B * (theta - p.theta0));
}

/// Inputs of the transition: the two attenuation models plus the tuning
/// constants. An unset energy defaults to Δμ so that ψ < 1.
struct TransitionInputs {
    LogNormalModel low;
    GmmModel high;
    std::optional<double> energy_E;
    double lambda = 1.0;
    double c_const = 1.0;
};

/// Derives σ_c, Δμ, ψ, A and B at θ0. The models' moments are taken as
/// constant in θ.
inline TransitionParams derive_transition(const TransitionInputs& in, double theta0) {
    in.low.validate();
    require_finite(theta0, "theta0");
    require(in.lambda >= 0.0, "environment.lambda", "must be >= 0");
    const double sigma_low = in.low.sigma_log;
    const double sigma_high = in.high.stddev();
    TransitionParams p;
    p.theta0 = theta0;
    p.lambda = in.lambda;
    p.c_const = in.c_const;
    p.sigma_c = combined_sigma(sigma_low, sigma_high);
    p.delta_mu = std::abs(in.low.mu_log - in.high.mean());
    p.energy_E = in.energy_E.value_or(p.delta_mu);
    p.psi = psi(p.energy_E, p.delta_mu, p.lambda, p.sigma_c);
    p.amplitude_A = transition_amplitude(p.delta_mu, p.psi);
    p.steepness_B = transition_steepness(p.c_const, sigma_low, sigma_high);
    return p;
}

}  // namespace noma_ris::environment
