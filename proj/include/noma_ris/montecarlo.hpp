#pragma once

// Monte Carlo experiments over elevation, user count and steepness. Every
// trial draws from counter streams keyed by (seed, trial, link) and writes
// into its own slot; reductions run in trial order afterwards, so results do
// not depend on the number of workers.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>
#include <vector>

#include "noma_ris/channel.hpp"
#include "noma_ris/controller.hpp"
#include "noma_ris/environment.hpp"
#include "noma_ris/linklevel.hpp"
#include "noma_ris/pathloss.hpp"
#include "noma_ris/rng.hpp"
#include "noma_ris/scenario.hpp"

namespace noma_ris::montecarlo {

/// Worker count: explicit value, else NOMA_RIS_THREADS, else hardware concurrency.
inline std::size_t resolve_threads(std::optional<std::size_t> requested = std::nullopt) {
    if (requested && *requested > 0) return *requested;
    if (const char* env = std::getenv("NOMA_RIS_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any call is rethrown on the caller's thread.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct PointStats {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
    double sem = 0.0;
    double q10 = 0.0;
    double q50 = 0.0;
    double q90 = 0.0;
};

/// Linear-interpolated quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline PointStats summarize(std::vector<double> values) {
    PointStats s;
    s.n = values.size();
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
        s.sem = s.stddev / std::sqrt(static_cast<double>(s.n));
    }
    std::sort(values.begin(), values.end());
    s.q10 = quantile_sorted(values, 0.10);
    s.q50 = quantile_sorted(values, 0.50);
    s.q90 = quantile_sorted(values, 0.90);
    return s;
}

struct RunMeta {
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::size_t trials = 0;
};

inline RunMeta meta_of(const ScenarioConfig& cfg, std::size_t trials) {
    return {cfg.seed, config_hash(cfg), trials};
}

/// α used by a strategy at elevation θ. Equal allocation is the constant 0.5.
inline double strategy_alpha(Strategy s, double theta, double r, const controller::ControllerParams& ctl) {
    if (s == Strategy::Equal) return 0.5;
    return controller::alpha_adaptive(theta, r, ctl.theta0, ctl.transition);
}

/// Per-user environment attenuation of one trial, in the log domain.
struct EnvironmentDraw {
    std::vector<double> shadowing_log;  // log-normal model, used below θ0
    std::vector<double> clutter_log;    // mixture model, used at and above θ0
};

inline EnvironmentDraw draw_environment(const ScenarioConfig& cfg, std::size_t users, std::uint64_t trial) {
    EnvironmentDraw d;
    d.shadowing_log.resize(users);
    d.clutter_log.resize(users);
    CounterStream rng(cfg.seed, trial, StreamId::Environment);
    for (std::size_t u = 0; u < users; ++u) {
        d.shadowing_log[u] = environment::sample_log_attenuation(cfg.environment.low, rng);
        d.clutter_log[u] = environment::sample_gmm(cfg.environment.high, rng);
    }
    return d;
}

/// Fills the snapshot's per-user losses for elevation θ.
inline void apply_losses(channel::ChannelSnapshot& s, const ScenarioConfig& cfg, const EnvironmentDraw& env,
                         double theta, double theta0) {
    const pathloss::LinkPathLosses base = pathloss::compute_link_losses(cfg.link, theta);
    s.losses.assign(s.users(), base);
    if (!cfg.inject_environment) return;
    for (std::size_t u = 0; u < s.users(); ++u) {
        pathloss::LossOffsets off;
        if (theta < theta0) off.shadowing_db = environment::log_attenuation_to_db(env.shadowing_log[u]);
        else off.clutter_db = environment::log_attenuation_to_db(env.clutter_log[u]);
        s.losses[u] = pathloss::compute_link_losses(cfg.link, theta, off);
    }
}

inline channel::RisConfig choose_ris(const channel::ChannelSnapshot& s, const ScenarioConfig& cfg,
                                     std::uint64_t trial) {
    CounterStream rng(cfg.seed, trial, StreamId::RisPhase);
    return channel::ris_phase_strategy(cfg.ris_strategy, s, rng, cfg.ris_target_user, cfg.ris_amplitude);
}

/// Drops users beyond the first `users`. Because users are drawn in index
/// order, this equals drawing a snapshot with that many users directly.
inline channel::ChannelSnapshot truncate_users(const channel::ChannelSnapshot& s, std::size_t users) {
    require(users >= 1 && users <= s.users(), "users", "out of range for snapshot");
    channel::ChannelSnapshot out;
    const auto U = static_cast<Eigen::Index>(users);
    out.h_sat_user = s.h_sat_user.head(U);
    out.h_sat_ris = s.h_sat_ris;
    out.g_bs_user = s.g_bs_user.topRows(U);
    out.g_bs_ris = s.g_bs_ris;
    out.f_ris_user = s.f_ris_user.topRows(U);
    out.losses.assign(s.losses.begin(), s.losses.begin() + static_cast<std::ptrdiff_t>(users));
    out.satellite_gain_db = s.satellite_gain_db;
    return out;
}

/// Effective channels of one trial at elevation θ, for `users` users.
inline linklevel::EffectiveChannels trial_channels(const ScenarioConfig& cfg, std::uint64_t trial, double theta,
                                                   double theta0, std::size_t users) {
    channel::Dimensions dims = cfg.dims;
    dims.users = users;
    channel::ChannelSnapshot s = channel::draw_fading(dims, cfg.fading, cfg.seed, trial);
    s.satellite_gain_db = cfg.satellite_gain_db;
    apply_losses(s, cfg, draw_environment(cfg, users, trial), theta, theta0);
    return linklevel::effective_channels(s, channel::ris_matrix(choose_ris(s, cfg, trial)));
}

inline double mean_sinr(const linklevel::LinkResult& r) {
    return std::accumulate(r.sinr.begin(), r.sinr.end(), 0.0) / static_cast<double>(r.sinr.size());
}

// ---------------------------------------------------------------- elevation

struct ElevationPoint {
    double theta = 0.0;
    Strategy strategy = Strategy::Dynamic;
    double alpha = 0.0;
    controller::PowerSplit power;
    PointStats sum_capacity;  // bits/s
    PointStats mean_sinr;     // per-trial mean over users
    std::vector<double> per_trial_capacity;
};

struct ElevationSweep {
    RunMeta meta;
    double r = 0.0;
    std::vector<ElevationPoint> points;  // θ-major, strategies in request order
};

inline ElevationSweep run_elevation_sweep(const ScenarioConfig& cfg, const std::vector<double>& thetas,
                                          const std::vector<Strategy>& strategies, std::size_t threads = 1) {
    cfg.validate();
    require(!thetas.empty(), "sweep.theta_deg", "grid is empty");
    require(!strategies.empty(), "sweep.strategy", "needs at least one strategy");
    const controller::ControllerParams ctl = cfg.resolved_controller();
    for (double t : thetas)
        require(t >= ctl.theta_L && t <= ctl.theta_H && t > 0.0, "sweep.theta_deg",
                "every elevation must lie inside [theta_L, theta_H] and be > 0");

    const std::size_t T = cfg.trials, P = thetas.size(), S = strategies.size();
    const linklevel::LinkBudget budget = cfg.budget();
    std::vector<double> capacity(T * P * S), sinr(T * P * S);
    std::vector<double> alphas(P * S);
    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t s = 0; s < S; ++s) alphas[p * S + s] = strategy_alpha(strategies[s], thetas[p], ctl.r, ctl);

    parallel_for(T, threads, [&](std::size_t trial) {
        channel::ChannelSnapshot snap = channel::draw_fading(cfg.dims, cfg.fading, cfg.seed, trial);
        snap.satellite_gain_db = cfg.satellite_gain_db;
        const EnvironmentDraw env = draw_environment(cfg, cfg.dims.users, trial);
        for (std::size_t p = 0; p < P; ++p) {
            apply_losses(snap, cfg, env, thetas[p], ctl.theta0);
            const auto eff = linklevel::effective_channels(snap, channel::ris_matrix(choose_ris(snap, cfg, trial)));
            for (std::size_t s = 0; s < S; ++s) {
                const auto res = linklevel::evaluate(eff, alphas[p * S + s], budget);
                const std::size_t slot = (p * S + s) * T + trial;
                capacity[slot] = res.sum_capacity;
                sinr[slot] = mean_sinr(res);
            }
        }
    });

    ElevationSweep out;
    out.meta = meta_of(cfg, T);
    out.r = ctl.r;
    for (std::size_t p = 0; p < P; ++p) {
        for (std::size_t s = 0; s < S; ++s) {
            const std::size_t base = (p * S + s) * T;
            ElevationPoint pt;
            pt.theta = thetas[p];
            pt.strategy = strategies[s];
            pt.alpha = alphas[p * S + s];
            pt.power = controller::power_split(pt.alpha, cfg.p_total_w);
            pt.per_trial_capacity.assign(capacity.begin() + static_cast<std::ptrdiff_t>(base),
                                         capacity.begin() + static_cast<std::ptrdiff_t>(base + T));
            pt.sum_capacity = summarize(pt.per_trial_capacity);
            pt.mean_sinr = summarize({sinr.begin() + static_cast<std::ptrdiff_t>(base),
                                      sinr.begin() + static_cast<std::ptrdiff_t>(base + T)});
            out.points.push_back(std::move(pt));
        }
    }
    return out;
}

// ---------------------------------------------------------------- histogram

struct Histogram {
    std::vector<double> edges;  // bins + 1
    std::vector<std::size_t> counts;
    std::vector<double> mass;   // counts / total
};

/// Values outside [lo, hi) land in the first or last bin so that the counts
/// always add up to the number of samples.
inline Histogram make_histogram(const std::vector<double>& samples, std::size_t bins, double lo, double hi) {
    require(bins > 0, "histogram_bins", "must be > 0");
    require(hi > lo, "histogram_max", "must exceed histogram_min");
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    h.counts.assign(bins, 0);
    for (double v : samples) {
        const double pos = (v - lo) / (hi - lo) * static_cast<double>(bins);
        const auto idx = pos < 0.0 ? 0 : std::min(bins - 1, static_cast<std::size_t>(pos));
        ++h.counts[idx];
    }
    h.mass.resize(bins);
    const double total = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < bins; ++i) h.mass[i] = total > 0 ? static_cast<double>(h.counts[i]) / total : 0.0;
    return h;
}

struct SinrDistribution {
    Strategy strategy = Strategy::Dynamic;
    double alpha = 0.0;
    std::vector<double> samples;  // trial-major, users in index order
    PointStats stats;
    Histogram histogram;
};

struct SinrHistogramRun {
    RunMeta meta;
    double theta = 0.0;
    std::vector<SinrDistribution> distributions;
};

/// Pools every user's SINR at elevation θ over all trials.
inline SinrHistogramRun run_sinr_histogram(const ScenarioConfig& cfg, double theta,
                                           const std::vector<Strategy>& strategies, std::size_t threads = 1) {
    cfg.validate();
    require(cfg.trials >= 1000, "trials", "SINR histograms need at least 1000 trials");
    require(!strategies.empty(), "sweep.strategy", "needs at least one strategy");
    const controller::ControllerParams ctl = cfg.resolved_controller();
    require(theta > 0.0 && theta <= 90.0, "sweep.theta_high", "must lie in (0, 90]");

    const std::size_t T = cfg.trials, U = cfg.dims.users, S = strategies.size();
    const linklevel::LinkBudget budget = cfg.budget();
    std::vector<double> alphas(S);
    for (std::size_t s = 0; s < S; ++s) alphas[s] = strategy_alpha(strategies[s], theta, ctl.r, ctl);
    std::vector<std::vector<double>> samples(S, std::vector<double>(T * U));

    parallel_for(T, threads, [&](std::size_t trial) {
        const auto eff = trial_channels(cfg, trial, theta, ctl.theta0, U);
        for (std::size_t s = 0; s < S; ++s) {
            const auto res = linklevel::evaluate(eff, alphas[s], budget);
            std::copy(res.sinr.begin(), res.sinr.end(), samples[s].begin() + static_cast<std::ptrdiff_t>(trial * U));
        }
    });

    SinrHistogramRun out;
    out.meta = meta_of(cfg, T);
    out.theta = theta;
    for (std::size_t s = 0; s < S; ++s) {
        SinrDistribution d;
        d.strategy = strategies[s];
        d.alpha = alphas[s];
        d.stats = summarize(samples[s]);
        d.histogram = make_histogram(samples[s], cfg.sweep.histogram_bins, cfg.sweep.histogram_min, cfg.sweep.histogram_max);
        d.samples = std::move(samples[s]);
        out.distributions.push_back(std::move(d));
    }
    return out;
}

// ---------------------------------------------------------------- users

struct UserSweepCell {
    std::size_t users = 0;
    double r = 0.0;
    double alpha = 0.0;
    PointStats sum_capacity;       // bits/s
    PointStats per_user_capacity;  // bits/s per user
};

struct UserSweep {
    RunMeta meta;
    double theta = 0.0;
    std::vector<UserSweepCell> cells;  // U-major
};

/// Sum capacity for each (U, r) pair at elevation θ with the dynamic strategy.
inline UserSweep run_user_sweep(const ScenarioConfig& cfg, const std::vector<std::size_t>& user_counts,
                                const std::vector<double>& r_values, double theta, std::size_t threads = 1) {
    cfg.validate();
    require(!user_counts.empty(), "sweep.user_counts", "must not be empty");
    require(!r_values.empty(), "sweep.r_values", "must not be empty");
    const controller::ControllerParams ctl = cfg.resolved_controller();
    for (double r : r_values)
        require(r >= ctl.r_min - 1e-12 && r <= ctl.r_max + 1e-12, "sweep.r_values", "must lie in [r_min, r_max]");
    for (std::size_t u : user_counts) require(u >= 1, "sweep.user_counts", "entries must be >= 1");
    require(theta >= ctl.theta_L && theta <= ctl.theta_H && theta > 0.0, "sweep.theta_users",
            "must lie inside [theta_L, theta_H]");

    const std::size_t T = cfg.trials, C = user_counts.size(), R = r_values.size();
    const std::size_t max_users = *std::max_element(user_counts.begin(), user_counts.end());
    const linklevel::LinkBudget budget = cfg.budget();
    std::vector<double> alphas(R);
    for (std::size_t j = 0; j < R; ++j) alphas[j] = strategy_alpha(Strategy::Dynamic, theta, r_values[j], ctl);
    std::vector<double> capacity(C * R * T);

    parallel_for(T, threads, [&](std::size_t trial) {
        channel::Dimensions dims = cfg.dims;
        dims.users = max_users;
        channel::ChannelSnapshot full = channel::draw_fading(dims, cfg.fading, cfg.seed, trial);
        full.satellite_gain_db = cfg.satellite_gain_db;
        apply_losses(full, cfg, draw_environment(cfg, max_users, trial), theta, ctl.theta0);
        for (std::size_t c = 0; c < C; ++c) {
            const channel::ChannelSnapshot s = truncate_users(full, user_counts[c]);
            const auto eff = linklevel::effective_channels(s, channel::ris_matrix(choose_ris(s, cfg, trial)));
            for (std::size_t j = 0; j < R; ++j) {
                const auto res = linklevel::evaluate(eff, alphas[j], budget);
                capacity[(c * R + j) * T + trial] = res.sum_capacity;
            }
        }
    });

    UserSweep out;
    out.meta = meta_of(cfg, T);
    out.theta = theta;
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t j = 0; j < R; ++j) {
            const std::size_t base = (c * R + j) * T;
            std::vector<double> sums(capacity.begin() + static_cast<std::ptrdiff_t>(base),
                                     capacity.begin() + static_cast<std::ptrdiff_t>(base + T));
            std::vector<double> per_user(sums);
            for (auto& v : per_user) v /= static_cast<double>(user_counts[c]);
            UserSweepCell cell;
            cell.users = user_counts[c];
            cell.r = r_values[j];
            cell.alpha = alphas[j];
            cell.sum_capacity = summarize(std::move(sums));
            cell.per_user_capacity = summarize(std::move(per_user));
            out.cells.push_back(cell);
        }
    }
    return out;
}

// ---------------------------------------------------------------- feedback

struct FeedbackSession {
    RunMeta meta;
    double theta = 0.0;
    double c_target = 0.0;     // bits/s/Hz
    double delta_c_max = 0.0;  // bits/s/Hz
    double k_initial = 0.0;
    controller::KBounds bounds;
    controller::FeedbackState state;
};

/// Mean sum spectral efficiency (bits/s/Hz) of a batch at a fixed α.
inline double batch_efficiency(const std::vector<linklevel::EffectiveChannels>& batch, double alpha,
                               const linklevel::LinkBudget& budget) {
    double sum = 0.0;
    for (const auto& eff : batch) sum += linklevel::evaluate(eff, alpha, budget).sum_capacity;
    return sum / static_cast<double>(batch.size()) / budget.bandwidth_hz;
}

/// Closed loop at elevation `feedback_theta`: every iteration evaluates the
/// same batch of channel realizations with the current r and feeds the mean
/// sum spectral efficiency back into k′. Capacities are normalized by the
/// bandwidth so the error is O(1) in the learning-rate formula.
inline FeedbackSession run_feedback_session(const ScenarioConfig& cfg, std::size_t iterations,
                                            std::size_t threads = 1) {
    cfg.validate();
    require(iterations >= 1, "sweep.feedback_iterations", "must be >= 1");
    require(cfg.sweep.feedback_trials >= 1, "sweep.feedback_trials", "must be >= 1");
    controller::ControllerParams ctl = cfg.resolved_controller();
    const double theta = cfg.sweep.feedback_theta;
    require(theta >= ctl.theta_L && theta <= ctl.theta_H && theta > 0.0, "sweep.feedback_theta",
            "must lie inside [theta_L, theta_H]");
    const linklevel::LinkBudget budget = cfg.budget();

    const std::size_t batch_size = std::max(cfg.sweep.feedback_trials, cfg.sweep.calibration_trials);
    std::vector<linklevel::EffectiveChannels> batch(batch_size);
    parallel_for(batch_size, threads, [&](std::size_t trial) {
        batch[trial] = trial_channels(cfg, trial, theta, ctl.theta0, cfg.dims.users);
    });
    const std::vector<linklevel::EffectiveChannels> feedback_batch(
        batch.begin(), batch.begin() + static_cast<std::ptrdiff_t>(cfg.sweep.feedback_trials));

    FeedbackSession out;
    out.meta = meta_of(cfg, cfg.sweep.feedback_trials);
    out.theta = theta;
    if (ctl.delta_c_max) {
        out.delta_c_max = *ctl.delta_c_max;
    } else {
        const std::vector<linklevel::EffectiveChannels> calibration(
            batch.begin(), batch.begin() + static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, cfg.sweep.calibration_trials)));
        out.delta_c_max =
            std::abs(batch_efficiency(calibration, 1.0, budget) - batch_efficiency(calibration, 0.0, budget));
    }
    out.c_target = ctl.c_target.value_or(cfg.sweep.target_gain * batch_efficiency(feedback_batch, 0.5, budget));
    ctl.c_target = out.c_target;
    out.bounds = controller::k_bounds(ctl);
    out.k_initial = cfg.k_prime_initial ? *cfg.k_prime_initial
                                        : controller::k_init(out.delta_c_max, out.c_target, out.bounds);

    out.state = controller::run_feedback_loop(ctl, out.k_initial, iterations, [&](double r) {
        return batch_efficiency(feedback_batch, controller::alpha_adaptive(theta, r, ctl.theta0, ctl.transition), budget);
    });
    return out;
}

// ---------------------------------------------------------------- r range

struct RRangeRow {
    double k_prime = 0.0;
    double r = 0.0;
    bool at_r_min = false;
    bool at_r_max = false;
    bool in_range = false;
};

/// r(k′) over a uniform k′ grid on [0, 1.25·k_max] plus the exact bounds.
inline std::vector<RRangeRow> r_range_curve(const ScenarioConfig& cfg) {
    cfg.validate();
    const controller::ControllerParams ctl = cfg.resolved_controller();
    const controller::KBounds b = controller::k_bounds(ctl);
    std::vector<double> ks;
    const std::size_t n = cfg.sweep.k_grid_points;
    const double k_hi = 1.25 * b.k_max;
    for (std::size_t i = 0; i < n; ++i) ks.push_back(k_hi * static_cast<double>(i) / static_cast<double>(n - 1));
    ks.push_back(b.k_min);
    ks.push_back(b.k_max);
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

    std::vector<RRangeRow> rows;
    for (double k : ks) {
        RRangeRow row;
        row.k_prime = k;
        row.r = controller::current_r(ctl, k);
        row.at_r_min = k == b.k_min;
        row.at_r_max = k == b.k_max;
        row.in_range = k >= b.k_min && k <= b.k_max;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace noma_ris::montecarlo
