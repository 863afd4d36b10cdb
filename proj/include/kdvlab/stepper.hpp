#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kdvlab/grid.hpp"
#include "kdvlab/rhs.hpp"

namespace kdv {

struct StepperConfig {
    double tau = 1e-3;
    double newton_tol = 1e-6;
    int newton_max_iters = 25;
    bool freeze_jacobian = false;   // reuse the first factorization within a step
    double smoothing_radius = 10.0; // R in the local-smoothing monitor

    void validate() const {
        if (!(tau > 0.0) || !std::isfinite(tau))
            throw std::invalid_argument("StepperConfig: tau must be positive");
        if (!(newton_tol > 0.0))
            throw std::invalid_argument("StepperConfig: newton_tol must be positive");
        if (newton_max_iters < 1)
            throw std::invalid_argument("StepperConfig: newton_max_iters must be >= 1");
        if (!(smoothing_radius > 0.0))
            throw std::invalid_argument("StepperConfig: smoothing_radius must be positive");
    }
};

/// Per-step record. newton_iters counts residual evaluations, so a state that
/// is already a root reports 1. smoothing_increment is
/// tau * sum_{|x_j| <= R} h |D+ u_next|^2, the right-endpoint rule for the
/// time integral in the local-smoothing estimate.
struct StepDiagnostics {
    int newton_iters = 0;
    double final_residual = 0.0;
    double l2_norm = 0.0;
    double energy_defect = 0.0;
    double smoothing_increment = 0.0;
};

/// Newton did not reach the residual tolerance. Carries the sup-norm residual
/// after each evaluation, for post-mortem reporting.
struct NewtonFailure : std::runtime_error {
    NewtonFailure(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

/// Discrete-in-time energy defect
///   ||u_next||^2 - ||u_prev||^2 + ||u_next - u_prev||^2 + 2*tau*eta*h*||Lap u_next||^2
/// (h-weighted norms). Pairing the step equation with u_next cancels the
/// dispersive and flux terms on a periodic grid, so an exactly solved step
/// gives 0; the residual left by Newton is what shows up here. On
/// zero-extension grids boundary flux enters and the value is reported as-is.
inline double energy_balance(const GridFunction& u_prev, const GridFunction& u_next,
                             double tau, const ModelParams& p) {
    detail::require_same_grid(u_prev, u_next, "energy_balance");
    if (!(tau > 0.0))
        throw std::invalid_argument("energy_balance: tau must be positive");
    // The norm difference is evaluated in the factored form
    // (u_next - u_prev, u_next + u_prev): for a converged step the defect is
    // many orders below the norms themselves, and subtracting the two squared
    // norms directly would bury it in rounding.
    GridFunction sum(u_prev.grid()), diff(u_prev.grid());
    for (std::size_t j = 0; j < diff.size(); ++j) {
        sum[j] = u_next[j] + u_prev[j];
        diff[j] = u_next[j] - u_prev[j];
    }
    const GridFunction lap = laplacian(u_next);
    return inner_product(diff, sum) + inner_product(diff, diff) +
           2.0 * tau * p.eta * u_next.grid().h() * inner_product(lap, lap);
}

namespace detail {

inline double smoothing_increment(const GridFunction& u_next, double tau, double radius) {
    const double s = norm_lp_truncated(d_plus(u_next), 2.0, radius);
    return tau * s * s;
}

}  // namespace detail

/// One implicit Euler step: solve F(u_next) = 0 by Newton iteration starting
/// from u_prev, each iteration solving J delta = -F. Throws NewtonFailure
/// when the tolerance is not met within newton_max_iters updates;
/// SingularMatrixError propagates from the linear solver.
inline std::pair<GridFunction, StepDiagnostics> step(const GridFunction& u_prev,
                                                     const ModelParams& p,
                                                     const StepperConfig& cfg) {
    cfg.validate();
    p.basic_check();
    if (!u_prev.all_finite())
        throw std::invalid_argument("step: previous state has non-finite entries");

    GridFunction u = u_prev;
    Residual res = implicit_residual(u, u_prev, cfg.tau, p);
    std::vector<double> history{res.norm_inf};
    std::optional<BandedLU> frozen;

    int updates = 0;
    while (!(res.norm_inf <= cfg.newton_tol)) {
        if (!std::isfinite(res.norm_inf))
            throw NewtonFailure("step: residual became non-finite after " +
                                    std::to_string(updates) + " updates",
                                std::move(history));
        if (updates >= cfg.newton_max_iters)
            throw NewtonFailure("step: no convergence in " +
                                    std::to_string(cfg.newton_max_iters) +
                                    " Newton iterations (residual " +
                                    std::to_string(res.norm_inf) + ")",
                                std::move(history));
        if (!frozen || !cfg.freeze_jacobian)
            frozen = lu_factor(jacobian(u, cfg.tau, p));
        std::vector<double> rhs(u.size());
        for (std::size_t j = 0; j < u.size(); ++j) rhs[j] = -res.values[j];
        const std::vector<double> delta = frozen->solve(std::move(rhs));
        for (std::size_t j = 0; j < u.size(); ++j) u[j] += delta[j];
        ++updates;
        res = implicit_residual(u, u_prev, cfg.tau, p);
        history.push_back(res.norm_inf);
    }

    StepDiagnostics diag;
    diag.newton_iters = static_cast<int>(history.size());
    diag.final_residual = res.norm_inf;
    diag.l2_norm = norm_l2(u);
    diag.energy_defect = energy_balance(u_prev, u, cfg.tau, p);
    diag.smoothing_increment = detail::smoothing_increment(u, cfg.tau, cfg.smoothing_radius);
    return {std::move(u), std::move(diag)};
}

struct Snapshot {
    std::size_t step_index;
    double time;
    GridFunction state;
};

/// Optional per-step callback plus requested snapshot times. A snapshot time
/// s is realized at the first step boundary at or past s (s = 0 captures the
/// initial state).
struct RunObservers {
    std::function<void(std::size_t step_index, double time, const GridFunction& state,
                       const StepDiagnostics& diag)>
        on_step;
    std::vector<double> snapshot_times;
};

struct RunSummary {
    GridFunction final_state;
    double final_time = 0.0;
    std::size_t steps_requested = 0;
    std::size_t steps_completed = 0;
    bool failed = false;
    std::string failure_message;
    std::vector<double> failure_residual_history;
    std::vector<StepDiagnostics> diagnostics;  // one entry per completed step
    std::vector<Snapshot> snapshots;
    double smoothing_total = 0.0;              // sum of per-step increments
};

/// Advance ceil(T/tau) steps from u0. A step failure stops the run and the
/// summary carries the partial trajectory with failed = true.
inline RunSummary run(const GridFunction& u0, const ModelParams& p, const StepperConfig& cfg,
                      double T, const RunObservers& observers = {}) {
    cfg.validate();
    if (!(T > 0.0) || !std::isfinite(T))
        throw std::invalid_argument("run: T must be positive");
    const double raw_steps = std::ceil(T / cfg.tau - 1e-9);
    if (raw_steps > 1e9)
        throw std::invalid_argument("run: step count exceeds budget");
    const auto steps = static_cast<std::size_t>(std::max(1.0, raw_steps));

    // Map snapshot times to step indices up front; index 0 is the initial state.
    std::vector<std::pair<std::size_t, double>> snap_at;
    for (const double s : observers.snapshot_times) {
        if (s < 0.0 || !std::isfinite(s))
            throw std::invalid_argument("run: snapshot time must be finite and >= 0");
        const auto idx = static_cast<std::size_t>(
            std::min(std::max(0.0, std::ceil(s / cfg.tau - 1e-9)), static_cast<double>(steps)));
        snap_at.emplace_back(idx, s);
    }
    std::sort(snap_at.begin(), snap_at.end());

    RunSummary summary{u0};
    summary.steps_requested = steps;
    summary.diagnostics.reserve(steps);
    detail::CompensatedSum smoothing;

    auto capture = [&](std::size_t idx, const GridFunction& state) {
        for (const auto& entry : snap_at)
            if (entry.first == idx)
                summary.snapshots.push_back(
                    Snapshot{idx, static_cast<double>(idx) * cfg.tau, state});
    };
    capture(0, u0);

    GridFunction u = u0;
    for (std::size_t m = 1; m <= steps; ++m) {
        try {
            auto [next, diag] = step(u, p, cfg);
            u = std::move(next);
            smoothing.add(diag.smoothing_increment);
            summary.diagnostics.push_back(diag);
            summary.steps_completed = m;
            summary.final_time = static_cast<double>(m) * cfg.tau;
            if (observers.on_step)
                observers.on_step(m, summary.final_time, u, summary.diagnostics.back());
            capture(m, u);
        } catch (const NewtonFailure& failure) {
            summary.failed = true;
            summary.failure_message = failure.what();
            summary.failure_residual_history = failure.residual_history;
            break;
        } catch (const SingularMatrixError& failure) {
            summary.failed = true;
            summary.failure_message = failure.what();
            break;
        }
    }
    summary.final_state = std::move(u);
    summary.smoothing_total = smoothing.value();
    return summary;
}

}  // namespace kdv
