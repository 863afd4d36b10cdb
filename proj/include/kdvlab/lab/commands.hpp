#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "kdvlab/exact.hpp"
#include "kdvlab/interp.hpp"
#include "kdvlab/lab/report.hpp"
#include "kdvlab/lab/run_config.hpp"
#include "kdvlab/stepper.hpp"

namespace kdv {

namespace detail {

/// Work-stealing loop over [0, count) with a fixed worker count. Each index
/// is processed exactly once; the first exception (if any) is rethrown after
/// all workers join. Callers give each index its own output slot, so results
/// are independent of scheduling.
template <class Fn>
void parallel_for_indexed(std::size_t count, int jobs, Fn&& fn) {
    if (count == 0) return;
    std::size_t workers = jobs < 1 ? 1 : static_cast<std::size_t>(jobs);
    workers = std::min(workers, count);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

template <class Writer>
std::string write_artifact(const std::string& dir, const std::string& name, Writer&& writer) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw ConfigError("output: cannot create directory '" + dir + "': " + ec.message());
    const std::string path = dir + "/" + name;
    std::ofstream os(path);
    if (!os) throw ConfigError("output: cannot open '" + path + "' for writing");
    writer(os);
    os.flush();
    if (!os) throw ConfigError("output: write failed for '" + path + "'");
    return path;
}

struct PointResult {
    double runtime_seconds = 0.0;
    bool failed = false;
    std::string note;
    double newton_iters_mean = 0.0;
    int newton_iters_max = 0;
    double error = std::numeric_limits<double>::quiet_NaN();
    double smoothing_total = 0.0;
    std::optional<GridFunction> final_state;
};

/// Run one configuration to time T and collect row-level statistics.
/// compute_soliton_error requires soliton initial data.
inline PointResult execute_run(const RunConfig& cfg, bool compute_soliton_error) {
    const Grid grid = cfg.make_grid();
    const GridFunction u0 = make_initial_state(cfg, grid);

    PointResult out;
    const auto t0 = std::chrono::steady_clock::now();
    RunSummary summary = run(u0, cfg.model, cfg.stepper, cfg.T);
    out.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    double iters = 0.0;
    for (const auto& d : summary.diagnostics) {
        iters += d.newton_iters;
        out.newton_iters_max = std::max(out.newton_iters_max, d.newton_iters);
    }
    if (!summary.diagnostics.empty())
        out.newton_iters_mean = iters / static_cast<double>(summary.diagnostics.size());
    out.smoothing_total = summary.smoothing_total;
    out.failed = summary.failed;
    out.note = summary.failure_message;

    if (!summary.failed && compute_soliton_error) {
        const SolitonParams sp{cfg.model.k, cfg.initial.c};
        const auto [a, b] = cfg.resolved_window();
        const double t_final = cfg.T;
        out.error = relative_l2_error_window(
            summary.final_state, [&](double x) { return soliton(x, t_final, sp); }, a, b);
    }
    out.final_state = std::move(summary.final_state);
    return out;
}

inline std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline std::vector<std::string> sweep_metadata(const RunConfig& cfg) {
    const auto [a, b] = cfg.resolved_window();
    return {
        "k=" + std::to_string(cfg.model.k),
        "beta=" + fmt_double(cfg.model.beta),
        "T=" + fmt_double(cfg.T),
        "window=[" + fmt_double(a) + "," + fmt_double(b) + "]",
        std::string("window_mode=") +
            (cfg.window.mode == WindowMode::Fixed ? "fixed" : "moving"),
    };
}

}  // namespace detail

// ---------------------------------------------------------------------------
// solve: one run, full artifact set.
// ---------------------------------------------------------------------------

struct SolveArtifacts {
    RunSummary summary;
    double runtime_seconds = 0.0;
    double relative_error = std::numeric_limits<double>::quiet_NaN();
    bool error_available = false;
    std::vector<std::string> files_written;
    int exit_code = 0;  // 0 success, 3 numerical failure
};

inline SolveArtifacts cmd_solve(const RunConfig& cfg) {
    cfg.validate();
    const Grid grid = cfg.make_grid();
    const GridFunction u0 = make_initial_state(cfg, grid);

    RunObservers obs;
    obs.snapshot_times = cfg.snapshot_times;
    const auto t0 = std::chrono::steady_clock::now();
    SolveArtifacts art{run(u0, cfg.model, cfg.stepper, cfg.T, obs)};
    const RunSummary& summary = art.summary;
    const double runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    art.runtime_seconds = runtime;
    if (!summary.failed && cfg.initial.kind == InitialKind::Soliton) {
        const SolitonParams sp{cfg.model.k, cfg.initial.c};
        const auto [a, b] = cfg.resolved_window();
        const double t_final = cfg.T;
        art.relative_error = relative_l2_error_window(
            summary.final_state, [&](double x) { return soliton(x, t_final, sp); }, a, b);
        art.error_available = true;
    }
    art.exit_code = summary.failed ? 3 : 0;

    using detail::fmt_double;
    using detail::write_artifact;
    const std::string& dir = cfg.output_dir;

    std::vector<std::pair<std::string, std::string>> result;
    result.emplace_back("status", summary.failed ? "failed" : "ok");
    result.emplace_back("steps_requested", std::to_string(summary.steps_requested));
    result.emplace_back("steps_completed", std::to_string(summary.steps_completed));
    result.emplace_back("final_time", fmt_double(summary.final_time));
    result.emplace_back("final_l2", fmt_double(norm_l2(summary.final_state)));
    result.emplace_back("smoothing_total", fmt_double(summary.smoothing_total));
    if (art.error_available)
        result.emplace_back("relative_l2_error", fmt_double(art.relative_error));
    result.emplace_back("runtime_seconds", fmt_double(runtime));
    if (summary.failed) result.emplace_back("failure", summary.failure_message);

    art.files_written.push_back(write_artifact(dir, "manifest.txt", [&](std::ostream& os) {
        write_run_config(os, cfg);
        os << "\n[result]\n";
        for (const auto& [key, value] : result) os << key << " = " << value << "\n";
    }));
    art.files_written.push_back(write_artifact(dir, "diagnostics.csv", [&](std::ostream& os) {
        write_diagnostics_csv(os, summary, cfg.stepper.tau,
                              {"tau=" + fmt_double(cfg.stepper.tau), "T=" + fmt_double(cfg.T),
                               "monitor_radius=" + fmt_double(cfg.stepper.smoothing_radius)});
    }));
    for (std::size_t i = 0; i < summary.snapshots.size(); ++i) {
        const Snapshot& snap = summary.snapshots[i];
        char name[64];
        std::snprintf(name, sizeof name, "snapshot_%03zu.csv", i);
        art.files_written.push_back(write_artifact(dir, name, [&](std::ostream& os) {
            write_state_csv(os, snap.state,
                            {"t=" + fmt_double(snap.time),
                             "step=" + std::to_string(snap.step_index)});
        }));
    }
    art.files_written.push_back(write_artifact(dir, "final_state.csv", [&](std::ostream& os) {
        write_state_csv(os, summary.final_state,
                        {"t=" + fmt_double(summary.final_time),
                         "status=" + std::string(summary.failed ? "failed" : "ok")});
    }));
    art.files_written.push_back(write_artifact(dir, "final_state.svg", [&](std::ostream& os) {
        PlotSeries series;
        series.label = "u(t=" + detail::fmt_short(summary.final_time) + ")";
        const Grid& g = summary.final_state.grid();
        for (std::size_t j = 0; j < summary.final_state.size(); ++j)
            series.points.emplace_back(g.x(static_cast<std::ptrdiff_t>(j)),
                                       summary.final_state[j]);
        emit_profile_svg(os, "final state", {series});
    }));
    return art;
}

// ---------------------------------------------------------------------------
// convergence: grid refinement sweep at one or more time steps.
// ---------------------------------------------------------------------------

inline std::vector<SweepReport> cmd_convergence(const RunConfig& base,
                                                const std::vector<std::size_t>& n_list,
                                                const std::vector<double>& tau_list,
                                                int jobs = 1) {
    if (n_list.empty()) throw ConfigError("convergence: n_list must not be empty");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw ConfigError("convergence: n_list must be strictly increasing");
    if (tau_list.empty()) throw ConfigError("convergence: tau_list must not be empty");
    if (base.initial.kind != InitialKind::Soliton)
        throw ConfigError("convergence: requires soliton initial data (exact reference)");

    std::vector<RunConfig> points;
    for (const double tau : tau_list) {
        for (const std::size_t n : n_list) {
            RunConfig cfg = base;
            cfg.n_points = n;
            cfg.stepper.tau = tau;
            cfg.validate();
            points.push_back(std::move(cfg));
        }
    }

    std::vector<detail::PointResult> results(points.size());
    detail::parallel_for_indexed(points.size(), jobs, [&](std::size_t i) {
        results[i] = detail::execute_run(points[i], true);
    });

    std::vector<SweepReport> reports;
    std::vector<PlotSeries> series;
    for (std::size_t ti = 0; ti < tau_list.size(); ++ti) {
        SweepReport report;
        report.swept_key = "n_points";
        report.metadata = detail::sweep_metadata(base);
        report.metadata.push_back("tau=" + detail::fmt_double(tau_list[ti]));
        report.metadata.push_back("eta=" + detail::fmt_double(base.model.eta));
        PlotSeries s;
        s.label = "tau=" + detail::fmt_short(tau_list[ti]);
        for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
            const std::size_t idx = ti * n_list.size() + ni;
            const detail::PointResult& r = results[idx];
            SweepRow row;
            row.parameter = static_cast<double>(n_list[ni]);
            row.n_points = n_list[ni];
            row.tau = tau_list[ti];
            row.eta = base.model.eta;
            row.error = r.error;
            row.runtime_seconds = r.runtime_seconds;
            row.newton_iters_mean = r.newton_iters_mean;
            row.newton_iters_max = r.newton_iters_max;
            row.failed = r.failed;
            row.note = r.note;
            if (!r.failed) s.points.emplace_back(row.parameter, row.error);
            report.rows.push_back(std::move(row));
        }
        report.compute_orders();
        const std::string name =
            "convergence_k" + std::to_string(base.model.k) + "_tau" +
            detail::fmt_short(tau_list[ti]) + ".csv";
        detail::write_artifact(base.output_dir, name,
                               [&](std::ostream& os) { emit_csv(os, report); });
        series.push_back(std::move(s));
        reports.push_back(std::move(report));
    }

    detail::write_artifact(base.output_dir, "convergence.svg", [&](std::ostream& os) {
        emit_loglog_svg(os, "relative L2 error vs grid size (k=" +
                                std::to_string(base.model.k) + ")",
                        "n_points", "relative L2 error", series);
    });
    detail::write_artifact(base.output_dir, "convergence_manifest.txt", [&](std::ostream& os) {
        write_run_config(os, base);
        os << "\n[result]\n";
        os << "command = convergence\n";
        std::string ns;
        for (std::size_t i = 0; i < n_list.size(); ++i)
            ns += (i ? "," : "") + std::to_string(n_list[i]);
        os << "n_list = " << ns << "\n";
        os << "tau_list = " << detail::join_doubles(tau_list) << "\n";
    });
    return reports;
}

// ---------------------------------------------------------------------------
// viscosity sweep: fixed grid, descending stabilization strengths.
// ---------------------------------------------------------------------------

inline SweepReport cmd_viscosity_sweep(const RunConfig& base,
                                       const std::vector<double>& eta_list, int jobs = 1) {
    if (eta_list.empty()) throw ConfigError("viscosity-sweep: eta_list must not be empty");
    for (std::size_t i = 0; i < eta_list.size(); ++i) {
        if (!(eta_list[i] >= 0.0))
            throw ConfigError("viscosity-sweep: eta values must be >= 0");
        if (i > 0 && !(eta_list[i] < eta_list[i - 1]))
            throw ConfigError("viscosity-sweep: eta_list must be strictly descending");
    }
    if (base.initial.kind != InitialKind::Soliton)
        throw ConfigError("viscosity-sweep: requires soliton initial data (exact reference)");

    std::vector<RunConfig> points;
    for (const double eta : eta_list) {
        RunConfig cfg = base;
        cfg.model.eta = eta;
        cfg.validate();
        points.push_back(std::move(cfg));
    }
    std::vector<detail::PointResult> results(points.size());
    detail::parallel_for_indexed(points.size(), jobs, [&](std::size_t i) {
        results[i] = detail::execute_run(points[i], true);
    });

    SweepReport report;
    report.swept_key = "eta";
    report.metadata = detail::sweep_metadata(base);
    report.metadata.push_back("n_points=" + std::to_string(base.n_points));
    report.metadata.push_back("tau=" + detail::fmt_double(base.stepper.tau));
    PlotSeries s;
    s.label = "n=" + std::to_string(base.n_points);
    for (std::size_t i = 0; i < eta_list.size(); ++i) {
        const detail::PointResult& r = results[i];
        SweepRow row;
        row.parameter = eta_list[i];
        row.n_points = base.n_points;
        row.tau = base.stepper.tau;
        row.eta = eta_list[i];
        row.error = r.error;
        row.runtime_seconds = r.runtime_seconds;
        row.newton_iters_mean = r.newton_iters_mean;
        row.newton_iters_max = r.newton_iters_max;
        row.failed = r.failed;
        row.note = r.note;
        if (eta_list[i] == 0.0)
            row.note = row.note.empty() ? "stabilization disabled (experimental)"
                                        : "stabilization disabled (experimental); " + row.note;
        if (!r.failed && eta_list[i] > 0.0) s.points.emplace_back(row.parameter, row.error);
        report.rows.push_back(std::move(row));
    }

    detail::write_artifact(base.output_dir, "viscosity.csv",
                           [&](std::ostream& os) { emit_csv(os, report); });
    detail::write_artifact(base.output_dir, "viscosity.svg", [&](std::ostream& os) {
        emit_loglog_svg(os, "relative L2 error vs stabilization strength", "eta",
                        "relative L2 error", {s});
    });
    detail::write_artifact(base.output_dir, "viscosity_manifest.txt", [&](std::ostream& os) {
        write_run_config(os, base);
        os << "\n[result]\n";
        os << "command = viscosity-sweep\n";
        os << "eta_list = " << detail::join_doubles(eta_list) << "\n";
    });
    return report;
}

// ---------------------------------------------------------------------------
// miura: cubic-flux runs from rational data, transformed final profiles
// compared across parameter pairs and refinements.
// ---------------------------------------------------------------------------

struct MiuraRun {
    TsutsumiParams params;
    std::size_t n_points = 0;
    bool failed = false;
    std::string note;
    double runtime_seconds = 0.0;
    double newton_iters_mean = 0.0;
    int newton_iters_max = 0;
    std::optional<GridFunction> profile;  // transform of the final state
};

struct MiuraSelfDistance {
    std::size_t pair_index;
    std::size_t n_coarse, n_fine;
    double distance = std::numeric_limits<double>::quiet_NaN();
};

struct MiuraPairDistance {
    std::size_t pair_a, pair_b;
    std::size_t n_points;
    double distance = std::numeric_limits<double>::quiet_NaN();
};

struct MiuraReport {
    std::vector<TsutsumiParams> pairs;
    std::vector<std::size_t> n_list;
    double window_a = 0.0, window_b = 0.0;
    std::vector<MiuraRun> runs;                    // pair-major, then n
    std::vector<MiuraSelfDistance> self_distances; // consecutive refinements
    std::vector<MiuraPairDistance> pairwise;       // at the finest level
};

inline MiuraReport cmd_miura(const RunConfig& base,
                             const std::vector<TsutsumiParams>& pairs,
                             const std::vector<std::size_t>& n_list, int jobs = 1) {
    if (pairs.empty()) throw ConfigError("miura: need at least one (c, eps) pair");
    if (n_list.empty()) throw ConfigError("miura: n_list must not be empty");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw ConfigError("miura: n_list must be strictly increasing");
    for (const auto& p : pairs) {
        try {
            p.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("miura: ") + e.what());
        }
    }

    std::vector<RunConfig> points;
    for (const auto& p : pairs) {
        for (const std::size_t n : n_list) {
            RunConfig cfg = base;
            cfg.model.k = 2;  // the transform bridges the cubic flux to the quadratic one
            cfg.initial.kind = InitialKind::Tsutsumi;
            cfg.initial.c = p.c;
            cfg.initial.eps = p.eps;
            cfg.n_points = n;
            cfg.validate();
            points.push_back(std::move(cfg));
        }
    }

    MiuraReport report;
    report.pairs = pairs;
    report.n_list = n_list;
    report.window_a = base.window.a;
    report.window_b = base.window.b;
    report.runs.resize(points.size());

    detail::parallel_for_indexed(points.size(), jobs, [&](std::size_t i) {
        MiuraRun& slot = report.runs[i];
        slot.params = {points[i].initial.c, points[i].initial.eps};
        slot.n_points = points[i].n_points;
        const detail::PointResult r = detail::execute_run(points[i], false);
        slot.failed = r.failed;
        slot.note = r.note;
        slot.runtime_seconds = r.runtime_seconds;
        slot.newton_iters_mean = r.newton_iters_mean;
        slot.newton_iters_max = r.newton_iters_max;
        if (!r.failed && r.final_state) slot.profile = miura_transform(*r.final_state);
    });

    const std::size_t levels = n_list.size();
    auto run_at = [&](std::size_t pair, std::size_t level) -> const MiuraRun& {
        return report.runs[pair * levels + level];
    };

    for (std::size_t p = 0; p < pairs.size(); ++p) {
        for (std::size_t l = 0; l + 1 < levels; ++l) {
            MiuraSelfDistance sd{p, n_list[l], n_list[l + 1],
                                 std::numeric_limits<double>::quiet_NaN()};
            const auto& coarse = run_at(p, l);
            const auto& fine = run_at(p, l + 1);
            if (coarse.profile && fine.profile)
                sd.distance = relative_l2_distance_window(*coarse.profile, *fine.profile,
                                                          report.window_a, report.window_b);
            report.self_distances.push_back(sd);
        }
    }
    for (std::size_t a = 0; a < pairs.size(); ++a) {
        for (std::size_t b = a + 1; b < pairs.size(); ++b) {
            MiuraPairDistance pd{a, b, n_list[levels - 1],
                                 std::numeric_limits<double>::quiet_NaN()};
            const auto& ra = run_at(a, levels - 1);
            const auto& rb = run_at(b, levels - 1);
            if (ra.profile && rb.profile)
                pd.distance = relative_l2_distance_window(*ra.profile, *rb.profile,
                                                          report.window_a, report.window_b);
            report.pairwise.push_back(pd);
        }
    }

    using detail::fmt_double;
    detail::write_artifact(base.output_dir, "miura_runs.csv", [&](std::ostream& os) {
        os << "# window=[" << fmt_double(report.window_a) << "," << fmt_double(report.window_b)
           << "]\n";
        os << "# T=" << fmt_double(base.T) << "\n";
        os << "pair_index,c,eps,n_points,runtime_seconds,newton_iters_mean,newton_iters_max,"
              "status,note\n";
        for (std::size_t i = 0; i < report.runs.size(); ++i) {
            const MiuraRun& r = report.runs[i];
            os << i / levels << "," << fmt_double(r.params.c) << "," << fmt_double(r.params.eps)
               << "," << r.n_points << "," << fmt_double(r.runtime_seconds) << ","
               << fmt_double(r.newton_iters_mean) << "," << r.newton_iters_max << ","
               << (r.failed ? "failed" : "ok") << "," << detail::csv_sanitize(r.note) << "\n";
        }
    });
    detail::write_artifact(base.output_dir, "miura_distances.csv", [&](std::ostream& os) {
        os << "# window=[" << fmt_double(report.window_a) << "," << fmt_double(report.window_b)
           << "]\n";
        os << "# T=" << fmt_double(base.T) << "\n";
        os << "kind,pair_a,pair_b,n_a,n_b,relative_distance\n";
        for (const auto& sd : report.self_distances)
            os << "self," << sd.pair_index << "," << sd.pair_index << "," << sd.n_coarse << ","
               << sd.n_fine << "," << detail::csv_field(sd.distance) << "\n";
        for (const auto& pd : report.pairwise)
            os << "cross," << pd.pair_a << "," << pd.pair_b << "," << pd.n_points << ","
               << pd.n_points << "," << detail::csv_field(pd.distance) << "\n";
    });
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        const MiuraRun& r = report.runs[i];
        if (!r.profile) continue;
        char name[80];
        std::snprintf(name, sizeof name, "miura_profile_p%zu_n%zu.csv", i / levels,
                      r.n_points);
        detail::write_artifact(base.output_dir, name, [&](std::ostream& os) {
            write_state_csv(os, *r.profile,
                            {"c=" + fmt_double(r.params.c), "eps=" + fmt_double(r.params.eps),
                             "n_points=" + std::to_string(r.n_points),
                             "T=" + fmt_double(base.T)});
        });
    }
    detail::write_artifact(base.output_dir, "miura.svg", [&](std::ostream& os) {
        std::vector<PlotSeries> series;
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const MiuraRun& r = run_at(p, levels - 1);
            if (!r.profile) continue;
            PlotSeries s;
            s.label = "c=" + detail::fmt_short(pairs[p].c) +
                      " eps=" + detail::fmt_short(pairs[p].eps);
            const Grid& g = r.profile->grid();
            for (std::size_t j = 0; j < r.profile->size(); ++j) {
                const double x = g.x(static_cast<std::ptrdiff_t>(j));
                if (x < report.window_a || x > report.window_b) continue;
                s.points.emplace_back(x, (*r.profile)[j]);
            }
            series.push_back(std::move(s));
        }
        emit_profile_svg(os, "transformed profiles at T=" + detail::fmt_short(base.T), series);
    });
    detail::write_artifact(base.output_dir, "miura_manifest.txt", [&](std::ostream& os) {
        write_run_config(os, base);
        os << "\n[result]\n";
        os << "command = miura\n";
        std::string ps;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (i) ps += ";";
            ps += fmt_double(pairs[i].c) + ":" + fmt_double(pairs[i].eps);
        }
        os << "pairs = " << ps << "\n";
        std::string ns;
        for (std::size_t i = 0; i < n_list.size(); ++i)
            ns += (i ? "," : "") + std::to_string(n_list[i]);
        os << "n_list = " << ns << "\n";
    });
    return report;
}

}  // namespace kdv
