// Command-line harness: solve, convergence, viscosity-sweep, miura.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kdvlab/kdvlab.hpp"

namespace {

void apply_overrides(kdv::RunConfig& cfg, const std::vector<std::string>& sets) {
    for (const std::string& s : sets) {
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw kdv::ConfigError("--set expects section.key=value, got '" + s + "'");
        cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
}

std::vector<std::size_t> parse_n_list(const std::string& raw) {
    std::vector<std::size_t> out;
    for (const double v : kdv::detail::parse_double_list("n-list", raw)) {
        if (v < 1.0 || v != std::floor(v))
            throw kdv::ConfigError("n-list: entries must be positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

// "c:eps;c:eps" with eps defaulting to 1 when omitted.
std::vector<kdv::TsutsumiParams> parse_pairs(const std::string& raw) {
    std::vector<kdv::TsutsumiParams> out;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        const std::size_t semi = raw.find(';', pos);
        const std::string item =
            semi == std::string::npos ? raw.substr(pos) : raw.substr(pos, semi - pos);
        if (!item.empty()) {
            const std::size_t colon = item.find(':');
            kdv::TsutsumiParams p;
            if (colon == std::string::npos) {
                p.c = kdv::detail::parse_double("pairs", item);
                p.eps = 1.0;
            } else {
                p.c = kdv::detail::parse_double("pairs", item.substr(0, colon));
                p.eps = kdv::detail::parse_double("pairs", item.substr(colon + 1));
            }
            out.push_back(p);
        }
        if (semi == std::string::npos) break;
        pos = semi + 1;
    }
    return out;
}

void print_sweep(const kdv::SweepReport& report) {
    for (const auto& row : report.rows) {
        std::printf("  %s=%-10g", report.swept_key.c_str(), row.parameter);
        if (row.failed) {
            std::printf(" FAILED  %s\n", row.note.c_str());
            continue;
        }
        std::printf(" error=%-12.5g", row.error);
        if (!std::isnan(row.order)) std::printf(" order=%-7.3f", row.order);
        std::printf(" newton(mean/max)=%.2f/%d  %.2fs\n", row.newton_iters_mean,
                    row.newton_iters_max, row.runtime_seconds);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite difference laboratory for dispersive wave equations"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    int jobs = 1;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "config file (sectioned key=value)");
        sub->add_option("--set", overrides, "override a key, e.g. --set model.eta=0.001");
        sub->add_option("--jobs", jobs, "worker threads for sweeps")->check(CLI::Range(1, 256));
    };

    CLI::App* solve = app.add_subcommand("solve", "run one simulation, write all artifacts");
    add_common(solve);

    CLI::App* conv = app.add_subcommand("convergence", "error vs grid size sweep");
    add_common(conv);
    std::string conv_n = "256,512,1024,2048";
    std::string conv_tau = "0.001,0.0005,0.00025";
    conv->add_option("--n-list", conv_n, "grid sizes, comma separated (strictly increasing)");
    conv->add_option("--tau-list", conv_tau, "time steps, comma separated");

    CLI::App* visc = app.add_subcommand("viscosity-sweep", "error vs stabilization strength");
    add_common(visc);
    std::string visc_eta = "0.1,0.03,0.01,0.003,0.001";
    visc->add_option("--eta-list", visc_eta,
                     "eta values, strictly descending; 0 allowed last (experimental)");

    CLI::App* miura = app.add_subcommand("miura", "transformed-profile comparison study");
    add_common(miura);
    std::string miura_pairs = "-1:1;-2:1";
    std::string miura_n = "2000,4000";
    miura->add_option("--pairs", miura_pairs, "c:eps pairs separated by ';' (eps defaults to 1)");
    miura->add_option("--n-list", miura_n, "refinement levels, comma separated");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        kdv::RunConfig cfg;
        if (!config_path.empty()) cfg = kdv::load_run_config(config_path);
        apply_overrides(cfg, overrides);

        if (solve->parsed()) {
            const kdv::SolveArtifacts art = kdv::cmd_solve(cfg);
            for (const auto& f : art.files_written) std::printf("wrote %s\n", f.c_str());
            std::printf("steps: %zu/%zu, final l2 = %.10g\n", art.summary.steps_completed,
                        art.summary.steps_requested, kdv::norm_l2(art.summary.final_state));
            if (art.error_available)
                std::printf("relative l2 error vs exact = %.6g\n", art.relative_error);
            if (art.summary.failed)
                std::fprintf(stderr, "numerical failure: %s\n",
                             art.summary.failure_message.c_str());
            return art.exit_code;
        }

        if (conv->parsed()) {
            const auto reports =
                kdv::cmd_convergence(cfg, parse_n_list(conv_n),
                                     kdv::detail::parse_double_list("tau-list", conv_tau), jobs);
            bool any_ok = false;
            for (const auto& r : reports) {
                std::printf("tau sweep block (%zu rows):\n", r.rows.size());
                print_sweep(r);
                for (const auto& row : r.rows) any_ok = any_ok || !row.failed;
            }
            std::printf("artifacts in %s\n", cfg.output_dir.c_str());
            return any_ok ? 0 : 3;
        }

        if (visc->parsed()) {
            const auto report = kdv::cmd_viscosity_sweep(
                cfg, kdv::detail::parse_double_list("eta-list", visc_eta), jobs);
            print_sweep(report);
            bool any_ok = false;
            for (const auto& row : report.rows) any_ok = any_ok || !row.failed;
            std::printf("artifacts in %s\n", cfg.output_dir.c_str());
            return any_ok ? 0 : 3;
        }

        if (miura->parsed()) {
            const auto report =
                kdv::cmd_miura(cfg, parse_pairs(miura_pairs), parse_n_list(miura_n), jobs);
            bool complete = true;
            for (const auto& r : report.runs) {
                std::printf("  (c=%g, eps=%g) n=%zu %s\n", r.params.c, r.params.eps, r.n_points,
                            r.failed ? ("FAILED " + r.note).c_str() : "ok");
                complete = complete && r.profile.has_value();
            }
            for (const auto& sd : report.self_distances)
                std::printf("  self-distance pair %zu (n=%zu vs %zu): %.6g\n", sd.pair_index,
                            sd.n_coarse, sd.n_fine, sd.distance);
            for (const auto& pd : report.pairwise)
                std::printf("  cross-distance pairs %zu vs %zu (n=%zu): %.6g\n", pd.pair_a,
                            pd.pair_b, pd.n_points, pd.distance);
            std::printf("artifacts in %s\n", cfg.output_dir.c_str());
            return complete ? 0 : 3;
        }
    } catch (const kdv::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
