#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "kdvlab/grid.hpp"
#include "kdvlab/lab/run_config.hpp"
#include "kdvlab/stepper.hpp"

namespace kdv {

/// One sweep point. parameter is the swept value (grid size or eta); error
/// and order are NaN when unavailable (failed run, first row).
struct SweepRow {
    double parameter = 0.0;
    std::size_t n_points = 0;
    double tau = 0.0;
    double eta = 0.0;
    double error = std::numeric_limits<double>::quiet_NaN();
    double order = std::numeric_limits<double>::quiet_NaN();
    double runtime_seconds = 0.0;
    double newton_iters_mean = 0.0;
    int newton_iters_max = 0;
    bool failed = false;
    std::string note;
};

struct SweepReport {
    std::string swept_key;               // "n_points" or "eta"
    std::vector<std::string> metadata;   // emitted as '#' comments
    std::vector<SweepRow> rows;          // sorted by parameter

    /// order_i = log2(err_{i-1} / err_i) between consecutive successful rows
    /// when the grid size doubles (h halves).
    void compute_orders() {
        for (std::size_t i = 1; i < rows.size(); ++i) {
            SweepRow& cur = rows[i];
            const SweepRow& prev = rows[i - 1];
            cur.order = std::numeric_limits<double>::quiet_NaN();
            if (swept_key != "n_points" || prev.failed || cur.failed) continue;
            if (cur.n_points != 2 * prev.n_points) continue;
            if (!(prev.error > 0.0) || !(cur.error > 0.0)) continue;
            cur.order = std::log2(prev.error / cur.error);
        }
    }
};

namespace detail {

inline std::string csv_field(double v) {
    return std::isnan(v) ? std::string() : fmt_double(v);
}

inline std::string csv_sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

}  // namespace detail

/// CSV layout: '#' metadata comments, then a header row, then one record per
/// sweep row. Byte-deterministic for a given report.
inline void emit_csv(std::ostream& os, const SweepReport& report) {
    for (const auto& m : report.metadata) os << "# " << m << "\n";
    os << report.swept_key
       << ",relative_l2_error,order,runtime_seconds,newton_iters_mean,newton_iters_max,"
          "status,note\n";
    for (const auto& row : report.rows) {
        if (report.swept_key == "n_points")
            os << row.n_points;
        else
            os << detail::fmt_double(row.parameter);
        os << "," << detail::csv_field(row.error) << "," << detail::csv_field(row.order) << ","
           << detail::fmt_double(row.runtime_seconds) << ","
           << detail::fmt_double(row.newton_iters_mean) << "," << row.newton_iters_max << ","
           << (row.failed ? "failed" : "ok") << "," << detail::csv_sanitize(row.note) << "\n";
    }
}

/// Diagnostics time series of a completed (or partial) run.
inline void write_diagnostics_csv(std::ostream& os, const RunSummary& summary, double tau,
                                  const std::vector<std::string>& comments = {}) {
    for (const auto& c : comments) os << "# " << c << "\n";
    os << "t,l2_norm,newton_iters,energy_defect,smoothing_accumulator\n";
    detail::CompensatedSum acc;
    for (std::size_t m = 0; m < summary.diagnostics.size(); ++m) {
        const StepDiagnostics& d = summary.diagnostics[m];
        acc.add(d.smoothing_increment);
        os << detail::fmt_double(static_cast<double>(m + 1) * tau) << ","
           << detail::fmt_double(d.l2_norm) << "," << d.newton_iters << ","
           << detail::fmt_double(d.energy_defect) << "," << detail::fmt_double(acc.value())
           << "\n";
    }
}

// ---------------------------------------------------------------------------
// SVG plotting: fixed canvas, hand-emitted markup, deterministic formatting.
// Presentation only; nothing downstream parses these files.
// ---------------------------------------------------------------------------

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

namespace detail {

inline std::string fmt_coord(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string fmt_tick(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline const char* series_color(std::size_t i) {
    static const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                          "#9467bd", "#ff7f0e", "#8c564b",
                                          "#17becf", "#7f7f7f"};
    return palette[i % (sizeof(palette) / sizeof(palette[0]))];
}

struct AxisRange {
    double lo = 0.0, hi = 1.0;
};

inline AxisRange expand(double lo, double hi) {
    if (!(lo < hi)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

}  // namespace detail

/// Shared plot emitter. loglog maps both axes through log10 and drops
/// non-positive points; tick marks go on decades (loglog) or on ~5 even
/// subdivisions (linear).
inline void emit_plot_svg(std::ostream& os, const std::string& title,
                          const std::string& xlabel, const std::string& ylabel,
                          const std::vector<PlotSeries>& series, bool loglog) {
    const double width = 640.0, height = 480.0;
    const double ml = 70.0, mr = 24.0, mt = 42.0, mb = 52.0;
    const double pw = width - ml - mr, ph = height - mt - mb;

    // Collect transformed points.
    std::vector<std::vector<std::pair<double, double>>> tseries(series.size());
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (std::size_t s = 0; s < series.size(); ++s) {
        for (const auto& [x, y] : series[s].points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (loglog && (x <= 0.0 || y <= 0.0)) continue;
            const double tx = loglog ? std::log10(x) : x;
            const double ty = loglog ? std::log10(y) : y;
            tseries[s].emplace_back(tx, ty);
            xmin = std::min(xmin, tx);
            xmax = std::max(xmax, tx);
            ymin = std::min(ymin, ty);
            ymax = std::max(ymax, ty);
        }
    }
    const bool have_data = xmin <= xmax;
    if (!have_data) {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 1.0;
    }
    const auto xr = detail::expand(xmin, xmax);
    const auto yr = detail::expand(ymin, ymax);
    auto px = [&](double tx) { return ml + (tx - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double ty) { return mt + ph - (ty - yr.lo) / (yr.hi - yr.lo) * ph; };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
          "viewBox=\"0 0 640 480\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"#ffffff\"/>\n";
    os << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"15\">"
       << title << "</text>\n";

    // Ticks and grid.
    auto tick_values = [&](const detail::AxisRange& r) {
        std::vector<double> ticks;
        if (loglog) {
            for (double d = std::ceil(r.lo); d <= std::floor(r.hi) + 1e-12; d += 1.0)
                ticks.push_back(d);
        } else {
            const double span = r.hi - r.lo;
            double step = std::pow(10.0, std::floor(std::log10(span / 4.0)));
            const double scaled = span / 4.0 / step;
            if (scaled > 5.0) step *= 10.0;
            else if (scaled > 2.0) step *= 5.0;
            else if (scaled > 1.0) step *= 2.0;
            for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-12 * span; v += step)
                ticks.push_back(v);
        }
        return ticks;
    };
    for (const double t : tick_values(xr)) {
        const double x = px(t);
        os << "<line x1=\"" << detail::fmt_coord(x) << "\" y1=\"" << detail::fmt_coord(mt)
           << "\" x2=\"" << detail::fmt_coord(x) << "\" y2=\"" << detail::fmt_coord(mt + ph)
           << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        os << "<text x=\"" << detail::fmt_coord(x) << "\" y=\"" << detail::fmt_coord(mt + ph + 18)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
           << detail::fmt_tick(loglog ? std::pow(10.0, t) : t) << "</text>\n";
    }
    for (const double t : tick_values(yr)) {
        const double y = py(t);
        os << "<line x1=\"" << detail::fmt_coord(ml) << "\" y1=\"" << detail::fmt_coord(y)
           << "\" x2=\"" << detail::fmt_coord(ml + pw) << "\" y2=\"" << detail::fmt_coord(y)
           << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        os << "<text x=\"" << detail::fmt_coord(ml - 6) << "\" y=\"" << detail::fmt_coord(y + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
           << detail::fmt_tick(loglog ? std::pow(10.0, t) : t) << "</text>\n";
    }
    os << "<rect x=\"" << detail::fmt_coord(ml) << "\" y=\"" << detail::fmt_coord(mt)
       << "\" width=\"" << detail::fmt_coord(pw) << "\" height=\"" << detail::fmt_coord(ph)
       << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << detail::fmt_coord(ml + pw / 2) << "\" y=\""
       << detail::fmt_coord(height - 12)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xlabel
       << "</text>\n";
    os << "<text x=\"16\" y=\"" << detail::fmt_coord(mt + ph / 2)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
          "transform=\"rotate(-90 16 "
       << detail::fmt_coord(mt + ph / 2) << ")\">" << ylabel << "</text>\n";

    if (!have_data)
        os << "<text x=\"320\" y=\"240\" text-anchor=\"middle\" font-family=\"sans-serif\" "
              "font-size=\"13\" fill=\"#777777\">no data</text>\n";

    for (std::size_t s = 0; s < tseries.size(); ++s) {
        if (tseries[s].empty()) continue;
        const char* color = detail::series_color(s);
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < tseries[s].size(); ++i) {
            if (i) os << " ";
            os << detail::fmt_coord(px(tseries[s][i].first)) << ","
               << detail::fmt_coord(py(tseries[s][i].second));
        }
        os << "\"/>\n";
        if (loglog) {
            for (const auto& [tx, ty] : tseries[s])
                os << "<circle cx=\"" << detail::fmt_coord(px(tx)) << "\" cy=\""
                   << detail::fmt_coord(py(ty)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        }
    }

    // Legend, top-right inside the plot area.
    for (std::size_t s = 0; s < series.size(); ++s) {
        const double y = mt + 16 + 16 * static_cast<double>(s);
        os << "<line x1=\"" << detail::fmt_coord(ml + pw - 150) << "\" y1=\""
           << detail::fmt_coord(y - 4) << "\" x2=\"" << detail::fmt_coord(ml + pw - 126)
           << "\" y2=\"" << detail::fmt_coord(y - 4) << "\" stroke=\""
           << detail::series_color(s) << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << detail::fmt_coord(ml + pw - 120) << "\" y=\""
           << detail::fmt_coord(y) << "\" font-family=\"sans-serif\" font-size=\"11\">"
           << series[s].label << "</text>\n";
    }
    os << "</svg>\n";
}

inline void emit_loglog_svg(std::ostream& os, const std::string& title,
                            const std::string& xlabel, const std::string& ylabel,
                            const std::vector<PlotSeries>& series) {
    emit_plot_svg(os, title, xlabel, ylabel, series, true);
}

inline void emit_profile_svg(std::ostream& os, const std::string& title,
                             const std::vector<PlotSeries>& series) {
    emit_plot_svg(os, title, "x", "u", series, false);
}

}  // namespace kdv
