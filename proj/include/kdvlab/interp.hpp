#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kdvlab/grid.hpp"

namespace kdv {

namespace detail {

struct QuadRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;  // sum to 2
};

/// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on the
/// Legendre recurrence. Exact for polynomials of degree <= 2n-1.
inline QuadRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least 1 point");
    QuadRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

}  // namespace detail

/// Piecewise-constant or continuous piecewise-linear reconstruction of a grid
/// function. The constant kind is right-open: the value on [x_j, x_{j+1}) is
/// u_j. The linear kind blends u_j and u_{j+1} and matches u_j exactly at
/// every node.
class Interpolant {
public:
    enum class Kind { PiecewiseConstant, PiecewiseLinear };

    static Interpolant piecewise_constant(GridFunction u) {
        return Interpolant(Kind::PiecewiseConstant, std::move(u));
    }
    static Interpolant piecewise_linear(GridFunction u) {
        return Interpolant(Kind::PiecewiseLinear, std::move(u));
    }

    Kind kind() const { return kind_; }
    const GridFunction& source() const { return source_; }

    /// Evaluate at x. Periodic sources wrap; zero-extension sources return 0
    /// outside [x_0, x_{n-1}].
    double operator()(double x) const {
        const Grid& g = source_.grid();
        const auto n = static_cast<std::ptrdiff_t>(g.size());
        double s = (x - g.x0()) / g.h();

        if (g.boundary() == BoundaryMode::ZeroExtension) {
            if (s < 0.0 || s > static_cast<double>(n - 1)) return 0.0;
        } else {
            const double period = static_cast<double>(n);
            s = std::fmod(s, period);
            if (s < 0.0) s += period;
            if (s >= period) s = 0.0;
        }

        // Exact-node fast path keeps eval(x_j) == u_j bit-for-bit.
        const double r = std::round(s);
        if (r >= 0.0 && r < static_cast<double>(n) &&
            x == g.x0() + r * g.h()) {
            return source_.at(static_cast<std::ptrdiff_t>(r));
        }

        auto cell = static_cast<std::ptrdiff_t>(std::floor(s));
        cell = std::clamp<std::ptrdiff_t>(cell, 0, n - 1);
        if (kind_ == Kind::PiecewiseConstant)
            return source_.at(cell);
        if (g.boundary() == BoundaryMode::ZeroExtension)
            cell = std::min<std::ptrdiff_t>(cell, n - 2);
        const double frac = s - static_cast<double>(cell);
        const double lo = source_.at(cell);
        const double hi = source_.at(cell + 1);
        return lo + frac * (hi - lo);
    }

private:
    Interpolant(Kind kind, GridFunction u) : kind_(kind), source_(std::move(u)) {}

    Kind kind_;
    GridFunction source_;
};

/// The a.e. derivative of the linear interpolant of u: the piecewise-constant
/// interpolant of the forward differences (constant slope per cell).
inline Interpolant derivative_interpolant(const GridFunction& u) {
    return Interpolant::piecewise_constant(d_plus(u));
}

// ---------------------------------------------------------------------------
// L2 error measurement against continuous references, composite per-cell
// Gauss-Legendre quadrature (default 4 points: exact for the piecewise-linear
// factor against smooth references).
// ---------------------------------------------------------------------------

namespace detail {

/// Integrate g over [a,b] on panels aligned with the grid cells of u,
/// extending with cell-sized panels where the window leaves the grid.
template <class G>
double integrate_on_cells(const Grid& grid, double a, double b, int pts, G&& g) {
    if (!(a < b)) throw std::invalid_argument("integrate_on_cells: empty window");
    const QuadRule rule = gauss_legendre(pts);
    const double h = grid.h();
    const auto m_lo = static_cast<std::ptrdiff_t>(std::floor((a - grid.x0()) / h));
    const auto m_hi = static_cast<std::ptrdiff_t>(std::ceil((b - grid.x0()) / h));
    CompensatedSum acc;
    for (std::ptrdiff_t m = m_lo; m < m_hi; ++m) {
        const double lo = std::max(a, grid.x0() + static_cast<double>(m) * h);
        const double hi = std::min(b, grid.x0() + static_cast<double>(m + 1) * h);
        if (!(hi > lo)) continue;
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q)
            acc.add(half * rule.weights[q] * g(mid + half * rule.nodes[q]));
    }
    return acc.value();
}

}  // namespace detail

/// || P1(u) - f ||_{L2(a,b)}.
template <class F>
double l2_error_window(const GridFunction& u, F&& f, double a, double b,
                       int quad_points_per_cell = 4) {
    if (quad_points_per_cell < 2)
        throw std::invalid_argument("l2_error_window: need at least 2 quadrature points per cell");
    const Interpolant p1 = Interpolant::piecewise_linear(u);
    return std::sqrt(detail::integrate_on_cells(
        u.grid(), a, b, quad_points_per_cell, [&](double x) {
            const double fx = f(x);
            if (!std::isfinite(fx))
                throw std::domain_error("l2_error: reference not finite at x = " +
                                        std::to_string(x));
            const double d = p1(x) - fx;
            return d * d;
        }));
}

/// || P1(u) - f ||_{L2(-R,R)}.
template <class F>
double l2_error(const GridFunction& u, F&& f, double R,
                int quad_points_per_cell = 4) {
    if (!(R > 0.0)) throw std::invalid_argument("l2_error: R must be positive");
    return l2_error_window(u, std::forward<F>(f), -R, R, quad_points_per_cell);
}

/// l2_error_window divided by || f ||_{L2(a,b)} (same quadrature).
template <class F>
double relative_l2_error_window(const GridFunction& u, F&& f, double a, double b,
                                int quad_points_per_cell = 4) {
    const double err = l2_error_window(u, f, a, b, quad_points_per_cell);
    const double ref = std::sqrt(detail::integrate_on_cells(
        u.grid(), a, b, quad_points_per_cell, [&](double x) {
            const double fx = f(x);
            if (!std::isfinite(fx))
                throw std::domain_error("relative_l2_error: reference not finite at x = " +
                                        std::to_string(x));
            return fx * fx;
        }));
    if (ref == 0.0)
        throw std::domain_error("relative_l2_error: reference vanishes on the window");
    return err / ref;
}

// ---------------------------------------------------------------------------
// Distances between reconstructed profiles on possibly different grids.
// Segments between merged node positions keep the integrand polynomial, so
// 2-point Gauss-Legendre per segment is exact.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> merged_breakpoints(const std::vector<const Grid*>& grids,
                                              double a, double b) {
    std::vector<double> pts{a, b};
    for (const Grid* g : grids) {
        const double h = g->h();
        const auto j_lo = static_cast<std::ptrdiff_t>(std::ceil((a - g->x0()) / h));
        const auto j_hi = static_cast<std::ptrdiff_t>(std::floor((b - g->x0()) / h));
        for (std::ptrdiff_t j = j_lo; j <= j_hi; ++j)
            pts.push_back(g->x0() + static_cast<double>(j) * h);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

template <class G>
double integrate_on_segments(const std::vector<double>& breakpoints, G&& g) {
    // 2-point rule, exact through cubics.
    static constexpr double node = 0.5773502691896257;
    CompensatedSum acc;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const double lo = breakpoints[i];
        const double hi = breakpoints[i + 1];
        if (!(hi > lo)) continue;
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        acc.add(half * (g(mid - half * node) + g(mid + half * node)));
    }
    return acc.value();
}

}  // namespace detail

/// || P1(u) ||_{L2(a,b)}, exact per-cell quadrature.
inline double linear_interpolant_l2_norm(const GridFunction& u, double a, double b) {
    const Interpolant p1 = Interpolant::piecewise_linear(u);
    const auto pts = detail::merged_breakpoints({&u.grid()}, a, b);
    return std::sqrt(detail::integrate_on_segments(pts, [&](double x) {
        const double v = p1(x);
        return v * v;
    }));
}

/// || P1(ua) - P1(ub) ||_{L2(a,b)}; the grids may differ.
inline double l2_distance_window(const GridFunction& ua, const GridFunction& ub,
                                 double a, double b) {
    const Interpolant pa = Interpolant::piecewise_linear(ua);
    const Interpolant pb = Interpolant::piecewise_linear(ub);
    const auto pts = detail::merged_breakpoints({&ua.grid(), &ub.grid()}, a, b);
    return std::sqrt(detail::integrate_on_segments(pts, [&](double x) {
        const double d = pa(x) - pb(x);
        return d * d;
    }));
}

/// l2_distance_window normalised by the larger profile norm.
inline double relative_l2_distance_window(const GridFunction& ua, const GridFunction& ub,
                                          double a, double b) {
    const double na = linear_interpolant_l2_norm(ua, a, b);
    const double nb = linear_interpolant_l2_norm(ub, a, b);
    const double scale = std::max(na, nb);
    if (scale == 0.0) return 0.0;
    return l2_distance_window(ua, ub, a, b) / scale;
}

}  // namespace kdv
