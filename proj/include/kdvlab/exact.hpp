#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "kdvlab/grid.hpp"

namespace kdv {

/// Traveling-wave parameters: flux exponent k and speed parameter c (the wave
/// moves with speed c^2).
struct SolitonParams {
    int k = 1;
    double c = 1.0;

    void validate() const {
        if (k != 1 && k != 2)
            throw std::invalid_argument("SolitonParams: k must be 1 or 2");
        if (!(c > 0.0) || !std::isfinite(c))
            throw std::invalid_argument("SolitonParams: c must be positive");
    }
};

/// Closed-form soliton (flux coefficient fixed to 1):
///   u(x,t) = [ (k+2)/2 * c^2 * sech^2( (k/2) * c * (x - c^2 t) ) ]^{1/k}.
inline double soliton(double x, double t, const SolitonParams& p) {
    p.validate();
    const double phase = 0.5 * p.k * p.c * (x - p.c * p.c * t);
    const double sech = 1.0 / std::cosh(phase);
    const double bump = 0.5 * (p.k + 2) * p.c * p.c * sech * sech;
    return p.k == 1 ? bump : std::sqrt(bump);
}

/// Nodal sampling of the soliton at time t.
inline GridFunction soliton_profile(const Grid& grid, const SolitonParams& p, double t = 0.0) {
    return GridFunction::sample(grid, [&](double x) { return soliton(x, t, p); });
}

/// Evaluates du/dt + d^3u/dx^3 + d(u^{k+1})/dx at (x, t) on the closed form by
/// fourth-order central differences with spacing delta. A faithful
/// transcription of the formula drives this to the difference truncation
/// level; a wrong speed or amplitude leaves an O(1) residual.
inline double soliton_residual(const SolitonParams& p, double x, double t,
                               double delta = 1e-3) {
    p.validate();
    if (!(delta > 0.0))
        throw std::invalid_argument("soliton_residual: delta must be positive");

    auto u = [&](double xx, double tt) { return soliton(xx, tt, p); };
    auto flux = [&](double xx) {
        const double v = u(xx, t);
        return p.k == 1 ? v * v : v * v * v;
    };

    // First derivative, error O(delta^4).
    auto d1 = [&](auto&& f, double s) {
        return (f(s - 2.0 * delta) - 8.0 * f(s - delta) + 8.0 * f(s + delta) -
                f(s + 2.0 * delta)) /
               (12.0 * delta);
    };
    const double ut = d1([&](double tt) { return u(x, tt); }, t);
    const double flux_x = d1(flux, x);

    // Third derivative, 7-point, error O(delta^4).
    auto ux = [&](double xx) { return u(xx, t); };
    const double uxxx =
        (ux(x - 3.0 * delta) - 8.0 * ux(x - 2.0 * delta) + 13.0 * ux(x - delta) -
         13.0 * ux(x + delta) + 8.0 * ux(x + 2.0 * delta) - ux(x + 3.0 * delta)) /
        (8.0 * delta * delta * delta);

    return ut + uxxx + flux_x;
}

/// Piecewise-rational initial-data family: the pair (c, eps), with eps = 1
/// the one-parameter subfamily. The transform d/dx + (.)^2 sends these to a
/// multiple of a point mass at the origin.
struct TsutsumiParams {
    double c = -1.0;
    double eps = 1.0;

    void validate() const {
        if (!std::isfinite(c) || !std::isfinite(eps))
            throw std::invalid_argument("TsutsumiParams: parameters must be finite");
    }
};

/// Mass of the point singularity produced by the transform: (c + eps - 1)/c.
inline double delta_mass(const TsutsumiParams& p) {
    p.validate();
    if (p.c == 0.0)
        throw std::invalid_argument("delta_mass: c must be nonzero");
    return (p.c + p.eps - 1.0) / p.c;
}

/// Samples
///   u(x) = (c+eps)/((c+eps)x + c)  for x > 0,
///   u(x) = 1/(x + c)               for x < 0,
/// and the mean of the one-sided limits at a node sitting exactly on x = 0.
/// A vanishing denominator at a sampled node is a parameter-domain error.
inline GridFunction tsutsumi_data(const Grid& grid, const TsutsumiParams& p) {
    p.validate();
    GridFunction u(grid);
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double x = grid.x(static_cast<std::ptrdiff_t>(j));
        double value;
        if (x > 0.0) {
            const double den = (p.c + p.eps) * x + p.c;
            if (den == 0.0)
                throw std::domain_error("tsutsumi_data: denominator vanishes at x = " +
                                        std::to_string(x));
            value = (p.c + p.eps) / den;
        } else if (x < 0.0) {
            const double den = x + p.c;
            if (den == 0.0)
                throw std::domain_error("tsutsumi_data: denominator vanishes at x = " +
                                        std::to_string(x));
            value = 1.0 / den;
        } else {
            if (p.c == 0.0)
                throw std::domain_error("tsutsumi_data: both one-sided limits blow up at 0");
            value = 0.5 * ((p.c + p.eps) / p.c + 1.0 / p.c);
        }
        if (!std::isfinite(value))
            throw std::domain_error("tsutsumi_data: non-finite sample at x = " +
                                    std::to_string(x));
        u[j] = value;
    }
    return u;
}

/// Discrete transform u -> D0(u) + u^2, the bridge between the two flux
/// exponents. The centered derivative matches the scheme's internal one and
/// avoids directional bias.
inline GridFunction miura_transform(const GridFunction& u) {
    GridFunction out = d0(u);
    for (std::size_t j = 0; j < u.size(); ++j)
        out[j] += u[j] * u[j];
    return out;
}

}  // namespace kdv
