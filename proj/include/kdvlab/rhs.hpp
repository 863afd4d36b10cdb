#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>

#include "kdvlab/banded.hpp"
#include "kdvlab/grid.hpp"

namespace kdv {

/// Equation parameters: flux exponent k (1 quadratic, 2 cubic), flux
/// coefficient beta, stabilization strength eta. The stabilization term is
/// eta * h * (five-point fourth difference), so it vanishes as h -> 0.
struct ModelParams {
    int k = 1;
    double beta = 1.0;
    double eta = 0.0;

    /// Full domain check: beta must be nonzero. Core operators below accept
    /// beta = 0 as a linear test mode; configuration loading must not.
    void validate() const {
        basic_check();
        if (beta == 0.0)
            throw std::invalid_argument("ModelParams: beta must be nonzero");
    }

    void basic_check() const {
        if (k != 1 && k != 2)
            throw std::invalid_argument("ModelParams: k must be 1 or 2");
        if (!std::isfinite(beta))
            throw std::invalid_argument("ModelParams: beta must be finite");
        if (!(eta >= 0.0) || !std::isfinite(eta))
            throw std::invalid_argument("ModelParams: eta must be >= 0");
    }
};

/// A residual vector together with its sup-norm.
struct Residual {
    GridFunction values;
    double norm_inf;

    explicit Residual(GridFunction v) : values(std::move(v)), norm_inf(norm_sup(values)) {}
};

/// Conservative flux discretization
///   beta*(k+1)/(k+2) * ( u^k * D0(u) + D0(u^{k+1}) ).
/// The averaged form makes the pairing with u vanish on periodic grids, which
/// is what the energy estimates lean on.
inline GridFunction nonlinear_term(const GridFunction& u, int k, double beta) {
    if (k != 1 && k != 2)
        throw std::invalid_argument("nonlinear_term: k must be 1 or 2");
    const double coef = beta * (k + 1) / static_cast<double>(k + 2);
    const GridFunction uk = pointwise_pow(u, k);
    const GridFunction du = d0(u);
    const GridFunction dflux = d0(pointwise_pow(u, k + 1));
    GridFunction out(u.grid());
    for (std::size_t j = 0; j < u.size(); ++j)
        out[j] = coef * (uk[j] * du[j] + dflux[j]);
    return out;
}

/// Right-hand side of the semi-discrete system du/dt = semidiscrete_rhs(u):
///   -( D3(u) + nonlinear_term(u) + eta*h*Bilaplacian(u) ).
inline GridFunction semidiscrete_rhs(const GridFunction& u, const ModelParams& p) {
    p.basic_check();
    const GridFunction disp = d3(u);
    const GridFunction nl = nonlinear_term(u, p.k, p.beta);
    const GridFunction visc = bilaplacian(u);
    const double etah = p.eta * u.grid().h();
    GridFunction out(u.grid());
    for (std::size_t j = 0; j < u.size(); ++j)
        out[j] = -(disp[j] + nl[j] + etah * visc[j]);
    return out;
}

/// Residual of one implicit Euler step:
///   F = (u_next - u_prev)/tau - semidiscrete_rhs(u_next).
/// The step is the root F = 0.
inline Residual implicit_residual(const GridFunction& u_next, const GridFunction& u_prev,
                                  double tau, const ModelParams& p) {
    detail::require_same_grid(u_next, u_prev, "implicit_residual");
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw std::invalid_argument("implicit_residual: tau must be positive");
    const GridFunction rhs = semidiscrete_rhs(u_next, p);
    GridFunction f(u_next.grid());
    const double inv_tau = 1.0 / tau;
    for (std::size_t j = 0; j < f.size(); ++j)
        f[j] = (u_next[j] - u_prev[j]) * inv_tau - rhs[j];
    return Residual(std::move(f));
}

/// Pentadiagonal Jacobian dF/du_next of implicit_residual at u_next. Periodic
/// grids produce a cyclic matrix; zero-extension grids truncate the rows at
/// the boundary (the pinned exterior values carry no derivative).
inline BandedMatrix jacobian(const GridFunction& u_next, double tau, const ModelParams& p) {
    p.basic_check();
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw std::invalid_argument("jacobian: tau must be positive");
    const Grid& g = u_next.grid();
    const double h = g.h();
    const double inv_2h3 = 1.0 / (2.0 * h * h * h);
    const double inv_h3 = 1.0 / (h * h * h);
    const double visc = p.eta / (h * h * h);  // eta*h / h^4
    const double coef = p.beta * (p.k + 1) / static_cast<double>(p.k + 2);
    const double inv_2h = 1.0 / (2.0 * h);
    const auto n = static_cast<std::ptrdiff_t>(g.size());

    auto powk = [&](double v) { return p.k == 1 ? v : v * v; };
    auto dpowk = [&](double v) { return p.k == 1 ? 1.0 : 2.0 * v; };

    BandedMatrix jac(g.size(), g.periodic());
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        const double uj = u_next[static_cast<std::size_t>(j)];
        const double up1 = u_next.at(j + 1);
        const double um1 = u_next.at(j - 1);
        const auto row = static_cast<std::size_t>(j);

        auto set = [&](int offset, double value) {
            if (!g.periodic()) {
                const std::ptrdiff_t col = j + offset;
                if (col < 0 || col >= n) return;
            }
            jac.band(row, offset) = value;
        };

        set(0, 1.0 / tau + 6.0 * visc + coef * dpowk(uj) * (up1 - um1) * inv_2h);
        set(2, inv_2h3 + visc);
        set(-2, -inv_2h3 + visc);
        set(1, -inv_h3 - 4.0 * visc + coef * inv_2h * (powk(uj) + (p.k + 1) * powk(up1)));
        set(-1, inv_h3 - 4.0 * visc - coef * inv_2h * (powk(uj) + (p.k + 1) * powk(um1)));
    }
    return jac;
}

}  // namespace kdv
