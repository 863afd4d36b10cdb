#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kdv {

/// How stencil reads outside the index range 0..n-1 resolve.
enum class BoundaryMode {
    Periodic,       ///< indices wrap mod n
    ZeroExtension,  ///< out-of-range reads return 0
};

inline const char* to_string(BoundaryMode mode) {
    return mode == BoundaryMode::Periodic ? "periodic" : "zero-extension";
}

/// Uniform 1-D lattice: node j sits at x0 + j*h for j in 0..n-1.
///
/// Periodic grids identify node n with node 0, so a domain [a,b) of n points
/// has h = (b-a)/n; zero-extension grids place nodes on the closed interval
/// [a,b] with h = (b-a)/(n-1).
class Grid {
public:
    Grid(double spacing, double origin, std::size_t n, BoundaryMode mode)
        : h_(spacing), x0_(origin), n_(n), boundary_(mode) {
        if (!(h_ > 0.0) || !std::isfinite(h_))
            throw std::invalid_argument("Grid: spacing must be positive and finite");
        if (n_ < 2)
            throw std::invalid_argument("Grid: need at least 2 points");
        if (!std::isfinite(x0_))
            throw std::invalid_argument("Grid: origin must be finite");
    }

    static Grid uniform(double x_min, double x_max, std::size_t n, BoundaryMode mode) {
        if (!(x_min < x_max))
            throw std::invalid_argument("Grid: x_min must be less than x_max");
        const double len = x_max - x_min;
        const double h = mode == BoundaryMode::Periodic
                             ? len / static_cast<double>(n)
                             : len / static_cast<double>(n - 1);
        return Grid(h, x_min, n, mode);
    }

    double h() const { return h_; }
    double x0() const { return x0_; }
    std::size_t size() const { return n_; }
    BoundaryMode boundary() const { return boundary_; }
    bool periodic() const { return boundary_ == BoundaryMode::Periodic; }

    double x(std::size_t j) const { return x0_ + static_cast<double>(j) * h_; }

    bool operator==(const Grid& o) const {
        return h_ == o.h_ && x0_ == o.x0_ && n_ == o.n_ && boundary_ == o.boundary_;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }

private:
    double h_;
    double x0_;
    std::size_t n_;
    BoundaryMode boundary_;
};

/// Real-valued sequence attached to a Grid; the discrete state.
///
/// Value-semantic and safe to move between threads. Out-of-range reads go
/// through at(), which resolves per the grid's boundary mode.
class GridFunction {
public:
    explicit GridFunction(Grid grid)
        : grid_(grid), values_(grid.size(), 0.0) {}

    GridFunction(Grid grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw std::invalid_argument("GridFunction: value count does not match grid size");
    }

    /// Nodal sampling u_j = f(x_j).
    template <class F>
    static GridFunction sample(const Grid& grid, F&& f) {
        std::vector<double> v(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j)
            v[j] = f(grid.x(j));
        return GridFunction(grid, std::move(v));
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    double operator[](std::size_t j) const { return values_[j]; }
    double& operator[](std::size_t j) { return values_[j]; }

    /// Boundary-resolved read: any integer index is valid.
    double at(std::ptrdiff_t j) const {
        const auto n = static_cast<std::ptrdiff_t>(values_.size());
        if (j >= 0 && j < n) return values_[static_cast<std::size_t>(j)];
        if (grid_.boundary() == BoundaryMode::ZeroExtension) return 0.0;
        j %= n;
        if (j < 0) j += n;
        return values_[static_cast<std::size_t>(j)];
    }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

namespace detail {

/// Neumaier compensated accumulator; keeps long reductions accurate enough
/// for 1e-12 identity tests at n up to 1e5.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline void require_same_grid(const GridFunction& u, const GridFunction& v,
                              const char* where) {
    if (u.grid() != v.grid())
        throw std::invalid_argument(std::string(where) + ": operands live on different grids");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Translation and difference operators. Each returns a fresh grid function on
// the same grid; boundary reads resolve per the grid's mode.
// ---------------------------------------------------------------------------

/// Translation: result_j = u_{j+offset}. Offsets beyond the five-point
/// stencil contract (|offset| > 2) are rejected.
inline GridFunction shift(const GridFunction& u, int offset) {
    if (offset < -2 || offset > 2)
        throw std::invalid_argument("shift: |offset| must be <= 2");
    GridFunction r(u.grid());
    const auto n = static_cast<std::ptrdiff_t>(u.size());
    for (std::ptrdiff_t j = 0; j < n; ++j)
        r[static_cast<std::size_t>(j)] = u.at(j + offset);
    return r;
}

/// Forward difference (u_{j+1} - u_j)/h.
inline GridFunction d_plus(const GridFunction& u) {
    GridFunction r(u.grid());
    const double inv_h = 1.0 / u.grid().h();
    const auto n = static_cast<std::ptrdiff_t>(u.size());
    for (std::ptrdiff_t j = 0; j < n; ++j)
        r[static_cast<std::size_t>(j)] = (u.at(j + 1) - u.at(j)) * inv_h;
    return r;
}

/// Backward difference (u_j - u_{j-1})/h.
inline GridFunction d_minus(const GridFunction& u) {
    GridFunction r(u.grid());
    const double inv_h = 1.0 / u.grid().h();
    const auto n = static_cast<std::ptrdiff_t>(u.size());
    for (std::ptrdiff_t j = 0; j < n; ++j)
        r[static_cast<std::size_t>(j)] = (u.at(j) - u.at(j - 1)) * inv_h;
    return r;
}

/// Centered difference (u_{j+1} - u_{j-1})/(2h), formed as the exact
/// average of the one-sided quotients so d0 == (d_plus + d_minus)/2
/// holds bit for bit, not just to rounding.
inline GridFunction d0(const GridFunction& u) {
    GridFunction r(u.grid());
    const double inv_h = 1.0 / u.grid().h();
    const auto n = static_cast<std::ptrdiff_t>(u.size());
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        const double fwd = (u.at(j + 1) - u.at(j)) * inv_h;
        const double bwd = (u.at(j) - u.at(j - 1)) * inv_h;
        r[static_cast<std::size_t>(j)] = (fwd + bwd) * 0.5;
    }
    return r;
}

/// Second difference (u_{j+1} - 2u_j + u_{j-1})/h^2.
inline GridFunction laplacian(const GridFunction& u) {
    GridFunction r(u.grid());
    const double inv_h2 = 1.0 / (u.grid().h() * u.grid().h());
    const auto n = static_cast<std::ptrdiff_t>(u.size());
    for (std::ptrdiff_t j = 0; j < n; ++j)
        r[static_cast<std::size_t>(j)] =
            (u.at(j + 1) - 2.0 * u.at(j) + u.at(j - 1)) * inv_h2;
    return r;
}

/// Third difference (u_{j+2} - 2u_{j+1} + 2u_{j-1} - u_{j-2})/(2h^3).
inline GridFunction d3(const GridFunction& u) {
    if (u.size() < 5)
        throw std::invalid_argument("d3: five-point stencil needs at least 5 points");
    GridFunction r(u.grid());
    const double h = u.grid().h();
    const double inv_2h3 = 1.0 / (2.0 * h * h * h);
    const auto n = static_cast<std::ptrdiff_t>(u.size());
    for (std::ptrdiff_t j = 0; j < n; ++j)
        r[static_cast<std::size_t>(j)] =
            (u.at(j + 2) - 2.0 * u.at(j + 1) + 2.0 * u.at(j - 1) - u.at(j - 2)) * inv_2h3;
    return r;
}

/// Fourth difference (u_{j+2} - 4u_{j+1} + 6u_j - 4u_{j-1} + u_{j-2})/h^4.
inline GridFunction bilaplacian(const GridFunction& u) {
    if (u.size() < 5)
        throw std::invalid_argument("bilaplacian: five-point stencil needs at least 5 points");
    GridFunction r(u.grid());
    const double h = u.grid().h();
    const double inv_h4 = 1.0 / (h * h * h * h);
    const auto n = static_cast<std::ptrdiff_t>(u.size());
    for (std::ptrdiff_t j = 0; j < n; ++j)
        r[static_cast<std::size_t>(j)] =
            (u.at(j + 2) - 4.0 * u.at(j + 1) + 6.0 * u.at(j) - 4.0 * u.at(j - 1) +
             u.at(j - 2)) * inv_h4;
    return r;
}

/// Pointwise integer power, exponent in {1,2,3}.
inline GridFunction pointwise_pow(const GridFunction& u, int exponent) {
    if (exponent < 1 || exponent > 3)
        throw std::invalid_argument("pointwise_pow: exponent must be 1, 2, or 3");
    GridFunction r(u.grid());
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double v = u[j];
        r[j] = exponent == 1 ? v : (exponent == 2 ? v * v : v * v * v);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Inner products and norms (h-weighted), compensated accumulation throughout.
// ---------------------------------------------------------------------------

/// (u,v)_h = sum_j h u_j v_j. Operands must share a grid.
inline double inner_product(const GridFunction& u, const GridFunction& v) {
    detail::require_same_grid(u, v, "inner_product");
    detail::CompensatedSum acc;
    for (std::size_t j = 0; j < u.size(); ++j)
        acc.add(u[j] * v[j]);
    return u.grid().h() * acc.value();
}

inline double norm_sup(const GridFunction& u) {
    double m = 0.0;
    for (double v : u.values())
        m = std::max(m, std::abs(v));
    return m;
}

/// lp_h norm: (sum_j h |u_j|^p)^(1/p); sup norm for p = infinity.
inline double norm_lp(const GridFunction& u, double p) {
    if (!(p >= 1.0))
        throw std::invalid_argument("norm_lp: p must lie in [1, infinity]");
    if (std::isinf(p)) return norm_sup(u);
    detail::CompensatedSum acc;
    if (p == 1.0) {
        for (double v : u.values()) acc.add(std::abs(v));
        return u.grid().h() * acc.value();
    }
    if (p == 2.0) {
        for (double v : u.values()) acc.add(v * v);
        return std::sqrt(u.grid().h() * acc.value());
    }
    for (double v : u.values()) acc.add(std::pow(std::abs(v), p));
    return std::pow(u.grid().h() * acc.value(), 1.0 / p);
}

inline double norm_l2(const GridFunction& u) { return norm_lp(u, 2.0); }

/// Truncated norm over |x_j| <= R.
inline double norm_lp_truncated(const GridFunction& u, double p, double R) {
    if (!(p >= 1.0))
        throw std::invalid_argument("norm_lp_truncated: p must lie in [1, infinity]");
    if (!(R > 0.0))
        throw std::invalid_argument("norm_lp_truncated: R must be positive");
    const bool sup = std::isinf(p);
    detail::CompensatedSum acc;
    double m = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        if (std::abs(u.grid().x(j)) > R) continue;
        const double a = std::abs(u[j]);
        if (sup)
            m = std::max(m, a);
        else
            acc.add(p == 2.0 ? a * a : (p == 1.0 ? a : std::pow(a, p)));
    }
    if (sup) return m;
    return std::pow(u.grid().h() * acc.value(), 1.0 / p);
}

}  // namespace kdv
