#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kdv {

/// Factorization or solve hit a zero pivot or a non-finite entry.
struct SingularMatrixError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Pentadiagonal matrix: five bands at column offsets -2..+2 from the
/// diagonal. In cyclic mode the offsets wrap modulo n, which adds the six
/// corner entries (0,n-2), (0,n-1), (1,n-1), (n-2,0), (n-1,0), (n-1,1);
/// otherwise out-of-range offsets are simply absent.
class BandedMatrix {
public:
    BandedMatrix(std::size_t n, bool cyclic)
        : n_(n), cyclic_(cyclic), data_(5 * n, 0.0) {
        if (n < 5)
            throw std::invalid_argument("BandedMatrix: need at least 5 rows");
    }

    std::size_t size() const { return n_; }
    bool cyclic() const { return cyclic_; }

    double& band(std::size_t row, int offset) {
        check(row, offset);
        return data_[5 * row + static_cast<std::size_t>(offset + 2)];
    }
    double band(std::size_t row, int offset) const {
        check(row, offset);
        return data_[5 * row + static_cast<std::size_t>(offset + 2)];
    }

    std::vector<double> matvec(const std::vector<double>& x) const {
        if (x.size() != n_)
            throw std::invalid_argument("BandedMatrix::matvec: length mismatch");
        std::vector<double> y(n_, 0.0);
        const auto sn = static_cast<std::ptrdiff_t>(n_);
        for (std::ptrdiff_t i = 0; i < sn; ++i) {
            double acc = 0.0;
            for (int d = -2; d <= 2; ++d) {
                std::ptrdiff_t col = i + d;
                if (cyclic_) {
                    col = (col % sn + sn) % sn;
                } else if (col < 0 || col >= sn) {
                    continue;
                }
                acc += data_[5 * static_cast<std::size_t>(i) +
                             static_cast<std::size_t>(d + 2)] *
                       x[static_cast<std::size_t>(col)];
            }
            y[static_cast<std::size_t>(i)] = acc;
        }
        return y;
    }

private:
    void check(std::size_t row, int offset) const {
        if (row >= n_)
            throw std::invalid_argument("BandedMatrix: row out of range");
        if (offset < -2 || offset > 2)
            throw std::invalid_argument("BandedMatrix: band offset out of range");
    }

    std::size_t n_;
    bool cyclic_;
    std::vector<double> data_;  // row-major, 5 entries per row
};

/// LU factorization of a BandedMatrix with partial pivoting. Row swaps widen
/// the upper bandwidth from 2 to at most 4, so the working rows hold seven
/// entries (column offsets -2..+4). Cyclic matrices are handled by factoring
/// the corner-free matrix and applying a rank-4 correction during solves.
class BandedLU {
public:
    /// Solve A x = b for the factored A.
    std::vector<double> solve(std::vector<double> b) const {
        if (b.size() != n_)
            throw std::invalid_argument("BandedLU::solve: length mismatch");
        if (!cyclic_) return solve_banded(std::move(b));

        std::vector<double> y = solve_banded(std::move(b));
        // x = y - Z * C^{-1} * (y restricted to the corner rows)
        std::array<double, 4> t{};
        for (int a = 0; a < 4; ++a) t[static_cast<std::size_t>(a)] = y[corner_row(a)];
        const std::array<double, 4> s = solve_capacity(t);
        for (std::size_t i = 0; i < n_; ++i) {
            double corr = 0.0;
            for (int a = 0; a < 4; ++a)
                corr += correction_[static_cast<std::size_t>(a)][i] *
                        s[static_cast<std::size_t>(a)];
            y[i] -= corr;
        }
        return y;
    }

    /// max |entry during elimination| / max |entry of A|; a stability probe.
    double pivot_growth() const { return growth_; }

    friend BandedLU lu_factor(const BandedMatrix& a);

private:
    explicit BandedLU(std::size_t n) : n_(n), work_(7 * n, 0.0), pivot_(n, 0) {}

    std::size_t corner_row(int a) const {
        switch (a) {
            case 0: return 0;
            case 1: return 1;
            case 2: return n_ - 2;
            default: return n_ - 1;
        }
    }

    double& w(std::size_t row, int c) { return work_[7 * row + static_cast<std::size_t>(c)]; }
    double w(std::size_t row, int c) const { return work_[7 * row + static_cast<std::size_t>(c)]; }

    void factor_banded() {
        const auto sn = static_cast<std::ptrdiff_t>(n_);
        double max_entry = 0.0;
        for (const double v : work_) max_entry = std::max(max_entry, std::abs(v));
        double max_seen = max_entry;

        for (std::ptrdiff_t k = 0; k < sn; ++k) {
            const std::ptrdiff_t last = std::min<std::ptrdiff_t>(k + 2, sn - 1);
            std::ptrdiff_t piv = k;
            double best = std::abs(w(static_cast<std::size_t>(k), 2));
            for (std::ptrdiff_t i = k + 1; i <= last; ++i) {
                const double cand =
                    std::abs(w(static_cast<std::size_t>(i), static_cast<int>(k - i + 2)));
                if (cand > best) {
                    best = cand;
                    piv = i;
                }
            }
            if (best == 0.0 || !std::isfinite(best))
                throw SingularMatrixError("banded LU: zero or non-finite pivot at column " +
                                          std::to_string(k));
            pivot_[static_cast<std::size_t>(k)] = piv;
            if (piv != k) {
                for (std::ptrdiff_t col = k; col <= std::min<std::ptrdiff_t>(k + 4, sn - 1); ++col)
                    std::swap(w(static_cast<std::size_t>(k), static_cast<int>(col - k + 2)),
                              w(static_cast<std::size_t>(piv), static_cast<int>(col - piv + 2)));
            }
            const double pivot_value = w(static_cast<std::size_t>(k), 2);
            for (std::ptrdiff_t i = k + 1; i <= last; ++i) {
                const int ci = static_cast<int>(k - i + 2);
                const double m = w(static_cast<std::size_t>(i), ci) / pivot_value;
                w(static_cast<std::size_t>(i), ci) = m;
                for (std::ptrdiff_t col = k + 1; col <= std::min<std::ptrdiff_t>(k + 4, sn - 1);
                     ++col) {
                    double& target =
                        w(static_cast<std::size_t>(i), static_cast<int>(col - i + 2));
                    target -= m * w(static_cast<std::size_t>(k), static_cast<int>(col - k + 2));
                    max_seen = std::max(max_seen, std::abs(target));
                }
            }
        }
        growth_ = max_entry > 0.0 ? max_seen / max_entry : 1.0;
    }

    std::vector<double> solve_banded(std::vector<double> b) const {
        const auto sn = static_cast<std::ptrdiff_t>(n_);
        for (std::ptrdiff_t k = 0; k < sn; ++k) {
            const std::ptrdiff_t piv = pivot_[static_cast<std::size_t>(k)];
            if (piv != k) std::swap(b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(piv)]);
            const std::ptrdiff_t last = std::min<std::ptrdiff_t>(k + 2, sn - 1);
            for (std::ptrdiff_t i = k + 1; i <= last; ++i)
                b[static_cast<std::size_t>(i)] -=
                    w(static_cast<std::size_t>(i), static_cast<int>(k - i + 2)) *
                    b[static_cast<std::size_t>(k)];
        }
        for (std::ptrdiff_t i = sn - 1; i >= 0; --i) {
            double acc = b[static_cast<std::size_t>(i)];
            for (std::ptrdiff_t col = i + 1; col <= std::min<std::ptrdiff_t>(i + 4, sn - 1); ++col)
                acc -= w(static_cast<std::size_t>(i), static_cast<int>(col - i + 2)) *
                       b[static_cast<std::size_t>(col)];
            const double diag = w(static_cast<std::size_t>(i), 2);
            b[static_cast<std::size_t>(i)] = acc / diag;
            if (!std::isfinite(b[static_cast<std::size_t>(i)]))
                throw SingularMatrixError("banded LU: non-finite solution component");
        }
        return b;
    }

    std::array<double, 4> solve_capacity(std::array<double, 4> t) const {
        std::array<std::array<double, 5>, 4> m;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j)
                m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    capacity_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            m[static_cast<std::size_t>(i)][4] = t[static_cast<std::size_t>(i)];
        }
        for (int k = 0; k < 4; ++k) {
            int piv = k;
            for (int i = k + 1; i < 4; ++i)
                if (std::abs(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]) >
                    std::abs(m[static_cast<std::size_t>(piv)][static_cast<std::size_t>(k)]))
                    piv = i;
            if (m[static_cast<std::size_t>(piv)][static_cast<std::size_t>(k)] == 0.0)
                throw SingularMatrixError("banded LU: singular cyclic corner correction");
            std::swap(m[static_cast<std::size_t>(k)], m[static_cast<std::size_t>(piv)]);
            for (int i = k + 1; i < 4; ++i) {
                const double f = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] /
                                 m[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)];
                for (int j = k; j < 5; ++j)
                    m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -=
                        f * m[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
            }
        }
        std::array<double, 4> s{};
        for (int i = 3; i >= 0; --i) {
            double acc = m[static_cast<std::size_t>(i)][4];
            for (int j = i + 1; j < 4; ++j)
                acc -= m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                       s[static_cast<std::size_t>(j)];
            s[static_cast<std::size_t>(i)] =
                acc / m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
        }
        return s;
    }

    std::size_t n_;
    bool cyclic_ = false;
    std::vector<double> work_;             // 7 entries per row: offsets -2..+4
    std::vector<std::ptrdiff_t> pivot_;
    double growth_ = 1.0;
    // Cyclic-only state: correction_[a] = B^{-1} (corner column a),
    // capacity_ = I + (corner rows of the corrections).
    std::array<std::vector<double>, 4> correction_;
    std::array<std::array<double, 4>, 4> capacity_{};
};

/// Factor a BandedMatrix; throws SingularMatrixError when elimination breaks
/// down. The input matrix is copied, so it may be modified afterwards.
inline BandedLU lu_factor(const BandedMatrix& a) {
    const std::size_t n = a.size();
    BandedLU f(n);
    f.cyclic_ = a.cyclic();

    // Load the plain bands; in cyclic mode the six wrapped corner entries are
    // withheld here and restored through the rank-4 correction.
    const auto sn = static_cast<std::ptrdiff_t>(n);
    for (std::ptrdiff_t i = 0; i < sn; ++i) {
        for (int d = -2; d <= 2; ++d) {
            const std::ptrdiff_t col = i + d;
            if (col < 0 || col >= sn) continue;
            f.w(static_cast<std::size_t>(i), d + 2) =
                a.band(static_cast<std::size_t>(i), d);
        }
    }
    f.factor_banded();
    if (!a.cyclic()) return f;

    // Corner matrix S on rows/columns {0, 1, n-2, n-1}: S[a][b] is the
    // wrapped entry of A at (corner_row(a), corner_row(b)).
    std::array<std::array<double, 4>, 4> s{};
    auto wrapped = [&](std::size_t row, int d) {
        const std::ptrdiff_t col = static_cast<std::ptrdiff_t>(row) + d;
        return (col < 0 || col >= sn) ? a.band(row, d) : 0.0;
    };
    s[0][2] = wrapped(0, -2);      // (0, n-2)
    s[0][3] = wrapped(0, -1);      // (0, n-1)
    s[1][3] = wrapped(1, -2);      // (1, n-1)
    s[2][0] = wrapped(n - 2, 2);   // (n-2, 0)
    s[3][0] = wrapped(n - 1, 1);   // (n-1, 0)
    s[3][1] = wrapped(n - 1, 2);   // (n-1, 1)

    // correction_[b] = B^{-1} w_b where w_b collects column b of S.
    for (int b = 0; b < 4; ++b) {
        std::vector<double> col(n, 0.0);
        for (int a4 = 0; a4 < 4; ++a4)
            col[f.corner_row(a4)] =
                s[static_cast<std::size_t>(a4)][static_cast<std::size_t>(b)];
        f.correction_[static_cast<std::size_t>(b)] = f.solve_banded(std::move(col));
    }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            f.capacity_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                (i == j ? 1.0 : 0.0) +
                f.correction_[static_cast<std::size_t>(j)][f.corner_row(i)];
    // A singular cyclic matrix with a regular corner-free part surfaces as a
    // singular capacity matrix; detect that here rather than at solve time.
    f.solve_capacity({0.0, 0.0, 0.0, 0.0});
    return f;
}

/// Convenience wrapper: factor and solve in one call.
inline std::vector<double> lu_solve(const BandedMatrix& a, std::vector<double> b) {
    return lu_factor(a).solve(std::move(b));
}

}  // namespace kdv
