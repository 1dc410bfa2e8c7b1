#pragma once

// Periodic uniform grids on the flat torus [0,1)^d (d = 1 or 2) and the
// node-sampled fields that live on them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "mfgsel/errors.hpp"

namespace mfgsel {

class TorusGrid {
public:
    TorusGrid(int dim, int n) : dim_(dim), n_(n), h_(1.0 / n) {
        if (dim != 1 && dim != 2) {
            throw std::invalid_argument("TorusGrid: dimension must be 1 or 2");
        }
        if (n <= 0) {
            throw std::invalid_argument("TorusGrid: nodes per axis must be positive");
        }
    }

    static TorusGrid line(int n) { return TorusGrid(1, n); }

    int dim() const noexcept { return dim_; }
    int n() const noexcept { return n_; }
    double h() const noexcept { return h_; }
    std::size_t size() const noexcept {
        return dim_ == 1 ? static_cast<std::size_t>(n_)
                         : static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
    }

    /// Coordinate of axis index i (no wrap applied).
    double coord(int i) const noexcept { return i * h_; }

    int wrap(int i) const noexcept {
        int r = i % n_;
        return r < 0 ? r + n_ : r;
    }

    /// Flat index of node (i, j); the first axis is the slow one.
    std::size_t index(int i, int j = 0) const noexcept {
        if (dim_ == 1) return static_cast<std::size_t>(wrap(i));
        return static_cast<std::size_t>(wrap(i)) * static_cast<std::size_t>(n_) +
               static_cast<std::size_t>(wrap(j));
    }

    /// Axis indices of a flat index.
    std::pair<int, int> axes(std::size_t k) const noexcept {
        if (dim_ == 1) return {static_cast<int>(k), 0};
        return {static_cast<int>(k / static_cast<std::size_t>(n_)),
                static_cast<int>(k % static_cast<std::size_t>(n_))};
    }

    /// Quadrature weight h^d.
    double cell_volume() const noexcept { return dim_ == 1 ? h_ : h_ * h_; }

    friend bool operator==(const TorusGrid& a, const TorusGrid& b) noexcept {
        return a.dim_ == b.dim_ && a.n_ == b.n_;
    }

private:
    int dim_;
    int n_;
    double h_;
};

inline void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* where) {
    if (!(a == b)) {
        throw GridMismatch(std::string(where) + ": fields live on different grids");
    }
}

/// Scalar field with one value per node.
class GridField {
public:
    /// Placeholder on a single-node line.
    GridField() : GridField(TorusGrid::line(1)) {}

    explicit GridField(const TorusGrid& grid, double fill = 0.0)
        : grid_(grid), values_(grid.size(), fill) {}

    GridField(const TorusGrid& grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size()) {
            throw std::invalid_argument("GridField: value count does not match grid");
        }
        for (double v : values_) {
            if (!std::isfinite(v)) throw DomainError("GridField: non-finite value");
        }
    }

    /// Samples f at every node; f receives (x) in 1D and (x, y) in 2D.
    template <class F>
    static GridField sample(const TorusGrid& grid, F&& f) {
        std::vector<double> v(grid.size());
        for (std::size_t k = 0; k < v.size(); ++k) {
            auto [i, j] = grid.axes(k);
            if constexpr (std::is_invocable_r_v<double, F, double>) {
                v[k] = f(grid.coord(i));
            } else {
                v[k] = f(grid.coord(i), grid.coord(j));
            }
        }
        return GridField(grid, std::move(v));
    }

    const TorusGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    const std::vector<double>& data() const noexcept { return values_; }

    double operator[](std::size_t k) const noexcept { return values_[k]; }
    double& operator[](std::size_t k) noexcept { return values_[k]; }

    /// Periodic 1D access.
    double at(int i) const noexcept { return values_[grid_.index(i)]; }
    double at(int i, int j) const noexcept { return values_[grid_.index(i, j)]; }

    double min() const { return *std::min_element(values_.begin(), values_.end()); }
    double max() const { return *std::max_element(values_.begin(), values_.end()); }

    GridField& operator+=(const GridField& o) {
        require_same_grid(grid_, o.grid_, "GridField +=");
        for (std::size_t k = 0; k < size(); ++k) values_[k] += o.values_[k];
        return *this;
    }
    GridField& operator-=(const GridField& o) {
        require_same_grid(grid_, o.grid_, "GridField -=");
        for (std::size_t k = 0; k < size(); ++k) values_[k] -= o.values_[k];
        return *this;
    }
    GridField& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }
    GridField& operator+=(double c) {
        for (double& v : values_) v += c;
        return *this;
    }

    friend GridField operator+(GridField a, const GridField& b) { return a += b; }
    friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
    friend GridField operator*(GridField a, double s) { return a *= s; }
    friend GridField operator*(double s, GridField a) { return a *= s; }
    friend GridField operator+(GridField a, double c) { return a += c; }
    friend GridField operator-(GridField a, double c) { return a += -c; }

    template <class F>
    GridField map(F&& f) const {
        GridField out(grid_);
        for (std::size_t k = 0; k < size(); ++k) out.values_[k] = f(values_[k]);
        return out;
    }

private:
    TorusGrid grid_;
    std::vector<double> values_;
};

inline GridField hadamard(const GridField& a, const GridField& b) {
    require_same_grid(a.grid(), b.grid(), "hadamard");
    GridField out(a.grid());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] * b[k];
    return out;
}

/// One GridField per axis.
struct VectorField {
    explicit VectorField(const TorusGrid& grid) : components(grid.dim(), GridField(grid)) {}
    explicit VectorField(std::vector<GridField> comps) : components(std::move(comps)) {
        if (components.empty()) throw std::invalid_argument("VectorField: no components");
        for (const auto& c : components) {
            require_same_grid(c.grid(), components.front().grid(), "VectorField");
        }
        if (static_cast<int>(components.size()) != components.front().grid().dim()) {
            throw std::invalid_argument("VectorField: component count must equal dimension");
        }
    }

    const TorusGrid& grid() const noexcept { return components.front().grid(); }
    const GridField& operator[](int k) const { return components[static_cast<std::size_t>(k)]; }
    GridField& operator[](int k) { return components[static_cast<std::size_t>(k)]; }

    std::vector<GridField> components;
};

/// Second-order central difference with periodic wrap.
inline VectorField gradient_central(const GridField& f) {
    const TorusGrid& g = f.grid();
    VectorField out(g);
    const double inv2h = 0.5 / g.h();
    const int n = g.n();
    if (g.dim() == 1) {
        for (int i = 0; i < n; ++i) out[0][g.index(i)] = (f.at(i + 1) - f.at(i - 1)) * inv2h;
    } else {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                out[0][g.index(i, j)] = (f.at(i + 1, j) - f.at(i - 1, j)) * inv2h;
                out[1][g.index(i, j)] = (f.at(i, j + 1) - f.at(i, j - 1)) * inv2h;
            }
        }
    }
    return out;
}

/// Central divergence; the negative adjoint of gradient_central under the
/// rectangle-rule inner product, so summation by parts is exact.
inline GridField divergence_central(const VectorField& F) {
    const TorusGrid& g = F.grid();
    GridField out(g);
    const double inv2h = 0.5 / g.h();
    const int n = g.n();
    if (g.dim() == 1) {
        for (int i = 0; i < n; ++i) out[g.index(i)] = (F[0].at(i + 1) - F[0].at(i - 1)) * inv2h;
    } else {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                out[g.index(i, j)] = (F[0].at(i + 1, j) - F[0].at(i - 1, j)) * inv2h +
                                     (F[1].at(i, j + 1) - F[1].at(i, j - 1)) * inv2h;
            }
        }
    }
    return out;
}

/// Standard periodic 3-point (per axis) Laplacian.
inline GridField laplacian(const GridField& f) {
    const TorusGrid& g = f.grid();
    GridField out(g);
    const double inv_h2 = 1.0 / (g.h() * g.h());
    const int n = g.n();
    if (g.dim() == 1) {
        for (int i = 0; i < n; ++i) {
            out[g.index(i)] = (f.at(i + 1) - 2.0 * f.at(i) + f.at(i - 1)) * inv_h2;
        }
    } else {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                out[g.index(i, j)] = (f.at(i + 1, j) + f.at(i - 1, j) + f.at(i, j + 1) +
                                      f.at(i, j - 1) - 4.0 * f.at(i, j)) *
                                     inv_h2;
            }
        }
    }
    return out;
}

/// Rectangle rule h^d * sum f_i.
inline double integrate(const GridField& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s * f.grid().cell_volume();
}

inline double inner(const GridField& a, const GridField& b) {
    require_same_grid(a.grid(), b.grid(), "inner");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s * a.grid().cell_volume();
}

inline double mean(const GridField& f) { return integrate(f); }

struct Norms {
    double sup = 0.0;
    double l2 = 0.0;
    double l1 = 0.0;
    double oscillation = 0.0;
};

inline Norms norms(const GridField& f) {
    Norms r;
    double s1 = 0.0, s2 = 0.0;
    for (double v : f.values()) {
        r.sup = std::max(r.sup, std::abs(v));
        s1 += std::abs(v);
        s2 += v * v;
    }
    const double w = f.grid().cell_volume();
    r.l1 = s1 * w;
    r.l2 = std::sqrt(s2 * w);
    r.oscillation = f.max() - f.min();
    return r;
}

inline double sup_distance(const GridField& a, const GridField& b) {
    require_same_grid(a.grid(), b.grid(), "sup_distance");
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

inline GridField fluctuation(const GridField& f) { return f - mean(f); }

}  // namespace mfgsel
