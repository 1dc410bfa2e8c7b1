#pragma once

// Closed-form weak solutions of two degenerate ergodic examples with g(m) = m:
//   "bbb":  V = pi cos(4 pi x), m = (pi cos 4 pi x)^+, Hbar = 0,
//   "exlp": V = pi cos(2 pi x), m = (pi cos 2 pi x)^+, Hbar = 0.
// Candidates are given by their gradients on intervals with signs. A node on an
// interval endpoint takes the mean of the one-sided limits, so a sign flip
// node carries 0 and the discrete gradient sums to zero exactly.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mfgsel/errors.hpp"
#include "mfgsel/model.hpp"
#include "mfgsel/torus_grid.hpp"

namespace mfgsel {

enum class ExampleKind { bbb, exlp };

inline std::string to_string(ExampleKind k) { return k == ExampleKind::bbb ? "bbb" : "exlp"; }

inline ExampleKind example_kind_from_string(const std::string& s) {
    if (s == "bbb") return ExampleKind::bbb;
    if (s == "exlp" || s == "exdp") return ExampleKind::exlp;
    throw std::invalid_argument("unknown example '" + s + "'");
}

struct CandidateSolution {
    std::string label;
    GridField u_x;
    GridField u;
    GridField m;
    double hbar = 0.0;
};

struct ClosedFormExample {
    ExampleKind kind;
    Model model;
    GridField m;
    double hbar = 0.0;
    std::vector<CandidateSolution> candidates;

    const CandidateSolution& candidate(const std::string& label) const {
        for (const auto& c : candidates) {
            if (c.label == label) return c;
        }
        throw std::out_of_range("no candidate '" + label + "'");
    }
};

/// Periodic closure tolerance used when none is given: the trapezoid sum of a
/// gradient with jumps is zero only up to O(h sup|u_x|).
inline double default_closure_tol(const GridField& u_x) {
    return 2.0 * u_x.grid().h() * norms(u_x).sup + 1e-12;
}

/// Cumulative trapezoid with u(0) = 0.
inline GridField antiderivative(const GridField& u_x, double tol) {
    if (u_x.grid().dim() != 1) throw std::invalid_argument("antiderivative: 1D grids only");
    const double total = integrate(u_x);
    if (std::abs(total) > tol) {
        throw NotPeriodic("antiderivative: gradient has mean " + std::to_string(total));
    }
    const double h = u_x.grid().h();
    GridField u(u_x.grid());
    double acc = 0.0;
    for (std::size_t i = 1; i < u.size(); ++i) {
        acc += 0.5 * h * (u_x[i - 1] + u_x[i]);
        u[i] = acc;
    }
    return u;
}

inline GridField antiderivative(const GridField& u_x) { return antiderivative(u_x, default_closure_tol(u_x)); }

namespace detail {

struct SignedInterval {
    double a;
    double b;
    double sign;
};

template <class Profile>
GridField piecewise_gradient(const TorusGrid& grid, const std::vector<SignedInterval>& parts, Profile&& r) {
    return GridField::sample(grid, [&](double x) {
        double left = 0.0, right = 0.0;
        for (const auto& p : parts) {
            if (x > p.a && x <= p.b) left = p.sign * r(x);
            if (x >= p.a && x < p.b) right = p.sign * r(x);
        }
        return 0.5 * (left + right);
    });
}

inline CandidateSolution make_candidate(std::string label, GridField u_x, const GridField& m, double hbar) {
    GridField u = antiderivative(u_x);
    return {std::move(label), std::move(u_x), std::move(u), m, hbar};
}

}  // namespace detail

inline ClosedFormExample example_bbb(const TorusGrid& grid) {
    using std::numbers::pi;
    if (grid.dim() != 1) throw std::invalid_argument("example_bbb: 1D grids only");
    const GridField m = GridField::sample(grid, [](double x) { return std::max(0.0, pi * std::cos(4.0 * pi * x)); });
    auto r = [](double x) { return std::sqrt(std::max(0.0, -2.0 * pi * std::cos(4.0 * pi * x))); };
    GridField hat = detail::piecewise_gradient(
        grid, {{0.125, 0.25, 1.0}, {0.625, 0.75, 1.0}, {0.25, 0.375, -1.0}, {0.75, 0.875, -1.0}}, r);
    GridField tilde = detail::piecewise_gradient(grid, {{0.125, 0.375, 1.0}, {0.625, 0.875, -1.0}}, r);
    ClosedFormExample ex{ExampleKind::bbb, Model{Coupling::identity(), Potential::cos4pi()}, m, 0.0, {}};
    ex.candidates.push_back(detail::make_candidate("hat", std::move(hat), m, 0.0));
    ex.candidates.push_back(detail::make_candidate("tilde", std::move(tilde), m, 0.0));
    return ex;
}

inline ClosedFormExample example_exlp(const TorusGrid& grid) {
    using std::numbers::pi;
    if (grid.dim() != 1) throw std::invalid_argument("example_exlp: 1D grids only");
    const GridField m = GridField::sample(grid, [](double x) { return std::max(0.0, pi * std::cos(2.0 * pi * x)); });
    auto r = [](double x) { return std::sqrt(std::max(0.0, -2.0 * pi * std::cos(2.0 * pi * x))); };
    GridField tilde = detail::piecewise_gradient(grid, {{0.25, 0.5, 1.0}, {0.5, 0.75, -1.0}}, r);
    GridField hat = detail::piecewise_gradient(
        grid, {{0.25, 0.375, -1.0}, {0.5, 0.625, -1.0}, {0.375, 0.5, 1.0}, {0.625, 0.75, 1.0}}, r);
    ClosedFormExample ex{ExampleKind::exlp, Model{Coupling::identity(), Potential::cos2pi()}, m, 0.0, {}};
    ex.candidates.push_back(detail::make_candidate("tilde", std::move(tilde), m, 0.0));
    ex.candidates.push_back(detail::make_candidate("hat", std::move(hat), m, 0.0));
    return ex;
}

inline ClosedFormExample make_example(ExampleKind k, const TorusGrid& grid) {
    return k == ExampleKind::bbb ? example_bbb(grid) : example_exlp(grid);
}

struct AdmissibilityReport {
    bool admissible = true;
    std::vector<std::size_t> violations;  ///< node indices
    double worst = 0.0;                   ///< largest violation amount
};

/// Regular weak solution test: u_x = 0 where m > 0 and
/// u_x^2 <= 2 (Hbar - V) where m = 0 (g(0) = 0), both up to tol.
inline AdmissibilityReport is_admissible(const GridField& u_x, const ClosedFormExample& ex, double tol = 1e-9) {
    require_same_grid(u_x.grid(), ex.m.grid(), "is_admissible");
    AdmissibilityReport rep;
    for (std::size_t i = 0; i < u_x.size(); ++i) {
        const double x = u_x.grid().coord(static_cast<int>(i));
        double excess;
        if (ex.m[i] > 0.0) {
            excess = std::abs(u_x[i]) - tol;
        } else {
            excess = u_x[i] * u_x[i] - 2.0 * (ex.hbar - ex.model.potential.value(x)) - tol;
        }
        if (excess > 0.0) {
            rep.admissible = false;
            rep.violations.push_back(i);
            rep.worst = std::max(rep.worst, excess + tol);
        }
    }
    return rep;
}

/// The example's candidates, the zero candidate, and the tilde gradient scaled
/// by each factor in (0, 1).
inline std::vector<CandidateSolution> catalog(const ClosedFormExample& ex,
                                              const std::vector<double>& scales = {0.25, 0.5, 0.75, 0.9}) {
    std::vector<CandidateSolution> out = ex.candidates;
    const TorusGrid& grid = ex.m.grid();
    out.push_back({"zero", GridField(grid), GridField(grid), ex.m, ex.hbar});
    const CandidateSolution& tilde = ex.candidate("tilde");
    for (double s : scales) {
        if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("catalog: scale factors must lie in (0, 1]");
        char buf[32];
        std::snprintf(buf, sizeof buf, "tilde_x%.3g", s);
        out.push_back({buf, tilde.u_x * s, tilde.u * s, ex.m, ex.hbar});
    }
    return out;
}

}  // namespace mfgsel
