#pragma once

// Mather-measure pairings, holonomy and action diagnostics, the selection
// functional F(u) = int u m - int u, and the vanishing-discount sweep.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "mfgsel/closed_form.hpp"
#include "mfgsel/discounted_solver.hpp"
#include "mfgsel/ergodic.hpp"
#include "mfgsel/errors.hpp"
#include "mfgsel/model.hpp"
#include "mfgsel/torus_grid.hpp"

namespace mfgsel {

/// int phi(x, -Du) m dx with the central gradient.
inline double mather_pair(const std::function<double(double, double)>& phi, const GridField& u, const GridField& m) {
    require_same_grid(u.grid(), m.grid(), "mather_pair");
    const GridField du = gradient_central(u)[0];
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += phi(u.grid().coord(static_cast<int>(i)), -du[i]) * m[i];
    return s * u.grid().cell_volume();
}

/// Test function of the trigonometric basis together with its C^2 norm.
struct TrigTest {
    int mode = 1;
    bool cosine = false;

    double value(double x) const {
        const double a = 2.0 * std::numbers::pi * mode * x;
        return cosine ? std::cos(a) : std::sin(a);
    }
    GridField sample(const TorusGrid& g) const {
        return GridField::sample(g, [this](double x) { return value(x); });
    }
    /// sup|phi| + sup|phi'| + sup|phi''|
    double c2_norm() const {
        const double k = 2.0 * std::numbers::pi * mode;
        return 1.0 + k + k * k;
    }
    std::string label() const { return (cosine ? "cos" : "sin") + std::to_string(mode); }
};

/// sin and cos of modes 1..modes.
inline std::vector<TrigTest> trig_basis(int modes = 8) {
    std::vector<TrigTest> b;
    for (int k = 1; k <= modes; ++k) {
        b.push_back({k, false});
        b.push_back({k, true});
    }
    return b;
}

/// |int (-eps phi - Du.Dphi) m^eps + eps int phi|.
inline double holonomy_defect_discounted(double eps, const DiscountedSolution& sol, const GridField& phi) {
    require_same_grid(sol.grid(), phi.grid(), "holonomy_defect_discounted");
    const GridField du = gradient_central(sol.u_fluct)[0];
    const GridField dphi = gradient_central(phi)[0];
    double s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) s += (-eps * phi[i] - du[i] * dphi[i]) * sol.m[i] + eps * phi[i];
    return std::abs(s * phi.grid().cell_volume());
}

/// |int -Du.Dphi m|.
inline double holonomy_defect_ergodic(const GridField& u, const GridField& m, const GridField& phi) {
    require_same_grid(u.grid(), m.grid(), "holonomy_defect_ergodic");
    require_same_grid(u.grid(), phi.grid(), "holonomy_defect_ergodic");
    const GridField du = gradient_central(u)[0];
    const GridField dphi = gradient_central(phi)[0];
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s -= du[i] * dphi[i] * m[i];
    return std::abs(s * u.grid().cell_volume());
}

struct ActionCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
};

/// lhs = int (|Du|^2/2 - V + g(m)) m, rhs = eps int u.
inline ActionCheck discounted_action(double eps, const DiscountedSolution& sol, const Model& model) {
    const TorusGrid& g = sol.grid();
    const GridField du = gradient_central(sol.u_fluct)[0];
    double s = 0.0;
    for (std::size_t i = 0; i < du.size(); ++i) {
        const double x = g.coord(static_cast<int>(i));
        const double m = sol.m[i];
        s += (0.5 * du[i] * du[i] - model.potential.value(x) + model.coupling.value(m)) * m;
    }
    ActionCheck a;
    a.lhs = s * g.cell_volume();
    a.rhs = eps * (sol.u_mean + mean(sol.u_fluct));
    a.gap = std::abs(a.lhs - a.rhs);
    return a;
}

/// int <u> m with <u> = u - int u.
inline double selection_functional(const GridField& u, const GridField& m) {
    require_same_grid(u.grid(), m.grid(), "selection_functional");
    return inner(fluctuation(u), m);
}

/// int (g(m_eps) - g(m)) (m_eps - m).
inline double cross_coupling_gap(const GridField& m_eps, const GridField& m, const Model& model) {
    require_same_grid(m_eps.grid(), m.grid(), "cross_coupling_gap");
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        s += (model.coupling.value(m_eps[i]) - model.coupling.value(m[i])) * (m_eps[i] - m[i]);
    }
    return s * m.grid().cell_volume();
}

struct RankedCandidate {
    std::string label;
    double value = 0.0;
};

struct Ranking {
    std::vector<RankedCandidate> order;  ///< ascending functional value
    bool ambiguous = false;              ///< the two smallest values tie within tol

    const RankedCandidate& best() const { return order.front(); }
};

inline Ranking select_minimizer(const std::vector<CandidateSolution>& candidates, const GridField& m,
                                double tol = 1e-10) {
    if (candidates.empty()) throw EmptyCatalog("select_minimizer: empty catalog");
    Ranking r;
    for (const auto& c : candidates) r.order.push_back({c.label, selection_functional(c.u, m)});
    std::stable_sort(r.order.begin(), r.order.end(),
                     [](const RankedCandidate& a, const RankedCandidate& b) { return a.value < b.value; });
    r.ambiguous = r.order.size() > 1 && std::abs(r.order[1].value - r.order[0].value) <= tol;
    return r;
}

struct SweepRow {
    double epsilon = 0.0;
    double sigma = 0.0;
    double delta = 0.0;
    bool failed = false;
    std::string failure;
    double hbar_est = 0.0;      ///< -eps int u^eps
    double mean_u = 0.0;
    double f_value = 0.0;       ///< F(u^eps - mean, m_reference)
    double mass = 0.0;
    double min_m = 0.0;
    double holonomy_max = 0.0;  ///< over the 8-mode trig basis
    double action_gap = 0.0;
    double coupling_gap = 0.0;
    double cauchy = 0.0;        ///< L2 distance of the fluctuation to the previous successful row
    std::vector<double> candidate_distance;  ///< L2 distance to each catalog fluctuation
    std::optional<DiscountedSolution> solution;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<std::string> candidate_labels;
    std::vector<double> candidate_values;  ///< F of each catalog candidate
    int n = 0;
};

struct Verdict {
    bool degenerate = false;     ///< unique-solution regime: the osc assumption holds
    bool available = false;      ///< at least one row converged
    double terminal_eps = 0.0;
    double terminal_f = 0.0;
    double terminal_hbar = 0.0;
    std::string nearest;         ///< catalog candidate nearest in L2 at the terminal row
    double nearest_distance = 0.0;
    bool criterion_holds = false;  ///< F(terminal) <= F(u) + tol for every candidate
    double criterion_tol = 0.05;
    double worst_margin = 0.0;     ///< max over candidates of F(terminal) - F(u)
    bool cauchy_decreasing = false;
};

struct SelectionExperiment {
    SweepResult sweep;
    Verdict verdict;
};

struct ExperimentOptions {
    Schedule schedule = power_schedule(0.0, 1.0, 1.0, 1.0);  // sigma = 0, delta = eps
    SolverOptions solver;
    double criterion_tol = 0.05;
    int trig_modes = 8;
    std::vector<double> scales{0.25, 0.5, 0.75, 0.9};
};

/// Reference density and catalog for a model: the closed-form examples when
/// the model matches one, otherwise the discrete ergodic solution alone.
inline std::pair<GridField, std::vector<CandidateSolution>> reference_for(const Model& model, const TorusGrid& grid,
                                                                          const std::vector<double>& scales) {
    const bool unit = model.coupling.kappa() == 1.0 && model.coupling.alpha() == 1.0;
    if (unit && model.potential.kind() == PotentialKind::cos2pi) {
        const auto ex = example_exlp(grid);
        return {ex.m, catalog(ex, scales)};
    }
    if (unit && model.potential.kind() == PotentialKind::cos4pi) {
        const auto ex = example_bbb(grid);
        return {ex.m, catalog(ex, scales)};
    }
    const ErgodicTriple base = solve_ergodic(model, grid);
    CandidateSolution c{"ergodic", gradient_central(base.u)[0], base.u, base.m, base.hbar};
    return {base.m, {c}};
}

inline SelectionExperiment run_selection_experiment(const Model& model, const TorusGrid& grid,
                                                    const std::vector<double>& ladder,
                                                    const ExperimentOptions& opt = {}) {
    const auto [m_ref, cands] = reference_for(model, grid, opt.scales);
    SelectionExperiment ex;
    ex.sweep.n = grid.n();
    std::vector<GridField> cand_fluct;
    for (const auto& c : cands) {
        ex.sweep.candidate_labels.push_back(c.label);
        ex.sweep.candidate_values.push_back(selection_functional(c.u, m_ref));
        cand_fluct.push_back(fluctuation(c.u));
    }
    const auto basis = trig_basis(opt.trig_modes);
    std::vector<GridField> tests;
    for (const auto& b : basis) tests.push_back(b.sample(grid));

    auto rungs = solve_ladder(ladder, model, grid, opt.schedule, opt.solver);
    const GridField* prev = nullptr;
    for (auto& rung : rungs) {
        SweepRow row;
        row.epsilon = rung.epsilon;
        const Regularization reg = opt.schedule(rung.epsilon);
        row.sigma = reg.sigma;
        row.delta = reg.delta;
        if (!rung.solution) {
            row.failed = true;
            row.failure = rung.failure;
            ex.sweep.rows.push_back(std::move(row));
            continue;
        }
        const DiscountedSolution& s = *rung.solution;
        const double eps = rung.epsilon;
        row.mean_u = s.u_mean;
        row.hbar_est = -eps * (s.u_mean + mean(s.u_fluct));
        row.f_value = selection_functional(s.u_fluct, m_ref);
        row.mass = integrate(s.m);
        row.min_m = s.m.min();
        for (const auto& t : tests) row.holonomy_max = std::max(row.holonomy_max, holonomy_defect_discounted(eps, s, t));
        row.action_gap = discounted_action(eps, s, model).gap;
        row.coupling_gap = cross_coupling_gap(s.m, m_ref, model);
        for (const auto& c : cand_fluct) row.candidate_distance.push_back(std::sqrt(inner(s.u_fluct - c, s.u_fluct - c)));
        row.solution = std::move(rung.solution);
        if (prev) {
            const GridField d = row.solution->u_fluct - *prev;
            row.cauchy = std::sqrt(inner(d, d));
        }
        ex.sweep.rows.push_back(std::move(row));
        prev = &ex.sweep.rows.back().solution->u_fluct;
    }

    Verdict& v = ex.verdict;
    v.criterion_tol = opt.criterion_tol;
    v.degenerate = check_assumption_osc(model.coupling, model.potential.sample(grid));
    const SweepRow* last = nullptr;
    std::vector<double> cauchy;
    for (const auto& r : ex.sweep.rows) {
        if (!r.failed) {
            if (last) cauchy.push_back(r.cauchy);
            last = &r;
        }
    }
    if (!last) return ex;
    v.available = true;
    v.terminal_eps = last->epsilon;
    v.terminal_f = last->f_value;
    v.terminal_hbar = last->hbar_est;
    const auto it = std::min_element(last->candidate_distance.begin(), last->candidate_distance.end());
    v.nearest = ex.sweep.candidate_labels[static_cast<std::size_t>(it - last->candidate_distance.begin())];
    v.nearest_distance = *it;
    v.worst_margin = -std::numeric_limits<double>::infinity();
    for (double fu : ex.sweep.candidate_values) v.worst_margin = std::max(v.worst_margin, last->f_value - fu);
    v.criterion_holds = v.worst_margin <= opt.criterion_tol;
    v.cauchy_decreasing = true;
    for (std::size_t k = 1; k < cauchy.size(); ++k) v.cauchy_decreasing = v.cauchy_decreasing && cauchy[k] < cauchy[k - 1];
    return ex;
}

}  // namespace mfgsel
