#pragma once

// Discounted problem: damped Newton on the reduced equation, continuation in
// the potential, and density recovery.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "mfgsel/errors.hpp"
#include "mfgsel/model.hpp"
#include "mfgsel/scheme.hpp"
#include "mfgsel/torus_grid.hpp"

namespace mfgsel {

struct SolverOptions {
    double tol_abs = 1e-10;
    int max_iters = 50;
    int max_backtracks = 20;
    // continuation
    double initial_step = 1.0;
    double min_step = 1e-4;
    double grow = 1.5;
    int fast_iters = 4;  ///< Newton iterations counted as a fast success
};

struct DiscountedSolution {
    double epsilon = 0.0;
    double lambda_cont = 1.0;
    Regularization reg;
    GridField u;
    GridField m;
    double u_mean = 0.0;          ///< mean of u
    GridField u_fluct;            ///< u - mean(u), carried separately from the offset
    FaceValues faces;             ///< face quantities of the final state
    double residual_sup = 0.0;
    double residual_floor = 0.0;  ///< estimated rounding level of the residual
    int newton_iters = 0;
    int continuation_steps = 0;

    const TorusGrid& grid() const noexcept { return u.grid(); }
};

/// Linearization of the discrete residual.
struct LinearizedOperator {
    Eigen::SparseMatrix<double> matrix;
    std::vector<double> face_diffusion;  ///< M + (g^{-1})'(s) q^2 per face
    double sigma = 0.0;

    double min_diffusion() const {
        return *std::min_element(face_diffusion.begin(), face_diffusion.end());
    }

    GridField apply(const GridField& phi) const {
        Eigen::Map<const Eigen::VectorXd> x(phi.data().data(), static_cast<Eigen::Index>(phi.size()));
        Eigen::VectorXd y = matrix * x;
        return GridField(phi.grid(), std::vector<double>(y.data(), y.data() + y.size()));
    }
};

namespace detail {

inline void require_epsilon(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw std::invalid_argument("discount rate must be positive and finite");
    }
}

struct NewtonState {
    double c = 0.0;
    std::vector<double> w;
    FaceValues faces;
    std::vector<double> r;
    double res = std::numeric_limits<double>::infinity();    ///< sup norm, for convergence
    double merit = std::numeric_limits<double>::infinity();  ///< l2 norm, for the line search
};

inline bool evaluate(const Scheme& sch, double eps, double lam, NewtonState& st) {
    try {
        st.faces = sch.faces(st.c, st.w, eps, 0.0, lam);
        st.r = sch.residual(st.faces, st.w, eps);
        st.res = sup_abs(st.r);
        double ss = 0.0;
        for (double v : st.r) ss += v * v;
        st.merit = std::sqrt(ss);
        return std::isfinite(st.merit);
    } catch (const DomainError&) {
        st.res = std::numeric_limits<double>::infinity();
        st.merit = st.res;
        return false;
    }
}

inline void recentre(NewtonState& st) {
    double s = 0.0;
    for (double v : st.w) s += v;
    const double mu = s / static_cast<double>(st.w.size());
    st.c += mu;
    for (double& v : st.w) v -= mu;
}

inline Eigen::VectorXd solve_sparse(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SingularJacobian("sparse LU factorization failed");
    Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite()) {
        throw SingularJacobian("sparse LU solve failed");
    }
    return x;
}

inline DiscountedSolution package(const Scheme& sch, double eps, double lam, const NewtonState& st,
                                  int iters) {
    const TorusGrid& g = sch.grid();
    DiscountedSolution sol{eps,
                           lam,
                           sch.regularization(),
                           GridField(g),
                           GridField(g, sch.node_density(st.faces)),
                           st.c,
                           GridField(g, st.w),
                           st.faces,
                           st.res,
                           sch.rounding_floor(st.faces, st.w, eps),
                           iters,
                           0};
    for (std::size_t i = 0; i < st.w.size(); ++i) sol.u[i] = st.c + st.w[i];
    return sol;
}

// Damped Newton from (c, w). Converged when the residual is below tol_abs, or
// below the rounding floor once Newton stops making progress.
inline DiscountedSolution newton(const Scheme& sch, double eps, double lam, NewtonState st,
                                 const SolverOptions& opt) {
    if (!evaluate(sch, eps, lam, st)) {
        throw DomainError("newton_solve: initial iterate outside the domain of the inverse coupling");
    }
    const auto n = static_cast<Eigen::Index>(st.w.size());
    double best = st.res;
    for (int it = 0;; ++it) {
        const double floor = sch.rounding_floor(st.faces, st.w, eps);
        if (st.res <= opt.tol_abs) return package(sch, eps, lam, st, it);
        if (it >= opt.max_iters) {
            if (st.res <= floor) return package(sch, eps, lam, st, it);
            throw NonConvergence("newton_solve: iteration cap reached", best, it);
        }
        const Eigen::SparseMatrix<double> J = sch.jacobian(st.faces, eps, eps);
        Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(st.r.data(), n);
        const Eigen::VectorXd dw = solve_sparse(J, rhs);

        double t = 1.0;
        bool accepted = false;
        NewtonState trial;
        for (int k = 0; k <= opt.max_backtracks; ++k, t *= 0.5) {
            trial.c = st.c;
            trial.w = st.w;
            for (Eigen::Index i = 0; i < n; ++i) trial.w[static_cast<std::size_t>(i)] += t * dw[i];
            recentre(trial);
            if (evaluate(sch, eps, lam, trial) && trial.merit <= (1.0 - 1e-4 * t) * st.merit) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (st.res <= floor) return package(sch, eps, lam, st, it);
            throw NonConvergence("newton_solve: line search failed", best, it);
        }
        const double previous = st.res;
        st = std::move(trial);
        best = std::min(best, st.res);
        if (st.res <= floor && st.res > 0.5 * previous) return package(sch, eps, lam, st, it + 1);
    }
}

}  // namespace detail

/// Node residual of the reduced equation at potential scale lambda_cont.
inline GridField residual(const GridField& u, double eps, double lambda_cont, const Model& model,
                          const Regularization& reg) {
    detail::require_epsilon(eps);
    const Scheme sch(u.grid(), model, reg);
    auto [c, w] = split_offset(u);
    const FaceValues f = sch.faces(c, w, eps, 0.0, lambda_cont);
    return GridField(u.grid(), sch.residual(f, w, eps));
}

inline LinearizedOperator assemble_jacobian(const GridField& u, double eps, double lambda_cont,
                                            const Model& model, const Regularization& reg) {
    detail::require_epsilon(eps);
    const Scheme sch(u.grid(), model, reg);
    auto [c, w] = split_offset(u);
    const FaceValues f = sch.faces(c, w, eps, 0.0, lambda_cont);
    LinearizedOperator op;
    op.matrix = sch.jacobian(f, eps, eps);
    op.sigma = reg.sigma;
    op.face_diffusion.resize(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) op.face_diffusion[j] = f.M[j] + f.dM[j] * f.q[j] * f.q[j];
    return op;
}

/// Damped Newton from u_init. An initial iterate whose face arguments leave the
/// domain of the inverse coupling is first raised by a constant so that the
/// smallest face argument equals g(1).
inline DiscountedSolution newton_solve(double eps, double lambda_cont, const Model& model,
                                       const Regularization& reg, const GridField& u_init,
                                       const SolverOptions& opt = {}) {
    detail::require_epsilon(eps);
    const Scheme sch(u_init.grid(), model, reg);
    detail::NewtonState st;
    std::tie(st.c, st.w) = split_offset(u_init);
    if (!detail::evaluate(sch, eps, lambda_cont, st)) {
        const Scheme probe(u_init.grid(), model, reg, BelowRange::positive_part);
        const FaceValues f = probe.faces(st.c, st.w, eps, 0.0, lambda_cont);
        const double smin = *std::min_element(f.s.begin(), f.s.end());
        st.c += (model.coupling.value(1.0) - smin) / eps;
    }
    return detail::newton(sch, eps, lambda_cont, std::move(st), opt);
}

/// Continuation in the potential scale from the constant state g(1)/eps.
inline DiscountedSolution continuation_solve(double eps, const Model& model, const Regularization& reg,
                                             const TorusGrid& grid, const SolverOptions& opt = {}) {
    detail::require_epsilon(eps);
    const Scheme sch(grid, model, reg);
    detail::NewtonState cur;
    cur.c = model.coupling.value(1.0) / eps;
    cur.w.assign(grid.size(), 0.0);
    double lam = 0.0;
    std::optional<detail::NewtonState> prev;
    double prev_lam = 0.0;
    double step = opt.initial_step;
    int steps = 0;
    int total_iters = 0;
    DiscountedSolution last = detail::newton(sch, eps, 0.0, cur, opt);
    while (lam < 1.0) {
        const double target = std::min(1.0, lam + step);
        detail::NewtonState guess = cur;
        if (prev) {
            // secant predictor
            const double r = (target - lam) / (lam - prev_lam);
            guess.c = cur.c + r * (cur.c - prev->c);
            for (std::size_t i = 0; i < guess.w.size(); ++i) guess.w[i] += r * (cur.w[i] - prev->w[i]);
        }
        try {
            auto attempt = [&]() {
                try {
                    return detail::newton(sch, eps, target, guess, opt);
                } catch (const Error&) {
                    if (!prev) throw;
                    return detail::newton(sch, eps, target, cur, opt);
                }
            };
            DiscountedSolution sol = attempt();
            prev = cur;
            prev_lam = lam;
            cur.c = sol.u_mean;
            cur.w = sol.u_fluct.data();
            lam = target;
            ++steps;
            total_iters += sol.newton_iters;
            if (sol.newton_iters <= opt.fast_iters) step *= opt.grow;
            last = std::move(sol);
        } catch (const DomainError&) {
            step *= 0.5;
        } catch (const NonConvergence&) {
            step *= 0.5;
        } catch (const SingularJacobian&) {
            step *= 0.5;
        }
        if (lam < 1.0 && step < opt.min_step) {
            throw ContinuationStalled("continuation_solve: step fell below its floor at lambda_cont = " +
                                          std::to_string(lam),
                                      lam, step);
        }
    }
    last.continuation_steps = steps;
    last.newton_iters = total_iters;
    return last;
}

/// m = ghat^{-1}(eps u + |Du|^2/2 + V) on faces, averaged to nodes. eps = 0
/// together with hbar evaluates the ergodic relation g(m) = |Du|^2/2 + V - Hbar.
inline GridField recover_density(const GridField& u, double eps, const Model& model,
                                 const Regularization& reg, BelowRange below = BelowRange::raise,
                                 double hbar = 0.0) {
    if (!(eps >= 0.0)) throw std::invalid_argument("recover_density: eps must be >= 0");
    const Scheme sch(u.grid(), model, reg, below);
    auto [c, w] = split_offset(u);
    const FaceValues f = sch.faces(c, w, eps, -hbar, 1.0);
    return GridField(u.grid(), sch.node_density(f));
}

/// Regularization as a function of the discount rate.
using Schedule = std::function<Regularization(double eps)>;

inline Schedule fixed_schedule(Regularization reg) {
    return [reg](double) { return reg; };
}

/// sigma = a_sigma * eps^p_sigma, delta = a_delta * eps^p_delta.
inline Schedule power_schedule(double a_sigma, double p_sigma, double a_delta, double p_delta) {
    return [=](double eps) {
        return Regularization{a_sigma * std::pow(eps, p_sigma), a_delta * std::pow(eps, p_delta)};
    };
}

struct LadderRung {
    double epsilon = 0.0;
    std::optional<DiscountedSolution> solution;
    std::string failure;  ///< empty on success
};

/// Solves along a strictly decreasing ladder. Each rung first tries Newton
/// warm-started from the previous rung (offset rescaled by eps_prev/eps) and
/// falls back to continuation.
inline std::vector<LadderRung> solve_ladder(const std::vector<double>& ladder, const Model& model,
                                            const TorusGrid& grid, const Schedule& schedule,
                                            const SolverOptions& opt = {}) {
    for (std::size_t k = 1; k < ladder.size(); ++k) {
        if (!(ladder[k] < ladder[k - 1])) throw std::invalid_argument("ladder must be strictly decreasing");
    }
    std::vector<LadderRung> out;
    out.reserve(ladder.size());
    const DiscountedSolution* prev = nullptr;
    for (double eps : ladder) {
        LadderRung rung;
        rung.epsilon = eps;
        const Regularization reg = schedule(eps);
        if (prev) {
            try {
                GridField init = prev->u_fluct + prev->u_mean * prev->epsilon / eps;
                rung.solution = newton_solve(eps, 1.0, model, reg, init, opt);
            } catch (const Error&) {
                rung.solution.reset();
            }
        }
        if (!rung.solution) {
            try {
                rung.solution = continuation_solve(eps, model, reg, grid, opt);
            } catch (const Error& e) {
                rung.failure = e.what();
            }
        }
        out.push_back(std::move(rung));
        prev = out.back().solution ? &*out.back().solution : prev;
    }
    return out;
}

}  // namespace mfgsel
