#pragma once

// A priori identities of the discounted problem evaluated on discrete
// solutions. Energy and density-formula residuals use face quantities and
// compact differences, for which both identities hold exactly on the
// staggered scheme when sigma = delta = 0.

#include <algorithm>
#include <cmath>
#include <vector>

#include "mfgsel/discounted_solver.hpp"
#include "mfgsel/model.hpp"
#include "mfgsel/scheme.hpp"

namespace mfgsel {

inline double mass_defect(const DiscountedSolution& sol) { return std::abs(integrate(sol.m) - 1.0); }

/// Extremal-point bounds g(1) - max V <= eps u <= g(1) - min V.
struct BoundsCheck {
    double eps_u_min = 0.0;
    double eps_u_max = 0.0;
    double lower = 0.0;
    double upper = 0.0;

    bool holds(double tol) const { return eps_u_min >= lower - tol && eps_u_max <= upper + tol; }
};

inline BoundsCheck discount_bounds(const DiscountedSolution& sol, const Model& model) {
    const GridField v = model.potential.sample(sol.grid());
    const double g1 = model.coupling.value(1.0);
    return {sol.epsilon * sol.u.min(), sol.epsilon * sol.u.max(), g1 - v.max(), g1 - v.min()};
}

/// |int[(1+m)/2 |Du|^2 + m g(m)] + sigma int |Du|^2 - int[(m-1) V + g(m)]|.
inline double energy_identity_residual(const DiscountedSolution& sol, const Model& model) {
    const auto& f = sol.faces;
    const double h = sol.grid().h();
    const auto& g = model.coupling;
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double q2 = f.q[j] * f.q[j];
        const double gm = g.value(f.M[j]);
        const double v = model.potential.value(f.x[j]);
        lhs += 0.5 * (1.0 + f.M[j]) * q2 + f.M[j] * gm + sol.reg.sigma * q2;
        rhs += (f.M[j] - 1.0) * v + gm;
    }
    return std::abs(lhs - rhs) * h;
}

/// sup over nodes of |m_x (u_x^2 + g'(m) m) - (2 eps m u_x - eps u_x + m V_x)|
/// with u_x, u_xx, m_x, (g(m))_x, V_x the compact differences of face values
/// and g'(m) m_x replaced by the difference of g over adjacent faces.
inline double density_formula_residual(const DiscountedSolution& sol, const Model& model) {
    const auto& f = sol.faces;
    const std::size_t n = f.size();
    const double h = sol.grid().h();
    const double eps = sol.epsilon;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t l = (i + n - 1) % n;
        const double ux = 0.5 * (f.q[i] + f.q[l]);
        const double m = 0.5 * (f.M[i] + f.M[l]);
        const double mx = (f.M[i] - f.M[l]) / h;
        const double gx = (model.coupling.value(f.M[i]) - model.coupling.value(f.M[l])) / h;
        const double vx = (model.potential.value(f.x[i]) - model.potential.value(f.x[l])) / h;
        const double r = mx * ux * ux + m * gx - (2.0 * eps * m * ux - eps * ux + m * vx);
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

/// int (m1 - m2)(g(m1) - g(m2)) + (m1 + m2)/2 |Du1 - Du2|^2 on faces.
inline double lasry_lions(const DiscountedSolution& a, const DiscountedSolution& b, const Model& model) {
    require_same_grid(a.grid(), b.grid(), "lasry_lions");
    const double h = a.grid().h();
    const auto& g = model.coupling;
    double s = 0.0;
    for (std::size_t j = 0; j < a.faces.size(); ++j) {
        const double M1 = a.faces.M[j], M2 = b.faces.M[j];
        const double dq = a.faces.q[j] - b.faces.q[j];
        s += (M1 - M2) * (g.value(M1) - g.value(M2)) + 0.5 * (M1 + M2) * dq * dq;
    }
    return s * h;
}

/// Largest entry mismatch between the assembled Jacobian and a Richardson
/// extrapolation of central differences of the residual with steps t and 2t.
inline double jacobian_fd_mismatch(const GridField& u, double eps, double lambda_cont, const Model& model,
                                   const Regularization& reg, double t = 1e-5) {
    const Scheme sch(u.grid(), model, reg);
    auto [c, w] = split_offset(u);
    const FaceValues f = sch.faces(c, w, eps, 0.0, lambda_cont);
    const Eigen::MatrixXd J = Eigen::MatrixXd(sch.jacobian(f, eps, eps));
    const std::size_t n = w.size();
    auto central = [&](std::size_t k, double step) {
        std::vector<double> wp = w, wm = w;
        wp[k] += step;
        wm[k] -= step;
        const auto rp = sch.residual(sch.faces(c, wp, eps, 0.0, lambda_cont), wp, eps);
        const auto rm = sch.residual(sch.faces(c, wm, eps, 0.0, lambda_cont), wm, eps);
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = (rp[i] - rm[i]) / (2.0 * step);
        return d;
    };
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto d1 = central(k, t);
        const auto d2 = central(k, 2.0 * t);
        for (std::size_t i = 0; i < n; ++i) {
            const double fd = (4.0 * d1[i] - d2[i]) / 3.0;
            worst = std::max(worst, std::abs(fd - J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))));
        }
    }
    return worst;
}

}  // namespace mfgsel
