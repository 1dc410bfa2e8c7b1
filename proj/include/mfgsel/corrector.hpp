#pragma once

// Correctors of the vanishing-discount expansion
//   u^eps = -Hbar/eps + u + lambda + eps*(v + mu) + O(eps^2),
//   m^eps = m + eps*theta + O(eps^2),
// obtained by expanding the discrete discounted residual in powers of eps
// around a discrete ergodic base, plus the linearized discounted problem and
// the expansion checks.
//
// With w the unknown field and c an unknown constant, every order solves
//   L[w, c] = Div[M0 q(w) + M0' (c + q0 q(w)) q0] + sigma Lap w = r,
//   C[w, c] = h sum_j M0'_j (c + q0_j q(w)_j)                   = k,
//   h sum w = 0,
// where the constant is fixed by solvability of the next order. The n rows of
// L sum to zero, so a slack zeta is added to each of them; it vanishes when the
// data are compatible.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "mfgsel/discounted_solver.hpp"
#include "mfgsel/ergodic.hpp"
#include "mfgsel/errors.hpp"
#include "mfgsel/model.hpp"
#include "mfgsel/torus_grid.hpp"

namespace mfgsel {

struct RouteCheck {
    double lambda_direct = 0.0;
    double lambda_extrapolated = 0.0;
    double v_difference = 0.0;      ///< sup-norm, both fields taken with zero mean
    double theta_difference = 0.0;  ///< sup-norm
    double tolerance = 1e-4;
    bool agree = false;
};

struct CorrectorSolution {
    GridField v;                     ///< zero-mean first corrector
    GridField theta;                 ///< node density corrector
    std::vector<double> theta_face;
    double lambda = 0.0;
    double mu = 0.0;                 ///< constant completing v at second order
    double eps_used = 0.0;
    double slack = 0.0;              ///< compatibility slack of the bordered solve
    std::optional<RouteCheck> routes;
};

struct LinearizedSolution {
    double epsilon = 0.0;
    GridField v;
    GridField theta;
    std::vector<double> theta_face;
};

struct CorrectorOptions {
    double m_floor = 1e-6;
    double sigma = 0.0;
    bool cross_check = true;
    std::vector<double> check_eps{1e-2, 5e-3, 2.5e-3};
    double route_tol = 1e-4;
};

namespace detail {

inline void require_nondegenerate(const ErgodicTriple& base, double m_floor) {
    const double mmin = *std::min_element(base.faces.M.begin(), base.faces.M.end());
    if (!(mmin >= m_floor)) {
        throw DegenerateBase("corrector: base density " + std::to_string(mmin) + " below floor " +
                             std::to_string(m_floor));
    }
}

inline std::vector<double> face_average(const std::vector<double>& node) {
    const std::size_t n = node.size();
    std::vector<double> f(n);
    for (std::size_t j = 0; j < n; ++j) f[j] = 0.5 * (node[j] + node[(j + 1) % n]);
    return f;
}

inline std::vector<double> face_difference(const std::vector<double>& node, double h) {
    const std::size_t n = node.size();
    std::vector<double> f(n);
    for (std::size_t j = 0; j < n; ++j) f[j] = (node[(j + 1) % n] - node[j]) / h;
    return f;
}

inline std::vector<double> node_average(const std::vector<double>& face) {
    const std::size_t n = face.size();
    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = 0.5 * (face[(i + n - 1) % n] + face[i]);
    return m;
}

/// (X_i - X_{i-1}) / h
inline std::vector<double> divergence(const std::vector<double>& face, double h) {
    const std::size_t n = face.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = (face[i] - face[(i + n - 1) % n]) / h;
    return d;
}

struct BorderedResult {
    std::vector<double> w;
    double c = 0.0;
    double zeta = 0.0;
};

class BorderedCorrectorSystem {
public:
    BorderedCorrectorSystem(const ErgodicTriple& base, double sigma) : n_(base.u.size()) {
        const auto& f = base.faces;
        const double h = base.grid().h();
        const int n = static_cast<int>(n_);
        // L's field part: derivative of the ergodic residual in w at eps = 0
        std::vector<Eigen::Triplet<double>> t;
        for (int j = 0; j < n; ++j) {
            const int a = j, b = (j + 1) % n;
            const double q = f.q[j];
            const double dFa = -(f.M[j] + f.dM[j] * q * q) / h;
            const double dFb = -dFa;
            t.emplace_back(a, a, dFa / h - sigma / (h * h));
            t.emplace_back(a, b, dFb / h + sigma / (h * h));
            t.emplace_back(b, a, -dFa / h + sigma / (h * h));
            t.emplace_back(b, b, -dFb / h - sigma / (h * h));
        }
        // c column: Div[M0' q0]
        for (int i = 0; i < n; ++i) {
            const int l = (i + n - 1) % n;
            t.emplace_back(i, n, (f.dM[i] * f.q[i] - f.dM[l] * f.q[l]) / h);
            t.emplace_back(i, n + 1, 1.0);  // slack
        }
        // constraint row
        double sum_dm = 0.0;
        for (int j = 0; j < n; ++j) sum_dm += f.dM[j];
        for (int k = 0; k < n; ++k) {
            const int l = (k + n - 1) % n;
            t.emplace_back(n, k, f.dM[l] * f.q[l] - f.dM[k] * f.q[k]);
        }
        t.emplace_back(n, n, h * sum_dm);
        // gauge row
        for (int k = 0; k < n; ++k) t.emplace_back(n + 1, k, h);
        Eigen::SparseMatrix<double> A(n + 2, n + 2);
        A.setFromTriplets(t.begin(), t.end());
        A.makeCompressed();
        lu_.analyzePattern(A);
        lu_.factorize(A);
        if (lu_.info() != Eigen::Success) throw LinearSolveFailure("corrector: bordered factorization failed");
    }

    BorderedResult solve(const std::vector<double>& rows, double constraint) const {
        Eigen::VectorXd b(static_cast<Eigen::Index>(n_ + 2));
        for (std::size_t i = 0; i < n_; ++i) b[static_cast<Eigen::Index>(i)] = rows[i];
        b[static_cast<Eigen::Index>(n_)] = constraint;
        b[static_cast<Eigen::Index>(n_ + 1)] = 0.0;
        Eigen::VectorXd x = lu_.solve(b);
        if (lu_.info() != Eigen::Success || !x.allFinite()) {
            throw LinearSolveFailure("corrector: bordered solve failed");
        }
        BorderedResult r;
        r.w.assign(x.data(), x.data() + n_);
        r.c = x[static_cast<Eigen::Index>(n_)];
        r.zeta = x[static_cast<Eigen::Index>(n_ + 1)];
        return r;
    }

private:
    std::size_t n_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

/// Quadratic extrapolation to eps = 0 through three points.
inline double extrapolate_to_zero(const std::array<double, 3>& e, const std::array<double, 3>& y) {
    double r = 0.0;
    for (int i = 0; i < 3; ++i) {
        double l = 1.0;
        for (int k = 0; k < 3; ++k) {
            if (k != i) l *= (0.0 - e[k]) / (e[i] - e[k]);
        }
        r += l * y[i];
    }
    return r;
}

}  // namespace detail

/// Symmetric form K_h[phi, psi] = h sum_j [ (M0 + sigma) q(phi) q(psi)
///   + M0' (eps phibar + q0 q(phi)) (eps psibar + q0 q(psi)) ].
inline Eigen::SparseMatrix<double> bilinear_form(double eps, const ErgodicTriple& base, double sigma = 0.0) {
    const auto& f = base.faces;
    const int n = static_cast<int>(base.u.size());
    const double h = base.grid().h();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(4 * n));
    for (int j = 0; j < n; ++j) {
        const int a = j, b = (j + 1) % n;
        const double da = -1.0 / h, db = 1.0 / h;
        const double ea = 0.5 * eps - f.q[j] / h, eb = 0.5 * eps + f.q[j] / h;
        const double k0 = h * (f.M[j] + sigma);
        const double k1 = h * f.dM[j];
        t.emplace_back(a, a, k0 * da * da + k1 * ea * ea);
        t.emplace_back(a, b, k0 * da * db + k1 * ea * eb);
        t.emplace_back(b, a, k0 * db * da + k1 * eb * ea);
        t.emplace_back(b, b, k0 * db * db + k1 * eb * eb);
    }
    Eigen::SparseMatrix<double> K(n, n);
    K.setFromTriplets(t.begin(), t.end());
    return K;
}

inline double bilinear_form_value(const Eigen::SparseMatrix<double>& K, const GridField& phi,
                                  const GridField& psi) {
    Eigen::Map<const Eigen::VectorXd> a(phi.data().data(), static_cast<Eigen::Index>(phi.size()));
    Eigen::Map<const Eigen::VectorXd> b(psi.data().data(), static_cast<Eigen::Index>(psi.size()));
    return a.dot(K * b);
}

/// Linearized discounted problem around the base:
///   eps v + u + Du.Dv - A = g'(m) theta,
///   eps theta - div(m Dv) - div(theta Du) = 1 - m + div B.
/// v solves K_h[v, psi] = h sum (1 - m) psi - h sum Bbar q(psi)
///   - h sum M0' (ubar - Abar) (eps psibar + q0 q(psi)),
/// and theta = M0' (eps vbar + ubar + q0 q(v) - Abar) on faces.
inline LinearizedSolution solve_linearized_discounted(double eps, const GridField& A, const VectorField& B,
                                                      const ErgodicTriple& base, const Model& model,
                                                      const CorrectorOptions& opt = {}) {
    (void)model;
    if (!(eps > 0.0)) throw std::invalid_argument("solve_linearized_discounted: eps must be positive");
    require_same_grid(A.grid(), base.grid(), "solve_linearized_discounted");
    require_same_grid(B.grid(), base.grid(), "solve_linearized_discounted");
    detail::require_nondegenerate(base, opt.m_floor);
    const auto& f = base.faces;
    const std::size_t n = base.u.size();
    const double h = base.grid().h();
    const auto Abar = detail::face_average(A.data());
    const auto Bbar = detail::face_average(B[0].data());

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) rhs[static_cast<Eigen::Index>(i)] += h * (1.0 - base.m[i]);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t a = j, b = (j + 1) % n;
        const double ea = 0.5 * eps - f.q[j] / h, eb = 0.5 * eps + f.q[j] / h;
        const double coef = h * f.dM[j] * (f.ubar[j] - Abar[j]);
        rhs[static_cast<Eigen::Index>(a)] += h * Bbar[j] / h - coef * ea;
        rhs[static_cast<Eigen::Index>(b)] += -h * Bbar[j] / h - coef * eb;
    }
    const Eigen::SparseMatrix<double> K = bilinear_form(eps, base, opt.sigma);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
    if (ldlt.info() != Eigen::Success) throw LinearSolveFailure("solve_linearized_discounted: factorization failed");
    Eigen::VectorXd x = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success || !x.allFinite()) {
        throw LinearSolveFailure("solve_linearized_discounted: solve failed");
    }
    LinearizedSolution s{eps, GridField(base.grid()), GridField(base.grid()), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) s.v[i] = x[static_cast<Eigen::Index>(i)];
    const auto vbar = detail::face_average(s.v.data());
    const auto qv = detail::face_difference(s.v.data(), h);
    for (std::size_t j = 0; j < n; ++j) {
        s.theta_face[j] = f.dM[j] * (eps * vbar[j] + f.ubar[j] + f.q[j] * qv[j] - Abar[j]);
    }
    s.theta = GridField(base.grid(), detail::node_average(s.theta_face));
    return s;
}

inline LinearizedSolution solve_linearized_discounted(double eps, const GridField& A, const ErgodicTriple& base,
                                                      const Model& model, const CorrectorOptions& opt = {}) {
    return solve_linearized_discounted(eps, A, VectorField(base.grid()), base, model, opt);
}

/// Limit corrector (v, theta, lambda) with the gauge int v = 0 and the
/// solvability condition int theta = 0, plus the second-order constant mu.
/// With opt.cross_check the linearized discounted problem (A = B = 0) is solved
/// on opt.check_eps and extrapolated to eps = 0 for comparison.
inline CorrectorSolution solve_limit_corrector(const ErgodicTriple& base, const Model& model,
                                               const CorrectorOptions& opt = {}) {
    detail::require_nondegenerate(base, opt.m_floor);
    const auto& f = base.faces;
    const std::size_t n = base.u.size();
    const double h = base.grid().h();
    const detail::BorderedCorrectorSystem sys(base, opt.sigma);

    // first order
    std::vector<double> flux(n);
    double k1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        flux[j] = f.dM[j] * f.ubar[j] * f.q[j];
        k1 -= h * f.dM[j] * f.ubar[j];
    }
    std::vector<double> r1 = detail::divergence(flux, h);
    for (std::size_t i = 0; i < n; ++i) r1[i] = (base.m[i] - 1.0) - r1[i];
    const auto o1 = sys.solve(r1, k1);

    CorrectorSolution cs;
    cs.lambda = o1.c;
    cs.v = GridField(base.grid(), o1.w);
    cs.slack = std::abs(o1.zeta);
    const auto q1 = detail::face_difference(o1.w, h);
    const auto vbar = detail::face_average(o1.w);
    std::vector<double> s1(n), M1(n);
    cs.theta_face.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        s1[j] = f.ubar[j] + cs.lambda + f.q[j] * q1[j];
        M1[j] = f.dM[j] * s1[j];
        cs.theta_face[j] = M1[j];
    }
    cs.theta = GridField(base.grid(), detail::node_average(cs.theta_face));

    // second order: only the constant is kept
    std::vector<double> flux2(n);
    double k2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double p = f.dM[j] * (vbar[j] + 0.5 * q1[j] * q1[j]) + 0.5 * f.d2M[j] * s1[j] * s1[j];
        flux2[j] = M1[j] * q1[j] + p * f.q[j];
        k2 -= h * p;
    }
    std::vector<double> r2 = detail::divergence(flux2, h);
    const auto m1 = detail::node_average(M1);
    for (std::size_t i = 0; i < n; ++i) r2[i] = m1[i] - r2[i];
    const auto o2 = sys.solve(r2, k2);
    cs.mu = o2.c;
    cs.slack = std::max(cs.slack, std::abs(o2.zeta));

    if (opt.cross_check) {
        if (opt.check_eps.size() != 3) throw std::invalid_argument("solve_limit_corrector: three check rates required");
        std::array<double, 3> e{}, lam{};
        std::array<LinearizedSolution, 3> sols{
            solve_linearized_discounted(opt.check_eps[0], GridField(base.grid()), base, model, opt),
            solve_linearized_discounted(opt.check_eps[1], GridField(base.grid()), base, model, opt),
            solve_linearized_discounted(opt.check_eps[2], GridField(base.grid()), base, model, opt)};
        for (int k = 0; k < 3; ++k) {
            e[k] = opt.check_eps[k];
            lam[k] = e[k] * mean(sols[k].v);
        }
        RouteCheck rc;
        rc.tolerance = opt.route_tol;
        rc.lambda_direct = cs.lambda;
        rc.lambda_extrapolated = detail::extrapolate_to_zero(e, lam);
        std::array<GridField, 3> fl{fluctuation(sols[0].v), fluctuation(sols[1].v), fluctuation(sols[2].v)};
        for (std::size_t i = 0; i < n; ++i) {
            const double vx = detail::extrapolate_to_zero(e, {fl[0][i], fl[1][i], fl[2][i]});
            const double tx = detail::extrapolate_to_zero(e, {sols[0].theta[i], sols[1].theta[i], sols[2].theta[i]});
            rc.v_difference = std::max(rc.v_difference, std::abs(vx - cs.v[i]));
            rc.theta_difference = std::max(rc.theta_difference, std::abs(tx - cs.theta[i]));
        }
        const double worst = std::max({std::abs(rc.lambda_direct - rc.lambda_extrapolated), rc.v_difference,
                                        rc.theta_difference});
        rc.agree = worst <= rc.tolerance;
        if (worst > 10.0 * rc.tolerance) {
            throw InconsistentRoutes("solve_limit_corrector: direct and extrapolated correctors differ by " +
                                     std::to_string(worst));
        }
        cs.routes = rc;
    }
    return cs;
}

/// Residuals of the limit corrector equations on the staggered grid:
///   first:  sup_j |theta_j / M0'_j - (ubar_j + lambda + q0_j q(v)_j)|,
///   second: sup_i |Div[M0 q(v) + theta q0]_i + sigma Lap v_i - (m_i - 1)|,
///   mass:   |h sum theta_j|.
struct CorrectorResiduals {
    double first = 0.0;
    double second = 0.0;
    double mass = 0.0;
};

inline CorrectorResiduals corrector_residuals(const ErgodicTriple& base, const CorrectorSolution& cs,
                                              double sigma = 0.0) {
    const auto& f = base.faces;
    const std::size_t n = base.u.size();
    const double h = base.grid().h();
    const auto qv = detail::face_difference(cs.v.data(), h);
    CorrectorResiduals r;
    std::vector<double> flux(n);
    for (std::size_t j = 0; j < n; ++j) {
        r.first = std::max(r.first, std::abs(cs.theta_face[j] / f.dM[j] - (f.ubar[j] + cs.lambda + f.q[j] * qv[j])));
        flux[j] = f.M[j] * qv[j] + cs.theta_face[j] * f.q[j];
        r.mass += h * cs.theta_face[j];
    }
    r.mass = std::abs(r.mass);
    const auto d = detail::divergence(flux, h);
    for (std::size_t i = 0; i < n; ++i) {
        const double lap = (cs.v.at(static_cast<int>(i) + 1) - 2.0 * cs.v[i] + cs.v.at(static_cast<int>(i) - 1)) / (h * h);
        r.second = std::max(r.second, std::abs(d[i] + sigma * lap - (base.m[i] - 1.0)));
    }
    return r;
}

/// Least-squares slope of log y against log x; NaN when any y is not positive.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return std::numeric_limits<double>::quiet_NaN();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    const double d = static_cast<double>(n) * sxx - sx * sx;
    return (static_cast<double>(n) * sxy - sx * sy) / d;
}

struct ExpansionRow {
    double epsilon = 0.0;
    double e_u = 0.0;        ///< sup |u^eps + Hbar/eps - u - lambda|
    double e_m = 0.0;        ///< sup |m^eps - m|
    double e_2 = 0.0;        ///< sup |u^eps + Hbar/eps - u - lambda - eps (v + mu)|
    double e_2_gauge = 0.0;  ///< same with mu = 0
    double e_theta = 0.0;    ///< sup |m^eps - m - eps theta|
};

struct ExpansionTable {
    std::vector<ExpansionRow> rows;
    double slope_u = 0.0;
    double slope_m = 0.0;
    double slope_2 = 0.0;
    double slope_2_gauge = 0.0;
    double slope_theta = 0.0;
};

inline ExpansionTable verify_expansion(const std::vector<DiscountedSolution>& sweep, const ErgodicTriple& base,
                                       const CorrectorSolution& corr) {
    ExpansionTable t;
    std::vector<double> e, eu, em, e2, e2g, et;
    for (const auto& s : sweep) {
        require_same_grid(s.grid(), base.grid(), "verify_expansion");
        require_same_grid(s.grid(), corr.v.grid(), "verify_expansion");
        ExpansionRow r;
        r.epsilon = s.epsilon;
        const double offset = s.u_mean + base.hbar / s.epsilon;
        for (std::size_t i = 0; i < s.u.size(); ++i) {
            const double d = offset + s.u_fluct[i] - base.u[i] - corr.lambda;
            r.e_u = std::max(r.e_u, std::abs(d));
            r.e_2 = std::max(r.e_2, std::abs(d - s.epsilon * (corr.v[i] + corr.mu)));
            r.e_2_gauge = std::max(r.e_2_gauge, std::abs(d - s.epsilon * corr.v[i]));
            r.e_m = std::max(r.e_m, std::abs(s.m[i] - base.m[i]));
            r.e_theta = std::max(r.e_theta, std::abs(s.m[i] - base.m[i] - s.epsilon * corr.theta[i]));
        }
        t.rows.push_back(r);
        e.push_back(r.epsilon);
        eu.push_back(r.e_u);
        em.push_back(r.e_m);
        e2.push_back(r.e_2);
        e2g.push_back(r.e_2_gauge);
        et.push_back(r.e_theta);
    }
    t.slope_u = loglog_slope(e, eu);
    t.slope_m = loglog_slope(e, em);
    t.slope_2 = loglog_slope(e, e2);
    t.slope_2_gauge = loglog_slope(e, e2g);
    t.slope_theta = loglog_slope(e, et);
    return t;
}

}  // namespace mfgsel
