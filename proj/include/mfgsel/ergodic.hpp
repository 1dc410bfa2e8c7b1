#pragma once

// Ergodic limit: the triple (u, m, Hbar) of the eps = 0 system on the same
// staggered grid as the discounted solver.

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "mfgsel/errors.hpp"
#include "mfgsel/model.hpp"
#include "mfgsel/scheme.hpp"
#include "mfgsel/torus_grid.hpp"

namespace mfgsel {

struct ErgodicTriple {
    GridField u;          ///< normalized so that its integral vanishes
    GridField m;          ///< node density
    double hbar = 0.0;
    FaceValues faces;     ///< face gradient, density and inverse-coupling jets
    double residual_sup = 0.0;

    const TorusGrid& grid() const noexcept { return u.grid(); }

    /// Builds a base from given node fields: face densities are averages of
    /// node densities and the face argument is s0 = g(M), so the jets of
    /// g^{-1} match g exactly. u is renormalized to zero mean.
    static ErgodicTriple from_fields(const GridField& u, const GridField& m, double hbar,
                                     const Coupling& g) {
        require_same_grid(u.grid(), m.grid(), "ErgodicTriple::from_fields");
        if (u.grid().dim() != 1) throw std::invalid_argument("ErgodicTriple: 1D grids only");
        const std::size_t n = u.size();
        const double h = u.grid().h();
        ErgodicTriple t{fluctuation(u), m, hbar, {}, 0.0};
        FaceValues& f = t.faces;
        f.x.resize(n);
        f.q.resize(n);
        f.ubar.resize(n);
        f.s.resize(n);
        f.M.resize(n);
        f.dM.resize(n);
        f.d2M.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t k = (j + 1) % n;
            f.x[j] = (static_cast<double>(j) + 0.5) * h;
            f.q[j] = (t.u[k] - t.u[j]) / h;
            f.ubar[j] = 0.5 * (t.u[j] + t.u[k]);
            f.M[j] = 0.5 * (m[j] + m[k]);
            if (f.M[j] > 0.0) {
                f.s[j] = g.value(f.M[j]);
                f.dM[j] = g.inverse_derivative(f.s[j]);
                f.d2M[j] = g.inverse_second_derivative(f.s[j]);
            } else {
                f.s[j] = 0.0;
                f.dM[j] = 0.0;
                f.d2M[j] = 0.0;
            }
        }
        return t;
    }
};

/// Discrete ergodic problem on a line. The flux (M + sigma) q is constant
/// across faces and its periodic sum vanishes, so the fluctuation is zero and
/// Hbar is fixed by the mass condition h * sum M_j(V_j - Hbar) = 1.
/// With delta = 0 the density is the positive part of g^{-1}.
inline ErgodicTriple solve_ergodic(const Model& model, const TorusGrid& grid,
                                   const Regularization& reg = {}, double tol = 1e-14) {
    const BelowRange below = reg.delta > 0.0 ? BelowRange::raise : BelowRange::positive_part;
    const Scheme sch(grid, model, reg, below);
    const std::vector<double> w(grid.size(), 0.0);
    const auto& v = sch.face_potential();
    const double vmin = *std::min_element(v.begin(), v.end());
    const double vmax = *std::max_element(v.begin(), v.end());
    const double g1 = model.coupling.value(1.0);

    auto mass_defect = [&](double hb) {
        const FaceValues f = sch.faces(0.0, w, 0.0, -hb, 1.0);
        double s = 0.0;
        for (double M : f.M) s += M;
        return s * grid.h() - 1.0;
    };
    // below lo every face density exceeds 1, above hi none does
    double lo = vmin - g1;
    double hi = vmax - g1;
    if (hi - lo < 1e-300) {
        lo -= 1.0;
        hi += 1.0;
    }
    std::uintmax_t iters = 200;
    const auto tolf = [tol](double a, double b) { return std::abs(b - a) <= tol * (1.0 + std::abs(a)); };
    const auto [a, b] = boost::math::tools::toms748_solve(mass_defect, lo, hi, tolf, iters);
    const double hbar = 0.5 * (a + b);

    ErgodicTriple t{GridField(grid), GridField(grid), hbar, sch.faces(0.0, w, 0.0, -hbar, 1.0), 0.0};
    t.m = GridField(grid, sch.node_density(t.faces));
    t.residual_sup = sup_abs(sch.residual(t.faces, w, 0.0));
    return t;
}

}  // namespace mfgsel
