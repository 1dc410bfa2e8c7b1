#pragma once

// Staggered discretization of the reduced equation on a periodic line.
//
// Face j sits between nodes j and j+1. With q_j = (u_{j+1} - u_j)/h and
// ubar_j = (u_j + u_{j+1})/2 the face density is
//   M_j = ghat^{-1}(eps*ubar_j + shift + q_j^2/2 + lam*V(x_{j+1/2})),
// the node density is m_i = (M_{i-1} + M_i)/2 and the node residual is
//   R_i = (M_i q_i - M_{i-1} q_{i-1})/h + sigma*(u_{i+1} - 2u_i + u_{i-1})/h^2
//         - eps_mass*(m_i - 1).
// The discounted problem uses shift = 0 and eps_mass = eps; the ergodic one
// uses eps = eps_mass = 0 and shift = -Hbar. The Jacobian is symmetric and
// cyclic tridiagonal.
//
// u is carried as a scalar offset c plus a fluctuation w. Only w enters the
// differences, which keeps rounding in q at the level of w rather than c.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Sparse>

#include "mfgsel/model.hpp"
#include "mfgsel/torus_grid.hpp"

namespace mfgsel {

/// Face-centred quantities of one state.
struct FaceValues {
    std::vector<double> x;     ///< face coordinates (j + 1/2) h
    std::vector<double> q;     ///< one-sided gradient
    std::vector<double> ubar;  ///< face average of the fluctuation w
    std::vector<double> s;     ///< argument of ghat^{-1}
    std::vector<double> M;     ///< face density
    std::vector<double> dM;    ///< d M / d s
    std::vector<double> d2M;   ///< d^2 M / d s^2

    std::size_t size() const noexcept { return M.size(); }
};

/// Discrete problem data shared by every evaluation on one grid.
class Scheme {
public:
    Scheme(const TorusGrid& grid, const Model& model, const Regularization& reg,
           BelowRange below = BelowRange::raise)
        : grid_(grid), model_(model), reg_(reg), inv_(model.coupling, reg.delta, below) {
        if (grid.dim() != 1) throw std::invalid_argument("Scheme: only 1D grids are solved");
        reg.validate();
        const int n = grid.n();
        face_x_.resize(static_cast<std::size_t>(n));
        face_v_.resize(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            face_x_[j] = (j + 0.5) * grid.h();
            face_v_[j] = model.potential.value(face_x_[j]);
        }
    }

    const TorusGrid& grid() const noexcept { return grid_; }
    const Model& model() const noexcept { return model_; }
    const Regularization& regularization() const noexcept { return reg_; }
    const SmoothedInverse& inverse() const noexcept { return inv_; }
    const std::vector<double>& face_potential() const noexcept { return face_v_; }
    const std::vector<double>& face_coordinates() const noexcept { return face_x_; }

    /// Face quantities for u = c + w.
    FaceValues faces(double c, const std::vector<double>& w, double eps, double shift,
                     double lam) const {
        const std::size_t n = w.size();
        const double h = grid_.h();
        const double base = eps * c + shift;
        FaceValues f;
        f.x = face_x_;
        f.q.resize(n);
        f.ubar.resize(n);
        f.s.resize(n);
        f.M.resize(n);
        f.dM.resize(n);
        f.d2M.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double a = w[j];
            const double b = w[(j + 1) % n];
            f.q[j] = (b - a) / h;
            f.ubar[j] = 0.5 * (a + b);
            f.s[j] = base + eps * f.ubar[j] + 0.5 * f.q[j] * f.q[j] + lam * face_v_[j];
            const auto jet = inv_.jet(f.s[j]);
            f.M[j] = jet.value;
            f.dM[j] = jet.d1;
            f.d2M[j] = jet.d2;
        }
        return f;
    }

    std::vector<double> node_density(const FaceValues& f) const {
        const std::size_t n = f.size();
        std::vector<double> m(n);
        for (std::size_t i = 0; i < n; ++i) m[i] = 0.5 * (f.M[(i + n - 1) % n] + f.M[i]);
        return m;
    }

    std::vector<double> residual(const FaceValues& f, const std::vector<double>& w,
                                 double eps_mass) const {
        const std::size_t n = w.size();
        const double h = grid_.h();
        const double sh2 = reg_.sigma / (h * h);
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t l = (i + n - 1) % n;
            const std::size_t rr = (i + 1) % n;
            const double flux = (f.M[i] * f.q[i] - f.M[l] * f.q[l]) / h;
            const double visc = sh2 * (w[rr] - 2.0 * w[i] + w[l]);
            const double m = 0.5 * (f.M[l] + f.M[i]);
            r[i] = flux + visc - eps_mass * (m - 1.0);
        }
        return r;
    }

    /// d R / d w at the state that produced f. eps is the discount entering
    /// the face argument; eps_mass the zeroth-order coefficient.
    Eigen::SparseMatrix<double> jacobian(const FaceValues& f, double eps, double eps_mass) const {
        const int n = static_cast<int>(f.size());
        const double h = grid_.h();
        const double sh2 = reg_.sigma / (h * h);
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(static_cast<std::size_t>(6 * n));
        for (int j = 0; j < n; ++j) {
            const int a = j;
            const int b = (j + 1) % n;
            const double q = f.q[j];
            const double dsa = 0.5 * eps - q / h;
            const double dsb = 0.5 * eps + q / h;
            const double dFa = -f.M[j] / h + f.dM[j] * dsa * q;
            const double dFb = f.M[j] / h + f.dM[j] * dsb * q;
            const double dMa = f.dM[j] * dsa;
            const double dMb = f.dM[j] * dsb;
            // face j enters row a with +F_j/h and row b with -F_j/h;
            // both rows carry -eps_mass * M_j / 2
            t.emplace_back(a, a, dFa / h - 0.5 * eps_mass * dMa);
            t.emplace_back(a, b, dFb / h - 0.5 * eps_mass * dMb);
            t.emplace_back(b, a, -dFa / h - 0.5 * eps_mass * dMa);
            t.emplace_back(b, b, -dFb / h - 0.5 * eps_mass * dMb);
            // viscosity on face j: sigma*(w_b - w_a)/h^2 into row a, minus into row b
            t.emplace_back(a, a, -sh2);
            t.emplace_back(a, b, sh2);
            t.emplace_back(b, a, sh2);
            t.emplace_back(b, b, -sh2);
        }
        Eigen::SparseMatrix<double> J(n, n);
        J.setFromTriplets(t.begin(), t.end());
        return J;
    }

    /// Size of the residual change caused by rounding w, q and the fluxes.
    double rounding_floor(const FaceValues& f, const std::vector<double>& w, double eps) const {
        const double h = grid_.h();
        double wmax = 0.0, amax = 0.0, fmax = 0.0, dmax = 0.0, mmax = 0.0;
        for (double v : w) wmax = std::max(wmax, std::abs(v));
        for (std::size_t j = 0; j < f.size(); ++j) {
            amax = std::max(amax, f.M[j] + f.dM[j] * f.q[j] * f.q[j]);
            fmax = std::max(fmax, std::abs(f.M[j] * f.q[j]));
            dmax = std::max(dmax, f.dM[j]);
            mmax = std::max(mmax, f.M[j]);
        }
        const double u = std::numeric_limits<double>::epsilon();
        const double stencil = 4.0 * (amax + reg_.sigma) / (h * h) + eps * eps * dmax;
        return 8.0 * u * (stencil * (wmax + 1.0) + 2.0 * fmax / h + eps * mmax + 1.0);
    }

private:
    TorusGrid grid_;
    Model model_;
    Regularization reg_;
    SmoothedInverse inv_;
    std::vector<double> face_x_;
    std::vector<double> face_v_;
};

/// Splits u into its mean and fluctuation.
inline std::pair<double, std::vector<double>> split_offset(const GridField& u) {
    const double c = mean(u);
    std::vector<double> w(u.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = u[i] - c;
    return {c, w};
}

inline double sup_abs(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

}  // namespace mfgsel
