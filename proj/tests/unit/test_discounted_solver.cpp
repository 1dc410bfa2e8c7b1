#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "mfgsel/closed_form.hpp"
#include "mfgsel/discounted_solver.hpp"
#include "mfgsel/invariants.hpp"

using namespace mfgsel;
using Catch::Matchers::WithinAbs;
using std::numbers::pi;

namespace {

const Model flat{Coupling::identity(), Potential::zero()};
const Model smooth{Coupling::identity(), Potential::sine(0.3)};

GridField random_u(const TorusGrid& g, unsigned seed, double offset, double amp) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(-amp, amp);
    std::vector<double> v(g.size());
    for (auto& x : v) x = offset + d(rng);
    return GridField(g, v);
}

// Random low-mode trigonometric start.
GridField random_trig_u(const TorusGrid& g, unsigned seed, double offset, double amp) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(-amp, amp);
    GridField u(g, offset);
    for (int k = 1; k <= 4; ++k) {
        const double a = d(rng), b = d(rng);
        u += GridField::sample(g, [&](double x) { return a * std::cos(2 * pi * k * x) + b * std::sin(2 * pi * k * x); });
    }
    return u;
}

// Independent evaluation of the staggered residual straight from its definition.
std::vector<double> direct_residual(const GridField& u, double eps, const Model& model, const Regularization& reg) {
    const int n = u.grid().n();
    const double h = u.grid().h();
    const SmoothedInverse ginv(model.coupling, reg.delta);
    std::vector<double> flux(n), dens(n);
    for (int j = 0; j < n; ++j) {
        const double q = (u.at(j + 1) - u.at(j)) / h;
        const double ubar = 0.5 * (u.at(j + 1) + u.at(j));
        const double M = ginv(eps * ubar + 0.5 * q * q + model.potential.value((j + 0.5) * h));
        flux[j] = M * q;
        dens[j] = M;
    }
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) {
        const int l = (i + n - 1) % n;
        r[i] = (flux[i] - flux[l]) / h + reg.sigma * (u.at(i + 1) - 2 * u.at(i) + u.at(i - 1)) / (h * h) -
               eps * (0.5 * (dens[i] + dens[l]) - 1.0);
    }
    return r;
}

}  // namespace

TEST_CASE("residual") {
    const auto g = TorusGrid::line(64);
    SECTION("vanishes at the base point") {
        CHECK(norms(residual(GridField(g, 1.0 / 0.3), 0.3, 0.0, smooth, {})).sup == 0.0);
    }
    SECTION("constants are sign-definite away from g(1)/eps") {
        const double eps = 0.5;
        for (double c : {0.5, 1.9, 2.1, 4.0}) {
            const auto r = residual(GridField(g, c), eps, 1.0, flat, {});
            for (std::size_t i = 0; i < r.size(); ++i) CHECK_THAT(r[i], WithinAbs(-eps * (eps * c - 1.0), 1e-13));
        }
        CHECK(norms(residual(GridField(g, 2.0), eps, 1.0, flat, {})).sup == 0.0);
    }
    SECTION("matches a direct evaluation") {
        const Regularization reg{0.01, 0.05};
        const Model m{Coupling(1.0, 2.0), Potential::sine(0.4)};
        const auto u = random_u(g, 7, 10.0, 0.05);
        const auto r = residual(u, 0.2, 1.0, m, reg);
        const auto d = direct_residual(u, 0.2, m, reg);
        for (std::size_t i = 0; i < r.size(); ++i) CHECK_THAT(r[i], WithinAbs(d[i], 1e-12 * (1.0 + std::abs(d[i]))));
    }
    SECTION("domain errors without smoothing") {
        CHECK_THROWS_AS(residual(GridField(g, -1.0), 0.5, 1.0, flat, {}), DomainError);
    }
}

TEST_CASE("jacobian") {
    const auto g = TorusGrid::line(32);
    SECTION("finite differences at random states") {
        for (const Model& m : {smooth, Model{Coupling(2.0, 1.7), Potential::cos4pi()}}) {
            const auto u = random_u(g, 3, 40.0, 0.02);
            CHECK(jacobian_fd_mismatch(u, 0.5, 1.0, m, {}) <= 1e-6);
            CHECK(jacobian_fd_mismatch(u, 0.5, 0.6, m, {0.02, 0.1}) <= 1e-6);
        }
    }
    SECTION("row sums on constants") {
        const double eps = 0.3;
        const auto J = Eigen::MatrixXd(assemble_jacobian(GridField(g, 1.0 / eps), eps, 1.0, flat, {}).matrix);
        for (int i = 0; i < J.rows(); ++i) CHECK_THAT(J.row(i).sum(), WithinAbs(-eps * eps, 1e-12));
    }
    SECTION("symmetric tridiagonal with periodic corners") {
        const auto u = random_u(g, 5, 40.0, 0.02);
        const auto J = Eigen::MatrixXd(assemble_jacobian(u, 0.5, 1.0, smooth, {0.01, 0.0}).matrix);
        CHECK((J - J.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * J.cwiseAbs().maxCoeff());
        for (int i = 0; i < 32; ++i) {
            for (int k = 0; k < 32; ++k) {
                const int d = std::min((i - k + 32) % 32, (k - i + 32) % 32);
                if (d > 1) CHECK(J(i, k) == 0.0);
            }
        }
    }
    SECTION("diffusion bounded below in the smooth regime") {
        const auto s = continuation_solve(0.1, smooth, {}, TorusGrid::line(256));
        const auto op = assemble_jacobian(s.u, 0.1, 1.0, smooth, {});
        CHECK(op.min_diffusion() >= s.m.min() * 0.99);
        CHECK(op.min_diffusion() > 0.0);
    }
}

TEST_CASE("newton on the constant problem") {
    const auto s = newton_solve(0.5, 1.0, flat, {}, GridField(TorusGrid::line(64)));
    CHECK(s.newton_iters <= 3);
    for (std::size_t i = 0; i < s.u.size(); ++i) {
        CHECK_THAT(s.u[i], WithinAbs(2.0, 1e-12));
        CHECK_THAT(s.m[i], WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("smooth regime solve and invariants") {
    const double eps = 0.1;
    const auto g = TorusGrid::line(512);
    const double h2 = g.h() * g.h();
    const auto s = continuation_solve(eps, smooth, {}, g);
    CHECK(s.residual_sup <= std::max(1e-10, s.residual_floor));
    CHECK(s.m.min() >= 0.4 - 1e-3);
    CHECK(mass_defect(s) <= 10 * 1e-10 / eps);
    CHECK(discount_bounds(s, smooth).holds(1e-10));
    CHECK(energy_identity_residual(s, smooth) <= 5 * h2);
    CHECK(density_formula_residual(s, smooth) <= 5 * h2);

    const auto m = recover_density(s.u, eps, smooth, {});
    CHECK(sup_distance(m, s.m) <= 1e-10);

    SECTION("independent starts agree") {
        const auto a = newton_solve(eps, 1.0, smooth, {}, random_trig_u(g, 11, 10.0, 0.1));
        const auto b = newton_solve(eps, 1.0, smooth, {}, random_trig_u(g, 12, 13.0, 0.1));
        CHECK(sup_distance(a.u_fluct, b.u_fluct) <= 1e-8);
        CHECK(sup_distance(a.m, b.m) <= 1e-8);
        CHECK(std::abs(lasry_lions(a, b, smooth)) <= 1e-8);
    }
}

TEST_CASE("monotonicity quantity separates distinct solutions") {
    const auto g = TorusGrid::line(128);
    const auto a = continuation_solve(0.1, smooth, {}, g);
    const auto b = continuation_solve(0.1, Model{Coupling::identity(), Potential::sine(0.2)}, {}, g);
    CHECK(lasry_lions(a, b, smooth) > 1e-4);
}

TEST_CASE("continuation") {
    const auto g = TorusGrid::line(256);
    SECTION("flat potential is a single step") {
        const auto s = continuation_solve(0.2, flat, {}, g);
        CHECK(s.continuation_steps == 1);
        CHECK_THAT(s.u.max(), WithinAbs(5.0, 1e-12));
    }
    SECTION("oscillating potential with regularization") {
        const Model ex{Coupling::identity(), Potential::cos2pi()};
        const auto s = continuation_solve(0.1, ex, {0.05, 0.05}, g);
        CHECK(s.residual_sup <= std::max(1e-10, s.residual_floor));
        CHECK(s.m.min() > 0.0);
        CHECK(mass_defect(s) <= 1e-8);
    }
    SECTION("oscillating potential without regularization degenerates but converges") {
        const Model ex{Coupling::identity(), Potential::cos2pi()};
        const auto s = continuation_solve(0.1, ex, {}, g);
        CHECK(s.m.min() < 1e-2);
        CHECK(mass_defect(s) <= 1e-8);
    }
    SECTION("impossible budgets stall") {
        SolverOptions opt;
        opt.max_iters = 1;
        opt.initial_step = 1.0;
        opt.min_step = 0.25;
        const Model ex{Coupling::identity(), Potential::cos2pi()};
        CHECK_THROWS_AS(continuation_solve(0.05, ex, {}, TorusGrid::line(512), opt), ContinuationStalled);
    }
}

TEST_CASE("newton reports failure") {
    SolverOptions opt;
    opt.max_iters = 2;
    const Model ex{Coupling::identity(), Potential::cos2pi()};
    const auto g = TorusGrid::line(256);
    CHECK_THROWS_AS(newton_solve(0.05, 1.0, ex, {}, GridField(g), opt), NonConvergence);
}

TEST_CASE("density recovery") {
    const auto g = TorusGrid::line(64);
    CHECK(sup_distance(recover_density(GridField(g, 1.0 / 0.4), 0.4, flat, {}), GridField(g, 1.0)) <= 1e-14);

    SECTION("closed-form ergodic data") {
        const auto g2 = TorusGrid::line(2048);
        const auto ex = example_bbb(g2);
        const auto m = recover_density(ex.candidate("hat").u, 0.0, ex.model, {}, BelowRange::positive_part, 0.0);
        CHECK(m.min() >= 0.0);
        CHECK(norms(m - ex.m).l1 <= 10 * g2.h());
        // faces sample V at midpoints, node averaging costs sup|V''| h^2 / 8
        const double bound = 2 * std::pow(pi, 3) * g2.h() * g2.h() + 1e-12;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (ex.m[i] > 0.1) CHECK_THAT(m[i], WithinAbs(ex.m[i], bound));
        }
    }
    SECTION("smoothing keeps the density positive") {
        const Model ex{Coupling::identity(), Potential::cos2pi()};
        const auto m = recover_density(GridField(g, -20.0), 0.1, ex, {0.0, 0.05});
        CHECK(m.min() > 0.0);
    }
}

TEST_CASE("ladders") {
    const auto g = TorusGrid::line(128);
    CHECK_THROWS_AS(solve_ladder({0.1, 0.2}, smooth, g, fixed_schedule({})), std::invalid_argument);
    const auto rungs = solve_ladder({0.2, 0.1, 0.05}, smooth, g, power_schedule(1.0, 1.0, 0.0, 1.0));
    REQUIRE(rungs.size() == 3);
    for (const auto& r : rungs) {
        REQUIRE(r.solution);
        CHECK(r.failure.empty());
        CHECK_THAT(r.solution->reg.sigma, WithinAbs(r.epsilon, 1e-15));
    }
}
