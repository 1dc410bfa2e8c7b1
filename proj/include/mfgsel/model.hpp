#pragma once

// Problem data: the monotone coupling g, the potential V, the regularization
// parameters, and the regularized inverse of g used to recover densities.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfgsel/errors.hpp"
#include "mfgsel/torus_grid.hpp"

namespace mfgsel {

/// Power-law coupling g(m) = kappa * m^alpha.
class Coupling {
public:
    Coupling() = default;
    Coupling(double kappa, double alpha) : kappa_(kappa), alpha_(alpha) {
        if (!(kappa > 0.0) || !(alpha > 0.0)) {
            throw std::invalid_argument("Coupling: kappa and alpha must be positive");
        }
    }

    static Coupling identity() { return Coupling(1.0, 1.0); }

    double kappa() const noexcept { return kappa_; }
    double alpha() const noexcept { return alpha_; }
    /// Lower-growth exponent of g' (g'(z) >= C z^beta).
    double beta() const noexcept { return alpha_ - 1.0; }

    double operator()(double m) const { return value(m); }
    double value(double m) const { return kappa_ * std::pow(m, alpha_); }
    double derivative(double m) const { return kappa_ * alpha_ * std::pow(m, alpha_ - 1.0); }
    double second_derivative(double m) const {
        return kappa_ * alpha_ * (alpha_ - 1.0) * std::pow(m, alpha_ - 2.0);
    }

    /// inf of g over (0, inf).
    double infimum() const noexcept { return 0.0; }

    /// g^{-1}(s), s > 0.
    double inverse(double s) const {
        if (!(s > 0.0)) throw DomainError("Coupling::inverse: argument outside the range of g");
        return alpha_ == 1.0 ? s / kappa_ : std::pow(s / kappa_, 1.0 / alpha_);
    }
    double inverse_derivative(double s) const { return inverse(s) / (alpha_ * s); }
    double inverse_second_derivative(double s) const {
        const double a = 1.0 / alpha_;
        return a * (a - 1.0) * inverse(s) / (s * s);
    }

private:
    double kappa_ = 1.0;
    double alpha_ = 1.0;
};

enum class PotentialKind { zero, sine, cos4pi, cos2pi, table };

inline std::string to_string(PotentialKind k) {
    switch (k) {
        case PotentialKind::zero: return "zero";
        case PotentialKind::sine: return "sine";
        case PotentialKind::cos4pi: return "cos4pi";
        case PotentialKind::cos2pi: return "cos2pi";
        case PotentialKind::table: return "table";
    }
    return "unknown";
}

inline PotentialKind potential_kind_from_string(const std::string& s) {
    if (s == "zero") return PotentialKind::zero;
    if (s == "sine") return PotentialKind::sine;
    if (s == "cos4pi") return PotentialKind::cos4pi;
    if (s == "cos2pi") return PotentialKind::cos2pi;
    if (s == "table") return PotentialKind::table;
    throw std::invalid_argument("unknown potential kind '" + s + "'");
}

/// One-dimensional periodic potential. Closed forms are evaluated exactly; a
/// table is interpolated linearly between equispaced samples on [0,1).
class Potential {
public:
    Potential() = default;

    static Potential zero() { return Potential(PotentialKind::zero, 0.0, {}); }
    static Potential sine(double c) { return Potential(PotentialKind::sine, c, {}); }
    static Potential cos4pi() { return Potential(PotentialKind::cos4pi, 0.0, {}); }
    static Potential cos2pi() { return Potential(PotentialKind::cos2pi, 0.0, {}); }
    static Potential table(std::vector<double> samples) {
        if (samples.empty()) throw std::invalid_argument("Potential::table: no samples");
        return Potential(PotentialKind::table, 0.0, std::move(samples));
    }

    PotentialKind kind() const noexcept { return kind_; }
    double amplitude() const noexcept { return c_; }
    const std::vector<double>& table_values() const noexcept { return table_; }

    double operator()(double x) const { return value(x); }

    double value(double x) const {
        using std::numbers::pi;
        switch (kind_) {
            case PotentialKind::zero: return 0.0;
            case PotentialKind::sine: return c_ * std::sin(2.0 * pi * x);
            case PotentialKind::cos4pi: return pi * std::cos(4.0 * pi * x);
            case PotentialKind::cos2pi: return pi * std::cos(2.0 * pi * x);
            case PotentialKind::table: {
                const auto [k, t] = locate(x);
                const std::size_t n = table_.size();
                return (1.0 - t) * table_[k] + t * table_[(k + 1) % n];
            }
        }
        return 0.0;
    }

    double derivative(double x) const {
        using std::numbers::pi;
        switch (kind_) {
            case PotentialKind::zero: return 0.0;
            case PotentialKind::sine: return 2.0 * pi * c_ * std::cos(2.0 * pi * x);
            case PotentialKind::cos4pi: return -4.0 * pi * pi * std::sin(4.0 * pi * x);
            case PotentialKind::cos2pi: return -2.0 * pi * pi * std::sin(2.0 * pi * x);
            case PotentialKind::table: {
                const auto [k, t] = locate(x);
                const std::size_t n = table_.size();
                return (table_[(k + 1) % n] - table_[k]) * static_cast<double>(n);
            }
        }
        return 0.0;
    }

    GridField sample(const TorusGrid& grid) const {
        if (grid.dim() != 1) throw std::invalid_argument("Potential::sample: 1D grids only");
        return GridField::sample(grid, [this](double x) { return value(x); });
    }

private:
    Potential(PotentialKind k, double c, std::vector<double> t)
        : kind_(k), c_(c), table_(std::move(t)) {}

    std::pair<std::size_t, double> locate(double x) const {
        const double n = static_cast<double>(table_.size());
        double y = (x - std::floor(x)) * n;
        auto k = static_cast<std::size_t>(std::floor(y));
        if (k >= table_.size()) k = 0;
        return {k, y - std::floor(y)};
    }

    PotentialKind kind_ = PotentialKind::zero;
    double c_ = 0.0;
    std::vector<double> table_;
};

struct Regularization {
    double sigma = 0.0;  ///< artificial viscosity
    double delta = 0.0;  ///< width of the positive extension of g^{-1}

    void validate() const {
        if (!(sigma >= 0.0) || !(delta >= 0.0)) {
            throw std::invalid_argument("Regularization: sigma and delta must be non-negative");
        }
    }
};

struct Model {
    Coupling coupling;
    Potential potential;
};

/// How an inverse with delta = 0 treats arguments at or below inf g.
enum class BelowRange {
    raise,         ///< DomainError
    positive_part  ///< (g^{-1}(s))^+ = 0, used for oracle evaluation of weak solutions
};

/// g^{-1} extended below g(delta) by the C^1 tail
///   r(s) = t0 * exp((s - t0) / t0),  t0 = g(delta),
/// so that ghat^{-1}(s) = g^{-1}(r(s)) is positive, increasing, equal to
/// g^{-1}(s) for s >= g(delta), and tends to (g^{-1}(s))^+ as delta -> 0.
class SmoothedInverse {
public:
    SmoothedInverse(const Coupling& g, double delta, BelowRange below = BelowRange::raise)
        : g_(g), delta_(delta), t0_(delta > 0.0 ? g.value(delta) : 0.0), below_(below) {
        if (!(delta >= 0.0)) throw std::invalid_argument("SmoothedInverse: delta must be >= 0");
    }

    const Coupling& coupling() const noexcept { return g_; }
    double delta() const noexcept { return delta_; }
    /// Switch point g(delta) of the tail.
    double threshold() const noexcept { return t0_; }

    struct Jet {
        double value;
        double d1;
        double d2;
    };

    double operator()(double s) const { return jet(s).value; }
    double derivative(double s) const { return jet(s).d1; }

    Jet jet(double s) const {
        if (delta_ == 0.0) {
            if (!(s > g_.infimum())) {
                if (below_ == BelowRange::positive_part) return {0.0, 0.0, 0.0};
                throw DomainError("smoothed_inverse: argument " + std::to_string(s) +
                                  " below the range of g with delta = 0");
            }
            return {g_.inverse(s), g_.inverse_derivative(s), g_.inverse_second_derivative(s)};
        }
        if (s >= t0_) {
            return {g_.inverse(s), g_.inverse_derivative(s), g_.inverse_second_derivative(s)};
        }
        const double r = t0_ * std::exp((s - t0_) / t0_);
        if (r == 0.0) return {0.0, 0.0, 0.0};
        const double dr = r / t0_;
        const double d2r = dr / t0_;
        const double gi1 = g_.inverse_derivative(r);
        return {g_.inverse(r), gi1 * dr, g_.inverse_second_derivative(r) * dr * dr + gi1 * d2r};
    }

private:
    Coupling g_;
    double delta_;
    double t0_;
    BelowRange below_;
};

inline double smoothed_inverse(double s, const Coupling& g, double delta) {
    return SmoothedInverse(g, delta)(s);
}

/// g^{-1}(g(1) - osc V) > 0, i.e. g(1) - osc V lies above inf g.
inline bool check_assumption_osc(const Coupling& g, const GridField& potential_samples) {
    return g.value(1.0) - norms(potential_samples).oscillation > g.infimum();
}

inline bool check_assumption_osc(const Coupling& g, const Potential& v, int n = 4096) {
    return check_assumption_osc(g, v.sample(TorusGrid::line(n)));
}

}  // namespace mfgsel
