#pragma once

// Command-line front end: configuration (JSON file plus flag overrides),
// command dispatch, and the exit-code contract
//   0 success, 1 solver failure (partial outputs kept), 2 usage error.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfgsel/closed_form.hpp"
#include "mfgsel/corrector.hpp"
#include "mfgsel/discounted_solver.hpp"
#include "mfgsel/ergodic.hpp"
#include "mfgsel/errors.hpp"
#include "mfgsel/invariants.hpp"
#include "mfgsel/io.hpp"
#include "mfgsel/model.hpp"
#include "mfgsel/selection.hpp"

namespace mfgsel::cli {

inline constexpr const char* version = "1.0.0";

struct RunConfig {
    std::string command;
    // model
    std::string potential = "sine";
    double c = 0.3;
    double alpha = 1.0;
    double kappa = 1.0;
    // grid
    int n = 512;
    // solver
    double epsilon = 0.1;
    double sigma = 0.0;
    double delta = 0.0;
    double tol = 1e-10;
    int max_iters = 50;
    // ladders
    std::vector<double> ladder{0.2, 0.1, 0.05, 0.025};
    double sigma_scale = 0.0;
    double sigma_power = 1.0;
    double delta_scale = 1.0;
    double delta_power = 1.0;
    // command specific
    std::string example;   ///< example: bbb | exlp
    std::string base;      ///< corrector: model config file of the base
    std::filesystem::path out = "out";
    std::optional<std::filesystem::path> config_file;
    std::vector<std::string> overrides;  ///< keys given both in the file and as flags

    Model model() const {
        const PotentialKind k = potential_kind_from_string(potential);
        Potential v;
        switch (k) {
            case PotentialKind::zero: v = Potential::zero(); break;
            case PotentialKind::sine: v = Potential::sine(c); break;
            case PotentialKind::cos4pi: v = Potential::cos4pi(); break;
            case PotentialKind::cos2pi: v = Potential::cos2pi(); break;
            case PotentialKind::table: throw UsageError("table potentials are not available from the command line");
        }
        return Model{Coupling(kappa, alpha), v};
    }

    TorusGrid grid() const { return TorusGrid::line(n); }

    SolverOptions solver() const {
        SolverOptions o;
        o.tol_abs = tol;
        o.max_iters = max_iters;
        return o;
    }

    Schedule schedule() const { return power_schedule(sigma_scale, sigma_power, delta_scale, delta_power); }
};

inline io::json to_json(const RunConfig& c) {
    io::json j;
    j["command"] = c.command;
    j["model"] = {{"potential", c.potential}, {"c", c.c}, {"alpha", c.alpha}, {"kappa", c.kappa}};
    j["grid"] = {{"n", c.n}};
    j["solver"] = {{"epsilon", c.epsilon}, {"sigma", c.sigma}, {"delta", c.delta},
                   {"tol", c.tol},         {"max_iters", c.max_iters}};
    j["ladder"] = {{"eps", c.ladder},
                   {"sigma_scale", c.sigma_scale},
                   {"sigma_power", c.sigma_power},
                   {"delta_scale", c.delta_scale},
                   {"delta_power", c.delta_power}};
    if (!c.example.empty()) j["example"] = c.example;
    if (!c.base.empty()) j["base"] = c.base;
    j["out"] = c.out.string();
    return j;
}

namespace detail {

inline std::string canonical_potential(const std::string& s) {
    if (s == "exdp" || s == "exlp") return "cos2pi";
    if (s == "bbb") return "cos4pi";
    try {
        return to_string(potential_kind_from_string(s));
    } catch (const std::exception&) {
        throw UsageError("unknown potential '" + s + "'");
    }
}

inline std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("bad number '" + item + "' in list '" + s + "'");
        }
    }
    if (out.empty()) throw UsageError("empty list");
    return out;
}

template <class T>
void take(const io::json& j, const char* block, const char* key, T& dst) {
    if (!j.contains(block)) return;
    const auto& b = j.at(block);
    if (!b.is_object() || !b.contains(key)) return;
    try {
        dst = b.at(key).get<T>();
    } catch (const io::json::exception& e) {
        throw UsageError(std::string(block) + "." + key + ": " + e.what());
    }
}

inline void apply_file(const io::json& j, RunConfig& c) {
    if (!j.is_object()) throw UsageError("config file must hold a JSON object");
    take(j, "model", "potential", c.potential);
    take(j, "model", "c", c.c);
    take(j, "model", "alpha", c.alpha);
    take(j, "model", "kappa", c.kappa);
    take(j, "grid", "n", c.n);
    take(j, "solver", "epsilon", c.epsilon);
    take(j, "solver", "sigma", c.sigma);
    take(j, "solver", "delta", c.delta);
    take(j, "solver", "tol", c.tol);
    take(j, "solver", "max_iters", c.max_iters);
    take(j, "ladder", "eps", c.ladder);
    take(j, "ladder", "sigma_scale", c.sigma_scale);
    take(j, "ladder", "sigma_power", c.sigma_power);
    take(j, "ladder", "delta_scale", c.delta_scale);
    take(j, "ladder", "delta_power", c.delta_power);
    if (j.contains("out") && j["out"].is_string()) c.out = j["out"].get<std::string>();
    c.potential = canonical_potential(c.potential);
}

/// Key of the file entry each flag overrides.
inline const std::map<std::string, std::pair<const char*, const char*>>& flag_keys() {
    static const std::map<std::string, std::pair<const char*, const char*>> k{
        {"potential", {"model", "potential"}}, {"c", {"model", "c"}},
        {"alpha", {"model", "alpha"}},         {"kappa", {"model", "kappa"}},
        {"n", {"grid", "n"}},                  {"epsilon", {"solver", "epsilon"}},
        {"sigma", {"solver", "sigma"}},        {"delta", {"solver", "delta"}},
        {"tol", {"solver", "tol"}},            {"max-iters", {"solver", "max_iters"}},
        {"eps-ladder", {"ladder", "eps"}},     {"sigma-scale", {"ladder", "sigma_scale"}},
        {"sigma-power", {"ladder", "sigma_power"}}, {"delta-scale", {"ladder", "delta_scale"}},
        {"delta-power", {"ladder", "delta_power"}}};
    return k;
}

inline void validate(const RunConfig& c) {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) throw UsageError(std::string(what) + " must be positive");
    };
    auto nonneg = [](double v, const char* what) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw UsageError(std::string(what) + " must be non-negative");
    };
    positive(c.epsilon, "epsilon");
    positive(c.alpha, "alpha");
    positive(c.kappa, "kappa");
    positive(c.tol, "tol");
    nonneg(c.sigma, "sigma");
    nonneg(c.delta, "delta");
    nonneg(c.sigma_scale, "sigma-scale");
    nonneg(c.delta_scale, "delta-scale");
    if (!std::isfinite(c.c)) throw UsageError("c must be finite");
    if (c.n < 4) throw UsageError("n must be at least 4");
    if (c.max_iters < 1) throw UsageError("max-iters must be positive");
    for (std::size_t k = 0; k < c.ladder.size(); ++k) {
        positive(c.ladder[k], "ladder entries");
        if (k && !(c.ladder[k] < c.ladder[k - 1])) throw UsageError("ladder must be strictly decreasing");
    }
    if (c.command == "example" && c.example != "bbb" && c.example != "exlp" && c.example != "exdp") {
        throw UsageError("example expects bbb or exlp");
    }
    if (c.command == "corrector" && c.base.empty()) throw UsageError("corrector needs --base");
}

}  // namespace detail

/// Thrown after help or version output has been printed.
struct EarlyExit {
    int code = 0;
};

/// Parses argv. Help and version requests print and throw EarlyExit; every
/// other problem is reported as UsageError.
inline RunConfig parse_config(int argc, const char* const* argv) {
    CLI::App app{"Stationary mean-field game solver and selection lab", "mfgsel"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", version);

    struct Raw {
        std::string potential, model, eps_ladder, eps_list;
        double c, alpha, kappa, epsilon, sigma, delta, tol, sigma_scale, sigma_power, delta_scale, delta_power;
        int n, max_iters;
        std::string out, config, base, example;
    } raw{};

    std::vector<CLI::App*> subs;
    auto add = [&](const char* name, const char* desc) {
        CLI::App* s = app.add_subcommand(name, desc);
        s->add_option("--config", raw.config, "JSON configuration file");
        s->add_option("--potential", raw.potential, "zero | sine | cos4pi | cos2pi");
        s->add_option("--c", raw.c, "amplitude of the sine potential");
        s->add_option("--alpha", raw.alpha, "coupling exponent");
        s->add_option("--kappa", raw.kappa, "coupling factor");
        s->add_option("--n", raw.n, "grid points (default 512)");
        s->add_option("--epsilon", raw.epsilon, "discount rate");
        s->add_option("--sigma", raw.sigma, "artificial viscosity (default 0)");
        s->add_option("--delta", raw.delta, "inverse-coupling smoothing width (default 0)");
        s->add_option("--tol", raw.tol, "Newton tolerance (default 1e-10)");
        s->add_option("--max-iters", raw.max_iters, "Newton iteration cap");
        s->add_option("--out", raw.out, "output directory");
        subs.push_back(s);
        return s;
    };
    auto ladder_flags = [&](CLI::App* s) {
        s->add_option("--eps-ladder", raw.eps_ladder, "comma-separated decreasing discount rates");
        s->add_option("--sigma-scale", raw.sigma_scale, "sigma = scale * eps^power");
        s->add_option("--sigma-power", raw.sigma_power);
        s->add_option("--delta-scale", raw.delta_scale, "delta = scale * eps^power");
        s->add_option("--delta-power", raw.delta_power);
    };
    add("solve", "discounted solve at one eps");
    ladder_flags(add("sweep", "discounted solves along an eps ladder"));
    CLI::App* corr = add("corrector", "limit corrector and expansion check");
    corr->add_option("--base", raw.base, "JSON model configuration of the ergodic base");
    corr->add_option("--epsilon-list", raw.eps_list, "comma-separated eps values for the expansion check");
    CLI::App* sel = add("select", "vanishing-discount selection experiment");
    sel->add_option("--model", raw.model, "exdp | bbb | potential name");
    ladder_flags(sel);
    CLI::App* ex = add("example", "closed-form example oracles");
    ex->add_option("kind", raw.example, "bbb | exlp")->required();
    add("verify", "invariant suite on one discounted solve");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        throw EarlyExit{app.exit(e)};
    } catch (const CLI::CallForAllHelp& e) {
        throw EarlyExit{app.exit(e)};
    } catch (const CLI::CallForVersion& e) {
        throw EarlyExit{app.exit(e)};
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    CLI::App* used = nullptr;
    for (auto* s : subs) {
        if (s->parsed()) used = s;
    }
    RunConfig c;
    c.command = used->get_name();
    io::json file = io::json::object();
    if (!raw.config.empty()) {
        c.config_file = raw.config;
        file = io::read_json(raw.config);
        detail::apply_file(file, c);
    }
    auto given = [&](const std::string& flag) {
        const auto* opt = used->get_option_no_throw("--" + flag);
        if (!opt || opt->count() == 0) return false;
        const auto it = detail::flag_keys().find(flag);
        if (it != detail::flag_keys().end()) {
            const auto& [block, key] = it->second;
            if (file.contains(block) && file[block].contains(key)) c.overrides.push_back(std::string(block) + "." + key);
        }
        return true;
    };
    if (given("potential")) c.potential = detail::canonical_potential(raw.potential);
    if (used == sel && given("model")) c.potential = detail::canonical_potential(raw.model);
    if (given("c")) c.c = raw.c;
    if (given("alpha")) c.alpha = raw.alpha;
    if (given("kappa")) c.kappa = raw.kappa;
    if (given("n")) c.n = raw.n;
    if (given("epsilon")) c.epsilon = raw.epsilon;
    if (given("sigma")) c.sigma = raw.sigma;
    if (given("delta")) c.delta = raw.delta;
    if (given("tol")) c.tol = raw.tol;
    if (given("max-iters")) c.max_iters = raw.max_iters;
    if (given("out")) c.out = raw.out;
    if (given("eps-ladder")) c.ladder = detail::parse_list(raw.eps_ladder);
    if (given("epsilon-list")) c.ladder = detail::parse_list(raw.eps_list);
    if (given("sigma-scale")) c.sigma_scale = raw.sigma_scale;
    if (given("sigma-power")) c.sigma_power = raw.sigma_power;
    if (given("delta-scale")) c.delta_scale = raw.delta_scale;
    if (given("delta-power")) c.delta_power = raw.delta_power;
    if (used == corr) c.base = raw.base;
    if (used == ex) c.example = raw.example;
    detail::validate(c);
    return c;
}

namespace detail {

inline void write_meta(const RunConfig& c, const io::json& extra = io::json::object()) {
    io::json j;
    j["artifact"] = "mfgsel";
    j["version"] = version;
    j["config"] = to_json(c);
    j["config_file"] = c.config_file ? io::json(c.config_file->string()) : io::json(nullptr);
    j["overrides"] = c.overrides;
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    io::write_json(c.out / "meta.json", j);
}

inline io::json solution_summary(const DiscountedSolution& s, const Model& model) {
    const BoundsCheck b = discount_bounds(s, model);
    return {{"epsilon", s.epsilon},
            {"residual_sup", s.residual_sup},
            {"iters", s.newton_iters},
            {"mass", integrate(s.m)},
            {"min_m", s.m.min()},
            {"eps_u_min", b.eps_u_min},
            {"eps_u_max", b.eps_u_max}};
}

inline int run_solve(const RunConfig& c) {
    const Model model = c.model();
    const Regularization reg{c.sigma, c.delta};
    const bool osc = check_assumption_osc(model.coupling, model.potential);
    try {
        const DiscountedSolution s = continuation_solve(c.epsilon, model, reg, c.grid(), c.solver());
        io::write_fields(c.out / "solution.csv", {"u", "m"}, {&s.u, &s.m});
        io::json side = solution_summary(s, model);
        side["continuation_steps"] = s.continuation_steps;
        side["assumption_osc"] = osc;
        io::write_json(c.out / "solution.json", side);
        write_meta(c, {{"status", "ok"}});
        std::cout << "solved eps=" << c.epsilon << " residual=" << s.residual_sup << " iters=" << s.newton_iters
                  << " min_m=" << s.m.min() << (osc ? "" : " (oscillation assumption fails)") << '\n';
        return 0;
    } catch (const ContinuationStalled& e) {
        io::write_json(c.out / "solution.json", {{"epsilon", c.epsilon},
                                                 {"failed", true},
                                                 {"reason", e.what()},
                                                 {"lambda_reached", e.reached()},
                                                 {"last_step", e.last_step()},
                                                 {"assumption_osc", osc}});
        write_meta(c, {{"status", "failed"}});
        throw;
    }
}

inline int run_sweep(const RunConfig& c) {
    const Model model = c.model();
    const auto rungs = solve_ladder(c.ladder, model, c.grid(), c.schedule(), c.solver());
    io::CsvWriter w(c.out / "sweep.csv",
                    {"eps", "sigma", "delta", "residual_sup", "iters", "Hbar_est", "mass", "min_m", "failed"});
    bool failed = false;
    int k = 0;
    for (const auto& r : rungs) {
        const Regularization reg = c.schedule()(r.epsilon);
        if (r.solution) {
            const auto& s = *r.solution;
            w.row({r.epsilon, reg.sigma, reg.delta, s.residual_sup, static_cast<double>(s.newton_iters),
                   -r.epsilon * integrate(s.u), integrate(s.m), s.m.min(), 0.0});
            io::write_fields(c.out / ("rung_" + std::to_string(k) + ".csv"), {"u", "m"}, {&s.u, &s.m});
        } else {
            failed = true;
            const double nan = std::numeric_limits<double>::quiet_NaN();
            w.row({r.epsilon, reg.sigma, reg.delta, nan, nan, nan, nan, nan, 1.0});
            std::cerr << "eps=" << r.epsilon << " failed: " << r.failure << '\n';
        }
        ++k;
    }
    write_meta(c, {{"status", failed ? "partial" : "ok"}});
    return failed ? 1 : 0;
}

inline int run_corrector(const RunConfig& c) {
    RunConfig bc = c;
    detail::apply_file(io::read_json(c.base), bc);
    const Model model = bc.model();
    const TorusGrid grid = bc.grid();
    const ErgodicTriple base = solve_ergodic(model, grid);
    const CorrectorSolution cs = solve_limit_corrector(base, model);
    io::write_fields(c.out / "corrector.csv", {"v", "theta"}, {&cs.v, &cs.theta});

    std::vector<DiscountedSolution> sweep;
    bool failed = false;
    for (const auto& r : solve_ladder(c.ladder, model, grid, fixed_schedule({}), c.solver())) {
        if (r.solution) {
            sweep.push_back(*r.solution);
        } else {
            failed = true;
            std::cerr << "eps=" << r.epsilon << " failed: " << r.failure << '\n';
        }
    }
    const ExpansionTable t = verify_expansion(sweep, base, cs);
    io::json j;
    j["lambda"] = cs.lambda;
    j["mu"] = cs.mu;
    j["hbar"] = base.hbar;
    if (cs.routes) {
        j["route_agreement"] = {{"agree", cs.routes->agree},
                                {"lambda_direct", cs.routes->lambda_direct},
                                {"lambda_extrapolated", cs.routes->lambda_extrapolated},
                                {"v_difference", cs.routes->v_difference},
                                {"theta_difference", cs.routes->theta_difference},
                                {"tolerance", cs.routes->tolerance}};
    }
    j["slopes"] = {{"e_u", io::number(t.slope_u)},
                   {"e_m", io::number(t.slope_m)},
                   {"e_2", io::number(t.slope_2)},
                   {"e_2_gauge", io::number(t.slope_2_gauge)},
                   {"e_theta", io::number(t.slope_theta)}};
    io::json rows = io::json::array();
    for (const auto& r : t.rows) {
        rows.push_back({{"epsilon", r.epsilon},
                        {"e_u", r.e_u},
                        {"e_m", r.e_m},
                        {"e_2", r.e_2},
                        {"e_2_gauge", r.e_2_gauge},
                        {"e_theta", r.e_theta}});
    }
    j["rows"] = rows;
    io::write_json(c.out / "corrector.json", j);
    write_meta(c, {{"status", failed ? "partial" : "ok"}, {"base_config", to_json(bc)}});
    std::cout << "lambda=" << cs.lambda << " mu=" << cs.mu << " slope e_u=" << t.slope_u << " e_2=" << t.slope_2
              << '\n';
    return failed ? 1 : 0;
}

inline int run_example(const RunConfig& c) {
    const TorusGrid grid = c.grid();
    const ClosedFormExample ex = make_example(example_kind_from_string(c.example), grid);
    io::write_fields(c.out / "m.csv", {"m"}, {&ex.m});
    io::json info;
    info["example"] = to_string(ex.kind);
    info["hbar"] = ex.hbar;
    info["mass"] = integrate(ex.m);
    io::json cands = io::json::array();
    for (const auto& cand : ex.candidates) {
        io::write_fields(c.out / ("candidate_" + cand.label + ".csv"), {"u_x", "u"}, {&cand.u_x, &cand.u});
        cands.push_back({{"label", cand.label},
                         {"admissible", is_admissible(cand.u_x, ex).admissible},
                         {"integral_u", integrate(cand.u)},
                         {"F", selection_functional(cand.u, ex.m)}});
    }
    info["candidates"] = cands;
    io::write_json(c.out / "example.json", info);
    write_meta(c, {{"status", "ok"}});
    return 0;
}

inline int run_select(const RunConfig& c) {
    const Model model = c.model();
    ExperimentOptions opt;
    opt.schedule = c.schedule();
    opt.solver = c.solver();
    const SelectionExperiment e = run_selection_experiment(model, c.grid(), c.ladder, opt);
    io::CsvWriter w(c.out / "sweep.csv", {"eps", "sigma", "delta", "Hbar_est", "F_value", "mass", "min_m",
                                          "holonomy_max", "action_gap", "coupling_gap", "cauchy", "failed"});
    bool failed = false;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : e.sweep.rows) {
        if (r.failed) {
            failed = true;
            w.row({r.epsilon, r.sigma, r.delta, nan, nan, nan, nan, nan, nan, nan, nan, 1.0});
            std::cerr << "eps=" << r.epsilon << " failed: " << r.failure << '\n';
            continue;
        }
        w.row({r.epsilon, r.sigma, r.delta, r.hbar_est, r.f_value, r.mass, r.min_m, r.holonomy_max, r.action_gap,
               r.coupling_gap, r.cauchy, 0.0});
    }
    const Verdict& v = e.verdict;
    io::json j;
    j["available"] = v.available;
    j["degenerate"] = v.degenerate;
    j["terminal_eps"] = v.terminal_eps;
    j["terminal_F"] = v.terminal_f;
    j["terminal_Hbar_est"] = v.terminal_hbar;
    j["nearest"] = v.nearest;
    j["nearest_distance"] = v.nearest_distance;
    j["criterion_holds"] = v.criterion_holds;
    j["criterion_tol"] = v.criterion_tol;
    j["worst_margin"] = io::number(v.worst_margin);
    j["cauchy_decreasing"] = v.cauchy_decreasing;
    io::json cands = io::json::array();
    for (std::size_t k = 0; k < e.sweep.candidate_labels.size(); ++k) {
        cands.push_back({{"label", e.sweep.candidate_labels[k]}, {"F", e.sweep.candidate_values[k]}});
    }
    j["candidates"] = cands;
    io::write_json(c.out / "verdict.json", j);
    for (auto it = e.sweep.rows.rbegin(); it != e.sweep.rows.rend(); ++it) {
        if (it->solution) {
            const GridField& m = it->solution->m;
            io::write_fields(c.out / "terminal.csv", {"u_bar", "m"}, {&it->solution->u_fluct, &m});
            break;
        }
    }
    write_meta(c, {{"status", failed ? "partial" : "ok"}});
    std::cout << "terminal eps=" << v.terminal_eps << " F=" << v.terminal_f << " nearest=" << v.nearest
              << " criterion " << (v.criterion_holds ? "holds" : "fails") << '\n';
    return failed ? 1 : 0;
}

inline int run_verify(const RunConfig& c) {
    const Model model = c.model();
    const Regularization reg{c.sigma, c.delta};
    const TorusGrid grid = c.grid();
    const double h = grid.h();
    const DiscountedSolution s = continuation_solve(c.epsilon, model, reg, grid, c.solver());

    struct Line {
        std::string name;
        double value;
        double bound;
    };
    std::vector<Line> lines;
    lines.push_back({"mass", mass_defect(s), 1e-8});
    lines.push_back({"energy identity", energy_identity_residual(s, model), 5.0 * h * h});
    lines.push_back({"density formula", density_formula_residual(s, model), 5.0 * h * h});
    double hol = 0.0;
    for (const auto& t : trig_basis()) {
        hol = std::max(hol, holonomy_defect_discounted(c.epsilon, s, t.sample(grid)) / t.c2_norm());
    }
    lines.push_back({"holonomy / |phi|_C2", hol, 10.0 * h * h});
    lines.push_back({"action gap", discounted_action(c.epsilon, s, model).gap, 10.0 * h * h});
    lines.push_back({"jacobian fd", jacobian_fd_mismatch(s.u, c.epsilon, 1.0, model, reg), 1e-6});
    const BoundsCheck b = discount_bounds(s, model);
    lines.push_back({"bounds excess",
                     std::max({0.0, b.lower - b.eps_u_min, b.eps_u_max - b.upper}), 1e-8});

    bool ok = true;
    io::CsvWriter w(c.out / "verify.csv", {"check", "value", "bound", "pass"});
    for (const auto& l : lines) {
        const bool pass = l.value <= l.bound;
        ok = ok && pass;
        std::printf("%-22s %-4s %.3e <= %.3e\n", l.name.c_str(), pass ? "PASS" : "FAIL", l.value, l.bound);
        w.row(std::vector<std::string>{l.name, io::format_number(l.value), io::format_number(l.bound),
                                       pass ? "1" : "0"});
    }
    write_meta(c, {{"status", ok ? "ok" : "failed"}});
    return ok ? 0 : 1;
}

}  // namespace detail

inline int run(const RunConfig& c) {
    std::filesystem::create_directories(c.out);
    if (c.command == "solve") return detail::run_solve(c);
    if (c.command == "sweep") return detail::run_sweep(c);
    if (c.command == "corrector") return detail::run_corrector(c);
    if (c.command == "example") return detail::run_example(c);
    if (c.command == "select") return detail::run_select(c);
    if (c.command == "verify") return detail::run_verify(c);
    throw UsageError("unknown command '" + c.command + "'");
}

/// Full entry point with the exit-code mapping.
inline int main(int argc, const char* const* argv) {
    try {
        return run(parse_config(argc, argv));
    } catch (const EarlyExit& e) {
        return e.code;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const ContinuationStalled& e) {
        std::cerr << "stalled: " << e.what() << '\n';
        return 1;
    } catch (const NonConvergence& e) {
        std::cerr << "no convergence: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace mfgsel::cli
