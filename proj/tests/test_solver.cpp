#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "westabc/harness.hpp"
#include "westabc/solver.hpp"

using namespace westabc;

namespace {

const double kPi = std::numbers::pi;

PhysicalParams unit_linear() { return with_overrides(derive_coefficients(1, 1, 0, 0, 1), true, true); }

// cos(pi x) on a closed unit interval is an exact eigenvector of the P1
// pencil (K, M); the semi-discrete solution is cos(sqrt(lambda_h) t) times it.
double mode_error(int n, double dt, double t_final) {
    SimConfig cfg;
    cfg.params = unit_linear();
    cfg.grid = make_grid({{0.0, 1.0}}, {n}, 1.0 / n);
    cfg.dt = dt;
    cfg.t_final = t_final;
    cfg.output_stride = 1 << 20;
    cfg.u0 = [](double x, double) { return std::cos(kPi * x); };
    const RunOutput r = run(cfg);
    const double h = 1.0 / n, th = kPi * h;
    const double lambda = 6.0 / (h * h) * (1 - std::cos(th)) / (2 + std::cos(th));
    const WaveState& s = r.snapshots.back().state;
    double err = 0.0;
    for (int i = 0; i <= n; ++i)
        err = std::max(err, std::abs(s.u[i] - std::cos(std::sqrt(lambda) * s.t) * std::cos(th * i)));
    return err;
}

Vec gaussian(const Grid& g, double x0, double sigma) {
    Vec u(g.node_count());
    for (int i = 0; i < g.node_count(); ++i) {
        const double z = (g.x(i) - x0) / sigma;
        u[i] = std::exp(-0.5 * z * z);
    }
    return u;
}

}  // namespace

TEST_CASE("zero state stays zero") {
    SimConfig cfg;
    cfg.params = liver_params(1e5);
    cfg.grid = make_grid({{0.0, 0.01}}, {20}, 5e-4);
    cfg.grid.tag_side(XMax, BoundaryTag::Absorbing);
    Solver solver(cfg);
    WaveState s = solver.initial_state();
    const StepReport rep = solver.step(s);
    CHECK(rep.picard_iters == 1);
    CHECK(s.u.norm() == 0.0);
    CHECK(s.utt.norm() == 0.0);
}

TEST_CASE("standing mode: second order in time") {
    // t = 0.5 sits at a zero of the mode's time factor, where phase errors show first
    const double e1 = mode_error(64, 0.02, 0.5);
    const double e2 = mode_error(64, 0.01, 0.5);
    CHECK(e1 < 1e-2);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("standing mode: energy drift per period") {
    SimConfig cfg;
    cfg.params = unit_linear();  // lambda = 1
    const int n = 100;           // 50 elements per wavelength on [0, 2]
    cfg.grid = make_grid({{0.0, 2.0}}, {n}, 2.0 / n);
    cfg.dt = 1.0 / 20;
    cfg.t_final = 1.0;
    cfg.u0 = [](double x, double) { return std::cos(kPi * x); };
    Solver solver(cfg);
    const RunOutput r = solver.run();
    const auto e0 = [&](const WaveState& s) {
        return 0.5 * (s.ut.dot(solver.ops().mass * s.ut) + s.u.dot(solver.ops().stiffness * s.u));
    };
    const double first = e0(r.snapshots.front().state);
    double drift = 0.0;
    for (const auto& sn : r.snapshots) drift = std::max(drift, std::abs(e0(sn.state) - first));
    CHECK(drift < 1e-3 * first);
}

TEST_CASE("snapshot counting") {
    SimConfig cfg;
    cfg.params = liver_params(1e5);
    cfg.grid = make_grid({{0.0, 0.01}}, {10}, 1e-3);
    cfg.dt = 5e-7;
    cfg.t_final = 10 * cfg.dt;
    cfg.output_stride = 5;
    const RunOutput r = run(cfg);
    REQUIRE(r.snapshots.size() == 3);
    CHECK(r.snapshots[1].state.t == doctest::Approx(5 * cfg.dt));
    CHECK(r.snapshots[2].state.t == doctest::Approx(10 * cfg.dt));
    CHECK(r.steps == 10);
}

TEST_CASE("invalid configurations") {
    SimConfig cfg;
    cfg.grid = make_grid({{0.0, 0.01}}, {10}, 1e-3);
    cfg.dt = 0;
    CHECK_THROWS_AS(Solver{cfg}, InvalidParameter);
    cfg.dt = 1e-6;
    cfg.t_final = 1e-7;
    CHECK_THROWS_AS(Solver{cfg}, InvalidParameter);
}

TEST_CASE("a reflecting wall sends the pulse back with full amplitude") {
    ScenarioOptions o;
    o.linear = o.undamped = true;
    o.output_stride = 1 << 20;
    const Scenario s = make_scenario("pulse-1d", std::nullopt, o);
    const RunOutput r = run(s.config);
    const Vec& u = r.snapshots.back().state.u;
    CHECK(u.maxCoeff() > 0.95);
    CHECK(u.minCoeff() > -0.05);
    const Scenario a = make_scenario("pulse-1d", parse_abc("ps:0"), o);
    CHECK(run(a.config).snapshots.back().state.u.cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("symmetric data stays symmetric") {
    SimConfig cfg;
    cfg.params = liver_params(1e5);
    cfg.grid = build_grid({{0.0, 0.04}}, cfg.params, 30);
    cfg.grid.tag_side(XMin, BoundaryTag::Absorbing);
    cfg.grid.tag_side(XMax, BoundaryTag::Absorbing);
    cfg.abc = parse_abc("ps:1");
    cfg.dt = time_step(1e5, 20);
    cfg.t_final = 60 * cfg.dt;
    const double amp = 0.05 * cfg.params.inv_c2() / (2 * cfg.params.gamma);
    cfg.u0 = [amp](double x, double) { return amp * std::exp(-0.5 * std::pow((x - 0.02) / 0.004, 2)); };
    cfg.output_stride = 1 << 20;
    const Vec u = run(cfg).snapshots.back().state.u;
    const int n = static_cast<int>(u.size()) - 1;
    double asym = 0.0;
    for (int i = 0; i <= n; ++i) asym = std::max(asym, std::abs(u[i] - u[n - i]));
    CHECK(asym <= 1e-12 * u.cwiseAbs().maxCoeff());
}

TEST_CASE("small-amplitude nonlinear run needs few Picard iterates") {
    const Scenario s = make_scenario("seg-1d", parse_abc("ps:0"), {});
    const RunOutput r = run(s.config);
    std::vector<int> it;
    for (const auto& sn : r.snapshots) it.push_back(sn.report.picard_iters);
    std::sort(it.begin(), it.end());
    MESSAGE("Picard iterates per step: min ", it.front(), " median ", it[it.size() / 2], " max ", it.back());
    CHECK(it[it.size() / 2] <= 6);
    for (const auto& sn : r.snapshots) CHECK(sn.report.picard_residual <= s.config.picard_tol);
}

TEST_CASE("degeneracy aborts with the time stamp") {
    ScenarioOptions o;
    o.amplitude = 1e13;
    const Scenario s = make_scenario("seg-1d", parse_abc("ps:0"), o);
    try {
        run(s.config);
        FAIL("expected a degeneracy error");
    } catch (const DegeneracyError& e) {
        CHECK(std::string(e.what()).find("t = ") != std::string::npos);
    }
}

TEST_CASE("frozen zero coefficient reduces to the linear damped problem") {
    const Scenario s = make_scenario("seg-1d", parse_abc("ps_beta:0"), {});
    SimConfig lin = s.config;
    lin.params.gamma = 0.0;
    const RunOutput ref = run(lin);
    const int n = s.config.grid.node_count();
    const std::vector<FrozenLevel> zero(ref.steps + 1, FrozenLevel{Vec::Zero(n), Vec::Zero(n)});
    const RunOutput a = linearized_run(s.config, zero, 0);
    const RunOutput b = linearized_run(s.config, zero, 1);
    const double scale = ref.snapshots.back().state.u.norm();
    for (std::size_t k = 0; k < ref.snapshots.size(); k += 10) {
        CHECK((a.snapshots[k].state.u - ref.snapshots[k].state.u).norm() <= 1e-10 * scale);
        CHECK((a.snapshots[k].state.u - b.snapshots[k].state.u).norm() == 0.0);
    }
    CHECK_THROWS_AS(linearized_run(s.config, {zero.begin(), zero.begin() + 3}, 0), InvalidParameter);
}

TEST_CASE("plane strip reproduces the 1-d run at normal incidence") {
    ScenarioOptions o;
    o.output_stride = 1 << 20;
    const Scenario one = make_scenario("seg-1d", parse_abc("ps:0"), o);
    const Scenario two = make_scenario("waveguide-2d", parse_abc("ps:0"), o);
    const Vec u1 = run(one.config).snapshots.back().state.u;
    const Vec u2 = run(two.config).snapshots.back().state.u;
    const Grid& g = two.config.grid;
    REQUIRE(g.nodes_x() == u1.size());
    double diff = 0.0;
    for (int j = 0; j < g.nodes_y(); ++j)
        for (int i = 0; i < g.nodes_x(); ++i) diff = std::max(diff, std::abs(u2[g.node(i, j)] - u1[i]));
    CHECK(diff <= 1e-9 * u1.cwiseAbs().maxCoeff());
}

TEST_CASE("source switch-off") {
    ScenarioOptions o;
    o.t_off = 1e-5;
    Solver solver(make_scenario("seg-1d", parse_abc("ps:0"), o).config);
    CHECK(solver.source_load(0.9e-5 - 2.5e-6).norm() > 0.0);
    CHECK(solver.source_load(1e-5 + 2.5e-6).norm() == 0.0);
}

TEST_CASE("source signal") {
    const PhysicalParams p = liver_params(1e5);
    SourceSpec s;
    CHECK(source_signal(-1e-7, p, s) == 0.0);
    CHECK(source_signal(2.5e-6, p, s) == doctest::Approx(1.0));
    s.ramp = true;
    CHECK(std::abs(source_signal(1e-7, p, s)) < std::abs(std::sin(2 * kPi * 1e5 * 1e-7)));
}
