// Acceptance criteria A1-A10. Prints one PASS/FAIL line per criterion.
// Usage: acceptance [A1 ... A10]   (no argument: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "westabc/energy.hpp"
#include "westabc/harness.hpp"
#include "westabc/symbols.hpp"
#include "westabc/wellposed.hpp"

using namespace westabc;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

AbcSpec spec(const std::string& s) { return parse_abc(s); }

// Max over snapshots of max_t delta for several conditions sharing one reference.
std::map<std::string, double> max_deltas(const std::string& scenario,
                                         const std::vector<std::string>& abcs,
                                         const ScenarioOptions& opt) {
    const ReferenceSeries ref = reference_solution(make_scenario(scenario, spec(abcs[0]), opt));
    std::map<std::string, double> out;
    for (const auto& a : abcs) {
        const Scenario s = make_scenario(scenario, spec(a), opt);
        out[a] = relative_error(run(s.config), ref).max_delta();
    }
    return out;
}

// Linear undamped pulse leaving through PS0 on both ends: remaining amplitude / peak.
double pulse_residual(double epw, double spp) {
    ScenarioOptions o;
    o.linear = o.undamped = true;
    o.elems_per_wavelength = epw;
    o.samples_per_period = spp;
    o.output_stride = 1 << 20;  // first and last snapshot only
    const Scenario s = make_scenario("pulse-1d", spec("ps:0"), o);
    const RunOutput r = run(s.config);
    const double peak = r.snapshots.front().state.u.cwiseAbs().maxCoeff();
    return r.snapshots.back().state.u.cwiseAbs().maxCoeff() / peak;
}

Verdict a1() {
    const auto t0 = std::chrono::steady_clock::now();
    const double coarse = pulse_residual(50, 20);
    const double secs = seconds_since(t0);
    const double fine = pulse_residual(100, 40);
    const double ratio = coarse / fine;
    const bool ok = coarse < 1e-2 && ratio > 4.0 * 0.7 && ratio < 4.0 * 1.3 && secs < 10.0;
    return {ok, fmt("residual=%.3e (<1e-2) refinement ratio=%.3f (4 +-30%%) runtime=%.2fs (<10s)",
                    coarse, ratio, secs)};
}

Verdict a2() {
    const PhysicalParams p = with_overrides(liver_params(1e5), true, true);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        BoundaryTrace tr;
        tr.u = 1e6 * U(rng);
        tr.ut = 1e11 * U(rng);
        tr.utt = 1e16 * U(rng);
        tr.un = 1e8 * U(rng);
        tr.unt = 1e13 * U(rng);
        tr.ub_n = tr.un;
        tr.uyy = 1e10 * U(rng);
        tr.ubyy = tr.uyy;
        tr.accum = 1e5 * U(rng);
        auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };
        for (int dim : {1, 2})
            worst = std::max(worst, rel(ps_flux_1d(0, tr, p), em_flux(1, dim, tr, p)));
        for (SignVariant sv : {SignVariant::Section2, SignVariant::Theorem})
            worst = std::max(worst, rel(ps_flux_2d(1, tr, p, sv), em_flux(2, 2, tr, p)));
        worst = std::max(worst, rel(ps_flux_2d(0, tr, p, SignVariant::Section2), em_flux(1, 2, tr, p)));
    }
    return {worst <= 1e-12, fmt("max relative mismatch PS0/EM1, PS1/EM2 = %.2e (<=1e-12)", worst)};
}

Verdict a3() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto d = max_deltas("seg-1d", {"ps:1", "ps:0", "em:1"}, {});
    const double secs = seconds_since(t0);
    const bool ok = d.at("ps:1") < d.at("ps:0") && d.at("ps:0") < d.at("em:1") && secs < 60.0;
    return {ok, fmt("max delta PS1=%.4e PS0=%.4e EM1=%.4e (need PS1<PS0<EM1) runtime=%.1fs (<60s)",
                    d.at("ps:1"), d.at("ps:0"), d.at("em:1"), secs)};
}

Verdict a4() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<std::string> abcs{"ps:0", "ps:1", "em:1", "em:2"};
    ScenarioOptions o0, o15;
    o0.theta_deg = 0.0;
    o15.theta_deg = 15.0;
    const auto d0 = max_deltas("waveguide-2d", abcs, o0);
    const auto d15 = max_deltas("waveguide-2d", abcs, o15);
    const double secs = seconds_since(t0);
    bool grows = true, lowest = true;
    for (const auto& a : abcs) {
        grows = grows && d15.at(a) > d0.at(a);
        if (a != "ps:1") lowest = lowest && d15.at("ps:1") < d15.at(a);
    }
    const bool normal = d0.at("ps:1") < d0.at("ps:0");
    std::ostringstream s;
    s << fmt("0deg: PS1=%.6e PS0=%.6e (need PS1<PS0: %s); ", d0.at("ps:1"), d0.at("ps:0"),
             normal ? "yes" : "no");
    s << fmt("15deg: PS0=%.4e PS1=%.4e EM1=%.4e EM2=%.4e; ", d15.at("ps:0"), d15.at("ps:1"),
             d15.at("em:1"), d15.at("em:2"));
    s << "all grow with angle: " << (grows ? "yes" : "no")
      << "; PS1 lowest at 15deg: " << (lowest ? "yes" : "no")
      << fmt("; runtime=%.1fs (<600s)", secs);
    return {normal && grows && lowest && secs < 600.0, s.str()};
}

Verdict a5() {
    ScenarioOptions o;
    o.linear = true;
    const double len = 0.03;
    o.t_off = len / 1596.0;
    const Scenario s = make_scenario("seg-1d", spec("ps_beta:0"), o);
    Solver solver(s.config);
    const RunOutput r = solver.run();
    std::vector<double> t, e;
    for (const auto& sn : r.snapshots) {
        t.push_back(sn.state.t);
        e.push_back(energy(0, sn.state, s.config.params, solver.ops()));
    }
    std::size_t k0 = 0;
    while (k0 < t.size() && t[k0] < o.t_off) ++k0;
    const double e0 = e.at(k0);
    double worst = -INFINITY;
    for (std::size_t k = k0; k + 1 < e.size(); ++k) worst = std::max(worst, e[k + 1] - e[k]);
    const double tol = 1e-10 * e0;
    return {e0 > 0 && worst <= tol,
            fmt("E0(t0)=%.4e, largest per-step increase after t0=%.3e (tol %.3e), E0(T)/E0(t0)=%.3e",
                e0, worst, tol, e.back() / e0)};
}

// Linear (gamma = 0) damped pulse; `abc` empty keeps both ends reflecting.
double id0_relative(double epw, double spp, const std::optional<AbcSpec>& abc) {
    ScenarioOptions o;
    o.linear = true;
    o.elems_per_wavelength = epw;
    o.samples_per_period = spp;
    const Scenario s = make_scenario("pulse-1d", abc, o);
    Solver solver(s.config);
    const RunOutput r = solver.run();
    const EnergyEvaluator ev(solver.ops(), s.config.params);
    const auto res = identity_residual(Identity::Id0, r, ev);
    double worst = 0.0;
    for (double x : res) worst = std::max(worst, std::abs(x));
    return worst / ev.energy(0, r.snapshots.front().state);
}

Verdict a6() {
    const double coarse = id0_relative(50, 20, std::nullopt);
    const double fine = id0_relative(100, 40, std::nullopt);
    const double ratio = coarse / fine;
    // reported only: with absorbing ends the trapezoidal boundary work dominates
    const double open = id0_relative(50, 20, spec("ps:0"));
    return {coarse < 1e-3 && ratio > 4.0 * 0.7 && ratio < 4.0 * 1.3,
            fmt("closed domain: max |id0 residual|/E0(0)=%.3e (<1e-3), refinement ratio=%.3f "
                "(4 +-30%%); with PS0 ends (not asserted): %.3e",
                coarse, ratio, open)};
}

Verdict a7() {
    std::ostringstream s;
    bool ok = true;
    for (int zeta : {0, 1}) {
        const SimConfig cfg = picard_config(zeta);
        const PicardResult pr = picard_iterate(cfg, zeta, 30);
        double rmax = 0.0;
        for (int k = 0; k < 5; ++k) rmax = std::max(rmax, pr.ratios.at(k));  // r^2 .. r^6
        Solver direct(cfg);
        const RunOutput ref = direct.run();
        RunOutput zero = ref;
        for (auto& sn : zero.snapshots) {
            sn.state.u.setZero();
            sn.state.ut.setZero();
        }
        const double scale = picard_distance(ref, zero, ref, direct.ops(), cfg.params);
        const double d = picard_distance(pr.iterates.back(), ref, ref, direct.ops(), cfg.params);
        const double rel = d / scale;
        const bool pass = rmax < 1.0 && rel <= 10.0 * cfg.picard_tol;
        ok = ok && pass;
        s << fmt("zeta=%d: max r^2..r^6=%.3e (<1), |limit-direct|/|direct|=%.2e (<=%.0e); ", zeta,
                 rmax, rel, 10.0 * cfg.picard_tol);
    }
    return {ok, s.str()};
}

Verdict a8() {
    const FrozenField f = smooth_frozen_field(liver_params(1e5));
    std::ostringstream s;
    bool ok = true;
    for (int k = 0; k <= 2; ++k) {
        const double slope = residual_slope(k, f, 0.01, 1e-5);
        const double want = 2.0 - (k + 1);
        ok = ok && std::abs(slope - want) <= 0.1;
        s << fmt("k=%d slope=%.4f (want %.0f); ", k, slope, want);
    }
    double worst = 0.0;
    for (double tau : {1e3, 1e4, 1e5, 1e6})
        for (int j : {0, 1})
            for (TaylorOrder o : {TaylorOrder::Zero, TaylorOrder::One, TaylorOrder::Exact}) {
                const auto a = symbol_2d(j, o, f, 0.01, 0.0, 1e-5, 0.0, tau).value;
                const auto b = symbol_1d(j, f, 0.01, 1e-5, tau).value;
                worst = std::max(worst, std::abs(a - b) / std::abs(b));
            }
    ok = ok && worst <= 1e-12;
    s << fmt("2-d at eta=0 vs 1-d: %.2e (<=1e-12)", worst);
    return {ok, s.str()};
}

Verdict a9() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto d = max_deltas("hifu-2d", {"ps:0", "ps:1", "em:1", "em:2"}, {});
    const double secs = seconds_since(t0);
    const double ps = std::max(d.at("ps:0"), d.at("ps:1"));
    const double em = std::min(d.at("em:1"), d.at("em:2"));
    return {ps < em && secs < 900.0,
            fmt("max delta PS0=%.4e PS1=%.4e EM1=%.4e EM2=%.4e (need both PS below both EM); "
                "runtime=%.0fs (<900s)",
                d.at("ps:0"), d.at("ps:1"), d.at("em:1"), d.at("em:2"), secs)};
}

double u2_error(int n) {
    const PhysicalParams p = with_overrides(liver_params(1e5), true, true);
    const DiscreteOperators ops = assemble(make_grid({{0.0, 1.0}}, {n}, 1.0 / n));
    Vec u0(n + 1), exact(n + 1);
    const double pi = std::acos(-1.0);
    for (int i = 0; i <= n; ++i) {
        u0[i] = std::sin(pi * i / n);
        exact[i] = -p.c * p.c * pi * pi * u0[i];
    }
    const Vec u2 = u2_initial(u0, Vec::Zero(n + 1), p, ops);
    return (u2 - exact).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff();
}

Verdict a10() {
    std::vector<double> e;
    for (int n : {16, 32, 64, 128}) e.push_back(u2_error(n));
    const double order = std::log2(e[2] / e[3]);
    return {std::abs(order - 2.0) <= 0.2,
            fmt("max nodal errors %.2e %.2e %.2e %.2e, order=%.3f (2 +-0.2)", e[0], e[1], e[2],
                e[3], order)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> all{
        {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5},
        {"A6", a6}, {"A7", a7}, {"A8", a8}, {"A9", a9}, {"A10", a10}};
    std::vector<std::string> pick(argv + 1, argv + argc);
    int failed = 0;
    for (const auto& [name, fn] : all) {
        if (!pick.empty() && std::find(pick.begin(), pick.end(), name) == pick.end()) continue;
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %s  %s\n", name.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str());
        std::fflush(stdout);
        failed += !v.pass;
    }
    return failed == 0 ? 0 : 1;
}
