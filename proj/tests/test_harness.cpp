#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "westabc/harness.hpp"

using namespace westabc;
namespace fs = std::filesystem;

namespace {

ReferenceSeries constant_reference(double value, int snapshots, int n) {
    ReferenceSeries r;
    for (int k = 0; k < snapshots; ++k) {
        r.t.push_back(1e-6 * k);
        r.u.push_back(Vec::Constant(n, value));
    }
    return r;
}

}  // namespace

TEST_CASE("relative error on hand-made series") {
    const ReferenceSeries ref = constant_reference(1.5, 4, 7);
    std::vector<Vec> same = ref.u, zero(4, Vec::Zero(7)), twice;
    for (const Vec& v : ref.u) twice.push_back(2.0 * v);

    const ErrorSeries e0 = relative_error(ref.t, same, ref);
    CHECK(e0.max_delta() == 0.0);
    CHECK(relative_error(ref.t, zero, ref).final_delta() == doctest::Approx(1.0));
    CHECK(relative_error(ref.t, twice, ref).max_delta() == doctest::Approx(1.0));

    std::vector<double> shifted = ref.t;
    shifted[2] += 1e-7;
    CHECK_THROWS_AS(relative_error(shifted, same, ref), InvalidParameter);
    same.pop_back();
    CHECK_THROWS_AS(relative_error(std::vector<double>(3), same, ref), InvalidParameter);
}

TEST_CASE("a vanishing reference switches to the absolute error") {
    ReferenceSeries ref = constant_reference(1.0, 3, 5);
    ref.u[0].setZero();
    std::vector<Vec> u(3, Vec::Constant(5, 1.0));
    u[0].setConstant(0.1);
    const ErrorSeries e = relative_error(ref.t, u, ref);
    CHECK(e.absolute[0]);
    CHECK_FALSE(e.absolute[1]);
    CHECK(e.delta[0] == doctest::Approx(0.1 * std::sqrt(5.0)));
}

TEST_CASE("minimum extension of the reference domain") {
    // c t / 2 + 2 lambda at 100 kHz: 1596 * 1.25e-5 / 2 + 2 * 1596 / 1e5
    CHECK(min_extension(liver_params(1e5), 1.25e-5) == doctest::Approx(0.041895));
}

TEST_CASE("scenario catalogue") {
    CHECK(scenario_names().size() == 4);
    for (const std::string& n : scenario_names()) {
        const Scenario s = make_scenario(n, parse_abc("ps:1"));
        CHECK(s.name == n);
        CHECK(s.extension >= min_extension(s.config.params, s.config.t_final));
        CHECK(s.config.t_final > 0.0);
    }
    CHECK_THROWS_AS(make_scenario("ring-3d", std::nullopt), InvalidParameter);
    CHECK_FALSE(parse_abc_or_none("none").has_value());
    CHECK(parse_abc_or_none("em:2").has_value());
}

TEST_CASE("reference refuses a short extension") {
    Scenario s = make_scenario("seg-1d", parse_abc("ps:0"));
    s.extension *= 0.5;
    CHECK_THROWS_AS(reference_solution(s), InvalidParameter);
}

TEST_CASE("reference node map lands on matching coordinates") {
    const Scenario s = make_scenario("pulse-1d", parse_abc("ps:0"));
    const auto [cfg, map] = reference_config(s);
    const Grid& g = s.config.grid;
    REQUIRE(static_cast<int>(map.size()) == g.node_count());
    for (int i = 0; i < g.node_count(); ++i)
        CHECK(cfg.grid.x(map[i]) == doctest::Approx(g.x(i)).epsilon(1e-12));
}

TEST_CASE("before the wave reaches the boundary, run and reference agree") {
    ScenarioOptions o;
    o.t_final = 1.5e-5;  // the domain is 0.03 m long: first arrival near 1.88e-5 s
    for (const char* abc : {"ps:1", "none"}) {
        const ScenarioResult r = run_scenario("seg-1d", parse_abc_or_none(abc), o);
        // implicit steps and viscous damping leave only an exponentially small precursor
        CHECK(r.error.max_delta() <= 1e-4);
    }
}

TEST_CASE("absorbing ends beat the reflecting control") {
    const ScenarioOptions o;
    const ReferenceSeries ref = reference_solution(make_scenario("seg-1d", parse_abc("ps:0"), o));
    const double closed = run_scenario("seg-1d", std::nullopt, o, "", &ref).error.final_delta();
    for (const char* abc : {"ps:0", "ps:1", "em:1"}) {
        const double open = run_scenario("seg-1d", parse_abc(abc), o, "", &ref).error.final_delta();
        CHECK(open < 0.1 * closed);
    }
}

TEST_CASE("runs are deterministic") {
    ScenarioOptions o;
    o.t_final = 2.5e-5;
    const ScenarioResult a = run_scenario("seg-1d", parse_abc("em:2"), o);
    const ScenarioResult b = run_scenario("seg-1d", parse_abc("em:2"), o);
    REQUIRE(a.run.snapshots.size() == b.run.snapshots.size());
    for (std::size_t k = 0; k < a.run.snapshots.size(); ++k)
        CHECK(a.run.snapshots[k].state.u == b.run.snapshots[k].state.u);
}

TEST_CASE("options survive a JSON round trip") {
    ScenarioOptions o;
    o.omega = 2e5;
    o.linear = true;
    o.elems_per_wavelength = 40;
    o.theta_deg = 15;
    o.t_off = 3e-5;
    o.full_size = true;
    o.output_stride = 4;
    const ScenarioOptions back = options_from_json(options_to_json(o));
    CHECK(back.omega == o.omega);
    CHECK(back.linear);
    CHECK(back.elems_per_wavelength == 40);
    CHECK(back.theta_deg == o.theta_deg);
    CHECK(back.t_off == o.t_off);
    CHECK(back.full_size);
    CHECK(back.output_stride == 4);
    CHECK_FALSE(back.c.has_value());
    CHECK(options_to_json(back) == options_to_json(o));
    CHECK_THROWS(options_from_json("{not json"));
}

TEST_CASE("output files of a run") {
    const fs::path dir = fs::temp_directory_path() / "westabc_harness_test";
    fs::remove_all(dir);
    ScenarioOptions o;
    o.t_final = 1e-5;
    run_scenario("seg-1d", parse_abc("ps:1"), o, dir.string());
    for (const char* f : {"delta.csv", "energy.csv", "run.json"}) CHECK(fs::exists(dir / f));
    std::ifstream meta(dir / "run.json");
    const auto j = nlohmann::json::parse(meta);
    CHECK(j.at("scenario") == "seg-1d");
    CHECK(j.at("abc").at("spec") == "ps:1");
    std::ifstream delta(dir / "delta.csv");
    std::string header;
    std::getline(delta, header);
    CHECK(header == "t,delta,absolute");
    fs::remove_all(dir);
}
