#include "westabc/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>

#include <json.hpp>

namespace westabc {

namespace {

using json = nlohmann::json;

PhysicalParams params_for(const ScenarioOptions& o, double default_omega) {
    PhysicalParams p = derive_coefficients(o.c.value_or(1596.0), o.rho.value_or(1050.0),
                                           o.b_over_a.value_or(6.8), o.alpha_abs.value_or(4.5),
                                           o.omega.value_or(default_omega));
    return with_overrides(p, o.linear, o.undamped);
}

// Flux amplitude giving a peak of about 2 gamma u / c^-2 = 0.05 for a plane
// wave started from rest; `gain` accounts for focusing or oblique launch.
double auto_amplitude(const PhysicalParams& p, double gain) {
    if (p.gamma == 0.0) return 1.0;
    const double u_peak = 0.05 * p.inv_c2() / (2.0 * p.gamma);
    return u_peak * std::numbers::pi * p.omega / p.c / gain;
}

void tag_facets(Grid& g, int side, BoundaryTag t) { g.tag_side(side, t); }

void tag_aperture(Grid& g, double center, double aperture) {
    for (int f = 0; f < g.nx; ++f) {
        const double xm = 0.5 * (g.x(f) + g.x(f + 1));
        g.facet_tags[YMin][f] =
            std::abs(xm - center) <= 0.5 * aperture ? BoundaryTag::Source : BoundaryTag::Rigid;
    }
}

void fill_common(SimConfig& c, const ScenarioOptions& o, const std::optional<AbcSpec>& abc) {
    c.dt = time_step(c.params.omega, o.samples_per_period);
    c.picard_tol = o.picard_tol;
    c.picard_max = o.picard_max;
    c.output_stride = o.output_stride;
    if (abc) c.abc = *abc;
    c.source.ramp = o.ramp;
    c.source.t_off = o.t_off;
}

}  // namespace

std::vector<std::string> scenario_names() { return {"seg-1d", "waveguide-2d", "hifu-2d", "pulse-1d"}; }

std::optional<AbcSpec> parse_abc_or_none(const std::string& text) {
    if (text == "none" || text == "rigid") return std::nullopt;
    return parse_abc(text);
}

double min_extension(const PhysicalParams& p, double t_final) {
    return 0.5 * p.c * t_final + 2.0 * p.wavelength();
}

Scenario make_scenario(const std::string& name, std::optional<AbcSpec> abc,
                       const ScenarioOptions& o) {
    Scenario s;
    s.name = name;
    s.abc = abc;
    SimConfig& c = s.config;
    const BoundaryTag open = abc ? BoundaryTag::Absorbing : BoundaryTag::Rigid;

    if (name == "seg-1d") {
        c.params = params_for(o, 1e5);
        const double len = o.extent.value_or(0.03);
        c.grid = build_grid({{0.0, len}}, c.params, o.elems_per_wavelength);
        tag_facets(c.grid, XMin, BoundaryTag::Source);
        tag_facets(c.grid, XMax, open);
        fill_common(c, o, abc);
        c.t_final = o.t_final.value_or(3.0 * len / c.params.c);
        c.source.amplitude = o.amplitude.value_or(auto_amplitude(c.params, 1.0));
    } else if (name == "pulse-1d") {
        c.params = params_for(o, 1e5);
        const double len = o.extent.value_or(0.06);
        c.grid = build_grid({{0.0, len}}, c.params, o.elems_per_wavelength);
        tag_facets(c.grid, XMin, open);
        tag_facets(c.grid, XMax, open);
        fill_common(c, o, abc);
        const double sigma = c.params.wavelength() / 4.0, x0 = 0.5 * len;
        const double cc = c.params.c;
        const double amp = o.amplitude.value_or(
            c.params.gamma == 0.0 ? 1.0 : 0.05 * c.params.inv_c2() / (2.0 * c.params.gamma));
        // right-moving Gaussian: u1 = -c G'
        c.u0 = [=](double x, double) {
            const double z = (x - x0) / sigma;
            return amp * std::exp(-0.5 * z * z);
        };
        c.u1 = [=](double x, double) {
            const double z = (x - x0) / sigma;
            return amp * cc * z / sigma * std::exp(-0.5 * z * z);
        };
        c.t_final = o.t_final.value_or((0.5 * len + 6.0 * sigma) / cc);
    } else if (name == "waveguide-2d") {
        c.params = params_for(o, 1e5);
        const double len = o.extent.value_or(0.03);
        c.grid = build_grid({{0.0, len}, {0.0, 0.0005}}, c.params, o.elems_per_wavelength);
        tag_facets(c.grid, XMin, BoundaryTag::Source);
        tag_facets(c.grid, XMax, open);
        fill_common(c, o, abc);
        const double th = o.theta_deg.value_or(0.0);
        c.source.shape = SourceShape::Tilted;
        c.source.theta_deg = th;
        c.source.incident_walls = o.incident_walls;
        c.t_final = o.t_final.value_or(3.0 * len / c.params.c);
        const double cth = std::cos(th * std::numbers::pi / 180.0);
        c.source.amplitude = o.amplitude.value_or(auto_amplitude(c.params, 1.0 / cth));
    } else if (name == "hifu-2d") {
        c.params = params_for(o, 1e6);
        const double len = o.extent.value_or(o.full_size ? 0.02 : 0.005);
        c.grid = build_grid({{0.0, len}, {0.0, len}}, c.params, o.elems_per_wavelength);
        c.source.shape = SourceShape::Concave;
        c.source.aperture = o.aperture.value_or(0.5 * len);
        c.source.focal_length = o.focal_length.value_or(0.5 * len);
        c.source.center = 0.5 * len;
        tag_facets(c.grid, XMin, open);
        tag_facets(c.grid, XMax, open);
        tag_facets(c.grid, YMax, open);
        tag_aperture(c.grid, c.source.center, c.source.aperture);
        fill_common(c, o, abc);
        c.t_final = o.t_final.value_or(2.0 * len / c.params.c);
        // rough cylindrical focusing gain, never below one
        const double gain = std::max(
            1.0, std::sqrt(c.source.aperture * c.source.aperture /
                           (2.0 * c.params.wavelength() * c.source.focal_length)));
        c.source.amplitude = o.amplitude.value_or(auto_amplitude(c.params, gain));
    } else {
        throw InvalidParameter("unknown scenario '" + name + "'");
    }
    if (!abc) c.abc = AbcSpec{};
    else validate(*abc, c.grid.dim);
    s.extension = min_extension(c.params, c.t_final);
    return s;
}

std::pair<SimConfig, std::vector<int>> reference_config(const Scenario& s) {
    const SimConfig& c = s.config;
    const Grid& g = c.grid;
    SimConfig r = c;
    r.abc = AbcSpec{};
    const int ext = static_cast<int>(std::ceil(s.extension / g.hx * (1.0 - 1e-12)));
    const double lx = ext * g.hx;
    std::vector<int> map;
    if (s.name == "seg-1d" || s.name == "waveguide-2d") {
        if (g.dim == 1) {
            r.grid = make_grid({{g.x0, g.x1 + lx}}, {g.nx + ext}, g.h_nominal);
            r.grid.facet_tags[XMin] = g.facet_tags[XMin];
        } else {
            r.grid = make_grid({{g.x0, g.x1 + lx}, {g.y0, g.y1}}, {g.nx + ext, g.ny}, g.h_nominal);
            r.grid.facet_tags[XMin] = g.facet_tags[XMin];
        }
        for (int j = 0; j < g.nodes_y(); ++j)
            for (int i = 0; i < g.nodes_x(); ++i) map.push_back(r.grid.node(i, j));
    } else if (s.name == "pulse-1d") {
        r.grid = make_grid({{g.x0 - lx, g.x1 + lx}}, {g.nx + 2 * ext}, g.h_nominal);
        for (int i = 0; i < g.nodes_x(); ++i) map.push_back(ext + i);
    } else if (s.name == "hifu-2d") {
        const int ey = static_cast<int>(std::ceil(s.extension / g.hy * (1.0 - 1e-12)));
        r.grid = make_grid({{g.x0 - lx, g.x1 + lx}, {g.y0, g.y1 + ey * g.hy}},
                           {g.nx + 2 * ext, g.ny + ey}, g.h_nominal);
        tag_aperture(r.grid, c.source.center, c.source.aperture);
        for (int j = 0; j < g.nodes_y(); ++j)
            for (int i = 0; i < g.nodes_x(); ++i) map.push_back(r.grid.node(i + ext, j));
    } else {
        throw InvalidParameter("no reference construction for '" + s.name + "'");
    }
    return {r, map};
}

ReferenceSeries reference_solution(const Scenario& s) {
    if (s.extension < min_extension(s.config.params, s.config.t_final) * (1.0 - 1e-12))
        throw InvalidParameter("reference extension too short for the run length");
    auto [cfg, map] = reference_config(s);
    Solver solver(cfg);
    ReferenceSeries out;
    solver.run([&](const WaveState& st, const StepReport&) {
        Vec u(map.size());
        for (std::size_t k = 0; k < map.size(); ++k) u[k] = st.u[map[k]];
        out.t.push_back(st.t);
        out.u.push_back(std::move(u));
    });
    return out;
}

double ErrorSeries::max_delta() const {
    double m = 0.0;
    for (std::size_t k = 0; k < delta.size(); ++k)
        if (!absolute[k]) m = std::max(m, delta[k]);
    return m;
}

double ErrorSeries::final_delta() const { return delta.empty() ? 0.0 : delta.back(); }

ErrorSeries relative_error(const std::vector<double>& t, const std::vector<Vec>& u,
                           const ReferenceSeries& ref) {
    if (t.size() != ref.t.size() || u.size() != ref.u.size())
        throw InvalidParameter("run and reference have different snapshot counts");
    double peak = 0.0;
    for (const auto& r : ref.u) peak = std::max(peak, r.norm());
    ErrorSeries e;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (std::abs(t[k] - ref.t[k]) > 1e-9 * std::max(std::abs(t[k]), 1e-12))
            throw InvalidParameter("run and reference snapshot times differ");
        if (u[k].size() != ref.u[k].size())
            throw InvalidParameter("run and reference grids differ");
        const double nr = ref.u[k].norm(), d = (ref.u[k] - u[k]).norm();
        const bool abs_only = !(nr > 1e-12 * peak) || peak == 0.0;
        e.t.push_back(t[k]);
        e.delta.push_back(abs_only ? d : d / nr);
        e.absolute.push_back(abs_only);
    }
    return e;
}

ErrorSeries relative_error(const RunOutput& run, const ReferenceSeries& ref) {
    std::vector<double> t;
    std::vector<Vec> u;
    for (const auto& s : run.snapshots) {
        t.push_back(s.state.t);
        u.push_back(s.state.u);
    }
    return relative_error(t, u, ref);
}

void write_delta_csv(const std::string& path, const ErrorSeries& e) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "t,delta,absolute\n" << std::scientific << std::setprecision(17);
    for (std::size_t k = 0; k < e.t.size(); ++k)
        f << e.t[k] << ',' << e.delta[k] << ',' << (e.absolute[k] ? 1 : 0) << '\n';
}

FrozenField smooth_frozen_field(const PhysicalParams& p) {
    const double amp = p.gamma > 0 ? 0.1 * p.inv_c2() / (2.0 * p.gamma) : 1.0;
    FrozenField f;
    f.params = p;
    f.v = [amp](const Jet& x, const Jet& t) { return amp * sin(3.0 * x + 20.0 * t + 0.3 * Jet(1.0)); };
    return f;
}

SimConfig picard_config(int zeta, const ScenarioOptions& opt) {
    if (zeta != 0 && zeta != 1) throw InvalidParameter("zeta must be 0 or 1");
    AbcSpec abc;
    abc.family = AbcFamily::PS_BETA;
    abc.order = zeta;
    ScenarioOptions o = opt;
    if (!o.t_final) o.t_final = 2.0 * o.extent.value_or(0.03) / o.c.value_or(1596.0);
    return make_scenario("seg-1d", abc, o).config;
}

ScenarioOptions options_from_json(const std::string& text) {
    const json j = json::parse(text);
    ScenarioOptions o;
    auto opt = [](const json& sec, const char* key, std::optional<double>& dst) {
        if (sec.contains(key) && !sec[key].is_null()) dst = sec[key].get<double>();
    };
    auto get = [](const json& sec, const char* key, auto& dst) {
        if (sec.contains(key) && !sec[key].is_null()) dst = sec[key].get<std::decay_t<decltype(dst)>>();
    };
    const json empty = json::object();
    const json& ph = j.value("physical", empty);
    opt(ph, "c", o.c);
    opt(ph, "rho", o.rho);
    opt(ph, "b_over_a", o.b_over_a);
    opt(ph, "alpha_abs", o.alpha_abs);
    opt(ph, "omega", o.omega);
    get(ph, "linear", o.linear);
    get(ph, "undamped", o.undamped);
    const json& gr = j.value("grid", empty);
    get(gr, "elems_per_wavelength", o.elems_per_wavelength);
    opt(gr, "extent", o.extent);
    get(gr, "full_size", o.full_size);
    const json& tm = j.value("time", empty);
    get(tm, "samples_per_period", o.samples_per_period);
    opt(tm, "t_final", o.t_final);
    const json& sr = j.value("source", empty);
    opt(sr, "amplitude", o.amplitude);
    opt(sr, "theta_deg", o.theta_deg);
    opt(sr, "aperture", o.aperture);
    opt(sr, "focal_length", o.focal_length);
    get(sr, "ramp", o.ramp);
    get(sr, "t_off", o.t_off);
    get(sr, "incident_walls", o.incident_walls);
    const json& pc = j.value("picard", empty);
    get(pc, "tol", o.picard_tol);
    get(pc, "max", o.picard_max);
    const json& out = j.value("output", empty);
    get(out, "stride", o.output_stride);
    return o;
}

std::string options_to_json(const ScenarioOptions& o) {
    auto put = [](json& sec, const char* key, const std::optional<double>& v) {
        if (v) sec[key] = *v;
    };
    json j;
    json ph = json::object();
    put(ph, "c", o.c);
    put(ph, "rho", o.rho);
    put(ph, "b_over_a", o.b_over_a);
    put(ph, "alpha_abs", o.alpha_abs);
    put(ph, "omega", o.omega);
    ph["linear"] = o.linear;
    ph["undamped"] = o.undamped;
    j["physical"] = ph;
    json gr = {{"elems_per_wavelength", o.elems_per_wavelength}, {"full_size", o.full_size}};
    put(gr, "extent", o.extent);
    j["grid"] = gr;
    json tm = {{"samples_per_period", o.samples_per_period}};
    put(tm, "t_final", o.t_final);
    j["time"] = tm;
    json sr = {{"ramp", o.ramp}, {"t_off", o.t_off}, {"incident_walls", o.incident_walls}};
    put(sr, "amplitude", o.amplitude);
    put(sr, "theta_deg", o.theta_deg);
    put(sr, "aperture", o.aperture);
    put(sr, "focal_length", o.focal_length);
    j["source"] = sr;
    j["picard"] = {{"tol", o.picard_tol}, {"max", o.picard_max}};
    j["output"] = {{"stride", o.output_stride}};
    return j.dump(2);
}

ScenarioResult run_scenario(const std::string& name, std::optional<AbcSpec> abc,
                            const ScenarioOptions& opt, const std::string& out_dir,
                            const ReferenceSeries* reference) {
    ScenarioResult res;
    res.scenario = make_scenario(name, abc, opt);
    Solver solver(res.scenario.config);
    res.run = solver.run();
    std::optional<ReferenceSeries> own;
    if (!reference) {
        own = reference_solution(res.scenario);
        reference = &*own;
    }
    res.error = relative_error(res.run, *reference);
    const EnergyEvaluator ev(solver.ops(), res.scenario.config.params);
    res.energy = energy_report(res.run, ev);

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_delta_csv(out_dir + "/delta.csv", res.error);
        write_energy_csv(out_dir + "/energy.csv", res.energy);
        json meta = json::parse(options_to_json(opt));
        meta["scenario"] = name;
        meta["abc"]["spec"] = abc ? to_string(*abc) : "none";
        std::ofstream(out_dir + "/run.json") << meta.dump(2) << '\n';
    }
    return res;
}

}  // namespace westabc
