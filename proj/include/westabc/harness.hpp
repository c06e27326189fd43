#pragma once

#include <optional>
#include <string>
#include <vector>

#include "westabc/energy.hpp"
#include "westabc/solver.hpp"
#include "westabc/symbols.hpp"

namespace westabc {

// Overrides on top of a scenario's defaults. Unset optionals keep the default.
struct ScenarioOptions {
    std::optional<double> c, rho, b_over_a, alpha_abs, omega;
    bool linear = false;    // gamma = 0
    bool undamped = false;  // beta = 0
    double elems_per_wavelength = 50;
    double samples_per_period = 20;
    std::optional<double> t_final;
    std::optional<double> extent;  // main length of the domain [m]
    std::optional<double> amplitude;
    std::optional<double> theta_deg;
    std::optional<double> aperture, focal_length;
    bool ramp = false;
    double t_off = -1.0;
    bool incident_walls = true;
    bool full_size = false;  // hifu-2d: the 20 mm domain
    int output_stride = 1;
    double picard_tol = 1e-10;
    int picard_max = 50;
};

ScenarioOptions options_from_json(const std::string& json_text);
std::string options_to_json(const ScenarioOptions& o);

struct Scenario {
    std::string name;
    SimConfig config;          // run on the computational domain
    std::optional<AbcSpec> abc;  // empty: reflecting control
    double extension = 0;      // reference extension length [m]
};

// Names: seg-1d, waveguide-2d, hifu-2d, pulse-1d.
Scenario make_scenario(const std::string& name, std::optional<AbcSpec> abc,
                       const ScenarioOptions& opt = {});
std::vector<std::string> scenario_names();
// "none" selects the reflecting control.
std::optional<AbcSpec> parse_abc_or_none(const std::string& text);

// c t_final / 2 + 2 lambda
double min_extension(const PhysicalParams& p, double t_final);

struct ReferenceSeries {
    std::vector<double> t;
    std::vector<Vec> u;  // restricted to the computational domain
};

// Same solver on the enlarged domain with reflecting outer walls.
ReferenceSeries reference_solution(const Scenario& s);
// Configuration of the enlarged run and the node map onto the computational grid.
std::pair<SimConfig, std::vector<int>> reference_config(const Scenario& s);

struct ErrorSeries {
    std::vector<double> t, delta;
    std::vector<bool> absolute;  // reference norm vanished: delta holds |u - u*|
    double max_delta() const;
    double final_delta() const;
};

ErrorSeries relative_error(const std::vector<double>& t, const std::vector<Vec>& u,
                           const ReferenceSeries& ref);
ErrorSeries relative_error(const RunOutput& run, const ReferenceSeries& ref);

struct ScenarioResult {
    Scenario scenario;
    RunOutput run;
    ErrorSeries error;
    EnergyReport energy;
};

// Run, reference, error and energies. Writes delta.csv, energy.csv and
// run.json into out_dir when it is non-empty. A precomputed reference may be passed.
ScenarioResult run_scenario(const std::string& name, std::optional<AbcSpec> abc,
                            const ScenarioOptions& opt, const std::string& out_dir = "",
                            const ReferenceSeries* reference = nullptr);

void write_delta_csv(const std::string& path, const ErrorSeries& e);

// seg-1d with the beta-modified condition of order zeta, whose solution is
// the fixed point of the frozen-coefficient map with the same zeta.
// Smooth travelling frozen field for the symbol checks, amplitude at 10% of
// the degeneracy level, with time and space scales well below tau = 1e3.
FrozenField smooth_frozen_field(const PhysicalParams& p);

SimConfig picard_config(int zeta, const ScenarioOptions& opt = {});

}  // namespace westabc
