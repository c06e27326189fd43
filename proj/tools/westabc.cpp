// westabc: command-line front end for the scenario harness.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "westabc/harness.hpp"
#include "westabc/wellposed.hpp"

using namespace westabc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

ScenarioOptions load_options(const std::string& path, std::string* abc_text = nullptr) {
    if (path.empty()) return {};
    const std::string text = slurp(path);
    if (abc_text) {
        const auto j = nlohmann::json::parse(text);
        if (j.contains("abc") && j["abc"].contains("spec")) *abc_text = j["abc"]["spec"];
    }
    return options_from_json(text);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, sep);)
        if (!item.empty()) out.push_back(item);
    return out;
}

int cmd_run(const std::string& scenario, std::string abc, const std::string& config,
            const std::string& out) {
    std::string from_file;
    const ScenarioOptions opt = load_options(config, &from_file);
    if (abc.empty()) abc = from_file.empty() ? "ps:1" : from_file;
    const ScenarioResult r = run_scenario(scenario, parse_abc_or_none(abc), opt, out);
    std::cout << std::scientific << std::setprecision(6) << scenario << ' ' << abc
              << " steps=" << r.run.steps << " max_delta=" << r.error.max_delta()
              << " final_delta=" << r.error.final_delta() << '\n';
    return 0;
}

int cmd_compare(const std::string& scenario, const std::string& abcs, const std::string& config,
                const std::string& out) {
    const ScenarioOptions opt = load_options(config);
    std::optional<ReferenceSeries> ref;
    std::cout << std::left << std::setw(16) << "abc" << std::setw(16) << "max_delta"
              << "final_delta\n";
    for (const std::string& a : split(abcs, ',')) {
        const auto spec = parse_abc_or_none(a);
        if (!ref) ref = reference_solution(make_scenario(scenario, spec, opt));
        std::string dir;
        if (!out.empty()) {
            dir = out + "/" + a;
            std::replace(dir.begin() + out.size(), dir.end(), ':', '_');
        }
        const ScenarioResult r = run_scenario(scenario, spec, opt, dir, &*ref);
        std::cout << std::left << std::setw(16) << a << std::scientific << std::setprecision(6)
                  << std::setw(16) << r.error.max_delta() << r.error.final_delta() << '\n';
    }
    return 0;
}

int cmd_symbols(const std::string& out) {
    const FrozenField f = smooth_frozen_field(liver_params(1e5));
    std::ostringstream csv;
    csv << "k,slope,expected\n" << std::scientific << std::setprecision(17);
    std::cout << "k  slope       expected\n";
    for (int k = 0; k <= 2; ++k) {
        const double s = residual_slope(k, f, 0.01, 1e-5);
        const double e = 2.0 - (k + 1);
        csv << k << ',' << s << ',' << e << '\n';
        std::cout << k << "  " << std::fixed << std::setprecision(6) << std::setw(10) << s
                  << "  " << e << '\n';
    }
    if (!out.empty()) {
        fs::create_directories(out);
        std::ofstream(out + "/slopes.csv") << csv.str();
    }
    return 0;
}

int cmd_picard(int zeta, int iters, std::optional<double> amplitude, const std::string& config,
               const std::string& out) {
    ScenarioOptions opt = load_options(config);
    if (amplitude) opt.amplitude = amplitude;
    const PicardResult r = picard_iterate(picard_config(zeta, opt), zeta, iters);
    std::ostringstream csv;
    csv << "k,distance,ratio\n" << std::scientific << std::setprecision(17);
    for (std::size_t k = 0; k < r.distances.size(); ++k) {
        csv << k + 1 << ',' << r.distances[k] << ',';
        if (k > 0) csv << r.ratios[k - 1];
        csv << '\n';
    }
    std::cout << csv.str();
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    if (!out.empty()) {
        fs::create_directories(out);
        std::ofstream(out + "/ratios.csv") << csv.str();
    }
    return 0;
}

// Re-executes a stored run at every step so that the identity residuals are available.
int cmd_energy(const std::string& dir) {
    const auto meta = nlohmann::json::parse(slurp(dir + "/run.json"));
    ScenarioOptions opt = options_from_json(meta.dump());
    opt.output_stride = 1;
    const std::string spec = meta["abc"].value("spec", std::string("none"));
    const Scenario sc = make_scenario(meta.at("scenario").get<std::string>(),
                                      parse_abc_or_none(spec), opt);
    Solver solver(sc.config);
    const RunOutput run = solver.run();
    const EnergyReport rep = energy_report(run, EnergyEvaluator(solver.ops(), sc.config.params));
    write_energy_csv(dir + "/energy.csv", rep);
    std::cout << "wrote " << dir << "/energy.csv (" << rep.t.size() << " rows)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Strongly damped Westervelt equation with nonlinear absorbing boundaries"};
    app.require_subcommand(1);

    std::string scenario = "seg-1d", abc, config, out;
    auto* run = app.add_subcommand("run", "run one scenario against its reference");
    run->add_option("--scenario", scenario)->check(CLI::IsMember(scenario_names()));
    run->add_option("--abc", abc, "family:order[:variant] or none");
    run->add_option("--config", config)->check(CLI::ExistingFile);
    run->add_option("--out", out);

    std::string abcs = "ps:0,ps:1,em:1,em:2";
    auto* cmp = app.add_subcommand("compare", "compare several conditions on one scenario");
    cmp->add_option("--scenario", scenario)->check(CLI::IsMember(scenario_names()));
    cmp->add_option("--abcs", abcs, "comma-separated list");
    cmp->add_option("--config", config)->check(CLI::ExistingFile);
    cmp->add_option("--out", out);

    auto* sym = app.add_subcommand("symbols-check", "residual slopes of the factorization");
    sym->add_option("--out", out);

    int zeta = 0, iters = 7;
    std::optional<double> amplitude;
    auto* pic = app.add_subcommand("picard", "contraction of the frozen-coefficient map");
    pic->add_option("--zeta", zeta)->check(CLI::IsMember({0, 1}));
    pic->add_option("--iters", iters)->check(CLI::PositiveNumber);
    pic->add_option("--amplitude", amplitude);
    pic->add_option("--config", config)->check(CLI::ExistingFile);
    pic->add_option("--out", out);

    std::string run_dir;
    auto* en = app.add_subcommand("energy", "energies and identity residuals of a stored run");
    en->add_option("--run", run_dir)->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(scenario, abc, config, out);
        if (*cmp) return cmd_compare(scenario, abcs, config, out);
        if (*sym) return cmd_symbols(out);
        if (*pic) return cmd_picard(zeta, iters, amplitude, config, out);
        if (*en) return cmd_energy(run_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
