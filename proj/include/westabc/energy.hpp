#pragma once

#include <string>
#include <vector>

#include "westabc/fem.hpp"
#include "westabc/solver.hpp"

namespace westabc {

// Energy functionals with the coefficient c^-2 - 2 gamma u taken from the
// state itself. Levels:
//   0: 1/2 (|sqrt(a) u_t|^2 + |grad u|^2)
//   1: the same one time derivative higher
//   2: level 1 with alpha weights plus the u^b_x terms
//   3: level 1 plus lambda beta |Lap u|^2 / 2
//   4: level 2 without the factor 1/2, plus lambda beta |Lap u|^2
class EnergyEvaluator {
public:
    EnergyEvaluator(const DiscreteOperators& ops, const PhysicalParams& p, double lambda = 1.0);

    double energy(int level, const WaveState& s) const;
    Vec laplacian(const Vec& f) const;
    // Projected x-derivative M^{-1} int phi_i d_x f.
    Vec x_derivative(const Vec& f) const;
    // int_{Gamma_A} sqrt(alpha) u_t^2 (lumped)
    double boundary_rate(const WaveState& s) const;
    double interior_rate(const WaveState& s) const;  // beta |grad u_t|^2

    const DiscreteOperators& ops() const { return ops_; }
    const PhysicalParams& params() const { return p_; }

private:
    const DiscreteOperators& ops_;
    PhysicalParams p_;
    double lambda_;
    MassSolver minv_;
    Vec alpha(const Vec& u) const;
};

double energy(int level, const WaveState& s, const PhysicalParams& p, const DiscreteOperators& ops,
              double lambda = 1.0);

enum class Identity { Id0, Id1, Id4 };

// Left minus right side of the identity at every step; time integrals by the
// trapezoidal rule. Needs a snapshot at every step.
std::vector<double> identity_residual(Identity which, const RunOutput& run,
                                      const EnergyEvaluator& ev);

struct EnergyReport {
    std::vector<double> t;
    std::vector<std::array<double, 5>> levels;
    std::vector<double> d_int, d_bnd;       // cumulative dissipation
    std::vector<double> res0, res1, res4;   // empty when the run is strided
};

EnergyReport energy_report(const RunOutput& run, const EnergyEvaluator& ev);
void write_energy_csv(const std::string& path, const EnergyReport& r);

}  // namespace westabc
