#pragma once

#include <string>
#include <vector>

#include "westabc/solver.hpp"

namespace westabc {

struct WBounds {
    double m_lower = 0;  // -m_lower <= v
    double m_upper = 0;  // v <= m_upper < 1/(2 c^2 gamma)
    double a_bar = 0;    // sup_t ||v_t||_{L1}, or sqrt(sup_t E4) in 2-d
    double b_bar = 0;    // ||v_tt||_{L2(0,T;Linf)}
    double c_bar = 0;    // ||v_tt(boundary)||_{L2(0,T)}

    void validate(const PhysicalParams& p) const;
};

// (Delta u0 + beta Delta u1 + 2 gamma u1^2) / (c^-2 - 2 gamma u0), nodal.
Vec u2_initial(const Vec& u0, const Vec& u1, const PhysicalParams& p,
               const DiscreteOperators& ops);

struct PicardResult {
    std::vector<RunOutput> iterates;  // u^1, u^2, ...
    std::vector<double> distances;    // d(u^{k+1}, u^k), k = 1..
    std::vector<double> ratios;       // distances[k] / distances[k-1]
    std::vector<std::string> warnings;
};

// Fixed-point iteration of the frozen-coefficient map, starting from the
// constant-in-time extension of u0. cfg.output_stride is ignored.
PicardResult picard_iterate(const SimConfig& cfg, int zeta, int n_iter);

// max{ sup_t sqrt(E0[u - w]), boundary L2(0,T) norm of u - w }, with the
// coefficient of E0 taken from `coeff_from`.
double picard_distance(const RunOutput& u, const RunOutput& w, const RunOutput& coeff_from,
                       const DiscreteOperators& ops, const PhysicalParams& p);

struct WConstraint {
    std::string name;
    double value = 0;
    double bound = 0;
    bool holds = true;
    std::string surrogate;  // discrete norm actually evaluated
};

struct WReport {
    std::vector<WConstraint> constraints;
    bool all_hold() const;
};

WReport w_membership(const RunOutput& run, const WBounds& bounds, const PhysicalParams& p,
                     const DiscreteOperators& ops);

}  // namespace westabc
