#include "westabc/wellposed.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "westabc/energy.hpp"

namespace westabc {

void WBounds::validate(const PhysicalParams& p) const {
    if (!(m_lower > 0 && m_upper > 0 && a_bar > 0 && b_bar > 0 && c_bar > 0))
        throw InvalidParameter("W bounds must be positive");
    if (p.gamma > 0 && !(m_upper < 1.0 / (2.0 * p.c * p.c * p.gamma)))
        throw InvalidParameter("upper pointwise bound must stay below 1/(2 c^2 gamma)");
}

Vec u2_initial(const Vec& u0, const Vec& u1, const PhysicalParams& p,
               const DiscreteOperators& ops) {
    check_degeneracy(u0, p, "u2_initial");
    if (u0.isZero(0.0) && u1.isZero(0.0)) return Vec::Zero(u0.size());
    const MassSolver minv(ops.mass);
    Vec num = discrete_laplacian(ops, minv, u0) + 2.0 * p.gamma * u1.cwiseProduct(u1);
    if (p.beta != 0.0 && !u1.isZero(0.0)) num += p.beta * discrete_laplacian(ops, minv, u1);
    return num.cwiseQuotient(Vec::Constant(u0.size(), p.inv_c2()) - 2.0 * p.gamma * u0);
}

double picard_distance(const RunOutput& u, const RunOutput& w, const RunOutput& coeff_from,
                       const DiscreteOperators& ops, const PhysicalParams& p) {
    if (u.snapshots.size() != w.snapshots.size() ||
        u.snapshots.size() != coeff_from.snapshots.size())
        throw InvalidParameter("iterates must share the time grid");
    double sup_e = 0.0, bnd = 0.0, prev_b = 0.0;
    for (std::size_t k = 0; k < u.snapshots.size(); ++k) {
        const WaveState& a = u.snapshots[k].state;
        const WaveState& b = w.snapshots[k].state;
        const Vec du = a.u - b.u, dv = a.ut - b.ut;
        const Vec al = Vec::Constant(du.size(), p.inv_c2()) -
                       2.0 * p.gamma * coeff_from.snapshots[k].state.u;
        const double e =
            0.5 * (dv.dot(ops.weighted_mass_apply(al, dv)) + du.dot(ops.stiffness * du));
        sup_e = std::max(sup_e, std::sqrt(std::max(e, 0.0)));
        double cb = 0.0;
        for (const auto& bn : ops.abc_nodes) cb += du[bn.node] * du[bn.node];
        if (k > 0) bnd += 0.5 * (a.t - u.snapshots[k - 1].state.t) * (prev_b + cb);
        prev_b = cb;
    }
    return std::max(sup_e, std::sqrt(bnd));
}

PicardResult picard_iterate(const SimConfig& cfg_in, int zeta, int n_iter) {
    if (n_iter < 1) throw InvalidParameter("need at least one Picard iterate");
    SimConfig cfg = cfg_in;
    cfg.output_stride = 1;
    const Solver probe(cfg);
    const DiscreteOperators& ops = probe.ops();
    const WaveState s0 = probe.initial_state();
    const int steps = probe.step_count();

    // v^0: u0 held constant in time
    std::vector<FrozenLevel> frozen(steps + 1, FrozenLevel{s0.u, Vec::Zero(s0.u.size())});

    PicardResult out;
    for (int k = 0; k < n_iter; ++k) {
        out.iterates.push_back(linearized_run(cfg, frozen, zeta));
        const RunOutput& cur = out.iterates.back();
        for (int j = 0; j <= steps; ++j) {
            frozen[j].v = cur.snapshots[j].state.u;
            frozen[j].vt = cur.snapshots[j].state.ut;
        }
        if (k == 0) continue;
        const double d = picard_distance(cur, out.iterates[k - 1], cur, ops, cfg.params);
        out.distances.push_back(d);
        if (out.distances.size() > 1) {
            const double prev = out.distances[out.distances.size() - 2];
            const double r = prev > 0 ? d / prev : 0.0;
            out.ratios.push_back(r);
            if (r >= 1.0)
                out.warnings.push_back("iterate " + std::to_string(k + 1) +
                                       ": distance did not shrink");
        }
    }
    return out;
}

bool WReport::all_hold() const {
    return std::all_of(constraints.begin(), constraints.end(),
                       [](const WConstraint& c) { return c.holds; });
}

WReport w_membership(const RunOutput& run, const WBounds& bounds, const PhysicalParams& p,
                     const DiscreteOperators& ops) {
    WReport rep;
    double vmin = 0.0, vmax = 0.0, sup_l1 = 0.0, l2_linf = 0.0, l2_bnd = 0.0, sup_e4 = 0.0;
    double prev_linf = 0.0, prev_bnd = 0.0;
    const Vec lumped = ops.mass * Vec::Ones(ops.n());
    const bool two_d = ops.grid.dim == 2;
    std::optional<EnergyEvaluator> ev;
    if (two_d) ev.emplace(ops, p);
    for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
        const WaveState& s = run.snapshots[k].state;
        vmin = k == 0 ? s.u.minCoeff() : std::min(vmin, s.u.minCoeff());
        vmax = k == 0 ? s.u.maxCoeff() : std::max(vmax, s.u.maxCoeff());
        sup_l1 = std::max(sup_l1, lumped.dot(s.ut.cwiseAbs()));
        const double linf = s.utt.cwiseAbs2().maxCoeff();
        double bnd = 0.0;
        for (const auto& b : ops.abc_nodes) bnd += s.utt[b.node] * s.utt[b.node];
        if (k > 0) {
            const double h = s.t - run.snapshots[k - 1].state.t;
            l2_linf += 0.5 * h * (prev_linf + linf);
            l2_bnd += 0.5 * h * (prev_bnd + bnd);
        }
        prev_linf = linf;
        prev_bnd = bnd;
        if (two_d) sup_e4 = std::max(sup_e4, ev->energy(4, s));
    }
    auto add = [&](std::string name, double value, double bound, std::string how) {
        rep.constraints.push_back({std::move(name), value, bound, value <= bound, std::move(how)});
    };
    add("lower pointwise bound", -vmin, bounds.m_lower, "nodal minimum over all snapshots");
    add("upper pointwise bound", vmax, bounds.m_upper, "nodal maximum over all snapshots");
    if (two_d) {
        add("E4 bound", std::sqrt(sup_e4), bounds.a_bar, "sqrt of max over snapshots of E4");
    } else {
        add("v_t in C(0,T;L1)", sup_l1, bounds.a_bar, "max over snapshots of lumped-mass L1");
        add("v_tt in L2(0,T;Linf)", std::sqrt(l2_linf), bounds.b_bar,
            "trapezoid in time of nodal max squared");
    }
    add("boundary v_tt in L2(0,T)", std::sqrt(l2_bnd), bounds.c_bar,
        "trapezoid in time of summed absorbing-node squares");
    return rep;
}

}  // namespace westabc
