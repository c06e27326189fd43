#include "westabc/energy.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace westabc {

EnergyEvaluator::EnergyEvaluator(const DiscreteOperators& ops, const PhysicalParams& p,
                                 double lambda)
    : ops_(ops), p_(p), lambda_(lambda), minv_(ops.mass) {
    if (!(lambda > 0)) throw InvalidParameter("lambda must be positive");
}

Vec EnergyEvaluator::alpha(const Vec& u) const {
    check_degeneracy(u, p_, "energy evaluation");
    return (Vec::Constant(u.size(), p_.inv_c2()) - 2.0 * p_.gamma * u);
}

Vec EnergyEvaluator::laplacian(const Vec& f) const { return discrete_laplacian(ops_, minv_, f); }

Vec EnergyEvaluator::x_derivative(const Vec& f) const { return minv_.solve(ops_.deriv_x * f); }

double EnergyEvaluator::boundary_rate(const WaveState& s) const {
    const Vec w = ops_.facet_weights(BoundaryTag::Absorbing);
    double acc = 0.0;
    for (int i = 0; i < w.size(); ++i)
        if (w[i] != 0.0) acc += w[i] * std::sqrt(alpha_coeff(s.u[i], p_)) * s.ut[i] * s.ut[i];
    return acc;
}

double EnergyEvaluator::interior_rate(const WaveState& s) const {
    return p_.beta * s.ut.dot(ops_.stiffness * s.ut);
}

double EnergyEvaluator::energy(int level, const WaveState& s) const {
    const Vec a = alpha(s.u);
    const SpMat& K = ops_.stiffness;
    auto lap_term = [&] {
        const Vec l = laplacian(s.u);
        return lambda_ * p_.beta * l.dot(ops_.mass * l);
    };
    auto higher = [&] {
        const Vec a2 = a.cwiseProduct(a);
        const Vec gt = x_derivative(s.ut + p_.beta * s.utt);
        const Vec g0 = x_derivative(s.u + p_.beta * s.ut);
        return s.utt.dot(ops_.weighted_mass_apply(a2, s.utt)) +
               s.ut.dot(ops_.weighted_stiffness_apply(a, s.ut)) +
               gt.dot(ops_.weighted_mass_apply(a, gt)) + g0.dot(K * g0);
    };
    switch (level) {
        case 0: return 0.5 * (s.ut.dot(ops_.weighted_mass_apply(a, s.ut)) + s.u.dot(K * s.u));
        case 1: return 0.5 * (s.utt.dot(ops_.weighted_mass_apply(a, s.utt)) + s.ut.dot(K * s.ut));
        case 2: return 0.5 * higher();
        case 3:
            return 0.5 * (s.utt.dot(ops_.weighted_mass_apply(a, s.utt)) + s.ut.dot(K * s.ut) +
                          lap_term());
        case 4: return higher() + lap_term();
        default: throw InvalidParameter("energy level must be 0..4");
    }
}

double energy(int level, const WaveState& s, const PhysicalParams& p, const DiscreteOperators& ops,
              double lambda) {
    return EnergyEvaluator(ops, p, lambda).energy(level, s);
}

namespace {

void require_every_step(const RunOutput& run) {
    if (run.snapshots.empty() || static_cast<int>(run.snapshots.size()) != run.steps + 1)
        throw InvalidParameter("identity residuals need a snapshot at every step");
}

}  // namespace

std::vector<double> identity_residual(Identity which, const RunOutput& run,
                                      const EnergyEvaluator& ev) {
    require_every_step(run);
    const auto& snaps = run.snapshots;
    const auto& ops = ev.ops();
    const PhysicalParams& p = ev.params();
    const std::size_t n = snaps.size();
    std::vector<double> res(n, 0.0);

    if (which == Identity::Id0) {
        const double e00 = ev.energy(0, snaps[0].state);
        auto rate = [&](const WaveState& s) {
            // beta |grad u_t|^2 - gamma int u_t^3 - boundary work
            return ev.interior_rate(s) - p.gamma * s.ut.dot(ops.weighted_mass_apply(s.ut, s.ut)) -
                   s.load.dot(s.ut);
        };
        double acc = 0.0, prev = rate(snaps[0].state);
        for (std::size_t k = 1; k < n; ++k) {
            const double cur = rate(snaps[k].state);
            acc += 0.5 * (snaps[k].state.t - snaps[k - 1].state.t) * (prev + cur);
            prev = cur;
            res[k] = ev.energy(0, snaps[k].state) + acc - e00;
        }
        return res;
    }

    if (which == Identity::Id1) {
        const double e10 = ev.energy(1, snaps[0].state);
        // beta |grad u_tt|^2 - 5 gamma int u_t u_tt^2
        auto rate = [&](const WaveState& s) {
            return p.beta * s.utt.dot(ops.stiffness * s.utt) -
                   5.0 * p.gamma * s.utt.dot(ops.weighted_mass_apply(s.ut, s.utt));
        };
        double acc = 0.0, prev = rate(snaps[0].state);
        for (std::size_t k = 1; k < n; ++k) {
            const WaveState& a = snaps[k - 1].state;
            const WaveState& b = snaps[k].state;
            const double cur = rate(b);
            const double h = b.t - a.t;
            acc += 0.5 * h * (prev + cur);
            // boundary work of the time-differentiated datum, midpoint in time
            acc -= (b.load - a.load).dot(0.5 * (a.utt + b.utt));
            prev = cur;
            res[k] = ev.energy(1, b) + acc - e10;
        }
        return res;
    }

    // Id4
    auto lap_norm = [&](const Vec& l) { return l.dot(ops.mass * l); };
    auto rate = [&](const WaveState& s) {
        const Vec l = ev.laplacian(s.u);
        const Vec al = Vec::Constant(s.u.size(), p.inv_c2()) - 2.0 * p.gamma * s.u;
        const Vec lhs = al.cwiseProduct(s.utt) - 2.0 * p.gamma * s.ut.cwiseProduct(s.ut);
        return lhs.dot(ops.mass * l) - lap_norm(l);
    };
    const double l00 = lap_norm(ev.laplacian(snaps[0].state.u));
    double acc = 0.0, prev = rate(snaps[0].state);
    for (std::size_t k = 1; k < n; ++k) {
        const double cur = rate(snaps[k].state);
        acc += 0.5 * (snaps[k].state.t - snaps[k - 1].state.t) * (prev + cur);
        prev = cur;
        res[k] = 0.5 * p.beta * (lap_norm(ev.laplacian(snaps[k].state.u)) - l00) - acc;
    }
    return res;
}

EnergyReport energy_report(const RunOutput& run, const EnergyEvaluator& ev) {
    EnergyReport r;
    double di = 0.0, db = 0.0, ri = 0.0, rb = 0.0;
    for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
        const WaveState& s = run.snapshots[k].state;
        std::array<double, 5> e{};
        for (int l = 0; l < 5; ++l) e[l] = ev.energy(l, s);
        const double ci = ev.interior_rate(s), cb = ev.boundary_rate(s);
        if (k > 0) {
            const double h = s.t - r.t.back();
            di += 0.5 * h * (ri + ci);
            db += 0.5 * h * (rb + cb);
        }
        ri = ci;
        rb = cb;
        r.t.push_back(s.t);
        r.levels.push_back(e);
        r.d_int.push_back(di);
        r.d_bnd.push_back(db);
    }
    if (!run.snapshots.empty() && static_cast<int>(run.snapshots.size()) == run.steps + 1) {
        r.res0 = identity_residual(Identity::Id0, run, ev);
        r.res1 = identity_residual(Identity::Id1, run, ev);
        r.res4 = identity_residual(Identity::Id4, run, ev);
    }
    return r;
}

void write_energy_csv(const std::string& path, const EnergyReport& r) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "t,E0,E1,E2,E3,E4,D_int,D_bnd";
    const bool res = !r.res0.empty();
    if (res) f << ",res_id0,res_id1,res_id4";
    f << "\n" << std::scientific << std::setprecision(17);
    for (std::size_t k = 0; k < r.t.size(); ++k) {
        f << r.t[k];
        for (double e : r.levels[k]) f << ',' << e;
        f << ',' << r.d_int[k] << ',' << r.d_bnd[k];
        if (res) f << ',' << r.res0[k] << ',' << r.res1[k] << ',' << r.res4[k];
        f << '\n';
    }
}

}  // namespace westabc
