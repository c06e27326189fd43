#include "westabc/solver.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>


namespace westabc {

namespace {

// Hands a fixed factorization to an Eigen Krylov solver.
class FactorPreconditioner {
public:
    using Factor = Eigen::SimplicialLDLT<SpMat>;

    FactorPreconditioner() = default;
    template <class M>
    explicit FactorPreconditioner(const M&) {}

    void attach(const Factor* f) { factor_ = f; }

    template <class M>
    FactorPreconditioner& analyzePattern(const M&) { return *this; }
    template <class M>
    FactorPreconditioner& factorize(const M&) { return *this; }
    template <class M>
    FactorPreconditioner& compute(const M&) { return *this; }

    template <class R>
    Vec solve(const R& b) const { return factor_->solve(Vec(b)); }

    Eigen::ComputationInfo info() const { return Eigen::Success; }

private:
    const Factor* factor_ = nullptr;
};

struct SourcePoint {
    int node;
    double weight;
    double delay;  // travel-time offset of the datum
    double scale;  // multiplies the amplitude (incident walls: -/+ tan theta)
};

std::string at_time(const std::string& what, double t) {
    std::ostringstream os;
    os << what << " (t = " << t << " s)";
    return os.str();
}

}  // namespace

double source_signal(double tau, const PhysicalParams& p, const SourceSpec& s) {
    if (tau < 0) return 0.0;
    const double phase = 2.0 * std::numbers::pi * p.omega * tau;
    double v = std::sin(phase);
    if (s.ramp && tau * p.omega < 1.0) v *= 0.5 * (1.0 - std::cos(0.5 * phase));
    return v;
}

struct Solver::Impl {
    const SimConfig& cfg;
    const DiscreteOperators& ops;
    const PhysicalParams& p;
    const int n;
    const int dim;
    const double dt, c1, c2;

    SpMat base;  // c^-2 M + (c2 + beta c1) K
    SpMat sys;
    std::vector<SourcePoint> sources;
    std::vector<AbcSpec> node_spec;  // per abc node, corners demoted
    std::vector<bool> node_evolved;
    RuleForm jform;  // tangential-term shape (independent of the trace)

    bool use_direct;
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    bool lu_analyzed = false;
    bool lu_fresh = false;  // factorization valid for the constant linear matrix
    FactorPreconditioner::Factor precond_factor;
    Eigen::BiCGSTAB<SpMat, FactorPreconditioner> krylov;

    Impl(const SimConfig& c, const DiscreteOperators& o)
        : cfg(c), ops(o), p(c.params), n(o.n()), dim(o.grid.dim), dt(c.dt),
          c1(0.5 * c.dt), c2(0.25 * c.dt * c.dt) {
        validate(cfg.abc, dim);
        base = ops.mass * p.inv_c2() + ops.stiffness * (c2 + p.beta * c1);
        base.makeCompressed();
        build_sources();
        for (const auto& b : ops.abc_nodes) {
            AbcSpec s = b.corner ? corner_spec(cfg.abc) : cfg.abc;
            node_spec.push_back(s);
            node_evolved.push_back(is_evolved(s, dim));
        }
        jform = linearize(cfg.abc, dim, BoundaryTrace{}, p, dt);
        use_direct = n <= cfg.direct_limit;
        if (!use_direct) build_preconditioner();
    }

    void build_sources() {
        const Grid& g = ops.grid;
        const SourceSpec& s = cfg.source;
        const double th = s.theta_deg * std::numbers::pi / 180.0;
        auto delay_of = [&](double x, double y) {
            switch (s.shape) {
                case SourceShape::Flat: return 0.0;
                case SourceShape::Tilted: return (y - g.y0) * std::sin(th) / p.c;
                case SourceShape::Concave: {
                    const double f = s.focal_length, a = 0.5 * s.aperture;
                    const double r = std::hypot(x - s.center, f);
                    return (std::hypot(a, f) - r) / p.c;
                }
            }
            return 0.0;
        };
        if (g.dim == 1) {
            if (g.facet_tags[XMin][0] == BoundaryTag::Source) sources.push_back({0, 1.0, 0.0, 1.0});
            if (g.facet_tags[XMax][0] == BoundaryTag::Source)
                sources.push_back({g.nx, 1.0, 0.0, 1.0});
            return;
        }
        const bool walls = s.incident_walls && s.shape == SourceShape::Tilted;
        for (int side = 0; side < 4; ++side) {
            const bool vertical = side == XMin || side == XMax;
            for (int f = 0; f < g.facets_on(side); ++f) {
                const BoundaryTag tag = g.facet_tags[side][f];
                double scale = 0.0;
                bool wall = false;
                if (tag == BoundaryTag::Source) {
                    scale = 1.0;
                } else if (walls && tag == BoundaryTag::Rigid && !vertical) {
                    // flux of the incident plane wave through the lateral walls
                    scale = (side == YMax ? -1.0 : 1.0) * std::tan(th);
                    wall = true;
                }
                if (scale == 0.0) continue;
                for (int e = 0; e < 2; ++e) {
                    int i, j;
                    if (vertical) {
                        i = side == XMin ? 0 : g.nx;
                        j = f + e;
                    } else {
                        i = f + e;
                        j = side == YMin ? 0 : g.ny;
                    }
                    const double len = vertical ? g.hy : g.hx;
                    const double x = g.x(i), y = g.y(j);
                    const double delay =
                        wall ? ((x - g.x0) * std::cos(th) + (y - g.y0) * std::sin(th)) / p.c
                             : delay_of(x, y);
                    sources.push_back({g.node(i, j), 0.5 * len, delay, scale});
                }
            }
        }
    }

    Vec source_load(double t) const {
        Vec out = Vec::Zero(n);
        if (cfg.source.t_off >= 0 && t >= cfg.source.t_off) return out;
        for (const auto& sp : sources)
            out[sp.node] += sp.weight * sp.scale * cfg.source.amplitude *
                            source_signal(t - sp.delay, p, cfg.source);
        return out;
    }

    void build_preconditioner() {
        SpMat a0 = base;
        for (std::size_t k = 0; k < ops.abc_nodes.size(); ++k) {
            const auto& b = ops.abc_nodes[k];
            const RuleForm rf = linearize(node_spec[k], dim, BoundaryTrace{}, p, dt);
            double d;
            if (rf.evolved) {
                const double e = rf.flux_is_beta ? c1 : c1 + p.beta;
                d = e * (rf.m + 2.0 * rf.kappa * rf.j_scale * (c2 + rf.j_v * c1 + rf.j_a) /
                                    (b.ht > 0 ? b.ht * b.ht : 1.0) * (b.corner ? 0.0 : 1.0));
            } else {
                d = rf.p * (rf.flux_is_beta ? c1 : c1 + p.beta);
            }
            a0.coeffRef(b.node, b.node) += b.weight * d;
        }
        precond_factor.compute(a0);
        if (precond_factor.info() != Eigen::Success)
            throw std::runtime_error("preconditioner factorization failed");
        krylov.preconditioner().attach(&precond_factor);
        krylov.setTolerance(cfg.linear_tol);
        krylov.setMaxIterations(500);
    }

    Vec solve(const Vec& rhs, const Vec& guess, bool constant_matrix) {
        if (use_direct) {
            if (!(constant_matrix && lu_fresh)) {
                if (!lu_analyzed) {
                    lu.analyzePattern(sys);
                    lu_analyzed = true;
                }
                lu.factorize(sys);
                if (lu.info() != Eigen::Success)
                    throw std::runtime_error("sparse LU factorization failed");
                lu_fresh = constant_matrix;
            }
            return lu.solve(rhs);
        }
        krylov.compute(sys);
        Vec x = krylov.solveWithGuess(rhs, guess);
        if (krylov.info() != Eigen::Success && krylov.error() > 1e3 * cfg.linear_tol)
            throw ConvergenceError("Krylov solve stalled at relative residual " +
                                   std::to_string(krylov.error()));
        return x;
    }

    // J = j_scale * D_yy(u + j_v v + j_a a) at one node
    double tangential(const BoundaryNode& b, const Vec& u, const Vec& v, const Vec& a) const {
        if (jform.j_scale == 0.0 || b.corner || b.tprev < 0 || b.tnext < 0) return 0.0;
        auto f = [&](int i) { return u[i] + jform.j_v * v[i] + jform.j_a * a[i]; };
        return jform.j_scale * (f(b.tprev) - 2.0 * f(b.node) + f(b.tnext)) / (b.ht * b.ht);
    }

    // Trace at the current iterate; q is the frozen flux value for evolved rules.
    BoundaryTrace trace(std::size_t k, const Vec& u, const Vec& v, const Vec& a, double q,
                        double r, double accum) const {
        const BoundaryNode& b = ops.abc_nodes[k];
        BoundaryTrace tr;
        tr.u = u[b.node];
        tr.ut = v[b.node];
        tr.utt = a[b.node];
        tr.accum = accum;
        const bool beta_flux = node_spec[k].family == AbcFamily::PS_BETA;
        if (node_evolved[k]) {
            if (beta_flux) {
                tr.ub_n = q;
                tr.un = normal_derivative(ops, b, u, 2);
            } else {
                tr.un = q;
            }
            tr.unt = r;
            tr.unn = normal_second_derivative(ops, b, u);
        } else {
            tr.un = normal_derivative(ops, b, u, 2);
        }
        return tr;
    }

    struct Iterate {
        Vec a;
        Vec q, r, accum;  // per abc node
        Vec g;            // per abc node boundary datum (u + beta u_t)_n
    };

    // Assemble the boundary part for one Picard iterate; adds into sys and rhs.
    // Returns the affine map a -> g via (g0, gdiag, goff) for post-processing.
    struct BoundaryLin {
        double g0 = 0, gdiag = 0;
        double rate0 = 0, rate_diag = 0;  // rate = rate0 + rate_diag a_i + rate_j * (D a)
        double rate_j = 0;
        bool evolved = false;
        double e = 0;
    };

    std::vector<BoundaryLin> lin;

    void add_boundary(const WaveState& s, const Vec& uh, const Vec& vh, const Vec& ustar,
                      const Vec& vstar, const Vec& a, const Iterate& it, Vec& rhs) {
        const std::size_t nb = ops.abc_nodes.size();
        lin.assign(nb, {});
        for (std::size_t k = 0; k < nb; ++k) {
            const BoundaryNode& b = ops.abc_nodes[k];
            const int i = b.node;
            const double w = b.weight;
            const BoundaryTrace tr = trace(k, ustar, vstar, a, it.q[k], it.r[k], it.accum[k]);
            const RuleForm rf = linearize(node_spec[k], dim, tr, p, dt);
            BoundaryLin& L = lin[k];
            L.evolved = rf.evolved;
            if (!rf.evolved) {
                if (rf.flux_is_beta) {
                    L.g0 = -rf.p * vh[i];
                    L.gdiag = -rf.p * c1;
                } else {
                    L.g0 = -rf.p * vh[i] - p.beta * rf.dp_du * vstar[i] * vstar[i];
                    L.gdiag = -rf.p * (c1 + p.beta);
                }
                sys.coeffRef(i, i) -= w * L.gdiag;
                rhs[i] += w * L.g0;
                continue;
            }
            const double e = rf.flux_is_beta ? c1 : c1 + p.beta;
            L.e = e;
            const double jcoef = rf.kappa * rf.j_scale;
            const double ja = c2 + rf.j_v * c1 + rf.j_a;
            double jhat = 0.0;
            if (jcoef != 0.0 && !b.corner && b.tprev >= 0 && b.tnext >= 0) {
                auto f = [&](int j) { return uh[j] + rf.j_v * vh[j]; };
                jhat = (f(b.tprev) - 2.0 * f(i) + f(b.tnext)) / (b.ht * b.ht);
                const double h2 = b.ht * b.ht;
                sys.coeffRef(i, b.tprev) -= w * e * jcoef * ja / h2;
                sys.coeffRef(i, b.tnext) -= w * e * jcoef * ja / h2;
                sys.coeffRef(i, i) += 2.0 * w * e * jcoef * ja / h2;
                L.rate_j = jcoef * ja;
            }
            L.rate0 = rf.phi + rf.a_prev_coeff * s.utt[i] + jcoef * jhat;
            L.rate_diag = -rf.m;
            sys.coeffRef(i, i) += w * e * rf.m;
            const double qn = s.flux[i], rn = s.flux_rate[i];
            L.g0 = qn + c1 * rn + e * L.rate0;
            rhs[i] += w * L.g0;
        }
    }

    // Rates, fluxes and data after a solve for a.
    void boundary_update(const WaveState& s, const Vec& a, Iterate& it) const {
        for (std::size_t k = 0; k < ops.abc_nodes.size(); ++k) {
            const BoundaryNode& b = ops.abc_nodes[k];
            const int i = b.node;
            const BoundaryLin& L = lin[k];
            if (!L.evolved) {
                it.g[k] = L.g0 + L.gdiag * a[i];
                continue;
            }
            double da = 0.0;
            if (L.rate_j != 0.0)
                da = (a[b.tprev] - 2.0 * a[i] + a[b.tnext]) / (b.ht * b.ht);
            const double r = L.rate0 + L.rate_diag * a[i] + L.rate_j * da;
            it.r[k] = r;
            it.q[k] = s.flux[i] + c1 * (s.flux_rate[i] + r);
            it.g[k] = L.g0 + L.e * (L.rate_diag * a[i] + L.rate_j * da);
        }
    }

    bool linear_problem() const { return p.gamma == 0.0; }

    StepReport step(WaveState& s) {
        const double t1 = s.t + dt;
        const Vec uh = s.u + dt * s.ut + c2 * s.utt;
        const Vec vh = s.ut + c1 * s.utt;
        const Vec src = source_load(t1);
        const Vec kpart = ops.stiffness * (uh + p.beta * vh);
        const std::size_t nb = ops.abc_nodes.size();

        // tangential term at the old level, for the accumulator
        Vec jold(nb);
        for (std::size_t k = 0; k < nb; ++k)
            jold[k] = tangential(ops.abc_nodes[k], s.u, s.ut, s.utt);

        Iterate it;
        it.a = s.utt;
        it.q.resize(nb);
        it.r.resize(nb);
        it.accum.resize(nb);
        it.g.setZero(nb);
        for (std::size_t k = 0; k < nb; ++k) {
            const int i = ops.abc_nodes[k].node;
            it.q[k] = s.flux[i] + dt * s.flux_rate[i];
            it.r[k] = s.flux_rate[i];
        }

        StepReport rep;
        const bool linear = linear_problem();
        const Vec two_gamma = Vec::Constant(n, 2.0 * p.gamma);
        for (int iter = 1;; ++iter) {
            const Vec ustar = uh + c2 * it.a;
            const Vec vstar = vh + c1 * it.a;
            rep.min_coeff = p.inv_c2() - 2.0 * p.gamma * ustar.maxCoeff();
            check_degeneracy(ustar, p, "Picard iterate");
            for (std::size_t k = 0; k < nb; ++k) {
                const BoundaryNode& b = ops.abc_nodes[k];
                it.accum[k] = s.bc_accum[b.node] +
                              c1 * (jold[k] + tangential(b, ustar, vstar, it.a));
            }

            sys = base;
            Vec rhs = -kpart + src;
            if (!linear) {
                ops.add_weighted_mass(ustar, -2.0 * p.gamma, sys);
                rhs += ops.weighted_mass_apply(two_gamma.cwiseProduct(vstar), vstar);
            }
            add_boundary(s, uh, vh, ustar, vstar, it.a, it, rhs);
            Vec a = solve(rhs, it.a, linear);
            boundary_update(s, a, it);

            const double da = (a - it.a).norm(), an = a.norm();
            it.a = std::move(a);
            rep.picard_iters = iter;
            rep.picard_residual = an > 0 ? da / an : 0.0;
            if (linear || da == 0.0 || da <= cfg.picard_tol * an) break;
            if (iter >= cfg.picard_max)
                throw ConvergenceError(at_time("Picard iteration did not converge", t1));
        }

        finish(s, uh, vh, it, src, jold);
        s.t = t1;
        return rep;
    }

    void finish(WaveState& s, const Vec& uh, const Vec& vh, const Iterate& it, const Vec& src,
                const Vec& jold) {
        s.u = uh + c2 * it.a;
        s.ut = vh + c1 * it.a;
        s.utt = it.a;
        s.load = src;
        for (std::size_t k = 0; k < ops.abc_nodes.size(); ++k) {
            const BoundaryNode& b = ops.abc_nodes[k];
            const int i = b.node;
            s.load[i] += b.weight * it.g[k];
            s.bc_accum[i] += c1 * (jold[k] + tangential(b, s.u, s.ut, s.utt));
            if (node_evolved[k]) {
                s.flux[i] = it.q[k];
                s.flux_rate[i] = it.r[k];
            } else {
                s.flux[i] = it.g[k];
                s.flux_rate[i] = 0.0;
            }
        }
    }

    StepReport step_linearized(WaveState& s, const FrozenLevel& next, int zeta) {
        const double t1 = s.t + dt;
        check_degeneracy(next.v, p, "frozen coefficient");
        const Vec uh = s.u + dt * s.ut + c2 * s.utt;
        const Vec vh = s.ut + c1 * s.utt;
        const Vec src = source_load(t1);
        const Vec fcoef = 2.0 * p.gamma * next.vt;

        sys = base;
        Vec rhs = -(ops.stiffness * (uh + p.beta * vh)) + src;
        if (p.gamma != 0.0) {
            ops.add_weighted_mass(next.v, -2.0 * p.gamma, sys);
            ops.add_weighted_mass(fcoef, -c1, sys);
            rhs += ops.weighted_mass_apply(fcoef, vh);
        }
        std::vector<double> factor(ops.abc_nodes.size());
        for (std::size_t k = 0; k < ops.abc_nodes.size(); ++k) {
            const BoundaryNode& b = ops.abc_nodes[k];
            const double v = next.v[b.node];
            const double al = alpha_coeff(v, p);
            const double z = zeta * p.gamma * v;
            factor[k] = std::sqrt(al) * (2.0 * al - z) / (2.0 * al + z);
            sys.coeffRef(b.node, b.node) += b.weight * factor[k] * c1;
            rhs[b.node] -= b.weight * factor[k] * vh[b.node];
        }
        const Vec a = solve(rhs, s.utt, false);

        StepReport rep;
        rep.picard_iters = 1;
        rep.min_coeff = p.inv_c2() - 2.0 * p.gamma * next.v.maxCoeff();
        s.u = uh + c2 * a;
        s.ut = vh + c1 * a;
        s.utt = a;
        s.load = src;
        for (std::size_t k = 0; k < ops.abc_nodes.size(); ++k) {
            const BoundaryNode& b = ops.abc_nodes[k];
            const double g = -factor[k] * s.ut[b.node];
            s.flux[b.node] = g;
            s.load[b.node] += b.weight * g;
        }
        s.t = t1;
        return rep;
    }

    WaveState initial_state() const {
        const Grid& g = ops.grid;
        WaveState s;
        s.resize(n);
        for (int j = 0; j < g.nodes_y(); ++j)
            for (int i = 0; i < g.nodes_x(); ++i) {
                const double x = g.x(i), y = g.dim == 2 ? g.y(j) : 0.0;
                if (cfg.u0) s.u[g.node(i, j)] = cfg.u0(x, y);
                if (cfg.u1) s.ut[g.node(i, j)] = cfg.u1(x, y);
            }
        check_degeneracy(s.u, p, "initial data");

        // boundary loads from the initial trace, then u_tt from the discrete
        // system itself so that the first step is consistent
        s.load = source_load(0.0);
        const Vec ub = s.u + p.beta * s.ut;
        for (const BoundaryNode& b : ops.abc_nodes)
            s.load[b.node] += b.weight * normal_derivative(ops, b, ub, 2);
        if (cfg.u0 || cfg.u1) {
            SpMat m = ops.pattern();
            ops.add_weighted_mass(Vec::Constant(n, p.inv_c2()) - 2.0 * p.gamma * s.u, 1.0, m);
            const Vec rhs = -(ops.stiffness * ub) +
                            ops.weighted_mass_apply(2.0 * p.gamma * s.ut, s.ut) + s.load;
            s.utt = Eigen::SimplicialLDLT<SpMat>(m).solve(rhs);
        }

        for (std::size_t k = 0; k < ops.abc_nodes.size(); ++k) {
            const BoundaryNode& b = ops.abc_nodes[k];
            const int i = b.node;
            const bool beta_flux = node_spec[k].family == AbcFamily::PS_BETA;
            const Vec& f = beta_flux ? Vec(s.u + p.beta * s.ut) : s.u;
            const double q = normal_derivative(ops, b, f, 2);
            s.flux[i] = q;
            if (node_evolved[k]) {
                BoundaryTrace tr;
                tr.u = s.u[i];
                tr.ut = s.ut[i];
                tr.utt = s.utt[i];
                tr.un = beta_flux ? normal_derivative(ops, b, s.u, 2) : q;
                tr.ub_n = q;
                tr.unn = normal_second_derivative(ops, b, s.u);
                const RuleForm rf = linearize(node_spec[k], dim, tr, p, dt);
                s.flux_rate[i] = -rf.m * s.utt[i] + rf.phi + rf.a_prev_coeff * s.utt[i] +
                                 rf.kappa * tangential(b, s.u, s.ut, s.utt);
            }
        }
        return s;
    }
};

Solver::Solver(SimConfig cfg) : cfg_(std::move(cfg)), ops_(assemble(cfg_.grid)) {
    if (!(cfg_.dt > 0)) throw InvalidParameter("dt must be positive");
    if (!(cfg_.t_final >= cfg_.dt)) throw InvalidParameter("t_final must be at least dt");
    if (!(cfg_.picard_tol > 0)) throw InvalidParameter("picard_tol must be positive");
    if (cfg_.picard_max < 1) throw InvalidParameter("picard_max must be at least 1");
    if (cfg_.output_stride < 1) throw InvalidParameter("output_stride must be at least 1");
    impl_ = std::make_unique<Impl>(cfg_, ops_);
}

Solver::~Solver() = default;

WaveState Solver::initial_state() const { return impl_->initial_state(); }

StepReport Solver::step(WaveState& s) {
    try {
        return impl_->step(s);
    } catch (const DegeneracyError& e) {
        throw DegeneracyError(at_time(e.what(), s.t + cfg_.dt));
    }
}

StepReport Solver::step_linearized(WaveState& s, const FrozenLevel& next, int zeta) {
    return impl_->step_linearized(s, next, zeta);
}

int Solver::step_count() const {
    return static_cast<int>(std::llround(cfg_.t_final / cfg_.dt));
}

Vec Solver::source_load(double t) const { return impl_->source_load(t); }

void Solver::run(const SnapshotSink& sink) {
    WaveState s = initial_state();
    StepReport rep;
    rep.min_coeff = cfg_.params.inv_c2() - 2.0 * cfg_.params.gamma * s.u.maxCoeff();
    sink(s, rep);
    const int steps = step_count();
    for (int k = 1; k <= steps; ++k) {
        rep = step(s);
        if (k % cfg_.output_stride == 0 || k == steps) sink(s, rep);
    }
}

RunOutput Solver::run() {
    RunOutput out;
    run([&](const WaveState& s, const StepReport& r) { out.snapshots.push_back({s, r}); });
    out.steps = step_count();
    return out;
}

std::pair<WaveState, StepReport> newmark_step(const WaveState& state, Solver& solver) {
    WaveState next = state;
    const StepReport rep = solver.step(next);
    return {std::move(next), rep};
}

RunOutput run(const SimConfig& cfg) {
    Solver s(cfg);
    return s.run();
}

RunOutput linearized_run(const SimConfig& cfg, const std::vector<FrozenLevel>& frozen, int zeta) {
    if (zeta != 0 && zeta != 1) throw InvalidParameter("zeta must be 0 or 1");
    Solver solver(cfg);
    const int steps = solver.step_count();
    if (static_cast<int>(frozen.size()) != steps + 1)
        throw InvalidParameter("frozen coefficient must cover every time level");
    for (const auto& f : frozen) check_degeneracy(f.v, cfg.params, "frozen coefficient");

    RunOutput out;
    out.steps = steps;
    WaveState s = solver.initial_state();
    StepReport rep;
    rep.min_coeff = cfg.params.inv_c2() - 2.0 * cfg.params.gamma * frozen[0].v.maxCoeff();
    out.snapshots.push_back({s, rep});
    for (int k = 1; k <= steps; ++k) {
        rep = solver.step_linearized(s, frozen[k], zeta);
        if (k % cfg.output_stride == 0 || k == steps) out.snapshots.push_back({s, rep});
    }
    return out;
}

}  // namespace westabc
