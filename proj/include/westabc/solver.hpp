#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "westabc/abc.hpp"
#include "westabc/core.hpp"
#include "westabc/fem.hpp"

namespace westabc {

using InitialField = std::function<double(double x, double y)>;

struct SimConfig {
    PhysicalParams params;
    Grid grid;
    double dt = 5e-7;
    double t_final = 5e-6;
    SourceSpec source;
    AbcSpec abc;
    double picard_tol = 1e-10;
    int picard_max = 50;
    int output_stride = 1;
    InitialField u0, u1;  // empty: zero
    // Systems up to this size are refactored directly at every Picard iterate;
    // larger ones use a Krylov solve preconditioned by a run-constant factorization.
    int direct_limit = 6000;
    double linear_tol = 1e-14;
};

struct StepReport {
    int picard_iters = 0;
    double picard_residual = 0;
    double min_coeff = 0;
};

struct Snapshot {
    WaveState state;
    StepReport report;
};

struct RunOutput {
    std::vector<Snapshot> snapshots;
    int steps = 0;
};

using SnapshotSink = std::function<void(const WaveState&, const StepReport&)>;

// Coefficient field for the frozen (linearized) problem at one time level.
struct FrozenLevel {
    Vec v, vt;
};

class Solver {
public:
    explicit Solver(SimConfig cfg);
    ~Solver();
    Solver(const Solver&) = delete;
    Solver& operator=(const Solver&) = delete;

    const SimConfig& config() const { return cfg_; }
    const DiscreteOperators& ops() const { return ops_; }

    WaveState initial_state() const;
    // Advance one step of the nonlinear problem in place.
    StepReport step(WaveState& s);
    // Advance one step of the frozen-coefficient problem: coefficients and the
    // source term come from `next`, the boundary factor uses zeta.
    StepReport step_linearized(WaveState& s, const FrozenLevel& next, int zeta);

    int step_count() const;
    RunOutput run();
    void run(const SnapshotSink& sink);

    // Boundary load of the transducer (and incident-flux walls) at time t.
    Vec source_load(double t) const;

private:
    struct Impl;
    SimConfig cfg_;
    DiscreteOperators ops_;
    std::unique_ptr<Impl> impl_;
};

std::pair<WaveState, StepReport> newmark_step(const WaveState& state, Solver& solver);
RunOutput run(const SimConfig& cfg);
// Frozen-coefficient run: frozen[k] holds v, v_t at step k (k = 0..steps).
RunOutput linearized_run(const SimConfig& cfg, const std::vector<FrozenLevel>& frozen, int zeta);

// Time signal of the transducer: sin(2 pi omega tau) for tau >= 0.
double source_signal(double tau, const PhysicalParams& p, const SourceSpec& s);

}  // namespace westabc
