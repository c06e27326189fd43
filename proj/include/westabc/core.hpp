#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace westabc {

using Vec = Eigen::VectorXd;

struct InvalidParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when c^-2 - 2*gamma*u stops being positive.
struct DegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PhysicalParams {
    double c = 1596.0;
    double rho = 1050.0;
    double b_over_a = 6.8;
    double alpha_abs = 4.5;  // Np / m / MHz
    double omega = 1e5;      // Hz
    double beta_a = 0.0;
    double b = 0.0;
    double beta = 0.0;
    double gamma = 0.0;

    double inv_c2() const { return 1.0 / (c * c); }
    double wavelength() const { return c / omega; }
};

PhysicalParams derive_coefficients(double c, double rho, double b_over_a,
                                   double alpha_abs, double omega);

// Liver tissue at the given frequency.
PhysicalParams liver_params(double omega);

// Same medium with the nonlinearity and/or damping switched off.
PhysicalParams with_overrides(PhysicalParams p, bool linear, bool undamped);

double nu(double v, const PhysicalParams& p);
// Radicand c^-2 - 2 gamma v, no check.
double alpha_coeff(double v, const PhysicalParams& p);

enum class BoundaryTag { Rigid, Source, Absorbing };

// Sides: 0 = x-min, 1 = x-max, 2 = y-min, 3 = y-max.
enum Side : int { XMin = 0, XMax = 1, YMin = 2, YMax = 3 };

struct Grid {
    int dim = 1;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 0;
    int nx = 1, ny = 0;  // element counts
    double hx = 1, hy = 1;
    double h_nominal = 1;
    // One tag per boundary facet along each side (1-d sides carry one facet).
    std::array<std::vector<BoundaryTag>, 4> facet_tags;

    int nodes_x() const { return nx + 1; }
    int nodes_y() const { return dim == 2 ? ny + 1 : 1; }
    int node_count() const { return nodes_x() * nodes_y(); }
    int node(int i, int j = 0) const { return j * nodes_x() + i; }
    double x(int i) const { return x0 + i * hx; }
    double y(int j) const { return y0 + j * hy; }
    int side_count() const { return dim == 2 ? 4 : 2; }
    int facets_on(int side) const;

    void tag_side(int side, BoundaryTag t);
};

Grid build_grid(const std::vector<std::array<double, 2>>& extents,
                const PhysicalParams& p, double elems_per_wavelength);
// Uniform grid with prescribed element counts.
Grid make_grid(const std::vector<std::array<double, 2>>& extents,
               const std::vector<int>& elems, double h_nominal);

double time_step(double omega, double samples_per_period);

struct WaveState {
    double t = 0;
    Vec u, ut, utt;
    // Per-node integral of the tangential second-derivative terms (2-d order 1).
    Vec bc_accum;
    // Evolved normal-flux variables and their rates (per node, zero off Gamma_A).
    Vec flux, flux_rate;
    // Boundary load actually applied: w_i * (u + beta u_t)_n at boundary nodes.
    Vec load;

    void resize(int n);
};

void check_degeneracy(const Vec& u, const PhysicalParams& p, const char* where);

enum class SourceShape { Flat, Tilted, Concave };

struct SourceSpec {
    SourceShape shape = SourceShape::Flat;
    double amplitude = 1.0;       // Neumann datum for (u + beta u_t)_n
    double theta_deg = 0.0;       // tilted
    double aperture = 10e-3;      // concave: arc chord on the source wall
    double focal_length = 10e-3;  // concave: focal depth from the wall
    double center = 0.0;          // concave: arc center along the wall
    bool ramp = false;            // one-period raised-cosine onset
    double t_off = -1.0;          // switch off at this time (negative: never)
    bool incident_walls = false;  // lateral walls carry the incident-wave flux
};

}  // namespace westabc
