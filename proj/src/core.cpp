#include "westabc/core.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace westabc {

PhysicalParams derive_coefficients(double c, double rho, double b_over_a,
                                   double alpha_abs, double omega) {
    if (!(c > 0)) throw InvalidParameter("sound speed must be positive");
    if (!(rho > 0)) throw InvalidParameter("density must be positive");
    if (!(omega > 0)) throw InvalidParameter("frequency must be positive");
    if (b_over_a < 0 || alpha_abs < 0)
        throw InvalidParameter("B/A and absorption must be non-negative");

    PhysicalParams p;
    p.c = c;
    p.rho = rho;
    p.b_over_a = b_over_a;
    p.alpha_abs = alpha_abs;
    p.omega = omega;
    p.beta_a = 1.0 + b_over_a / 2.0;
    const double two_pi_w = 2.0 * std::numbers::pi * omega;
    // absorption is quoted per MHz
    p.b = 2.0 * (alpha_abs * omega / 1e6) * c * c * c / (two_pi_w * two_pi_w);
    p.beta = p.b / (c * c);
    p.gamma = p.beta_a / (rho * c * c * c * c);
    return p;
}

PhysicalParams liver_params(double omega) {
    return derive_coefficients(1596.0, 1050.0, 6.8, 4.5, omega);
}

PhysicalParams with_overrides(PhysicalParams p, bool linear, bool undamped) {
    if (linear) p.gamma = 0.0;
    if (undamped) {
        p.b = 0.0;
        p.beta = 0.0;
    }
    return p;
}

double alpha_coeff(double v, const PhysicalParams& p) {
    return p.inv_c2() - 2.0 * p.gamma * v;
}

namespace {
// Radicands within rounding of zero count as degenerate.
bool degenerate(double r, const PhysicalParams& p) {
    return !(r > 8.0 * std::numeric_limits<double>::epsilon() * p.inv_c2());
}
}  // namespace

double nu(double v, const PhysicalParams& p) {
    const double r = alpha_coeff(v, p);
    if (degenerate(r, p)) throw DegeneracyError("c^-2 - 2 gamma u is not positive");
    return std::sqrt(r);
}

int Grid::facets_on(int side) const {
    if (dim == 1) return 1;
    return (side == XMin || side == XMax) ? ny : nx;
}

void Grid::tag_side(int side, BoundaryTag t) {
    facet_tags[side].assign(facets_on(side), t);
}

Grid make_grid(const std::vector<std::array<double, 2>>& extents,
               const std::vector<int>& elems, double h_nominal) {
    if (extents.empty() || extents.size() > 2 || elems.size() != extents.size())
        throw InvalidParameter("grid must be 1-d or 2-d");
    Grid g;
    g.dim = static_cast<int>(extents.size());
    g.h_nominal = h_nominal;
    g.x0 = extents[0][0];
    g.x1 = extents[0][1];
    if (!(g.x1 > g.x0) || elems[0] < 1) throw InvalidParameter("degenerate extent");
    g.nx = elems[0];
    g.hx = (g.x1 - g.x0) / g.nx;
    if (g.dim == 2) {
        g.y0 = extents[1][0];
        g.y1 = extents[1][1];
        if (!(g.y1 > g.y0) || elems[1] < 1) throw InvalidParameter("degenerate extent");
        g.ny = elems[1];
        g.hy = (g.y1 - g.y0) / g.ny;
    } else {
        g.hy = g.hx;
    }
    for (int s = 0; s < g.side_count(); ++s) g.tag_side(s, BoundaryTag::Rigid);
    return g;
}

Grid build_grid(const std::vector<std::array<double, 2>>& extents,
                const PhysicalParams& p, double elems_per_wavelength) {
    if (!(elems_per_wavelength >= 2))
        throw InvalidParameter("need at least two elements per wavelength");
    const double h = p.wavelength() / elems_per_wavelength;
    std::vector<int> n;
    for (const auto& e : extents) {
        const double len = e[1] - e[0];
        if (!(len > 0)) throw InvalidParameter("degenerate extent");
        // tolerate round-off so that exact multiples do not gain an element
        n.push_back(static_cast<int>(std::ceil(len / h * (1.0 - 1e-12))));
    }
    return make_grid(extents, n, h);
}

double time_step(double omega, double samples_per_period) {
    if (!(omega > 0) || !(samples_per_period > 0))
        throw InvalidParameter("time_step needs positive arguments");
    return 1.0 / (samples_per_period * omega);
}

void WaveState::resize(int n) {
    for (Vec* v : {&u, &ut, &utt, &bc_accum, &flux, &flux_rate, &load}) v->setZero(n);
}

void check_degeneracy(const Vec& u, const PhysicalParams& p, const char* where) {
    if (p.gamma == 0.0) return;
    if (degenerate(alpha_coeff(u.maxCoeff(), p), p))
        throw DegeneracyError(std::string("degenerate coefficient in ") + where);
}

}  // namespace westabc
