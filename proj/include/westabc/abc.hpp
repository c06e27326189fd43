#pragma once

#include <string>

#include "westabc/core.hpp"

namespace westabc {

enum class AbcFamily { PS, PS_BETA, EM, PD };
enum class SignVariant { Section2, Theorem };

struct AbcSpec {
    AbcFamily family = AbcFamily::PS;
    int order = 0;
    SignVariant sign_variant = SignVariant::Section2;
    // Integrand of the beta-modified 2-d first-order condition:
    // true  -> u^b_yy + beta u^b_tyy, false -> (1 + beta) u^b_yy as printed.
    bool beta_t_integrand = true;
};

// "ps:1", "ps_beta:0", "em:2", "pd:2", "ps:1:theorem".
AbcSpec parse_abc(const std::string& text);
std::string to_string(const AbcSpec& s);
// Throws InvalidParameter if the (family, order, dim) combination is not implemented.
void validate(const AbcSpec& s, int dim);
// Whether the condition is a relation for the flux rate (evolved in time).
bool is_evolved(const AbcSpec& s, int dim);
// Same family at order 0 (EM: order 1); used at corners.
AbcSpec corner_spec(const AbcSpec& s);

// Pointwise boundary data. Derivatives in n are along the outward normal,
// derivatives in y along the boundary.
struct BoundaryTrace {
    double u = 0, ut = 0, utt = 0;
    double un = 0, unt = 0, unn = 0;
    double ub_n = 0;   // (u + beta u_t)_n
    double uyy = 0;    // u_yy
    double ubyy = 0;   // integrand for the beta-modified 2-d condition
    double accum = 0;  // time integral of the tangential term
};

// Normal-derivative patch for mu.
struct TracePatch {
    double v = 0, vt = 0, vtt = 0, vn = 0, vnt = 0, vnn = 0;
};

double mu_eval(const TracePatch& p, const PhysicalParams& prm);
// Variant carrying 4 gamma v_t and the -2 gamma v_tt term.
double mu_tilde_eval(const TracePatch& p, const PhysicalParams& prm);

// Flux rules. Algebraic orders return u_n; rate orders (1-d order 2,
// 2-d order 1, EM order 2) return u_nt.
double ps_flux_1d(int order, const BoundaryTrace& tr, const PhysicalParams& p);
double ps_flux_2d(int order, const BoundaryTrace& tr, const PhysicalParams& p,
                  SignVariant sv = SignVariant::Section2);
// Returns (u + beta u_t)_n, or its rate for order 1 in 2-d. For the rate
// form tr.unt is unused and tr.utt/u_ttt enter through utt and uttt.
double ps_beta_flux(int order, int dim, const BoundaryTrace& tr, const PhysicalParams& p,
                    double uttt = 0.0);
double em_flux(int order, int dim, const BoundaryTrace& tr, const PhysicalParams& p);
double pd_flux_1d(int order, const BoundaryTrace& tr, const PhysicalParams& p);

// Left-hand side of the condition evaluated on a full trace (zero when satisfied).
double abc_residual(const AbcSpec& s, int dim, const BoundaryTrace& tr, const PhysicalParams& p,
                    double uttt = 0.0);

// Frozen-coefficient form used by the time stepper.
//   algebraic: flux = -p u_t,  d(flux)/dt = -p u_tt - dp_du u_t^2
//   evolved:   d(flux)/dt = -m u_tt + phi + kappa * J,
//              J = j_scale * D_yy(u + j_v u_t + j_a u_tt)
// "flux" is u_n, except for PS_BETA where it is (u + beta u_t)_n.
struct RuleForm {
    bool evolved = false;
    bool flux_is_beta = false;
    double p = 0, dp_du = 0;
    double m = 0, phi = 0, kappa = 0;
    double j_scale = 0, j_v = 0, j_a = 0;
    double a_prev_coeff = 0;  // rate += a_prev_coeff * u_tt(previous step)
};

// tr holds the current Picard iterate; dt enters only the beta-modified
// 2-d condition through its backward-difference u_ttt.
RuleForm linearize(const AbcSpec& s, int dim, const BoundaryTrace& tr, const PhysicalParams& p,
                   double dt);

}  // namespace westabc
