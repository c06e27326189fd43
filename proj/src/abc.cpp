#include "westabc/abc.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <vector>

namespace westabc {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

// s = gamma u / (2 nu^2); first-order factors are nu (1 - k s) / (1 + s).
struct FirstOrderFactor {
    double p, dp_du;
};

FirstOrderFactor first_order_factor(double u, double k, const PhysicalParams& prm) {
    const double n = nu(u, prm);
    const double a = n * n;
    const double g = prm.gamma;
    const double s = g * u / (2.0 * a);
    const double ds = g / (2.0 * a) + g * g * u / (a * a);
    const double dn = -g / n;
    const double f = (1.0 - k * s) / (1.0 + s);
    const double df = (-(k) * (1.0 + s) - (1.0 - k * s)) / ((1.0 + s) * (1.0 + s)) * ds;
    return {n * f, dn * f + n * df};
}

// w = A v_t / (2 nu) - v_n / (2 nu^2) and its A0 = d_n + nu d_t image.
struct WTerm {
    double w, a0w;
};

WTerm w_term(const TracePatch& p, double A, const PhysicalParams& prm) {
    const double n = nu(p.v, prm);
    const double g = prm.gamma;
    const double n2 = n * n, n3 = n2 * n, n4 = n2 * n2;
    const double w = A * p.vt / (2.0 * n) - p.vn / (2.0 * n2);
    const double wn = A * p.vnt / (2.0 * n) + A * g * p.vt * p.vn / (2.0 * n3) -
                      p.vnn / (2.0 * n2) - g * p.vn * p.vn / n4;
    const double wt = A * p.vtt / (2.0 * n) + A * g * p.vt * p.vt / (2.0 * n3) -
                      p.vnt / (2.0 * n2) - g * p.vn * p.vt / n4;
    return {w, wn + n * wt};
}

TracePatch patch_of(const BoundaryTrace& tr) {
    return {tr.u, tr.ut, tr.utt, tr.un, tr.unt, tr.unn};
}

}  // namespace

AbcSpec parse_abc(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(lower(item));
    if (parts.size() < 2 || parts.size() > 3)
        throw InvalidParameter("abc must look like family:order[:variant], got '" + text + "'");
    AbcSpec s;
    const std::string& f = parts[0];
    if (f == "ps") s.family = AbcFamily::PS;
    else if (f == "ps_beta" || f == "psbeta" || f == "ps-beta") s.family = AbcFamily::PS_BETA;
    else if (f == "em") s.family = AbcFamily::EM;
    else if (f == "pd") s.family = AbcFamily::PD;
    else throw InvalidParameter("unknown abc family '" + parts[0] + "'");
    try {
        s.order = std::stoi(parts[1]);
    } catch (const std::exception&) {
        throw InvalidParameter("bad abc order '" + parts[1] + "'");
    }
    if (parts.size() == 3) {
        const std::string& v = parts[2];
        if (v == "section2") s.sign_variant = SignVariant::Section2;
        else if (v == "theorem") s.sign_variant = SignVariant::Theorem;
        else if (v == "printed") s.beta_t_integrand = false;
        else throw InvalidParameter("unknown abc variant '" + parts[2] + "'");
    }
    return s;
}

std::string to_string(const AbcSpec& s) {
    std::string f;
    switch (s.family) {
        case AbcFamily::PS: f = "ps"; break;
        case AbcFamily::PS_BETA: f = "ps_beta"; break;
        case AbcFamily::EM: f = "em"; break;
        case AbcFamily::PD: f = "pd"; break;
    }
    std::string out = f + ":" + std::to_string(s.order);
    if (s.family == AbcFamily::PS && s.sign_variant == SignVariant::Theorem) out += ":theorem";
    if (s.family == AbcFamily::PS_BETA && !s.beta_t_integrand) out += ":printed";
    return out;
}

void validate(const AbcSpec& s, int dim) {
    bool ok = false;
    switch (s.family) {
        case AbcFamily::PS: ok = dim == 1 ? (s.order >= 0 && s.order <= 2) : (s.order == 0 || s.order == 1); break;
        case AbcFamily::PS_BETA: ok = s.order == 0 || s.order == 1; break;
        case AbcFamily::EM: ok = s.order == 1 || s.order == 2; break;
        case AbcFamily::PD: ok = dim == 1 && s.order >= 0 && s.order <= 2; break;
    }
    if (!ok || dim < 1 || dim > 2)
        throw InvalidParameter("abc " + to_string(s) + " is not available in " +
                               std::to_string(dim) + "-d");
}

bool is_evolved(const AbcSpec& s, int dim) {
    switch (s.family) {
        case AbcFamily::PS: return dim == 1 ? s.order == 2 : s.order == 1;
        case AbcFamily::PS_BETA: return dim == 2 && s.order == 1;
        case AbcFamily::EM: return s.order == 2;
        case AbcFamily::PD: return s.order == 2;
    }
    return false;
}

AbcSpec corner_spec(const AbcSpec& s) {
    AbcSpec c = s;
    c.order = s.family == AbcFamily::EM ? 1 : 0;
    return c;
}

double mu_eval(const TracePatch& p, const PhysicalParams& prm) {
    const WTerm t = w_term(p, 1.0, prm);
    return t.a0w - prm.gamma * t.w * t.w;
}

double mu_tilde_eval(const TracePatch& p, const PhysicalParams& prm) {
    const double g = prm.gamma;
    const WTerm t = w_term(p, 3.0, prm);
    return g * t.a0w - g * g * t.w * t.w - 2.0 * g * p.vtt;
}

double ps_flux_1d(int order, const BoundaryTrace& tr, const PhysicalParams& p) {
    const double n = nu(tr.u, p);
    const double g = p.gamma;
    switch (order) {
        case 0: return -n * tr.ut;
        case 1: return -first_order_factor(tr.u, 1.0, p).p * tr.ut;
        case 2: {
            const double mu = mu_eval(patch_of(tr), p);
            return -n * tr.utt +
                   g / (2.0 * n) * (tr.ut * tr.ut - tr.un * tr.ut / n - mu * tr.u);
        }
        default: throw InvalidParameter("1-d PS order must be 0, 1 or 2");
    }
}

double ps_flux_2d(int order, const BoundaryTrace& tr, const PhysicalParams& p, SignVariant sv) {
    const double n = nu(tr.u, p);
    const double g = p.gamma;
    if (order == 0) return -n * tr.ut;
    if (order != 1) throw InvalidParameter("2-d PS order must be 0 or 1");
    const double n3 = n * n * n;
    double r = -n * tr.utt + tr.uyy / (2.0 * n) + g / (2.0 * n) * (tr.ut - tr.un / n) * tr.ut;
    if (sv == SignVariant::Section2)
        r -= g / (2.0 * n3) * (0.5 * tr.ut + tr.un / n) * tr.accum;
    else
        r += g / (2.0 * n3) * (0.5 * tr.ut - tr.un / n) * tr.accum;
    return r;
}

double ps_beta_flux(int order, int dim, const BoundaryTrace& tr, const PhysicalParams& p,
                    double uttt) {
    const double n = nu(tr.u, p);
    const double g = p.gamma;
    if (order == 0) return -n * tr.ut;
    if (order != 1) throw InvalidParameter("beta-modified order must be 0 or 1");
    if (dim == 1) return -first_order_factor(tr.u, 1.0, p).p * tr.ut;
    const double ubtt = tr.utt + p.beta * uttt;
    return -n * (tr.utt + ubtt) / 2.0 + tr.ubyy / (2.0 * n) +
           g / (2.0 * n) * (tr.ut - tr.un / n) * tr.ut +
           g / (2.0 * n * n * n) * (0.5 * tr.ut - tr.un / n) * tr.accum;
}

double em_flux(int order, int dim, const BoundaryTrace& tr, const PhysicalParams& p) {
    if (order == 1) return -tr.ut / p.c;
    if (order != 2) throw InvalidParameter("Engquist-Majda order must be 1 or 2");
    return -tr.utt / p.c + (dim == 2 ? 0.5 * p.c * tr.uyy : 0.0);
}

double pd_flux_1d(int order, const BoundaryTrace& tr, const PhysicalParams& p) {
    const double n = nu(tr.u, p);
    const double g = p.gamma;
    switch (order) {
        case 0: return -n * tr.ut;
        case 1: return -first_order_factor(tr.u, 3.0, p).p * tr.ut;
        case 2: {
            const double mt = mu_tilde_eval(patch_of(tr), p);
            const double a0nu = -(g / n) * (tr.un + n * tr.ut);
            return -n * tr.utt +
                   (a0nu * tr.ut + 4.0 * g * tr.ut * tr.ut - mt * tr.u) / (2.0 * n);
        }
        default: throw InvalidParameter("PD order must be 0, 1 or 2");
    }
}

double abc_residual(const AbcSpec& s, int dim, const BoundaryTrace& tr, const PhysicalParams& p,
                    double uttt) {
    const double n = nu(tr.u, p);
    const double g = p.gamma;
    const bool rate = is_evolved(s, dim);
    switch (s.family) {
        case AbcFamily::PS:
            if (s.order == 0) return tr.un + n * tr.ut;
            if (dim == 1 && s.order == 1)
                return tr.un + n * tr.ut - g / (2.0 * n) * (tr.ut * tr.u - tr.un * tr.u / n);
            if (dim == 1) return tr.unt - ps_flux_1d(2, tr, p);
            return tr.unt - ps_flux_2d(1, tr, p, s.sign_variant);
        case AbcFamily::PS_BETA:
            if (s.order == 0) return tr.ub_n + n * tr.ut;
            if (dim == 1)
                return tr.ub_n + n * tr.ut - g / (2.0 * n) * (tr.ut * tr.u - tr.ub_n * tr.u / n);
            // tr.unt carries (u + beta u_t)_nt here
            return tr.unt - ps_beta_flux(1, 2, tr, p, uttt);
        case AbcFamily::EM:
            return rate ? tr.unt - em_flux(2, dim, tr, p) : tr.un + tr.ut / p.c;
        case AbcFamily::PD:
            if (s.order == 0) return tr.un + n * tr.ut;
            if (s.order == 1) {
                const double a0nu = -(g / n) * (tr.un + n * tr.ut);
                return tr.un + n * tr.ut - (a0nu * tr.u + 4.0 * g * tr.ut * tr.u) / (2.0 * n);
            }
            return tr.unt - pd_flux_1d(2, tr, p);
    }
    return 0.0;
}

RuleForm linearize(const AbcSpec& s, int dim, const BoundaryTrace& tr, const PhysicalParams& p,
                   double dt) {
    RuleForm r;
    r.flux_is_beta = s.family == AbcFamily::PS_BETA;
    r.evolved = is_evolved(s, dim);
    const double n = nu(tr.u, p);
    const double g = p.gamma;
    if (!r.evolved) {
        if (s.family == AbcFamily::EM) {
            r.p = 1.0 / p.c;
        } else if (s.order == 0) {
            r.p = n;
            r.dp_du = -g / n;
        } else {
            const auto f = first_order_factor(tr.u, s.family == AbcFamily::PD ? 3.0 : 1.0, p);
            r.p = f.p;
            r.dp_du = f.dp_du;
        }
        return r;
    }
    // rate forms: the frozen flux value sits in tr.un (tr.ub_n for PS_BETA)
    switch (s.family) {
        case AbcFamily::EM:
            r.m = 1.0 / p.c;
            if (dim == 2) {
                r.kappa = 0.5 * p.c;
                r.j_scale = 1.0;
            }
            break;
        case AbcFamily::PS:
            r.m = n;
            if (dim == 1) {
                const double mu = mu_eval(patch_of(tr), p);
                r.phi = g / (2.0 * n) * (tr.ut * tr.ut - tr.un * tr.ut / n - mu * tr.u);
            } else {
                r.kappa = 1.0 / (2.0 * n);
                r.j_scale = 1.0;
                const double n3 = n * n * n;
                r.phi = g / (2.0 * n) * (tr.ut - tr.un / n) * tr.ut;
                if (s.sign_variant == SignVariant::Section2)
                    r.phi -= g / (2.0 * n3) * (0.5 * tr.ut + tr.un / n) * tr.accum;
                else
                    r.phi += g / (2.0 * n3) * (0.5 * tr.ut - tr.un / n) * tr.accum;
            }
            break;
        case AbcFamily::PD: {
            r.m = n;
            const double mt = mu_tilde_eval(patch_of(tr), p);
            const double a0nu = -(g / n) * (tr.un + n * tr.ut);
            r.phi = (a0nu * tr.ut + 4.0 * g * tr.ut * tr.ut - mt * tr.u) / (2.0 * n);
            break;
        }
        case AbcFamily::PS_BETA: {
            const double k = p.beta / (2.0 * dt);
            r.m = n * (1.0 + k);
            r.a_prev_coeff = n * k;
            r.kappa = 1.0 / (2.0 * n);
            if (s.beta_t_integrand) {
                r.j_scale = 1.0;
                r.j_v = 2.0 * p.beta;
                r.j_a = p.beta * p.beta;
            } else {
                r.j_scale = 1.0 + p.beta;
                r.j_v = p.beta;
            }
            r.phi = g / (2.0 * n) * (tr.ut - tr.un / n) * tr.ut +
                    g / (2.0 * n * n * n) * (0.5 * tr.ut - tr.un / n) * tr.accum;
            break;
        }
    }
    return r;
}

}  // namespace westabc
