#include "westabc/symbols.hpp"

#include <cmath>
#include <limits>

namespace westabc {

namespace {

constexpr int D = Jet::kDegree;

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

}  // namespace

Jet Jet::variable(double value, int axis) {
    Jet j(value);
    if (axis == 0) j.c_[1][0] = 1.0;
    else j.c_[0][1] = 1.0;
    return j;
}

double Jet::partial(int i, int j) const {
    if (i < 0 || j < 0 || i + j > D) throw InvalidParameter("jet derivative out of range");
    return c_[i][j] * factorial(i) * factorial(j);
}

Jet Jet::dx() const {
    Jet r;
    for (int i = 0; i < D; ++i)
        for (int j = 0; i + 1 + j <= D; ++j) r.c_[i][j] = (i + 1) * c_[i + 1][j];
    return r;
}

Jet Jet::dt() const {
    Jet r;
    for (int i = 0; i <= D; ++i)
        for (int j = 0; i + j + 1 <= D; ++j) r.c_[i][j] = (j + 1) * c_[i][j + 1];
    return r;
}

Jet Jet::operator-() const { return -1.0 * *this; }

Jet operator+(const Jet& a, const Jet& b) {
    Jet r;
    for (int i = 0; i <= D; ++i)
        for (int j = 0; i + j <= D; ++j) r.c_[i][j] = a.c_[i][j] + b.c_[i][j];
    return r;
}

Jet operator-(const Jet& a, const Jet& b) { return a + (-1.0) * b; }

Jet operator*(double s, const Jet& a) {
    Jet r;
    for (int i = 0; i <= D; ++i)
        for (int j = 0; i + j <= D; ++j) r.c_[i][j] = s * a.c_[i][j];
    return r;
}

Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (int i = 0; i <= D; ++i)
        for (int j = 0; i + j <= D; ++j) {
            if (a.c_[i][j] == 0.0) continue;
            for (int k = 0; i + k <= D; ++k)
                for (int l = 0; i + j + k + l <= D; ++l)
                    r.c_[i + k][j + l] += a.c_[i][j] * b.c_[k][l];
        }
    return r;
}

Jet Jet::inverse() const {
    if (c_[0][0] == 0.0) throw InvalidParameter("jet division by zero");
    Jet f;
    f.c_[0][0] = 1.0 / c_[0][0];
    for (int deg = 1; deg <= D; ++deg)
        for (int i = 0; i <= deg; ++i) {
            const int j = deg - i;
            double acc = 0.0;
            for (int k = 0; k <= i; ++k)
                for (int l = 0; l <= j; ++l)
                    if (k + l > 0) acc += c_[k][l] * f.c_[i - k][j - l];
            f.c_[i][j] = -acc / c_[0][0];
        }
    return f;
}

Jet operator/(const Jet& a, const Jet& b) { return a * b.inverse(); }

Jet sqrt(const Jet& a) {
    if (!(a.c_[0][0] > 0)) throw DegeneracyError("square root of a non-positive jet");
    Jet g;
    g.c_[0][0] = std::sqrt(a.c_[0][0]);
    for (int deg = 1; deg <= D; ++deg)
        for (int i = 0; i <= deg; ++i) {
            const int j = deg - i;
            double acc = 0.0;
            for (int k = 0; k <= i; ++k)
                for (int l = 0; l <= j; ++l) {
                    if (k + l == 0 || k + l == deg) continue;
                    acc += g.c_[k][l] * g.c_[i - k][j - l];
                }
            g.c_[i][j] = (a.c_[i][j] - acc) / (2.0 * g.c_[0][0]);
        }
    return g;
}

Jet Jet::compose(const std::array<double, D + 1>& derivs) const {
    Jet h = *this;
    h.c_[0][0] = 0.0;
    Jet out(derivs[0]);
    Jet power(1.0);
    for (int n = 1; n <= D; ++n) {
        power = power * h;
        out = out + (derivs[n] / factorial(n)) * power;
    }
    return out;
}

Jet sin(const Jet& a) {
    std::array<double, D + 1> d{};
    const double s = std::sin(a.value()), c = std::cos(a.value());
    for (int n = 0; n <= D; ++n) d[n] = std::array<double, 4>{s, c, -s, -c}[n % 4];
    return a.compose(d);
}

Jet cos(const Jet& a) {
    std::array<double, D + 1> d{};
    const double s = std::sin(a.value()), c = std::cos(a.value());
    for (int n = 0; n <= D; ++n) d[n] = std::array<double, 4>{c, -s, -c, s}[n % 4];
    return a.compose(d);
}

Jet exp(const Jet& a) {
    std::array<double, D + 1> d{};
    d.fill(std::exp(a.value()));
    return a.compose(d);
}

Jet FrozenField::at(double x, double t) const {
    if (!v) throw InvalidParameter("frozen field has no evaluator");
    return v(Jet::variable(x, 0), Jet::variable(t, 1));
}

Jet FrozenField::nu(double x, double t) const {
    return sqrt(Jet(params.inv_c2()) - 2.0 * params.gamma * at(x, t));
}

namespace {

struct Fields {
    Jet v, n;
    double gamma;
};

Fields fields(const FrozenField& f, double x, double t) {
    return {f.at(x, t), f.nu(x, t), f.params.gamma};
}

// -(nu_x + nu nu_t + 2 gamma v_t) / (2 nu)
Jet b0_jet(const Fields& F) {
    return -1.0 * (F.n.dx() + F.n * F.n.dt() + 2.0 * F.gamma * F.v.dt()) / (2.0 * F.n);
}

Jet mu_jet(const Fields& F) {
    const Jet w = F.v.dt() / (2.0 * F.n) - F.v.dx() / (2.0 * F.n * F.n);
    return w.dx() + F.n * w.dt() - F.gamma * (w * w);
}

// gamma mu / (2 nu), coefficient of s^-1
Jet bm1_jet(const Fields& F) { return F.gamma * mu_jet(F) / (2.0 * F.n); }

void add_to(Laurent& l, int deg, const Jet& j) {
    auto it = l.find(deg);
    if (it == l.end()) l.emplace(deg, j);
    else it->second = it->second + j;
}

// d^n/ds^n of s^m
double falling(int m, int n) {
    double r = 1.0;
    for (int k = 0; k < n; ++k) r *= (m - k);
    return r;
}

}  // namespace

SymbolValue symbol_1d(int j, const FrozenField& f, double x, double t, double tau) {
    if (tau == 0.0) throw InvalidParameter("tau must be nonzero");
    const Fields F = fields(f, x, t);
    const std::complex<double> s(0.0, tau);
    switch (j) {
        case 0: return {F.n.value() * s, 1};
        case 1: return {b0_jet(F).value(), 0};
        case 2: return {bm1_jet(F).value() / s, -1};
        default: throw InvalidParameter("symbol index must be 0, 1 or 2");
    }
}

SymbolValue symbol_1d_incoming(int j, const FrozenField& f, double x, double t, double tau) {
    // a_{1-j} solves the same system with the roles exchanged: a = -b
    if (tau == 0.0) throw InvalidParameter("tau must be nonzero");
    const Fields F = fields(f, x, t);
    const std::complex<double> s(0.0, tau);
    switch (j) {
        case 0: return {-F.n.value() * s, 1};
        case 1:
            return {(F.n.dx() + F.n * F.n.dt() + 2.0 * F.gamma * F.v.dt()).value() /
                        (2.0 * F.n.value()),
                    0};
        case 2: return {-F.gamma * mu_jet(F).value() / (2.0 * F.n.value()) / s, -1};
        default: throw InvalidParameter("symbol index must be 0, 1 or 2");
    }
}

SymbolValue symbol_2d(int j, TaylorOrder order, const FrozenField& f, double x, double /*y*/,
                      double t, double eta, double tau) {
    if (tau == 0.0) throw InvalidParameter("tau must be nonzero");
    const Fields F = fields(f, x, t);
    const double n = F.n.value();
    const double ratio = eta / (n * tau);
    if (std::abs(ratio) >= 1.0)
        throw InvalidParameter("|eta / (nu tau)| >= 1: evanescent regime");
    const double q = ratio * ratio;
    const std::complex<double> s(0.0, tau);
    const double nt = F.n.dt().value(), nx = F.n.dx().value(), vt = F.v.dt().value();
    const double g = F.gamma;
    double f1, f3, f2, f4;  // (1-q)^{1/2}, ^{-3/2}, ^{-1}, ^{-1/2}
    switch (order) {
        case TaylorOrder::Zero: f1 = f3 = f2 = f4 = 1.0; break;
        case TaylorOrder::One:
            f1 = 1.0 - 0.5 * q;
            f3 = 1.0 + 1.5 * q;
            f2 = 1.0 + q;
            f4 = 1.0 + 0.5 * q;
            break;
        default:
            f1 = std::sqrt(1.0 - q);
            f3 = std::pow(1.0 - q, -1.5);
            f2 = 1.0 / (1.0 - q);
            f4 = 1.0 / std::sqrt(1.0 - q);
    }
    if (j == 0) return {n * s * f1, 1};
    if (j == 1) return {-0.5 * nt * f3 - nx / (2.0 * n) * f2 - g * vt / n * f4, 0};
    throw InvalidParameter("2-d symbols are available for indices 0 and 1");
}

namespace {

// Factor symbol truncated after j <= k; eta != 0 uses the first-order Taylor forms.
Laurent outgoing(int k, const Fields& F, double eta) {
    Laurent b;
    const double e2 = eta * eta;
    b.emplace(1, F.n);
    if (e2 != 0.0) b.emplace(-1, (0.5 * e2) * Jet(1.0) / F.n);
    if (k >= 1) {
        add_to(b, 0, b0_jet(F));
        if (e2 != 0.0) {
            const Jet q = e2 * Jet(1.0) / (F.n * F.n);
            add_to(b, -2,
                   q * (0.75 * F.n.dt() + F.n.dx() / (2.0 * F.n) + F.gamma * F.v.dt() / (2.0 * F.n)));
        }
    }
    if (k >= 2) add_to(b, -1, bm1_jet(F));
    return b;
}

struct Term {
    Jet value;
    int degree;
};

}  // namespace

std::vector<DegreeGroup> factorization_groups(int k, const FrozenField& f, double x, double t,
                                              double eta) {
    if (k < 0 || k > 2) throw InvalidParameter("truncation order must be 0, 1 or 2");
    if (eta != 0.0 && k > 1)
        throw InvalidParameter("2-d expansion is available up to order 1");
    const Fields F = fields(f, x, t);
    const Laurent b = outgoing(k, F, eta);

    std::vector<Term> lhs;  // b_x + b o b, composition truncated at n <= 2
    for (const auto& [m, c] : b) lhs.push_back({c.dx(), m});
    for (const auto& [ma, ca] : b)
        for (const auto& [mb, cb] : b) {
            Jet dtb = cb;
            for (int n = 0; n <= 2; ++n) {
                if (n > 0) dtb = dtb.dt();
                const double fall = falling(ma, n);
                if (fall == 0.0) continue;
                lhs.push_back({(fall / factorial(n)) * (ca * dtb), ma + mb - n});
            }
        }
    // nu^2 s^2 + eta^2 - 2 gamma v_t s
    std::vector<Term> rhs{{F.n * F.n, 2}, {Jet(eta * eta), 0}, {-2.0 * F.gamma * F.v.dt(), 1}};

    std::map<int, DegreeGroup> groups;
    auto put = [&](const Term& tm, double sign) {
        auto& g = groups.try_emplace(tm.degree, DegreeGroup{tm.degree, 0.0, 0.0}).first->second;
        g.residual += sign * tm.value.value();
        g.scale += std::abs(tm.value.value());
    };
    for (const auto& tm : rhs) put(tm, 1.0);
    for (const auto& tm : lhs) put(tm, -1.0);
    std::vector<DegreeGroup> out;
    for (auto& [d, g] : groups) out.push_back(g);
    return out;
}

double factorization_residual(int k, const FrozenField& f, double x, double t, double tau,
                              double eta) {
    if (tau == 0.0) throw InvalidParameter("tau must be nonzero");
    std::complex<double> r = 0.0;
    const std::complex<double> s(0.0, tau);
    for (const auto& g : factorization_groups(k, f, x, t, eta)) {
        if (std::abs(g.residual) <= 1e-12 * g.scale) continue;
        r += g.residual * std::pow(s, g.degree);
    }
    return std::abs(r);
}

double residual_slope(int k, const FrozenField& f, double x, double t, double tau_lo,
                      double tau_hi, int count, double eta) {
    if (count < 2 || !(tau_hi > tau_lo) || !(tau_lo > 0))
        throw InvalidParameter("need an increasing positive tau range");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < count; ++i) {
        const double lt = std::log(tau_lo) + (std::log(tau_hi) - std::log(tau_lo)) * i / (count - 1);
        const double r = factorization_residual(k, f, x, t, std::exp(lt), eta);
        if (!(r > 0)) return std::numeric_limits<double>::quiet_NaN();
        const double ly = std::log(r);
        sx += lt;
        sy += ly;
        sxx += lt * lt;
        sxy += lt * ly;
    }
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

double mu_from_field(const FrozenField& f, double x, double t) {
    return mu_jet(fields(f, x, t)).value();
}

}  // namespace westabc
