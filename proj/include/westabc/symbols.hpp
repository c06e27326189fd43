#pragma once

#include <array>
#include <complex>
#include <functional>
#include <map>
#include <vector>

#include "westabc/core.hpp"

namespace westabc {

// Truncated bivariate Taylor polynomial in (x, t) around a point.
class Jet {
public:
    static constexpr int kDegree = 8;

    Jet() = default;
    explicit Jet(double constant) { c_[0][0] = constant; }
    static Jet variable(double value, int axis);  // axis 0: x, 1: t

    double value() const { return c_[0][0]; }
    // Partial derivative value d^i/dx^i d^j/dt^j at the expansion point.
    double partial(int i, int j) const;
    // Jet of the derivative (loses one degree of accuracy).
    Jet dx() const;
    Jet dt() const;

    Jet operator-() const;
    friend Jet operator+(const Jet& a, const Jet& b);
    friend Jet operator-(const Jet& a, const Jet& b);
    friend Jet operator*(const Jet& a, const Jet& b);
    friend Jet operator/(const Jet& a, const Jet& b);
    friend Jet operator*(double s, const Jet& a);
    friend Jet operator+(double s, const Jet& a) { return Jet(s) + a; }
    friend Jet operator-(double s, const Jet& a) { return Jet(s) - a; }

    friend Jet sqrt(const Jet& a);
    friend Jet sin(const Jet& a);
    friend Jet cos(const Jet& a);
    friend Jet exp(const Jet& a);

private:
    using Coeffs = std::array<std::array<double, kDegree + 1>, kDegree + 1>;
    Coeffs c_{};  // c_[i][j] multiplies dx^i dt^j, i + j <= kDegree
    Jet inverse() const;
    // f(a) from the derivatives f^(n)(a(0)), n = 0..kDegree
    Jet compose(const std::array<double, kDegree + 1>& derivs) const;
};

// Frozen coefficient field v(x, t), written with Jet arithmetic so that all
// derivatives are exact. In 2-d the field is taken independent of y.
struct FrozenField {
    std::function<Jet(const Jet& x, const Jet& t)> v;
    PhysicalParams params;

    Jet at(double x, double t) const;
    Jet nu(double x, double t) const;  // sqrt(c^-2 - 2 gamma v)
};

struct SymbolValue {
    std::complex<double> value;
    int degree = 0;
};

// j = 0, 1, 2 gives b_1, b_0, b_-1 of the outgoing factor; the incoming
// factor is the negative. tau must be nonzero.
SymbolValue symbol_1d(int j, const FrozenField& f, double x, double t, double tau);
SymbolValue symbol_1d_incoming(int j, const FrozenField& f, double x, double t, double tau);

enum class TaylorOrder { Zero = 0, One = 1, Exact = 2 };

// j = 0, 1 in 2-d. Throws InvalidParameter when |eta / (nu tau)| >= 1.
SymbolValue symbol_2d(int j, TaylorOrder order, const FrozenField& f, double x, double y,
                      double t, double eta, double tau);

// Symbols as Laurent polynomials in s = i tau with coefficient jets.
using Laurent = std::map<int, Jet>;

// Mismatch of the factorization identity with the expansion truncated after
// j <= k. In 2-d (eta != 0) the Taylor-truncated first-order symbols are used.
// Per-degree coefficients that cancel to rounding level count as zero.
double factorization_residual(int k, const FrozenField& f, double x, double t, double tau,
                              double eta = 0.0);

// Per-degree coefficient of the factorization mismatch and the magnitude of
// the terms that produced it.
struct DegreeGroup {
    int degree;
    double residual;
    double scale;
};
std::vector<DegreeGroup> factorization_groups(int k, const FrozenField& f, double x, double t,
                                              double eta = 0.0);

// Least-squares slope of log residual against log tau over `count`
// log-spaced values in [tau_lo, tau_hi].
double residual_slope(int k, const FrozenField& f, double x, double t, double tau_lo = 1e3,
                      double tau_hi = 1e6, int count = 13, double eta = 0.0);

// mu from the jet of the field (independent of the trace-based evaluation).
double mu_from_field(const FrozenField& f, double x, double t);

}  // namespace westabc
