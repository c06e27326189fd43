#include <doctest.h>

#include <cmath>

#include "westabc/core.hpp"

using namespace westabc;

namespace {
// Independent long-double evaluation of the coefficient formulas.
struct Oracle {
    long double beta_a, b, beta, gamma;
};
Oracle oracle(long double c, long double rho, long double ba, long double alpha, long double w) {
    const long double pi = 3.141592653589793238462643383279502884L;
    Oracle o;
    o.beta_a = 1.0L + ba / 2.0L;
    o.b = 2.0L * (alpha * w / 1e6L) * c * c * c / ((2.0L * pi * w) * (2.0L * pi * w));
    o.beta = o.b / (c * c);
    o.gamma = o.beta_a / (rho * c * c * c * c);
    return o;
}
}  // namespace

TEST_CASE("liver coefficients at 1 MHz") {
    const PhysicalParams p = derive_coefficients(1596, 1050, 6.8, 4.5, 1e6);
    const Oracle o = oracle(1596, 1050, 6.8, 4.5, 1e6);
    CHECK(p.beta_a == doctest::Approx(4.4).epsilon(1e-15));
    CHECK(p.b == doctest::Approx(static_cast<double>(o.b)).epsilon(1e-13));
    CHECK(p.beta == doctest::Approx(static_cast<double>(o.beta)).epsilon(1e-13));
    CHECK(p.gamma == doctest::Approx(static_cast<double>(o.gamma)).epsilon(1e-13));
    // rounded values as quoted
    CHECK(p.b == doctest::Approx(9.268e-4).epsilon(1e-3));
    CHECK(p.beta == doctest::Approx(3.638e-10).epsilon(1e-3));
    CHECK(p.gamma == doctest::Approx(6.459e-16).epsilon(1e-3));
}

TEST_CASE("liver coefficients at 100 kHz and scale consistency") {
    const PhysicalParams p = liver_params(1e5);
    const Oracle o = oracle(1596, 1050, 6.8, 4.5, 1e5);
    CHECK(p.b == doctest::Approx(static_cast<double>(o.b)).epsilon(1e-13));
    CHECK(p.b == doctest::Approx(9.268e-3).epsilon(1e-3));
    CHECK(p.beta == doctest::Approx(3.638e-9).epsilon(1e-3));
    const PhysicalParams q = liver_params(2e5);
    CHECK(q.b == doctest::Approx(p.b / 2).epsilon(1e-14));
}

TEST_CASE("unit normalization") {
    const PhysicalParams p = derive_coefficients(1, 1, 0, 0, 1);
    CHECK(p.beta_a == 1.0);
    CHECK(p.b == 0.0);
    CHECK(p.beta == 0.0);
    CHECK(p.gamma == 1.0);
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(derive_coefficients(0, 1, 0, 0, 1), InvalidParameter);
    CHECK_THROWS_AS(derive_coefficients(1, -1, 0, 0, 1), InvalidParameter);
    CHECK_THROWS_AS(derive_coefficients(1, 1, 0, 0, 0), InvalidParameter);
}

TEST_CASE("nu values and degeneracy") {
    const PhysicalParams p = liver_params(1e6);
    CHECK(nu(0.0, p) * p.c == doctest::Approx(1.0).epsilon(1e-15));
    const double v = p.inv_c2() / (4 * p.gamma);
    CHECK(nu(v, p) == doctest::Approx(1.0 / (p.c * std::sqrt(2.0))).epsilon(1e-12));
    CHECK_THROWS_AS(nu(p.inv_c2() / (2 * p.gamma), p), DegeneracyError);
    CHECK(nu(-1e6, p) > nu(0.0, p));
    CHECK(nu(1e6, p) < nu(0.0, p));
}

TEST_CASE("grid sizing") {
    const PhysicalParams p = liver_params(1e5);
    const Grid g = build_grid({{0.0, 0.03}}, p, 50);
    CHECK(g.h_nominal == doctest::Approx(3.192e-4).epsilon(1e-12));
    CHECK(g.nx == 94);
    CHECK(g.x(7) == doctest::Approx(7 * g.hx));

    const Grid g2 = build_grid({{0.0, 0.02}, {0.0, 0.02}}, liver_params(1e6), 50);
    CHECK(g2.h_nominal == doctest::Approx(3.192e-5).epsilon(1e-12));
    CHECK(g2.nx == 627);
    CHECK(g2.ny == 627);

    PhysicalParams unit = derive_coefficients(1, 1, 0, 0, 1);
    const Grid g3 = build_grid({{0.0, 1.0}}, unit, 2);
    CHECK(g3.nx == 2);
    CHECK(g3.hx == 0.5);
}

TEST_CASE("every facet carries one tag") {
    Grid g = build_grid({{0.0, 0.01}, {0.0, 0.005}}, liver_params(1e5), 10);
    g.tag_side(XMax, BoundaryTag::Absorbing);
    for (int s = 0; s < 4; ++s) CHECK(static_cast<int>(g.facet_tags[s].size()) == g.facets_on(s));
    CHECK(g.facet_tags[XMax].front() == BoundaryTag::Absorbing);
}

TEST_CASE("time step") {
    CHECK(time_step(1e5, 20) == doctest::Approx(5e-7).epsilon(1e-15));
    CHECK(time_step(1e6, 20) == doctest::Approx(5e-8).epsilon(1e-15));
    CHECK(time_step(1, 1) == 1.0);
}
