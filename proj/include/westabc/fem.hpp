#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/SparseCore>

#include "westabc/core.hpp"

namespace westabc {

using SpMat = Eigen::SparseMatrix<double>;

// A node on an absorbing facet, with the stencils the boundary rules need.
struct BoundaryNode {
    int node = -1;
    int side = -1;        // side whose normal is used
    bool corner = false;  // geometric corner or tag transition: order drops to 0
    double weight = 0;    // lumped measure of adjacent absorbing facets (1 in 1-d)
    int tprev = -1, tnext = -1;  // tangential neighbours along the side
    double ht = 0;
    std::array<int, 3> inward{-1, -1, -1};  // nodes 1..3 layers inside
    double hn = 0;
};

struct DiscreteOperators {
    Grid grid;
    SpMat mass;           // int phi_i phi_j
    SpMat stiffness;      // int grad phi_i . grad phi_j
    SpMat boundary_mass;  // int_{Gamma_A} phi_i phi_j
    SpMat deriv_x;        // int phi_i d_x phi_j
    std::vector<BoundaryNode> abc_nodes;

    // Fast refill of matrices sharing the volume pattern.
    int npe = 2;  // nodes per element
    std::vector<std::array<int, 4>> elem_nodes;
    std::vector<std::array<int, 16>> elem_slots;
    std::array<double, 64> mass_tensor{};   // int phi_k phi_i phi_j on one element
    std::array<double, 64> stiff_tensor{};  // int phi_k grad phi_i . grad phi_j

    int n() const { return grid.node_count(); }
    // Matrix with the volume pattern and all values zero.
    SpMat pattern() const;
    // out += s * int w phi_i phi_j, w nodal and interpolated; out has pattern().
    void add_weighted_mass(const Vec& w, double s, SpMat& out) const;
    void add_weighted_stiffness(const Vec& w, double s, SpMat& out) const;
    // (int w phi_i phi_j) x and (int w grad phi_i . grad phi_j) x, matrix-free.
    Vec weighted_mass_apply(const Vec& w, const Vec& x) const;
    Vec weighted_stiffness_apply(const Vec& w, const Vec& x) const;
    // Lumped boundary weight of every node over facets carrying tag t.
    Vec facet_weights(BoundaryTag t) const;
};

DiscreteOperators assemble(const Grid& grid);

class MassSolver {
public:
    explicit MassSolver(const SpMat& mass);
    ~MassSolver();
    Vec solve(const Vec& b) const;

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

// int_{boundary} (d_n f) phi_i with third-order one-sided normal derivatives
// on every side (lumped facet weights).
Vec boundary_flux_load(const DiscreteOperators& ops, const Vec& f);
// Consistent-mass Laplacian M^{-1}(-K f + boundary flux of f).
Vec discrete_laplacian(const DiscreteOperators& ops, const MassSolver& minv, const Vec& f);

// Outward normal derivative at a boundary node from one-sided differences.
// order 2 uses three points, order 3 uses four.
double normal_derivative(const DiscreteOperators& ops, const BoundaryNode& b,
                         const Vec& f, int order = 2);
double normal_second_derivative(const DiscreteOperators& ops, const BoundaryNode& b,
                                const Vec& f);
// Tangential second derivative along the side (zero in 1-d and at corners).
double tangential_second_derivative(const BoundaryNode& b, const Vec& f);

}  // namespace westabc
