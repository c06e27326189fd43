#include "westabc/fem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include <Eigen/SparseCholesky>

namespace westabc {

namespace {

using Trip = Eigen::Triplet<double>;

constexpr std::array<double, 3> kGaussX{0.1127016653792583, 0.5, 0.8872983346207417};
constexpr std::array<double, 3> kGaussW{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

double shape(int a, double s) { return a == 0 ? 1.0 - s : s; }
double dshape(int a) { return a == 0 ? -1.0 : 1.0; }

// Reference-element integrals computed once per grid by tensor Gauss rules
// (exact for the polynomial degrees involved).
void fill_tensors(DiscreteOperators& ops) {
    const Grid& g = ops.grid;
    ops.mass_tensor.fill(0.0);
    ops.stiff_tensor.fill(0.0);
    if (g.dim == 1) {
        for (int q = 0; q < 3; ++q) {
            const double s = kGaussX[q], w = kGaussW[q] * g.hx;
            for (int k = 0; k < 2; ++k)
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) {
                        const int idx = (k * 4 + i) * 4 + j;
                        ops.mass_tensor[idx] += w * shape(k, s) * shape(i, s) * shape(j, s);
                        ops.stiff_tensor[idx] +=
                            w * shape(k, s) * dshape(i) * dshape(j) / (g.hx * g.hx);
                    }
        }
        return;
    }
    for (int qx = 0; qx < 3; ++qx)
        for (int qy = 0; qy < 3; ++qy) {
            const double s = kGaussX[qx], r = kGaussX[qy];
            const double w = kGaussW[qx] * kGaussW[qy] * g.hx * g.hy;
            auto phi = [&](int a) { return shape(a & 1, s) * shape(a >> 1, r); };
            auto gx = [&](int a) { return dshape(a & 1) / g.hx * shape(a >> 1, r); };
            auto gy = [&](int a) { return shape(a & 1, s) * dshape(a >> 1) / g.hy; };
            for (int k = 0; k < 4; ++k)
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j) {
                        const int idx = (k * 4 + i) * 4 + j;
                        ops.mass_tensor[idx] += w * phi(k) * phi(i) * phi(j);
                        ops.stiff_tensor[idx] +=
                            w * phi(k) * (gx(i) * gx(j) + gy(i) * gy(j));
                    }
        }
}

void build_elements(DiscreteOperators& ops) {
    const Grid& g = ops.grid;
    ops.npe = g.dim == 1 ? 2 : 4;
    if (g.dim == 1) {
        for (int e = 0; e < g.nx; ++e) ops.elem_nodes.push_back({e, e + 1, -1, -1});
        return;
    }
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            ops.elem_nodes.push_back(
                {g.node(i, j), g.node(i + 1, j), g.node(i, j + 1), g.node(i + 1, j + 1)});
}

int find_slot(const SpMat& m, int row, int col) {
    const int* begin = m.innerIndexPtr() + m.outerIndexPtr()[col];
    const int* end = m.innerIndexPtr() + m.outerIndexPtr()[col + 1];
    const int* it = std::lower_bound(begin, end, row);
    return static_cast<int>(it - m.innerIndexPtr());
}

struct SideWalk {
    int count;                       // nodes along the side
    std::function<int(int)> node;    // k-th node along the side
    std::function<int(int)> inward;  // node one layer in from the k-th
};

}  // namespace

SpMat DiscreteOperators::pattern() const {
    std::vector<Trip> t;
    t.reserve(elem_nodes.size() * npe * npe);
    for (const auto& en : elem_nodes)
        for (int a = 0; a < npe; ++a)
            for (int b = 0; b < npe; ++b) t.emplace_back(en[a], en[b], 0.0);
    SpMat m(n(), n());
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

void DiscreteOperators::add_weighted_mass(const Vec& w, double s, SpMat& out) const {
    double* val = out.valuePtr();
    for (std::size_t e = 0; e < elem_nodes.size(); ++e) {
        const auto& en = elem_nodes[e];
        const auto& sl = elem_slots[e];
        for (int i = 0; i < npe; ++i)
            for (int j = 0; j < npe; ++j) {
                double acc = 0.0;
                for (int k = 0; k < npe; ++k) acc += w[en[k]] * mass_tensor[(k * 4 + i) * 4 + j];
                val[sl[i * npe + j]] += s * acc;
            }
    }
}

void DiscreteOperators::add_weighted_stiffness(const Vec& w, double s, SpMat& out) const {
    double* val = out.valuePtr();
    for (std::size_t e = 0; e < elem_nodes.size(); ++e) {
        const auto& en = elem_nodes[e];
        const auto& sl = elem_slots[e];
        for (int i = 0; i < npe; ++i)
            for (int j = 0; j < npe; ++j) {
                double acc = 0.0;
                for (int k = 0; k < npe; ++k)
                    acc += w[en[k]] * stiff_tensor[(k * 4 + i) * 4 + j];
                val[sl[i * npe + j]] += s * acc;
            }
    }
}

namespace {

Vec tensor_apply(const DiscreteOperators& ops, const std::array<double, 64>& tensor, const Vec& w,
                 const Vec& x) {
    Vec out = Vec::Zero(ops.n());
    const int npe = ops.npe;
    for (const auto& en : ops.elem_nodes)
        for (int i = 0; i < npe; ++i) {
            double acc = 0.0;
            for (int j = 0; j < npe; ++j) {
                double m = 0.0;
                for (int k = 0; k < npe; ++k) m += w[en[k]] * tensor[(k * 4 + i) * 4 + j];
                acc += m * x[en[j]];
            }
            out[en[i]] += acc;
        }
    return out;
}

}  // namespace

Vec DiscreteOperators::weighted_mass_apply(const Vec& w, const Vec& x) const {
    return tensor_apply(*this, mass_tensor, w, x);
}

Vec DiscreteOperators::weighted_stiffness_apply(const Vec& w, const Vec& x) const {
    return tensor_apply(*this, stiff_tensor, w, x);
}

Vec DiscreteOperators::facet_weights(BoundaryTag t) const {
    Vec w = Vec::Zero(n());
    const Grid& g = grid;
    if (g.dim == 1) {
        if (g.facet_tags[XMin][0] == t) w[0] += 1.0;
        if (g.facet_tags[XMax][0] == t) w[g.nx] += 1.0;
        return w;
    }
    for (int side = 0; side < 4; ++side) {
        const bool vertical = side == XMin || side == XMax;
        for (int f = 0; f < g.facets_on(side); ++f) {
            if (g.facet_tags[side][f] != t) continue;
            int a, b;
            double len;
            if (vertical) {
                const int i = side == XMin ? 0 : g.nx;
                a = g.node(i, f);
                b = g.node(i, f + 1);
                len = g.hy;
            } else {
                const int j = side == YMin ? 0 : g.ny;
                a = g.node(f, j);
                b = g.node(f + 1, j);
                len = g.hx;
            }
            w[a] += 0.5 * len;
            w[b] += 0.5 * len;
        }
    }
    return w;
}

DiscreteOperators assemble(const Grid& grid) {
    DiscreteOperators ops;
    ops.grid = grid;
    build_elements(ops);
    fill_tensors(ops);

    SpMat pat = ops.pattern();
    ops.elem_slots.resize(ops.elem_nodes.size());
    for (std::size_t e = 0; e < ops.elem_nodes.size(); ++e)
        for (int a = 0; a < ops.npe; ++a)
            for (int b = 0; b < ops.npe; ++b)
                ops.elem_slots[e][a * ops.npe + b] =
                    find_slot(pat, ops.elem_nodes[e][a], ops.elem_nodes[e][b]);

    const Vec ones = Vec::Ones(ops.n());
    ops.mass = pat;
    ops.add_weighted_mass(ones, 1.0, ops.mass);
    ops.stiffness = pat;
    ops.add_weighted_stiffness(ones, 1.0, ops.stiffness);

    // int phi_i d_x phi_j
    {
        std::vector<Trip> t;
        const Grid& g = grid;
        for (const auto& en : ops.elem_nodes) {
            for (int i = 0; i < ops.npe; ++i)
                for (int j = 0; j < ops.npe; ++j) {
                    double v;
                    if (g.dim == 1) {
                        v = 0.5 * dshape(j);
                    } else {
                        // int phi_i dx phi_j = (int_x l_ix l_jx') (int_y l_iy l_jy)
                        const double ix = 0.5 * dshape(j & 1);
                        const double iy =
                            g.hy * (((i >> 1) == (j >> 1)) ? 1.0 / 3.0 : 1.0 / 6.0);
                        v = ix * iy;
                    }
                    t.emplace_back(en[i], en[j], v);
                }
        }
        ops.deriv_x.resize(ops.n(), ops.n());
        ops.deriv_x.setFromTriplets(t.begin(), t.end());
    }

    // Absorbing boundary: consistent facet mass and node stencils.
    const Grid& g = grid;
    const Vec wA = ops.facet_weights(BoundaryTag::Absorbing);
    std::vector<Trip> bt;
    std::map<int, BoundaryNode> nodes;
    auto side_walk = [&](int side) {
        SideWalk sw;
        if (g.dim == 1) {
            const int i = side == XMin ? 0 : g.nx;
            const int step = side == XMin ? 1 : -1;
            sw.count = 1;
            sw.node = [i](int) { return i; };
            sw.inward = [i, step](int) { return i + step; };
            return sw;
        }
        const bool vertical = side == XMin || side == XMax;
        if (vertical) {
            const int i = side == XMin ? 0 : g.nx;
            const int step = side == XMin ? 1 : -1;
            sw.count = g.ny + 1;
            sw.node = [&g, i](int k) { return g.node(i, k); };
            sw.inward = [&g, i, step](int k) { return g.node(i + step, k); };
        } else {
            const int j = side == YMin ? 0 : g.ny;
            const int step = side == YMin ? 1 : -1;
            sw.count = g.nx + 1;
            sw.node = [&g, j](int k) { return g.node(k, j); };
            sw.inward = [&g, j, step](int k) { return g.node(k, j + step); };
        }
        return sw;
    };

    for (int side = 0; side < g.side_count(); ++side) {
        const auto& tags = g.facet_tags[side];
        const bool vertical = side == XMin || side == XMax;
        const int layers = vertical ? g.nx : (g.dim == 2 ? g.ny : 0);
        const double hn = vertical ? g.hx : g.hy;
        const double ht = vertical ? g.hy : g.hx;
        SideWalk sw = side_walk(side);
        for (int k = 0; k < sw.count; ++k) {
            const bool left_abs = g.dim == 2 && k > 0 && tags[k - 1] == BoundaryTag::Absorbing;
            const bool right_abs = g.dim == 1 ? tags[0] == BoundaryTag::Absorbing
                                              : (k < sw.count - 1 &&
                                                 tags[k] == BoundaryTag::Absorbing);
            if (!left_abs && !right_abs) continue;
            const int id = sw.node(k);
            auto it = nodes.find(id);
            if (it != nodes.end()) {
                it->second.corner = true;  // shared by two absorbing sides
                continue;
            }
            BoundaryNode bn;
            bn.node = id;
            bn.side = side;
            bn.weight = wA[id];
            bn.hn = hn;
            // march inward
            int prev = id;
            for (int l = 0; l < 3 && l < layers; ++l) {
                const int next = g.dim == 1 ? prev + (side == XMin ? 1 : -1)
                                            : prev + (sw.inward(k) - id);
                bn.inward[l] = next;
                prev = next;
            }
            if (g.dim == 2) {
                const bool geometric = k == 0 || k == sw.count - 1;
                const bool transition = !(left_abs && right_abs);
                bn.corner = geometric || transition;
                bn.ht = ht;
                if (k > 0) bn.tprev = sw.node(k - 1);
                if (k < sw.count - 1) bn.tnext = sw.node(k + 1);
            }
            nodes[id] = bn;
        }
        // facet mass
        if (g.dim == 1) {
            if (tags[0] == BoundaryTag::Absorbing) bt.emplace_back(sw.node(0), sw.node(0), 1.0);
        } else {
            for (int f = 0; f + 1 < sw.count; ++f) {
                if (tags[f] != BoundaryTag::Absorbing) continue;
                const int a = sw.node(f), b = sw.node(f + 1);
                bt.emplace_back(a, a, ht / 3.0);
                bt.emplace_back(b, b, ht / 3.0);
                bt.emplace_back(a, b, ht / 6.0);
                bt.emplace_back(b, a, ht / 6.0);
            }
        }
    }
    ops.boundary_mass.resize(ops.n(), ops.n());
    ops.boundary_mass.setFromTriplets(bt.begin(), bt.end());
    for (auto& [id, bn] : nodes) ops.abc_nodes.push_back(bn);
    return ops;
}

struct MassSolver::Impl {
    Eigen::SimplicialLDLT<SpMat> ldlt;
};

MassSolver::MassSolver(const SpMat& mass) : impl_(std::make_shared<Impl>()) {
    impl_->ldlt.compute(mass);
    if (impl_->ldlt.info() != Eigen::Success) throw std::runtime_error("mass factorization failed");
}

MassSolver::~MassSolver() = default;

Vec MassSolver::solve(const Vec& b) const { return impl_->ldlt.solve(b); }

Vec boundary_flux_load(const DiscreteOperators& ops, const Vec& f) {
    const Grid& g = ops.grid;
    Vec out = Vec::Zero(ops.n());
    auto one_sided = [&](int id, int step, int layers, double h) {
        const auto at = [&](int l) { return f[id + l * step]; };
        if (layers >= 3)
            return (11.0 * at(0) - 18.0 * at(1) + 9.0 * at(2) - 2.0 * at(3)) / (6.0 * h);
        if (layers == 2) return (3.0 * at(0) - 4.0 * at(1) + at(2)) / (2.0 * h);
        return (at(0) - at(1)) / h;
    };
    if (g.dim == 1) {
        out[0] += one_sided(0, 1, g.nx, g.hx);
        out[g.nx] += one_sided(g.nx, -1, g.nx, g.hx);
        return out;
    }
    const int sx = 1, sy = g.nodes_x();
    for (int j = 0; j <= g.ny; ++j) {
        const double w = (j == 0 || j == g.ny) ? 0.5 * g.hy : g.hy;
        out[g.node(0, j)] += w * one_sided(g.node(0, j), sx, g.nx, g.hx);
        out[g.node(g.nx, j)] += w * one_sided(g.node(g.nx, j), -sx, g.nx, g.hx);
    }
    for (int i = 0; i <= g.nx; ++i) {
        const double w = (i == 0 || i == g.nx) ? 0.5 * g.hx : g.hx;
        out[g.node(i, 0)] += w * one_sided(g.node(i, 0), sy, g.ny, g.hy);
        out[g.node(i, g.ny)] += w * one_sided(g.node(i, g.ny), -sy, g.ny, g.hy);
    }
    return out;
}

Vec discrete_laplacian(const DiscreteOperators& ops, const MassSolver& minv, const Vec& f) {
    return minv.solve(-(ops.stiffness * f) + boundary_flux_load(ops, f));
}

double normal_derivative(const DiscreteOperators&, const BoundaryNode& b, const Vec& f,
                         int order) {
    const double f0 = f[b.node];
    const auto& in = b.inward;
    if (order >= 3 && in[2] >= 0)
        return (11.0 * f0 - 18.0 * f[in[0]] + 9.0 * f[in[1]] - 2.0 * f[in[2]]) / (6.0 * b.hn);
    if (in[1] >= 0) return (3.0 * f0 - 4.0 * f[in[0]] + f[in[1]]) / (2.0 * b.hn);
    return (f0 - f[in[0]]) / b.hn;
}

double normal_second_derivative(const DiscreteOperators&, const BoundaryNode& b,
                                const Vec& f) {
    const auto& in = b.inward;
    const double f0 = f[b.node];
    if (in[2] >= 0)
        return (2.0 * f0 - 5.0 * f[in[0]] + 4.0 * f[in[1]] - f[in[2]]) / (b.hn * b.hn);
    if (in[1] >= 0) return (f0 - 2.0 * f[in[0]] + f[in[1]]) / (b.hn * b.hn);
    return 0.0;
}

double tangential_second_derivative(const BoundaryNode& b, const Vec& f) {
    if (b.corner || b.tprev < 0 || b.tnext < 0) return 0.0;
    return (f[b.tprev] - 2.0 * f[b.node] + f[b.tnext]) / (b.ht * b.ht);
}

}  // namespace westabc
