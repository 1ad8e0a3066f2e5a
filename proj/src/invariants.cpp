#include "lagflow/invariants.hpp"

#include <cmath>

namespace lagflow {

MaterialLoop MaterialLoop::circle(const Vec3& center, double radius, int nmarkers,
                                  int plane_axis_a, int plane_axis_b) {
    if (nmarkers < 8) throw ConstructionError("material loop needs >= 8 markers");
    MaterialLoop loop;
    loop.labels.reserve(static_cast<std::size_t>(nmarkers));
    for (int i = 0; i < nmarkers; ++i) {
        const double s = 2.0 * pi * i / nmarkers;
        Vec3 p = center;
        p[plane_axis_a] += radius * std::cos(s);
        p[plane_axis_b] += radius * std::sin(s);
        loop.labels.push_back(p);
    }
    return loop;
}

std::vector<Vec3> loop_positions(const FlowMap& map, const MaterialLoop& loop) {
    loop.validate();
    std::vector<Vec3> out;
    out.reserve(loop.labels.size());
    for (const Vec3& xi : loop.labels) out.push_back(map_position(map, xi));
    return out;
}

std::vector<Vec3> loop_velocities(const FlowMap& map, const MaterialLoop& loop) {
    loop.validate();
    std::vector<Vec3> out;
    out.reserve(loop.labels.size());
    for (const Vec3& xi : loop.labels) out.push_back(map_velocity(map, xi));
    return out;
}

double circulation(const FlowMap& map, const MaterialLoop& loop) {
    const std::vector<Vec3> x = loop_positions(map, loop);
    const std::vector<Vec3> v = loop_velocities(map, loop);
    const std::size_t n = x.size();
    double T = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        const Vec3 dx = x[j] - x[i];
        T += 0.5 * (v[i] + v[j]).dot(dx);
    }
    return T;
}

std::vector<Vec3> lagrangian_current(const FlowMap& map) {
    std::vector<Vec3> J(map.size());
    for (std::size_t i = 0; i < map.size(); ++i)
        J[i] = deformation_matrix(map, i).applyT(map.momenta[i]);
    return J;
}

namespace {

// edge value of the 1-form p . dx between neighboring lattice nodes
double edge_form(const FlowMap& map, const std::array<int, 3>& a, const std::array<int, 3>& b) {
    const Grid& lat = map.lattice;
    Vec3 dx = map.positions[lat.flat(b)] - map.positions[lat.flat(a)];
    if (lat.boundary == Boundary::Periodic)
        for (int c = 0; c < lat.dim; ++c) {
            const double L = lat.length(c);
            dx[c] -= L * std::round(dx[c] / L);
        }
    const Vec3 pm = 0.5 * (map.momenta[lat.flat(a)] + map.momenta[lat.flat(b)]);
    return pm.dot(dx);
}

void plaquette_plane(const FlowMap& map, int axis_a, int axis_b, std::vector<double>& out,
                     std::array<int, 3>& shape) {
    const Grid& lat = map.lattice;
    shape = {1, 1, 1};
    for (int a = 0; a < lat.dim; ++a) {
        const auto sa = static_cast<std::size_t>(a);
        shape[sa] = lat.n[sa];
        if (lat.boundary == Boundary::Bounded && (a == axis_a || a == axis_b)) shape[sa] -= 1;
    }
    std::size_t count = 1;
    for (int a = 0; a < lat.dim; ++a) count *= static_cast<std::size_t>(shape[static_cast<std::size_t>(a)]);
    out.assign(count, 0.0);

    const double area = lat.spacing(axis_a) * lat.spacing(axis_b);
    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t f = 0; f < count; ++f) {
        std::size_t rem = f;
        for (int a = lat.dim - 1; a >= 0; --a) {
            const auto sa = static_cast<std::size_t>(a);
            idx[sa] = static_cast<int>(rem % static_cast<std::size_t>(shape[sa]));
            rem /= static_cast<std::size_t>(shape[sa]);
        }
        auto pa = idx, pb = idx, pab = idx;
        pa[static_cast<std::size_t>(axis_a)] = lat.wrap(idx[static_cast<std::size_t>(axis_a)] + 1, axis_a);
        pb[static_cast<std::size_t>(axis_b)] = lat.wrap(idx[static_cast<std::size_t>(axis_b)] + 1, axis_b);
        pab[static_cast<std::size_t>(axis_a)] = pa[static_cast<std::size_t>(axis_a)];
        pab[static_cast<std::size_t>(axis_b)] = pb[static_cast<std::size_t>(axis_b)];
        const double circ = edge_form(map, idx, pa) + edge_form(map, pa, pab) -
                            edge_form(map, pb, pab) - edge_form(map, idx, pb);
        out[f] = circ / area;
    }
}

}  // namespace

double Vorticity::max_abs() const {
    double m = 0.0;
    for (const auto& plane : planes)
        for (double v : plane) m = std::max(m, std::abs(v));
    return m;
}

Vorticity vorticity_vector(const FlowMap& map) {
    const int dim = map.lattice.dim;
    if (dim < 2) throw Error("vorticity needs a 2D or 3D label lattice");
    Vorticity w;
    w.dim = dim;
    if (dim == 2) {
        w.planes.resize(1);
        w.shapes.resize(1);
        plaquette_plane(map, 0, 1, w.planes[0], w.shapes[0]);
    } else {
        w.planes.resize(3);
        w.shapes.resize(3);
        plaquette_plane(map, 1, 2, w.planes[0], w.shapes[0]);  // R_x
        plaquette_plane(map, 2, 0, w.planes[1], w.shapes[1]);  // R_y
        plaquette_plane(map, 0, 1, w.planes[2], w.shapes[2]);  // R_z
    }
    return w;
}

std::vector<Vec3> vorticity_at_nodes(const FlowMap& map, const Vorticity& w) {
    const Grid& lat = map.lattice;
    if (lat.boundary != Boundary::Periodic)
        throw Error("node-averaged vorticity implemented for periodic lattices");
    std::vector<Vec3> out(map.size());
    const int ncomp = lat.dim == 2 ? 1 : 3;
    for (int j = 0; j < ncomp; ++j) {
        const int axis_a = lat.dim == 2 ? 0 : (j + 1) % 3;
        const int axis_b = lat.dim == 2 ? 1 : (j + 2) % 3;
        for (std::size_t node = 0; node < map.size(); ++node) {
            auto idx = lat.unflat(node);
            double acc = 0.0;
            // the four plaquettes of this orientation touching the node
            for (int da = -1; da <= 0; ++da)
                for (int db = -1; db <= 0; ++db) {
                    auto p = idx;
                    p[static_cast<std::size_t>(axis_a)] = lat.wrap(idx[static_cast<std::size_t>(axis_a)] + da, axis_a);
                    p[static_cast<std::size_t>(axis_b)] = lat.wrap(idx[static_cast<std::size_t>(axis_b)] + db, axis_b);
                    acc += w.planes[static_cast<std::size_t>(j)][lat.flat(p)];
                }
            out[node][j] = 0.25 * acc;
        }
    }
    return out;
}

double casimir_In(const GridField& rho, const GridField& v, int n) {
    const Grid& g = rho.grid;
    if (g.dim != 2) throw Error("I_n casimirs are 2D functionals");
    if (!(g == v.grid)) throw Error("casimir_In: mismatched grids");
    GridField omega = curl(v);
    const std::size_t nodes = g.node_count();

    double mean_rho = 0.0, max_omega = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        mean_rho += rho.at(i);
        max_omega = std::max(max_omega, std::abs(omega.at(i)));
    }
    mean_rho /= static_cast<double>(nodes);
    const double eps_rho = 1e-12 * mean_rho;
    const double omega_floor = 1e-12 * max_omega;

    double acc = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        const double r = rho.at(i);
        const double om = omega.at(i);
        if (r <= eps_rho) {
            if (std::abs(om) > omega_floor && n != 0)
                throw VacuumError("vacuum cell inside the vorticity support");
            if (n == 0) continue;  // no particles contribute nothing to N
            continue;
        }
        const double w = g.boundary == Boundary::Periodic ? g.cell_volume() : g.node_volume(g.unflat(i));
        acc += std::pow(r, 1.0 - n) * std::pow(om, n) * w;
    }
    return acc;
}

KIntegrals k_integrals(const FlowMap& map) {
    const Grid& lat = map.lattice;
    if (lat.dim != 3) throw Error("K integrals are 3D functionals");
    const Vorticity w = vorticity_vector(map);
    const std::vector<Vec3> Rn = vorticity_at_nodes(map, w);
    KIntegrals K;
    const double dv = lat.cell_volume();
    for (std::size_t i = 0; i < Rn.size(); ++i) {
        K.first += Rn[i] * dv;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                K.second[static_cast<std::size_t>(3 * a + b)] += Rn[i][a] * Rn[i][b] * dv;
    }
    return K;
}

double helicity(const GridField& v) {
    if (v.grid.dim != 3) throw Error("helicity is a 3D functional");
    GridField w = curl(v);
    double q = 0.0;
    const std::size_t nodes = v.grid.node_count();
    for (std::size_t i = 0; i < nodes; ++i) {
        const double wt = v.grid.boundary == Boundary::Periodic ? v.grid.cell_volume()
                                                                : v.grid.node_volume(v.grid.unflat(i));
        q += v.vec_at(i).dot(w.vec_at(i)) * wt;
    }
    return q;
}

double helicity_lagrangian(const FlowMap& map) {
    if (map.lattice.dim != 3) throw Error("helicity is a 3D functional");
    const std::vector<Vec3> J = lagrangian_current(map);
    const Vorticity w = vorticity_vector(map);
    const std::vector<Vec3> Rn = vorticity_at_nodes(map, w);
    double q = 0.0;
    const double dv = map.lattice.cell_volume();
    for (std::size_t i = 0; i < J.size(); ++i) q += J[i].dot(Rn[i]) * dv;
    return q;
}

CanonicalFields canonical_fields(const FlowMap& map, const Grid& grid,
                                 const CanonicalOptions& opts) {
    const int dim = grid.dim;
    if (dim != map.lattice.dim) throw Error("canonical fields: dim mismatch");
    CanonicalFields out;
    out.l = deposit_l(map, grid, opts.kernel);
    out.rho = deposit_density(map, grid, opts.kernel);

    InverseSolver solver(map, opts.inverse);
    const std::vector<Mat3> deform = deformation_matrices(map);

    out.xi = GridField(grid, dim, "label");
    out.pi = GridField(grid, dim, "momentum/volume");
    out.metric = GridField(grid, dim * dim, "dimensionless");
    GridField rho0_at(grid, 1);

    const std::size_t nodes = grid.node_count();
    std::vector<Mat3> A_at(nodes, Mat3(dim));
    for (std::size_t n = 0; n < nodes; ++n) {
        const Vec3 x = grid.coord(n);
        const Vec3 xi = solver.solve(x);
        for (int c = 0; c < dim; ++c) out.xi.at(n, c) = xi[c];

        const Mat3 A = interp_deformation(map, deform, xi);
        A_at[n] = A;
        const Vec3 l = out.l.vec_at(n);
        const Vec3 piv = A.applyT(l) * (-1.0);
        for (int c = 0; c < dim; ++c) out.pi.at(n, c) = piv[c];
        const Mat3 g = A.transpose().mul(A);
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) out.metric.at(n, a * dim + b) = g(a, b);

        // rho0 at the inverse label, for the det-g identity with nonuniform rho0
        rho0_at.at(n) = map_rho0(map, xi);
    }

    // grad xi on the grid; for periodic grids differentiate the displacement
    // field xi - x (periodic) and add the identity back
    GridField dxi(grid, dim * dim);  // dxi(a,b) = d xi_a / d x_b
    {
        GridField work = out.xi;
        if (grid.boundary == Boundary::Periodic) {
            for (std::size_t n = 0; n < nodes; ++n) {
                const Vec3 x = grid.coord(n);
                for (int c = 0; c < dim; ++c) {
                    double d = work.at(n, c) - x[c];
                    const double L = map.lattice.length(c);
                    d -= L * std::round(d / L);
                    work.at(n, c) = d;
                }
            }
        }
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) {
                GridField der = opts.scheme == DerivativeScheme::Spectral
                                    ? spectral_derivative(work, a, b)
                                    : derivative(work, a, b);
                for (std::size_t n = 0; n < nodes; ++n) {
                    double val = der.at(n);
                    if (grid.boundary == Boundary::Periodic && a == b) val += 1.0;
                    dxi.at(n, a * dim + b) = val;
                }
            }
    }

    // identity Eq-style: l_j = -d xi_k/d x_j pi_k
    double num = 0.0, den = 0.0;
    for (std::size_t n = 0; n < nodes; ++n) {
        for (int j = 0; j < dim; ++j) {
            double recon = 0.0;
            for (int k = 0; k < dim; ++k) recon -= dxi.at(n, k * dim + j) * out.pi.at(n, k);
            const double r = out.l.at(n, j) - recon;
            num += r * r;
            den += out.l.at(n, j) * out.l.at(n, j);
        }
    }
    out.reconstruction_residual = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);

    double max_err = 0.0;
    for (std::size_t n = 0; n < nodes; ++n) {
        Mat3 g(dim);
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) g(a, b) = out.metric.at(n, a * dim + b);
        const double detg = g.det();
        const double r = out.rho.at(n);
        const double r0 = rho0_at.at(n);
        if (r0 > 0.0) max_err = std::max(max_err, std::abs(detg * r * r / (r0 * r0) - 1.0));
    }
    out.metric_density_error = max_err;
    return out;
}

}  // namespace lagflow
