#include "lagflow/label_space.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lagflow {

Mat3 Mat3::inverse() const {
    const double d = det();
    if (d == 0.0) throw Error("singular matrix has no inverse");
    Mat3 inv(dim);
    if (dim == 1) {
        inv.a[0][0] = 1.0 / d;
    } else if (dim == 2) {
        inv.a[0][0] = a[1][1] / d;
        inv.a[0][1] = -a[0][1] / d;
        inv.a[1][0] = -a[1][0] / d;
        inv.a[1][1] = a[0][0] / d;
    } else {
        inv.a[0][0] = (a[1][1]*a[2][2] - a[1][2]*a[2][1]) / d;
        inv.a[0][1] = (a[0][2]*a[2][1] - a[0][1]*a[2][2]) / d;
        inv.a[0][2] = (a[0][1]*a[1][2] - a[0][2]*a[1][1]) / d;
        inv.a[1][0] = (a[1][2]*a[2][0] - a[1][0]*a[2][2]) / d;
        inv.a[1][1] = (a[0][0]*a[2][2] - a[0][2]*a[2][0]) / d;
        inv.a[1][2] = (a[0][2]*a[1][0] - a[0][0]*a[1][2]) / d;
        inv.a[2][0] = (a[1][0]*a[2][1] - a[1][1]*a[2][0]) / d;
        inv.a[2][1] = (a[0][1]*a[2][0] - a[0][0]*a[2][1]) / d;
        inv.a[2][2] = (a[0][0]*a[1][1] - a[0][1]*a[1][0]) / d;
    }
    return inv;
}

void FlowMap::check_consistent() const {
    const std::size_t nn = lattice.node_count();
    if (positions.size() != nn || momenta.size() != nn || rho0.size() != nn)
        throw ConstructionError("flow map arrays must match the lattice node count");
}

FlowMap build_lattice(int dim, const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                      const std::array<int, 3>& shape, Boundary boundary, const ScalarFn& rho0_fn,
                      const VectorFn& x0_fn, const VectorFn& v0_fn, double mass) {
    FlowMap map;
    map.lattice = LabelLattice(dim, lo, hi, shape, boundary);
    map.mass = mass;
    map.time = 0.0;
    const std::size_t nn = map.lattice.node_count();
    map.positions.resize(nn);
    map.momenta.resize(nn);
    map.rho0.resize(nn);
    for (std::size_t i = 0; i < nn; ++i) {
        const Vec3 xi = map.lattice.coord(i);
        const double r0 = rho0_fn(xi);
        if (!(r0 > 0.0)) {
            std::ostringstream msg;
            msg << "rho0 must be positive; got " << r0 << " at label node " << i;
            throw ConstructionError(msg.str());
        }
        map.rho0[i] = r0;
        map.positions[i] = x0_fn(xi);
        map.momenta[i] = mass * r0 * v0_fn(xi);
    }
    // x0 must be orientation preserving
    for (std::size_t i = 0; i < nn; ++i) {
        const double d = deformation_matrix(map, i).det();
        if (!(d > 0.0)) {
            std::ostringstream msg;
            msg << "initial map is not orientation preserving: det A = " << d << " at label node " << i;
            throw ConstructionError(msg.str());
        }
    }
    return map;
}

namespace {

// position difference between two lattice neighbors; minimum image per
// component on periodic lattices (the map is xi + periodic displacement,
// with the x-period equal to the label-domain length)
Vec3 neighbor_delta(const FlowMap& map, const std::array<int, 3>& ia, const std::array<int, 3>& ib) {
    Vec3 d = map.positions[map.lattice.flat(ia)] - map.positions[map.lattice.flat(ib)];
    if (map.lattice.boundary == Boundary::Periodic) {
        for (int c = 0; c < map.lattice.dim; ++c) {
            const double L = map.lattice.length(c);
            d[c] -= L * std::round(d[c] / L);
        }
    }
    return d;
}

}  // namespace

Mat3 deformation_matrix(const FlowMap& map, std::size_t label_index) {
    const Grid& lat = map.lattice;
    if (label_index >= map.size()) throw Error("label index out of range");
    const auto idx = lat.unflat(label_index);
    Mat3 A(lat.dim);
    for (int k = 0; k < lat.dim; ++k) {
        const auto sk = static_cast<std::size_t>(k);
        const double h = lat.spacing(k);
        const int i = idx[sk], nk = lat.n[sk];
        Vec3 diff;
        if (lat.boundary == Boundary::Periodic) {
            auto ip = idx, im = idx;
            ip[sk] = lat.wrap(i + 1, k);
            im[sk] = lat.wrap(i - 1, k);
            diff = neighbor_delta(map, ip, im) * (1.0 / (2.0 * h));
        } else if (i == 0) {
            auto i1 = idx, i2 = idx;
            i1[sk] = 1;
            i2[sk] = 2;
            if (nk == 2) {
                diff = neighbor_delta(map, i1, idx) * (1.0 / h);
            } else {
                diff = (map.positions[lat.flat(idx)] * (-3.0) + map.positions[lat.flat(i1)] * 4.0 -
                        map.positions[lat.flat(i2)]) * (1.0 / (2.0 * h));
            }
        } else if (i == nk - 1) {
            auto i1 = idx, i2 = idx;
            i1[sk] = nk - 2;
            i2[sk] = nk - 3;
            if (nk == 2) {
                diff = neighbor_delta(map, idx, i1) * (1.0 / h);
            } else {
                diff = (map.positions[lat.flat(idx)] * 3.0 - map.positions[lat.flat(i1)] * 4.0 +
                        map.positions[lat.flat(i2)]) * (1.0 / (2.0 * h));
            }
        } else {
            auto ip = idx, im = idx;
            ip[sk] = i + 1;
            im[sk] = i - 1;
            diff = neighbor_delta(map, ip, im) * (1.0 / (2.0 * h));
        }
        for (int j = 0; j < lat.dim; ++j) A(j, k) = diff[j];
    }
    return A;
}

std::vector<Mat3> deformation_matrices(const FlowMap& map) {
    std::vector<Mat3> out;
    out.reserve(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) out.push_back(deformation_matrix(map, i));
    return out;
}

std::vector<double> jacobian_density(const FlowMap& map) {
    std::vector<double> rho(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) {
        const double d = deformation_matrix(map, i).det();
        if (!(d > 0.0)) {
            std::ostringstream msg;
            msg << "folded map: det A = " << d << " at label node " << i << " (t=" << map.time << ")";
            throw FoldingError(msg.str());
        }
        rho[i] = map.rho0[i] / d;
    }
    return rho;
}

namespace {

// corner loop shared by all lattice interpolators
template <typename Fn>
void for_corners(const Grid& lat, const Vec3& xi, Fn&& fn) {
    int base[3] = {0, 0, 0};
    double frac[3] = {0, 0, 0};
    for (int a = 0; a < lat.dim; ++a) {
        double q = xi[a];
        if (lat.boundary == Boundary::Periodic) {
            const double L = lat.length(a);
            q -= L * std::floor((q - lat.lo[static_cast<std::size_t>(a)]) / L);
        }
        lat.locate(q, a, base[a], frac[a]);
    }
    const int corners = 1 << lat.dim;
    for (int corner = 0; corner < corners; ++corner) {
        double w = 1.0;
        std::array<int, 3> idx{0, 0, 0};
        for (int a = 0; a < lat.dim; ++a) {
            const int bit = (corner >> a) & 1;
            w *= bit ? frac[a] : 1.0 - frac[a];
            idx[static_cast<std::size_t>(a)] = lat.wrap(base[a] + bit, a);
        }
        if (w != 0.0) fn(idx, w);
    }
}

}  // namespace

Vec3 map_position(const FlowMap& map, const Vec3& xi) {
    Vec3 disp;
    for_corners(map.lattice, xi, [&](const std::array<int, 3>& idx, double w) {
        disp += w * (map.positions[map.lattice.flat(idx)] - map.lattice.coord(idx));
    });
    return xi + disp;
}

Vec3 map_velocity(const FlowMap& map, const Vec3& xi) {
    Vec3 v;
    for_corners(map.lattice, xi, [&](const std::array<int, 3>& idx, double w) {
        v += w * map.velocity(map.lattice.flat(idx));
    });
    return v;
}

double map_rho0(const FlowMap& map, const Vec3& xi) {
    double r = 0.0;
    for_corners(map.lattice, xi, [&](const std::array<int, 3>& idx, double w) {
        r += w * map.rho0[map.lattice.flat(idx)];
    });
    return r;
}

Mat3 interp_deformation(const FlowMap& map, const std::vector<Mat3>& deform, const Vec3& xi) {
    Mat3 A(map.lattice.dim);
    for_corners(map.lattice, xi, [&](const std::array<int, 3>& idx, double w) {
        const Mat3& Ac = deform[map.lattice.flat(idx)];
        for (int i = 0; i < map.lattice.dim; ++i)
            for (int j = 0; j < map.lattice.dim; ++j) A(i, j) += w * Ac(i, j);
    });
    return A;
}

InverseSolver::InverseSolver(const FlowMap& map, const InverseOptions& opts)
    : map_(map), opts_(opts), deform_(deformation_matrices(map)) {
    map.check_consistent();
    // hash forward positions on a coarse cell grid over their bounding box
    const Grid& lat = map.lattice;
    std::array<double, 3> lo{0, 0, 0}, hi{1, 1, 1};
    for (int c = 0; c < lat.dim; ++c) {
        const auto sc = static_cast<std::size_t>(c);
        if (lat.boundary == Boundary::Periodic) {
            lo[sc] = lat.lo[sc];
            hi[sc] = lat.hi[sc];
        } else {
            double mn = std::numeric_limits<double>::max(), mx = -mn;
            for (const auto& p : map.positions) {
                mn = std::min(mn, p[c]);
                mx = std::max(mx, p[c]);
            }
            const double pad = 1e-9 + 1e-9 * (mx - mn);
            lo[sc] = mn - pad;
            hi[sc] = mx + pad;
        }
    }
    std::array<int, 3> nc{1, 1, 1};
    const int per_axis = std::max(2, static_cast<int>(std::floor(
        std::pow(static_cast<double>(map.size()), 1.0 / lat.dim))));
    for (int c = 0; c < lat.dim; ++c) nc[static_cast<std::size_t>(c)] = per_axis;
    hash_grid_ = Grid(lat.dim, lo, hi, nc, lat.boundary == Boundary::Periodic ? Boundary::Periodic
                                                                              : Boundary::Bounded);
    cells_.assign(hash_grid_.node_count(), {});
    for (std::size_t i = 0; i < map.size(); ++i) {
        std::array<int, 3> cell{0, 0, 0};
        bool ok = true;
        for (int c = 0; c < lat.dim; ++c) {
            int i0 = 0;
            double fr = 0.0;
            try {
                hash_grid_.locate(map.positions[i][c], c, i0, fr);
            } catch (const OutOfDomain&) {
                ok = false;
                break;
            }
            cell[static_cast<std::size_t>(c)] = i0;
        }
        if (ok) cells_[hash_grid_.flat(cell)].push_back(i);
    }
}

Vec3 InverseSolver::forward(const Vec3& xi) const { return map_position(map_, xi); }

Mat3 InverseSolver::jacobian(const Vec3& xi) const {
    return interp_deformation(map_, deform_, xi);
}

Vec3 InverseSolver::solve(const Vec3& x) const {
    const Grid& lat = map_.lattice;
    // seed: nearest forward position in the hash cell neighborhood
    std::array<int, 3> cell{0, 0, 0};
    for (int c = 0; c < lat.dim; ++c) {
        int i0 = 0;
        double fr = 0.0;
        double q = x[c];
        if (hash_grid_.boundary == Boundary::Periodic) {
            const double L = hash_grid_.length(c);
            q -= L * std::floor((q - hash_grid_.lo[static_cast<std::size_t>(c)]) / L);
        } else if (q < hash_grid_.lo[static_cast<std::size_t>(c)] || q > hash_grid_.hi[static_cast<std::size_t>(c)]) {
            throw OutOfDomain("query point outside the image of the map");
        }
        hash_grid_.locate(q, c, i0, fr);
        cell[static_cast<std::size_t>(c)] = i0;
    }
    std::size_t best = std::numeric_limits<std::size_t>::max();
    double best_d2 = std::numeric_limits<double>::max();
    const int reach = 2;
    std::array<int, 3> off{0, 0, 0};
    const int lo_off = -reach, hi_off = reach;
    for (off[0] = lo_off; off[0] <= (lat.dim > 0 ? hi_off : lo_off); ++off[0])
        for (off[1] = (lat.dim > 1 ? lo_off : 0); off[1] <= (lat.dim > 1 ? hi_off : 0); ++off[1])
            for (off[2] = (lat.dim > 2 ? lo_off : 0); off[2] <= (lat.dim > 2 ? hi_off : 0); ++off[2]) {
                std::array<int, 3> cc{0, 0, 0};
                bool valid = true;
                for (int c = 0; c < lat.dim; ++c) {
                    int ic = cell[static_cast<std::size_t>(c)] + off[static_cast<std::size_t>(c)];
                    if (hash_grid_.boundary == Boundary::Periodic) {
                        ic = hash_grid_.wrap(ic, c);
                    } else if (ic < 0 || ic >= hash_grid_.n[static_cast<std::size_t>(c)]) {
                        valid = false;
                        break;
                    }
                    cc[static_cast<std::size_t>(c)] = ic;
                }
                if (!valid) continue;
                for (std::size_t i : cells_[hash_grid_.flat(cc)]) {
                    Vec3 d = map_.positions[i] - x;
                    if (lat.boundary == Boundary::Periodic)
                        for (int c = 0; c < lat.dim; ++c) {
                            const double L = lat.length(c);
                            d[c] -= L * std::round(d[c] / L);
                        }
                    const double d2 = d.norm2();
                    if (d2 < best_d2) {
                        best_d2 = d2;
                        best = i;
                    }
                }
            }
    if (best == std::numeric_limits<std::size_t>::max())
        throw OutOfDomain("no particles near the query point");

    Vec3 xi = lat.coord(best);
    for (int it = 0; it < opts_.max_iter; ++it) {
        Vec3 r = forward(xi) - x;
        if (lat.boundary == Boundary::Periodic)
            for (int c = 0; c < lat.dim; ++c) {
                const double L = lat.length(c);
                r[c] -= L * std::round(r[c] / L);
            }
        if (r.norm() < opts_.tol) {
            if (lat.boundary == Boundary::Bounded) {
                for (int c = 0; c < lat.dim; ++c) {
                    const double pad = 0.5 * lat.spacing(c);
                    if (xi[c] < lat.lo[static_cast<std::size_t>(c)] - pad || xi[c] > lat.hi[static_cast<std::size_t>(c)] + pad)
                        throw OutOfDomain("inverse label falls outside the label domain");
                }
            } else {
                for (int c = 0; c < lat.dim; ++c) {
                    const double L = lat.length(c);
                    xi[c] -= L * std::floor((xi[c] - lat.lo[static_cast<std::size_t>(c)]) / L);
                }
            }
            return xi;
        }
        Mat3 A = jacobian(xi);
        if (!(std::abs(A.det()) > 0.0)) throw InverseError("singular jacobian during Newton inversion");
        xi -= A.inverse().apply(r);
    }
    throw InverseError("Newton inversion did not converge");
}

Vec3 inverse_map(const FlowMap& map, const Vec3& x, const InverseOptions& opts) {
    return InverseSolver(map, opts).solve(x);
}

}  // namespace lagflow
