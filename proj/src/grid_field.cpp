#include "lagflow/grid_field.hpp"

#include <cmath>

namespace lagflow {

double GridField::interp(const Vec3& x, int comp) const {
    int base[3] = {0, 0, 0};
    double frac[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < grid.dim; ++a) grid.locate(x[a], a, base[a], frac[a]);

    double acc = 0.0;
    const int corners = 1 << grid.dim;
    for (int corner = 0; corner < corners; ++corner) {
        double w = 1.0;
        std::array<int, 3> idx{0, 0, 0};
        for (int a = 0; a < grid.dim; ++a) {
            const int bit = (corner >> a) & 1;
            w *= bit ? frac[a] : 1.0 - frac[a];
            idx[static_cast<std::size_t>(a)] = grid.wrap(base[a] + bit, a);
        }
        if (w != 0.0) acc += w * at(idx, comp);
    }
    return acc;
}

Vec3 GridField::interp_vec(const Vec3& x) const {
    Vec3 v;
    for (int c = 0; c < ncomp && c < 3; ++c) v[c] = interp(x, c);
    return v;
}

double GridField::integral(int comp) const {
    double acc = 0.0;
    const std::size_t nodes = grid.node_count();
    if (grid.boundary == Boundary::Periodic) {
        const double w = grid.cell_volume();
        for (std::size_t i = 0; i < nodes; ++i) acc += at(i, comp);
        return acc * w;
    }
    for (std::size_t i = 0; i < nodes; ++i) acc += at(i, comp) * grid.node_volume(grid.unflat(i));
    return acc;
}

double GridField::l2_norm(int comp) const {
    double acc = 0.0;
    const std::size_t nodes = grid.node_count();
    for (std::size_t i = 0; i < nodes; ++i) {
        const double w = grid.boundary == Boundary::Periodic ? grid.cell_volume()
                                                             : grid.node_volume(grid.unflat(i));
        if (comp >= 0) {
            acc += at(i, comp) * at(i, comp) * w;
        } else {
            for (int c = 0; c < ncomp; ++c) acc += at(i, c) * at(i, c) * w;
        }
    }
    return std::sqrt(acc);
}

double GridField::max_abs(int comp) const {
    double m = 0.0;
    const std::size_t nodes = grid.node_count();
    for (std::size_t i = 0; i < nodes; ++i) {
        if (comp >= 0)
            m = std::max(m, std::abs(at(i, comp)));
        else
            for (int c = 0; c < ncomp; ++c) m = std::max(m, std::abs(at(i, c)));
    }
    return m;
}

GridField derivative(const GridField& f, int comp, int axis) {
    GridField d(f.grid, 1);
    const Grid& g = f.grid;
    const double h = g.spacing(axis);
    const int na = g.n[static_cast<std::size_t>(axis)];
    const std::size_t nodes = g.node_count();
    for (std::size_t node = 0; node < nodes; ++node) {
        auto idx = g.unflat(node);
        const int i = idx[static_cast<std::size_t>(axis)];
        auto ip = idx;
        auto im = idx;
        if (g.boundary == Boundary::Periodic) {
            ip[static_cast<std::size_t>(axis)] = g.wrap(i + 1, axis);
            im[static_cast<std::size_t>(axis)] = g.wrap(i - 1, axis);
            d.at(node) = (f.at(ip, comp) - f.at(im, comp)) / (2.0 * h);
        } else if (i == 0) {
            // one-sided, 2nd order
            auto i1 = idx, i2 = idx;
            i1[static_cast<std::size_t>(axis)] = 1;
            i2[static_cast<std::size_t>(axis)] = 2;
            d.at(node) = (-3.0 * f.at(idx, comp) + 4.0 * f.at(i1, comp) - f.at(i2, comp)) / (2.0 * h);
        } else if (i == na - 1) {
            auto i1 = idx, i2 = idx;
            i1[static_cast<std::size_t>(axis)] = na - 2;
            i2[static_cast<std::size_t>(axis)] = na - 3;
            d.at(node) = (3.0 * f.at(idx, comp) - 4.0 * f.at(i1, comp) + f.at(i2, comp)) / (2.0 * h);
        } else {
            ip[static_cast<std::size_t>(axis)] = i + 1;
            im[static_cast<std::size_t>(axis)] = i - 1;
            d.at(node) = (f.at(ip, comp) - f.at(im, comp)) / (2.0 * h);
        }
    }
    return d;
}

GridField gradient(const GridField& scalar) {
    GridField out(scalar.grid, scalar.grid.dim);
    for (int a = 0; a < scalar.grid.dim; ++a) {
        GridField d = derivative(scalar, 0, a);
        const std::size_t nodes = scalar.grid.node_count();
        for (std::size_t i = 0; i < nodes; ++i) out.at(i, a) = d.at(i);
    }
    return out;
}

GridField divergence(const GridField& vec) {
    GridField out(vec.grid, 1);
    for (int a = 0; a < vec.grid.dim; ++a) {
        GridField d = derivative(vec, a, a);
        const std::size_t nodes = vec.grid.node_count();
        for (std::size_t i = 0; i < nodes; ++i) out.at(i) += d.at(i);
    }
    return out;
}

GridField curl(const GridField& vec) {
    const Grid& g = vec.grid;
    if (g.dim == 2) {
        GridField out(g, 1);
        GridField d1 = derivative(vec, 1, 0);   // d v_y / dx
        GridField d2 = derivative(vec, 0, 1);   // d v_x / dy
        const std::size_t nodes = g.node_count();
        for (std::size_t i = 0; i < nodes; ++i) out.at(i) = d1.at(i) - d2.at(i);
        return out;
    }
    if (g.dim != 3) throw Error("curl needs a 2D or 3D vector field");
    GridField out(g, 3);
    GridField dzy = derivative(vec, 2, 1), dyz = derivative(vec, 1, 2);
    GridField dxz = derivative(vec, 0, 2), dzx = derivative(vec, 2, 0);
    GridField dyx = derivative(vec, 1, 0), dxy = derivative(vec, 0, 1);
    const std::size_t nodes = g.node_count();
    for (std::size_t i = 0; i < nodes; ++i) {
        out.at(i, 0) = dzy.at(i) - dyz.at(i);
        out.at(i, 1) = dxz.at(i) - dzx.at(i);
        out.at(i, 2) = dyx.at(i) - dxy.at(i);
    }
    return out;
}

GridField laplacian(const GridField& scalar) {
    GridField out(scalar.grid, 1);
    const Grid& g = scalar.grid;
    const std::size_t nodes = g.node_count();
    for (int a = 0; a < g.dim; ++a) {
        const double h2 = g.spacing(a) * g.spacing(a);
        const int na = g.n[static_cast<std::size_t>(a)];
        for (std::size_t node = 0; node < nodes; ++node) {
            auto idx = g.unflat(node);
            const int i = idx[static_cast<std::size_t>(a)];
            auto ip = idx, im = idx;
            if (g.boundary == Boundary::Periodic) {
                ip[static_cast<std::size_t>(a)] = g.wrap(i + 1, a);
                im[static_cast<std::size_t>(a)] = g.wrap(i - 1, a);
            } else if (i == 0) {
                ip[static_cast<std::size_t>(a)] = 1;
                im[static_cast<std::size_t>(a)] = 2;  // (f0 - 2 f1 + f2) one-sided
                out.at(node) += (scalar.at(node) - 2.0 * scalar.at(ip) + scalar.at(im)) / h2;
                continue;
            } else if (i == na - 1) {
                ip[static_cast<std::size_t>(a)] = na - 2;
                im[static_cast<std::size_t>(a)] = na - 3;
                out.at(node) += (scalar.at(node) - 2.0 * scalar.at(ip) + scalar.at(im)) / h2;
                continue;
            } else {
                ip[static_cast<std::size_t>(a)] = i + 1;
                im[static_cast<std::size_t>(a)] = i - 1;
            }
            out.at(node) += (scalar.at(ip) - 2.0 * scalar.at(node) + scalar.at(im)) / h2;
        }
    }
    return out;
}

}  // namespace lagflow
