#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "lagflow/core.hpp"

namespace lagflow {

// Periodic: n nodes per axis at lo + i*h, h = L/n (right end excluded).
// Bounded:  n nodes per axis at lo + i*h, h = L/(n-1) (both ends included);
//           "fixed-wall" for label lattices, "clamped" for Eulerian grids.
enum class Boundary { Periodic, Bounded };

struct Grid {
    int dim = 1;
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{1.0, 1.0, 1.0};
    std::array<int, 3> n{2, 1, 1};
    Boundary boundary = Boundary::Periodic;

    Grid() = default;
    Grid(int d, std::array<double, 3> l, std::array<double, 3> h, std::array<int, 3> shape,
         Boundary b)
        : dim(d), lo(l), hi(h), n(shape), boundary(b) {
        validate();
    }

    void validate() const {
        if (dim < 1 || dim > 3) throw ConstructionError("grid dim must be 1, 2 or 3");
        for (int a = 0; a < dim; ++a) {
            if (n[static_cast<std::size_t>(a)] < 2)
                throw ConstructionError("grid needs at least 2 nodes per axis");
            if (!(hi[static_cast<std::size_t>(a)] > lo[static_cast<std::size_t>(a)]))
                throw ConstructionError("grid extents must have positive measure");
        }
    }

    double length(int axis) const { return hi[static_cast<std::size_t>(axis)] - lo[static_cast<std::size_t>(axis)]; }

    double spacing(int axis) const {
        const int na = n[static_cast<std::size_t>(axis)];
        return boundary == Boundary::Periodic ? length(axis) / na : length(axis) / (na - 1);
    }

    std::size_t node_count() const {
        std::size_t c = 1;
        for (int a = 0; a < dim; ++a) c *= static_cast<std::size_t>(n[static_cast<std::size_t>(a)]);
        return c;
    }

    std::size_t flat(const std::array<int, 3>& idx) const {
        std::size_t f = 0;
        for (int a = 0; a < dim; ++a) f = f * static_cast<std::size_t>(n[static_cast<std::size_t>(a)]) + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
        return f;
    }

    std::array<int, 3> unflat(std::size_t f) const {
        std::array<int, 3> idx{0, 0, 0};
        for (int a = dim - 1; a >= 0; --a) {
            const int na = n[static_cast<std::size_t>(a)];
            idx[static_cast<std::size_t>(a)] = static_cast<int>(f % static_cast<std::size_t>(na));
            f /= static_cast<std::size_t>(na);
        }
        return idx;
    }

    // wrap (periodic) an index on one axis; bounded indices must already be valid
    int wrap(int i, int axis) const {
        const int na = n[static_cast<std::size_t>(axis)];
        if (boundary == Boundary::Periodic) {
            i %= na;
            if (i < 0) i += na;
        }
        return i;
    }

    Vec3 coord(const std::array<int, 3>& idx) const {
        Vec3 x;
        for (int a = 0; a < dim; ++a)
            x[a] = lo[static_cast<std::size_t>(a)] + spacing(a) * idx[static_cast<std::size_t>(a)];
        return x;
    }

    Vec3 coord(std::size_t f) const { return coord(unflat(f)); }

    // node quadrature weight; bounded axes give boundary nodes half weight so
    // that the weights sum to the domain volume
    double node_volume(const std::array<int, 3>& idx) const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) {
            double w = spacing(a);
            if (boundary == Boundary::Bounded) {
                const int i = idx[static_cast<std::size_t>(a)];
                if (i == 0 || i == n[static_cast<std::size_t>(a)] - 1) w *= 0.5;
            }
            v *= w;
        }
        return v;
    }

    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= spacing(a);
        return v;
    }

    double total_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= length(a);
        return v;
    }

    // locate x on axis: base node index and fractional offset in [0,1)
    // for CIC weights and multilinear interpolation
    void locate(double x, int axis, int& i0, double& frac) const {
        const double h = spacing(axis);
        const double t = (x - lo[static_cast<std::size_t>(axis)]) / h;
        double fl = std::floor(t);
        i0 = static_cast<int>(fl);
        frac = t - fl;
        const int na = n[static_cast<std::size_t>(axis)];
        if (boundary == Boundary::Periodic) {
            i0 = wrap(i0, axis);
        } else {
            if (t < -1e-9 || t > na - 1 + 1e-9)
                throw OutOfDomain("position outside bounded grid on axis " + std::to_string(axis));
            if (i0 < 0) { i0 = 0; frac = 0.0; }
            if (i0 >= na - 1) { i0 = na - 2; frac = 1.0; }
        }
    }

    bool operator==(const Grid& o) const {
        if (dim != o.dim || boundary != o.boundary) return false;
        for (int a = 0; a < dim; ++a) {
            const auto sa = static_cast<std::size_t>(a);
            if (n[sa] != o.n[sa] || lo[sa] != o.lo[sa] || hi[sa] != o.hi[sa]) return false;
        }
        return true;
    }
};

// uniform 1D box helpers used all over the tests
inline Grid grid1d(double lo, double hi, int n, Boundary b) {
    return Grid(1, {lo, 0, 0}, {hi, 1, 1}, {n, 1, 1}, b);
}
inline Grid grid2d(double lo, double hi, int n, Boundary b) {
    return Grid(2, {lo, lo, 0}, {hi, hi, 1}, {n, n, 1}, b);
}
inline Grid grid3d(double lo, double hi, int n, Boundary b) {
    return Grid(3, {lo, lo, lo}, {hi, hi, hi}, {n, n, n}, b);
}

}  // namespace lagflow
