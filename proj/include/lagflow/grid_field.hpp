#pragma once

#include <string>
#include <vector>

#include "lagflow/geometry.hpp"

namespace lagflow {

// Eulerian field on a uniform grid: ncomp values per node, node-major layout.
struct GridField {
    Grid grid;
    int ncomp = 1;
    std::string units;
    std::vector<double> values;

    GridField() = default;
    GridField(const Grid& g, int nc, std::string u = "")
        : grid(g), ncomp(nc), units(std::move(u)), values(g.node_count() * static_cast<std::size_t>(nc), 0.0) {}

    double& at(std::size_t node, int comp = 0) { return values[node * static_cast<std::size_t>(ncomp) + static_cast<std::size_t>(comp)]; }
    double at(std::size_t node, int comp = 0) const { return values[node * static_cast<std::size_t>(ncomp) + static_cast<std::size_t>(comp)]; }

    double& at(const std::array<int, 3>& idx, int comp = 0) { return at(grid.flat(idx), comp); }
    double at(const std::array<int, 3>& idx, int comp = 0) const { return at(grid.flat(idx), comp); }

    Vec3 vec_at(std::size_t node) const {
        Vec3 v;
        for (int c = 0; c < ncomp && c < 3; ++c) v[c] = at(node, c);
        return v;
    }

    void fill(double v) { std::fill(values.begin(), values.end(), v); }

    // multilinear interpolation at an arbitrary point
    double interp(const Vec3& x, int comp) const;
    Vec3 interp_vec(const Vec3& x) const;

    // node-weighted quadrature of one component
    double integral(int comp = 0) const;

    double l2_norm(int comp = -1) const;  // -1: all components
    double max_abs(int comp = -1) const;
};

// second-order finite differences; periodic wrap or one-sided at bounded edges
GridField derivative(const GridField& f, int comp, int axis);
GridField gradient(const GridField& scalar);           // ncomp=1 -> ncomp=dim
GridField divergence(const GridField& vec);            // ncomp=dim -> ncomp=1
GridField curl(const GridField& vec);                  // 3D: ncomp=3 -> 3; 2D: ncomp=2 -> 1
GridField laplacian(const GridField& scalar);

// spectral (FFT) derivative, periodic grids only
GridField spectral_derivative(const GridField& f, int comp, int axis);

}  // namespace lagflow
