#pragma once

#include <functional>
#include <vector>

#include "lagflow/geometry.hpp"
#include "lagflow/grid_field.hpp"

namespace lagflow {

// Label lattice: uniform Cartesian discretization of the label domain D.
// Periodic or fixed-wall (bounded) per axis set globally.
using LabelLattice = Grid;

// The Lagrangian configuration: the diffeomorphism xi -> x(xi, t) sampled on
// the label lattice, conjugate momenta p = m rho0 xdot, and the initial
// number density rho0. Mass m is kept as a separate scalar.
struct FlowMap {
    LabelLattice lattice;
    std::vector<Vec3> positions;
    std::vector<Vec3> momenta;
    std::vector<double> rho0;
    double mass = 1.0;
    double time = 0.0;

    std::size_t size() const { return positions.size(); }

    Vec3 velocity(std::size_t i) const { return momenta[i] * (1.0 / (mass * rho0[i])); }

    // label-space quadrature weight of one lattice node
    double label_volume(std::size_t i) const {
        return lattice.boundary == Boundary::Periodic ? lattice.cell_volume()
                                                      : lattice.node_volume(lattice.unflat(i));
    }

    void check_consistent() const;
};

using ScalarFn = std::function<double(const Vec3&)>;
using VectorFn = std::function<Vec3(const Vec3&)>;

FlowMap build_lattice(int dim, const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                      const std::array<int, 3>& shape, Boundary boundary, const ScalarFn& rho0_fn,
                      const VectorFn& x0_fn, const VectorFn& v0_fn, double mass = 1.0);

// A^j_k = dx_j/dxi_k by centered differences (one-sided at fixed walls).
// On periodic lattices the position differences are taken minimum-image in x
// so that maps of the form x = xi + periodic displacement differentiate
// cleanly across the wrap.
Mat3 deformation_matrix(const FlowMap& map, std::size_t label_index);

std::vector<Mat3> deformation_matrices(const FlowMap& map);

// rho(xi) = rho0(xi) / det A(xi); throws FoldingError naming the label if
// det A <= 0 anywhere
std::vector<double> jacobian_density(const FlowMap& map);

// map evaluation at arbitrary label points by multilinear interpolation; on
// periodic lattices the displacement x - xi is interpolated so collective
// drift and wrap are handled
Vec3 map_position(const FlowMap& map, const Vec3& xi);
Vec3 map_velocity(const FlowMap& map, const Vec3& xi);
double map_rho0(const FlowMap& map, const Vec3& xi);

// multilinear interpolation of precomputed per-node deformation matrices
Mat3 interp_deformation(const FlowMap& map, const std::vector<Mat3>& deform, const Vec3& xi);

struct InverseOptions {
    double tol = 1e-10;
    int max_iter = 50;
};

// Newton inversion of the map, seeded from a cell hash of forward positions
Vec3 inverse_map(const FlowMap& map, const Vec3& x, const InverseOptions& opts = {});

// Cached seed structure for repeated inversions against one snapshot
class InverseSolver {
  public:
    explicit InverseSolver(const FlowMap& map, const InverseOptions& opts = {});
    Vec3 solve(const Vec3& x) const;

  private:
    const FlowMap& map_;
    InverseOptions opts_;
    Grid hash_grid_;
    std::vector<std::vector<std::size_t>> cells_;
    std::vector<Mat3> deform_;

    Vec3 forward(const Vec3& xi) const;
    Mat3 jacobian(const Vec3& xi) const;
};

}  // namespace lagflow
