#pragma once

#include <vector>

#include "lagflow/deposition.hpp"
#include "lagflow/grid_field.hpp"
#include "lagflow/label_space.hpp"

namespace lagflow {

// closed material contour, parametrized in label space and advected by the
// map itself (the fixed loop lambda whose image is the moving loop Lambda)
struct MaterialLoop {
    std::vector<Vec3> labels;  // ordered unique markers; closure is implicit

    static MaterialLoop circle(const Vec3& center, double radius, int nmarkers,
                               int plane_axis_a = 0, int plane_axis_b = 1);

    std::size_t marker_count() const { return labels.size(); }
    void validate() const {
        if (labels.size() < 8) throw ConstructionError("material loop needs >= 8 markers");
    }
};

std::vector<Vec3> loop_positions(const FlowMap& map, const MaterialLoop& loop);
std::vector<Vec3> loop_velocities(const FlowMap& map, const MaterialLoop& loop);

// T = sum over segments of v . dx along the advected loop, trapezoidal
double circulation(const FlowMap& map, const MaterialLoop& loop);

// J_k(xi) = p_m dx_m/dxi_k at lattice nodes
std::vector<Vec3> lagrangian_current(const FlowMap& map);

// R as plaquette circulations of the edge-averaged 1-form p.dx divided by
// plaquette area: exact discrete curl, conserved to roundoff for free flow
struct Vorticity {
    int dim = 0;
    // one scalar array per plane; 2D: planes = {(0,1)}; 3D: component j lives
    // on the (j+1, j+2) plane so planes[j] is R_j
    std::vector<std::vector<double>> planes;
    std::vector<std::array<int, 3>> shapes;  // plaquette counts per axis

    double max_abs() const;
};

Vorticity vorticity_vector(const FlowMap& map);

// plaquette values averaged back to lattice nodes (periodic lattices)
std::vector<Vec3> vorticity_at_nodes(const FlowMap& map, const Vorticity& w);

// I_n = integral rho^(1-n) (d1 v2 - d2 v1)^n over a 2D grid
double casimir_In(const GridField& rho, const GridField& v, int n);

struct KIntegrals {
    Vec3 first;                 // K_j = integral R_j
    std::array<double, 9> second{};  // K_jk = integral R_j R_k, row-major
};

KIntegrals k_integrals(const FlowMap& map);

// Q = integral v . curl v on a 3D grid
double helicity(const GridField& v);

// label-space form: integral J . curl J over the lattice
double helicity_lagrangian(const FlowMap& map);

enum class DerivativeScheme { FiniteDifference, Spectral };

struct CanonicalFields {
    GridField l;      // deposited momentum density, Eq-style l(x)
    GridField xi;     // inverse map sampled at grid nodes
    GridField pi;     // pi_m = -A^j_m(xi(x)) l_j
    GridField metric; // g_jk = A^m_j A^m_k, row-major dim*dim components
    GridField rho;    // deposited density used by the det-g identity

    // relative L2 residual of l + (grad xi)^T pi
    double reconstruction_residual = 0.0;
    // max |det g * rho^2 / rho0^2 - 1|
    double metric_density_error = 0.0;
};

struct CanonicalOptions {
    DerivativeScheme scheme = DerivativeScheme::FiniteDifference;
    DepositKernel kernel = DepositKernel::CIC;
    InverseOptions inverse;
};

CanonicalFields canonical_fields(const FlowMap& map, const Grid& grid,
                                 const CanonicalOptions& opts = {});

}  // namespace lagflow
