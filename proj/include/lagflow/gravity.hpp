#pragma once

#include <vector>

#include "lagflow/deposition.hpp"
#include "lagflow/dynamics.hpp"
#include "lagflow/grid_field.hpp"

namespace lagflow {

struct GravitySpec {
    double gamma = 1.0;      // gravitational constant
    double softening = 0.0;  // Plummer length regularizing 1/|x-y|
    enum class Solver { DirectSum, SpectralPoisson };
    Solver solver = Solver::DirectSum;
    enum class Bound { Open, Periodic };
    Bound boundary = Bound::Open;
    Grid field_grid;  // deposition/Poisson grid for the spectral solver

    void validate() const {
        if (!(gamma > 0.0)) throw ConfigError("gravity needs gamma > 0");
        if (softening < 0.0) throw ConfigError("softening must be >= 0");
        if (solver == Solver::SpectralPoisson && boundary != Bound::Periodic)
            throw ConfigError("the spectral solver needs a periodic boundary");
    }
};

// U(x) = -integral rho(y)/|x-y| (gamma not folded in); direct softened sum
// over grid nodes, or spectral inversion of Lap U = 4 pi rho (mean
// subtracted) on periodic grids
GridField gravitational_potential(const GridField& rho, const GravitySpec& spec);

// potential of a particle configuration sampled on a grid
GridField gravitational_potential(const FlowMap& map, const Grid& out, const GravitySpec& spec);

// pdot per label: -gamma rho0 grad U at the particle
std::vector<Vec3> gravity_force(const FlowMap& map, const GravitySpec& spec);

// leapfrog kick-drift-kick with the selected solver
void gravity_step(FlowMap& map, const GravitySpec& spec, double dt);

double gravity_energy(const FlowMap& map, const GravitySpec& spec);

struct VirialReport {
    double kinetic = 0.0;    // T
    double potential = 0.0;  // U (negative for bound states)
    double residual = 0.0;   // 2T + U
    double normalized = 0.0; // |2T + U| / |U|
    double e_static = 0.0;   // T + U
};

VirialReport virial_residual(const FlowMap& map, const GravitySpec& spec);
VirialReport virial_residual(const GridField& rho, const GridField& v, const GravitySpec& spec,
                             double mass);

struct RadialProfile {
    std::vector<double> r;
    std::vector<double> value;

    void validate() const;
};

// v(r) = sqrt((4 pi gamma/m) int_0^r s rho(s) ds), cumulative trapezoid
RadialProfile tornado_profile(const RadialProfile& rho, double gamma, double mass);

// axisymmetric rotating column sampled on a 3D grid
struct StaticConfig {
    GridField rho;
    GridField velocity;
};

StaticConfig embed_tornado(const RadialProfile& rho_r, const Grid& grid, double gamma, double mass);

// periodic vortex-array static configuration: (v.grad)v is an exact gradient
// and the divergence equation closes with rho = background + (m/4 pi gamma) Lap p,
// which is what lets the energy bound saturate on a periodic box
StaticConfig columnar_vortex_array(const Grid& grid, double gamma, double mass,
                                   double velocity_scale = 1.0, double background_factor = 1.2);

struct StaticResiduals {
    double divergence_eq = 0.0;  // div((v.grad)v) + 4 pi (gamma/m) rho
    double continuity = 0.0;     // div(rho v)
    double curl_eq = 0.0;        // curl((v.grad)v)
};

StaticResiduals static_residuals(const GridField& rho, const GridField& v,
                                 const GravitySpec& spec, double mass);

struct BoundRatio {
    double lhs = 0.0;  // -E_static from the velocity form
    double rhs = 0.0;  // pi gamma (int rho f)^2 / int |grad f|^2
    double ratio = 0.0;
    bool rhs_degenerate = false;  // int rho f = 0: the bound holds trivially
};

BoundRatio energy_bound_ratio(const GridField& rho, const GridField& v, const GridField& f,
                              const GravitySpec& spec, double mass);

struct LadyzhenskayaReport {
    double f_norm6 = 0.0;        // ||f||_6
    double grad_bound = 0.0;     // 48^(1/6) ||grad f||_2
    double margin = 0.0;         // grad_bound - f_norm6
    double j_abs = 0.0;          // |int rho f / ||grad f||_2|
    double j_bound = 0.0;        // 48^(1/6) ||rho||_(6/5)
    double j_margin = 0.0;
};

LadyzhenskayaReport ladyzhenskaya_check(const GridField& f, const GridField* rho = nullptr);

// int (rho v^2 + dim * p(rho)); strictly positive for any nontrivial decaying
// barotropic candidate, the no-isolated-static-solution diagnostic
double shafranov_functional(const GridField& rho, const GridField& v, const DensityPotential& V,
                            double mass);

}  // namespace lagflow
