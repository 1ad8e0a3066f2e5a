#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "lagflow/dynamics.hpp"
#include "lagflow/grid_field.hpp"

namespace lagflow {

using cplx = std::complex<double>;

// complex two-component field u_alpha(x); rho = conj(u).u
struct ClebschDoublet {
    Grid grid;
    std::vector<cplx> u1, u2;
    double mass = 1.0;

    ClebschDoublet() = default;
    ClebschDoublet(const Grid& g, double m = 1.0)
        : grid(g), u1(g.node_count(), cplx(0.0)), u2(g.node_count(), cplx(0.0)), mass(m) {}

    std::size_t size() const { return u1.size(); }
    double rho(std::size_t n) const { return std::norm(u1[n]) + std::norm(u2[n]); }
};

struct EulerProjection {
    GridField rho;
    GridField velocity;
    std::vector<std::uint8_t> vacuum_mask;
    double eps = 0.0;
};

// rho = conj(u).u, v = (conj(u) grad u - grad conj(u) u) / (2i conj(u).u);
// the division by rho keeps the angle formula and both Hamiltonian forms
// consistent
EulerProjection project_euler(const ClebschDoublet& d);

struct ClebschAngles {
    GridField rho, phi, psi, alpha;
    std::vector<std::uint8_t> gauge_degenerate;  // alpha at 0 or pi: psi undefined
};

ClebschAngles extract_angles(const ClebschDoublet& d);

// u from (rho, phi, psi, alpha); inverse of extract_angles up to global phase
ClebschDoublet doublet_from_angles(const ClebschAngles& a, double mass = 1.0);

// Hamiltonian in the doublet variables (gradient-squared form)
double c2_hamiltonian(const ClebschDoublet& d, const DensityPotential& V);
// the same energy assembled from the projected Euler fields; the two must
// agree whenever rho stays clear of vacuum
double c2_hamiltonian_euler(const ClebschDoublet& d, const DensityPotential& V);

struct C2StepReport {
    bool vacuum_flagged = false;
    double min_rho = 0.0;
};

// RK4 step of udot = -(i/m) dH/d conj(u); vacuum-regularized denominators
C2StepReport c2_step(ClebschDoublet& d, const DensityPotential& V, double dt);

struct U2Charges {
    double t0 = 0.0;
    double t1 = 0.0, t2 = 0.0, t3 = 0.0;
};

U2Charges u2_charges(const ClebschDoublet& d);

// winding number of the unit doublet as a map into S^3, normalized so the
// degree-one configuration scores 1
double hopf_invariant(const ClebschDoublet& d);

// analytic winding configuration: inverse stereographic projection sampled on
// a per-axis tangent-compactified periodic box, with (p,q) phase winding
ClebschDoublet hopf_doublet(int n, int p = 1, int q = 1, double scale = 1.0);

// helicity of the toroidal Clebsch form, q = 2 pi k * integral d(cos alpha) ^ d(beta)
// over the (r,z) half-plane, for prescribed smooth alpha and beta
double toroidal_clebsch_helicity(const std::function<double(double, double)>& alpha,
                                 const std::function<double(double, double)>& beta, double k,
                                 const Grid& rz_grid);

// 1D winding number of the phase of p + i q (the toy zero-variation functional)
double winding_number_1d(const std::vector<double>& p, const std::vector<double>& q, double dx);

}  // namespace lagflow
