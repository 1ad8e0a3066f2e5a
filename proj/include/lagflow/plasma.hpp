#pragma once

#include "lagflow/dynamics.hpp"
#include "lagflow/grid_field.hpp"
#include "lagflow/invariants.hpp"
#include "lagflow/label_space.hpp"

namespace lagflow {

struct PlasmaSpec {
    double e = 1.0;  // charge unit; electrons carry -e, ions +e
    enum class Solver { SpectralPIC, DirectCoulomb };
    Solver solver = Solver::SpectralPIC;
    Grid field_grid;         // deposition/Poisson grid for the PIC route
    double softening = 0.0;  // direct-Coulomb regularization
    bool ions_mobile = true;
    bool enforce_neutrality = true;

    void validate() const {
        if (!(e > 0.0)) throw ConfigError("charge unit must be positive");
        if (solver == Solver::SpectralPIC && field_grid.boundary != Boundary::Periodic)
            throw ConfigError("the PIC solver needs a periodic field grid");
    }
};

// two-species electrostatic plasma; Heaviside-Lorentz units (the 1/4pi
// Coulomb kernel), so the cold-plasma frequency is omega^2 = e^2 rho / m
struct PlasmaState {
    FlowMap electrons;  // mass m
    FlowMap ions;       // mass M
    PlasmaSpec spec;

    static PlasmaState make(FlowMap electrons, FlowMap ions, PlasmaSpec spec);
};

// charge density e (rho_ion - rho_el) deposited on the field grid
GridField charge_density(const PlasmaState& state);

// Phi from the Gauss law, Lap Phi = -rho_c (mean subtracted)
GridField electrostatic_potential(const PlasmaState& state);

// H_Col = (e^2/2) double-integral (rho_el-rho_ion) G (rho_el-rho_ion)
double coulomb_energy(const PlasmaState& state);

struct PlasmaEnergy {
    double kinetic_el = 0.0;
    double kinetic_ion = 0.0;
    double internal_el = 0.0;
    double internal_ion = 0.0;
    double coulomb = 0.0;
    // transverse sector of the full Hamiltonian, structurally zero in the
    // electrostatic limit (A_perp = P_perp = 0)
    double transverse_field = 0.0;
    double magnetic = 0.0;

    double total() const {
        return kinetic_el + kinetic_ion + internal_el + internal_ion + coulomb +
               transverse_field + magnetic;
    }
};

PlasmaEnergy plasma_hamiltonian(const PlasmaState& state, const DensityPotential& V_el,
                                const DensityPotential& V_ion);

// one leapfrog step of both species in lock-step (electrostatic forces only);
// internal V terms may be included per species
void electrostatic_step(PlasmaState& state, double dt,
                        const DensityPotential& V_el = DensityPotential::zero(),
                        const DensityPotential& V_ion = DensityPotential::zero());

Vec3 total_momentum(const PlasmaState& state);

struct CirculationPair {
    double electron = 0.0;  // circulation of v_el weighted by m
    double ion = 0.0;       // circulation of v_ion weighted by M
    double total = 0.0;
    double max_marker_separation = 0.0;
    bool coherent = true;  // false once the two advected contours drift apart
};

// mass-weighted sum of the species circulations on co-located material loops
CirculationPair total_circulation(const PlasmaState& state, const MaterialLoop& loop_el,
                                  const MaterialLoop& loop_ion, double coherence_tol = 0.1);

}  // namespace lagflow
