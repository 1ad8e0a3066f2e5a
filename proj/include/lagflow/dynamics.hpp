#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lagflow/grid_field.hpp"
#include "lagflow/label_space.hpp"

namespace lagflow {

// barotropic internal-energy density V(rho); each variant ships its analytic
// derivative so the pressure p = (rho V' - V)/m is exact
struct DensityPotential {
    enum class Kind { Zero, Linear, Quadratic, SoundWave };
    Kind kind = Kind::Zero;
    double c = 0.0;        // Linear: V = c rho
    double a = 0.0;        // Quadratic: V = a rho^2
    double kappa = 0.0;    // SoundWave: V = kappa/(2 rho_ref) (rho - rho_as)^2
    double rho_as = 1.0;
    double rho_ref = 1.0;

    static DensityPotential zero() { return {}; }
    static DensityPotential linear(double c);
    static DensityPotential quadratic(double a);
    static DensityPotential sound_wave(double kappa, double rho_as, double rho_ref);

    double value(double rho) const;
    double deriv(double rho) const;
};

// p = (rho^2/m) d/drho (V/rho) = (rho V'(rho) - V(rho))/m
double pressure_of_density(double rho, const DensityPotential& V, double mass);
GridField pressure_of_density(const GridField& rho, const DensityPotential& V, double mass);

struct ExternalPotential {
    enum class Kind { Zero, Harmonic, LinearRamp, GaussianWell };
    Kind kind = Kind::Zero;
    double omega = 0.0;      // Harmonic: U = omega^2 |x-c|^2 / 2
    Vec3 slope;              // LinearRamp: U = slope . x
    double amplitude = 0.0;  // GaussianWell: U = amplitude exp(-|x-c|^2/(2 sigma^2))
    double sigma = 1.0;
    Vec3 center;

    static ExternalPotential zero() { return {}; }
    static ExternalPotential harmonic(double omega, Vec3 center = {});
    static ExternalPotential linear_ramp(Vec3 slope);
    static ExternalPotential gaussian_well(double amplitude, double sigma, Vec3 center = {});

    double value(const Vec3& x) const;
    Vec3 grad(const Vec3& x) const;
};

struct ForceModel {
    enum class Kind { Free, Barotropic, External, Composite };
    Kind kind = Kind::Free;
    DensityPotential V;
    ExternalPotential U;
    // lambda (grad rho)^2 dispersion term; a nonzero value switches the wider
    // nested-stencil force on (accuracy documented, not gated)
    double dispersion_lambda = 0.0;

    static ForceModel free() { return {}; }
    static ForceModel barotropic(DensityPotential V, double dispersion_lambda = 0.0);
    static ForceModel external(ExternalPotential U);
    static ForceModel composite(DensityPotential V, ExternalPotential U,
                                double dispersion_lambda = 0.0);
};

// exact drift: x += p/(m rho0) dt, momenta unchanged
FlowMap step_free(FlowMap map, double dt);

// F_j(xi) = d/dxi_k [ rho0 (A^-1)_j^k f'(det A) det A ], label-lattice differences
std::vector<Vec3> barotropic_force(const FlowMap& map, const DensityPotential& V,
                                   double dispersion_lambda = 0.0);

// F = -rho0 grad U(x(xi))
std::vector<Vec3> external_force(const FlowMap& map, const ExternalPotential& U);

std::vector<Vec3> model_force(const FlowMap& map, const ForceModel& model);

// H = sum p^2/(2 m rho0) dV_xi + sum det A * V(rho0/det A) dV_xi + sum rho0 U(x) dV_xi
double total_energy(const FlowMap& map, const ForceModel& model);

struct IntegratorSpec {
    enum class Scheme { Leapfrog, RK4 };
    Scheme scheme = Scheme::Leapfrog;
    double dt = 1e-3;
    int steps = 0;
    int save_every = 0;  // 0: keep only the final state

    IntegratorSpec() = default;
    IntegratorSpec(Scheme s, double step, int n, int save = 0)
        : scheme(s), dt(step), steps(n), save_every(save) {
        if (!(dt > 0.0)) throw ConfigError("integrator dt must be positive");
    }
};

struct Observer {
    int cadence = 1;
    std::function<void(const FlowMap&, int step)> fn;
};

struct IntegrationResult {
    FlowMap final;
    std::vector<FlowMap> snapshots;
    int steps_done = 0;
    bool folded = false;
    std::string message;
};

// deterministic time integration; a FoldingError aborts the run and the
// result carries the last valid snapshot
IntegrationResult integrate(FlowMap map, const ForceModel& model, const IntegratorSpec& spec,
                            const std::vector<Observer>& observers = {});

// single leapfrog (kick-drift-kick) step with an arbitrary force callback;
// shared by the gravity and plasma steppers
void leapfrog_step(FlowMap& map, double dt,
                   const std::function<std::vector<Vec3>(const FlowMap&)>& force);

}  // namespace lagflow
