#include "lagflow/plasma.hpp"

#include <cmath>

#include "lagflow/deposition.hpp"
#include "lagflow/spectral.hpp"
#include "lagflow/threading.hpp"

namespace lagflow {

PlasmaState PlasmaState::make(FlowMap electrons, FlowMap ions, PlasmaSpec spec) {
    spec.validate();
    electrons.check_consistent();
    ions.check_consistent();
    if (electrons.lattice.dim != ions.lattice.dim)
        throw ConstructionError("species must share the spatial dimension");
    if (spec.enforce_neutrality) {
        double qe = 0.0, qi = 0.0;
        for (std::size_t i = 0; i < electrons.size(); ++i)
            qe += electrons.rho0[i] * electrons.label_volume(i);
        for (std::size_t i = 0; i < ions.size(); ++i) qi += ions.rho0[i] * ions.label_volume(i);
        const double scale = std::max(std::abs(qe), std::abs(qi));
        if (scale > 0.0 && std::abs(qe - qi) > 1e-9 * scale)
            throw ConstructionError("plasma is not neutral: integral rho_el != integral rho_ion");
    }
    PlasmaState s;
    s.electrons = std::move(electrons);
    s.ions = std::move(ions);
    s.spec = std::move(spec);
    return s;
}

GridField charge_density(const PlasmaState& state) {
    const PlasmaSpec& spec = state.spec;
    std::vector<double> w(state.ions.size());
    for (std::size_t i = 0; i < state.ions.size(); ++i)
        w[i] = spec.e * state.ions.rho0[i] * state.ions.label_volume(i);
    GridField rc = deposit_scalar(state.ions, spec.field_grid, w, DepositKernel::CIC, "charge/volume");
    w.resize(state.electrons.size());
    for (std::size_t i = 0; i < state.electrons.size(); ++i)
        w[i] = -spec.e * state.electrons.rho0[i] * state.electrons.label_volume(i);
    GridField rce = deposit_scalar(state.electrons, spec.field_grid, w, DepositKernel::CIC);
    for (std::size_t n = 0; n < rc.values.size(); ++n) rc.values[n] += rce.values[n];
    return rc;
}

GridField electrostatic_potential(const PlasmaState& state) {
    if (state.spec.solver != PlasmaSpec::Solver::SpectralPIC)
        throw ConfigError("grid potential is a PIC-solver product");
    GridField rc = charge_density(state);
    return poisson_periodic(rc, -1.0);  // Lap Phi = -rho_c
}

namespace {

struct SpeciesForces {
    std::vector<Vec3> electrons;
    std::vector<Vec3> ions;
};

// minus the gradient of the discrete field energy with respect to a particle
// position: the potential gathered through the kernel derivative. Keeping the
// force the exact derivative of the deposited energy is what lets leapfrog
// hold the Hamiltonian at its (omega dt)^2 floor.
Vec3 kernel_gradient_gather(const GridField& phi, const Vec3& x) {
    const Grid& g = phi.grid;
    int base[3] = {0, 0, 0};
    double frac[3] = {0, 0, 0};
    for (int a = 0; a < g.dim; ++a) g.locate(x[a], a, base[a], frac[a]);
    Vec3 grad;
    const int corners = 1 << g.dim;
    for (int corner = 0; corner < corners; ++corner) {
        std::array<int, 3> idx{0, 0, 0};
        double w[3] = {1.0, 1.0, 1.0};
        double dw[3] = {0.0, 0.0, 0.0};
        for (int a = 0; a < g.dim; ++a) {
            const int bit = (corner >> a) & 1;
            idx[static_cast<std::size_t>(a)] = g.wrap(base[a] + bit, a);
            w[a] = bit ? frac[a] : 1.0 - frac[a];
            dw[a] = (bit ? 1.0 : -1.0) / g.spacing(a);
        }
        const double value = phi.at(idx);
        for (int a = 0; a < g.dim; ++a) {
            double term = dw[a];
            for (int b = 0; b < g.dim; ++b)
                if (b != a) term *= w[b];
            grad[a] += value * term;
        }
    }
    return grad;
}

SpeciesForces electrostatic_forces(const PlasmaState& state) {
    const PlasmaSpec& spec = state.spec;
    SpeciesForces out;
    out.electrons.assign(state.electrons.size(), {});
    out.ions.assign(state.ions.size(), {});

    if (spec.solver == PlasmaSpec::Solver::SpectralPIC) {
        GridField phi = electrostatic_potential(state);
        for (std::size_t i = 0; i < state.electrons.size(); ++i)
            out.electrons[i] = spec.e * state.electrons.rho0[i] *
                               kernel_gradient_gather(phi, state.electrons.positions[i]);
        if (spec.ions_mobile)
            for (std::size_t i = 0; i < state.ions.size(); ++i)
                out.ions[i] = -spec.e * state.ions.rho0[i] *
                              kernel_gradient_gather(phi, state.ions.positions[i]);
        return out;
    }

    // softened direct Coulomb over all label pairs of both species
    const std::size_t ne = state.electrons.size(), ni = state.ions.size();
    std::vector<Vec3> pos(ne + ni);
    std::vector<double> q(ne + ni);
    for (std::size_t i = 0; i < ne; ++i) {
        pos[i] = state.electrons.positions[i];
        q[i] = -spec.e * state.electrons.rho0[i] * state.electrons.label_volume(i);
    }
    for (std::size_t i = 0; i < ni; ++i) {
        pos[ne + i] = state.ions.positions[i];
        q[ne + i] = spec.e * state.ions.rho0[i] * state.ions.label_volume(i);
    }
    const double eps = spec.softening;
    auto pair_force = [&](std::size_t a) {
        Vec3 f;
        for (std::size_t b = 0; b < pos.size(); ++b) {
            if (b == a) continue;
            const Vec3 d = pos[a] - pos[b];
            const double inv = 1.0 / std::sqrt(d.norm2() + eps * eps);
            f += (q[a] * q[b] * inv * inv * inv / (4.0 * pi)) * d;
        }
        return f;
    };
    for (std::size_t i = 0; i < ne; ++i)
        out.electrons[i] = pair_force(i) * (1.0 / state.electrons.label_volume(i));
    if (spec.ions_mobile)
        for (std::size_t i = 0; i < ni; ++i)
            out.ions[i] = pair_force(ne + i) * (1.0 / state.ions.label_volume(i));
    return out;
}

double kinetic_energy(const FlowMap& map) {
    double T = 0.0;
    for (std::size_t i = 0; i < map.size(); ++i)
        T += map.momenta[i].norm2() / (2.0 * map.mass * map.rho0[i]) * map.label_volume(i);
    return T;
}

double internal_energy(const FlowMap& map, const DensityPotential& V) {
    if (V.kind == DensityPotential::Kind::Zero) return 0.0;
    double E = 0.0;
    const std::vector<Mat3> A = deformation_matrices(map);
    for (std::size_t i = 0; i < map.size(); ++i) {
        const double det = A[i].det();
        if (!(det > 0.0)) throw FoldingError("folded species map at label " + std::to_string(i));
        E += det * V.value(map.rho0[i] / det) * map.label_volume(i);
    }
    return E;
}

}  // namespace

double coulomb_energy(const PlasmaState& state) {
    const PlasmaSpec& spec = state.spec;
    if (spec.solver == PlasmaSpec::Solver::SpectralPIC) {
        GridField rc = charge_density(state);
        GridField phi = poisson_periodic(rc, -1.0);
        double H = 0.0;
        const Grid& g = spec.field_grid;
        const std::size_t nodes = g.node_count();
        for (std::size_t n = 0; n < nodes; ++n) H += 0.5 * rc.at(n) * phi.at(n) * g.cell_volume();
        return H;
    }
    const std::size_t ne = state.electrons.size(), ni = state.ions.size();
    std::vector<Vec3> pos(ne + ni);
    std::vector<double> q(ne + ni);
    for (std::size_t i = 0; i < ne; ++i) {
        pos[i] = state.electrons.positions[i];
        q[i] = -spec.e * state.electrons.rho0[i] * state.electrons.label_volume(i);
    }
    for (std::size_t i = 0; i < ni; ++i) {
        pos[ne + i] = state.ions.positions[i];
        q[ne + i] = spec.e * state.ions.rho0[i] * state.ions.label_volume(i);
    }
    double H = 0.0;
    for (std::size_t a = 0; a < pos.size(); ++a)
        for (std::size_t b = a + 1; b < pos.size(); ++b)
            H += q[a] * q[b] /
                 (4.0 * pi * std::sqrt((pos[a] - pos[b]).norm2() + spec.softening * spec.softening));
    return H;
}

PlasmaEnergy plasma_hamiltonian(const PlasmaState& state, const DensityPotential& V_el,
                                const DensityPotential& V_ion) {
    PlasmaEnergy E;
    E.kinetic_el = kinetic_energy(state.electrons);
    E.kinetic_ion = kinetic_energy(state.ions);
    E.internal_el = internal_energy(state.electrons, V_el);
    E.internal_ion = internal_energy(state.ions, V_ion);
    E.coulomb = coulomb_energy(state);
    return E;
}

void electrostatic_step(PlasmaState& state, double dt, const DensityPotential& V_el,
                        const DensityPotential& V_ion) {
    auto total_force = [&](const PlasmaState& s) {
        SpeciesForces f = electrostatic_forces(s);
        if (V_el.kind != DensityPotential::Kind::Zero) {
            const std::vector<Vec3> b = barotropic_force(s.electrons, V_el);
            for (std::size_t i = 0; i < f.electrons.size(); ++i) f.electrons[i] += b[i];
        }
        if (state.spec.ions_mobile && V_ion.kind != DensityPotential::Kind::Zero) {
            const std::vector<Vec3> b = barotropic_force(s.ions, V_ion);
            for (std::size_t i = 0; i < f.ions.size(); ++i) f.ions[i] += b[i];
        }
        return f;
    };

    SpeciesForces f = total_force(state);
    auto kick = [&](double h) {
        for (std::size_t i = 0; i < state.electrons.size(); ++i)
            state.electrons.momenta[i] += f.electrons[i] * h;
        if (state.spec.ions_mobile)
            for (std::size_t i = 0; i < state.ions.size(); ++i)
                state.ions.momenta[i] += f.ions[i] * h;
    };
    kick(0.5 * dt);
    for (std::size_t i = 0; i < state.electrons.size(); ++i)
        state.electrons.positions[i] += state.electrons.velocity(i) * dt;
    if (state.spec.ions_mobile)
        for (std::size_t i = 0; i < state.ions.size(); ++i)
            state.ions.positions[i] += state.ions.velocity(i) * dt;
    state.electrons.time += dt;
    state.ions.time += dt;
    f = total_force(state);
    kick(0.5 * dt);
}

Vec3 total_momentum(const PlasmaState& state) {
    Vec3 P;
    for (std::size_t i = 0; i < state.electrons.size(); ++i)
        P += state.electrons.momenta[i] * state.electrons.label_volume(i);
    for (std::size_t i = 0; i < state.ions.size(); ++i)
        P += state.ions.momenta[i] * state.ions.label_volume(i);
    return P;
}

CirculationPair total_circulation(const PlasmaState& state, const MaterialLoop& loop_el,
                                  const MaterialLoop& loop_ion, double coherence_tol) {
    if (loop_el.marker_count() != loop_ion.marker_count())
        throw Error("total circulation needs matched marker counts");
    CirculationPair out;
    out.electron = state.electrons.mass * circulation(state.electrons, loop_el);
    out.ion = state.ions.mass * circulation(state.ions, loop_ion);
    out.total = out.electron + out.ion;

    const std::vector<Vec3> xe = loop_positions(state.electrons, loop_el);
    const std::vector<Vec3> xi = loop_positions(state.ions, loop_ion);
    for (std::size_t i = 0; i < xe.size(); ++i)
        out.max_marker_separation = std::max(out.max_marker_separation, (xe[i] - xi[i]).norm());
    out.coherent = out.max_marker_separation <= coherence_tol;
    return out;
}

}  // namespace lagflow
