#include "lagflow/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "lagflow/c2.hpp"
#include "lagflow/deposition.hpp"
#include "lagflow/dynamics.hpp"
#include "lagflow/gravity.hpp"
#include "lagflow/invariants.hpp"
#include "lagflow/io.hpp"
#include "lagflow/plasma.hpp"
#include "lagflow/rng.hpp"
#include "lagflow/threading.hpp"

namespace lagflow {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// typos silently corrupt physics runs, so unknown keys are hard errors
void check_keys(const json& obj, const std::string& ctx, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(ctx + ": expected an object");
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) ok = true;
        if (!ok) throw ConfigError(ctx + ": unknown key '" + item.key() + "'");
    }
}

template <typename T>
T need(const json& obj, const std::string& ctx, const char* key) {
    if (!obj.contains(key)) throw ConfigError(ctx + ": missing required key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(ctx + ": bad value for '" + key + "'");
    }
}

template <typename T>
T maybe(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    return obj.at(key).get<T>();
}

std::array<double, 3> vec3_of(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.size() > 3 || j.empty()) throw ConfigError(ctx + ": expected 1-3 numbers");
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < j.size(); ++i) out[i] = j[i].get<double>();
    return out;
}

std::array<int, 3> shape_of(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.size() > 3 || j.empty()) throw ConfigError(ctx + ": expected 1-3 integers");
    std::array<int, 3> out{1, 1, 1};
    for (std::size_t i = 0; i < j.size(); ++i) out[i] = j[i].get<int>();
    return out;
}

Grid parse_geometry(const json& j, const std::string& ctx) {
    check_keys(j, ctx, {"dim", "lo", "hi", "shape", "boundary"});
    const int dim = need<int>(j, ctx, "dim");
    const auto lo = vec3_of(need<json>(j, ctx, "lo"), ctx + ".lo");
    const auto hi = vec3_of(need<json>(j, ctx, "hi"), ctx + ".hi");
    const auto shape = shape_of(need<json>(j, ctx, "shape"), ctx + ".shape");
    const std::string b = need<std::string>(j, ctx, "boundary");
    Boundary bnd;
    if (b == "periodic")
        bnd = Boundary::Periodic;
    else if (b == "fixed-wall" || b == "clamped" || b == "bounded")
        bnd = Boundary::Bounded;
    else
        throw ConfigError(ctx + ".boundary: unknown value '" + b + "'");
    try {
        return Grid(dim, lo, hi, shape, bnd);
    } catch (const Error& e) {
        throw ConfigError(ctx + ": " + e.what());
    }
}

DensityPotential parse_density_potential(const json& j, const std::string& ctx) {
    check_keys(j, ctx, {"kind", "c", "a", "kappa", "rho_as", "rho_ref"});
    const std::string kind = need<std::string>(j, ctx, "kind");
    if (kind == "zero") return DensityPotential::zero();
    if (kind == "linear") return DensityPotential::linear(need<double>(j, ctx, "c"));
    if (kind == "quadratic") return DensityPotential::quadratic(need<double>(j, ctx, "a"));
    if (kind == "sound-wave")
        return DensityPotential::sound_wave(need<double>(j, ctx, "kappa"),
                                            need<double>(j, ctx, "rho_as"),
                                            need<double>(j, ctx, "rho_ref"));
    throw ConfigError(ctx + ".kind: unknown potential '" + kind + "'");
}

ExternalPotential parse_external_potential(const json& j, const std::string& ctx) {
    check_keys(j, ctx, {"kind", "omega", "slope", "amplitude", "sigma", "center"});
    const std::string kind = need<std::string>(j, ctx, "kind");
    if (kind == "zero") return ExternalPotential::zero();
    Vec3 center;
    if (j.contains("center")) {
        const auto c = vec3_of(j.at("center"), ctx + ".center");
        center = Vec3(c[0], c[1], c[2]);
    }
    if (kind == "harmonic") return ExternalPotential::harmonic(need<double>(j, ctx, "omega"), center);
    if (kind == "linear-ramp") {
        const auto s = vec3_of(need<json>(j, ctx, "slope"), ctx + ".slope");
        return ExternalPotential::linear_ramp(Vec3(s[0], s[1], s[2]));
    }
    if (kind == "gaussian-well")
        return ExternalPotential::gaussian_well(need<double>(j, ctx, "amplitude"),
                                                need<double>(j, ctx, "sigma"), center);
    throw ConfigError(ctx + ".kind: unknown potential '" + kind + "'");
}

ForceModel parse_force(const json& j, const std::string& ctx) {
    check_keys(j, ctx, {"kind", "V", "U", "dispersion_lambda"});
    const std::string kind = need<std::string>(j, ctx, "kind");
    const double lambda = maybe<double>(j, "dispersion_lambda", 0.0);
    if (kind == "free") return ForceModel::free();
    if (kind == "barotropic")
        return ForceModel::barotropic(parse_density_potential(need<json>(j, ctx, "V"), ctx + ".V"),
                                      lambda);
    if (kind == "external")
        return ForceModel::external(parse_external_potential(need<json>(j, ctx, "U"), ctx + ".U"));
    if (kind == "composite")
        return ForceModel::composite(parse_density_potential(need<json>(j, ctx, "V"), ctx + ".V"),
                                     parse_external_potential(need<json>(j, ctx, "U"), ctx + ".U"),
                                     lambda);
    throw ConfigError(ctx + ".kind: unknown force model '" + kind + "'");
}

IntegratorSpec parse_integrator(const json& j, const std::string& ctx) {
    check_keys(j, ctx, {"scheme", "dt", "steps", "save_every"});
    const std::string scheme = maybe<std::string>(j, "scheme", "leapfrog");
    IntegratorSpec::Scheme s;
    if (scheme == "leapfrog")
        s = IntegratorSpec::Scheme::Leapfrog;
    else if (scheme == "rk4")
        s = IntegratorSpec::Scheme::RK4;
    else
        throw ConfigError(ctx + ".scheme: unknown scheme '" + scheme + "'");
    const double dt = need<double>(j, ctx, "dt");
    const int steps = need<int>(j, ctx, "steps");
    if (!(dt > 0.0)) throw ConfigError(ctx + ".dt must be positive");
    if (steps < 0) throw ConfigError(ctx + ".steps must be >= 0");
    return IntegratorSpec(s, dt, steps, maybe<int>(j, "save_every", 0));
}

// initial-condition tag catalog
ScalarFn parse_rho0(const json& j, const std::string& ctx) {
    check_keys(j, ctx, {"kind", "value", "amplitude", "sigma", "center", "floor"});
    const std::string kind = maybe<std::string>(j, "kind", "uniform");
    if (kind == "uniform") {
        const double v = maybe<double>(j, "value", 1.0);
        if (!(v > 0.0)) throw ConfigError(ctx + ": rho0 must be positive");
        return [v](const Vec3&) { return v; };
    }
    if (kind == "gaussian-bump") {
        const double amp = need<double>(j, ctx, "amplitude");
        const double sigma = need<double>(j, ctx, "sigma");
        const double floor = maybe<double>(j, "floor", 1e-9);
        Vec3 center;
        if (j.contains("center")) {
            const auto c = vec3_of(j.at("center"), ctx + ".center");
            center = Vec3(c[0], c[1], c[2]);
        }
        return [=](const Vec3& xi) {
            return floor + amp * std::exp(-(xi - center).norm2() / (2.0 * sigma * sigma));
        };
    }
    throw ConfigError(ctx + ".kind: unknown rho0 '" + kind + "'");
}

VectorFn parse_velocity(const json& j, const std::string& ctx, const Grid& lattice) {
    check_keys(j, ctx, {"kind", "value", "amplitude", "mode", "axis", "component", "omega", "rate", "center"});
    const std::string kind = maybe<std::string>(j, "kind", "zero");
    if (kind == "zero") return [](const Vec3&) { return Vec3(); };
    if (kind == "uniform") {
        const auto v = vec3_of(need<json>(j, ctx, "value"), ctx + ".value");
        return [v](const Vec3&) { return Vec3(v[0], v[1], v[2]); };
    }
    if (kind == "expansion") {
        const double rate = maybe<double>(j, "rate", 1.0);
        return [rate](const Vec3& xi) { return rate * xi; };
    }
    if (kind == "sine") {
        const double amp = need<double>(j, ctx, "amplitude");
        const int mode = maybe<int>(j, "mode", 1);
        const int axis = maybe<int>(j, "axis", 0);
        const int comp = maybe<int>(j, "component", 0);
        const double k = 2.0 * pi * mode / lattice.length(axis);
        const double lo = lattice.lo[static_cast<std::size_t>(axis)];
        return [=](const Vec3& xi) {
            Vec3 v;
            v[comp] = amp * std::sin(k * (xi[axis] - lo));
            return v;
        };
    }
    if (kind == "rigid-rotation") {
        const double omega = need<double>(j, ctx, "omega");
        Vec3 center;
        if (j.contains("center")) {
            const auto c = vec3_of(j.at("center"), ctx + ".center");
            center = Vec3(c[0], c[1], c[2]);
        }
        return [=](const Vec3& xi) {
            const Vec3 d = xi - center;
            return Vec3(-omega * d[1], omega * d[0], 0.0);
        };
    }
    throw ConfigError(ctx + ".kind: unknown velocity '" + kind + "'");
}

struct GateTable {
    std::map<std::string, double> metrics;
    std::vector<std::string> lines;
    bool failed = false;

    void apply(const json& gates, const std::string& ctx) {
        if (gates.is_null()) return;
        if (!gates.is_object()) throw ConfigError(ctx + ": gates must be an object");
        for (const auto& item : gates.items()) {
            const auto it = metrics.find(item.key());
            if (it == metrics.end())
                throw ConfigError(ctx + ": gate on unknown metric '" + item.key() + "'");
            const double limit = item.value().get<double>();
            const bool ok = std::abs(it->second) <= limit;
            std::ostringstream line;
            line << "gate " << item.key() << " value " << format_double(it->second) << " limit "
                 << format_double(limit) << " " << (ok ? "PASS" : "FAIL");
            lines.push_back(line.str());
            if (!ok) failed = true;
        }
    }
};

// ---------------------------------------------------------------- fluid ----

int run_fluid(const json& j, const fs::path& out, GateTable& gates) {
    check_keys(j, "scenario", {"name", "module", "seed", "geometry", "initial", "force",
                               "integrator", "diagnostics", "gates", "snapshots"});
    const Grid lattice = parse_geometry(need<json>(j, "scenario", "geometry"), "geometry");
    const json init = need<json>(j, "scenario", "initial");
    check_keys(init, "initial", {"rho0", "velocity", "mass"});
    const double mass = maybe<double>(init, "mass", 1.0);
    const ScalarFn rho0 = parse_rho0(maybe<json>(init, "rho0", json::object()), "initial.rho0");
    const VectorFn v0 =
        parse_velocity(maybe<json>(init, "velocity", json::object()), "initial.velocity", lattice);
    const ForceModel model = parse_force(need<json>(j, "scenario", "force"), "force");
    const IntegratorSpec spec = parse_integrator(need<json>(j, "scenario", "integrator"), "integrator");

    const json diag = maybe<json>(j, "diagnostics", json::object());
    check_keys(diag, "diagnostics", {"cadence", "loop"});
    const int cadence = maybe<int>(diag, "cadence", std::max(1, spec.steps / 64));
    std::optional<MaterialLoop> loop;
    if (diag.contains("loop")) {
        const json lj = diag.at("loop");
        check_keys(lj, "diagnostics.loop", {"center", "radius", "markers"});
        const auto c = vec3_of(need<json>(lj, "diagnostics.loop", "center"), "loop.center");
        loop = MaterialLoop::circle(Vec3(c[0], c[1], c[2]), need<double>(lj, "diagnostics.loop", "radius"),
                                    maybe<int>(lj, "markers", 64));
    }

    FlowMap map = build_lattice(lattice.dim, lattice.lo, lattice.hi, lattice.n, lattice.boundary,
                                rho0, [](const Vec3& xi) { return xi; }, v0, mass);

    std::vector<std::string> cols = {"time", "energy", "momentum_x", "momentum_y", "momentum_z"};
    if (loop) cols.push_back("circulation");
    DiagnosticsLog log(cols);

    double energy0 = 0.0, circ0 = 0.0;
    bool first = true;
    double max_energy_drift = 0.0, max_circ_drift = 0.0;

    Observer ob;
    ob.cadence = std::max(1, cadence);
    ob.fn = [&](const FlowMap& m, int) {
        std::vector<double> row;
        const double H = total_energy(m, model);
        Vec3 P;
        for (std::size_t i = 0; i < m.size(); ++i) P += m.momenta[i] * m.label_volume(i);
        row = {m.time, H, P[0], P[1], P[2]};
        double T = 0.0;
        if (loop) {
            T = circulation(m, *loop);
            row.push_back(T);
        }
        if (first) {
            energy0 = H;
            circ0 = T;
            first = false;
        } else {
            if (energy0 != 0.0) max_energy_drift = std::max(max_energy_drift, std::abs(H / energy0 - 1.0));
            if (loop && circ0 != 0.0) max_circ_drift = std::max(max_circ_drift, std::abs(T / circ0 - 1.0));
        }
        log.append(row);
    };

    IntegrationResult res = integrate(std::move(map), model, spec, {ob});
    log.write_csv((out / "diagnostics.csv").string());
    if (maybe<bool>(j, "snapshots", false)) {
        write_flowmap_csv(res.final, (out / "final.csv").string());
        write_flowmap_binary(res.final, (out / "final.bin").string());
    }

    gates.metrics["energy_drift"] = max_energy_drift;
    gates.metrics["circulation_drift"] = max_circ_drift;
    gates.metrics["steps_done"] = res.steps_done;
    if (res.folded) return 3;
    return 0;
}

// ------------------------------------------------------------------- c2 ----

int run_c2(const json& j, const fs::path& out, GateTable& gates) {
    check_keys(j, "scenario", {"name", "module", "seed", "geometry", "initial", "V", "dt", "steps",
                               "cadence", "gates"});
    const Grid grid = parse_geometry(need<json>(j, "scenario", "geometry"), "geometry");
    const json init = need<json>(j, "scenario", "initial");
    check_keys(init, "initial", {"kind", "amplitude", "mode", "mass", "winding_p", "winding_q", "scale", "resolution"});
    const std::string kind = need<std::string>(init, "initial", "kind");
    const double mass = maybe<double>(init, "mass", 1.0);

    ClebschDoublet d(grid, mass);
    if (kind == "uniform") {
        const double amp = maybe<double>(init, "amplitude", 1.0);
        for (std::size_t n = 0; n < d.size(); ++n) d.u1[n] = amp;
    } else if (kind == "plane-wave") {
        const double amp = maybe<double>(init, "amplitude", 1.0);
        const int mode = maybe<int>(init, "mode", 1);
        const double k = 2.0 * pi * mode / grid.length(0);
        for (std::size_t n = 0; n < d.size(); ++n) {
            const Vec3 x = grid.coord(n);
            d.u1[n] = amp * std::polar(1.0, k * x[0]);
        }
    } else if (kind == "hopf") {
        d = hopf_doublet(maybe<int>(init, "resolution", grid.n[0]), maybe<int>(init, "winding_p", 1),
                         maybe<int>(init, "winding_q", 1), maybe<double>(init, "scale", 1.0));
        d.mass = mass;
    } else {
        throw ConfigError("initial.kind: unknown doublet '" + kind + "'");
    }

    const DensityPotential V = parse_density_potential(need<json>(j, "scenario", "V"), "V");
    const double dt = need<double>(j, "scenario", "dt");
    const int steps = need<int>(j, "scenario", "steps");
    const int cadence = maybe<int>(j, "cadence", std::max(1, steps / 64));

    DiagnosticsLog log({"time", "H_doublet", "H_euler", "t0", "t1", "t2", "t3"});
    double t0_init = 0.0;
    double max_charge_drift = 0.0, max_equiv_gap = 0.0;
    for (int s = 0; s <= steps; ++s) {
        if (s % cadence == 0) {
            const U2Charges c = u2_charges(d);
            const double H1 = c2_hamiltonian(d, V);
            const double H2 = c2_hamiltonian_euler(d, V);
            log.append({s * dt, H1, H2, c.t0, c.t1, c.t2, c.t3});
            if (s == 0)
                t0_init = c.t0;
            else if (t0_init != 0.0)
                max_charge_drift = std::max(max_charge_drift, std::abs(c.t0 / t0_init - 1.0));
            if (H1 != 0.0) max_equiv_gap = std::max(max_equiv_gap, std::abs((H1 - H2) / H1));
        }
        if (s < steps) c2_step(d, V, dt);
    }
    log.write_csv((out / "diagnostics.csv").string());
    gates.metrics["charge_drift"] = max_charge_drift;
    gates.metrics["hamiltonian_gap"] = max_equiv_gap;
    if (grid.dim == 3 && grid.boundary == Boundary::Periodic)
        gates.metrics["hopf"] = hopf_invariant(d);
    return 0;
}

// -------------------------------------------------------------- gravity ----

int run_gravity(const json& j, const fs::path& out, GateTable& gates) {
    check_keys(j, "scenario", {"name", "module", "seed", "clumps", "gravity", "dt", "steps",
                               "cadence", "gates"});
    const json gj = need<json>(j, "scenario", "gravity");
    check_keys(gj, "gravity", {"gamma", "softening"});
    GravitySpec spec;
    spec.gamma = maybe<double>(gj, "gamma", 1.0);
    spec.softening = maybe<double>(gj, "softening", 1e-3);
    spec.validate();

    const json cj = need<json>(j, "scenario", "clumps");
    check_keys(cj, "clumps", {"separation", "mass", "spread", "orbit"});
    const double d = need<double>(cj, "clumps", "separation");
    const double mc = maybe<double>(cj, "mass", 1.0);
    const double spread = maybe<double>(cj, "spread", 1e-6);
    const bool orbit = maybe<bool>(cj, "orbit", true);

    // two point bodies of mass mc each on a circular mutual orbit; the 1D
    // two-node lattice keeps one particle per body with node volume 1/2
    (void)spread;
    const double omega = std::sqrt(2.0 * spec.gamma * mc / (d * d * d));
    const double vmag = orbit ? omega * d / 2.0 : 0.0;
    FlowMap map = build_lattice(
        1, {0, 0, 0}, {1, 1, 1}, {2, 1, 1}, Boundary::Bounded,
        [&](const Vec3&) { return 2.0 * mc; },
        [&](const Vec3& xi) {
            const double side = xi[0] < 0.5 ? -1.0 : 1.0;
            return Vec3(side * d / 2.0, 0.0, 0.0);
        },
        [&](const Vec3& xi) {
            const double side = xi[0] < 0.5 ? -1.0 : 1.0;
            return Vec3(0.0, side * vmag, 0.0);
        },
        1.0);

    const double dt = need<double>(j, "scenario", "dt");
    const int steps = need<int>(j, "scenario", "steps");
    const int cadence = maybe<int>(j, "cadence", std::max(1, steps / 128));

    DiagnosticsLog log({"time", "energy", "virial_normalized", "separation_x", "separation_y"});
    double e0 = 0.0;
    double max_drift = 0.0;
    for (int s = 0; s <= steps; ++s) {
        if (s % cadence == 0) {
            const double E = gravity_energy(map, spec);
            const VirialReport vr = virial_residual(map, spec);
            const Vec3 sep = map.positions[1] - map.positions[0];
            log.append({map.time, E, vr.normalized, sep[0], sep[1]});
            if (s == 0)
                e0 = E;
            else if (e0 != 0.0)
                max_drift = std::max(max_drift, std::abs(E / e0 - 1.0));
        }
        if (s < steps) gravity_step(map, spec, dt);
    }
    log.write_csv((out / "diagnostics.csv").string());
    gates.metrics["energy_drift"] = max_drift;
    gates.metrics["virial_normalized"] = virial_residual(map, spec).normalized;
    return 0;
}

// --------------------------------------------------------------- plasma ----

int run_plasma(const json& j, const fs::path& out, GateTable& gates) {
    check_keys(j, "scenario", {"name", "module", "seed", "geometry", "species", "field_grid",
                               "charge", "dt", "steps", "cadence", "gates", "loop"});
    const Grid lattice = parse_geometry(need<json>(j, "scenario", "geometry"), "geometry");
    const json sj = need<json>(j, "scenario", "species");
    check_keys(sj, "species", {"electron_mass", "ion_mass", "density", "displacement", "mode",
                               "ions_mobile", "rotation_omega"});
    const double me = maybe<double>(sj, "electron_mass", 1.0);
    const double mi = maybe<double>(sj, "ion_mass", 1836.0);
    const double density = maybe<double>(sj, "density", 1.0);
    const double displacement = maybe<double>(sj, "displacement", 0.0);
    const int mode = maybe<int>(sj, "mode", 1);
    const double rot = maybe<double>(sj, "rotation_omega", 0.0);

    PlasmaSpec spec;
    spec.e = maybe<double>(j, "charge", 1.0);
    spec.ions_mobile = maybe<bool>(sj, "ions_mobile", true);
    spec.field_grid = j.contains("field_grid")
                          ? parse_geometry(j.at("field_grid"), "field_grid")
                          : lattice;

    const double k = 2.0 * pi * mode / lattice.length(0);
    const double lo0 = lattice.lo[0];
    auto rho_fn = [density](const Vec3&) { return density; };
    auto disp_fn = [=](const Vec3& xi) {
        Vec3 x = xi;
        x[0] += displacement * std::sin(k * (xi[0] - lo0));
        return x;
    };
    auto rot_fn = [=](const Vec3& xi) {
        return rot != 0.0 ? Vec3(-rot * xi[1], rot * xi[0], 0.0) : Vec3();
    };

    FlowMap electrons = build_lattice(lattice.dim, lattice.lo, lattice.hi, lattice.n,
                                      lattice.boundary, rho_fn, disp_fn, rot_fn, me);
    FlowMap ions = build_lattice(lattice.dim, lattice.lo, lattice.hi, lattice.n, lattice.boundary,
                                 rho_fn, [](const Vec3& xi) { return xi; }, rot_fn, mi);
    PlasmaState state = PlasmaState::make(std::move(electrons), std::move(ions), spec);

    std::optional<MaterialLoop> loop;
    if (j.contains("loop")) {
        const json lj = j.at("loop");
        check_keys(lj, "loop", {"center", "radius", "markers"});
        const auto c = vec3_of(need<json>(lj, "loop", "center"), "loop.center");
        loop = MaterialLoop::circle(Vec3(c[0], c[1], c[2]), need<double>(lj, "loop", "radius"),
                                    maybe<int>(lj, "markers", 64));
    }

    const double dt = need<double>(j, "scenario", "dt");
    const int steps = need<int>(j, "scenario", "steps");
    const int cadence = maybe<int>(j, "cadence", std::max(1, steps / 128));

    std::vector<std::string> cols = {"time", "hamiltonian", "momentum_x", "mean_displacement"};
    if (loop) cols.push_back("total_circulation");
    DiagnosticsLog log(cols);

    double h0 = 0.0, circ0 = 0.0;
    double max_h_drift = 0.0, max_c_drift = 0.0;
    for (int s = 0; s <= steps; ++s) {
        if (s % cadence == 0) {
            const PlasmaEnergy E = plasma_hamiltonian(state, DensityPotential::zero(), DensityPotential::zero());
            double mean_disp = 0.0;
            for (std::size_t i = 0; i < state.electrons.size(); ++i) {
                const Vec3 xi = state.electrons.lattice.coord(i);
                double dd = state.electrons.positions[i][0] - xi[0];
                const double L = state.electrons.lattice.length(0);
                dd -= L * std::round(dd / L);
                mean_disp += std::abs(dd);
            }
            mean_disp /= static_cast<double>(state.electrons.size());
            std::vector<double> row = {state.electrons.time, E.total(), total_momentum(state)[0], mean_disp};
            if (loop) {
                const CirculationPair cp = total_circulation(state, *loop, *loop);
                row.push_back(cp.total);
                if (s == 0)
                    circ0 = cp.total;
                else if (circ0 != 0.0)
                    max_c_drift = std::max(max_c_drift, std::abs(cp.total / circ0 - 1.0));
            }
            log.append(row);
            if (s == 0)
                h0 = E.total();
            else if (h0 != 0.0)
                max_h_drift = std::max(max_h_drift, std::abs(E.total() / h0 - 1.0));
        }
        if (s < steps) electrostatic_step(state, dt);
    }
    log.write_csv((out / "diagnostics.csv").string());
    gates.metrics["hamiltonian_drift"] = max_h_drift;
    gates.metrics["circulation_drift"] = max_c_drift;
    return 0;
}

// --------------------------------------------------------- static-solve ----

int run_static_solve(const json& j, const fs::path& out, GateTable& gates) {
    check_keys(j, "scenario", {"name", "module", "seed", "profile", "gamma", "mass", "gates"});
    const json pj = need<json>(j, "scenario", "profile");
    check_keys(pj, "profile", {"kind", "rho_c", "sigma", "r_max", "nodes", "path"});
    const std::string kind = need<std::string>(pj, "profile", "kind");
    const double gamma = maybe<double>(j, "gamma", 1.0);
    const double mass = maybe<double>(j, "mass", 1.0);

    RadialProfile rho;
    if (kind == "csv") {
        rho = read_profile_csv(need<std::string>(pj, "profile", "path"));
    } else {
        const double r_max = need<double>(pj, "profile", "r_max");
        const int nodes = maybe<int>(pj, "nodes", 1024);
        if (nodes < 2) throw ConfigError("profile.nodes must be >= 2");
        const double rc = maybe<double>(pj, "rho_c", 1.0);
        rho.r.resize(static_cast<std::size_t>(nodes));
        rho.value.resize(static_cast<std::size_t>(nodes));
        for (int i = 0; i < nodes; ++i) {
            const double r = r_max * i / (nodes - 1);
            rho.r[static_cast<std::size_t>(i)] = r;
            if (kind == "constant")
                rho.value[static_cast<std::size_t>(i)] = rc;
            else if (kind == "gaussian") {
                const double sigma = need<double>(pj, "profile", "sigma");
                rho.value[static_cast<std::size_t>(i)] = rc * std::exp(-r * r / (2.0 * sigma * sigma));
            } else
                throw ConfigError("profile.kind: unknown profile '" + kind + "'");
        }
    }
    const RadialProfile v = tornado_profile(rho, gamma, mass);
    write_profile_csv(rho, "r", "rho", (out / "rho_profile.csv").string());
    write_profile_csv(v, "r", "v", (out / "v_profile.csv").string());
    gates.metrics["v_at_rmax"] = v.value.back();
    return 0;
}

// ---------------------------------------------------------- bound-check ----

int run_bound_check(const json& j, const fs::path& out, GateTable& gates, Rng& rng) {
    check_keys(j, "scenario", {"name", "module", "seed", "resolution", "box", "gamma", "mass",
                               "trials", "modes", "gates"});
    const int n = maybe<int>(j, "resolution", 24);
    const double L = maybe<double>(j, "box", 2.0 * pi);
    const double gamma = maybe<double>(j, "gamma", 1.0);
    const double mass = maybe<double>(j, "mass", 1.0);
    const int trials = maybe<int>(j, "trials", 32);
    const int modes = maybe<int>(j, "modes", 2);

    Grid grid = grid3d(0.0, L, n, Boundary::Periodic);
    GravitySpec spec;
    spec.gamma = gamma;
    spec.solver = GravitySpec::Solver::SpectralPoisson;
    spec.boundary = GravitySpec::Bound::Periodic;
    spec.field_grid = grid;
    const StaticConfig cfg = columnar_vortex_array(grid, gamma, mass);

    DiagnosticsLog log({"trial", "ratio", "lady_margin", "j_margin"});
    double min_ratio = std::numeric_limits<double>::infinity();
    double min_margin = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        // fixed-seed random smooth Fourier bump
        GridField f(grid, 1);
        std::vector<double> amp, phx, phy, phz;
        for (int mx = 1; mx <= modes; ++mx) {
            amp.push_back(rng.gauss());
            phx.push_back(rng.uniform(0.0, 2.0 * pi));
            phy.push_back(rng.uniform(0.0, 2.0 * pi));
            phz.push_back(rng.uniform(0.0, 2.0 * pi));
        }
        const std::size_t nodes = grid.node_count();
        for (std::size_t node = 0; node < nodes; ++node) {
            const Vec3 x = grid.coord(node);
            double val = 0.0;
            for (int m = 1; m <= modes; ++m) {
                const double kk = 2.0 * pi * m / L;
                val += amp[static_cast<std::size_t>(m - 1)] *
                       std::sin(kk * x[0] + phx[static_cast<std::size_t>(m - 1)]) *
                       std::sin(kk * x[1] + phy[static_cast<std::size_t>(m - 1)]) *
                       std::sin(kk * x[2] + phz[static_cast<std::size_t>(m - 1)]);
            }
            f.at(node) = val;
        }
        const BoundRatio br = energy_bound_ratio(cfg.rho, cfg.velocity, f, spec, mass);
        const LadyzhenskayaReport lr = ladyzhenskaya_check(f, &cfg.rho);
        const double ratio = br.rhs_degenerate ? std::numeric_limits<double>::infinity() : br.ratio;
        log.append({static_cast<double>(t), ratio, lr.margin, lr.j_margin});
        min_ratio = std::min(min_ratio, ratio);
        min_margin = std::min(min_margin, std::min(lr.margin, lr.j_margin));
    }
    // saturation candidate f = U
    GridField U = gravitational_potential(cfg.rho, spec);
    const BoundRatio sat = energy_bound_ratio(cfg.rho, cfg.velocity, U, spec, mass);
    log.append({-1.0, sat.ratio, 0.0, 0.0});
    log.write_csv((out / "bound_sweep.csv").string());

    gates.metrics["min_ratio_minus_one"] = std::min(0.0, min_ratio - 1.0);
    gates.metrics["min_margin"] = std::min(0.0, min_margin);
    gates.metrics["saturation_gap"] = sat.ratio - 1.0;
    return 0;
}

}  // namespace

RunResult run_scenario(const std::string& scenario_path, const RunOptions& opts) {
    RunResult result;
    json j;
    try {
        std::ifstream is(scenario_path);
        if (!is) throw ConfigError("cannot open scenario: " + scenario_path);
        try {
            j = json::parse(is);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("scenario parse error: ") + e.what());
        }
        if (!j.is_object()) throw ConfigError("scenario root must be an object");
        const std::string module = need<std::string>(j, "scenario", "module");
        const std::string name = maybe<std::string>(j, "name", "run");

        set_threads(opts.threads);
        fs::path out(opts.out_dir);
        fs::create_directories(out);

        std::uint64_t seed = 0;
        const bool needs_seed = module == "bound-check";
        if (opts.seed_override) {
            seed = *opts.seed_override;
        } else if (j.contains("seed")) {
            seed = j.at("seed").get<std::uint64_t>();
        } else if (needs_seed) {
            throw ConfigError("scenario uses randomness: a seed is mandatory");
        }
        Rng rng(seed);

        GateTable gates;
        int code = 0;
        if (module == "fluid")
            code = run_fluid(j, out, gates);
        else if (module == "c2")
            code = run_c2(j, out, gates);
        else if (module == "gravity")
            code = run_gravity(j, out, gates);
        else if (module == "plasma")
            code = run_plasma(j, out, gates);
        else if (module == "static-solve")
            code = run_static_solve(j, out, gates);
        else if (module == "bound-check")
            code = run_bound_check(j, out, gates, rng);
        else
            throw ConfigError("module: unknown module '" + module + "'");

        gates.apply(maybe<json>(j, "gates", json()), "gates");

        std::ostringstream summary;
        summary << "scenario " << name << " module " << module << " seed " << seed << "\n";
        for (const auto& [k, v] : gates.metrics) summary << k << " " << format_double(v) << "\n";
        for (const auto& line : gates.lines) summary << line << "\n";
        const bool gate_failed = gates.failed;
        summary << "status " << (code != 0 ? "numerical-failure" : gate_failed ? "gate-failure" : "ok")
                << "\n";
        result.summary = summary.str();
        {
            std::ofstream os(out / "summary.txt");
            os << result.summary;
        }
        result.exit_code = code != 0 ? code : (gate_failed ? 1 : 0);
        return result;
    } catch (const ConfigError& e) {
        result.exit_code = 2;
        result.summary = std::string("config error: ") + e.what() + "\n";
        return result;
    } catch (const FoldingError& e) {
        result.exit_code = 3;
        result.summary = std::string("numerical failure: ") + e.what() + "\n";
        return result;
    } catch (const InverseError& e) {
        result.exit_code = 3;
        result.summary = std::string("numerical failure: ") + e.what() + "\n";
        return result;
    } catch (const Error& e) {
        result.exit_code = 3;
        result.summary = std::string("error: ") + e.what() + "\n";
        return result;
    }
}

}  // namespace lagflow
