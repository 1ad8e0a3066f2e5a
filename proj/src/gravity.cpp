#include "lagflow/gravity.hpp"

#include <cmath>

#include "lagflow/spectral.hpp"
#include "lagflow/threading.hpp"

namespace lagflow {

namespace {

double softened_inv(double r2, double eps) { return 1.0 / std::sqrt(r2 + eps * eps); }

}  // namespace

GridField gravitational_potential(const GridField& rho, const GravitySpec& spec) {
    spec.validate();
    const Grid& g = rho.grid;
    if (spec.solver == GravitySpec::Solver::SpectralPoisson) {
        if (g.boundary != Boundary::Periodic)
            throw ConfigError("spectral potential needs a periodic grid");
        GridField centered = rho;
        double mean = 0.0;
        const std::size_t nodes = g.node_count();
        for (std::size_t i = 0; i < nodes; ++i) mean += rho.at(i);
        mean /= static_cast<double>(nodes);
        for (std::size_t i = 0; i < nodes; ++i) centered.at(i) -= mean;
        return poisson_periodic(centered, 4.0 * pi);
    }
    // direct softened sum over node masses
    const std::size_t nodes = g.node_count();
    GridField U(g, 1, "potential");
    std::vector<Vec3> pos(nodes);
    std::vector<double> mass(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        pos[i] = g.coord(i);
        mass[i] = rho.at(i) * (g.boundary == Boundary::Periodic ? g.cell_volume()
                                                                : g.node_volume(g.unflat(i)));
    }
    parallel_chunks(nodes, [&](int, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < nodes; ++j) {
                if (j == i) continue;
                acc -= mass[j] * softened_inv((pos[i] - pos[j]).norm2(), spec.softening);
            }
            U.at(i) = acc;
        }
    });
    return U;
}

GridField gravitational_potential(const FlowMap& map, const Grid& out, const GravitySpec& spec) {
    spec.validate();
    if (spec.solver == GravitySpec::Solver::SpectralPoisson) {
        GridField rho = deposit_density(map, out);
        return gravitational_potential(rho, spec);
    }
    GridField U(out, 1, "potential");
    const std::size_t nodes = out.node_count();
    parallel_chunks(nodes, [&](int, std::size_t b, std::size_t e) {
        for (std::size_t n = b; n < e; ++n) {
            const Vec3 x = out.coord(n);
            double acc = 0.0;
            for (std::size_t j = 0; j < map.size(); ++j) {
                const double mj = map.rho0[j] * map.label_volume(j);
                acc -= mj * softened_inv((x - map.positions[j]).norm2(), spec.softening);
            }
            U.at(n) = acc;
        }
    });
    return U;
}

std::vector<Vec3> gravity_force(const FlowMap& map, const GravitySpec& spec) {
    spec.validate();
    const std::size_t n = map.size();
    std::vector<Vec3> force(n);
    if (spec.solver == GravitySpec::Solver::DirectSum) {
        const double eps = spec.softening;
        std::vector<double> mass(n);
        for (std::size_t i = 0; i < n; ++i) mass[i] = map.rho0[i] * map.label_volume(i);
        parallel_chunks(n, [&](int, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                Vec3 acc;
                for (std::size_t j = 0; j < n; ++j) {
                    if (j == i) continue;
                    const Vec3 d = map.positions[i] - map.positions[j];
                    const double inv = softened_inv(d.norm2(), eps);
                    acc -= mass[j] * inv * inv * inv * d;
                }
                // pdot = -gamma rho0 grad U; acc already carries the direction
                force[i] = spec.gamma * map.rho0[i] * acc;
            }
        });
        return force;
    }
    // particle-mesh: deposit, solve, interpolate the acceleration back
    GridField rho = deposit_density(map, spec.field_grid);
    GridField U = gravitational_potential(rho, spec);
    GridField gradU = gradient(U);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 gU = gradU.interp_vec(map.positions[i]);
        force[i] = (-spec.gamma * map.rho0[i]) * gU;
    }
    return force;
}

void gravity_step(FlowMap& map, const GravitySpec& spec, double dt) {
    leapfrog_step(map, dt, [&](const FlowMap& m) { return gravity_force(m, spec); });
}

double gravity_energy(const FlowMap& map, const GravitySpec& spec) {
    spec.validate();
    double T = 0.0;
    for (std::size_t i = 0; i < map.size(); ++i)
        T += map.momenta[i].norm2() / (2.0 * map.mass * map.rho0[i]) * map.label_volume(i);
    double U = 0.0;
    const std::size_t n = map.size();
    std::vector<double> mass(n);
    for (std::size_t i = 0; i < n; ++i) mass[i] = map.rho0[i] * map.label_volume(i);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            U -= mass[i] * mass[j] *
                 softened_inv((map.positions[i] - map.positions[j]).norm2(), spec.softening);
    return T + spec.gamma * U;
}

VirialReport virial_residual(const FlowMap& map, const GravitySpec& spec) {
    spec.validate();
    if (spec.boundary == GravitySpec::Bound::Periodic)
        throw ConfigError("virial diagnostics assume an isolated (open) configuration");
    VirialReport rep;
    for (std::size_t i = 0; i < map.size(); ++i)
        rep.kinetic += map.momenta[i].norm2() / (2.0 * map.mass * map.rho0[i]) * map.label_volume(i);
    const std::size_t n = map.size();
    std::vector<double> mass(n);
    for (std::size_t i = 0; i < n; ++i) mass[i] = map.rho0[i] * map.label_volume(i);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            rep.potential -= spec.gamma * mass[i] * mass[j] *
                             softened_inv((map.positions[i] - map.positions[j]).norm2(), spec.softening);
    rep.residual = 2.0 * rep.kinetic + rep.potential;
    rep.normalized = rep.potential != 0.0 ? std::abs(rep.residual / rep.potential) : std::abs(rep.residual);
    rep.e_static = rep.kinetic + rep.potential;
    return rep;
}

VirialReport virial_residual(const GridField& rho, const GridField& v, const GravitySpec& spec,
                             double mass) {
    spec.validate();
    if (spec.boundary == GravitySpec::Bound::Periodic)
        throw ConfigError("virial diagnostics assume an isolated (open) configuration");
    if (!(rho.grid == v.grid)) throw Error("virial: mismatched grids");
    VirialReport rep;
    const Grid& g = rho.grid;
    const std::size_t nodes = g.node_count();
    std::vector<double> node_mass(nodes);
    std::vector<Vec3> pos(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double wt = g.boundary == Boundary::Periodic ? g.cell_volume()
                                                           : g.node_volume(g.unflat(i));
        node_mass[i] = rho.at(i) * wt;
        pos[i] = g.coord(i);
        rep.kinetic += 0.5 * mass * rho.at(i) * v.vec_at(i).norm2() * wt;
    }
    for (std::size_t i = 0; i < nodes; ++i)
        for (std::size_t j = i + 1; j < nodes; ++j)
            rep.potential -= spec.gamma * node_mass[i] * node_mass[j] *
                             softened_inv((pos[i] - pos[j]).norm2(), spec.softening);
    rep.residual = 2.0 * rep.kinetic + rep.potential;
    rep.normalized = rep.potential != 0.0 ? std::abs(rep.residual / rep.potential) : std::abs(rep.residual);
    rep.e_static = rep.kinetic + rep.potential;
    return rep;
}

void RadialProfile::validate() const {
    if (r.size() != value.size() || r.size() < 2) throw ConstructionError("radial profile needs matched arrays");
    if (r.front() < 0.0) throw ConstructionError("radial profile must start at r >= 0");
    for (std::size_t i = 1; i < r.size(); ++i)
        if (!(r[i] > r[i - 1])) throw ConstructionError("radial nodes must increase strictly");
    for (double v : value)
        if (!std::isfinite(v)) throw ConstructionError("radial profile values must be finite");
}

RadialProfile tornado_profile(const RadialProfile& rho, double gamma, double mass) {
    rho.validate();
    for (double v : rho.value)
        if (v < 0.0) throw Error("tornado profile needs rho >= 0");
    RadialProfile out;
    out.r = rho.r;
    out.value.resize(rho.r.size());
    double cum = 0.0;
    // v^2(r) = (4 pi gamma/m) int_0^r s rho(s) ds
    double prev_r = rho.r.front();
    double prev_f = rho.r.front() * rho.value.front();
    if (rho.r.front() > 0.0) cum += 0.5 * rho.r.front() * prev_f;  // triangle from 0
    out.value[0] = std::sqrt(4.0 * pi * gamma / mass * cum);
    for (std::size_t i = 1; i < rho.r.size(); ++i) {
        const double f = rho.r[i] * rho.value[i];
        cum += 0.5 * (prev_f + f) * (rho.r[i] - prev_r);
        if (!std::isfinite(cum)) throw Error("tornado profile: cumulative integral diverged");
        out.value[i] = std::sqrt(4.0 * pi * gamma / mass * cum);
        prev_r = rho.r[i];
        prev_f = f;
    }
    return out;
}

StaticConfig embed_tornado(const RadialProfile& rho_r, const Grid& grid, double gamma, double mass) {
    rho_r.validate();
    const RadialProfile v_r = tornado_profile(rho_r, gamma, mass);
    StaticConfig cfg;
    cfg.rho = GridField(grid, 1, "mass/volume");
    cfg.velocity = GridField(grid, grid.dim, "length/time");
    const double r_max = rho_r.r.back();

    auto sample = [](const RadialProfile& p, double r) {
        if (r <= p.r.front()) return p.value.front();
        if (r >= p.r.back()) return p.value.back();
        std::size_t k = 1;
        while (p.r[k] < r) ++k;
        const double t = (r - p.r[k - 1]) / (p.r[k] - p.r[k - 1]);
        return (1.0 - t) * p.value[k - 1] + t * p.value[k];
    };

    const std::size_t nodes = grid.node_count();
    for (std::size_t n = 0; n < nodes; ++n) {
        const Vec3 x = grid.coord(n);
        const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
        cfg.rho.at(n) = r <= r_max ? sample(rho_r, r) : 0.0;
        const double vmag = sample(v_r, r);
        if (r > 1e-12) {
            cfg.velocity.at(n, 0) = -vmag * x[1] / r;
            cfg.velocity.at(n, 1) = vmag * x[0] / r;
        }
    }
    return cfg;
}

StaticConfig columnar_vortex_array(const Grid& grid, double gamma, double mass,
                                   double velocity_scale, double background_factor) {
    if (grid.dim != 3 || grid.boundary != Boundary::Periodic)
        throw ConfigError("vortex array needs a periodic 3D grid");
    if (grid.length(0) != grid.length(1))
        throw ConfigError("vortex array needs a square cross-section");
    if (background_factor < 1.0) throw ConfigError("background must cover the density oscillation");
    StaticConfig cfg;
    cfg.rho = GridField(grid, 1, "mass/volume");
    cfg.velocity = GridField(grid, grid.dim, "length/time");
    const double kx = 2.0 * pi / grid.length(0);
    const double ky = 2.0 * pi / grid.length(1);
    const double v0 = velocity_scale;
    // rho = C - (m v0^2/(8 pi gamma)) (2 kx^2 cos 2kx x + 2 ky^2 cos 2ky y) with
    // C chosen so rho >= 0; the oscillating part is (m/4 pi gamma) Lap p
    const double amp = mass * v0 * v0 / (4.0 * pi * gamma);
    const double osc_max = amp * (kx * kx + ky * ky);
    const double C = background_factor * osc_max;
    const std::size_t nodes = grid.node_count();
    for (std::size_t n = 0; n < nodes; ++n) {
        const Vec3 x = grid.coord(n);
        const double cx = std::cos(kx * x[0]), sx = std::sin(kx * x[0]);
        const double cy = std::cos(ky * x[1]), sy = std::sin(ky * x[1]);
        cfg.velocity.at(n, 0) = v0 * cx * sy;
        cfg.velocity.at(n, 1) = -v0 * sx * cy;
        cfg.rho.at(n) = C - amp * (kx * kx * std::cos(2.0 * kx * x[0]) +
                                   ky * ky * std::cos(2.0 * ky * x[1]));
    }
    return cfg;
}

namespace {

GridField advective_term(const GridField& v) {
    const Grid& g = v.grid;
    GridField G(g, g.dim);
    for (int c = 0; c < g.dim; ++c) {
        for (int a = 0; a < g.dim; ++a) {
            GridField d = derivative(v, c, a);
            const std::size_t nodes = g.node_count();
            for (std::size_t n = 0; n < nodes; ++n) G.at(n, c) += v.at(n, a) * d.at(n);
        }
    }
    return G;
}

}  // namespace

StaticResiduals static_residuals(const GridField& rho, const GridField& v, const GravitySpec& spec,
                                 double mass) {
    spec.validate();
    if (!(rho.grid == v.grid)) throw Error("static residuals: mismatched grids");
    const Grid& g = rho.grid;
    GridField G = advective_term(v);
    StaticResiduals out;

    GridField divG = divergence(G);
    GridField r1(g, 1);
    const std::size_t nodes = g.node_count();
    for (std::size_t n = 0; n < nodes; ++n)
        r1.at(n) = divG.at(n) + 4.0 * pi * spec.gamma / mass * rho.at(n);
    out.divergence_eq = r1.l2_norm();

    GridField mom(g, g.dim);
    for (std::size_t n = 0; n < nodes; ++n)
        for (int c = 0; c < g.dim; ++c) mom.at(n, c) = rho.at(n) * v.at(n, c);
    out.continuity = divergence(mom).l2_norm();

    out.curl_eq = curl(G).l2_norm();
    return out;
}

BoundRatio energy_bound_ratio(const GridField& rho, const GridField& v, const GridField& f,
                              const GravitySpec& spec, double mass) {
    spec.validate();
    const Grid& g = rho.grid;
    if (!(g == v.grid) || !(g == f.grid)) throw Error("energy bound: mismatched grids");
    BoundRatio out;

    GridField G = advective_term(v);
    double S = 0.0, gradf2 = 0.0, rhof = 0.0, rho2 = 0.0, f2 = 0.0;
    const std::size_t nodes = g.node_count();
    GridField gf = gradient(f);
    for (std::size_t n = 0; n < nodes; ++n) {
        const double wt = g.boundary == Boundary::Periodic ? g.cell_volume()
                                                           : g.node_volume(g.unflat(n));
        S += G.vec_at(n).norm2() * wt;
        gradf2 += gf.vec_at(n).norm2() * wt;
        rhof += rho.at(n) * f.at(n) * wt;
        rho2 += rho.at(n) * rho.at(n) * wt;
        f2 += f.at(n) * f.at(n) * wt;
    }
    if (!(gradf2 > 0.0)) throw Error("energy bound: trial function has zero gradient");
    out.lhs = mass * mass / (16.0 * pi * spec.gamma) * S;
    // a vanishing overlap (up to roundoff in the quadrature) makes the bound
    // trivially true; report it as such instead of dividing by noise
    const double overlap_scale = std::sqrt(rho2 * f2);
    if (std::abs(rhof) <= 1e-13 * overlap_scale) {
        out.rhs = 0.0;
        out.rhs_degenerate = true;
        out.ratio = std::numeric_limits<double>::infinity();
    } else {
        out.rhs = pi * spec.gamma * rhof * rhof / gradf2;
        out.ratio = out.lhs / out.rhs;
    }
    return out;
}

LadyzhenskayaReport ladyzhenskaya_check(const GridField& f, const GridField* rho) {
    const Grid& g = f.grid;
    LadyzhenskayaReport rep;
    GridField gf = gradient(f);
    double f6 = 0.0, gf2 = 0.0;
    const std::size_t nodes = g.node_count();
    for (std::size_t n = 0; n < nodes; ++n) {
        const double wt = g.boundary == Boundary::Periodic ? g.cell_volume()
                                                           : g.node_volume(g.unflat(n));
        f6 += std::pow(f.at(n), 6.0) * wt;
        gf2 += gf.vec_at(n).norm2() * wt;
    }
    const double c = std::pow(48.0, 1.0 / 6.0);
    rep.f_norm6 = std::pow(f6, 1.0 / 6.0);
    rep.grad_bound = c * std::sqrt(gf2);
    rep.margin = rep.grad_bound - rep.f_norm6;

    if (rho != nullptr) {
        if (!(rho->grid == g)) throw Error("ladyzhenskaya: mismatched grids");
        double rf = 0.0, r65 = 0.0;
        for (std::size_t n = 0; n < nodes; ++n) {
            const double wt = g.boundary == Boundary::Periodic ? g.cell_volume()
                                                               : g.node_volume(g.unflat(n));
            rf += rho->at(n) * f.at(n) * wt;
            r65 += std::pow(std::abs(rho->at(n)), 6.0 / 5.0) * wt;
        }
        rep.j_abs = gf2 > 0.0 ? std::abs(rf) / std::sqrt(gf2) : 0.0;
        rep.j_bound = c * std::pow(r65, 5.0 / 6.0);
        rep.j_margin = rep.j_bound - rep.j_abs;
    }
    return rep;
}

double shafranov_functional(const GridField& rho, const GridField& v, const DensityPotential& V,
                            double mass) {
    if (!(rho.grid == v.grid)) throw Error("shafranov: mismatched grids");
    const Grid& g = rho.grid;
    double acc = 0.0;
    const std::size_t nodes = g.node_count();
    for (std::size_t n = 0; n < nodes; ++n) {
        const double wt = g.boundary == Boundary::Periodic ? g.cell_volume()
                                                           : g.node_volume(g.unflat(n));
        const double r = rho.at(n);
        const double p = r > 0.0 ? pressure_of_density(r, V, mass) : 0.0;
        acc += (r * v.vec_at(n).norm2() + g.dim * p) * wt;
    }
    return acc;
}

}  // namespace lagflow
