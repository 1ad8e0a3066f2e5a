#include "lagflow/dynamics.hpp"

#include <cmath>

namespace lagflow {

DensityPotential DensityPotential::linear(double c) {
    DensityPotential v;
    v.kind = Kind::Linear;
    v.c = c;
    return v;
}

DensityPotential DensityPotential::quadratic(double a) {
    DensityPotential v;
    v.kind = Kind::Quadratic;
    v.a = a;
    return v;
}

DensityPotential DensityPotential::sound_wave(double kappa, double rho_as, double rho_ref) {
    if (!(rho_ref > 0.0)) throw ConfigError("sound-wave potential needs rho_ref > 0");
    DensityPotential v;
    v.kind = Kind::SoundWave;
    v.kappa = kappa;
    v.rho_as = rho_as;
    v.rho_ref = rho_ref;
    return v;
}

double DensityPotential::value(double rho) const {
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::Linear: return c * rho;
        case Kind::Quadratic: return a * rho * rho;
        case Kind::SoundWave: {
            const double d = rho - rho_as;
            return 0.5 * kappa / rho_ref * d * d;
        }
    }
    return 0.0;
}

double DensityPotential::deriv(double rho) const {
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::Linear: return c;
        case Kind::Quadratic: return 2.0 * a * rho;
        case Kind::SoundWave: return kappa / rho_ref * (rho - rho_as);
    }
    return 0.0;
}

double pressure_of_density(double rho, const DensityPotential& V, double mass) {
    if (!(rho > 0.0)) throw Error("pressure needs rho > 0");
    return (rho * V.deriv(rho) - V.value(rho)) / mass;
}

GridField pressure_of_density(const GridField& rho, const DensityPotential& V, double mass) {
    GridField p(rho.grid, 1, "pressure");
    const std::size_t nodes = rho.grid.node_count();
    for (std::size_t n = 0; n < nodes; ++n) p.at(n) = pressure_of_density(rho.at(n), V, mass);
    return p;
}

ExternalPotential ExternalPotential::harmonic(double omega, Vec3 center) {
    ExternalPotential u;
    u.kind = Kind::Harmonic;
    u.omega = omega;
    u.center = center;
    return u;
}

ExternalPotential ExternalPotential::linear_ramp(Vec3 slope) {
    ExternalPotential u;
    u.kind = Kind::LinearRamp;
    u.slope = slope;
    return u;
}

ExternalPotential ExternalPotential::gaussian_well(double amplitude, double sigma, Vec3 center) {
    ExternalPotential u;
    u.kind = Kind::GaussianWell;
    u.amplitude = amplitude;
    u.sigma = sigma;
    u.center = center;
    return u;
}

double ExternalPotential::value(const Vec3& x) const {
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::Harmonic: return 0.5 * omega * omega * (x - center).norm2();
        case Kind::LinearRamp: return slope.dot(x);
        case Kind::GaussianWell: {
            const double r2 = (x - center).norm2();
            return amplitude * std::exp(-r2 / (2.0 * sigma * sigma));
        }
    }
    return 0.0;
}

Vec3 ExternalPotential::grad(const Vec3& x) const {
    switch (kind) {
        case Kind::Zero: return {};
        case Kind::Harmonic: return omega * omega * (x - center);
        case Kind::LinearRamp: return slope;
        case Kind::GaussianWell: {
            const Vec3 d = x - center;
            const double s2 = sigma * sigma;
            return d * (-amplitude / s2 * std::exp(-d.norm2() / (2.0 * s2)));
        }
    }
    return {};
}

ForceModel ForceModel::barotropic(DensityPotential V, double dispersion_lambda) {
    ForceModel m;
    m.kind = Kind::Barotropic;
    m.V = V;
    m.dispersion_lambda = dispersion_lambda;
    return m;
}

ForceModel ForceModel::external(ExternalPotential U) {
    ForceModel m;
    m.kind = Kind::External;
    m.U = U;
    return m;
}

ForceModel ForceModel::composite(DensityPotential V, ExternalPotential U, double dispersion_lambda) {
    ForceModel m;
    m.kind = Kind::Composite;
    m.V = V;
    m.U = U;
    m.dispersion_lambda = dispersion_lambda;
    return m;
}

FlowMap step_free(FlowMap map, double dt) {
    for (std::size_t i = 0; i < map.size(); ++i)
        map.positions[i] += map.velocity(i) * dt;
    map.time += dt;
    return map;
}

namespace {

// centered differences of a per-label array over one label axis
double label_diff(const Grid& lat, const std::vector<double>& f, const std::array<int, 3>& idx,
                  int axis) {
    const auto sa = static_cast<std::size_t>(axis);
    const double h = lat.spacing(axis);
    const int i = idx[sa], na = lat.n[sa];
    auto ip = idx, im = idx;
    if (lat.boundary == Boundary::Periodic) {
        ip[sa] = lat.wrap(i + 1, axis);
        im[sa] = lat.wrap(i - 1, axis);
        return (f[lat.flat(ip)] - f[lat.flat(im)]) / (2.0 * h);
    }
    if (i == 0) {
        auto i1 = idx, i2 = idx;
        i1[sa] = 1;
        i2[sa] = std::min(2, na - 1);
        if (na == 2) return (f[lat.flat(i1)] - f[lat.flat(idx)]) / h;
        return (-3.0 * f[lat.flat(idx)] + 4.0 * f[lat.flat(i1)] - f[lat.flat(i2)]) / (2.0 * h);
    }
    if (i == na - 1) {
        auto i1 = idx, i2 = idx;
        i1[sa] = na - 2;
        i2[sa] = std::max(na - 3, 0);
        if (na == 2) return (f[lat.flat(idx)] - f[lat.flat(i1)]) / h;
        return (3.0 * f[lat.flat(idx)] - 4.0 * f[lat.flat(i1)] + f[lat.flat(i2)]) / (2.0 * h);
    }
    ip[sa] = i + 1;
    im[sa] = i - 1;
    return (f[lat.flat(ip)] - f[lat.flat(im)]) / (2.0 * h);
}

std::vector<double> fold_checked_dets(const FlowMap& map, const std::vector<Mat3>& A) {
    std::vector<double> dets(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) {
        dets[i] = A[i].det();
        if (!(dets[i] > 0.0))
            throw FoldingError("folded map: det A <= 0 at label node " + std::to_string(i) +
                               " (t=" + std::to_string(map.time) + ")");
    }
    return dets;
}

// mu_disp(xi) = -2 lambda Lap_x rho via the Voss-Weyl form
// Lap_x rho = (1/detA) d/dxi_k [ detA (g^-1)_kl d rho/dxi_l ],  g = A^T A
std::vector<double> dispersion_chemical_potential(const FlowMap& map, const std::vector<Mat3>& A,
                                                  const std::vector<double>& dets, double lambda) {
    const Grid& lat = map.lattice;
    const std::size_t nn = map.size();
    std::vector<double> rho(nn);
    for (std::size_t i = 0; i < nn; ++i) rho[i] = map.rho0[i] / dets[i];

    std::vector<std::array<double, 3>> w(nn);  // detA g^-1 grad_xi rho
    for (std::size_t i = 0; i < nn; ++i) {
        const auto idx = lat.unflat(i);
        Vec3 grho;
        for (int k = 0; k < lat.dim; ++k) grho[k] = label_diff(lat, rho, idx, k);
        const Mat3 ginv = A[i].transpose().mul(A[i]).inverse();
        for (int k = 0; k < lat.dim; ++k) {
            double s = 0.0;
            for (int l = 0; l < lat.dim; ++l) s += ginv(k, l) * grho[l];
            w[i][static_cast<std::size_t>(k)] = dets[i] * s;
        }
    }
    std::vector<double> mu(nn);
    std::vector<double> comp(nn);
    for (int k = 0; k < lat.dim; ++k) {
        for (std::size_t i = 0; i < nn; ++i) comp[i] = w[i][static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < nn; ++i)
            mu[i] += label_diff(lat, comp, lat.unflat(i), k);
    }
    for (std::size_t i = 0; i < nn; ++i) mu[i] = -2.0 * lambda * mu[i] / dets[i];
    return mu;
}

}  // namespace

std::vector<Vec3> barotropic_force(const FlowMap& map, const DensityPotential& V,
                                   double dispersion_lambda) {
    const Grid& lat = map.lattice;
    const std::size_t nn = map.size();
    std::vector<Mat3> A = deformation_matrices(map);
    std::vector<double> dets = fold_checked_dets(map, A);

    // bracket tensor B_j^k = rho0 (A^-1)_j^k f'(detA) detA; rho0 f'(detA) = V(rho) - rho V'(rho)
    std::vector<std::array<std::array<double, 3>, 3>> B(nn);
    for (std::size_t i = 0; i < nn; ++i) {
        const double rho = map.rho0[i] / dets[i];
        const double coeff = (V.value(rho) - rho * V.deriv(rho)) * dets[i];
        const Mat3 inv = A[i].inverse();
        for (int j = 0; j < lat.dim; ++j)
            for (int k = 0; k < lat.dim; ++k)
                B[i][static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = coeff * inv(j, k);
    }

    std::vector<Vec3> force(nn);
    std::vector<double> comp(nn);
    for (int j = 0; j < lat.dim; ++j) {
        for (int k = 0; k < lat.dim; ++k) {
            for (std::size_t i = 0; i < nn; ++i)
                comp[i] = B[i][static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
            for (std::size_t i = 0; i < nn; ++i)
                force[i][j] += label_diff(lat, comp, lat.unflat(i), k);
        }
    }

    if (dispersion_lambda != 0.0) {
        // F -= rho0 A^-T grad_xi mu_disp
        std::vector<double> mu = dispersion_chemical_potential(map, A, dets, dispersion_lambda);
        for (std::size_t i = 0; i < nn; ++i) {
            const auto idx = lat.unflat(i);
            Vec3 gmu;
            for (int k = 0; k < lat.dim; ++k) gmu[k] = label_diff(lat, mu, idx, k);
            const Mat3 invT = A[i].inverse().transpose();
            force[i] -= map.rho0[i] * invT.apply(gmu);
        }
    }
    return force;
}

std::vector<Vec3> external_force(const FlowMap& map, const ExternalPotential& U) {
    std::vector<Vec3> force(map.size());
    for (std::size_t i = 0; i < map.size(); ++i)
        force[i] = (-map.rho0[i]) * U.grad(map.positions[i]);
    return force;
}

std::vector<Vec3> model_force(const FlowMap& map, const ForceModel& model) {
    switch (model.kind) {
        case ForceModel::Kind::Free:
            return std::vector<Vec3>(map.size());
        case ForceModel::Kind::Barotropic:
            return barotropic_force(map, model.V, model.dispersion_lambda);
        case ForceModel::Kind::External:
            return external_force(map, model.U);
        case ForceModel::Kind::Composite: {
            std::vector<Vec3> f = barotropic_force(map, model.V, model.dispersion_lambda);
            std::vector<Vec3> g = external_force(map, model.U);
            for (std::size_t i = 0; i < f.size(); ++i) f[i] += g[i];
            return f;
        }
    }
    return std::vector<Vec3>(map.size());
}

double total_energy(const FlowMap& map, const ForceModel& model) {
    double H = 0.0;
    for (std::size_t i = 0; i < map.size(); ++i)
        H += map.momenta[i].norm2() / (2.0 * map.mass * map.rho0[i]) * map.label_volume(i);

    const bool has_V = model.kind == ForceModel::Kind::Barotropic || model.kind == ForceModel::Kind::Composite;
    const bool has_U = model.kind == ForceModel::Kind::External || model.kind == ForceModel::Kind::Composite;

    if (has_V) {
        std::vector<Mat3> A = deformation_matrices(map);
        std::vector<double> dets = fold_checked_dets(map, A);
        for (std::size_t i = 0; i < map.size(); ++i) {
            const double rho = map.rho0[i] / dets[i];
            H += dets[i] * model.V.value(rho) * map.label_volume(i);
        }
        if (model.dispersion_lambda != 0.0) {
            // lambda |grad_x rho|^2 integrated over x = sum detA |A^-T grad_xi rho|^2 dV
            const Grid& lat = map.lattice;
            std::vector<double> rho(map.size());
            for (std::size_t i = 0; i < map.size(); ++i) rho[i] = map.rho0[i] / dets[i];
            for (std::size_t i = 0; i < map.size(); ++i) {
                const auto idx = lat.unflat(i);
                Vec3 grho;
                for (int k = 0; k < lat.dim; ++k) grho[k] = label_diff(lat, rho, idx, k);
                const Vec3 gx = A[i].inverse().transpose().apply(grho);
                H += model.dispersion_lambda * gx.norm2() * dets[i] * map.label_volume(i);
            }
        }
    }
    if (has_U) {
        for (std::size_t i = 0; i < map.size(); ++i)
            H += map.rho0[i] * model.U.value(map.positions[i]) * map.label_volume(i);
    }
    return H;
}

void leapfrog_step(FlowMap& map, double dt,
                   const std::function<std::vector<Vec3>(const FlowMap&)>& force) {
    std::vector<Vec3> f = force(map);
    for (std::size_t i = 0; i < map.size(); ++i) map.momenta[i] += f[i] * (0.5 * dt);
    for (std::size_t i = 0; i < map.size(); ++i) map.positions[i] += map.velocity(i) * dt;
    map.time += dt;
    f = force(map);
    for (std::size_t i = 0; i < map.size(); ++i) map.momenta[i] += f[i] * (0.5 * dt);
}

namespace {

void rk4_step(FlowMap& map, double dt, const ForceModel& model) {
    const std::size_t nn = map.size();
    const FlowMap start = map;

    auto eval = [&](const FlowMap& s, std::vector<Vec3>& dx, std::vector<Vec3>& dp) {
        std::vector<Vec3> f = model_force(s, model);
        dx.resize(nn);
        dp.resize(nn);
        for (std::size_t i = 0; i < nn; ++i) {
            dx[i] = s.velocity(i);
            dp[i] = f[i];
        }
    };
    auto advance = [&](const std::vector<Vec3>& dx, const std::vector<Vec3>& dp, double h, FlowMap& out) {
        out = start;
        for (std::size_t i = 0; i < nn; ++i) {
            out.positions[i] += dx[i] * h;
            out.momenta[i] += dp[i] * h;
        }
        out.time = start.time + h;
    };

    std::vector<Vec3> k1x, k1p, k2x, k2p, k3x, k3p, k4x, k4p;
    FlowMap tmp;
    eval(start, k1x, k1p);
    advance(k1x, k1p, 0.5 * dt, tmp);
    eval(tmp, k2x, k2p);
    advance(k2x, k2p, 0.5 * dt, tmp);
    eval(tmp, k3x, k3p);
    advance(k3x, k3p, dt, tmp);
    eval(tmp, k4x, k4p);

    for (std::size_t i = 0; i < nn; ++i) {
        map.positions[i] = start.positions[i] +
                           (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]) * (dt / 6.0);
        map.momenta[i] = start.momenta[i] +
                         (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]) * (dt / 6.0);
    }
    map.time = start.time + dt;
}

}  // namespace

IntegrationResult integrate(FlowMap map, const ForceModel& model, const IntegratorSpec& spec,
                            const std::vector<Observer>& observers) {
    IntegrationResult res;
    auto notify = [&](const FlowMap& m, int step) {
        for (const auto& ob : observers)
            if (ob.fn && ob.cadence > 0 && step % ob.cadence == 0) ob.fn(m, step);
    };
    auto maybe_save = [&](const FlowMap& m, int step) {
        if (spec.save_every > 0 && step % spec.save_every == 0) res.snapshots.push_back(m);
    };

    notify(map, 0);
    maybe_save(map, 0);
    for (int step = 1; step <= spec.steps; ++step) {
        try {
            if (model.kind == ForceModel::Kind::Free) {
                map = step_free(std::move(map), spec.dt);
            } else if (spec.scheme == IntegratorSpec::Scheme::Leapfrog) {
                leapfrog_step(map, spec.dt, [&](const FlowMap& m) { return model_force(m, model); });
            } else {
                rk4_step(map, spec.dt, model);
            }
        } catch (const FoldingError& e) {
            res.folded = true;
            res.message = e.what();
            break;
        }
        res.steps_done = step;
        notify(map, step);
        maybe_save(map, step);
    }
    res.final = std::move(map);
    return res;
}

}  // namespace lagflow
