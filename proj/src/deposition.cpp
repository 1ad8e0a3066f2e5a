#include "lagflow/deposition.hpp"

#include <cmath>

#include "lagflow/threading.hpp"

namespace lagflow {

namespace {

int g_threads = 1;

struct Stencil {
    int idx[3][3];      // node index per axis per tap
    double w[3][3];     // weight per axis per tap
    int taps = 2;       // 2 for CIC, 3 for TSC
};

// per-axis kernel taps; out-of-range taps on bounded grids are folded onto
// the edge node so the weights still sum to one
Stencil make_stencil(const Grid& g, const Vec3& x, DepositKernel kernel) {
    Stencil s;
    s.taps = kernel == DepositKernel::CIC ? 2 : 3;
    for (int a = 0; a < g.dim; ++a) {
        int i0 = 0;
        double fr = 0.0;
        g.locate(x[a], a, i0, fr);
        if (kernel == DepositKernel::CIC) {
            s.idx[a][0] = i0;
            s.idx[a][1] = g.wrap(i0 + 1, a);
            s.w[a][0] = 1.0 - fr;
            s.w[a][1] = fr;
            if (g.boundary == Boundary::Bounded) {
                s.idx[a][1] = std::min(s.idx[a][1], g.n[static_cast<std::size_t>(a)] - 1);
            }
        } else {
            // nearest node and signed offset in cell units
            int in = fr < 0.5 ? i0 : i0 + 1;
            double d = (fr < 0.5 ? fr : fr - 1.0);
            s.w[a][0] = 0.5 * (0.5 - d) * (0.5 - d);
            s.w[a][1] = 0.75 - d * d;
            s.w[a][2] = 0.5 * (0.5 + d) * (0.5 + d);
            const int na = g.n[static_cast<std::size_t>(a)];
            int im = in - 1, ip = in + 1;
            if (g.boundary == Boundary::Periodic) {
                im = g.wrap(im, a);
                in = g.wrap(in, a);
                ip = g.wrap(ip, a);
            } else {
                im = std::max(0, std::min(im, na - 1));
                in = std::max(0, std::min(in, na - 1));
                ip = std::max(0, std::min(ip, na - 1));
            }
            s.idx[a][0] = im;
            s.idx[a][1] = in;
            s.idx[a][2] = ip;
        }
    }
    return s;
}

}  // namespace

void set_threads(int n) { g_threads = n < 1 ? 1 : n; }
int get_threads() { return g_threads; }

GridField deposit_scalar(const FlowMap& map, const Grid& grid, const std::vector<double>& weight,
                         DepositKernel kernel, const std::string& units) {
    map.check_consistent();
    if (weight.size() != map.size()) throw Error("weight array size mismatch");
    GridField out(grid, 1, units);
    const std::size_t nodes = grid.node_count();
    const int workers = get_threads();

    std::vector<std::vector<double>> buffers(static_cast<std::size_t>(workers));
    parallel_chunks(map.size(), [&](int chunk, std::size_t b, std::size_t e) {
        auto& buf = buffers[static_cast<std::size_t>(chunk)];
        buf.assign(nodes, 0.0);
        for (std::size_t i = b; i < e; ++i) {
            const Stencil s = make_stencil(grid, map.positions[i], kernel);
            const double wi = weight[i];
            std::array<int, 3> idx{0, 0, 0};
            const int t0 = s.taps, t1 = grid.dim > 1 ? s.taps : 1, t2 = grid.dim > 2 ? s.taps : 1;
            for (int a = 0; a < t0; ++a)
                for (int bb = 0; bb < t1; ++bb)
                    for (int c = 0; c < t2; ++c) {
                        double w = s.w[0][a];
                        idx[0] = s.idx[0][a];
                        if (grid.dim > 1) {
                            w *= s.w[1][bb];
                            idx[1] = s.idx[1][bb];
                        }
                        if (grid.dim > 2) {
                            w *= s.w[2][c];
                            idx[2] = s.idx[2][c];
                        }
                        buf[grid.flat(idx)] += w * wi;
                    }
        }
    });
    // fixed-order merge keeps results reproducible for a given thread count
    for (const auto& buf : buffers) {
        if (buf.empty()) continue;
        for (std::size_t n = 0; n < nodes; ++n) out.values[n] += buf[n];
    }
    // mass -> density
    for (std::size_t n = 0; n < nodes; ++n) {
        const double vol = grid.boundary == Boundary::Periodic ? grid.cell_volume()
                                                               : grid.node_volume(grid.unflat(n));
        out.values[n] /= vol;
    }
    return out;
}

GridField deposit_density(const FlowMap& map, const Grid& grid, DepositKernel kernel) {
    std::vector<double> w(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) w[i] = map.rho0[i] * map.label_volume(i);
    return deposit_scalar(map, grid, w, kernel, "mass/volume");
}

MomentumFields deposit_momentum(const FlowMap& map, const Grid& grid, DepositKernel kernel) {
    MomentumFields out;
    out.rho = deposit_density(map, grid, kernel);
    out.momentum = GridField(grid, grid.dim, "mass/(volume time) * length");
    std::vector<double> w(map.size());
    for (int c = 0; c < grid.dim; ++c) {
        for (std::size_t i = 0; i < map.size(); ++i)
            w[i] = map.rho0[i] * map.label_volume(i) * map.velocity(i)[c];
        GridField comp = deposit_scalar(map, grid, w, kernel);
        const std::size_t nodes = grid.node_count();
        for (std::size_t n = 0; n < nodes; ++n) out.momentum.at(n, c) = comp.at(n);
    }
    // Eq (4) is 0/0 in vacuum; below eps_rho the velocity is zeroed and masked
    double mean_rho = 0.0;
    const std::size_t nodes = grid.node_count();
    for (std::size_t n = 0; n < nodes; ++n) mean_rho += out.rho.at(n);
    mean_rho /= static_cast<double>(nodes);
    out.eps_rho = 1e-12 * mean_rho;
    out.velocity = GridField(grid, grid.dim, "length/time");
    out.vacuum_mask.assign(nodes, 0);
    for (std::size_t n = 0; n < nodes; ++n) {
        const double r = out.rho.at(n);
        if (r > out.eps_rho) {
            for (int c = 0; c < grid.dim; ++c) out.velocity.at(n, c) = out.momentum.at(n, c) / r;
        } else {
            out.vacuum_mask[n] = 1;
        }
    }
    return out;
}

GridField deposit_l(const FlowMap& map, const Grid& grid, DepositKernel kernel) {
    GridField l(grid, grid.dim, "momentum/volume");
    std::vector<double> w(map.size());
    for (int c = 0; c < grid.dim; ++c) {
        for (std::size_t i = 0; i < map.size(); ++i) w[i] = map.momenta[i][c] * map.label_volume(i);
        GridField comp = deposit_scalar(map, grid, w, kernel);
        const std::size_t nodes = grid.node_count();
        for (std::size_t n = 0; n < nodes; ++n) l.at(n, c) = comp.at(n);
    }
    return l;
}

ResidualResult continuity_residual_momentum(const GridField& rho_prev, const GridField& rho_next,
                                            const GridField& momentum_mid, double dt) {
    if (!(rho_prev.grid == rho_next.grid) || !(rho_prev.grid == momentum_mid.grid))
        throw Error("continuity residual: mismatched grids");
    GridField divm = divergence(momentum_mid);
    ResidualResult res;
    res.field = GridField(rho_prev.grid, 1);
    const std::size_t nodes = rho_prev.grid.node_count();
    for (std::size_t n = 0; n < nodes; ++n)
        res.field.at(n) = (rho_next.at(n) - rho_prev.at(n)) / (2.0 * dt) + divm.at(n);
    res.norm = res.field.l2_norm();
    return res;
}

ResidualResult continuity_residual(const GridField& rho_prev, const GridField& rho_mid,
                                   const GridField& rho_next, const GridField& v_mid, double dt) {
    if (!(rho_mid.grid == v_mid.grid)) throw Error("continuity residual: mismatched grids");
    GridField mom(rho_mid.grid, rho_mid.grid.dim);
    const std::size_t nodes = rho_mid.grid.node_count();
    for (std::size_t n = 0; n < nodes; ++n)
        for (int c = 0; c < rho_mid.grid.dim; ++c) mom.at(n, c) = rho_mid.at(n) * v_mid.at(n, c);
    return continuity_residual_momentum(rho_prev, rho_next, mom, dt);
}

ResidualResult euler_residual(const GridField& v_prev, const GridField& v_mid,
                              const GridField& v_next, const GridField& rho_mid,
                              const GridField& p_mid, double dt) {
    const Grid& g = v_mid.grid;
    if (!(v_prev.grid == g) || !(v_next.grid == g) || !(rho_mid.grid == g) || !(p_mid.grid == g))
        throw Error("euler residual: mismatched grids");
    GridField gradp = gradient(p_mid);
    std::vector<GridField> dv;
    dv.reserve(static_cast<std::size_t>(g.dim) * static_cast<std::size_t>(g.dim));
    for (int c = 0; c < g.dim; ++c)
        for (int a = 0; a < g.dim; ++a) dv.push_back(derivative(v_mid, c, a));

    ResidualResult res;
    res.field = GridField(g, g.dim);
    const std::size_t nodes = g.node_count();
    for (std::size_t n = 0; n < nodes; ++n) {
        for (int c = 0; c < g.dim; ++c) {
            double adv = 0.0;
            for (int a = 0; a < g.dim; ++a)
                adv += v_mid.at(n, a) * dv[static_cast<std::size_t>(c * g.dim + a)].at(n);
            const double dvdt = (v_next.at(n, c) - v_prev.at(n, c)) / (2.0 * dt);
            res.field.at(n, c) = rho_mid.at(n) * (dvdt + adv) + gradp.at(n, c);
        }
    }
    res.norm = res.field.l2_norm();
    return res;
}

}  // namespace lagflow
