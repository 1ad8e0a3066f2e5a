#include "lagflow/c2.hpp"

#include <cmath>
#include <limits>

namespace lagflow {

namespace {

// centered difference of a complex node array along one axis
std::vector<cplx> cdiff(const Grid& g, const std::vector<cplx>& f, int axis) {
    std::vector<cplx> d(f.size());
    const auto sa = static_cast<std::size_t>(axis);
    const double h = g.spacing(axis);
    const int na = g.n[sa];
    const std::size_t nodes = g.node_count();
    for (std::size_t node = 0; node < nodes; ++node) {
        auto idx = g.unflat(node);
        const int i = idx[sa];
        auto ip = idx, im = idx;
        if (g.boundary == Boundary::Periodic) {
            ip[sa] = g.wrap(i + 1, axis);
            im[sa] = g.wrap(i - 1, axis);
            d[node] = (f[g.flat(ip)] - f[g.flat(im)]) / (2.0 * h);
        } else if (i == 0) {
            auto i1 = idx, i2 = idx;
            i1[sa] = 1;
            i2[sa] = 2;
            d[node] = (-3.0 * f[node] + 4.0 * f[g.flat(i1)] - f[g.flat(i2)]) / (2.0 * h);
        } else if (i == na - 1) {
            auto i1 = idx, i2 = idx;
            i1[sa] = na - 2;
            i2[sa] = na - 3;
            d[node] = (3.0 * f[node] - 4.0 * f[g.flat(i1)] + f[g.flat(i2)]) / (2.0 * h);
        } else {
            ip[sa] = i + 1;
            im[sa] = i - 1;
            d[node] = (f[g.flat(ip)] - f[g.flat(im)]) / (2.0 * h);
        }
    }
    return d;
}

double vacuum_eps(const ClebschDoublet& d) {
    // eps = 1e-8 * mean(sqrt(rho)); squared where it regularizes rho itself
    double mean_sqrt = 0.0;
    for (std::size_t n = 0; n < d.size(); ++n) mean_sqrt += std::sqrt(d.rho(n));
    mean_sqrt /= static_cast<double>(d.size());
    return 1e-8 * mean_sqrt;
}

// w_j = Im(conj(u) d_j u), the momentum-density part of the projection
std::vector<std::array<double, 3>> momentum_form(const ClebschDoublet& d) {
    const Grid& g = d.grid;
    std::vector<std::array<double, 3>> w(d.size(), {0.0, 0.0, 0.0});
    for (int a = 0; a < g.dim; ++a) {
        const std::vector<cplx> d1 = cdiff(g, d.u1, a);
        const std::vector<cplx> d2 = cdiff(g, d.u2, a);
        for (std::size_t n = 0; n < d.size(); ++n)
            w[n][static_cast<std::size_t>(a)] =
                std::imag(std::conj(d.u1[n]) * d1[n] + std::conj(d.u2[n]) * d2[n]);
    }
    return w;
}

}  // namespace

EulerProjection project_euler(const ClebschDoublet& d) {
    const Grid& g = d.grid;
    EulerProjection out;
    out.rho = GridField(g, 1, "mass/volume");
    out.velocity = GridField(g, g.dim, "length/time");
    out.vacuum_mask.assign(d.size(), 0);

    double mean_rho = 0.0;
    for (std::size_t n = 0; n < d.size(); ++n) {
        out.rho.at(n) = d.rho(n);
        mean_rho += d.rho(n);
    }
    mean_rho /= static_cast<double>(d.size());
    out.eps = 1e-12 * mean_rho;

    const auto w = momentum_form(d);
    for (std::size_t n = 0; n < d.size(); ++n) {
        const double r = out.rho.at(n);
        if (r > out.eps) {
            for (int a = 0; a < g.dim; ++a)
                out.velocity.at(n, a) = w[n][static_cast<std::size_t>(a)] / r;
        } else {
            out.vacuum_mask[n] = 1;
        }
    }
    return out;
}

ClebschAngles extract_angles(const ClebschDoublet& d) {
    const Grid& g = d.grid;
    ClebschAngles out;
    out.rho = GridField(g, 1);
    out.phi = GridField(g, 1);
    out.psi = GridField(g, 1);
    out.alpha = GridField(g, 1);
    out.gauge_degenerate.assign(d.size(), 0);

    const double tol = 1e-12;
    for (std::size_t n = 0; n < d.size(); ++n) {
        const double r = d.rho(n);
        out.rho.at(n) = r;
        const double m1 = std::abs(d.u1[n]);
        const double m2 = std::abs(d.u2[n]);
        out.alpha.at(n) = 2.0 * std::atan2(m2, m1);
        const bool deg = r <= 0.0 || m1 <= tol * std::sqrt(r) || m2 <= tol * std::sqrt(r);
        if (deg) {
            out.gauge_degenerate[n] = 1;
            const cplx lead = m1 >= m2 ? d.u1[n] : d.u2[n];
            out.phi.at(n) = 2.0 * std::arg(lead);
            out.psi.at(n) = 0.0;
        } else {
            const double a1 = std::arg(d.u1[n]);  // (phi - psi)/2
            const double a2 = std::arg(d.u2[n]);  // (phi + psi)/2
            out.phi.at(n) = a1 + a2;
            out.psi.at(n) = a2 - a1;
        }
    }

    // branch continuity along axis-0 sweeps
    auto unwrap_pass = [&](GridField& f) {
        const std::size_t nodes = g.node_count();
        for (std::size_t n = 0; n < nodes; ++n) {
            auto idx = g.unflat(n);
            if (idx[0] == 0) continue;
            auto prev = idx;
            prev[0] -= 1;
            double val = f.at(n);
            const double ref = f.at(prev);
            while (val - ref > pi) val -= 2.0 * pi;
            while (val - ref < -pi) val += 2.0 * pi;
            f.at(n) = val;
        }
    };
    unwrap_pass(out.phi);
    unwrap_pass(out.psi);
    return out;
}

ClebschDoublet doublet_from_angles(const ClebschAngles& a, double mass) {
    ClebschDoublet d(a.rho.grid, mass);
    for (std::size_t n = 0; n < d.size(); ++n) {
        const double sr = std::sqrt(a.rho.at(n));
        const double half_alpha = 0.5 * a.alpha.at(n);
        const cplx phase = std::polar(1.0, 0.5 * a.phi.at(n));
        d.u1[n] = sr * phase * std::polar(std::cos(half_alpha), -0.5 * a.psi.at(n));
        d.u2[n] = sr * phase * std::polar(std::sin(half_alpha), 0.5 * a.psi.at(n));
    }
    return d;
}

double c2_hamiltonian(const ClebschDoublet& d, const DensityPotential& V) {
    const Grid& g = d.grid;
    const auto w = momentum_form(d);
    const double eps2 = vacuum_eps(d) * vacuum_eps(d);
    double H = 0.0;
    for (std::size_t n = 0; n < d.size(); ++n) {
        const double r = d.rho(n);
        double w2 = 0.0;
        for (int a = 0; a < g.dim; ++a)
            w2 += w[n][static_cast<std::size_t>(a)] * w[n][static_cast<std::size_t>(a)];
        const double wt = g.boundary == Boundary::Periodic ? g.cell_volume() : g.node_volume(g.unflat(n));
        H += (d.mass * w2 / (2.0 * (r + eps2)) + V.value(r)) * wt;
    }
    return H;
}

double c2_hamiltonian_euler(const ClebschDoublet& d, const DensityPotential& V) {
    const Grid& g = d.grid;
    const EulerProjection p = project_euler(d);
    double H = 0.0;
    for (std::size_t n = 0; n < d.size(); ++n) {
        double v2 = 0.0;
        for (int a = 0; a < g.dim; ++a) v2 += p.velocity.at(n, a) * p.velocity.at(n, a);
        const double wt = g.boundary == Boundary::Periodic ? g.cell_volume() : g.node_volume(g.unflat(n));
        H += (0.5 * d.mass * p.rho.at(n) * v2 + V.value(p.rho.at(n))) * wt;
    }
    return H;
}

namespace {

struct C2State {
    std::vector<cplx> u1, u2;
};

// udot_a = -1/2 [ v_j d_j u_a + d_j(v_j u_a) ] - (i/m)(V'(rho) - m v^2/2) u_a,
// the analytic variation of the gradient-form Hamiltonian
void c2_rhs(const Grid& g, double mass, const DensityPotential& V, double eps2,
            const C2State& s, C2State& dot, double& min_rho) {
    const std::size_t nodes = g.node_count();
    std::vector<double> rho(nodes);
    min_rho = std::numeric_limits<double>::max();
    for (std::size_t n = 0; n < nodes; ++n) {
        rho[n] = std::norm(s.u1[n]) + std::norm(s.u2[n]);
        min_rho = std::min(min_rho, rho[n]);
    }

    std::vector<std::array<double, 3>> v(nodes, {0.0, 0.0, 0.0});
    std::vector<double> v2(nodes, 0.0);
    for (int a = 0; a < g.dim; ++a) {
        const std::vector<cplx> d1 = cdiff(g, s.u1, a);
        const std::vector<cplx> d2 = cdiff(g, s.u2, a);
        for (std::size_t n = 0; n < nodes; ++n) {
            const double w = std::imag(std::conj(s.u1[n]) * d1[n] + std::conj(s.u2[n]) * d2[n]);
            v[n][static_cast<std::size_t>(a)] = w / (rho[n] + eps2);
        }
    }
    for (std::size_t n = 0; n < nodes; ++n)
        for (int a = 0; a < g.dim; ++a)
            v2[n] += v[n][static_cast<std::size_t>(a)] * v[n][static_cast<std::size_t>(a)];

    dot.u1.assign(nodes, cplx(0.0));
    dot.u2.assign(nodes, cplx(0.0));

    std::vector<cplx> prod(nodes);
    for (int a = 0; a < g.dim; ++a) {
        const auto sa = static_cast<std::size_t>(a);
        const std::vector<cplx> d1 = cdiff(g, s.u1, a);
        const std::vector<cplx> d2 = cdiff(g, s.u2, a);
        for (std::size_t n = 0; n < nodes; ++n) {
            dot.u1[n] -= 0.5 * v[n][sa] * d1[n];
            dot.u2[n] -= 0.5 * v[n][sa] * d2[n];
        }
        for (std::size_t n = 0; n < nodes; ++n) prod[n] = v[n][sa] * s.u1[n];
        {
            const std::vector<cplx> dp = cdiff(g, prod, a);
            for (std::size_t n = 0; n < nodes; ++n) dot.u1[n] -= 0.5 * dp[n];
        }
        for (std::size_t n = 0; n < nodes; ++n) prod[n] = v[n][sa] * s.u2[n];
        {
            const std::vector<cplx> dp = cdiff(g, prod, a);
            for (std::size_t n = 0; n < nodes; ++n) dot.u2[n] -= 0.5 * dp[n];
        }
    }
    for (std::size_t n = 0; n < nodes; ++n) {
        const cplx phase = cplx(0.0, -1.0 / mass) * (V.deriv(rho[n]) - 0.5 * mass * v2[n]);
        dot.u1[n] += phase * s.u1[n];
        dot.u2[n] += phase * s.u2[n];
    }
}

}  // namespace

C2StepReport c2_step(ClebschDoublet& d, const DensityPotential& V, double dt) {
    const Grid& g = d.grid;
    const double eps = vacuum_eps(d);
    const double eps2 = eps * eps;
    const std::size_t nodes = g.node_count();

    C2State s{d.u1, d.u2};
    C2State k1, k2, k3, k4, tmp;
    double mr1 = 0, mr2 = 0, mr3 = 0, mr4 = 0;

    auto blend = [&](const C2State& base, const C2State& dot, double h, C2State& out) {
        out.u1.resize(nodes);
        out.u2.resize(nodes);
        for (std::size_t n = 0; n < nodes; ++n) {
            out.u1[n] = base.u1[n] + h * dot.u1[n];
            out.u2[n] = base.u2[n] + h * dot.u2[n];
        }
    };

    c2_rhs(g, d.mass, V, eps2, s, k1, mr1);
    blend(s, k1, 0.5 * dt, tmp);
    c2_rhs(g, d.mass, V, eps2, tmp, k2, mr2);
    blend(s, k2, 0.5 * dt, tmp);
    c2_rhs(g, d.mass, V, eps2, tmp, k3, mr3);
    blend(s, k3, dt, tmp);
    c2_rhs(g, d.mass, V, eps2, tmp, k4, mr4);

    for (std::size_t n = 0; n < nodes; ++n) {
        d.u1[n] += dt / 6.0 * (k1.u1[n] + 2.0 * k2.u1[n] + 2.0 * k3.u1[n] + k4.u1[n]);
        d.u2[n] += dt / 6.0 * (k1.u2[n] + 2.0 * k2.u2[n] + 2.0 * k3.u2[n] + k4.u2[n]);
    }

    C2StepReport rep;
    rep.min_rho = std::min(std::min(mr1, mr2), std::min(mr3, mr4));
    rep.vacuum_flagged = rep.min_rho < eps2;
    return rep;
}

U2Charges u2_charges(const ClebschDoublet& d) {
    const Grid& g = d.grid;
    U2Charges c;
    for (std::size_t n = 0; n < d.size(); ++n) {
        const double wt = g.boundary == Boundary::Periodic ? g.cell_volume() : g.node_volume(g.unflat(n));
        const cplx cross = std::conj(d.u1[n]) * d.u2[n];
        c.t0 += 0.5 * d.rho(n) * wt;
        c.t1 += std::real(cross) * wt;
        c.t2 += std::imag(cross) * wt;
        c.t3 += 0.5 * (std::norm(d.u1[n]) - std::norm(d.u2[n])) * wt;
    }
    return c;
}

namespace {

double det4(const std::array<std::array<double, 4>, 4>& m) {
    double det = 0.0;
    for (int c = 0; c < 4; ++c) {
        double sub[3][3];
        for (int i = 1; i < 4; ++i) {
            int jj = 0;
            for (int j = 0; j < 4; ++j) {
                if (j == c) continue;
                sub[i - 1][jj++] = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            }
        }
        const double minor = sub[0][0] * (sub[1][1] * sub[2][2] - sub[1][2] * sub[2][1]) -
                             sub[0][1] * (sub[1][0] * sub[2][2] - sub[1][2] * sub[2][0]) +
                             sub[0][2] * (sub[1][0] * sub[2][1] - sub[1][1] * sub[2][0]);
        det += (c % 2 == 0 ? 1.0 : -1.0) * m[0][static_cast<std::size_t>(c)] * minor;
    }
    return det;
}

}  // namespace

double hopf_invariant(const ClebschDoublet& d) {
    const Grid& g = d.grid;
    if (g.dim != 3) throw Error("hopf invariant needs a 3D grid");
    const std::size_t nodes = g.node_count();

    std::vector<std::array<double, 4>> F(nodes);
    for (std::size_t n = 0; n < nodes; ++n) {
        const double r = d.rho(n);
        if (!(r > 0.0)) throw VacuumError("hopf invariant undefined at a vacuum node");
        const double s = 1.0 / std::sqrt(r);
        F[n] = {s * d.u1[n].real(), s * d.u1[n].imag(), s * d.u2[n].real(), s * d.u2[n].imag()};
    }

    auto diff = [&](int comp, int axis) {
        std::vector<double> out(nodes);
        const auto sa = static_cast<std::size_t>(axis);
        const auto sc = static_cast<std::size_t>(comp);
        const double h = g.spacing(axis);
        const int na = g.n[sa];
        for (std::size_t node = 0; node < nodes; ++node) {
            auto idx = g.unflat(node);
            const int i = idx[sa];
            auto ip = idx, im = idx;
            if (g.boundary == Boundary::Periodic) {
                ip[sa] = g.wrap(i + 1, axis);
                im[sa] = g.wrap(i - 1, axis);
            } else if (i == 0) {
                ip[sa] = 1;
                out[node] = (F[g.flat(ip)][sc] - F[node][sc]) / h;
                continue;
            } else if (i == na - 1) {
                im[sa] = na - 2;
                out[node] = (F[node][sc] - F[g.flat(im)][sc]) / h;
                continue;
            } else {
                ip[sa] = i + 1;
                im[sa] = i - 1;
            }
            out[node] = (F[g.flat(ip)][sc] - F[g.flat(im)][sc]) / (2.0 * h);
        }
        return out;
    };

    std::array<std::array<std::vector<double>, 3>, 4> dF;
    for (int c = 0; c < 4; ++c)
        for (int a = 0; a < 3; ++a)
            dF[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)] = diff(c, a);

    double q = 0.0;
    for (std::size_t n = 0; n < nodes; ++n) {
        std::array<std::array<double, 4>, 4> m{};
        for (int c = 0; c < 4; ++c) {
            m[static_cast<std::size_t>(c)][0] = F[n][static_cast<std::size_t>(c)];
            for (int a = 0; a < 3; ++a)
                m[static_cast<std::size_t>(c)][static_cast<std::size_t>(a + 1)] =
                    dF[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)][n];
        }
        const double wt = g.boundary == Boundary::Periodic ? g.cell_volume() : g.node_volume(g.unflat(n));
        q += det4(m) * wt;
    }
    return q / (2.0 * pi * pi);
}

ClebschDoublet hopf_doublet(int n, int p, int q, double scale) {
    // periodic cell-centered box over (-1,1)^3; each axis maps to R through
    // x = scale * tan(pi u / 2), so all of R^3 is covered and the field is
    // smooth across the wrap (every face maps to the point at infinity)
    const double h = 2.0 / n;
    const double lo = -1.0 + 0.5 * h;
    Grid g(3, {lo, lo, lo}, {lo + 2.0, lo + 2.0, lo + 2.0}, {n, n, n}, Boundary::Periodic);
    ClebschDoublet d(g, 1.0);
    const std::size_t nodes = g.node_count();
    for (std::size_t node = 0; node < nodes; ++node) {
        const Vec3 u = g.coord(node);
        const double X = scale * std::tan(0.5 * pi * u[0]);
        const double Y = scale * std::tan(0.5 * pi * u[1]);
        const double Z = scale * std::tan(0.5 * pi * u[2]);
        const double r2 = X * X + Y * Y + Z * Z;
        const double den = 1.0 + r2;
        cplx z1(2.0 * X / den, 2.0 * Y / den);
        cplx z2(2.0 * Z / den, (r2 - 1.0) / den);
        if (p != 1) z1 = std::abs(z1) * std::polar(1.0, p * std::arg(z1));
        if (q != 1) z2 = std::abs(z2) * std::polar(1.0, q * std::arg(z2));
        d.u1[node] = z1;
        d.u2[node] = z2;
    }
    return d;
}

double toroidal_clebsch_helicity(const std::function<double(double, double)>& alpha,
                                 const std::function<double(double, double)>& beta, double k,
                                 const Grid& rz_grid) {
    if (rz_grid.dim != 2) throw Error("toroidal helicity needs a 2D (r,z) grid");
    // beta winds around the core circle, so its raw values carry a branch
    // cut; differentiate through cos/sin instead: dbeta = cb d(sb) - sb d(cb)
    GridField ca(rz_grid, 1), cb(rz_grid, 1), sb(rz_grid, 1);
    const std::size_t nodes = rz_grid.node_count();
    for (std::size_t n = 0; n < nodes; ++n) {
        const Vec3 x = rz_grid.coord(n);
        ca.at(n) = std::cos(alpha(x[0], x[1]));
        const double b = beta(x[0], x[1]);
        cb.at(n) = std::cos(b);
        sb.at(n) = std::sin(b);
    }
    GridField dca_r = derivative(ca, 0, 0), dca_z = derivative(ca, 0, 1);
    GridField dcb_r = derivative(cb, 0, 0), dcb_z = derivative(cb, 0, 1);
    GridField dsb_r = derivative(sb, 0, 0), dsb_z = derivative(sb, 0, 1);
    double acc = 0.0;
    for (std::size_t n = 0; n < nodes; ++n) {
        const double wt = rz_grid.boundary == Boundary::Periodic
                              ? rz_grid.cell_volume()
                              : rz_grid.node_volume(rz_grid.unflat(n));
        const double db_r = cb.at(n) * dsb_r.at(n) - sb.at(n) * dcb_r.at(n);
        const double db_z = cb.at(n) * dsb_z.at(n) - sb.at(n) * dcb_z.at(n);
        acc += (dca_r.at(n) * db_z - dca_z.at(n) * db_r) * wt;
    }
    return 2.0 * pi * k * acc;
}

double winding_number_1d(const std::vector<double>& p, const std::vector<double>& q, double dx) {
    if (p.size() != q.size() || p.size() < 3) throw Error("winding number needs matched arrays");
    double acc = 0.0;
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
        const double dp = (p[ip] - p[im]) / (2.0 * dx);
        const double dq = (q[ip] - q[im]) / (2.0 * dx);
        const double mod2 = p[i] * p[i] + q[i] * q[i];
        if (mod2 > 0.0) acc += (p[i] * dq - dp * q[i]) / mod2 * dx;
    }
    return acc / (2.0 * pi);
}

}  // namespace lagflow
