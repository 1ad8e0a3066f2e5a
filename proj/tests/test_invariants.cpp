#include <doctest.h>

#include <cmath>

#include "lagflow/dynamics.hpp"
#include "lagflow/invariants.hpp"
#include "lagflow/rng.hpp"

using namespace lagflow;

namespace {

FlowMap smooth_2d_map(int n, double amp, const VectorFn& v0) {
    return build_lattice(
        2, {0, 0, 0}, {1, 1, 1}, {n, n, 1}, Boundary::Periodic,
        [](const Vec3&) { return 1.0; },
        [=](const Vec3& xi) {
            return Vec3(xi[0] + amp * std::sin(2.0 * pi * xi[1]),
                        xi[1] + amp * std::cos(2.0 * pi * xi[0]));
        },
        v0);
}

}  // namespace

TEST_CASE("lagrangian current") {
    SUBCASE("identity map returns the momenta") {
        FlowMap map = build_lattice(
            2, {0, 0, 0}, {1, 1, 1}, {16, 16, 1}, Boundary::Periodic,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return xi; },
            [](const Vec3& xi) { return Vec3(std::sin(2.0 * pi * xi[0]), xi[1]); });
        const std::vector<Vec3> J = lagrangian_current(map);
        for (std::size_t i = 0; i < map.size(); ++i) {
            CHECK(J[i][0] == doctest::Approx(map.momenta[i][0]).epsilon(1e-12));
            CHECK(J[i][1] == doctest::Approx(map.momenta[i][1]).epsilon(1e-12));
        }
    }
    SUBCASE("linear stretch scales the current") {
        FlowMap map = build_lattice(
            1, {0, 0, 0}, {1, 1, 1}, {16, 1, 1}, Boundary::Bounded,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return Vec3(2.0 * xi[0]); },
            [](const Vec3&) { return Vec3(0.7); });
        const std::vector<Vec3> J = lagrangian_current(map);
        for (std::size_t i = 0; i < map.size(); ++i)
            CHECK(J[i][0] == doctest::Approx(2.0 * map.momenta[i][0]).epsilon(1e-12));
    }
    SUBCASE("free flow changes J only by a label gradient") {
        FlowMap map = smooth_2d_map(48, 0.02, [](const Vec3& xi) {
            return Vec3(std::sin(2.0 * pi * xi[1]), std::cos(2.0 * pi * xi[0]));
        });
        const std::vector<Vec3> J0 = lagrangian_current(map);
        const FlowMap later = step_free(map, 0.25);
        const std::vector<Vec3> J1 = lagrangian_current(later);
        // the curl of the difference vanishes to discretization accuracy
        const Grid& lat = map.lattice;
        const double h = lat.spacing(0);
        double worst = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < map.size(); ++i) {
            const auto idx = lat.unflat(i);
            auto xp = idx, xm = idx, yp = idx, ym = idx;
            xp[0] = lat.wrap(idx[0] + 1, 0);
            xm[0] = lat.wrap(idx[0] - 1, 0);
            yp[1] = lat.wrap(idx[1] + 1, 1);
            ym[1] = lat.wrap(idx[1] - 1, 1);
            auto dJ = [&](const std::array<int, 3>& id, int c) {
                const std::size_t f = lat.flat(id);
                return J1[f][c] - J0[f][c];
            };
            const double curl =
                (dJ(xp, 1) - dJ(xm, 1)) / (2.0 * h) - (dJ(yp, 0) - dJ(ym, 0)) / (2.0 * h);
            worst = std::max(worst, std::abs(curl));
            scale = std::max(scale, std::abs(J1[i][0] - J0[i][0]) / h);
        }
        CHECK(worst < 2e-2 * scale);
    }
}

TEST_CASE("vorticity") {
    SUBCASE("gradient momenta carry no vorticity") {
        FlowMap map = build_lattice(
            2, {0, 0, 0}, {1, 1, 1}, {32, 32, 1}, Boundary::Periodic,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return xi; },
            [](const Vec3& xi) {
                // v = grad phi with phi = sin(2 pi x) sin(2 pi y)
                return Vec3(2.0 * pi * std::cos(2.0 * pi * xi[0]) * std::sin(2.0 * pi * xi[1]),
                            2.0 * pi * std::sin(2.0 * pi * xi[0]) * std::cos(2.0 * pi * xi[1]));
            });
        const Vorticity w = vorticity_vector(map);
        CHECK(w.max_abs() < 0.15);  // O(h^2) of an O(40) field
    }
    SUBCASE("rigid rotation gives exactly 2 m Omega") {
        const double omega = 0.6;
        FlowMap map = build_lattice(
            2, {-0.5, -0.5, 0}, {0.5, 0.5, 1}, {24, 24, 1}, Boundary::Periodic,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return xi; },
            [=](const Vec3& xi) { return Vec3(-omega * xi[1], omega * xi[0]); });
        const Vorticity w = vorticity_vector(map);
        // the edge form is exact for linear momenta away from the wrap seam
        const Grid& lat = map.lattice;
        for (int i = 2; i < 20; ++i)
            for (int j = 2; j < 20; ++j)
                CHECK(w.planes[0][lat.flat({i, j, 0})] == doctest::Approx(2.0 * omega).epsilon(1e-12));
    }
    SUBCASE("free flow conserves R to roundoff") {
        FlowMap map = smooth_2d_map(32, 0.03, [](const Vec3& xi) {
            return Vec3(std::sin(2.0 * pi * xi[1]), std::sin(2.0 * pi * xi[0]));
        });
        const Vorticity w0 = vorticity_vector(map);
        FlowMap later = map;
        for (int s = 0; s < 50; ++s) later = step_free(later, 0.01);
        const Vorticity w1 = vorticity_vector(later);
        double worst = 0.0;
        for (std::size_t p = 0; p < w0.planes[0].size(); ++p)
            worst = std::max(worst, std::abs(w1.planes[0][p] - w0.planes[0][p]));
        CHECK(worst < 1e-12);
    }
    SUBCASE("1D lattices are rejected") {
        FlowMap map = build_lattice(
            1, {0, 0, 0}, {1, 1, 1}, {8, 1, 1}, Boundary::Periodic,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return xi; },
            [](const Vec3&) { return Vec3(); });
        CHECK_THROWS_AS(vorticity_vector(map), Error);
    }
}

TEST_CASE("circulation") {
    SUBCASE("gradient flow has none") {
        FlowMap map = build_lattice(
            2, {0, 0, 0}, {1, 1, 1}, {48, 48, 1}, Boundary::Periodic,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return xi; },
            [](const Vec3& xi) {
                return Vec3(2.0 * pi * std::cos(2.0 * pi * xi[0]) * std::sin(2.0 * pi * xi[1]),
                            2.0 * pi * std::sin(2.0 * pi * xi[0]) * std::cos(2.0 * pi * xi[1]));
            });
        const MaterialLoop loop = MaterialLoop::circle(Vec3(0.5, 0.5), 0.2, 64);
        CHECK(std::abs(circulation(map, loop)) < 2e-3);
    }
    SUBCASE("rigid rotation matches the analytic line integral") {
        const double omega = 0.9, radius = 0.3;
        FlowMap map = build_lattice(
            2, {-0.5, -0.5, 0}, {0.5, 0.5, 1}, {32, 32, 1}, Boundary::Periodic,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return xi; },
            [=](const Vec3& xi) { return Vec3(-omega * xi[1], omega * xi[0]); });
        const int markers = 64;
        const MaterialLoop loop = MaterialLoop::circle(Vec3(0.0, 0.0), radius, markers);
        const double T = circulation(map, loop);
        // the trapezoid rule on the polygon is exact for a linear field
        const double theta = 2.0 * pi / markers;
        const double polygon = 2.0 * omega * 0.5 * markers * radius * radius * std::sin(theta);
        CHECK(T == doctest::Approx(polygon).epsilon(1e-12));
        CHECK(T == doctest::Approx(2.0 * pi * omega * radius * radius).epsilon(2e-3));
    }
    SUBCASE("loops need at least 8 markers") {
        CHECK_THROWS_AS(MaterialLoop::circle(Vec3(0, 0), 0.1, 4), ConstructionError);
    }
}

TEST_CASE("2D casimirs") {
    SUBCASE("I_0 is the particle number") {
        const Grid g = grid2d(0.0, 1.0, 32, Boundary::Periodic);
        GridField rho(g, 1), v(g, 2);
        for (std::size_t n = 0; n < g.node_count(); ++n) {
            const Vec3 x = g.coord(n);
            rho.at(n) = 1.0 + 0.3 * std::sin(2.0 * pi * x[0]);
            v.at(n, 0) = std::cos(2.0 * pi * x[1]);
        }
        CHECK(casimir_In(rho, v, 0) == doctest::Approx(rho.integral()).epsilon(1e-12));
    }
    SUBCASE("rigid rotation gives (2 Omega)^n times the area") {
        const double omega = 0.4;
        const Grid g = grid2d(-0.5, 0.5, 24, Boundary::Bounded);
        GridField rho(g, 1), v(g, 2);
        rho.fill(1.0);
        for (std::size_t n = 0; n < g.node_count(); ++n) {
            const Vec3 x = g.coord(n);
            v.at(n, 0) = -omega * x[1];
            v.at(n, 1) = omega * x[0];
        }
        for (int order = 1; order <= 3; ++order)
            CHECK(casimir_In(rho, v, order) ==
                  doctest::Approx(std::pow(2.0 * omega, order)).epsilon(1e-10));
    }
    SUBCASE("vacuum inside the vorticity support is flagged") {
        const Grid g = grid2d(-0.5, 0.5, 16, Boundary::Bounded);
        GridField rho(g, 1), v(g, 2);
        for (std::size_t n = 0; n < g.node_count(); ++n) {
            const Vec3 x = g.coord(n);
            v.at(n, 0) = -x[1];
            v.at(n, 1) = x[0];
        }
        CHECK_THROWS_AS(casimir_In(rho, v, 2), VacuumError);
    }
    SUBCASE("3D fields are rejected") {
        const Grid g = grid3d(0.0, 1.0, 4, Boundary::Periodic);
        GridField rho(g, 1), v(g, 3);
        CHECK_THROWS_AS(casimir_In(rho, v, 1), Error);
    }
}

TEST_CASE("K integrals") {
    SUBCASE("zero vorticity gives zero") {
        FlowMap map = build_lattice(
            3, {0, 0, 0}, {1, 1, 1}, {12, 12, 12}, Boundary::Periodic,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return xi; },
            [](const Vec3&) { return Vec3(0.3, 0.2, 0.1); });
        const KIntegrals K = k_integrals(map);
        CHECK(K.first.norm() < 1e-12);
        for (double kk : K.second) CHECK(std::abs(kk) < 1e-12);
    }
    SUBCASE("first-order integrals vanish on a periodic lattice") {
        FlowMap map = build_lattice(
            3, {0, 0, 0}, {1, 1, 1}, {12, 12, 12}, Boundary::Periodic,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return xi; },
            [](const Vec3& xi) {
                return Vec3(std::sin(2.0 * pi * xi[1]), std::sin(2.0 * pi * xi[2]),
                            std::sin(2.0 * pi * xi[0]));
            });
        const KIntegrals K = k_integrals(map);
        CHECK(K.first.norm() < 1e-12);  // plaquette circulations telescope
    }
    SUBCASE("free flow conserves the second-order tensor to roundoff") {
        FlowMap map = build_lattice(
            3, {0, 0, 0}, {1, 1, 1}, {12, 12, 12}, Boundary::Periodic,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return xi; },
            [](const Vec3& xi) {
                return Vec3(std::sin(2.0 * pi * xi[1]), std::cos(2.0 * pi * xi[2]),
                            std::sin(2.0 * pi * xi[0]));
            });
        const KIntegrals K0 = k_integrals(map);
        FlowMap later = map;
        for (int s = 0; s < 40; ++s) later = step_free(later, 0.005);
        const KIntegrals K1 = k_integrals(later);
        for (int c = 0; c < 9; ++c)
            CHECK(K1.second[static_cast<std::size_t>(c)] ==
                  doctest::Approx(K0.second[static_cast<std::size_t>(c)]).epsilon(1e-10));
    }
    SUBCASE("2D lattices are rejected") {
        FlowMap map = smooth_2d_map(8, 0.0, [](const Vec3&) { return Vec3(); });
        CHECK_THROWS_AS(k_integrals(map), Error);
    }
}

TEST_CASE("helicity") {
    SUBCASE("gradient fields have none") {
        const Grid g = grid3d(0.0, 2.0 * pi, 16, Boundary::Periodic);
        GridField v(g, 3);
        for (std::size_t n = 0; n < g.node_count(); ++n) {
            const Vec3 x = g.coord(n);
            v.at(n, 0) = std::cos(x[0]);
            v.at(n, 1) = std::cos(x[1]);
            v.at(n, 2) = std::cos(x[2]);
        }
        CHECK(std::abs(helicity(v)) < 1e-12);
    }
    SUBCASE("a Beltrami field scores its exact discrete value") {
        const int n = 24;
        const Grid g = grid3d(0.0, 2.0 * pi, n, Boundary::Periodic);
        const double h = g.spacing(0);
        GridField v(g, 3);
        for (std::size_t nd = 0; nd < g.node_count(); ++nd) {
            const Vec3 x = g.coord(nd);
            v.at(nd, 1) = std::sin(x[0]);
            v.at(nd, 2) = std::cos(x[0]);
        }
        const double q = helicity(v);
        const double vol = std::pow(2.0 * pi, 3);
        // centered differences scale the curl by sin(h)/h
        CHECK(q == doctest::Approx(vol * std::sin(h) / h).epsilon(1e-12));
        CHECK(q == doctest::Approx(vol).epsilon(h * h / 4.0));
    }
    SUBCASE("label form agrees with the grid form on an identity map") {
        const int n = 24;
        FlowMap map = build_lattice(
            3, {0, 0, 0}, {2.0 * pi, 2.0 * pi, 2.0 * pi}, {n, n, n}, Boundary::Periodic,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return xi; },
            [](const Vec3& xi) { return Vec3(0.0, std::sin(xi[0]), std::cos(xi[0])); });
        const double q = helicity_lagrangian(map);
        CHECK(q == doctest::Approx(std::pow(2.0 * pi, 3)).epsilon(2e-2));
    }
}

TEST_CASE("canonical fields") {
    SUBCASE("identity map with uniform momenta") {
        const int n = 16;
        FlowMap map = build_lattice(
            2, {0, 0, 0}, {1, 1, 1}, {n, n, 1}, Boundary::Periodic,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return xi; },
            [](const Vec3&) { return Vec3(0.4, -0.2); });
        const Grid grid = grid2d(0.0, 1.0, n, Boundary::Periodic);
        const CanonicalFields cf = canonical_fields(map, grid);
        for (std::size_t nd = 0; nd < grid.node_count(); ++nd) {
            CHECK(cf.l.at(nd, 0) == doctest::Approx(0.4).epsilon(1e-12));
            CHECK(cf.pi.at(nd, 0) == doctest::Approx(-0.4).epsilon(1e-12));
            CHECK(cf.xi.at(nd, 0) == doctest::Approx(grid.coord(nd)[0]).epsilon(1e-10));
            CHECK(cf.metric.at(nd, 0) == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(cf.metric.at(nd, 1) == doctest::Approx(0.0).epsilon(1e-10));
        }
        CHECK(cf.reconstruction_residual < 1e-10);
        CHECK(cf.metric_density_error < 1e-10);
    }
    SUBCASE("uniform stretch satisfies the metric-density identity") {
        const int n = 16;
        FlowMap map = build_lattice(
            1, {0, 0, 0}, {1, 1, 1}, {n, 1, 1}, Boundary::Periodic,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return Vec3(2.0 * xi[0]); },
            [](const Vec3&) { return Vec3(0.1); });
        const Grid grid = grid1d(0.0, 2.0, n, Boundary::Periodic);
        const CanonicalFields cf = canonical_fields(map, grid);
        for (std::size_t nd = 0; nd < grid.node_count(); ++nd) {
            CHECK(cf.rho.at(nd) == doctest::Approx(0.5).epsilon(1e-10));
            CHECK(cf.metric.at(nd, 0) == doctest::Approx(4.0).epsilon(1e-10));
        }
        CHECK(cf.metric_density_error < 1e-10);  // det g rho^2 = rho0^2
    }
    SUBCASE("random smooth map passes the reconstruction identity") {
        const int n = 48;
        Rng rng(2024);
        const double a1 = 6e-5 * rng.uniform(0.5, 1.0), a2 = 6e-5 * rng.uniform(0.5, 1.0);
        const double p1 = rng.uniform(0.0, 2.0 * pi), p2 = rng.uniform(0.0, 2.0 * pi);
        FlowMap map = build_lattice(
            2, {0, 0, 0}, {1, 1, 1}, {n, n, 1}, Boundary::Periodic,
            [](const Vec3&) { return 1.0; },
            [=](const Vec3& xi) {
                return Vec3(xi[0] + a1 * std::sin(2.0 * pi * xi[1] + p1),
                            xi[1] + a2 * std::sin(2.0 * pi * xi[0] + p2));
            },
            [](const Vec3& xi) { return Vec3(std::sin(2.0 * pi * xi[1]), std::cos(2.0 * pi * xi[0])); });
        const Grid grid = grid2d(0.0, 1.0, n, Boundary::Periodic);
        CanonicalOptions opts;
        opts.scheme = DerivativeScheme::Spectral;
        const CanonicalFields cf = canonical_fields(map, grid, opts);
        CHECK(cf.reconstruction_residual < 1e-6);
        CHECK(cf.metric_density_error < 1e-6);
    }
}
