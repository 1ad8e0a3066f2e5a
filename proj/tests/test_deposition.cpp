#include <doctest.h>

#include <cmath>

#include "lagflow/deposition.hpp"
#include "lagflow/dynamics.hpp"
#include "lagflow/rng.hpp"

using namespace lagflow;

namespace {

FlowMap uniform_map(int n, int dim, Boundary b, const VectorFn& v0) {
    std::array<int, 3> shape{n, 1, 1};
    if (dim > 1) shape[1] = n;
    if (dim > 2) shape[2] = n;
    return build_lattice(dim, {0, 0, 0}, {1, 1, 1}, shape, b,
                         [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return xi; }, v0);
}

double total_mass(const GridField& rho) { return rho.integral(); }

double label_mass(const FlowMap& map) {
    double m = 0.0;
    for (std::size_t i = 0; i < map.size(); ++i) m += map.rho0[i] * map.label_volume(i);
    return m;
}

}  // namespace

TEST_CASE("identity deposition reproduces the uniform density") {
    for (DepositKernel k : {DepositKernel::CIC, DepositKernel::TSC}) {
        FlowMap map = uniform_map(32, 1, Boundary::Periodic, [](const Vec3&) { return Vec3(); });
        const Grid grid = grid1d(0.0, 1.0, 32, Boundary::Periodic);
        const GridField rho = deposit_density(map, grid, k);
        for (std::size_t n = 0; n < rho.values.size(); ++n)
            CHECK(rho.at(n) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("uniform stretch deposits the jacobian density") {
    FlowMap map = build_lattice(
        1, {0, 0, 0}, {1, 1, 1}, {64, 1, 1}, Boundary::Periodic,
        [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return Vec3(2.0 * xi[0]); },
        [](const Vec3&) { return Vec3(); });
    const Grid grid = grid1d(0.0, 2.0, 64, Boundary::Periodic);
    const GridField rho = deposit_density(map, grid);
    for (std::size_t n = 0; n < rho.values.size(); ++n)
        CHECK(rho.at(n) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("a single weighted point deposits its full mass") {
    FlowMap map = uniform_map(8, 1, Boundary::Periodic, [](const Vec3&) { return Vec3(); });
    std::vector<double> w(map.size(), 0.0);
    map.positions[3][0] += 0.37 * map.lattice.spacing(0);  // off-node
    w[3] = 2.5;
    for (DepositKernel k : {DepositKernel::CIC, DepositKernel::TSC}) {
        const Grid grid = grid1d(0.0, 1.0, 16, Boundary::Periodic);
        const GridField f = deposit_scalar(map, grid, w, k);
        CHECK(f.integral() == doctest::Approx(2.5).epsilon(1e-14));
    }
}

TEST_CASE("partition of unity holds for random points") {
    Rng rng(42);
    for (DepositKernel k : {DepositKernel::CIC, DepositKernel::TSC}) {
        for (Boundary b : {Boundary::Periodic, Boundary::Bounded}) {
            FlowMap map = uniform_map(4, 2, Boundary::Bounded, [](const Vec3&) { return Vec3(); });
            std::vector<double> w(map.size(), 0.0);
            w[5] = 1.0;
            for (int trial = 0; trial < 20; ++trial) {
                map.positions[5] = Vec3(rng.uniform(), rng.uniform());
                const Grid grid = grid2d(0.0, 1.0, 9, b);
                const GridField f = deposit_scalar(map, grid, w, k);
                double mass = 0.0;
                for (std::size_t n = 0; n < f.values.size(); ++n)
                    mass += f.at(n) * (b == Boundary::Periodic ? f.grid.cell_volume()
                                                               : f.grid.node_volume(f.grid.unflat(n)));
                CHECK(mass == doctest::Approx(1.0).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("mass is conserved for a randomly deformed configuration") {
    Rng rng(7);
    FlowMap map = build_lattice(
        2, {0, 0, 0}, {1, 1, 1}, {24, 24, 1}, Boundary::Periodic,
        [&](const Vec3& xi) { return 1.0 + 0.5 * std::sin(2.0 * pi * xi[0]) * std::cos(2.0 * pi * xi[1]); },
        [](const Vec3& xi) {
            return Vec3(xi[0] + 0.04 * std::sin(2.0 * pi * xi[1]),
                        xi[1] + 0.03 * std::sin(2.0 * pi * xi[0]));
        },
        [](const Vec3&) { return Vec3(); });
    const Grid grid = grid2d(0.0, 1.0, 20, Boundary::Periodic);
    for (DepositKernel k : {DepositKernel::CIC, DepositKernel::TSC}) {
        const GridField rho = deposit_density(map, grid, k);
        CHECK(total_mass(rho) == doctest::Approx(label_mass(map)).epsilon(1e-12));
        for (std::size_t n = 0; n < rho.values.size(); ++n) CHECK(rho.at(n) >= 0.0);
    }
}

TEST_CASE("particles outside a clamped grid are rejected") {
    FlowMap map = uniform_map(8, 1, Boundary::Periodic, [](const Vec3&) { return Vec3(); });
    map.positions[2][0] = 1.7;
    const Grid grid = grid1d(0.0, 1.0, 8, Boundary::Bounded);
    CHECK_THROWS_AS(deposit_density(map, grid), OutOfDomain);
}

TEST_CASE("momentum deposition") {
    SUBCASE("uniform velocity is reproduced") {
        FlowMap map = uniform_map(32, 1, Boundary::Periodic,
                                  [](const Vec3&) { return Vec3(0.7); });
        const Grid grid = grid1d(0.0, 1.0, 32, Boundary::Periodic);
        const MomentumFields f = deposit_momentum(map, grid);
        for (std::size_t n = 0; n < f.velocity.values.size(); ++n) {
            CHECK(f.velocity.at(n) == doctest::Approx(0.7).epsilon(1e-12));
            CHECK(f.vacuum_mask[n] == 0);
        }
    }
    SUBCASE("rigid rotation is reproduced to kernel order") {
        const double omega = 0.8;
        FlowMap map = build_lattice(
            2, {-0.5, -0.5, 0}, {0.5, 0.5, 1}, {48, 48, 1}, Boundary::Periodic,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return xi; },
            [=](const Vec3& xi) { return Vec3(-omega * xi[1], omega * xi[0]); });
        const Grid grid = grid2d(-0.5, 0.5, 48, Boundary::Periodic);
        const MomentumFields f = deposit_momentum(map, grid);
        double worst = 0.0;
        for (std::size_t n = 0; n < grid.node_count(); ++n) {
            const Vec3 x = grid.coord(n);
            if (std::abs(x[0]) > 0.4 || std::abs(x[1]) > 0.4) continue;  // wrap seam excluded
            worst = std::max(worst, std::abs(f.velocity.at(n, 0) + omega * x[1]));
            worst = std::max(worst, std::abs(f.velocity.at(n, 1) - omega * x[0]));
        }
        CHECK(worst < 1e-10);  // particles sit on nodes: CIC is exact here
    }
    SUBCASE("zero momenta give zero velocity") {
        FlowMap map = uniform_map(16, 1, Boundary::Periodic, [](const Vec3&) { return Vec3(); });
        const Grid grid = grid1d(0.0, 1.0, 16, Boundary::Periodic);
        const MomentumFields f = deposit_momentum(map, grid);
        for (std::size_t n = 0; n < f.velocity.values.size(); ++n) CHECK(f.velocity.at(n) == 0.0);
    }
}

namespace {

// deposited snapshots of a freely translating smooth blob; the particle
// lattice is grid-commensurate and offset half a cell at the central time so
// the deposition error stays second order and time-symmetric
double translation_residual(int n, double dt) {
    const double c = 0.3;
    const double h = 1.0 / n;
    FlowMap map = build_lattice(
        1, {0, 0, 0}, {1, 1, 1}, {n, 1, 1}, Boundary::Periodic,
        [](const Vec3& xi) { return 1.0 + 0.5 * std::sin(2.0 * pi * xi[0]); },
        [=](const Vec3& xi) { return Vec3(xi[0] + 0.5 * h); }, [=](const Vec3&) { return Vec3(c); });
    const Grid grid = grid1d(0.0, 1.0, n, Boundary::Periodic);
    const FlowMap prev = step_free(map, -dt);
    const FlowMap next = step_free(map, dt);
    const GridField rho_prev = deposit_density(prev, grid);
    const GridField rho_mid = deposit_density(map, grid);
    const GridField rho_next = deposit_density(next, grid);
    const MomentumFields mid = deposit_momentum(map, grid);
    return continuity_residual(rho_prev, rho_mid, rho_next, mid.velocity, dt).norm;
}

}  // namespace

TEST_CASE("continuity residual") {
    SUBCASE("static state gives zero") {
        const Grid grid = grid1d(0.0, 1.0, 16, Boundary::Periodic);
        GridField rho(grid, 1);
        rho.fill(1.0);
        GridField v(grid, 1);
        const auto res = continuity_residual(rho, rho, rho, v, 0.1);
        CHECK(res.norm == doctest::Approx(0.0));
    }
    SUBCASE("free translation converges at second order") {
        const double r1 = translation_residual(32, 0.02);
        const double r2 = translation_residual(64, 0.01);
        CHECK(r2 < r1 / std::pow(2.0, 1.9));
    }
    SUBCASE("corrupted density is detected") {
        const Grid grid = grid1d(0.0, 1.0, 16, Boundary::Periodic);
        GridField rho(grid, 1);
        rho.fill(1.0);
        GridField bad = rho;
        bad.at(7) = 3.0;
        GridField v(grid, 1);
        const auto res = continuity_residual(rho, rho, bad, v, 0.1);
        CHECK(res.norm > 1.0);
    }
    SUBCASE("mismatched grids are rejected") {
        GridField a(grid1d(0.0, 1.0, 16, Boundary::Periodic), 1);
        GridField b(grid1d(0.0, 1.0, 24, Boundary::Periodic), 1);
        GridField v(grid1d(0.0, 1.0, 16, Boundary::Periodic), 1);
        CHECK_THROWS_AS(continuity_residual(a, a, b, v, 0.1), Error);
    }
}

namespace {

// deposited snapshots of the exact 1D free expansion x = x0 (1 + t), sampled
// with the grid matched to the image lattice at the central time
double expansion_euler_residual(int n, double dt) {
    const double t0 = 0.2;
    const double h = 1.0 / n;
    FlowMap map = build_lattice(
        1, {-0.5, 0, 0}, {0.5, 1, 1}, {n, 1, 1}, Boundary::Periodic,
        [](const Vec3& xi) { return 1e-9 + std::pow(std::cos(pi * xi[0]), 4); },
        [=](const Vec3& xi) { return Vec3(xi[0] + 0.5 * h); },
        [=](const Vec3& xi) { return Vec3(xi[0] + 0.5 * h); });
    map = step_free(map, t0);
    const double half = 0.5 * (1.0 + t0);
    const Grid grid = grid1d(-half, half, n, Boundary::Periodic);
    const FlowMap prev = step_free(map, -dt);
    const FlowMap next = step_free(map, dt);
    const MomentumFields fp = deposit_momentum(prev, grid);
    const MomentumFields fm = deposit_momentum(map, grid);
    const MomentumFields fn = deposit_momentum(next, grid);
    GridField p(grid, 1);  // free flow: zero pressure
    return euler_residual(fp.velocity, fm.velocity, fn.velocity, fm.rho, p, dt).norm;
}

}  // namespace

TEST_CASE("euler residual") {
    SUBCASE("uniform rest state gives zero") {
        const Grid grid = grid1d(0.0, 1.0, 16, Boundary::Periodic);
        GridField rho(grid, 1);
        rho.fill(1.0);
        GridField v(grid, 1), p(grid, 1);
        CHECK(euler_residual(v, v, v, rho, p, 0.1).norm == doctest::Approx(0.0));
    }
    SUBCASE("free expansion converges at second order") {
        const double r1 = expansion_euler_residual(64, 0.01);
        const double r2 = expansion_euler_residual(128, 0.005);
        CHECK(r2 < r1 / std::pow(2.0, 1.9));
    }
}
