#include <doctest.h>

#include <cmath>

#include "lagflow/deposition.hpp"
#include "lagflow/label_space.hpp"
#include "lagflow/rng.hpp"

using namespace lagflow;

namespace {

FlowMap sinusoidal_1d(int n, double amplitude = 0.1) {
    return build_lattice(
        1, {0, 0, 0}, {1, 1, 1}, {n, 1, 1}, Boundary::Periodic,
        [](const Vec3&) { return 1.0; },
        [=](const Vec3& xi) { return Vec3(xi[0] + amplitude * std::sin(2.0 * pi * xi[0])); },
        [](const Vec3&) { return Vec3(); });
}

}  // namespace

TEST_CASE("identity lattice reproduces nodes with zero momenta") {
    FlowMap map = build_lattice(
        1, {0, 0, 0}, {1, 1, 1}, {16, 1, 1}, Boundary::Bounded,
        [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return xi; },
        [](const Vec3&) { return Vec3(); });
    REQUIRE(map.size() == 16);
    for (std::size_t i = 0; i < map.size(); ++i) {
        CHECK(map.positions[i][0] == doctest::Approx(map.lattice.coord(i)[0]));
        CHECK(map.momenta[i][0] == 0.0);
    }
    CHECK(map.lattice.spacing(0) == doctest::Approx(1.0 / 15.0));
}

TEST_CASE("linear map has constant deformation determinant") {
    FlowMap map = build_lattice(
        1, {0, 0, 0}, {1, 1, 1}, {16, 1, 1}, Boundary::Bounded,
        [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return Vec3(2.0 * xi[0]); },
        [](const Vec3&) { return Vec3(); });
    for (std::size_t i = 0; i < map.size(); ++i)
        CHECK(deformation_matrix(map, i).det() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("2D diagonal stretch") {
    FlowMap map = build_lattice(
        2, {0, 0, 0}, {1, 1, 1}, {12, 12, 1}, Boundary::Bounded,
        [](const Vec3&) { return 1.0; },
        [](const Vec3& xi) { return Vec3(2.0 * xi[0], 3.0 * xi[1]); },
        [](const Vec3&) { return Vec3(); });
    const Mat3 A = deformation_matrix(map, map.lattice.flat({5, 5, 0}));
    CHECK(A(0, 0) == doctest::Approx(2.0));
    CHECK(A(1, 1) == doctest::Approx(3.0));
    CHECK(A(0, 1) == doctest::Approx(0.0));
    CHECK(A.det() == doctest::Approx(6.0));
}

TEST_CASE("orientation reversal is rejected") {
    CHECK_THROWS_AS(build_lattice(
                        1, {0, 0, 0}, {1, 1, 1}, {16, 1, 1}, Boundary::Bounded,
                        [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return Vec3(-xi[0]); },
                        [](const Vec3&) { return Vec3(); }),
                    ConstructionError);
}

TEST_CASE("non-positive rho0 is rejected") {
    CHECK_THROWS_AS(build_lattice(
                        1, {0, 0, 0}, {1, 1, 1}, {16, 1, 1}, Boundary::Bounded,
                        [](const Vec3&) { return 0.0; }, [](const Vec3& xi) { return xi; },
                        [](const Vec3&) { return Vec3(); }),
                    ConstructionError);
}

TEST_CASE("sinusoidal deformation matches the analytic derivative at second order") {
    // x = xi + 0.1 sin(2 pi xi)  ->  A = 1 + 0.2 pi cos(2 pi xi)
    auto max_error = [](int n) {
        FlowMap map = sinusoidal_1d(n);
        double worst = 0.0;
        for (std::size_t i = 0; i < map.size(); ++i) {
            const double xi = map.lattice.coord(i)[0];
            const double exact = 1.0 + 0.2 * pi * std::cos(2.0 * pi * xi);
            worst = std::max(worst, std::abs(deformation_matrix(map, i).det() - exact));
        }
        return worst;
    };
    const double e1 = max_error(32);
    const double e2 = max_error(64);
    CHECK(e2 < e1 / 3.0);  // ~4x per halving
    CHECK(e1 < 1e-2);
}

TEST_CASE("jacobian density") {
    SUBCASE("identity map is unchanged") {
        FlowMap map = build_lattice(
            1, {0, 0, 0}, {1, 1, 1}, {16, 1, 1}, Boundary::Periodic,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return xi; },
            [](const Vec3&) { return Vec3(); });
        for (double r : jacobian_density(map)) CHECK(r == doctest::Approx(1.0));
    }
    SUBCASE("stretch halves the density") {
        FlowMap map = build_lattice(
            1, {0, 0, 0}, {1, 1, 1}, {16, 1, 1}, Boundary::Bounded,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return Vec3(2.0 * xi[0]); },
            [](const Vec3&) { return Vec3(); });
        for (double r : jacobian_density(map)) CHECK(r == doctest::Approx(0.5).epsilon(1e-10));
    }
    SUBCASE("sinusoidal map agrees with the deposited density") {
        // labels much finer than the grid so the kernel sees a resolved flow
        FlowMap map = sinusoidal_1d(512, 0.05);
        const std::vector<double> rho_label = jacobian_density(map);
        auto worst_vs_grid = [&](int ngrid) {
            const Grid grid = grid1d(0.0, 1.0, ngrid, Boundary::Periodic);
            const GridField rho_dep = deposit_density(map, grid);
            double worst = 0.0;
            for (std::size_t i = 0; i < map.size(); ++i)
                worst = std::max(worst,
                                 std::abs(rho_dep.interp(map.positions[i], 0) - rho_label[i]));
            return worst;
        };
        const double w32 = worst_vs_grid(32);
        const double w64 = worst_vs_grid(64);
        CHECK(w32 < 2e-2);       // kernel-resolution tolerance
        CHECK(w64 < w32 / 2.5);  // shrinks with the kernel width

    }
    SUBCASE("folded map names the label") {
        FlowMap map = sinusoidal_1d(16);
        map.positions[5][0] = map.positions[7][0] + 0.01;  // cross the neighbors
        CHECK_THROWS_AS(jacobian_density(map), FoldingError);
    }
}

TEST_CASE("inverse map") {
    SUBCASE("identity") {
        FlowMap map = build_lattice(
            2, {0, 0, 0}, {1, 1, 1}, {16, 16, 1}, Boundary::Periodic,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return xi; },
            [](const Vec3&) { return Vec3(); });
        const Vec3 xi = inverse_map(map, Vec3(0.4, 0.7));
        CHECK(xi[0] == doctest::Approx(0.4).epsilon(1e-10));
        CHECK(xi[1] == doctest::Approx(0.7).epsilon(1e-10));
    }
    SUBCASE("linear") {
        FlowMap map = build_lattice(
            1, {0, 0, 0}, {1, 1, 1}, {32, 1, 1}, Boundary::Bounded,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return Vec3(2.0 * xi[0]); },
            [](const Vec3&) { return Vec3(); });
        CHECK(inverse_map(map, Vec3(0.8))[0] == doctest::Approx(0.4).epsilon(1e-10));
    }
    SUBCASE("sinusoidal round trip under Newton tolerance") {
        FlowMap map = sinusoidal_1d(64);
        InverseSolver solver(map);
        Rng rng(123);
        for (int k = 0; k < 64; ++k) {
            const Vec3 x(rng.uniform());
            const Vec3 xi = solver.solve(x);
            CHECK(std::abs(map_position(map, xi)[0] - x[0]) < 1e-10);
        }
    }
    SUBCASE("outside the image of a bounded map") {
        FlowMap map = build_lattice(
            1, {0, 0, 0}, {1, 1, 1}, {32, 1, 1}, Boundary::Bounded,
            [](const Vec3&) { return 1.0; }, [](const Vec3& xi) { return Vec3(0.5 * xi[0]); },
            [](const Vec3&) { return Vec3(); });
        CHECK_THROWS_AS(inverse_map(map, Vec3(0.9)), OutOfDomain);
    }
}

TEST_CASE("determinant of A times determinant of its inverse is one") {
    FlowMap map = build_lattice(
        2, {0, 0, 0}, {1, 1, 1}, {24, 24, 1}, Boundary::Periodic,
        [](const Vec3&) { return 1.0; },
        [](const Vec3& xi) {
            return Vec3(xi[0] + 0.03 * std::sin(2.0 * pi * xi[1]),
                        xi[1] + 0.02 * std::cos(2.0 * pi * xi[0]));
        },
        [](const Vec3&) { return Vec3(); });
    for (std::size_t i = 0; i < map.size(); i += 7) {
        const Mat3 A = deformation_matrix(map, i);
        CHECK(std::abs(A.det() * A.inverse().det() - 1.0) < 1e-10);
    }
}
