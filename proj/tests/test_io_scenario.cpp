#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lagflow/io.hpp"
#include "lagflow/rng.hpp"
#include "lagflow/scenario.hpp"

using namespace lagflow;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("lagflow_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

FlowMap sample_map() {
    Rng rng(11);
    FlowMap map = build_lattice(
        2, {0, 0, 0}, {1, 1, 1}, {6, 5, 1}, Boundary::Periodic,
        [&](const Vec3& xi) { return 1.0 + 0.5 * std::sin(2.0 * pi * xi[0]); },
        [](const Vec3& xi) { return Vec3(xi[0] + 0.01, xi[1]); },
        [&](const Vec3&) { return Vec3(0.3, -0.1); });
    map.time = 0.625;
    return map;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    os << text;
}

}  // namespace

TEST_CASE("snapshot round trips") {
    const fs::path dir = temp_dir("io");
    const FlowMap map = sample_map();

    SUBCASE("flowmap binary is bit exact") {
        write_flowmap_binary(map, (dir / "m.bin").string());
        const FlowMap back = read_flowmap_binary((dir / "m.bin").string());
        REQUIRE(back.size() == map.size());
        for (std::size_t i = 0; i < map.size(); ++i) {
            CHECK(back.positions[i][0] == map.positions[i][0]);
            CHECK(back.momenta[i][1] == map.momenta[i][1]);
            CHECK(back.rho0[i] == map.rho0[i]);
        }
        CHECK(back.time == map.time);
        // and the byte stream itself is reproducible
        write_flowmap_binary(back, (dir / "m2.bin").string());
        CHECK(slurp(dir / "m.bin") == slurp(dir / "m2.bin"));
    }
    SUBCASE("flowmap csv round trips exactly via shortest-exact formatting") {
        write_flowmap_csv(map, (dir / "m.csv").string());
        const FlowMap back = read_flowmap_csv((dir / "m.csv").string());
        for (std::size_t i = 0; i < map.size(); ++i) {
            CHECK(back.positions[i][0] == map.positions[i][0]);
            CHECK(back.rho0[i] == map.rho0[i]);
        }
    }
    SUBCASE("gridfield snapshots round trip in both formats") {
        GridField f(grid2d(0.0, 2.0, 7, Boundary::Bounded), 2, "length/time");
        Rng rng(5);
        for (double& v : f.values) v = rng.gauss();
        write_gridfield_binary(f, (dir / "f.bin").string());
        const GridField fb = read_gridfield_binary((dir / "f.bin").string());
        CHECK(fb.units == f.units);
        CHECK(fb.values == f.values);
        write_gridfield_csv(f, (dir / "f.csv").string());
        const GridField fc = read_gridfield_csv((dir / "f.csv").string());
        CHECK(fc.values == f.values);
    }
    SUBCASE("corrupt magic is rejected") {
        write_text(dir / "bad.bin", "NOTASNAPxxxxxxxxxxxxxxxx");
        CHECK_THROWS_AS(read_flowmap_binary((dir / "bad.bin").string()), IoError);
    }
}

TEST_CASE("diagnostics log and plot data") {
    const fs::path dir = temp_dir("diag");
    DiagnosticsLog log({"time", "energy", "circulation"});
    log.append({0.0, 1.5, 0.2});
    log.append({0.1, 1.5000001, 0.2000002});
    log.write_csv((dir / "d.csv").string());

    SUBCASE("columns are recoverable") {
        CHECK(log.column("energy")[1] == doctest::Approx(1.5000001));
        CHECK_THROWS_AS(log.column("nope"), Error);
    }
    SUBCASE("long format reshape with scaling") {
        emit_plotdata((dir / "d.csv").string(), (dir / "p.csv").string(), 1e3);
        std::ifstream is(dir / "p.csv");
        std::string line;
        std::getline(is, line);
        CHECK(line == "# scale=1000");
        std::getline(is, line);
        CHECK(line == "time,name,value");
        std::getline(is, line);
        CHECK(line == "0,energy,1500");
        std::getline(is, line);
        CHECK(line == "0,circulation,200");
    }
    SUBCASE("column subsets are honored and unknown columns rejected") {
        emit_plotdata((dir / "d.csv").string(), (dir / "p2.csv").string(), 1.0, {"circulation"});
        std::ifstream is(dir / "p2.csv");
        std::string line;
        int rows = 0;
        while (std::getline(is, line))
            if (line.find("circulation") != std::string::npos) ++rows;
        CHECK(rows == 2);
        CHECK_THROWS_AS(
            emit_plotdata((dir / "d.csv").string(), (dir / "x.csv").string(), 1.0, {"nope"}),
            Error);
    }
}

TEST_CASE("radial profile csv") {
    const fs::path dir = temp_dir("prof");
    RadialProfile p;
    p.r = {0.0, 0.5, 1.0};
    p.value = {1.0, 0.7, 0.1};
    write_profile_csv(p, "r", "rho", (dir / "p.csv").string());
    const RadialProfile back = read_profile_csv((dir / "p.csv").string());
    CHECK(back.r == p.r);
    CHECK(back.value == p.value);
}

TEST_CASE("scenario runs") {
    SUBCASE("a minimal free-flow scenario keeps its momenta") {
        const fs::path dir = temp_dir("free");
        write_text(dir / "s.json", R"({
            "name": "free-minimal",
            "module": "fluid",
            "geometry": {"dim": 1, "lo": [0], "hi": [1], "shape": [32], "boundary": "periodic"},
            "initial": {"velocity": {"kind": "sine", "amplitude": 0.1}},
            "force": {"kind": "free"},
            "integrator": {"dt": 0.005, "steps": 40},
            "diagnostics": {"cadence": 10},
            "gates": {"energy_drift": 1e-12}
        })");
        RunOptions opts;
        opts.out_dir = (dir / "out").string();
        const RunResult res = run_scenario((dir / "s.json").string(), opts);
        CHECK(res.exit_code == 0);
        CHECK(fs::exists(dir / "out" / "diagnostics.csv"));
        CHECK(fs::exists(dir / "out" / "summary.txt"));
        // momenta columns stay constant for free flow
        std::ifstream is(dir / "out" / "diagnostics.csv");
        std::string header, first, line, last;
        std::getline(is, header);
        std::getline(is, first);
        while (std::getline(is, line))
            if (!line.empty()) last = line;
        auto nth = [](const std::string& row, int col) {
            std::stringstream ss(row);
            std::string tok;
            for (int c = 0; c <= col; ++c) std::getline(ss, tok, ',');
            return tok;
        };
        CHECK(nth(first, 2) == nth(last, 2));  // momentum_x column
    }
    SUBCASE("malformed configuration exits with code 2 and names the field") {
        const fs::path dir = temp_dir("bad");
        write_text(dir / "s.json", R"({
            "module": "fluid",
            "geometry": {"dim": 1, "lo": [0], "hi": [1], "shape": [8], "boundary": "periodic"},
            "force": {"kind": "free"},
            "integrator": {"dt": 0.01, "steps": 1},
            "initial": {"velocity": {"kind": "warp-drive"}}
        })");
        RunOptions opts;
        opts.out_dir = (dir / "out").string();
        const RunResult res = run_scenario((dir / "s.json").string(), opts);
        CHECK(res.exit_code == 2);
        CHECK(res.summary.find("velocity") != std::string::npos);
    }
    SUBCASE("unknown keys are rejected") {
        const fs::path dir = temp_dir("unk");
        write_text(dir / "s.json", R"({
            "module": "fluid",
            "geometry": {"dim": 1, "lo": [0], "hi": [1], "shape": [8], "boundary": "periodic"},
            "force": {"kind": "free"},
            "integrator": {"dt": 0.01, "steps": 1, "typo_key": 3},
            "initial": {}
        })");
        RunOptions opts;
        opts.out_dir = (dir / "out").string();
        const RunResult res = run_scenario((dir / "s.json").string(), opts);
        CHECK(res.exit_code == 2);
        CHECK(res.summary.find("typo_key") != std::string::npos);
    }
    SUBCASE("static-solve reproduces the constant-density closed form") {
        const fs::path dir = temp_dir("solve");
        write_text(dir / "s.json", R"({
            "module": "static-solve",
            "profile": {"kind": "constant", "rho_c": 0.8, "r_max": 2.0, "nodes": 513},
            "gamma": 1.0,
            "mass": 1.0
        })");
        RunOptions opts;
        opts.out_dir = (dir / "out").string();
        const RunResult res = run_scenario((dir / "s.json").string(), opts);
        CHECK(res.exit_code == 0);
        const RadialProfile v = read_profile_csv((dir / "out" / "v_profile.csv").string());
        for (std::size_t i = 0; i < v.r.size(); i += 64)
            CHECK(v.value[i] ==
                  doctest::Approx(std::sqrt(2.0 * pi * 0.8) * v.r[i]).epsilon(1e-12));
    }
    SUBCASE("a failed gate exits with code 1") {
        const fs::path dir = temp_dir("gate");
        write_text(dir / "s.json", R"({
            "module": "fluid",
            "geometry": {"dim": 1, "lo": [0], "hi": [1], "shape": [16], "boundary": "periodic"},
            "initial": {"velocity": {"kind": "uniform", "value": [0.5]}},
            "force": {"kind": "external", "U": {"kind": "linear-ramp", "slope": [1.0]}},
            "integrator": {"dt": 0.01, "steps": 20},
            "gates": {"energy_drift": 1e-30}
        })");
        RunOptions opts;
        opts.out_dir = (dir / "out").string();
        const RunResult res = run_scenario((dir / "s.json").string(), opts);
        CHECK(res.exit_code == 1);
        CHECK(res.summary.find("FAIL") != std::string::npos);
    }
    SUBCASE("reruns with the same seed produce identical bytes") {
        const fs::path dir = temp_dir("repro");
        write_text(dir / "s.json", R"({
            "module": "bound-check",
            "seed": 424242,
            "resolution": 12,
            "trials": 4
        })");
        RunOptions opts;
        opts.out_dir = (dir / "a").string();
        const RunResult r1 = run_scenario((dir / "s.json").string(), opts);
        opts.out_dir = (dir / "b").string();
        const RunResult r2 = run_scenario((dir / "s.json").string(), opts);
        CHECK(r1.exit_code == 0);
        CHECK(r2.exit_code == 0);
        CHECK(slurp(dir / "a" / "bound_sweep.csv") == slurp(dir / "b" / "bound_sweep.csv"));
        CHECK(slurp(dir / "a" / "summary.txt") == slurp(dir / "b" / "summary.txt"));
    }
    SUBCASE("missing seed for a randomized module is a config error") {
        const fs::path dir = temp_dir("seedless");
        write_text(dir / "s.json", R"({"module": "bound-check", "resolution": 8, "trials": 2})");
        RunOptions opts;
        opts.out_dir = (dir / "out").string();
        const RunResult res = run_scenario((dir / "s.json").string(), opts);
        CHECK(res.exit_code == 2);
        CHECK(res.summary.find("seed") != std::string::npos);
    }
}
