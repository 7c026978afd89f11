#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "swingpde/io.hpp"
#include "swingpde/ode_core.hpp"
#include "swingpde/screen.hpp"

using namespace swingpde;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    fs::path dir = fs::temp_directory_path() / "swingpde_test_io";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

#ifdef SWINGPDE_CLI_BINARY
int cli(const std::string& args) {
    std::string cmd = std::string(SWINGPDE_CLI_BINARY) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}
#endif

}  // namespace

TEST_SUITE("io") {

TEST_CASE("grid files round-trip with matching hash") {
    std::mt19937_64 rng(101);
    // A spacing that does not survive 9-digit rounding guards the header
    // precision against the content hash.
    RasterGrid grid = oracles::random_blob_grid(rng, 14, 14, 100.0 / 3.0);
    fs::path p = work_dir() / "grid.txt";
    save_grid(grid, p);
    RasterGrid back = load_grid(p);
    CHECK(back.content_hash() == grid.content_hash());
    CHECK(back.cell_count() == grid.cell_count());
    CHECK(back.nx() == grid.nx());
    CHECK(back.delta() == grid.delta());
    for (int k = 0; k < grid.cell_count(); ++k) {
        CHECK(back.normal_x(k) == grid.normal_x(k));
        CHECK(back.normal_y(k) == grid.normal_y(k));
    }
}

TEST_CASE("field files round-trip at 9 significant digits") {
    std::mt19937_64 rng(103);
    RasterGrid grid = oracles::random_blob_grid(rng, 12, 12);
    Field f = oracles::random_field(rng, grid, Quantity::D);
    fs::path p = work_dir() / "field_d.txt";
    save_field(f, grid, p);
    Field back = load_field(p, grid);
    CHECK(back.quantity == Quantity::D);
    for (int k = 0; k < grid.cell_count(); ++k)
        CHECK(back.values[k] == doctest::Approx(f.values[k]).epsilon(1e-8));
}

TEST_CASE("field files refuse a mismatched grid") {
    RasterGrid a = RasterGrid::rectangle(5, 4, 1.0);
    RasterGrid b = RasterGrid::rectangle(5, 4, 2.0);
    Field f = make_field(a, Quantity::M, 1.0);
    fs::path p = work_dir() / "field_m.txt";
    save_field(f, a, p);
    CHECK_THROWS_WITH_AS(load_field(p, b), doctest::Contains("hash mismatch"),
                         ValidationError);
}

TEST_CASE("trajectory CSV round-trips with the contract columns") {
    PowerNetwork net = generate_lattice_network(3, 3, 1.0, 1.0, 0.3, 50.0,
                                                InjectionPattern::BalancedDipole);
    Trajectory traj = simulate_swing(net, {4, -0.2, 0.0, std::nullopt}, {1e-2, 1.0, 5},
                                     {0, 4, 8});
    fs::path p = work_dir() / "traj.csv";
    save_trajectory(traj, p);

    std::string text = slurp(p);
    CHECK(text.rfind("t,probe_0_theta,probe_0_omega,probe_4_theta,probe_4_omega,"
                     "probe_8_theta,probe_8_omega,global_omega\n", 0) == 0);

    Trajectory back = load_trajectory(p);
    REQUIRE(back.times.size() == traj.times.size());
    REQUIRE(back.probes == traj.probes);
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        CHECK(back.times[s] == doctest::Approx(traj.times[s]).epsilon(1e-8));
        for (long c = 0; c < traj.omega.cols(); ++c)
            CHECK(back.omega(static_cast<long>(s), c) ==
                  doctest::Approx(traj.omega(static_cast<long>(s), c)).epsilon(1e-8));
    }
}

TEST_CASE("run config parses and rejects unknown keys") {
    RunConfig cfg = RunConfig::from_json_text(R"({
      "paths": {"network": "net.json", "out_dir": "out"},
      "grid": {"delta": 40.0, "dilation": 60.0, "tight": true},
      "fields": {"kappa": 0.25, "smooth_tol": 1e-5, "cutoff": 0.3},
      "sim": {"dt": 0.01, "t_end": 5.0, "sample_stride": 5},
      "probes": [1, 2],
      "scenarios": [{"target": 3, "dp": -0.1, "t_on": 0.5},
                    {"target": 4, "dp": 0.2, "t_on": 0.0, "t_off": 2.0}],
      "workers": 3
    })");
    CHECK(cfg.grid.delta == 40.0);
    CHECK(cfg.grid.tight);
    CHECK(cfg.fields.cutoff == 0.3);
    CHECK(cfg.scenarios.size() == 2);
    CHECK(cfg.scenarios[1].t_off.has_value());
    CHECK(cfg.workers == 3);

    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"simulation": {}})"), ParseError);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"sim": {"dt": 0.1, "oops": 1}})"),
                    ParseError);
}

TEST_CASE("screen runs scenarios against one factorisation deterministically") {
    fs::path dir = work_dir() / "screen";
    fs::remove_all(dir);
    fs::create_directories(dir);

    PowerNetwork net = generate_lattice_network(8, 8, 1.0, 1.0, 0.3, 50.0,
                                                InjectionPattern::BalancedDipole);
    fs::path net_path = dir / "net.json";
    save_network(net, net_path);

    RunConfig cfg;
    cfg.paths.network = net_path.string();
    cfg.paths.out_dir = (dir / "run1").string();
    cfg.grid.delta = 50.0;
    cfg.grid.tight = true;
    cfg.fields.kappa = 0.2;
    cfg.fields.smooth_tol = 1e-3;
    cfg.sim = {1e-2, 5.0, 10};
    cfg.probes = {0, 27, 63};
    cfg.scenarios.push_back({9, -0.3, 0.0, std::nullopt});
    cfg.scenarios.push_back({54, -0.1, 0.0, std::nullopt});
    cfg.workers = 1;

    ScreenResult r1 = run_screen(cfg);
    REQUIRE(r1.outcomes.size() == 2);
    CHECK(fs::exists(r1.summary_file));
    CHECK(fs::exists(r1.outcomes[0].trajectory_file));
    CHECK(fs::exists(dir / "run1/scenario_0_report.txt"));
    CHECK(fs::exists(dir / "run1/scenario_1_report.txt"));

    // Stronger fault ranks first.
    std::string summary = slurp(r1.summary_file);
    auto first_line = summary.substr(summary.find('\n') + 1);
    CHECK(first_line.rfind("1,0,9,", 0) == 0);

    SUBCASE("independent of the worker count, byte for byte") {
        cfg.paths.out_dir = (dir / "run2").string();
        cfg.workers = 4;
        ScreenResult r2 = run_screen(cfg);
        CHECK(slurp(r1.summary_file) == slurp(r2.summary_file));
        for (std::size_t i = 0; i < r1.outcomes.size(); ++i)
            CHECK(slurp(r1.outcomes[i].trajectory_file) ==
                  slurp(r2.outcomes[i].trajectory_file));
    }
    SUBCASE("rerun yields identical files") {
        cfg.paths.out_dir = (dir / "run3").string();
        ScreenResult r3 = run_screen(cfg);
        CHECK(slurp(r1.summary_file) == slurp(r3.summary_file));
    }
}

}  // TEST_SUITE

#ifdef SWINGPDE_CLI_BINARY

TEST_SUITE("cli") {

TEST_CASE("lattice pipeline end-to-end reaches steady agreement") {
    fs::path dir = work_dir() / "pipeline";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto in = [&](const std::string& n) { return (dir / n).string(); };

    REQUIRE(cli("gen --lattice 10x10 --b 1 --m 1 --d 0.1 --spacing 50 -o " + in("net.json")) == 0);
    REQUIRE(cli("grid-build --network " + in("net.json") + " --delta 50 --dilation 50 --tight -o " +
                in("grid.txt")) == 0);
    REQUIRE(cli("deposit --network " + in("net.json") + " --grid " + in("grid.txt") +
                " -o " + in("fields")) == 0);
    REQUIRE(cli("ode-steady --network " + in("net.json") + " -o " + in("disc.csv")) == 0);
    REQUIRE(cli("pde-steady --grid " + in("grid.txt") + " --fields-dir " + in("fields") +
                " -o " + in("cont.txt")) == 0);
    REQUIRE(cli("compare --network " + in("net.json") + " --grid " + in("grid.txt") +
                " --disc " + in("disc.csv") + " --cont " + in("cont.txt") + " -o " +
                in("report.txt") + " --scatter " + in("scatter.csv")) == 0);

    std::string report = slurp(dir / "report.txt");
    auto pos = report.find("rmse_rad ");
    REQUIRE(pos != std::string::npos);
    double rmse = std::stod(report.substr(pos + 9));
    CHECK(rmse < 1e-6);
}

TEST_CASE("filter with cutoff 1.0 leaves the field unchanged") {
    fs::path dir = work_dir() / "filter_id";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto in = [&](const std::string& n) { return (dir / n).string(); };

    REQUIRE(cli("gen --lattice 6x6 --d 0.2 -o " + in("net.json")) == 0);
    REQUIRE(cli("grid-build --network " + in("net.json") + " --delta 50 --dilation 50 --tight -o " +
                in("grid.txt")) == 0);
    REQUIRE(cli("deposit --network " + in("net.json") + " --grid " + in("grid.txt") + " -o " +
                in("fields")) == 0);
    REQUIRE(cli("filter --grid " + in("grid.txt") + " --in " + in("fields/field_m.txt") +
                " --cutoff 1.0 -o " + in("m_filtered.txt")) == 0);

    RasterGrid grid = load_grid(dir / "grid.txt");
    Field before = load_field(dir / "fields/field_m.txt", grid);
    Field after = load_field(dir / "m_filtered.txt", grid);
    for (int k = 0; k < grid.cell_count(); ++k)
        CHECK(after.values[k] == doctest::Approx(before.values[k]).epsilon(1e-8));
}

TEST_CASE("screen subcommand is deterministic across reruns") {
    fs::path dir = work_dir() / "cli_screen";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto in = [&](const std::string& n) { return (dir / n).string(); };

    REQUIRE(cli("gen --lattice 6x6 --d 0.2 -o " + in("net.json")) == 0);
    {
        std::ofstream cfg(dir / "config.json");
        cfg << R"({
          "paths": {"network": ")" << in("net.json") << R"(", "out_dir": ")" << in("out_a")
            << R"("},
          "grid": {"delta": 50.0, "tight": true},
          "fields": {"smooth_tol": 1e-3},
          "sim": {"dt": 0.01, "t_end": 2.0, "sample_stride": 10},
          "probes": [0, 35],
          "scenarios": [{"target": 0, "dp": -0.2}, {"target": 35, "dp": -0.05}]
        })";
    }
    REQUIRE(cli("screen --config " + in("config.json")) == 0);
    REQUIRE(cli("screen --config " + in("config.json") + " --out-dir " + in("out_b") +
                " --workers 2") == 0);
    CHECK(slurp(dir / "out_a/screen_summary.txt") == slurp(dir / "out_b/screen_summary.txt"));
    CHECK(slurp(dir / "out_a/scenario_0.csv") == slurp(dir / "out_b/scenario_0.csv"));
    CHECK(slurp(dir / "out_a/scenario_1.csv") == slurp(dir / "out_b/scenario_1.csv"));
}

TEST_CASE("dynamic pipeline: simulate both models, compare, map the front") {
    fs::path dir = work_dir() / "dyn_pipeline";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto in = [&](const std::string& n) { return (dir / n).string(); };

    REQUIRE(cli("gen --lattice 6x6 --d 0.3 -o " + in("net.json")) == 0);
    REQUIRE(cli("grid-build --network " + in("net.json") + " --delta 50 --dilation 50 --tight -o " +
                in("grid.txt")) == 0);
    REQUIRE(cli("deposit --network " + in("net.json") + " --grid " + in("grid.txt") + " -o " +
                in("fields")) == 0);
    REQUIRE(cli("ode-sim --network " + in("net.json") +
                " --target 14 --dp -0.2 --dt 0.005 --t-end 4 --stride 10 --probes 0,14,35 -o " +
                in("ode.csv")) == 0);
    REQUIRE(cli("pde-sim --grid " + in("grid.txt") + " --fields-dir " + in("fields") +
                " --network " + in("net.json") +
                " --target 14 --dp -0.2 --dt 0.005 --t-end 4 --stride 10 --probes 0,14,35"
                " --snapshot-times 2.0 --snapshot-dir " + in("snaps") + " -o " +
                in("pde.csv")) == 0);
    REQUIRE(cli("compare --traj-a " + in("ode.csv") + " --traj-b " + in("pde.csv") + " -o " +
                in("dyn.txt")) == 0);
    REQUIRE(cli("speedmap --grid " + in("grid.txt") + " --fields-dir " + in("fields") + " -o " +
                in("c.txt")) == 0);
    REQUIRE(cli("front --grid " + in("grid.txt") + " --speed " + in("c.txt") + " --network " +
                in("net.json") + " --source-bus 14 -o " + in("arrival.txt")) == 0);

    CHECK(fs::exists(dir / "snaps/theta_t2.txt"));
    CHECK(fs::exists(dir / "snaps/omega_t2.txt"));
    // Bare deposit on the matching grid: the two models coincide.
    std::string report = slurp(dir / "dyn.txt");
    auto pos = report.find("terminal_global_difference ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(report.substr(pos + 27)) < 1e-6);

    RasterGrid grid = load_grid(dir / "grid.txt");
    Field arrival = load_field(dir / "arrival.txt", grid);
    CHECK(arrival.values.minCoeff() == 0.0);
    CHECK(arrival.values.maxCoeff() > 0.0);
}

TEST_CASE("exit codes: usage errors give 2, module errors give 1") {
    CHECK(cli("definitely-not-a-subcommand") == 2);
    CHECK(cli("ode-steady --network /nonexistent/net.json") == 1);
    CHECK(cli("--version") == 0);
    CHECK(cli("gen --help") == 0);
}

}  // TEST_SUITE

#endif  // SWINGPDE_CLI_BINARY
