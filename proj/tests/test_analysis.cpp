#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "swingpde/analysis.hpp"
#include "swingpde/ode_core.hpp"
#include "swingpde/pde_core.hpp"

using namespace swingpde;

TEST_SUITE("analysis") {

TEST_CASE("wave speed map") {
    RasterGrid grid = RasterGrid::rectangle(4, 4, 1.0);
    FieldSet fs;
    fs.m = make_field(grid, Quantity::M, 1.0);
    fs.d = make_field(grid, Quantity::D, 0.1);
    fs.p = make_field(grid, Quantity::P);
    fs.bx = make_field(grid, Quantity::Bx, 4.0);
    fs.by = make_field(grid, Quantity::By, 4.0);

    SUBCASE("b = 4, m = 1 gives c = 2, uniformly") {
        Field c = wave_speed_map(fs, grid);
        for (int k = 0; k < grid.cell_count(); ++k) CHECK(c.values[k] == doctest::Approx(2.0));
    }
    SUBCASE("doubling b scales c by sqrt(2)") {
        Field c1 = wave_speed_map(fs, grid);
        fs.bx.values *= 2.0;
        Field c2 = wave_speed_map(fs, grid);
        for (int k = 0; k < grid.cell_count(); ++k)
            CHECK(c2.values[k] == doctest::Approx(std::sqrt(2.0) * c1.values[k]));
    }
}

TEST_CASE("front arrival basics") {
    RasterGrid grid = RasterGrid::rectangle(15, 15, 1.0);
    Field c = make_field(grid, Quantity::Aux, 2.0);
    int source = grid.compact_of_rect(grid.rect_index(8, 8));
    Eigen::VectorXd t = front_arrival(c, grid, source);

    CHECK(t[source] == 0.0);
    for (int k = 0; k < grid.cell_count(); ++k)
        if (k != source) CHECK(t[k] > 0.0);

    SUBCASE("homogeneous medium: within the 8-neighbour metric error of |r|/c") {
        Point src = grid.center(source);
        for (int k = 0; k < grid.cell_count(); ++k) {
            Point r = grid.center(k);
            double exact = std::hypot(r[0] - src[0], r[1] - src[1]) / 2.0;
            if (exact > 0.0) {
                CHECK(t[k] >= exact - 1e-9);      // lattice paths cannot beat the line
                CHECK(t[k] <= 1.09 * exact + 1e-9);  // octile metric overhead < 9%
            }
        }
    }
}

TEST_CASE("front arrival equals the exhaustive relaxation oracle") {
    std::mt19937_64 rng(71);
    for (int rep = 0; rep < 5; ++rep) {
        RasterGrid grid = oracles::random_blob_grid(rng, 18, 18);
        Field c = oracles::random_field(rng, grid, Quantity::Aux, 0.5, 3.0);
        int source = static_cast<int>(rng() % static_cast<std::uint64_t>(grid.cell_count()));
        Eigen::VectorXd fast = front_arrival(c, grid, source);
        Eigen::VectorXd slow = oracles::arrival_by_relaxation(c.values, grid, source);
        CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("front arrival is 1-Lipschitz along lattice edges") {
    std::mt19937_64 rng(73);
    RasterGrid grid = oracles::random_blob_grid(rng, 15, 15);
    Field c = oracles::random_field(rng, grid, Quantity::Aux, 0.5, 3.0);
    Eigen::VectorXd t = front_arrival(c, grid, 0);
    for (int k = 0; k < grid.cell_count(); ++k)
        for (Dir dir : {XMinus, XPlus, YMinus, YPlus}) {
            int l = grid.neighbor(k, dir);
            if (l < 0) continue;
            double edge_time = grid.delta() / (0.5 * (c.values[k] + c.values[l]));
            CHECK(std::abs(t[k] - t[l]) <= edge_time + 1e-12);
        }
}

TEST_CASE("homogenized speeds expose both averaging conventions") {
    RasterGrid grid = RasterGrid::rectangle(3, 3, 1.0);
    FieldSet fs;
    fs.m = make_field(grid, Quantity::M, 1.0);
    fs.d = make_field(grid, Quantity::D, 0.1);
    fs.p = make_field(grid, Quantity::P);
    fs.bx = make_field(grid, Quantity::Bx, 1.0);
    fs.by = make_field(grid, Quantity::By, 1.0);
    fs.bx.values[0] = 9.0;  // one stiff cell
    fs.by.values[0] = 9.0;

    Field mean_c = homogenized_speed(fs, grid, FrontAveraging::MeanOfSpeed);
    Field c_mean = homogenized_speed(fs, grid, FrontAveraging::SpeedOfMeans);
    double expect_mean_c = (std::sqrt(9.0) + 8.0) / 9.0;
    double expect_c_mean = std::sqrt((9.0 + 8.0) / 9.0);
    CHECK(mean_c.values[0] == doctest::Approx(expect_mean_c));
    CHECK(c_mean.values[0] == doctest::Approx(expect_c_mean));
}

TEST_CASE("node-cell map is total with bounded distances") {
    PowerNetwork net =
        generate_synthetic_continental(5, 80, default_continental_polygon());
    RasterGrid grid = build_grid(net, 100.0, 150.0);
    NodeCellMap map = make_node_cell_map(net, grid);
    REQUIRE(map.cell.size() == net.size());
    for (std::size_t i = 0; i < net.size(); ++i) {
        CHECK(map.cell[i] >= 0);
        CHECK(map.cell[i] < grid.cell_count());
        CHECK(map.distance_km[i] <= 150.0);
    }
}

TEST_CASE("steady comparison") {
    PowerNetwork net = generate_lattice_network(6, 6, 1.0, 1.0, 0.1, 50.0,
                                                InjectionPattern::BalancedDipole);
    GridBuildOptions opts;
    opts.tight = true;
    RasterGrid grid = build_grid(net, 50.0, 50.0, opts);
    NodeCellMap map = make_node_cell_map(net, grid);
    Eigen::VectorXd theta = ode_steady_state(net);

    SUBCASE("identical inputs give zero error") {
        Eigen::VectorXd cont(grid.cell_count());
        for (std::size_t i = 0; i < net.size(); ++i) cont[map.cell[i]] = theta[static_cast<long>(i)];
        SteadyComparison cmp = compare_steady(net, theta, cont, map);
        CHECK(cmp.rmse < 1e-14);
        CHECK(cmp.outliers.empty());
    }
    SUBCASE("constant offsets vanish after gauge alignment") {
        Eigen::VectorXd cont(grid.cell_count());
        for (std::size_t i = 0; i < net.size(); ++i)
            cont[map.cell[i]] = theta[static_cast<long>(i)] + 0.7;
        SteadyComparison cmp = compare_steady(net, theta, cont, map);
        CHECK(cmp.rmse < 1e-12);
        Eigen::VectorXd disc_shifted = theta.array() - 3.1;
        SteadyComparison cmp2 = compare_steady(net, disc_shifted, cont, map);
        CHECK(cmp2.rmse < 1e-12);
    }
    SUBCASE("outliers are sorted by error") {
        Eigen::VectorXd cont(grid.cell_count());
        for (std::size_t i = 0; i < net.size(); ++i) cont[map.cell[i]] = theta[static_cast<long>(i)];
        cont[map.cell[3]] += 0.5;
        cont[map.cell[7]] += 1.0;
        SteadyComparison cmp = compare_steady(net, theta, cont, map, /*outlier_mult=*/1.5);
        REQUIRE(cmp.outliers.size() >= 2);
        CHECK(cmp.outliers[0].error >= cmp.outliers[1].error);
        CHECK(cmp.outliers[0].bus_id == net.buses()[7].id);
    }
}

TEST_CASE("dynamic comparison") {
    PowerNetwork net = generate_lattice_network(5, 5, 1.0, 1.0, 0.3, 50.0,
                                                InjectionPattern::BalancedDipole);
    FaultScenario fault{12, -0.3, 0.0, std::nullopt};
    Trajectory traj = simulate_swing(net, fault, {1e-2, 8.0, 4}, {0, 12, 24});

    SUBCASE("a trajectory against itself is exact") {
        DynamicComparison cmp = compare_dynamics(traj, traj);
        CHECK(cmp.terminal_global_difference == 0.0);
        for (const ProbeTraceMetrics& m : cmp.probes) {
            CHECK(m.rmse == 0.0);
            CHECK(m.terminal_difference == 0.0);
            CHECK(m.arrival_difference == 0.0);
        }
    }
    SUBCASE("terminal agreement across models under the shared conservation law") {
        // Continuum twin on the matching grid.
        GridBuildOptions opts;
        opts.tight = true;
        RasterGrid grid = build_grid(net, 50.0, 50.0, opts);
        FieldSet fs;
        fs.m = deposit_nodal(net, grid, Quantity::M);
        fs.d = deposit_nodal(net, grid, Quantity::D);
        fs.p = deposit_nodal(net, grid, Quantity::P);
        std::tie(fs.bx, fs.by) = deposit_lines(net, grid);
        NodeCellMap map = make_node_cell_map(net, grid);
        CellFault cf{map.cell_of(net, 12), -0.3, 0.0, std::nullopt};
        Trajectory cont = crank_nicolson_simulate(fs, grid, cf, {1e-2, 8.0, 4},
                                                  {map.cell_of(net, 0), map.cell_of(net, 12),
                                                   map.cell_of(net, 24)},
                                                  {0, 12, 24});
        DynamicComparison cmp = compare_dynamics(traj, cont);
        CHECK(cmp.terminal_global_difference < 1e-4);
    }
    SUBCASE("disjoint ranges are rejected") {
        Trajectory late = traj;
        for (double& t : late.times) t += 100.0;
        CHECK_THROWS_AS(compare_dynamics(traj, late), ValidationError);
    }
    SUBCASE("unmapped probes are rejected") {
        Trajectory other = traj;
        other.probes = {900, 901, 902};
        CHECK_THROWS_AS(compare_dynamics(traj, other), ValidationError);
    }
}

TEST_CASE("distance binning reports the far-field trend") {
    PowerNetwork net = generate_lattice_network(6, 6, 1.0, 1.0, 0.3, 50.0,
                                                InjectionPattern::BalancedDipole);
    FaultScenario fault{0, -0.2, 0.0, std::nullopt};
    std::vector<int> probes{0, 7, 14, 21, 28, 35};
    Trajectory a = simulate_swing(net, fault, {1e-2, 4.0, 4}, probes);
    Trajectory b = simulate_swing(net, fault, {2e-2, 4.0, 2}, probes);

    DynamicCompareOptions opts;
    opts.distance_bins = 3;
    for (int id : probes) {
        const Bus& bus = net.buses()[static_cast<std::size_t>(net.index_of(id))];
        opts.probe_distance_km.push_back(std::hypot(bus.x, bus.y));
    }
    DynamicComparison cmp = compare_dynamics(a, b, opts);
    CHECK(cmp.distance_bin_rmse.size() == 3);
    CHECK(cmp.distance_bin_edges_km.size() == 4);
}

}  // TEST_SUITE
