// swingpde command line: generate/load networks, build grids and coefficient
// fields, run the discrete and continuum simulators, filter, compare, and
// screen fault scenarios in batch. Subcommands communicate through files; see
// README.md for the pipeline.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swingpde/analysis.hpp"
#include "swingpde/io.hpp"
#include "swingpde/ode_core.hpp"
#include "swingpde/pde_core.hpp"
#include "swingpde/screen.hpp"
#include "swingpde/version.hpp"

namespace fs = std::filesystem;
using namespace swingpde;

namespace {

Polygon load_polygon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open polygon file: " + path);
    nlohmann::json doc = nlohmann::json::parse(in);
    Polygon poly;
    for (const auto& pt : doc) poly.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
    return poly;
}

void save_angles_csv(const PowerNetwork& net, const Eigen::VectorXd& theta,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write angle file: " + path);
    out << "bus,theta\n";
    for (std::size_t i = 0; i < net.size(); ++i)
        out << net.buses()[i].id << "," << format_sig9(theta[static_cast<long>(i)]) << "\n";
}

Eigen::VectorXd load_angles_csv(const PowerNetwork& net, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open angle file: " + path);
    std::string line;
    std::getline(in, line);  // header
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<long>(net.size()));
    std::vector<bool> seen(net.size(), false);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError("bad angle row: " + line);
        int bus = std::stoi(line.substr(0, comma));
        int idx = net.index_of(bus);
        theta[idx] = std::stod(line.substr(comma + 1));
        seen[static_cast<std::size_t>(idx)] = true;
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i])
            throw ParseError("angle file misses bus " + std::to_string(net.buses()[i].id));
    return theta;
}

FieldSet load_finalized(const std::string& fields_dir, const RasterGrid& grid,
                        const std::string& prefix) {
    return finalize_fields(load_field_set(fields_dir, grid, prefix), grid);
}

struct FieldStageIo {
    std::string grid_path;
    std::string in_file, out_file;
    std::string in_dir, out_dir;
    std::string prefix = "field";
};

/// Apply `op` to one field file or to a whole field-set directory.
void run_field_stage(const FieldStageIo& io,
                     const std::function<Field(const Field&, const RasterGrid&)>& op) {
    RasterGrid grid = load_grid(io.grid_path);
    if (!io.in_file.empty()) {
        Field f = load_field(io.in_file, grid);
        save_field(op(f, grid), grid, io.out_file.empty() ? io.in_file : io.out_file);
        return;
    }
    if (io.in_dir.empty()) throw ParseError("need --in or --in-dir");
    FieldSet fsd = load_field_set(io.in_dir, grid, io.prefix);
    FieldSet out;
    out.m = op(fsd.m, grid);
    out.d = op(fsd.d, grid);
    out.p = op(fsd.p, grid);
    out.bx = op(fsd.bx, grid);
    out.by = op(fsd.by, grid);
    save_field_set(out, grid, io.out_dir.empty() ? io.in_dir : io.out_dir, io.prefix);
}

int run(int argc, char** argv) {
    CLI::App app{"swingpde: discrete swing dynamics and its continuum reduction"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(kVersion));

    // A config file presets the defaults of the matching flags; flags given
    // on the command line override it.
    RunConfig cfg;
    for (int a = 1; a + 1 < argc; ++a)
        if (std::string_view(argv[a]) == "--config") cfg = RunConfig::from_file(argv[a + 1]);
    std::string config_path;
    app.add_option("--config", config_path, "run configuration JSON (presets flag defaults)");

    // ---- gen ------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a network file");
    std::string gen_lattice, gen_out = "network.json";
    bool gen_continental = false;
    double gen_b = 1.0, gen_m = 1.0, gen_d = 0.1, gen_spacing = 50.0, gen_het = 0.5;
    std::string gen_pattern = "dipole", gen_polygon;
    std::uint64_t gen_seed = 1;
    int gen_n_buses = 3800;
    gen->add_option("--lattice", gen_lattice, "lattice dimensions, e.g. 20x20");
    gen->add_flag("--continental", gen_continental, "synthetic continental-scale network");
    gen->add_option("--b", gen_b, "branch susceptance (lattice)");
    gen->add_option("--m", gen_m, "bus inertia (lattice)");
    gen->add_option("--d", gen_d, "bus damping (lattice)");
    gen->add_option("--spacing", gen_spacing, "lattice spacing, km");
    gen->add_option("--pattern", gen_pattern, "injection pattern: balanced_dipole|zero");
    gen->add_option("--seed", gen_seed, "random seed (continental)");
    gen->add_option("--n-buses", gen_n_buses, "bus count (continental)");
    gen->add_option("--polygon", gen_polygon, "region polygon JSON file (continental)");
    gen->add_option("--het", gen_het, "parameter heterogeneity in [0,1) (continental)");
    gen->add_option("-o,--out", gen_out, "output network file");
    gen->callback([&] {
        if (!gen_lattice.empty()) {
            auto x = gen_lattice.find('x');
            if (x == std::string::npos) throw ParseError("--lattice expects NXxNY");
            int nx = std::stoi(gen_lattice.substr(0, x));
            int ny = std::stoi(gen_lattice.substr(x + 1));
            InjectionPattern pattern;
            if (gen_pattern == "zero")
                pattern = InjectionPattern::Zero;
            else if (gen_pattern == "dipole" || gen_pattern == "balanced_dipole")
                pattern = InjectionPattern::BalancedDipole;
            else
                throw ParseError("unknown injection pattern: " + gen_pattern);
            save_network(generate_lattice_network(nx, ny, gen_b, gen_m, gen_d, gen_spacing,
                                                  pattern),
                         gen_out, "lattice " + gen_lattice);
        } else if (gen_continental) {
            Polygon poly = gen_polygon.empty() ? default_continental_polygon()
                                               : load_polygon(gen_polygon);
            Heterogeneity het{gen_het, gen_het, gen_het, gen_het};
            save_network(generate_synthetic_continental(gen_seed, gen_n_buses, poly, het),
                         gen_out, "synthetic continental");
        } else {
            throw ParseError("gen needs --lattice or --continental");
        }
        std::cout << "wrote " << gen_out << "\n";
    });

    // ---- ode-steady -------------------------------------------------------
    auto* ode_steady = app.add_subcommand("ode-steady", "discrete steady-state angles");
    std::string os_net = cfg.paths.network, os_out = "ode_steady.csv";
    ode_steady->add_option("--network", os_net);
    ode_steady->add_option("-o,--out", os_out);
    ode_steady->callback([&] {
        if (os_net.empty()) throw ParseError("ode-steady needs --network (flag or config)");
        PowerNetwork net = load_network(os_net);
        save_angles_csv(net, ode_steady_state(net), os_out);
        std::cout << "wrote " << os_out << "\n";
    });

    // ---- ode-sim ----------------------------------------------------------
    auto* ode_sim = app.add_subcommand("ode-sim", "integrate the discrete swing dynamics");
    std::string oss_net = cfg.paths.network, oss_out = "ode_traj.csv";
    FaultScenario oss_fault;
    double oss_toff = -1.0;
    SimParams oss_params = cfg.sim;
    std::vector<int> oss_probes = cfg.probes;
    ode_sim->add_option("--network", oss_net);
    ode_sim->add_option("--target", oss_fault.target, "faulted bus id")->required();
    ode_sim->add_option("--dp", oss_fault.dp, "injection step, p.u.")->required();
    ode_sim->add_option("--t-on", oss_fault.t_on);
    ode_sim->add_option("--t-off", oss_toff, "clearing time (omit for permanent)");
    ode_sim->add_option("--dt", oss_params.dt);
    ode_sim->add_option("--t-end", oss_params.t_end);
    ode_sim->add_option("--stride", oss_params.sample_stride);
    ode_sim->add_option("--probes", oss_probes, "bus ids to sample")->delimiter(',');
    ode_sim->add_option("-o,--out", oss_out);
    ode_sim->callback([&] {
        if (oss_net.empty()) throw ParseError("ode-sim needs --network (flag or config)");
        PowerNetwork net = load_network(oss_net);
        if (oss_toff >= 0.0) oss_fault.t_off = oss_toff;
        if (oss_probes.empty()) oss_probes.push_back(net.buses().front().id);
        save_trajectory(simulate_swing(net, oss_fault, oss_params, oss_probes), oss_out);
        std::cout << "wrote " << oss_out << "\n";
    });

    // ---- grid-build ---------------------------------------------------------
    auto* grid_build = app.add_subcommand("grid-build", "rasterise the service territory");
    std::string gb_net = cfg.paths.network, gb_out = "grid.txt";
    double gb_delta = cfg.grid.delta, gb_dilation = cfg.grid.dilation;
    bool gb_tight = cfg.grid.tight, gb_no_thicken = false;
    grid_build->add_option("--network", gb_net);
    grid_build->add_option("--delta", gb_delta, "cell spacing, km");
    grid_build->add_option("--dilation", gb_dilation, "mask dilation, km (>= delta)");
    grid_build->add_flag("--tight", gb_tight, "mask only cells the network touches");
    grid_build->add_flag("--no-thicken", gb_no_thicken, "keep one-cell protrusions");
    grid_build->add_option("-o,--out", gb_out);
    grid_build->callback([&] {
        if (gb_net.empty()) throw ParseError("grid-build needs --network (flag or config)");
        PowerNetwork net = load_network(gb_net);
        GridBuildOptions opts;
        opts.tight = gb_tight;
        opts.thicken = !gb_no_thicken;
        std::string warning;
        RasterGrid grid = build_grid(net, gb_delta, gb_dilation, opts, &warning);
        if (!warning.empty()) std::cerr << "warning: " << warning << "\n";
        save_grid(grid, gb_out);
        std::cout << "wrote " << gb_out << " (" << grid.cell_count() << " cells, hash "
                  << hash_hex(grid.content_hash()) << ")\n";
    });

    // ---- deposit -----------------------------------------------------------
    auto* deposit = app.add_subcommand("deposit", "map bus/branch parameters onto the grid");
    std::string dp_net = cfg.paths.network, dp_grid = cfg.paths.grid;
    std::string dp_out = cfg.paths.fields_dir.empty() ? "fields" : cfg.paths.fields_dir;
    std::string dp_prefix = "field";
    deposit->add_option("--network", dp_net);
    deposit->add_option("--grid", dp_grid);
    deposit->add_option("-o,--out-dir", dp_out)->envname("SWINGPDE_OUTDIR");
    deposit->add_option("--prefix", dp_prefix);
    deposit->callback([&] {
        if (dp_net.empty() || dp_grid.empty())
            throw ParseError("deposit needs --network and --grid (flags or config)");
        PowerNetwork net = load_network(dp_net);
        RasterGrid grid = load_grid(dp_grid);
        FieldSet fsd;
        fsd.m = deposit_nodal(net, grid, Quantity::M);
        fsd.d = deposit_nodal(net, grid, Quantity::D);
        fsd.p = deposit_nodal(net, grid, Quantity::P);
        std::tie(fsd.bx, fsd.by) = deposit_lines(net, grid);
        save_field_set(fsd, grid, dp_out, dp_prefix);
        std::cout << "wrote " << dp_out << "/" << dp_prefix << "_{m,d,p,b_x,b_y}.txt\n";
    });

    // ---- diffuse -----------------------------------------------------------
    auto* diffuse = app.add_subcommand("diffuse", "artificial diffusion of a field");
    FieldStageIo df_io;
    df_io.grid_path = cfg.paths.grid;
    df_io.in_dir = cfg.paths.fields_dir;
    double df_kappa = cfg.fields.kappa, df_tol = cfg.fields.smooth_tol;
    long df_max = cfg.fields.max_iterations;
    bool df_no_isotropy = false;
    diffuse->add_option("--grid", df_io.grid_path);
    diffuse->add_option("--in", df_io.in_file, "single field file");
    diffuse->add_option("-o,--out", df_io.out_file);
    diffuse->add_option("--in-dir", df_io.in_dir, "field-set directory");
    diffuse->add_option("--out-dir", df_io.out_dir);
    diffuse->add_option("--prefix", df_io.prefix);
    diffuse->add_option("--kappa", df_kappa, "diffusion number in (0, 0.25]");
    diffuse->add_option("--tol", df_tol, "smoothness stopping tolerance");
    diffuse->add_option("--max-iters", df_max);
    diffuse->add_flag("--no-isotropy", df_no_isotropy,
                      "skip the b_x/b_y isotropy reduction (dir mode)");
    diffuse->callback([&] {
        if (df_io.grid_path.empty()) throw ParseError("diffuse needs --grid (flag or config)");
        DiffusionOptions opts;
        opts.smooth_tol = df_tol;
        opts.max_iterations = df_max;
        RasterGrid grid = load_grid(df_io.grid_path);
        if (!df_io.in_file.empty()) {
            Field f = load_field(df_io.in_file, grid);
            DiffusionResult res = artificial_diffusion(f, grid, df_kappa, opts);
            save_field(res.field, grid,
                       df_io.out_file.empty() ? df_io.in_file : df_io.out_file);
            std::cout << "diffused " << res.iterations << " iterations, smoothness "
                      << format_sig9(res.smoothness) << "\n";
            return;
        }
        if (df_io.in_dir.empty()) throw ParseError("need --in or --in-dir");
        FieldSet fsd = load_field_set(df_io.in_dir, grid, df_io.prefix);
        long total_iters = 0;
        auto run1 = [&](Field& f) {
            DiffusionResult res = artificial_diffusion(f, grid, df_kappa, opts);
            total_iters += res.iterations;
            f = std::move(res.field);
        };
        run1(fsd.m);
        run1(fsd.d);
        run1(fsd.p);
        run1(fsd.bx);
        run1(fsd.by);
        if (!df_no_isotropy) {
            IsotropyResult iso = isotropy_reduce(fsd.bx, fsd.by, grid);
            std::cout << "anisotropy " << format_sig9(iso.anisotropy) << "\n";
            fsd.bx.values = iso.b.values;
            fsd.by.values = iso.b.values;
        }
        save_field_set(fsd, grid, df_io.out_dir.empty() ? df_io.in_dir : df_io.out_dir,
                       df_io.prefix);
        std::cout << "diffused field set (" << total_iters << " iterations total)\n";
    });

    // ---- filter ------------------------------------------------------------
    auto* filter = app.add_subcommand("filter", "Fourier low-pass of a field");
    FieldStageIo fl_io;
    fl_io.grid_path = cfg.paths.grid;
    fl_io.in_dir = cfg.paths.fields_dir;
    double fl_cutoff = cfg.fields.cutoff > 0.0 ? cfg.fields.cutoff : 0.3;
    std::string fl_pad = cfg.fields.pad;
    filter->add_option("--grid", fl_io.grid_path);
    filter->add_option("--in", fl_io.in_file);
    filter->add_option("-o,--out", fl_io.out_file);
    filter->add_option("--in-dir", fl_io.in_dir);
    filter->add_option("--out-dir", fl_io.out_dir);
    filter->add_option("--prefix", fl_io.prefix);
    filter->add_option("--cutoff", fl_cutoff, "fraction of the max spatial frequency");
    filter->add_option("--pad", fl_pad, "exterior fill: mirror|zero");
    std::string fl_shape = "per-axis";
    filter->add_option("--shape", fl_shape, "cutoff shape: per-axis|radial");
    filter->callback([&] {
        if (fl_io.grid_path.empty()) throw ParseError("filter needs --grid (flag or config)");
        FilterOptions opts;
        opts.pad = fl_pad == "zero" ? PadMode::Zero : PadMode::Mirror;
        opts.shape = fl_shape == "radial" ? CutoffShape::Radial : CutoffShape::PerAxis;
        run_field_stage(fl_io, [&](const Field& f, const RasterGrid& g) {
            return fourier_lowpass(f, g, fl_cutoff, opts);
        });
        std::cout << "filtered at cutoff " << fl_cutoff << "\n";
    });

    // ---- region-scale --------------------------------------------------------
    auto* rscale = app.add_subcommand("region-scale", "scale a field inside a polygon");
    FieldStageIo rs_io;
    rs_io.grid_path = cfg.paths.grid;
    rs_io.in_dir = cfg.paths.fields_dir;
    std::string rs_poly;
    double rs_factor = 1.0;
    rscale->add_option("--grid", rs_io.grid_path);
    rscale->add_option("--in", rs_io.in_file);
    rscale->add_option("-o,--out", rs_io.out_file);
    rscale->add_option("--in-dir", rs_io.in_dir);
    rscale->add_option("--out-dir", rs_io.out_dir);
    rscale->add_option("--prefix", rs_io.prefix);
    rscale->add_option("--polygon", rs_poly, "polygon JSON file")->required();
    rscale->add_option("--factor", rs_factor)->required();
    rscale->callback([&] {
        if (rs_io.grid_path.empty()) throw ParseError("region-scale needs --grid (flag or config)");
        Polygon poly = load_polygon(rs_poly);
        run_field_stage(rs_io, [&](const Field& f, const RasterGrid& g) {
            return region_scale(f, g, poly, rs_factor);
        });
        std::cout << "scaled by " << rs_factor << "\n";
    });

    // ---- pde-steady -----------------------------------------------------------
    auto* pde_steady = app.add_subcommand("pde-steady", "continuum steady-state angles");
    std::string ps_grid = cfg.paths.grid, ps_fields = cfg.paths.fields_dir;
    std::string ps_prefix = "field", ps_out = "pde_steady.txt";
    pde_steady->add_option("--grid", ps_grid);
    pde_steady->add_option("--fields-dir", ps_fields);
    pde_steady->add_option("--prefix", ps_prefix);
    pde_steady->add_option("-o,--out", ps_out);
    pde_steady->callback([&] {
        if (ps_grid.empty() || ps_fields.empty())
            throw ParseError("pde-steady needs --grid and --fields-dir (flags or config)");
        RasterGrid grid = load_grid(ps_grid);
        FieldSet fsd = load_finalized(ps_fields, grid, ps_prefix);
        Field theta = make_field(grid, Quantity::Aux);
        theta.values = pde_steady_state(fsd, grid);
        save_field(theta, grid, ps_out, "theta");
        std::cout << "wrote " << ps_out << "\n";
    });

    // ---- pde-sim ---------------------------------------------------------------
    auto* pde_sim = app.add_subcommand("pde-sim", "integrate the continuum swing equation");
    std::string psim_grid = cfg.paths.grid, psim_fields = cfg.paths.fields_dir;
    std::string psim_prefix = "field", psim_net = cfg.paths.network, psim_out = "pde_traj.csv";
    std::string psim_snap_dir = ".";
    int psim_target_bus = -1, psim_target_cell = -1;
    double psim_dp = 0.0, psim_ton = 0.0, psim_toff = -1.0;
    SimParams psim_params = cfg.sim;
    std::vector<int> psim_probe_buses = cfg.probes, psim_probe_cells;
    std::vector<double> psim_snapshots;
    pde_sim->add_option("--grid", psim_grid);
    pde_sim->add_option("--fields-dir", psim_fields);
    pde_sim->add_option("--prefix", psim_prefix);
    pde_sim->add_option("--network", psim_net, "needed to address buses");
    pde_sim->add_option("--target", psim_target_bus, "faulted bus id (needs --network)");
    pde_sim->add_option("--target-cell", psim_target_cell, "faulted cell index");
    pde_sim->add_option("--dp", psim_dp)->required();
    pde_sim->add_option("--t-on", psim_ton);
    pde_sim->add_option("--t-off", psim_toff, "clearing time (omit for permanent)");
    pde_sim->add_option("--dt", psim_params.dt);
    pde_sim->add_option("--t-end", psim_params.t_end);
    pde_sim->add_option("--stride", psim_params.sample_stride);
    pde_sim->add_option("--probes", psim_probe_buses, "probe bus ids")->delimiter(',');
    pde_sim->add_option("--probe-cells", psim_probe_cells)->delimiter(',');
    pde_sim->add_option("--snapshot-times", psim_snapshots)->delimiter(',');
    pde_sim->add_option("--snapshot-dir", psim_snap_dir);
    pde_sim->add_option("-o,--out", psim_out);
    pde_sim->callback([&] {
        if (psim_grid.empty() || psim_fields.empty())
            throw ParseError("pde-sim needs --grid and --fields-dir (flags or config)");
        RasterGrid grid = load_grid(psim_grid);
        FieldSet fsd = load_finalized(psim_fields, grid, psim_prefix);

        std::optional<PowerNetwork> net;
        std::optional<NodeCellMap> map;
        if (!psim_net.empty()) {
            net.emplace(load_network(psim_net));
            map = make_node_cell_map(*net, grid);
        }

        CellFault fault;
        fault.dp = psim_dp;
        fault.t_on = psim_ton;
        if (psim_toff >= 0.0) fault.t_off = psim_toff;
        if (psim_target_cell >= 0)
            fault.cell = psim_target_cell;
        else if (psim_target_bus >= 0 && map)
            fault.cell = map->cell_of(*net, psim_target_bus);
        else
            throw ParseError("pde-sim needs --target-cell, or --target with --network");

        std::vector<int> cells = psim_probe_cells, ids = psim_probe_cells;
        for (int bus : psim_probe_buses) {
            if (!map) throw ParseError("--probes needs --network");
            cells.push_back(map->cell_of(*net, bus));
            ids.push_back(bus);
        }
        if (cells.empty()) {
            cells.push_back(fault.cell);
            ids.push_back(fault.cell);
        }

        SnapshotRequest snaps;
        std::optional<SnapshotRequest> snap_opt;
        if (!psim_snapshots.empty()) {
            fs::create_directories(psim_snap_dir);
            snaps.times = psim_snapshots;
            snaps.sink = [&](double t, const Eigen::VectorXd& th, const Eigen::VectorXd& om) {
                Field f = make_field(grid, Quantity::Aux);
                f.values = th;
                save_field(f, grid, fs::path(psim_snap_dir) / ("theta_t" + format_sig9(t) + ".txt"),
                           "theta");
                f.values = om;
                save_field(f, grid, fs::path(psim_snap_dir) / ("omega_t" + format_sig9(t) + ".txt"),
                           "omega");
            };
            snap_opt = snaps;
        }

        Trajectory traj = crank_nicolson_simulate(fsd, grid, fault, psim_params, cells, ids,
                                                  snap_opt ? &*snap_opt : nullptr);
        save_trajectory(traj, psim_out);
        std::cout << "wrote " << psim_out << "\n";
    });

    // ---- speedmap -----------------------------------------------------------
    auto* speedmap = app.add_subcommand("speedmap", "wave-speed map c = sqrt(b/m)");
    std::string sm_grid = cfg.paths.grid, sm_fields = cfg.paths.fields_dir;
    std::string sm_prefix = "field", sm_out = "speed.txt", sm_average = "none";
    speedmap->add_option("--grid", sm_grid);
    speedmap->add_option("--fields-dir", sm_fields);
    speedmap->add_option("--prefix", sm_prefix);
    speedmap->add_option("--average", sm_average,
                         "replace c by a uniform value: none|mean-speed|speed-of-means");
    speedmap->add_option("-o,--out", sm_out);
    speedmap->callback([&] {
        if (sm_grid.empty() || sm_fields.empty())
            throw ParseError("speedmap needs --grid and --fields-dir (flags or config)");
        RasterGrid grid = load_grid(sm_grid);
        FieldSet fsd = load_finalized(sm_fields, grid, sm_prefix);
        Field c = sm_average == "none"
                      ? wave_speed_map(fsd, grid)
                      : homogenized_speed(fsd, grid,
                                          sm_average == "speed-of-means"
                                              ? FrontAveraging::SpeedOfMeans
                                              : FrontAveraging::MeanOfSpeed);
        save_field(c, grid, sm_out, "c");
        std::cout << "wrote " << sm_out << "\n";
    });

    // ---- front ---------------------------------------------------------------
    auto* front = app.add_subcommand("front", "disturbance front arrival times");
    std::string fr_grid = cfg.paths.grid, fr_speed, fr_net = cfg.paths.network;
    std::string fr_out = "arrival.txt";
    int fr_source_cell = -1, fr_source_bus = -1;
    front->add_option("--grid", fr_grid);
    front->add_option("--speed", fr_speed, "wave-speed field file")->required();
    front->add_option("--network", fr_net);
    front->add_option("--source-cell", fr_source_cell);
    front->add_option("--source-bus", fr_source_bus, "needs --network");
    front->add_option("-o,--out", fr_out);
    front->callback([&] {
        if (fr_grid.empty()) throw ParseError("front needs --grid (flag or config)");
        RasterGrid grid = load_grid(fr_grid);
        Field speed = load_field(fr_speed, grid);
        int source = fr_source_cell;
        if (source < 0 && fr_source_bus >= 0) {
            if (fr_net.empty()) throw ParseError("--source-bus needs --network");
            PowerNetwork net = load_network(fr_net);
            source = make_node_cell_map(net, grid).cell_of(net, fr_source_bus);
        }
        if (source < 0) throw ParseError("front needs --source-cell or --source-bus");
        Field arrival = make_field(grid, Quantity::Aux);
        arrival.values = front_arrival(speed, grid, source);
        save_field(arrival, grid, fr_out, "arrival");
        std::cout << "wrote " << fr_out << "\n";
    });

    // ---- compare ---------------------------------------------------------------
    auto* compare = app.add_subcommand("compare", "discrete vs continuum comparison");
    std::string cp_net = cfg.paths.network, cp_grid = cfg.paths.grid;
    std::string cp_disc, cp_cont, cp_traj_a, cp_traj_b;
    std::string cp_out = "comparison.txt", cp_scatter = "comparison_scatter.csv";
    double cp_arrival_threshold = 0.0;
    compare->add_option("--network", cp_net);
    compare->add_option("--grid", cp_grid);
    compare->add_option("--disc", cp_disc, "discrete angles CSV (from ode-steady)");
    compare->add_option("--cont", cp_cont, "continuum theta field (from pde-steady)");
    compare->add_option("--traj-a", cp_traj_a, "reference trajectory CSV");
    compare->add_option("--traj-b", cp_traj_b, "trajectory CSV to compare");
    compare->add_option("--arrival-threshold", cp_arrival_threshold);
    compare->add_option("-o,--out", cp_out);
    compare->add_option("--scatter", cp_scatter);
    compare->callback([&] {
        if (!cp_disc.empty()) {
            if (cp_net.empty() || cp_grid.empty() || cp_cont.empty())
                throw ParseError("steady comparison needs --network, --grid, --disc, --cont");
            PowerNetwork net = load_network(cp_net);
            RasterGrid grid = load_grid(cp_grid);
            Eigen::VectorXd disc = load_angles_csv(net, cp_disc);
            Field cont = load_field(cp_cont, grid);
            NodeCellMap map = make_node_cell_map(net, grid);
            SteadyComparison cmp = compare_steady(net, disc, cont.values, map);
            save_steady_comparison(cmp, cp_out, cp_scatter);
            std::cout << "steady RMSE " << format_sig9(cmp.rmse) << " rad, max "
                      << format_sig9(cmp.max_abs_error) << " rad, " << cmp.outliers.size()
                      << " outlier(s); wrote " << cp_out << "\n";
        } else if (!cp_traj_a.empty()) {
            if (cp_traj_b.empty()) throw ParseError("dynamic comparison needs --traj-a and --traj-b");
            DynamicCompareOptions opts;
            opts.arrival_threshold = cp_arrival_threshold;
            DynamicComparison cmp =
                compare_dynamics(load_trajectory(cp_traj_a), load_trajectory(cp_traj_b), opts);
            save_dynamic_comparison(cmp, cp_out);
            std::cout << "terminal difference "
                      << format_sig9(cmp.terminal_global_difference) << " rad/s; wrote "
                      << cp_out << "\n";
        } else {
            throw ParseError("compare needs --disc/--cont (steady) or --traj-a/--traj-b");
        }
    });

    // ---- screen ----------------------------------------------------------------
    auto* screen = app.add_subcommand("screen", "batch scenario screening");
    int sc_workers = 0;
    std::string sc_out;
    screen->add_option("--workers", sc_workers, "override config worker count");
    screen->add_option("--out-dir", sc_out)->envname("SWINGPDE_OUTDIR");
    screen->callback([&] {
        if (config_path.empty()) throw ParseError("screen needs --config");
        RunConfig run_cfg = cfg;
        if (sc_workers > 0) run_cfg.workers = sc_workers;
        if (!sc_out.empty()) run_cfg.paths.out_dir = sc_out;
        ScreenResult res = run_screen(run_cfg);
        std::cout << "setup " << format_sig9(res.setup_seconds) << " s\n";
        for (std::size_t i = 0; i < res.outcomes.size(); ++i) {
            const ScenarioOutcome& o = res.outcomes[i];
            std::cout << "scenario " << i << ": target " << o.scenario.target << ", dp "
                      << format_sig9(o.scenario.dp) << ", terminal "
                      << format_sig9(o.terminal_global_omega) << " rad/s, wall "
                      << format_sig9(o.wall_seconds) << " s\n";
        }
        std::cout << "wrote " << res.summary_file << "\n";
    });

    for (CLI::App* sub : app.get_subcommands({}))
        sub->set_version_flag("--version", std::string(kVersion));

    argv = app.ensure_utf8(argv);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
