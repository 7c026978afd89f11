#include "swingpde/screen.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "swingpde/analysis.hpp"
#include "swingpde/io.hpp"
#include "swingpde/pde_core.hpp"

namespace swingpde {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known) throw ParseError("config " + where + ": unknown key '" + it.key() + "'");
    }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed config: ") + e.what());
    }
    reject_unknown(doc, {"paths", "grid", "fields", "sim", "probes", "scenarios", "workers"},
                   "document");

    RunConfig cfg;
    if (doc.contains("paths")) {
        const json& p = doc.at("paths");
        reject_unknown(p, {"network", "grid", "fields_dir", "out_dir"}, "paths");
        cfg.paths.network = p.value("network", cfg.paths.network);
        cfg.paths.grid = p.value("grid", cfg.paths.grid);
        cfg.paths.fields_dir = p.value("fields_dir", cfg.paths.fields_dir);
        cfg.paths.out_dir = p.value("out_dir", cfg.paths.out_dir);
    }
    if (doc.contains("grid")) {
        const json& g = doc.at("grid");
        reject_unknown(g, {"delta", "dilation", "tight"}, "grid");
        cfg.grid.delta = g.value("delta", cfg.grid.delta);
        cfg.grid.dilation = g.value("dilation", cfg.grid.dilation);
        cfg.grid.tight = g.value("tight", cfg.grid.tight);
    }
    if (doc.contains("fields")) {
        const json& f = doc.at("fields");
        reject_unknown(f, {"kappa", "smooth_tol", "max_iterations", "cutoff", "pad"},
                       "fields");
        cfg.fields.kappa = f.value("kappa", cfg.fields.kappa);
        cfg.fields.smooth_tol = f.value("smooth_tol", cfg.fields.smooth_tol);
        cfg.fields.max_iterations = f.value("max_iterations", cfg.fields.max_iterations);
        cfg.fields.cutoff = f.value("cutoff", cfg.fields.cutoff);
        cfg.fields.pad = f.value("pad", cfg.fields.pad);
    }
    if (doc.contains("sim")) {
        const json& s = doc.at("sim");
        reject_unknown(s, {"dt", "t_end", "sample_stride"}, "sim");
        cfg.sim.dt = s.value("dt", cfg.sim.dt);
        cfg.sim.t_end = s.value("t_end", cfg.sim.t_end);
        cfg.sim.sample_stride = s.value("sample_stride", cfg.sim.sample_stride);
    }
    if (doc.contains("probes")) cfg.probes = doc.at("probes").get<std::vector<int>>();
    if (doc.contains("scenarios"))
        for (const json& s : doc.at("scenarios")) {
            reject_unknown(s, {"target", "dp", "t_on", "t_off"}, "scenario");
            FaultScenario sc;
            sc.target = s.at("target").get<int>();
            sc.dp = s.at("dp").get<double>();
            sc.t_on = s.value("t_on", 0.0);
            if (s.contains("t_off")) sc.t_off = s.at("t_off").get<double>();
            sc.validate();
            cfg.scenarios.push_back(sc);
        }
    if (doc.contains("workers")) cfg.workers = doc.at("workers").get<int>();
    return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

ScreenResult run_screen(const RunConfig& config) {
    if (config.scenarios.empty()) throw ValidationError("screen needs at least one scenario");
    if (config.paths.network.empty()) throw ValidationError("screen needs a network path");

    const std::filesystem::path out_dir = config.paths.out_dir;
    std::filesystem::create_directories(out_dir);

    const auto t_setup = std::chrono::steady_clock::now();

    // Shared, scenario-independent work: model, grid, coefficient fields,
    // stencil, factorisation and the pre-fault steady state.
    PowerNetwork net = load_network(config.paths.network);

    RasterGrid grid = [&] {
        if (!config.paths.grid.empty()) return load_grid(config.paths.grid);
        GridBuildOptions opts;
        opts.tight = config.grid.tight;
        return build_grid(net, config.grid.delta, config.grid.dilation, opts);
    }();

    FieldSet fields = [&]() -> FieldSet {
        if (!config.paths.fields_dir.empty()) return load_field_set(config.paths.fields_dir, grid);
        FieldSet fs;
        fs.m = deposit_nodal(net, grid, Quantity::M);
        fs.d = deposit_nodal(net, grid, Quantity::D);
        fs.p = deposit_nodal(net, grid, Quantity::P);
        std::tie(fs.bx, fs.by) = deposit_lines(net, grid);
        DiffusionOptions dopts;
        dopts.smooth_tol = config.fields.smooth_tol;
        dopts.max_iterations = config.fields.max_iterations;
        fs.m = artificial_diffusion(fs.m, grid, config.fields.kappa, dopts).field;
        fs.d = artificial_diffusion(fs.d, grid, config.fields.kappa, dopts).field;
        fs.p = artificial_diffusion(fs.p, grid, config.fields.kappa, dopts).field;
        fs.bx = artificial_diffusion(fs.bx, grid, config.fields.kappa, dopts).field;
        fs.by = artificial_diffusion(fs.by, grid, config.fields.kappa, dopts).field;
        IsotropyResult iso = isotropy_reduce(fs.bx, fs.by, grid);
        fs.bx.values = iso.b.values;
        fs.by.values = iso.b.values;
        if (config.fields.cutoff > 0.0) {
            FilterOptions fopts;
            fopts.pad = config.fields.pad == "zero" ? PadMode::Zero : PadMode::Mirror;
            fs.m = fourier_lowpass(fs.m, grid, config.fields.cutoff, fopts);
            fs.d = fourier_lowpass(fs.d, grid, config.fields.cutoff, fopts);
            fs.p = fourier_lowpass(fs.p, grid, config.fields.cutoff, fopts);
            fs.bx = fourier_lowpass(fs.bx, grid, config.fields.cutoff, fopts);
            fs.by = fourier_lowpass(fs.by, grid, config.fields.cutoff, fopts);
        }
        return finalize_fields(fs, grid);
    }();

    NodeCellMap map = make_node_cell_map(net, grid);

    std::vector<int> probe_cells, probe_ids;
    for (int bus : config.probes) {
        probe_cells.push_back(map.cell_of(net, bus));
        probe_ids.push_back(bus);
    }

    Eigen::VectorXd theta0 = pde_steady_state(fields, grid);
    CrankNicolsonStepper stepper(pde_system(fields, grid), config.sim.dt);

    ScreenResult result;
    result.setup_seconds = seconds_since(t_setup);
    result.outcomes.resize(config.scenarios.size());

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&] {
        while (true) {
            std::size_t idx = next.fetch_add(1);
            if (idx >= config.scenarios.size()) return;
            try {
                const FaultScenario& sc = config.scenarios[idx];
                const auto t_run = std::chrono::steady_clock::now();

                CellFault fault;
                fault.cell = map.cell_of(net, sc.target);
                fault.dp = sc.dp;
                fault.t_on = sc.t_on;
                fault.t_off = sc.t_off;

                SimulateOptions opts;
                opts.probe_indices = probe_cells;
                opts.probe_ids = probe_ids;

                InjectionSchedule inj = pde_injections(fields, fault);
                StepperState state = stepper.initial_state(
                    theta0, Eigen::VectorXd::Zero(theta0.size()), inj);
                Trajectory traj = stepper.simulate(std::move(state), inj, config.sim, opts);

                ScenarioOutcome& out = result.outcomes[idx];
                out.scenario = sc;
                out.terminal_global_omega = traj.terminal_global_omega();
                out.max_abs_omega =
                    traj.omega.size() > 0 ? traj.omega.cwiseAbs().maxCoeff() : 0.0;
                std::ostringstream name;
                name << "scenario_" << idx;
                out.trajectory_file = (out_dir / (name.str() + ".csv")).string();
                save_trajectory(traj, out.trajectory_file);

                std::ofstream rep(out_dir / (name.str() + "_report.txt"));
                rep << "scenario " << idx << "\n";
                rep << "target " << sc.target << "\n";
                rep << "dp " << format_sig9(sc.dp) << "\n";
                rep << "t_on " << format_sig9(sc.t_on) << "\n";
                if (sc.t_off) rep << "t_off " << format_sig9(*sc.t_off) << "\n";
                rep << "terminal_global_omega " << format_sig9(out.terminal_global_omega)
                    << "\n";
                rep << "max_abs_omega " << format_sig9(out.max_abs_omega) << "\n";
                rep << "trajectory " << name.str() << ".csv\n";

                out.wall_seconds = seconds_since(t_run);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const int n_workers =
        std::max(1, std::min<int>(config.workers, static_cast<int>(config.scenarios.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    // Ranked summary: strongest terminal frequency shift first. Wall times
    // stay out of the file so reruns are byte-identical.
    std::vector<std::size_t> order(result.outcomes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double ta = std::abs(result.outcomes[a].terminal_global_omega);
        double tb = std::abs(result.outcomes[b].terminal_global_omega);
        if (ta != tb) return ta > tb;
        if (result.outcomes[a].max_abs_omega != result.outcomes[b].max_abs_omega)
            return result.outcomes[a].max_abs_omega > result.outcomes[b].max_abs_omega;
        return a < b;
    });

    result.summary_file = (out_dir / "screen_summary.txt").string();
    std::ofstream summary(result.summary_file);
    summary << "rank,scenario,target,dp,t_on,terminal_global_omega,max_abs_omega,trajectory\n";
    for (std::size_t r = 0; r < order.size(); ++r) {
        const ScenarioOutcome& o = result.outcomes[order[r]];
        summary << r + 1 << "," << order[r] << "," << o.scenario.target << ","
                << format_sig9(o.scenario.dp) << "," << format_sig9(o.scenario.t_on) << ","
                << format_sig9(o.terminal_global_omega) << ","
                << format_sig9(o.max_abs_omega) << ","
                << std::filesystem::path(o.trajectory_file).filename().string() << "\n";
    }
    return result;
}

}  // namespace swingpde
