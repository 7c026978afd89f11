#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "swingpde/analysis.hpp"
#include "swingpde/io.hpp"
#include "swingpde/ode_core.hpp"
#include "swingpde/pde_core.hpp"
#include "swingpde/screen.hpp"
#include "swingpde/version.hpp"

namespace py = pybind11;
using namespace swingpde;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Discrete power-grid swing dynamics and its 2+1D continuum reduction";
    m.attr("__version__") = kVersion;

    py::register_exception<ParseError>(m, "ParseError");
    py::register_exception<ValidationError>(m, "ValidationError");
    py::register_exception<SolverError>(m, "SolverError");

    // ---- network ----------------------------------------------------------
    py::class_<Bus>(m, "Bus")
        .def(py::init([](int id, double x, double y, double mm, double d, double p, double v) {
                 return Bus{id, x, y, mm, d, p, v};
             }),
             py::arg("id"), py::arg("x"), py::arg("y"), py::arg("m"), py::arg("d"),
             py::arg("p"), py::arg("v") = 1.0)
        .def_readwrite("id", &Bus::id)
        .def_readwrite("x", &Bus::x)
        .def_readwrite("y", &Bus::y)
        .def_readwrite("m", &Bus::m)
        .def_readwrite("d", &Bus::d)
        .def_readwrite("p", &Bus::p)
        .def_readwrite("v", &Bus::v);

    py::class_<Branch>(m, "Branch")
        .def(py::init([](int from, int to, double b) { return Branch{from, to, b, b}; }),
             py::arg("from_bus"), py::arg("to_bus"), py::arg("b"))
        .def_readwrite("from_bus", &Branch::from)
        .def_readwrite("to_bus", &Branch::to)
        .def_readwrite("b", &Branch::b);

    py::class_<FaultScenario>(m, "FaultScenario")
        .def(py::init([](int target, double dp, double t_on, std::optional<double> t_off) {
                 FaultScenario s{target, dp, t_on, t_off};
                 s.validate();
                 return s;
             }),
             py::arg("target"), py::arg("dp"), py::arg("t_on") = 0.0,
             py::arg("t_off") = std::nullopt)
        .def_readwrite("target", &FaultScenario::target)
        .def_readwrite("dp", &FaultScenario::dp)
        .def_readwrite("t_on", &FaultScenario::t_on)
        .def_readwrite("t_off", &FaultScenario::t_off)
        .def("permanent", &FaultScenario::permanent);

    py::class_<PowerNetwork>(m, "PowerNetwork")
        .def(py::init<std::vector<Bus>, std::vector<Branch>>(), py::arg("buses"),
             py::arg("branches"))
        .def_property_readonly("buses", &PowerNetwork::buses)
        .def_property_readonly("branches", &PowerNetwork::branches)
        .def("__len__", &PowerNetwork::size)
        .def("index_of", &PowerNetwork::index_of)
        .def("total_injection", &PowerNetwork::total_injection)
        .def("total_damping", &PowerNetwork::total_damping)
        .def("is_balanced", &PowerNetwork::is_balanced, py::arg("rel_tol") = 1e-9);

    py::enum_<InjectionPattern>(m, "InjectionPattern")
        .value("BalancedDipole", InjectionPattern::BalancedDipole)
        .value("Zero", InjectionPattern::Zero);

    m.def("load_network", [](const std::string& p) { return load_network(p); }, py::arg("path"));
    m.def("save_network",
          [](const PowerNetwork& n, const std::string& p, const std::string& name) {
              save_network(n, p, name);
          },
          py::arg("net"), py::arg("path"), py::arg("name") = "network");
    m.def("generate_lattice_network", &generate_lattice_network, py::arg("nx"), py::arg("ny"),
          py::arg("b"), py::arg("m"), py::arg("d"), py::arg("spacing"),
          py::arg("pattern") = InjectionPattern::BalancedDipole);
    m.def("generate_synthetic_continental",
          [](std::uint64_t seed, int n, const Polygon& poly, double het) {
              return generate_synthetic_continental(seed, n, poly, {het, het, het, het});
          },
          py::arg("seed"), py::arg("n_buses"), py::arg("region"), py::arg("heterogeneity") = 0.5);
    m.def("default_continental_polygon", &default_continental_polygon);

    // ---- grid -------------------------------------------------------------
    py::class_<RasterGrid>(m, "RasterGrid")
        .def_static("rectangle", &RasterGrid::rectangle, py::arg("nx"), py::arg("ny"),
                    py::arg("delta"), py::arg("x0") = 0.0, py::arg("y0") = 0.0)
        .def_property_readonly("nx", &RasterGrid::nx)
        .def_property_readonly("ny", &RasterGrid::ny)
        .def_property_readonly("delta", &RasterGrid::delta)
        .def_property_readonly("cell_count", &RasterGrid::cell_count)
        .def("center", &RasterGrid::center)
        .def("nearest_masked_cell", &RasterGrid::nearest_masked_cell)
        .def("content_hash", [](const RasterGrid& g) { return hash_hex(g.content_hash()); });

    py::class_<GridBuildOptions>(m, "GridBuildOptions")
        .def(py::init<>())
        .def_readwrite("drop_islands", &GridBuildOptions::drop_islands)
        .def_readwrite("thicken", &GridBuildOptions::thicken)
        .def_readwrite("tight", &GridBuildOptions::tight);

    m.def("build_grid",
          [](const PowerNetwork& net, double delta, double dilation,
             const GridBuildOptions& options) {
              return build_grid(net, delta, dilation, options);
          },
          py::arg("net"), py::arg("delta"), py::arg("dilation"),
          py::arg("options") = GridBuildOptions{});

    // ---- fields -----------------------------------------------------------
    py::enum_<Quantity>(m, "Quantity")
        .value("M", Quantity::M)
        .value("D", Quantity::D)
        .value("P", Quantity::P)
        .value("Bx", Quantity::Bx)
        .value("By", Quantity::By)
        .value("Aux", Quantity::Aux);

    py::class_<Field>(m, "Field")
        .def_readwrite("values", &Field::values)
        .def_readonly("quantity", &Field::quantity)
        .def("total", &Field::total);

    py::class_<FieldSet>(m, "FieldSet")
        .def(py::init<>())
        .def_readwrite("m", &FieldSet::m)
        .def_readwrite("d", &FieldSet::d)
        .def_readwrite("p", &FieldSet::p)
        .def_readwrite("bx", &FieldSet::bx)
        .def_readwrite("by", &FieldSet::by);

    m.def("make_field", &make_field, py::arg("grid"), py::arg("quantity"),
          py::arg("fill") = 0.0);
    m.def("deposit_nodal", &deposit_nodal, py::arg("net"), py::arg("grid"), py::arg("quantity"));
    m.def("deposit_lines", &deposit_lines, py::arg("net"), py::arg("grid"));
    m.def("deposit_all", [](const PowerNetwork& net, const RasterGrid& grid) {
        FieldSet fs;
        fs.m = deposit_nodal(net, grid, Quantity::M);
        fs.d = deposit_nodal(net, grid, Quantity::D);
        fs.p = deposit_nodal(net, grid, Quantity::P);
        std::tie(fs.bx, fs.by) = deposit_lines(net, grid);
        return fs;
    });

    py::class_<DiffusionResult>(m, "DiffusionResult")
        .def_readonly("field", &DiffusionResult::field)
        .def_readonly("iterations", &DiffusionResult::iterations)
        .def_readonly("smoothness", &DiffusionResult::smoothness)
        .def_readonly("converged", &DiffusionResult::converged);

    m.def("artificial_diffusion",
          [](const Field& f, const RasterGrid& g, double kappa, double tol, long max_iters) {
              DiffusionOptions opts;
              opts.smooth_tol = tol;
              opts.max_iterations = max_iters;
              return artificial_diffusion(f, g, kappa, opts);
          },
          py::arg("field"), py::arg("grid"), py::arg("kappa") = 0.2,
          py::arg("smooth_tol") = 1e-4, py::arg("max_iterations") = 200000L);

    m.def("fourier_lowpass",
          [](const Field& f, const RasterGrid& g, double cutoff, const std::string& pad,
             bool apply_floor, bool renormalize) {
              FilterOptions opts;
              opts.pad = pad == "zero" ? PadMode::Zero : PadMode::Mirror;
              opts.apply_floor = apply_floor;
              opts.renormalize = renormalize;
              return fourier_lowpass(f, g, cutoff, opts);
          },
          py::arg("field"), py::arg("grid"), py::arg("cutoff"), py::arg("pad") = "mirror",
          py::arg("apply_floor") = true, py::arg("renormalize") = true);

    m.def("region_scale", &region_scale, py::arg("field"), py::arg("grid"), py::arg("region"),
          py::arg("factor"));

    py::class_<IsotropyResult>(m, "IsotropyResult")
        .def_readonly("b", &IsotropyResult::b)
        .def_readonly("anisotropy", &IsotropyResult::anisotropy);
    m.def("isotropy_reduce", &isotropy_reduce, py::arg("bx"), py::arg("by"), py::arg("grid"));

    m.def("finalize_fields",
          [](const FieldSet& fs, const RasterGrid& g, double m_rel, double d_rel) {
              return finalize_fields(fs, g, {m_rel, d_rel});
          },
          py::arg("fields"), py::arg("grid"), py::arg("m_rel") = 1e-3, py::arg("d_rel") = 1e-3);

    // ---- trajectories -------------------------------------------------------
    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("times", &Trajectory::times)
        .def_readonly("probes", &Trajectory::probes)
        .def_readonly("theta", &Trajectory::theta)
        .def_readonly("omega", &Trajectory::omega)
        .def_readonly("global_omega", &Trajectory::global_omega)
        .def("terminal_global_omega", &Trajectory::terminal_global_omega);

    py::class_<SimParams>(m, "SimParams")
        .def(py::init([](double dt, double t_end, int stride) {
                 return SimParams{dt, t_end, stride};
             }),
             py::arg("dt") = 1e-3, py::arg("t_end") = 10.0, py::arg("sample_stride") = 1)
        .def_readwrite("dt", &SimParams::dt)
        .def_readwrite("t_end", &SimParams::t_end)
        .def_readwrite("sample_stride", &SimParams::sample_stride);

    // ---- solvers ------------------------------------------------------------
    m.def("ode_steady_state", &ode_steady_state, py::arg("net"));
    m.def("post_fault_frequency", &post_fault_frequency, py::arg("net"), py::arg("scenario"));
    m.def("simulate_swing",
          [](const PowerNetwork& net, const FaultScenario& sc, const SimParams& params,
             const std::vector<int>& probes) {
              return simulate_swing(net, sc, params, probes);
          },
          py::arg("net"), py::arg("scenario"), py::arg("params"), py::arg("probes"));

    py::class_<CellFault>(m, "CellFault")
        .def(py::init([](int cell, double dp, double t_on, std::optional<double> t_off) {
                 return CellFault{cell, dp, t_on, t_off};
             }),
             py::arg("cell"), py::arg("dp"), py::arg("t_on") = 0.0,
             py::arg("t_off") = std::nullopt)
        .def_readwrite("cell", &CellFault::cell)
        .def_readwrite("dp", &CellFault::dp);

    m.def("assemble_xi", &assemble_xi, py::arg("fields"), py::arg("grid"));
    m.def("pde_steady_state", &pde_steady_state, py::arg("fields"), py::arg("grid"));
    m.def("crank_nicolson_simulate",
          [](const FieldSet& fields, const RasterGrid& grid, const CellFault& fault,
             const SimParams& params, const std::vector<int>& probe_cells,
             const std::vector<int>& probe_ids) {
              return crank_nicolson_simulate(fields, grid, fault, params, probe_cells, probe_ids);
          },
          py::arg("fields"), py::arg("grid"), py::arg("fault"), py::arg("params"),
          py::arg("probe_cells"), py::arg("probe_ids") = std::vector<int>{});

    // ---- analysis -------------------------------------------------------------
    py::class_<NodeCellMap>(m, "NodeCellMap")
        .def_readonly("cell", &NodeCellMap::cell)
        .def_readonly("distance_km", &NodeCellMap::distance_km)
        .def("cell_of", &NodeCellMap::cell_of, py::arg("net"), py::arg("bus_id"));
    m.def("make_node_cell_map", &make_node_cell_map, py::arg("net"), py::arg("grid"));

    m.def("wave_speed_map", &wave_speed_map, py::arg("fields"), py::arg("grid"));
    m.def("front_arrival", &front_arrival, py::arg("speed"), py::arg("grid"), py::arg("source"));

    py::class_<SteadyOutlier>(m, "SteadyOutlier")
        .def_readonly("bus_id", &SteadyOutlier::bus_id)
        .def_readonly("error", &SteadyOutlier::error);
    py::class_<SteadyComparison>(m, "SteadyComparison")
        .def_readonly("rmse", &SteadyComparison::rmse)
        .def_readonly("max_abs_error", &SteadyComparison::max_abs_error)
        .def_readonly("outliers", &SteadyComparison::outliers);
    m.def("compare_steady", &compare_steady, py::arg("net"), py::arg("theta_disc"),
          py::arg("theta_cont"), py::arg("map"), py::arg("outlier_mult") = 3.0);

    py::class_<ProbeTraceMetrics>(m, "ProbeTraceMetrics")
        .def_readonly("probe_id", &ProbeTraceMetrics::probe_id)
        .def_readonly("rmse", &ProbeTraceMetrics::rmse)
        .def_readonly("deviation_range", &ProbeTraceMetrics::deviation_range)
        .def_readonly("terminal_difference", &ProbeTraceMetrics::terminal_difference)
        .def_readonly("arrival_difference", &ProbeTraceMetrics::arrival_difference);
    py::class_<DynamicComparison>(m, "DynamicComparison")
        .def_readonly("probes", &DynamicComparison::probes)
        .def_readonly("terminal_global_difference",
                      &DynamicComparison::terminal_global_difference);
    m.def("compare_dynamics",
          [](const Trajectory& a, const Trajectory& b, double arrival_threshold) {
              DynamicCompareOptions opts;
              opts.arrival_threshold = arrival_threshold;
              return compare_dynamics(a, b, opts);
          },
          py::arg("a"), py::arg("b"), py::arg("arrival_threshold") = 0.0);

    // ---- files ------------------------------------------------------------------
    m.def("save_grid", [](const RasterGrid& g, const std::string& p) { save_grid(g, p); });
    m.def("load_grid", [](const std::string& p) { return load_grid(p); });
    m.def("save_field",
          [](const Field& f, const RasterGrid& g, const std::string& p) { save_field(f, g, p); });
    m.def("load_field",
          [](const std::string& p, const RasterGrid& g) { return load_field(p, g); });
    m.def("save_trajectory",
          [](const Trajectory& t, const std::string& p) { save_trajectory(t, p); });
    m.def("load_trajectory", [](const std::string& p) { return load_trajectory(p); });
}
