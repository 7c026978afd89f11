#pragma once

#include <Eigen/Dense>
#include <vector>

#include "swingpde/fields.hpp"
#include "swingpde/grid.hpp"
#include "swingpde/network.hpp"
#include "swingpde/trajectory.hpp"

namespace swingpde {

/// Per-bus nearest masked cell and the centre distance to it.
struct NodeCellMap {
    std::vector<int> cell;       ///< compact cell index per bus (dense bus order)
    std::vector<double> distance_km;

    int cell_of(const PowerNetwork& net, int bus_id) const;
};

NodeCellMap make_node_cell_map(const PowerNetwork& net, const RasterGrid& grid);

/// Local electromechanical wave speed c = sqrt(b/m), cell-wise.
Field wave_speed_map(const FieldSet& fields, const RasterGrid& grid);

enum class FrontAveraging { MeanOfSpeed, SpeedOfMeans };

/// Travel-time field of a disturbance starting at `source`: shortest path on
/// the masked 8-neighbour lattice with edge time dist / mean(c) of the two
/// endpoint cells. Level sets of the result are the propagation fronts.
Eigen::VectorXd front_arrival(const Field& speed, const RasterGrid& grid, int source);

/// Uniform-medium variant for side-by-side fronts: replaces c by its mean
/// (MeanOfSpeed) or by sqrt(mean b / mean m) (SpeedOfMeans).
Field homogenized_speed(const FieldSet& fields, const RasterGrid& grid,
                        FrontAveraging averaging);

struct SteadyOutlier {
    int bus_id = 0;
    double x = 0.0, y = 0.0;
    double error = 0.0;
};

struct SteadyComparison {
    std::vector<int> bus_ids;
    Eigen::VectorXd theta_disc;   ///< gauge-aligned over mapped pairs
    Eigen::VectorXd theta_cont;
    double rmse = 0.0;
    double max_abs_error = 0.0;
    std::vector<SteadyOutlier> outliers;  ///< sorted by error, descending
};

/// Pair discrete and continuum steady states through the node-cell map,
/// align gauges by subtracting the respective means and report error metrics
/// with outliers above `outlier_mult` times the RMSE.
SteadyComparison compare_steady(const PowerNetwork& net, const Eigen::VectorXd& theta_disc,
                                const Eigen::VectorXd& theta_cont, const NodeCellMap& map,
                                double outlier_mult = 3.0);

struct ProbeTraceMetrics {
    int probe_id = 0;
    double rmse = 0.0;                 ///< frequency trace RMSE over common samples
    double deviation_range = 0.0;      ///< max-min of the reference trace
    double terminal_difference = 0.0;
    double arrival_difference = 0.0;   ///< threshold-crossing time difference, s
    double distance_to_fault_km = -1.0;
};

struct DynamicComparison {
    std::vector<ProbeTraceMetrics> probes;
    double terminal_global_difference = 0.0;
    /// Probe RMSE binned by distance to the fault (edges, mean errors); lets
    /// the far-field accuracy trend be inspected without asserting it.
    std::vector<double> distance_bin_edges_km;
    std::vector<double> distance_bin_rmse;
};

struct DynamicCompareOptions {
    double arrival_threshold = 0.0;  ///< |omega| crossing level; 0 = 10% of terminal
    int distance_bins = 4;
    /// Optional per-probe distances to the fault (same order as probes).
    std::vector<double> probe_distance_km;
};

/// Compare two trajectories probe-by-probe over their common probes and
/// overlapping time range (nearest-sample alignment, `a` is the reference).
DynamicComparison compare_dynamics(const Trajectory& a, const Trajectory& b,
                                   const DynamicCompareOptions& options = {});

}  // namespace swingpde
