#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "swingpde/fields.hpp"
#include "swingpde/grid.hpp"
#include "swingpde/stepper.hpp"
#include "swingpde/trajectory.hpp"

namespace swingpde {

/// Fault expressed on the raster: a timed injection step at one cell.
struct CellFault {
    int cell = 0;  ///< compact cell index
    double dp = 0.0;
    double t_on = 0.0;
    std::optional<double> t_off;
};

/// Finite-volume stencil matrix over masked cells. Edge couplings are the
/// two-cell averages of the b_x/b_y fields; couplings across the mask
/// boundary are dropped, and each diagonal entry is minus the sum of the
/// retained couplings, so rows sum to zero and boundary flux vanishes by
/// construction. Symmetric, off-diagonals nonnegative.
Eigen::SparseMatrix<double> assemble_xi(const FieldSet& fields, const RasterGrid& grid);

/// Steady continuum angles: Xi theta / delta^2 + p = 0 with zero-mean gauge.
/// Requires balanced cell injections; residual <= 1e-9 relative.
Eigen::VectorXd pde_steady_state(const FieldSet& fields, const RasterGrid& grid);

struct SnapshotRequest {
    std::vector<double> times;  ///< snapshot instants (matched to nearest sample)
    /// Receives (time, theta, omega) at each requested instant.
    std::function<void(double, const Eigen::VectorXd&, const Eigen::VectorXd&)> sink;
};

/// Integrate the continuum swing equation from the pre-fault steady state
/// with the shared Crank-Nicolson kernel; the step matrix is factorised once
/// per (fields, dt). Probe ids label the trajectory columns (pass the bus ids
/// the cells represent to make traces comparable across models).
Trajectory crank_nicolson_simulate(const FieldSet& fields, const RasterGrid& grid,
                                   const CellFault& fault, const SimParams& params,
                                   const std::vector<int>& probe_cells,
                                   const std::vector<int>& probe_ids = {},
                                   const SnapshotRequest* snapshots = nullptr,
                                   double* max_conservation_defect = nullptr);

/// The continuum dynamics as a stepper system (coupling = Xi / delta^2).
SwingSystem pde_system(const FieldSet& fields, const RasterGrid& grid);
InjectionSchedule pde_injections(const FieldSet& fields, const CellFault& fault);

}  // namespace swingpde
