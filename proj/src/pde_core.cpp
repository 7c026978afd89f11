#include "swingpde/pde_core.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "swingpde/linear_solver.hpp"

namespace swingpde {

Eigen::SparseMatrix<double> assemble_xi(const FieldSet& fields, const RasterGrid& grid) {
    fields.require_grid(grid);

    const int n = grid.cell_count();
    const Eigen::VectorXd& bx = fields.bx.values;
    const Eigen::VectorXd& by = fields.by.values;

    // Each retained edge carries the two-cell average of the directional
    // field; couplings across the mask boundary do not exist, which realises
    // the Neumann condition with zero flux leakage. The diagonal collects the
    // retained couplings so every row sums to zero.
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n) * 5);
    for (int k = 0; k < n; ++k) {
        double beta = 0.0;
        if (int xm = grid.neighbor(k, XMinus); xm >= 0) {
            double edge = 0.5 * (bx[xm] + bx[k]);
            trips.emplace_back(k, xm, edge);
            beta += edge;
        }
        if (int xp = grid.neighbor(k, XPlus); xp >= 0) {
            double edge = 0.5 * (bx[k] + bx[xp]);
            trips.emplace_back(k, xp, edge);
            beta += edge;
        }
        if (int ym = grid.neighbor(k, YMinus); ym >= 0) {
            double edge = 0.5 * (by[ym] + by[k]);
            trips.emplace_back(k, ym, edge);
            beta += edge;
        }
        if (int yp = grid.neighbor(k, YPlus); yp >= 0) {
            double edge = 0.5 * (by[k] + by[yp]);
            trips.emplace_back(k, yp, edge);
            beta += edge;
        }
        trips.emplace_back(k, k, -beta);
    }

    Eigen::SparseMatrix<double> xi(n, n);
    xi.setFromTriplets(trips.begin(), trips.end());
    return xi;
}

Eigen::VectorXd pde_steady_state(const FieldSet& fields, const RasterGrid& grid) {
    fields.require_grid(grid);
    const Eigen::VectorXd& p = fields.p.values;
    const double imbalance = p.sum();
    const double scale = p.cwiseAbs().sum();
    if (std::abs(imbalance) > 1e-9 * std::max(scale, 1.0))
        throw ValidationError("continuum injections do not balance: sum p = " +
                              std::to_string(imbalance));

    const int n = grid.cell_count();
    if (p.isZero(0.0)) return Eigen::VectorXd::Zero(n);

    // Xi theta / delta^2 + p = 0  ->  (-Xi) theta = delta^2 p, then shift to
    // the zero-mean gauge.
    Eigen::SparseMatrix<double> neg_xi = -assemble_xi(fields, grid);
    Eigen::VectorXd rhs = grid.delta() * grid.delta() * p;
    Eigen::VectorXd theta = solve_grounded_spd(neg_xi, rhs, 0, 1e-9);
    theta.array() -= theta.mean();
    return theta;
}

SwingSystem pde_system(const FieldSet& fields, const RasterGrid& grid) {
    fields.require_grid(grid);
    if (fields.m.values.minCoeff() <= 0.0)
        throw ValidationError("continuum inertia must be positive cell-wise; run "
                              "finalize_fields first");
    SwingSystem sys;
    sys.inertia = fields.m.values;
    sys.damping = fields.d.values;
    sys.coupling = assemble_xi(fields, grid) / (grid.delta() * grid.delta());
    return sys;
}

InjectionSchedule pde_injections(const FieldSet& fields, const CellFault& fault) {
    InjectionSchedule inj;
    inj.base = fields.p.values;
    if (fault.dp != 0.0) {
        if (fault.cell < 0 || fault.cell >= fields.p.values.size())
            throw ValidationError("fault cell index out of range");
        inj.steps.push_back({fault.cell, fault.dp, fault.t_on, fault.t_off});
    }
    return inj;
}

Trajectory crank_nicolson_simulate(const FieldSet& fields, const RasterGrid& grid,
                                   const CellFault& fault, const SimParams& params,
                                   const std::vector<int>& probe_cells,
                                   const std::vector<int>& probe_ids,
                                   const SnapshotRequest* snapshots,
                                   double* max_conservation_defect) {
    if (!(params.dt > 0.0)) throw ValidationError("time step must be positive");

    SimulateOptions options;
    options.probe_indices = probe_cells;
    options.probe_ids = probe_ids.empty() ? probe_cells : probe_ids;
    options.max_conservation_defect = max_conservation_defect;

    if (snapshots && snapshots->sink && !snapshots->times.empty()) {
        // Emit each requested instant once, at the nearest sampled time.
        auto remaining = std::make_shared<std::vector<double>>(snapshots->times);
        std::sort(remaining->begin(), remaining->end());
        const double half_sample = 0.5 * params.dt * params.sample_stride;
        auto sink = snapshots->sink;
        options.on_sample = [remaining, half_sample, sink](const StepperState& s) {
            while (!remaining->empty() && remaining->front() <= s.t + half_sample) {
                sink(s.t, s.theta, s.omega);
                remaining->erase(remaining->begin());
            }
        };
    }

    Eigen::VectorXd theta0 = pde_steady_state(fields, grid);
    InjectionSchedule inj = pde_injections(fields, fault);

    CrankNicolsonStepper stepper(pde_system(fields, grid), params.dt);
    StepperState state =
        stepper.initial_state(theta0, Eigen::VectorXd::Zero(theta0.size()), inj);
    return stepper.simulate(std::move(state), inj, params, options);
}

}  // namespace swingpde
