#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "swingpde/network.hpp"
#include "swingpde/stepper.hpp"
#include "swingpde/trajectory.hpp"

namespace swingpde {

/// Weighted graph Laplacian of the folded branch couplings b'.
Eigen::SparseMatrix<double> graph_laplacian(const PowerNetwork& net);

/// Angles of the zero-frequency steady state, L theta = p, gauge fixed by
/// theta = 0 at the lowest bus id. Requires a balanced, connected network;
/// residual |L theta - p|_inf <= 1e-9 |p|_inf.
Eigen::VectorXd ode_steady_state(const PowerNetwork& net);

/// Uniform post-fault frequency of a permanent fault, (sum p + dp) / sum d.
double post_fault_frequency(const PowerNetwork& net, const FaultScenario& scenario);

/// Integrate the swing dynamics from the pre-fault steady state with the
/// shared Crank-Nicolson kernel. Probes are bus ids.
Trajectory simulate_swing(const PowerNetwork& net, const FaultScenario& scenario,
                          const SimParams& params, const std::vector<int>& probes,
                          double* max_conservation_defect = nullptr);

/// The swing dynamics as a stepper system (coupling = -L) plus the base
/// injection vector, for callers that drive the kernel directly.
SwingSystem ode_system(const PowerNetwork& net);
InjectionSchedule ode_injections(const PowerNetwork& net, const FaultScenario& scenario);

}  // namespace swingpde
