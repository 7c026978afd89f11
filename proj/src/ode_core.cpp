#include "swingpde/ode_core.hpp"

#include <algorithm>
#include <cmath>

#include "swingpde/linear_solver.hpp"

namespace swingpde {

Eigen::SparseMatrix<double> graph_laplacian(const PowerNetwork& net) {
    const int n = static_cast<int>(net.size());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(net.branches().size() * 4 + static_cast<std::size_t>(n));
    for (const Branch& br : net.branches()) {
        int u = net.index_of(br.from), v = net.index_of(br.to);
        trips.emplace_back(u, v, -br.b);
        trips.emplace_back(v, u, -br.b);
        trips.emplace_back(u, u, br.b);
        trips.emplace_back(v, v, br.b);
    }
    Eigen::SparseMatrix<double> lap(n, n);
    lap.setFromTriplets(trips.begin(), trips.end());
    return lap;
}

Eigen::VectorXd ode_steady_state(const PowerNetwork& net) {
    if (!net.is_balanced())
        throw ValidationError("no zero-frequency steady state: sum p = " +
                              std::to_string(net.total_injection()));

    const int n = static_cast<int>(net.size());
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) p[i] = net.buses()[static_cast<std::size_t>(i)].p;

    if (p.isZero(0.0)) return Eigen::VectorXd::Zero(n);

    // Gauge theta = 0 at the lowest bus id.
    int ref = 0;
    for (int i = 1; i < n; ++i)
        if (net.buses()[static_cast<std::size_t>(i)].id <
            net.buses()[static_cast<std::size_t>(ref)].id)
            ref = i;

    Eigen::SparseMatrix<double> lap = graph_laplacian(net);
    return solve_grounded_spd(lap, p, ref, 1e-9);
}

double post_fault_frequency(const PowerNetwork& net, const FaultScenario& scenario) {
    scenario.validate();
    if (!scenario.permanent())
        throw ValidationError(
            "post-fault frequency is defined for permanent faults only; a cleared fault "
            "relaxes back to zero");
    net.index_of(scenario.target);  // throws for unknown targets
    return (net.total_injection() + scenario.dp) / net.total_damping();
}

SwingSystem ode_system(const PowerNetwork& net) {
    const int n = static_cast<int>(net.size());
    SwingSystem sys;
    sys.inertia.resize(n);
    sys.damping.resize(n);
    for (int i = 0; i < n; ++i) {
        sys.inertia[i] = net.buses()[static_cast<std::size_t>(i)].m;
        sys.damping[i] = net.buses()[static_cast<std::size_t>(i)].d;
    }
    sys.coupling = -graph_laplacian(net);
    return sys;
}

InjectionSchedule ode_injections(const PowerNetwork& net, const FaultScenario& scenario) {
    scenario.validate();
    const int n = static_cast<int>(net.size());
    InjectionSchedule inj;
    inj.base.resize(n);
    for (int i = 0; i < n; ++i) inj.base[i] = net.buses()[static_cast<std::size_t>(i)].p;
    if (scenario.dp != 0.0)
        inj.steps.push_back({net.index_of(scenario.target), scenario.dp, scenario.t_on,
                             scenario.t_off});
    return inj;
}

Trajectory simulate_swing(const PowerNetwork& net, const FaultScenario& scenario,
                          const SimParams& params, const std::vector<int>& probes,
                          double* max_conservation_defect) {
    if (!(params.dt > 0.0)) throw ValidationError("time step must be positive");

    SimulateOptions options;
    options.probe_ids = probes;
    options.probe_indices.reserve(probes.size());
    for (int id : probes) options.probe_indices.push_back(net.index_of(id));
    options.max_conservation_defect = max_conservation_defect;

    Eigen::VectorXd theta0 = ode_steady_state(net);
    InjectionSchedule inj = ode_injections(net, scenario);

    CrankNicolsonStepper stepper(ode_system(net), params.dt);
    StepperState state =
        stepper.initial_state(theta0, Eigen::VectorXd::Zero(theta0.size()), inj);
    return stepper.simulate(std::move(state), inj, params, options);
}

}  // namespace swingpde
