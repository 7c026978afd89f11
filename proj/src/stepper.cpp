#include "swingpde/stepper.hpp"

#include <cmath>

namespace swingpde {

void SwingSystem::validate() const {
    const int n = size();
    if (damping.size() != n || coupling.rows() != n || coupling.cols() != n)
        throw ValidationError("swing system dimensions disagree");
    for (int i = 0; i < n; ++i) {
        if (!(inertia[i] >= 0.0)) throw ValidationError("negative inertia in swing system");
        if (!(damping[i] > 0.0) && inertia[i] <= 0.0)
            throw ValidationError("zero-inertia row needs positive damping");
        if (!(damping[i] >= 0.0)) throw ValidationError("negative damping in swing system");
    }
}

Eigen::VectorXd InjectionSchedule::at(double t) const {
    Eigen::VectorXd p = base;
    for (const Step& s : steps)
        if (t >= s.t_on && (!s.t_off || t < *s.t_off)) p[s.index] += s.dp;
    return p;
}

namespace {

Eigen::SparseMatrix<double> step_matrix(const SwingSystem& sys, double dt) {
    // K = M + dt/2 D - dt^2/4 S, SPD for d > 0 and S negative semidefinite.
    if (!(dt > 0.0)) throw ValidationError("time step must be positive");
    sys.validate();
    const int n = sys.size();
    Eigen::SparseMatrix<double> k = sys.coupling * (-0.25 * dt * dt);
    Eigen::VectorXd diag = sys.inertia + 0.5 * dt * sys.damping;
    Eigen::SparseMatrix<double> d(n, n);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) trips.emplace_back(i, i, diag[i]);
    d.setFromTriplets(trips.begin(), trips.end());
    return k + d;
}

}  // namespace

CrankNicolsonStepper::CrankNicolsonStepper(SwingSystem system, double dt)
    : system_(std::move(system)), dt_(dt), solver_(step_matrix(system_, dt)) {
    const int n = system_.size();
    inv_damping_ = system_.damping.cwiseInverse();
    for (int i = 0; i < n; ++i)
        if (system_.inertia[i] == 0.0) massless_.push_back(i);
}

StepperState CrankNicolsonStepper::initial_state(const Eigen::VectorXd& theta0,
                                                 const Eigen::VectorXd& omega0,
                                                 const InjectionSchedule& injections,
                                                 double t0) const {
    StepperState s;
    s.theta = theta0;
    s.omega = omega0;
    s.t = t0;
    if (!massless_.empty()) {
        // Zero-inertia rows are algebraic; their frequency is determined by
        // the instantaneous balance d w = p + S theta.
        Eigen::VectorXd balance = system_.coupling * s.theta + injections.at(t0);
        for (int i : massless_) s.omega[i] = balance[i] * inv_damping_[i];
    }
    return s;
}

void CrankNicolsonStepper::step(StepperState& state, const InjectionSchedule& injections,
                                double* conservation_defect) const {
    const int n = system_.size();
    const double half = 0.5 * dt_;

    Eigen::VectorXd p_now = injections.at(state.t);
    Eigen::VectorXd p_next = injections.at(state.t + dt_);
    Eigen::VectorXd p_bar = p_now + p_next;

    // Known part of theta(t+dt): inertial rows advance by dt/2 (w + w'),
    // massless rows carry theta as the unknown itself.
    Eigen::VectorXd theta_known = state.theta + half * state.omega;
    for (int i : massless_) theta_known[i] = 0.0;

    Eigen::VectorXd coupled = system_.coupling * (state.theta + theta_known);

    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
        if (system_.inertia[i] > 0.0)
            rhs[i] = (system_.inertia[i] - half * system_.damping[i]) * state.omega[i] +
                     half * coupled[i] + half * p_bar[i];
        else
            rhs[i] = system_.damping[i] * state.theta[i] + half * coupled[i] + half * p_bar[i];
    }

    Eigen::VectorXd u = solver_.solve(half * rhs);

    Eigen::VectorXd omega_next = u / half;
    Eigen::VectorXd theta_next = state.theta + half * (state.omega + omega_next);
    if (!massless_.empty()) {
        for (int i : massless_) theta_next[i] = u[i];
        Eigen::VectorXd balance = system_.coupling * theta_next + p_next;
        for (int i : massless_) omega_next[i] = balance[i] * inv_damping_[i];
    }

    if (conservation_defect) {
        // Trapezoidal statement of sum(m w') + sum(d w) = sum(p); exact up to
        // the linear solve because the stencil columns sum to zero.
        double m_dot = system_.inertia.dot(omega_next - state.omega) / dt_;
        double d_avg = 0.5 * system_.damping.dot(omega_next + state.omega);
        double p_avg = 0.5 * p_bar.sum();
        double scale = std::max({0.5 * p_bar.cwiseAbs().sum(),
                                 system_.damping.dot(state.omega.cwiseAbs()), 1e-12});
        *conservation_defect = std::abs(m_dot + d_avg - p_avg) / scale;
    }

    state.theta = std::move(theta_next);
    state.omega = std::move(omega_next);
    state.t += dt_;
}

Trajectory CrankNicolsonStepper::simulate(StepperState state,
                                          const InjectionSchedule& injections,
                                          const SimParams& params,
                                          const SimulateOptions& options) const {
    if (!(params.dt > 0.0)) throw ValidationError("time step must be positive");
    if (std::abs(params.dt - dt_) > 1e-12 * dt_)
        throw ValidationError("simulation dt does not match the factorised step");
    if (params.sample_stride < 1) throw ValidationError("sample stride must be >= 1");
    const int n = system_.size();
    for (int idx : options.probe_indices)
        if (idx < 0 || idx >= n) throw ValidationError("probe index out of range");

    const long n_steps = static_cast<long>(std::llround(params.t_end / dt_));
    const long n_samples = n_steps / params.sample_stride + 1;
    const double d_total = system_.damping.sum();

    Trajectory traj;
    traj.probes = options.probe_ids.empty()
                      ? options.probe_indices
                      : options.probe_ids;
    if (traj.probes.size() != options.probe_indices.size())
        throw ValidationError("probe id list does not match probe indices");
    traj.times.reserve(static_cast<std::size_t>(n_samples));
    traj.theta.resize(n_samples, static_cast<long>(options.probe_indices.size()));
    traj.omega.resize(n_samples, static_cast<long>(options.probe_indices.size()));
    traj.global_omega.reserve(static_cast<std::size_t>(n_samples));

    double max_defect = 0.0;
    long sample_row = 0;
    auto record = [&](const StepperState& s) {
        traj.times.push_back(s.t);
        for (std::size_t c = 0; c < options.probe_indices.size(); ++c) {
            traj.theta(sample_row, static_cast<long>(c)) = s.theta[options.probe_indices[c]];
            traj.omega(sample_row, static_cast<long>(c)) = s.omega[options.probe_indices[c]];
        }
        traj.global_omega.push_back(system_.damping.dot(s.omega) / d_total);
        ++sample_row;
        if (options.on_sample) options.on_sample(s);
    };

    record(state);
    for (long step_no = 1; step_no <= n_steps; ++step_no) {
        double defect = 0.0;
        step(state, injections, options.max_conservation_defect ? &defect : nullptr);
        max_defect = std::max(max_defect, defect);
        if (!state.omega.allFinite() || !state.theta.allFinite())
            throw SolverError("non-finite state at t = " + std::to_string(state.t));
        if (step_no % params.sample_stride == 0) record(state);
    }

    traj.theta.conservativeResize(sample_row, Eigen::NoChange);
    traj.omega.conservativeResize(sample_row, Eigen::NoChange);
    if (options.max_conservation_defect) *options.max_conservation_defect = max_defect;
    traj.validate();
    return traj;
}

}  // namespace swingpde
