#pragma once

#include <Eigen/Dense>
#include <vector>

namespace swingpde {

/// Sampled time series at probe locations plus the damping-weighted mean
/// frequency. Rows of theta/omega are samples, columns are probes.
struct Trajectory {
    std::vector<double> times;
    std::vector<int> probes;       ///< probe ids (bus ids, or cell labels)
    Eigen::MatrixXd theta;
    Eigen::MatrixXd omega;
    std::vector<double> global_omega;

    std::size_t sample_count() const { return times.size(); }
    double terminal_global_omega() const {
        return global_omega.empty() ? 0.0 : global_omega.back();
    }
    void validate() const;
};

}  // namespace swingpde
