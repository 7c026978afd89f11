#include "swingpde/trajectory.hpp"

#include <stdexcept>

namespace swingpde {

void Trajectory::validate() const {
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::runtime_error("trajectory times must be strictly increasing");
    const long rows = static_cast<long>(times.size());
    const long cols = static_cast<long>(probes.size());
    if (theta.rows() != rows || omega.rows() != rows ||
        theta.cols() != cols || omega.cols() != cols ||
        static_cast<long>(global_omega.size()) != rows)
        throw std::runtime_error("trajectory series lengths do not match");
}

}  // namespace swingpde
