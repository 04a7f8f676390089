#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "fcsim/task_model.hpp"

namespace fcsim {

/// Scales every task's execution factor from `step` onward. Later entries
/// replace earlier ones; the schedule models workload shifts the controller
/// has to ride out.
struct LoadChange {
    long step = 0;
    double factor = 1.0;
};

struct PlantConfig {
    double noise_band = 0.005;  // measurement disturbance is U(-band, band)
};

struct Measurement {
    Eigen::VectorXd y_meas;  // clipped, noisy per-processor utilization
    Eigen::VectorXd y_raw;   // underlying load, may exceed 1
};

/// Topology in effect at `step`: base execution factors scaled by the most
/// recent load change at or before the step. Schedule steps must be strictly
/// increasing and factors positive.
SystemTopology apply_load_schedule(const SystemTopology& base,
                                   const std::vector<LoadChange>& schedule, long step);

void validate_load_schedule(const std::vector<LoadChange>& schedule);

/// Per-processor utilization under the given rates. A processor cannot report
/// more than full occupancy, so the raw load saturates at 1 before noise is
/// added; the reported value is clipped back to [0, 1]. Always consumes
/// exactly one uniform draw per processor.
Measurement measure_utilization(const SystemTopology& topo, const AllocationMatrix& K,
                                const Eigen::VectorXd& rates, const PlantConfig& cfg,
                                std::mt19937_64& rng);

}  // namespace fcsim
