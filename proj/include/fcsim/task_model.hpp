#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace fcsim {

enum class Criticality { SafetyCritical, NonCritical };

/// One periodic task. Rate is the actuated variable; the scheduler releases
/// one job per period (= 1/rate) with an implicit deadline.
struct TaskSpec {
    std::string id;
    double wcet_est = 0.0;     // estimated execution time per job, seconds
    double exec_factor = 1.0;  // g: actual / estimated execution time
    double rate_init = 0.0;    // Hz
    double rate_min = 0.0;     // Hz; 0 means "use default bound"
    double rate_max = 0.0;     // Hz; 0 means "use default bound"
    Criticality criticality = Criticality::NonCritical;
    int home_proc = 0;
    std::vector<int> replica_procs;  // additional hosts, active replication
};

struct SystemTopology {
    int n_procs = 0;
    std::vector<TaskSpec> tasks;
    double sample_period = 1.0;  // seconds

    int num_tasks() const { return static_cast<int>(tasks.size()); }

    /// Throws std::invalid_argument naming the offending task/field.
    void validate() const;

    /// Fills unset (zero) rate bounds with [0.1, 10] x rate_init.
    void apply_default_rate_bounds();
};

/// n x m instance-count matrix: entry (i, j) = instances of task j on
/// processor i (home placement plus replicas).
using AllocationMatrix = Eigen::MatrixXd;

AllocationMatrix build_allocation_matrix(const SystemTopology& topo);

/// Per-processor utilization implied by the WCET estimates:
///   u_i = sum_j K(i,j) * wcet_est_j * rate_j
Eigen::VectorXd estimated_utilization(const SystemTopology& topo,
                                      const AllocationMatrix& K,
                                      const Eigen::VectorXd& rates);

/// Same accumulation scaled by each task's execution factor; this is the
/// load the processors actually see.
Eigen::VectorXd actual_utilization(const SystemTopology& topo,
                                   const AllocationMatrix& K,
                                   const Eigen::VectorXd& rates);

Eigen::VectorXd initial_rates(const SystemTopology& topo);

/// Elementwise clamp of absolute rates to each task's [rate_min, rate_max].
Eigen::VectorXd clamp_rates(const Eigen::VectorXd& rates, const SystemTopology& topo);

}  // namespace fcsim
