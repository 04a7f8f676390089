#include "fcsim/task_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fcsim {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

void SystemTopology::validate() const {
    if (n_procs < 1) bad("topology: n_procs must be >= 1");
    if (tasks.empty()) bad("topology: task list must be nonempty");
    if (!(sample_period > 0.0)) bad("topology: sample_period must be > 0");

    std::vector<bool> hosted(static_cast<std::size_t>(n_procs), false);
    for (const TaskSpec& t : tasks) {
        const std::string where = "task '" + t.id + "': ";
        if (!(t.wcet_est > 0.0)) bad(where + "wcet_est must be > 0");
        if (!(t.exec_factor > 0.0)) bad(where + "exec_factor must be > 0");
        if (!(t.rate_min > 0.0)) bad(where + "rate_min must be > 0");
        if (t.rate_min > t.rate_init) bad(where + "rate_min exceeds rate_init");
        if (t.rate_init > t.rate_max) bad(where + "rate_init exceeds rate_max");
        if (t.home_proc < 0 || t.home_proc >= n_procs)
            bad(where + "home_proc out of range");
        hosted[static_cast<std::size_t>(t.home_proc)] = true;
        for (int p : t.replica_procs) {
            if (p < 0 || p >= n_procs) bad(where + "replica processor out of range");
            if (p == t.home_proc) bad(where + "replica duplicates home_proc");
            hosted[static_cast<std::size_t>(p)] = true;
        }
        std::vector<int> reps = t.replica_procs;
        std::sort(reps.begin(), reps.end());
        if (std::adjacent_find(reps.begin(), reps.end()) != reps.end())
            bad(where + "duplicate replica processor");
        if (t.criticality == Criticality::NonCritical && !t.replica_procs.empty())
            bad(where + "non-SC task may not have replicas");
    }
    for (int p = 0; p < n_procs; ++p) {
        if (!hosted[static_cast<std::size_t>(p)])
            bad("topology: processor " + std::to_string(p) + " hosts no task instance");
    }
}

void SystemTopology::apply_default_rate_bounds() {
    for (TaskSpec& t : tasks) {
        if (t.rate_min == 0.0) t.rate_min = 0.1 * t.rate_init;
        if (t.rate_max == 0.0) t.rate_max = 10.0 * t.rate_init;
    }
}

AllocationMatrix build_allocation_matrix(const SystemTopology& topo) {
    topo.validate();
    const int n = topo.n_procs;
    const int m = topo.num_tasks();
    AllocationMatrix K = AllocationMatrix::Zero(n, m);
    for (int j = 0; j < m; ++j) {
        const TaskSpec& t = topo.tasks[static_cast<std::size_t>(j)];
        K(t.home_proc, j) += 1.0;
        for (int p : t.replica_procs) K(p, j) += 1.0;
    }
    return K;
}

namespace {

Eigen::VectorXd accumulate_load(const SystemTopology& topo, const AllocationMatrix& K,
                                const Eigen::VectorXd& rates, bool scale_by_g) {
    const int m = topo.num_tasks();
    if (rates.size() != m)
        throw std::invalid_argument("utilization: rate vector length " +
                                    std::to_string(rates.size()) + " does not match " +
                                    std::to_string(m) + " tasks");
    if (K.rows() != topo.n_procs || K.cols() != m)
        throw std::invalid_argument("utilization: allocation matrix shape mismatch");
    Eigen::VectorXd demand(m);
    for (int j = 0; j < m; ++j) {
        const TaskSpec& t = topo.tasks[static_cast<std::size_t>(j)];
        demand(j) = (scale_by_g ? t.exec_factor : 1.0) * t.wcet_est * rates(j);
    }
    return K * demand;
}

}  // namespace

Eigen::VectorXd estimated_utilization(const SystemTopology& topo, const AllocationMatrix& K,
                                      const Eigen::VectorXd& rates) {
    return accumulate_load(topo, K, rates, false);
}

Eigen::VectorXd actual_utilization(const SystemTopology& topo, const AllocationMatrix& K,
                                   const Eigen::VectorXd& rates) {
    return accumulate_load(topo, K, rates, true);
}

Eigen::VectorXd initial_rates(const SystemTopology& topo) {
    Eigen::VectorXd r(topo.num_tasks());
    for (int j = 0; j < topo.num_tasks(); ++j)
        r(j) = topo.tasks[static_cast<std::size_t>(j)].rate_init;
    return r;
}

Eigen::VectorXd clamp_rates(const Eigen::VectorXd& rates, const SystemTopology& topo) {
    if (rates.size() != topo.num_tasks())
        throw std::invalid_argument("clamp_rates: dimension mismatch");
    Eigen::VectorXd out(rates.size());
    for (int j = 0; j < topo.num_tasks(); ++j) {
        const TaskSpec& t = topo.tasks[static_cast<std::size_t>(j)];
        out(j) = std::clamp(rates(j), t.rate_min, t.rate_max);
    }
    return out;
}

}  // namespace fcsim
