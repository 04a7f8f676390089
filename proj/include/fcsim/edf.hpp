#pragma once

#include <Eigen/Dense>

#include <vector>

#include "fcsim/task_model.hpp"

namespace fcsim {

enum class Recovery { ReExecuted, MaskedByReplica, Unrecovered };

struct FaultEvent {
    long step = 0;
    int task = 0;
    int proc = 0;
    Recovery recovery = Recovery::ReExecuted;
};

/// One job instance on one processor. Replicated tasks spawn one job per
/// hosting processor with identical (task, seq, release, deadline, demand).
struct Job {
    int task = 0;
    int proc = 0;
    long seq = 0;               // per-task release counter
    double release = 0.0;
    double deadline = 0.0;      // release + period at release time
    double demand = 0.0;        // actual execution requirement
    double executed = 0.0;
    bool fault_flagged = false;
    double fault_progress = 0.0;  // in [0, 1); fires when executed crosses it
    bool fault_fired = false;
    bool has_fault_free_twin = false;
};

struct MissReport {
    long released = 0;
    long missed = 0;
    double miss_ratio = 0.0;  // missed / released, 0 when nothing released
};

struct WindowStats {
    MissReport misses;
    std::vector<long> released_by_task;
    std::vector<long> missed_by_task;
    std::vector<FaultEvent> fault_events;
    long faults_injected = 0;
};

/// Release phase and cross-window job backlog for the job-level layer.
struct EdfState {
    std::vector<double> next_release;        // per task
    std::vector<long> next_seq;              // per task
    std::vector<std::vector<Job>> backlog;   // per proc: released, unfinished jobs

    EdfState() = default;
    EdfState(int n_procs, int n_tasks);
};

/// Generates every job instance with release in [t0, t0 + window), one per
/// hosting processor, ordered by (release, task, proc). Period and demand are
/// bound at release time from the task's current rate and execution factor.
std::vector<Job> release_window_jobs(EdfState& state, const SystemTopology& topo,
                                     const AllocationMatrix& K, const Eigen::VectorXd& rates,
                                     double t0, double window);

/// Preemptive earliest-deadline-first execution of one sampling window on
/// every processor. Jobs that pass their deadline unfinished are killed and
/// counted as missed in this window; jobs whose deadline lies beyond the
/// window carry over in the backlog. Fired faults are resolved by replica
/// masking when a fault-free twin exists, otherwise by restarting the job
/// from scratch.
WindowStats run_edf_window(EdfState& state, std::vector<Job> new_jobs, long step, double t0,
                           double window, const SystemTopology& topo);

}  // namespace fcsim
