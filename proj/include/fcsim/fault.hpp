#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "fcsim/edf.hpp"
#include "fcsim/task_model.hpp"

namespace fcsim {

/// One deterministic fault: hits the given task's job on one processor during
/// the given sampling step, firing once the job reaches `progress` of its
/// execution requirement.
struct ScriptedFault {
    long step = 0;
    int task = 0;
    int proc = 0;
    double progress = 0.5;  // in [0, 1)
};

/// Transient-fault generator. Flags newly released jobs; the job layer decides
/// recovery when a flagged job reaches its firing point.
class FaultProcess {
  public:
    static FaultProcess none();
    static FaultProcess scripted(std::vector<ScriptedFault> script);
    static FaultProcess random(double per_job_probability, std::uint64_t seed);

    /// Flags at most one fault per job among this window's releases. Scripted
    /// entries for this step must name a (task, proc) pair the allocation
    /// hosts; an entry whose step has no matching release is skipped. Returns
    /// the number of jobs flagged.
    int inject(long step, std::span<Job> window_jobs, const AllocationMatrix& K);

    bool is_none() const { return mode_ == Mode::None; }

  private:
    enum class Mode { None, Scripted, Random };

    FaultProcess() = default;

    Mode mode_ = Mode::None;
    std::vector<ScriptedFault> script_;  // sorted by step
    std::size_t script_pos_ = 0;
    double p_f_ = 0.0;
    std::mt19937_64 rng_;
};

}  // namespace fcsim
