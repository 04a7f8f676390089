#include "fcsim/fault.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fcsim {

FaultProcess FaultProcess::none() { return FaultProcess{}; }

FaultProcess FaultProcess::scripted(std::vector<ScriptedFault> script) {
    for (const ScriptedFault& f : script) {
        if (f.step < 0) throw std::invalid_argument("scripted fault: step must be non-negative");
        if (!(f.progress >= 0.0 && f.progress < 1.0))
            throw std::invalid_argument("scripted fault: progress must lie in [0, 1)");
    }
    std::stable_sort(script.begin(), script.end(),
                     [](const ScriptedFault& a, const ScriptedFault& b) { return a.step < b.step; });
    FaultProcess fp;
    fp.mode_ = Mode::Scripted;
    fp.script_ = std::move(script);
    return fp;
}

FaultProcess FaultProcess::random(double per_job_probability, std::uint64_t seed) {
    if (!(per_job_probability >= 0.0 && per_job_probability <= 1.0))
        throw std::invalid_argument("fault probability must lie in [0, 1]");
    FaultProcess fp;
    fp.mode_ = Mode::Random;
    fp.p_f_ = per_job_probability;
    fp.rng_.seed(seed);
    return fp;
}

int FaultProcess::inject(long step, std::span<Job> window_jobs, const AllocationMatrix& K) {
    int flagged = 0;
    switch (mode_) {
        case Mode::None:
            break;
        case Mode::Scripted: {
            while (script_pos_ < script_.size() && script_[script_pos_].step < step) ++script_pos_;
            for (std::size_t i = script_pos_; i < script_.size() && script_[i].step == step; ++i) {
                const ScriptedFault& f = script_[i];
                if (f.proc < 0 || f.proc >= K.rows() || f.task < 0 || f.task >= K.cols() ||
                    K(f.proc, f.task) < 0.5) {
                    throw std::invalid_argument("scripted fault: task " + std::to_string(f.task) +
                                                " is not hosted on processor " +
                                                std::to_string(f.proc));
                }
                // Earliest unflagged release of that (task, proc) this window.
                Job* target = nullptr;
                for (Job& j : window_jobs) {
                    if (j.task == f.task && j.proc == f.proc && !j.fault_flagged &&
                        (!target || j.release < target->release ||
                         (j.release == target->release && j.seq < target->seq))) {
                        target = &j;
                    }
                }
                if (target) {
                    target->fault_flagged = true;
                    target->fault_progress = f.progress;
                    ++flagged;
                }
            }
            break;
        }
        case Mode::Random: {
            // Two draws per job in release order, hit or not, so the stream
            // position depends only on how many jobs have been released.
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            for (Job& j : window_jobs) {
                const double u = unit(rng_);
                const double progress = unit(rng_);
                if (u < p_f_) {
                    j.fault_flagged = true;
                    j.fault_progress = progress;
                    ++flagged;
                }
            }
            break;
        }
    }
    return flagged;
}

}  // namespace fcsim
