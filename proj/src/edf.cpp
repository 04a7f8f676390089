#include "fcsim/edf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

namespace fcsim {

namespace {

// Completion within EPS of the deadline still counts as met; everything in the
// job layer tolerates this much accumulated floating-point drift.
constexpr double EPS = 1e-9;
constexpr double INF = std::numeric_limits<double>::infinity();

// Earlier deadline runs first; ties broken by release, then task, then seq so
// the schedule is reproducible.
bool edf_before(const Job& a, const Job& b) {
    if (a.deadline != b.deadline) return a.deadline < b.deadline;
    if (a.release != b.release) return a.release < b.release;
    if (a.task != b.task) return a.task < b.task;
    return a.seq < b.seq;
}

struct ProcOutcome {
    long missed = 0;
    std::vector<long> missed_by_task;
    std::vector<FaultEvent> events;
    std::vector<Job> carried;
};

// Simulates one processor over [t0, t_end]. `jobs` holds this processor's
// backlog plus its share of the window releases; releases inside the span are
// admitted as time reaches them.
ProcOutcome simulate_proc(int proc, std::vector<Job> jobs, long step, double t0, double t_end,
                          int n_tasks) {
    ProcOutcome out;
    out.missed_by_task.assign(static_cast<size_t>(n_tasks), 0);

    std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
        if (a.release != b.release) return a.release < b.release;
        if (a.task != b.task) return a.task < b.task;
        return a.seq < b.seq;
    });

    std::vector<Job> ready;
    size_t pending = 0;  // index into jobs of the next unadmitted release
    double t = t0;

    // Every job whose deadline has arrived leaves the ready set here: within
    // EPS of full execution counts as met, anything else is killed and missed.
    auto resolve_expired = [&](double now) {
        for (size_t i = 0; i < ready.size();) {
            Job& j = ready[i];
            if (j.deadline > now + EPS) {
                ++i;
                continue;
            }
            if (j.executed >= j.demand - EPS) {
                if (j.fault_fired) {
                    out.events.push_back({step, j.task, proc, Recovery::ReExecuted});
                }
            } else {
                ++out.missed;
                ++out.missed_by_task[static_cast<size_t>(j.task)];
                if (j.fault_flagged) {
                    // A fired fault that never finished re-executing, or a
                    // pending fault starved of processor time, both end here.
                    out.events.push_back({step, j.task, proc, Recovery::Unrecovered});
                }
            }
            ready.erase(ready.begin() + static_cast<long>(i));
        }
    };

    while (true) {
        while (pending < jobs.size() && jobs[pending].release <= t + EPS) {
            ready.push_back(jobs[pending]);
            ++pending;
        }
        resolve_expired(t);
        if (t >= t_end - EPS) break;

        auto run_it = std::min_element(ready.begin(), ready.end(), edf_before);
        double next_release = pending < jobs.size() ? jobs[pending].release : INF;
        if (run_it == ready.end()) {
            t = std::min(next_release, t_end);
            continue;
        }
        Job& run = *run_it;

        double t_complete = t + (run.demand - run.executed);
        double t_fault = INF;
        if (run.fault_flagged && !run.fault_fired) {
            t_fault = t + std::max(0.0, run.fault_progress * run.demand - run.executed);
        }

        // Segment boundaries in precedence order: near-ties (within EPS)
        // resolve to the earlier entry, so a fault beats the completion it
        // precedes and completion at the deadline counts as met.
        enum { FAULT, COMPLETE, DEADLINE, RELEASE, END };
        const double cand[] = {t_fault, t_complete, run.deadline, next_release, t_end};
        double t_next = *std::min_element(std::begin(cand), std::end(cand));
        int what = END;
        for (int c = 0; c < 5; ++c) {
            if (cand[c] <= t_next + EPS) {
                what = c;
                break;
            }
        }
        t_next = std::max(cand[what], t);

        run.executed += t_next - t;
        t = t_next;

        if (what == FAULT) {
            run.fault_fired = true;
            if (run.has_fault_free_twin) {
                // The twin's result stands in for this job: drop it, met.
                out.events.push_back({step, run.task, proc, Recovery::MaskedByReplica});
                ready.erase(run_it);
            } else {
                run.executed = 0.0;
            }
        } else if (what == COMPLETE) {
            run.executed = run.demand;
            if (run.fault_fired) {
                out.events.push_back({step, run.task, proc, Recovery::ReExecuted});
            }
            ready.erase(run_it);
        }
        // DEADLINE falls through to resolve_expired at the loop top; RELEASE
        // and END only advance time.
    }

    // Unfinished jobs with deadlines beyond this window keep their progress.
    for (Job& j : ready) {
        if (j.deadline > t_end + EPS) out.carried.push_back(j);
    }
    std::sort(out.carried.begin(), out.carried.end(), edf_before);
    return out;
}

}  // namespace

EdfState::EdfState(int n_procs, int n_tasks)
    : next_release(static_cast<size_t>(n_tasks), 0.0),
      next_seq(static_cast<size_t>(n_tasks), 0),
      backlog(static_cast<size_t>(n_procs)) {}

std::vector<Job> release_window_jobs(EdfState& state, const SystemTopology& topo,
                                     const AllocationMatrix& K, const Eigen::VectorXd& rates,
                                     double t0, double window) {
    const int m = topo.num_tasks();
    if (rates.size() != m) throw std::invalid_argument("release_window_jobs: rates size mismatch");
    if (state.next_release.size() != static_cast<size_t>(m))
        throw std::invalid_argument("release_window_jobs: state task count mismatch");
    if (!(window > 0.0)) throw std::invalid_argument("release_window_jobs: window must be positive");

    const double t_end = t0 + window;
    std::vector<Job> out;
    for (int j = 0; j < m; ++j) {
        const TaskSpec& task = topo.tasks[static_cast<size_t>(j)];
        if (!(rates[j] > 0.0)) throw std::invalid_argument("release_window_jobs: rate must be positive");
        const double period = 1.0 / rates[j];
        const double demand = task.exec_factor * task.wcet_est;
        double& rel = state.next_release[static_cast<size_t>(j)];
        while (rel < t_end - EPS) {
            Job job;
            job.task = j;
            job.seq = state.next_seq[static_cast<size_t>(j)]++;
            job.release = rel;
            job.deadline = rel + period;
            job.demand = demand;
            for (int p = 0; p < topo.n_procs; ++p) {
                if (K(p, j) >= 0.5) {
                    job.proc = p;
                    out.push_back(job);
                }
            }
            rel += period;
        }
    }
    std::sort(out.begin(), out.end(), [](const Job& a, const Job& b) {
        if (a.release != b.release) return a.release < b.release;
        if (a.task != b.task) return a.task < b.task;
        return a.proc < b.proc;
    });
    return out;
}

WindowStats run_edf_window(EdfState& state, std::vector<Job> new_jobs, long step, double t0,
                           double window, const SystemTopology& topo) {
    const int m = topo.num_tasks();
    const int n = topo.n_procs;
    if (state.backlog.size() != static_cast<size_t>(n))
        throw std::invalid_argument("run_edf_window: state processor count mismatch");

    WindowStats stats;
    stats.released_by_task.assign(static_cast<size_t>(m), 0);
    stats.missed_by_task.assign(static_cast<size_t>(m), 0);

    // A fault is masked only by a sibling instance of the same release that
    // was not itself flagged. Siblings all sit in new_jobs, so the twin bit is
    // settled here, after fault injection, and rides with the job from then on.
    std::map<std::pair<int, long>, std::vector<const Job*>> siblings;
    for (Job& j : new_jobs) {
        siblings[{j.task, j.seq}].push_back(&j);
        ++stats.released_by_task[static_cast<size_t>(j.task)];
        ++stats.misses.released;
        if (j.fault_flagged) ++stats.faults_injected;
    }
    for (Job& j : new_jobs) {
        for (const Job* twin : siblings[{j.task, j.seq}]) {
            if (twin->proc != j.proc && !twin->fault_flagged) {
                j.has_fault_free_twin = true;
                break;
            }
        }
    }

    for (int p = 0; p < n; ++p) {
        std::vector<Job> jobs = std::move(state.backlog[static_cast<size_t>(p)]);
        for (const Job& j : new_jobs) {
            if (j.proc == p) jobs.push_back(j);
        }
        ProcOutcome res = simulate_proc(p, std::move(jobs), step, t0, t0 + window, m);
        stats.misses.missed += res.missed;
        for (int j = 0; j < m; ++j)
            stats.missed_by_task[static_cast<size_t>(j)] += res.missed_by_task[static_cast<size_t>(j)];
        stats.fault_events.insert(stats.fault_events.end(), res.events.begin(), res.events.end());
        state.backlog[static_cast<size_t>(p)] = std::move(res.carried);
    }

    stats.misses.miss_ratio =
        stats.misses.released > 0
            ? static_cast<double>(stats.misses.missed) / static_cast<double>(stats.misses.released)
            : 0.0;
    return stats;
}

}  // namespace fcsim
