#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "fcsim/edf.hpp"
#include "fcsim/fault.hpp"
#include "fcsim/lq.hpp"
#include "fcsim/plant.hpp"
#include "fcsim/rls.hpp"
#include "fcsim/task_model.hpp"

namespace fcsim {

struct FaultSpec {
    enum class Mode { None, Scripted, Random };
    Mode mode = Mode::None;
    std::vector<ScriptedFault> script;
    double p_f = 0.0;
};

/// How the input-gain estimate starts out. "zero" is the blank-slate start;
/// "estimated_gain" seeds the input blocks from the allocation and the a
/// priori worst-case execution times (as if execution factors were 1), which
/// the identifier then corrects online.
enum class EstimatorInit { Zero, EstimatedGain };

struct LoopConfig {
    SystemTopology topo;
    long n_steps = 1000;
    int warmup_steps = 10;
    double dither_amplitude = 0.02;  // warmup rate excitation, fraction of initial rate
    double set_point = 0.8123;
    double miss_ref = 0.0;  // reference miss ratio, recorded but not fed back
    RlsConfig rls;
    EstimatorInit estimator_init = EstimatorInit::EstimatedGain;
    Eigen::VectorXd v_diag;  // empty: ones
    Eigen::VectorXd q_diag;  // empty: 0.5
    double du_frac = 0.5;    // rate-change box, fraction of initial rate per step
    PlantConfig plant;
    FaultSpec faults;
    std::uint64_t seed = 1;
};

struct TraceRecord {
    long step = 0;
    Eigen::VectorXd y_meas;
    Eigen::VectorXd y_raw;
    Eigen::VectorXd rates;  // rates the window executed with
    Eigen::VectorXd u_cmd;  // realized rate change applied at the end of the step
    double miss_ratio = 0.0;
    double pred_err_norm = 0.0;
    double cost = 0.0;
    long faults_injected = 0;
    long faults_masked = 0;
    long faults_reexecuted = 0;
    long faults_unrecovered = 0;
    std::vector<int> clamped;  // per task, 1 when a bound limited the change
};

struct LoopResult {
    std::vector<TraceRecord> trace;
    std::vector<FaultEvent> fault_events;
    std::vector<long> released_by_task;
    std::vector<long> missed_by_task;
    ArxModel model;  // estimate after the final step
    long covariance_resets = 0;
};

struct Metrics {
    long settling_step = -1;  // -1: never settled
    double overshoot = 0.0;
    double steady_state_err = 0.0;
    long total_released = 0;
    long total_missed = 0;
    double overall_miss_ratio = 0.0;
    double mean_cost = 0.0;
    long faults_injected = 0;
    long faults_masked = 0;
    long faults_reexecuted = 0;
    long faults_unrecovered = 0;
};

/// Load schedule entries scale execution demand from their step onward.
LoopResult run_loop(const LoopConfig& cfg, const std::vector<LoadChange>& load_schedule = {});

/// First step from which every later measurement stays within `tol` of the
/// set point (worst processor), scanning from `from_step`; -1 when the run
/// never settles.
long settling_step(const std::vector<TraceRecord>& trace, double set_point, double tol,
                   long from_step = 0);

Metrics summarize(const LoopResult& result, double set_point, double tol = 0.02);

}  // namespace fcsim
