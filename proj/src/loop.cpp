#include "fcsim/loop.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace fcsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

FaultProcess make_fault_process(const FaultSpec& spec, std::uint64_t seed) {
    switch (spec.mode) {
        case FaultSpec::Mode::Scripted:
            return FaultProcess::scripted(spec.script);
        case FaultSpec::Mode::Random:
            return FaultProcess::random(spec.p_f, seed);
        case FaultSpec::Mode::None:
            break;
    }
    return FaultProcess::none();
}

}  // namespace

LoopResult run_loop(const LoopConfig& cfg, const std::vector<LoadChange>& load_schedule) {
    SystemTopology topo = cfg.topo;
    topo.apply_default_rate_bounds();
    topo.validate();
    validate_load_schedule(load_schedule);

    const int n = topo.n_procs;
    const int m = topo.num_tasks();
    const int order = cfg.rls.order;
    if (cfg.n_steps < 0) throw std::invalid_argument("run_loop: n_steps must be non-negative");
    if (cfg.warmup_steps < std::max(1, order))
        throw std::invalid_argument("run_loop: warmup must cover at least the model order");
    if (cfg.n_steps > 0 && cfg.warmup_steps >= cfg.n_steps)
        throw std::invalid_argument("run_loop: warmup_steps must be smaller than n_steps");
    if (!(cfg.dither_amplitude >= 0.0 && cfg.dither_amplitude < 1.0))
        throw std::invalid_argument("run_loop: dither amplitude must lie in [0, 1)");
    if (!(cfg.set_point > 0.0 && cfg.set_point <= 1.0))
        throw std::invalid_argument("run_loop: set point must lie in (0, 1]");
    if (!(cfg.du_frac > 0.0)) throw std::invalid_argument("run_loop: du_frac must be positive");

    const AllocationMatrix K = build_allocation_matrix(topo);
    const double T = topo.sample_period;
    const Eigen::VectorXd r_init = initial_rates(topo);

    ControllerConfig ctrl;
    ctrl.v_diag = cfg.v_diag.size() ? cfg.v_diag : Eigen::VectorXd::Ones(n);
    ctrl.q_diag = cfg.q_diag.size() ? cfg.q_diag : Eigen::VectorXd::Constant(m, 0.5);
    ctrl.y_ref = Eigen::VectorXd::Constant(n, cfg.set_point);
    ctrl.u_prev = Eigen::VectorXd::Zero(m);
    ctrl.du_max = cfg.du_frac * r_init;
    ctrl.du_min = -ctrl.du_max;
    if (ctrl.v_diag.size() != n) throw std::invalid_argument("run_loop: v_diag size mismatch");
    if (ctrl.q_diag.size() != m) throw std::invalid_argument("run_loop: q_diag size mismatch");
    ctrl.validate();

    RlsEstimator rls(n, m, cfg.rls);
    if (cfg.estimator_init == EstimatorInit::EstimatedGain) {
        Eigen::MatrixXd coeffs =
            Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(order) * (m + n));
        for (int j = 0; j < m; ++j) {
            coeffs.col(j) = K.col(j) * topo.tasks[static_cast<size_t>(j)].wcet_est;
        }
        coeffs.block(0, static_cast<Eigen::Index>(order) * m, n, n) =
            Eigen::MatrixXd::Identity(n, n);
        rls.set_coefficients(coeffs);
    }

    std::mt19937_64 rng_plant(splitmix64(cfg.seed ^ 0x706c616e74ULL));
    std::mt19937_64 rng_dither(splitmix64(cfg.seed ^ 0x646974686572ULL));
    FaultProcess faults = make_fault_process(cfg.faults, splitmix64(cfg.seed ^ 0x6661756c74ULL));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    EdfState edf(n, m);
    std::deque<Eigen::VectorXd> hist_u, hist_y;
    Eigen::VectorXd r = r_init;
    Eigen::VectorXd u_prev = Eigen::VectorXd::Zero(m);

    LoopResult out;
    out.trace.reserve(static_cast<size_t>(cfg.n_steps));
    out.released_by_task.assign(static_cast<size_t>(m), 0);
    out.missed_by_task.assign(static_cast<size_t>(m), 0);

    for (long k = 0; k < cfg.n_steps; ++k) {
        const SystemTopology topo_k = apply_load_schedule(topo, load_schedule, k);

        std::vector<Job> jobs = release_window_jobs(edf, topo_k, K, r, k * T, T);
        faults.inject(k, jobs, K);
        WindowStats stats = run_edf_window(edf, std::move(jobs), k, k * T, T, topo_k);
        for (int j = 0; j < m; ++j) {
            out.released_by_task[static_cast<size_t>(j)] +=
                stats.released_by_task[static_cast<size_t>(j)];
            out.missed_by_task[static_cast<size_t>(j)] +=
                stats.missed_by_task[static_cast<size_t>(j)];
        }
        out.fault_events.insert(out.fault_events.end(), stats.fault_events.begin(),
                                stats.fault_events.end());

        const Measurement meas = measure_utilization(topo_k, K, r, cfg.plant, rng_plant);

        double pred_err = 0.0;
        if (static_cast<int>(hist_u.size()) >= order && static_cast<int>(hist_y.size()) >= order) {
            const Eigen::VectorXd z = make_regressor(hist_u, hist_y, order);
            rls.update(meas.y_meas, z);
            pred_err = rls.last_error().norm();
        }

        Eigen::VectorXd r_next(m);
        Eigen::VectorXd u_real(m);
        double cost = 0.0;
        std::vector<int> clamped(static_cast<size_t>(m), 0);
        if (k < cfg.warmup_steps) {
            // Excite the plant around the initial operating point; the final
            // warmup step lands back on the initial rates exactly so control
            // engages from the nominal state.
            if (k == cfg.warmup_steps - 1 || cfg.dither_amplitude == 0.0) {
                r_next = r_init;
            } else {
                for (int j = 0; j < m; ++j) {
                    r_next[j] = r_init[j] * (1.0 + cfg.dither_amplitude * unit(rng_dither));
                }
                r_next = clamp_rates(r_next, topo);
            }
            u_real = r_next - r;
        } else {
            hist_u.push_front(Eigen::VectorXd::Zero(m));  // slot for the pending input
            ctrl.u_prev = u_prev;
            const LqCommand cmd = lq_control(rls.model(), hist_u, hist_y, ctrl);
            hist_u.pop_front();
            r_next = clamp_rates(r + cmd.u, topo);
            u_real = r_next - r;
            cost = cmd.cost;
            for (int j = 0; j < m; ++j) {
                clamped[static_cast<size_t>(j)] =
                    cmd.clamped[static_cast<size_t>(j)] || std::abs(u_real[j] - cmd.u[j]) > 1e-12;
            }
            u_prev = u_real;
        }

        if (!meas.y_meas.allFinite() || !u_real.allFinite())
            throw std::runtime_error("run_loop: state diverged at step " + std::to_string(k));

        hist_u.push_front(u_real);
        hist_y.push_front(meas.y_meas);
        while (static_cast<int>(hist_u.size()) > order + 1) hist_u.pop_back();
        while (static_cast<int>(hist_y.size()) > order + 1) hist_y.pop_back();

        TraceRecord rec;
        rec.step = k;
        rec.y_meas = meas.y_meas;
        rec.y_raw = meas.y_raw;
        rec.rates = r;
        rec.u_cmd = u_real;
        rec.miss_ratio = stats.misses.miss_ratio;
        rec.pred_err_norm = pred_err;
        rec.cost = cost;
        rec.faults_injected = stats.faults_injected;
        for (const FaultEvent& e : stats.fault_events) {
            switch (e.recovery) {
                case Recovery::MaskedByReplica: ++rec.faults_masked; break;
                case Recovery::ReExecuted: ++rec.faults_reexecuted; break;
                case Recovery::Unrecovered: ++rec.faults_unrecovered; break;
            }
        }
        rec.clamped = std::move(clamped);
        out.trace.push_back(std::move(rec));

        r = r_next;
    }

    out.model = rls.model();
    out.covariance_resets = rls.covariance_resets();
    return out;
}

long settling_step(const std::vector<TraceRecord>& trace, double set_point, double tol,
                   long from_step) {
    long last_bad = -1;
    bool any = false;
    for (const TraceRecord& rec : trace) {
        if (rec.step < from_step) continue;
        any = true;
        const double dev = (rec.y_meas.array() - set_point).abs().maxCoeff();
        if (dev > tol) last_bad = rec.step;
    }
    if (!any) return -1;
    if (last_bad < 0) return from_step;
    if (last_bad >= trace.back().step) return -1;
    return last_bad + 1;
}

Metrics summarize(const LoopResult& result, double set_point, double tol) {
    if (result.trace.empty()) throw std::invalid_argument("summarize: empty trace");
    Metrics m;
    m.settling_step = settling_step(result.trace, set_point, tol, 0);

    double cost_sum = 0.0;
    for (const TraceRecord& rec : result.trace) {
        m.overshoot = std::max(m.overshoot, rec.y_meas.maxCoeff() - set_point);
        cost_sum += rec.cost;
        m.faults_injected += rec.faults_injected;
        m.faults_masked += rec.faults_masked;
        m.faults_reexecuted += rec.faults_reexecuted;
        m.faults_unrecovered += rec.faults_unrecovered;
    }
    m.overshoot = std::max(0.0, m.overshoot);
    m.mean_cost = cost_sum / static_cast<double>(result.trace.size());

    const size_t tail = std::max<size_t>(1, result.trace.size() / 5);
    double dev_sum = 0.0;
    for (size_t i = result.trace.size() - tail; i < result.trace.size(); ++i) {
        dev_sum += (result.trace[i].y_meas.array() - set_point).abs().maxCoeff();
    }
    m.steady_state_err = dev_sum / static_cast<double>(tail);

    for (long c : result.released_by_task) m.total_released += c;
    for (long c : result.missed_by_task) m.total_missed += c;
    m.overall_miss_ratio = m.total_released > 0 ? static_cast<double>(m.total_missed) /
                                                      static_cast<double>(m.total_released)
                                                : 0.0;
    return m;
}

}  // namespace fcsim
