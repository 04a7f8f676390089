#pragma once

#include <Eigen/Dense>

#include <deque>

#include "fcsim/rls.hpp"

namespace fcsim {

/// One-step tracking cost: || V (y_next - y_ref) ||^2 + || Q (u - u_prev) ||^2.
/// V and Q are diagonal; Q strictly positive so the minimizer is unique.
struct ControllerConfig {
    Eigen::VectorXd v_diag;   // n, entries >= 0
    Eigen::VectorXd q_diag;   // m, entries > 0
    Eigen::VectorXd y_ref;    // n
    Eigen::VectorXd u_prev;   // m
    Eigen::VectorXd du_min;   // m, lower command bound for this step
    Eigen::VectorXd du_max;   // m, upper command bound

    void validate() const;
};

struct LqCommand {
    Eigen::VectorXd u;                 // clamped rate-change command
    Eigen::VectorXd u_unconstrained;   // minimizer before clamping
    std::vector<bool> clamped;         // per element
    double cost = 0.0;                 // cost at the clamped command
};

double lq_cost(const ArxModel& model, const Eigen::VectorXd& y_free,
               const ControllerConfig& cfg, const Eigen::VectorXd& u);

/// Free response of the identified model for the next step: the prediction
/// with the current input slot zeroed.
Eigen::VectorXd free_response(const ArxModel& model, const std::deque<Eigen::VectorXd>& hist_u,
                              const std::deque<Eigen::VectorXd>& hist_y);

/// Minimizes the one-step cost against the identified model, then clamps
/// elementwise to [du_min, du_max]. Normal equation:
///   (M0' V'V M0 + Q'Q) u = M0' V'V (y_ref - y_free) + Q'Q u_prev
LqCommand lq_control(const ArxModel& model, const std::deque<Eigen::VectorXd>& hist_u,
                     const std::deque<Eigen::VectorXd>& hist_y, const ControllerConfig& cfg);

}  // namespace fcsim
