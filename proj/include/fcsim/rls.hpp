#pragma once

#include <Eigen/Dense>

#include <deque>

namespace fcsim {

/// MIMO ARX parameter block, n x l*(m+n), laid out
/// [M0 .. M_{l-1} | L1 .. L_l] with M blocks n x m and L blocks n x n.
struct ArxModel {
    int n_outputs = 0;  // n
    int n_inputs = 0;   // m
    int order = 1;      // l
    Eigen::MatrixXd coeffs;

    int regressor_dim() const { return order * (n_inputs + n_outputs); }

    Eigen::MatrixXd input_gain() const { return coeffs.leftCols(n_inputs); }  // M0
};

/// Regressor [u(t) .. u(t-l+1)  y(t) .. y(t-l+1)], newest first in each half.
/// Histories are stored newest-first; throws if either holds fewer than l entries.
Eigen::VectorXd make_regressor(const std::deque<Eigen::VectorXd>& hist_u,
                               const std::deque<Eigen::VectorXd>& hist_y, int order);

Eigen::VectorXd predict(const ArxModel& model, const Eigen::VectorXd& z);

struct RlsConfig {
    int order = 1;
    double lambda = 0.98;     // forgetting factor, (0, 1]
    double p0 = 100.0;        // initial covariance scale
    double p_max = 1e12;      // blow-up threshold triggering covariance reset
};

/// Recursive least squares with exponential forgetting over the shared
/// regressor. One update per sample:
///   e      = y - X z
///   denom  = lambda + z' P z
///   X     += e (P z)' / denom
///   P      = (P - P z z' P / denom) / lambda, re-symmetrized
class RlsEstimator {
  public:
    RlsEstimator(int n_outputs, int n_inputs, const RlsConfig& cfg);

    void update(const Eigen::VectorXd& y_new, const Eigen::VectorXd& z);

    /// Replaces the parameter estimate; covariance is untouched.
    void set_coefficients(const Eigen::MatrixXd& coeffs);

    const ArxModel& model() const { return model_; }
    const Eigen::MatrixXd& covariance() const { return P_; }
    const Eigen::VectorXd& last_error() const { return last_error_; }
    double lambda() const { return cfg_.lambda; }
    long covariance_resets() const { return resets_; }

  private:
    RlsConfig cfg_;
    ArxModel model_;
    Eigen::MatrixXd P_;
    Eigen::VectorXd last_error_;
    long resets_ = 0;
};

}  // namespace fcsim
