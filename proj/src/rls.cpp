#include "fcsim/rls.hpp"

#include <stdexcept>

namespace fcsim {

Eigen::VectorXd make_regressor(const std::deque<Eigen::VectorXd>& hist_u,
                               const std::deque<Eigen::VectorXd>& hist_y, int order) {
    if (order < 1) throw std::invalid_argument("make_regressor: order must be >= 1");
    if (static_cast<int>(hist_u.size()) < order || static_cast<int>(hist_y.size()) < order)
        throw std::invalid_argument("make_regressor: insufficient history for order " +
                                    std::to_string(order));
    const Eigen::Index m = hist_u.front().size();
    const Eigen::Index n = hist_y.front().size();
    Eigen::VectorXd z(order * (m + n));
    Eigen::Index at = 0;
    for (int k = 0; k < order; ++k, at += m) z.segment(at, m) = hist_u[static_cast<std::size_t>(k)];
    for (int k = 0; k < order; ++k, at += n) z.segment(at, n) = hist_y[static_cast<std::size_t>(k)];
    return z;
}

Eigen::VectorXd predict(const ArxModel& model, const Eigen::VectorXd& z) {
    if (z.size() != model.regressor_dim())
        throw std::invalid_argument("predict: regressor length " + std::to_string(z.size()) +
                                    " does not match model dimension " +
                                    std::to_string(model.regressor_dim()));
    return model.coeffs * z;
}

RlsEstimator::RlsEstimator(int n_outputs, int n_inputs, const RlsConfig& cfg) : cfg_(cfg) {
    if (n_outputs < 1 || n_inputs < 1)
        throw std::invalid_argument("RlsEstimator: dimensions must be >= 1");
    if (cfg.order < 1) throw std::invalid_argument("RlsEstimator: order must be >= 1");
    if (!(cfg.lambda > 0.0) || cfg.lambda > 1.0)
        throw std::invalid_argument("RlsEstimator: lambda must be in (0, 1]");
    if (!(cfg.p0 > 0.0)) throw std::invalid_argument("RlsEstimator: p0 must be > 0");
    model_.n_outputs = n_outputs;
    model_.n_inputs = n_inputs;
    model_.order = cfg.order;
    model_.coeffs = Eigen::MatrixXd::Zero(n_outputs, model_.regressor_dim());
    P_ = cfg.p0 * Eigen::MatrixXd::Identity(model_.regressor_dim(), model_.regressor_dim());
    last_error_ = Eigen::VectorXd::Zero(n_outputs);
}

void RlsEstimator::set_coefficients(const Eigen::MatrixXd& coeffs) {
    if (coeffs.rows() != model_.coeffs.rows() || coeffs.cols() != model_.coeffs.cols())
        throw std::invalid_argument("set_coefficients: shape mismatch");
    model_.coeffs = coeffs;
}

void RlsEstimator::update(const Eigen::VectorXd& y_new, const Eigen::VectorXd& z) {
    if (y_new.size() != model_.n_outputs)
        throw std::invalid_argument("rls update: output dimension mismatch");
    if (z.size() != model_.regressor_dim())
        throw std::invalid_argument("rls update: regressor dimension mismatch");
    if (!y_new.allFinite() || !z.allFinite())
        throw std::invalid_argument("rls update: non-finite input");

    const Eigen::VectorXd e = y_new - model_.coeffs * z;
    const Eigen::VectorXd pz = P_ * z;
    const double denom = cfg_.lambda + z.dot(pz);
    model_.coeffs += e * (pz.transpose() / denom);
    P_ = (P_ - pz * pz.transpose() / denom) / cfg_.lambda;
    P_ = ((P_ + P_.transpose()) / 2.0).eval();
    last_error_ = e;

    if (P_.cwiseAbs().maxCoeff() > cfg_.p_max) {
        P_ = cfg_.p0 *
             Eigen::MatrixXd::Identity(model_.regressor_dim(), model_.regressor_dim());
        ++resets_;
    }
}

}  // namespace fcsim
