#include "fcsim/lq.hpp"

#include <algorithm>
#include <stdexcept>

namespace fcsim {

void ControllerConfig::validate() const {
    const Eigen::Index n = v_diag.size();
    const Eigen::Index m = q_diag.size();
    if (y_ref.size() != n) throw std::invalid_argument("controller: y_ref/v_diag size mismatch");
    if (u_prev.size() != m || du_min.size() != m || du_max.size() != m)
        throw std::invalid_argument("controller: input-side vector size mismatch");
    if ((v_diag.array() < 0.0).any())
        throw std::invalid_argument("controller: tracking weights must be >= 0");
    if ((q_diag.array() <= 0.0).any())
        throw std::invalid_argument("controller: input-change weights must be > 0");
    if ((du_min.array() > du_max.array()).any())
        throw std::invalid_argument("controller: empty command box");
}

Eigen::VectorXd free_response(const ArxModel& model, const std::deque<Eigen::VectorXd>& hist_u,
                              const std::deque<Eigen::VectorXd>& hist_y) {
    std::deque<Eigen::VectorXd> u0 = hist_u;
    if (u0.empty()) throw std::invalid_argument("free_response: empty input history");
    u0.front() = Eigen::VectorXd::Zero(model.n_inputs);
    return predict(model, make_regressor(u0, hist_y, model.order));
}

double lq_cost(const ArxModel& model, const Eigen::VectorXd& y_free,
               const ControllerConfig& cfg, const Eigen::VectorXd& u) {
    const Eigen::VectorXd y_next = model.input_gain() * u + y_free;
    const double track = (cfg.v_diag.asDiagonal() * (y_next - cfg.y_ref)).squaredNorm();
    const double effort = (cfg.q_diag.asDiagonal() * (u - cfg.u_prev)).squaredNorm();
    return track + effort;
}

LqCommand lq_control(const ArxModel& model, const std::deque<Eigen::VectorXd>& hist_u,
                     const std::deque<Eigen::VectorXd>& hist_y, const ControllerConfig& cfg) {
    cfg.validate();
    if (cfg.v_diag.size() != model.n_outputs || cfg.q_diag.size() != model.n_inputs)
        throw std::invalid_argument("lq_control: config does not match model dimensions");

    const Eigen::VectorXd y_free = free_response(model, hist_u, hist_y);
    const Eigen::MatrixXd m0 = model.input_gain();
    const Eigen::VectorXd v2 = cfg.v_diag.array().square();
    const Eigen::VectorXd q2 = cfg.q_diag.array().square();

    Eigen::MatrixXd normal = m0.transpose() * v2.asDiagonal() * m0;
    normal.diagonal() += q2;
    const Eigen::VectorXd rhs =
        m0.transpose() * (v2.asDiagonal() * (cfg.y_ref - y_free)) + q2.asDiagonal() * cfg.u_prev;

    Eigen::LDLT<Eigen::MatrixXd> solver(normal);
    if (solver.info() != Eigen::Success)
        throw std::logic_error("lq_control: normal matrix not positive-definite");

    LqCommand out;
    out.u_unconstrained = solver.solve(rhs);
    out.u.resize(out.u_unconstrained.size());
    out.clamped.assign(static_cast<std::size_t>(out.u_unconstrained.size()), false);
    for (Eigen::Index j = 0; j < out.u_unconstrained.size(); ++j) {
        out.u(j) = std::clamp(out.u_unconstrained(j), cfg.du_min(j), cfg.du_max(j));
        out.clamped[static_cast<std::size_t>(j)] = out.u(j) != out.u_unconstrained(j);
    }
    out.cost = lq_cost(model, y_free, cfg, out.u);
    return out;
}

}  // namespace fcsim
