#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <deque>
#include <random>

#include "fcsim/lq.hpp"

using namespace fcsim;

namespace {

struct Instance {
    ArxModel model;
    std::deque<Eigen::VectorXd> hist_u, hist_y;
    ControllerConfig cfg;
};

Instance random_instance(std::mt19937_64& rng, bool allow_zero_v = true) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.1, 2.0);
    Instance inst;
    const int n = 1 + static_cast<int>(rng() % 4);
    const int m = 1 + static_cast<int>(rng() % 4);
    inst.model.n_outputs = n;
    inst.model.n_inputs = m;
    inst.model.order = 1;
    inst.model.coeffs = Eigen::MatrixXd::NullaryExpr(n, m + n, [&] { return u(rng); });
    inst.hist_u = {Eigen::VectorXd::NullaryExpr(m, [&] { return u(rng); })};
    inst.hist_y = {Eigen::VectorXd::NullaryExpr(n, [&] { return u(rng); })};
    inst.cfg.v_diag = Eigen::VectorXd::NullaryExpr(n, [&] {
        if (allow_zero_v && rng() % 5 == 0) return 0.0;
        return pos(rng);
    });
    inst.cfg.q_diag = Eigen::VectorXd::NullaryExpr(m, [&] { return pos(rng); });
    inst.cfg.y_ref = Eigen::VectorXd::NullaryExpr(n, [&] { return u(rng); });
    inst.cfg.u_prev = Eigen::VectorXd::NullaryExpr(m, [&] { return u(rng); });
    inst.cfg.du_min = Eigen::VectorXd::Constant(m, -1e6);
    inst.cfg.du_max = Eigen::VectorXd::Constant(m, 1e6);
    return inst;
}

ArxModel scalar_model(double m0, double l1) {
    ArxModel model;
    model.n_outputs = 1;
    model.n_inputs = 1;
    model.order = 1;
    model.coeffs.resize(1, 2);
    model.coeffs << m0, l1;
    return model;
}

ControllerConfig scalar_cfg(double v, double q, double y_ref, double u_prev, double lo,
                            double hi) {
    ControllerConfig cfg;
    cfg.v_diag = Eigen::VectorXd::Constant(1, v);
    cfg.q_diag = Eigen::VectorXd::Constant(1, q);
    cfg.y_ref = Eigen::VectorXd::Constant(1, y_ref);
    cfg.u_prev = Eigen::VectorXd::Constant(1, u_prev);
    cfg.du_min = Eigen::VectorXd::Constant(1, lo);
    cfg.du_max = Eigen::VectorXd::Constant(1, hi);
    return cfg;
}

const std::deque<Eigen::VectorXd> kZeroHistU = {Eigen::VectorXd::Zero(1)};
const std::deque<Eigen::VectorXd> kZeroHistY = {Eigen::VectorXd::Zero(1)};

}  // namespace

TEST_CASE("scalar command splits the reference by the weight ratio") {
    const ArxModel model = scalar_model(1.0, 0.0);
    const ControllerConfig cfg = scalar_cfg(1.0, 1.0, 0.8123, 0.0, -10.0, 10.0);
    const LqCommand cmd = lq_control(model, kZeroHistU, kZeroHistY, cfg);

    CHECK(cmd.u(0) == doctest::Approx(0.40615).epsilon(1e-12));
    CHECK_FALSE(cmd.clamped[0]);
    CHECK(cmd.cost == doctest::Approx(2.0 * 0.40615 * 0.40615).epsilon(1e-12));

    // Independent grid search over the same interval.
    double best_u = 0.0, best_cost = 1e300;
    for (int k = 0; k <= 100000; ++k) {
        const double cand = 0.8123 * k / 100000.0;
        const double c =
            lq_cost(model, Eigen::VectorXd::Zero(1), cfg, Eigen::VectorXd::Constant(1, cand));
        if (c < best_cost) {
            best_cost = c;
            best_u = cand;
        }
    }
    CHECK(std::abs(best_u - cmd.u(0)) < 1e-4);
}

TEST_CASE("finite-difference gradient vanishes at the unconstrained minimizer") {
    std::mt19937_64 rng(41);
    const double h = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
        const Instance inst = random_instance(rng);
        const LqCommand cmd = lq_control(inst.model, inst.hist_u, inst.hist_y, inst.cfg);
        REQUIRE((cmd.u - cmd.u_unconstrained).norm() == 0.0);

        const Eigen::VectorXd y_free = free_response(inst.model, inst.hist_u, inst.hist_y);
        Eigen::VectorXd grad(cmd.u.size());
        for (Eigen::Index j = 0; j < cmd.u.size(); ++j) {
            Eigen::VectorXd up = cmd.u, dn = cmd.u;
            up(j) += h;
            dn(j) -= h;
            grad(j) = (lq_cost(inst.model, y_free, inst.cfg, up) -
                       lq_cost(inst.model, y_free, inst.cfg, dn)) /
                      (2.0 * h);
        }
        CHECK(grad.norm() < 1e-6 * (1.0 + cmd.u.norm()));
    }
}

TEST_CASE("no sampled command beats the returned minimizer") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double scales[3] = {0.01, 1.0, 100.0};
    for (int trial = 0; trial < 10; ++trial) {
        const Instance inst = random_instance(rng);
        const LqCommand cmd = lq_control(inst.model, inst.hist_u, inst.hist_y, inst.cfg);
        const Eigen::VectorXd y_free = free_response(inst.model, inst.hist_u, inst.hist_y);
        const double floor = cmd.cost - 1e-9 * (1.0 + std::abs(cmd.cost));
        for (int s = 0; s < 10000; ++s) {
            Eigen::VectorXd cand = cmd.u;
            const double scale = scales[s % 3];
            for (Eigen::Index j = 0; j < cand.size(); ++j) cand(j) += scale * unit(rng);
            CHECK(lq_cost(inst.model, y_free, inst.cfg, cand) >= floor);
        }
    }
}

TEST_CASE("zero tracking weight freezes the command at the previous delta") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 20; ++trial) {
        Instance inst = random_instance(rng, false);
        inst.cfg.v_diag.setZero();
        const LqCommand cmd = lq_control(inst.model, inst.hist_u, inst.hist_y, inst.cfg);
        CHECK((cmd.u - inst.cfg.u_prev).norm() <= 1e-12 * (1.0 + inst.cfg.u_prev.norm()));
    }

    // With a zero previous delta the command is exactly zero.
    Instance inst = random_instance(rng, false);
    inst.cfg.v_diag.setZero();
    inst.cfg.u_prev.setZero();
    const LqCommand cmd = lq_control(inst.model, inst.hist_u, inst.hist_y, inst.cfg);
    CHECK(cmd.u.norm() == 0.0);
}

TEST_CASE("zero input gain freezes the command at the previous delta") {
    std::mt19937_64 rng(53);
    Instance inst = random_instance(rng, false);
    inst.model.coeffs.leftCols(inst.model.n_inputs).setZero();
    const LqCommand cmd = lq_control(inst.model, inst.hist_u, inst.hist_y, inst.cfg);
    CHECK((cmd.u - inst.cfg.u_prev).norm() <= 1e-12 * (1.0 + inst.cfg.u_prev.norm()));
}

TEST_CASE("minimizer is invariant to a common weight rescale") {
    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 20; ++trial) {
        Instance inst = random_instance(rng);
        const LqCommand base = lq_control(inst.model, inst.hist_u, inst.hist_y, inst.cfg);
        inst.cfg.v_diag *= 7.3;
        inst.cfg.q_diag *= 7.3;
        const LqCommand scaled = lq_control(inst.model, inst.hist_u, inst.hist_y, inst.cfg);
        CHECK((base.u - scaled.u).norm() <= 1e-10 * (1.0 + base.u.norm()));
    }
}

TEST_CASE("command never tracks worse than holding the previous delta") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 50; ++trial) {
        const Instance inst = random_instance(rng);
        const LqCommand cmd = lq_control(inst.model, inst.hist_u, inst.hist_y, inst.cfg);
        const Eigen::VectorXd y_free = free_response(inst.model, inst.hist_u, inst.hist_y);
        auto track = [&](const Eigen::VectorXd& u) {
            const Eigen::VectorXd y = inst.model.input_gain() * u + y_free;
            return (inst.cfg.v_diag.asDiagonal() * (y - inst.cfg.y_ref)).norm();
        };
        CHECK(track(cmd.u) <= track(inst.cfg.u_prev) + 1e-12);
    }
}

TEST_CASE("commands clamp to the box and flag it") {
    const ArxModel model = scalar_model(1.0, 0.0);
    const ControllerConfig cfg = scalar_cfg(1.0, 1.0, 0.8123, 0.0, -0.1, 0.1);
    const LqCommand cmd = lq_control(model, kZeroHistU, kZeroHistY, cfg);
    CHECK(cmd.u(0) == 0.1);
    CHECK(cmd.u_unconstrained(0) == doctest::Approx(0.40615).epsilon(1e-12));
    CHECK(cmd.clamped[0]);
    CHECK(cmd.cost == doctest::Approx(lq_cost(model, Eigen::VectorXd::Zero(1), cfg,
                                              Eigen::VectorXd::Constant(1, 0.1)))
                          .epsilon(1e-15));

    // Mixed case: only the saturated coordinate is flagged.
    ArxModel two;
    two.n_outputs = 2;
    two.n_inputs = 2;
    two.order = 1;
    two.coeffs.resize(2, 4);
    two.coeffs << 1.0, 0.0, 0.0, 0.0,  //
        0.0, 0.01, 0.0, 0.0;
    ControllerConfig c2;
    c2.v_diag = Eigen::VectorXd::Ones(2);
    c2.q_diag.resize(2);
    c2.q_diag << 0.1, 0.5;
    c2.y_ref = Eigen::VectorXd::Constant(2, 0.5);
    c2.u_prev = Eigen::VectorXd::Zero(2);
    c2.du_min = Eigen::VectorXd::Constant(2, -0.2);
    c2.du_max = Eigen::VectorXd::Constant(2, 0.2);
    const std::deque<Eigen::VectorXd> hu = {Eigen::VectorXd::Zero(2)};
    const std::deque<Eigen::VectorXd> hy = {Eigen::VectorXd::Zero(2)};
    const LqCommand mixed = lq_control(two, hu, hy, c2);
    CHECK(mixed.clamped[0]);
    CHECK_FALSE(mixed.clamped[1]);
    CHECK(mixed.u(0) == 0.2);
    CHECK(mixed.u(1) == doctest::Approx(0.5 * 0.01 / (0.01 * 0.01 + 0.25)).epsilon(1e-12));
}

TEST_CASE("free response ignores the pending input slot") {
    const ArxModel model = scalar_model(3.0, 0.5);
    std::deque<Eigen::VectorXd> hu = {Eigen::VectorXd::Constant(1, 9.0)};
    std::deque<Eigen::VectorXd> hy = {Eigen::VectorXd::Constant(1, 0.4)};
    const Eigen::VectorXd y_free = free_response(model, hu, hy);
    CHECK(y_free(0) == doctest::Approx(0.5 * 0.4).epsilon(1e-15));
    // The caller's history is left alone.
    CHECK(hu.front()(0) == 9.0);

    std::deque<Eigen::VectorXd> empty;
    CHECK_THROWS_AS(free_response(model, empty, hy), std::invalid_argument);
}

TEST_CASE("controller configuration is validated") {
    const ArxModel model = scalar_model(1.0, 0.0);

    ControllerConfig bad = scalar_cfg(-1.0, 1.0, 0.8, 0.0, -1.0, 1.0);
    CHECK_THROWS_WITH_AS(lq_control(model, kZeroHistU, kZeroHistY, bad),
                         doctest::Contains("tracking weights"), std::invalid_argument);

    bad = scalar_cfg(1.0, 0.0, 0.8, 0.0, -1.0, 1.0);
    CHECK_THROWS_WITH_AS(lq_control(model, kZeroHistU, kZeroHistY, bad),
                         doctest::Contains("input-change weights"), std::invalid_argument);

    bad = scalar_cfg(1.0, 1.0, 0.8, 0.0, 1.0, -1.0);
    CHECK_THROWS_WITH_AS(lq_control(model, kZeroHistU, kZeroHistY, bad),
                         doctest::Contains("empty command box"), std::invalid_argument);

    bad = scalar_cfg(1.0, 1.0, 0.8, 0.0, -1.0, 1.0);
    bad.y_ref = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(lq_control(model, kZeroHistU, kZeroHistY, bad), std::invalid_argument);

    // Valid config against the wrong model shape.
    ControllerConfig wide = scalar_cfg(1.0, 1.0, 0.8, 0.0, -1.0, 1.0);
    wide.q_diag = Eigen::VectorXd::Ones(2);
    wide.u_prev = Eigen::VectorXd::Zero(2);
    wide.du_min = Eigen::VectorXd::Constant(2, -1.0);
    wide.du_max = Eigen::VectorXd::Constant(2, 1.0);
    CHECK_THROWS_WITH_AS(lq_control(model, kZeroHistU, kZeroHistY, wide),
                         doctest::Contains("does not match"), std::invalid_argument);
}
