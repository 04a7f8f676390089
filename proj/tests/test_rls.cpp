#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <deque>
#include <random>

#include "fcsim/rls.hpp"

using namespace fcsim;

namespace {

Eigen::VectorXd uniform_vec(Eigen::Index d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = u(rng);
    return v;
}

Eigen::MatrixXd uniform_mat(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(rng);
    return m;
}

// Batch ordinary least squares for y = X z over recorded samples.
Eigen::MatrixXd batch_ls(const std::vector<Eigen::VectorXd>& zs,
                         const std::vector<Eigen::VectorXd>& ys) {
    const Eigen::Index d = zs.front().size();
    const Eigen::Index n = ys.front().size();
    Eigen::MatrixXd zz = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd yz = Eigen::MatrixXd::Zero(n, d);
    for (size_t t = 0; t < zs.size(); ++t) {
        zz += zs[t] * zs[t].transpose();
        yz += ys[t] * zs[t].transpose();
    }
    return zz.ldlt().solve(yz.transpose()).transpose();
}

}  // namespace

TEST_CASE("regressor stacks newest first, inputs then outputs") {
    std::deque<Eigen::VectorXd> hu, hy;
    Eigen::VectorXd u1(1), u0(1), ya(2), yb(2);
    u1 << 0.2;
    u0 << -0.4;
    ya << 0.5, 0.6;
    yb << 0.7, 0.8;
    hu = {u1, u0};  // newest at front
    hy = {ya, yb};

    const Eigen::VectorXd z1 = make_regressor(hu, hy, 1);
    REQUIRE(z1.size() == 3);
    CHECK(z1(0) == 0.2);
    CHECK(z1(1) == 0.5);
    CHECK(z1(2) == 0.6);

    const Eigen::VectorXd z2 = make_regressor(hu, hy, 2);
    REQUIRE(z2.size() == 6);
    CHECK(z2(0) == 0.2);
    CHECK(z2(1) == -0.4);
    CHECK(z2(2) == 0.5);
    CHECK(z2(3) == 0.6);
    CHECK(z2(4) == 0.7);
    CHECK(z2(5) == 0.8);

    hu.pop_back();
    CHECK_THROWS_AS(make_regressor(hu, hy, 2), std::invalid_argument);
}

TEST_CASE("predict is the plain linear map") {
    ArxModel model;
    model.n_outputs = 2;
    model.n_inputs = 1;
    model.order = 1;
    model.coeffs = Eigen::MatrixXd::Zero(2, 3);
    Eigen::VectorXd z(3);
    z << 1.0, 2.0, 3.0;
    CHECK(predict(model, z).norm() == 0.0);

    model.coeffs(0, 1) = 1.0;  // copies y0 slot
    model.coeffs(1, 2) = 1.0;  // copies y1 slot
    const Eigen::VectorXd y = predict(model, z);
    CHECK(y(0) == 2.0);
    CHECK(y(1) == 3.0);

    Eigen::VectorXd bad(4);
    bad.setZero();
    CHECK_THROWS_AS(predict(model, bad), std::invalid_argument);
}

TEST_CASE("noiseless scalar plant identified from persistent excitation") {
    RlsConfig cfg;
    cfg.lambda = 1.0;
    cfg.p0 = 1e8;
    RlsEstimator est(1, 1, cfg);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
        Eigen::VectorXd z = uniform_vec(2, rng);
        Eigen::VectorXd y(1);
        y << 2.0 * z(0);
        est.update(y, z);
    }
    CHECK(std::abs(est.model().coeffs(0, 0) - 2.0) < 1e-6);
    CHECK(std::abs(est.model().coeffs(0, 1)) < 1e-6);
}

TEST_CASE("forgetting factor one reproduces batch least squares") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 4);
        const int m = 1 + static_cast<int>(rng() % 4);
        const Eigen::MatrixXd truth = uniform_mat(n, m + n, rng);

        RlsConfig cfg;
        cfg.lambda = 1.0;
        cfg.p0 = 1e8;
        RlsEstimator est(n, m, cfg);

        std::vector<Eigen::VectorXd> zs, ys;
        for (int t = 0; t < 200; ++t) {
            Eigen::VectorXd z = uniform_vec(m + n, rng);
            Eigen::VectorXd y = truth * z + 0.01 * uniform_vec(n, rng);
            est.update(y, z);
            zs.push_back(z);
            ys.push_back(y);
        }
        const Eigen::MatrixXd batch = batch_ls(zs, ys);
        const double rel = (est.model().coeffs - batch).norm() / batch.norm();
        CHECK(rel < 1e-8);
    }
}

TEST_CASE("covariance stays symmetric positive-definite under random updates") {
    RlsConfig cfg;
    cfg.lambda = 0.98;
    RlsEstimator est(2, 2, cfg);
    std::mt19937_64 rng(5);
    for (int t = 1; t <= 100000; ++t) {
        est.update(uniform_vec(2, rng), uniform_vec(4, rng));
        if (t % 100 == 0) {
            const Eigen::MatrixXd& P = est.covariance();
            CHECK((P - P.transpose()).norm() == 0.0);
            CHECK(Eigen::LLT<Eigen::MatrixXd>(P).info() == Eigen::Success);
        }
    }
}

TEST_CASE("zero regressor changes nothing except covariance inflation") {
    RlsConfig cfg;
    cfg.lambda = 0.5;
    cfg.p0 = 2.0;
    RlsEstimator est(1, 1, cfg);
    Eigen::MatrixXd coeffs(1, 2);
    coeffs << 0.3, -0.7;
    est.set_coefficients(coeffs);

    Eigen::VectorXd y(1), z(2);
    y << 5.0;
    z.setZero();
    est.update(y, z);
    CHECK((est.model().coeffs - coeffs).norm() == 0.0);
    CHECK(est.covariance().isApprox(
        (cfg.p0 / cfg.lambda) * Eigen::MatrixXd::Identity(2, 2), 1e-12));
    CHECK(est.last_error()(0) == 5.0);
}

TEST_CASE("exact prediction leaves coefficients untouched") {
    RlsConfig cfg;
    RlsEstimator est(1, 1, cfg);
    Eigen::MatrixXd coeffs(1, 2);
    coeffs << 1.5, 0.25;
    est.set_coefficients(coeffs);

    Eigen::VectorXd z(2), y(1);
    z << 2.0, 4.0;
    y << 1.5 * 2.0 + 0.25 * 4.0;
    est.update(y, z);
    CHECK((est.model().coeffs - coeffs).norm() == 0.0);
    CHECK(est.last_error().norm() == 0.0);
}

TEST_CASE("covariance reset fires on blow-up and keeps the estimate") {
    RlsConfig cfg;
    cfg.lambda = 0.5;  // doubles P every starved update
    cfg.p0 = 1.0;
    cfg.p_max = 100.0;
    RlsEstimator est(1, 1, cfg);
    Eigen::MatrixXd coeffs(1, 2);
    coeffs << 0.9, -0.1;
    est.set_coefficients(coeffs);

    Eigen::VectorXd y(1), z(2);
    y << 0.0;
    z.setZero();
    long before = est.covariance_resets();
    // P doubles per starved update: 128 > p_max on the seventh, forcing the reset.
    for (int t = 0; t < 7; ++t) est.update(y, z);
    CHECK(est.covariance_resets() == before + 1);
    CHECK((est.model().coeffs - coeffs).norm() == 0.0);
    CHECK(est.covariance().isApprox(cfg.p0 * Eigen::MatrixXd::Identity(2, 2), 1e-12));
    // Five more starved updates inflate the fresh covariance to 32 p0 without
    // tripping the threshold again.
    for (int t = 0; t < 5; ++t) est.update(y, z);
    CHECK(est.covariance_resets() == before + 1);
    CHECK(est.covariance().isApprox(32.0 * cfg.p0 * Eigen::MatrixXd::Identity(2, 2), 1e-12));
}

TEST_CASE("held-out prediction error shrinks with sample count") {
    std::mt19937_64 rng(17);
    const Eigen::MatrixXd truth = uniform_mat(2, 3, rng);
    const int budgets[3] = {25, 60, 150};
    double avg_err[3] = {0.0, 0.0, 0.0};

    for (int seed = 0; seed < 10; ++seed) {
        std::mt19937_64 data_rng(100 + static_cast<unsigned>(seed));
        for (int b = 0; b < 3; ++b) {
            RlsConfig cfg;
            cfg.lambda = 1.0;
            RlsEstimator est(2, 1, cfg);
            std::mt19937_64 train(data_rng);
            for (int t = 0; t < budgets[b]; ++t) {
                Eigen::VectorXd z = uniform_vec(3, train);
                est.update(truth * z + 0.02 * uniform_vec(2, train), z);
            }
            std::mt19937_64 held(999);
            double err = 0.0;
            for (int t = 0; t < 50; ++t) {
                Eigen::VectorXd z = uniform_vec(3, held);
                err += (predict(est.model(), z) - truth * z).norm();
            }
            avg_err[b] += err;
        }
    }
    CHECK(avg_err[0] > avg_err[1]);
    CHECK(avg_err[1] > avg_err[2]);
}

TEST_CASE("estimator tracks an abrupt parameter change") {
    RlsConfig cfg;
    cfg.lambda = 0.95;
    RlsEstimator est(1, 1, cfg);
    std::mt19937_64 rng(23);

    auto run_plant = [&](double gain, int steps) {
        for (int t = 0; t < steps; ++t) {
            Eigen::VectorXd z = uniform_vec(2, rng);
            z(1) = 0.0;
            Eigen::VectorXd y(1);
            y << gain * z(0);
            est.update(y, z);
        }
        return std::abs(est.model().coeffs(0, 0) - gain);
    };

    CHECK(run_plant(1.5, 300) < 1e-3);
    // Forgetting discounts the old regime within a few hundred samples.
    CHECK(run_plant(0.7, 300) < 1e-3);
}

TEST_CASE("update rejects malformed input") {
    RlsConfig cfg;
    RlsEstimator est(1, 1, cfg);
    Eigen::VectorXd y1(1), z2(2), z3(3);
    y1 << 1.0;
    z2.setZero();
    z3.setZero();
    CHECK_THROWS_AS(est.update(y1, z3), std::invalid_argument);
    Eigen::VectorXd y2(2);
    y2.setZero();
    CHECK_THROWS_AS(est.update(y2, z2), std::invalid_argument);
    Eigen::VectorXd ynan(1);
    ynan << std::nan("");
    CHECK_THROWS_AS(est.update(ynan, z2), std::invalid_argument);

    CHECK_THROWS_AS(RlsEstimator(0, 1, cfg), std::invalid_argument);
    RlsConfig bad = cfg;
    bad.lambda = 0.0;
    CHECK_THROWS_AS(RlsEstimator(1, 1, bad), std::invalid_argument);
    bad = cfg;
    bad.lambda = 1.5;
    CHECK_THROWS_AS(RlsEstimator(1, 1, bad), std::invalid_argument);
    bad = cfg;
    bad.p0 = 0.0;
    CHECK_THROWS_AS(RlsEstimator(1, 1, bad), std::invalid_argument);
}
