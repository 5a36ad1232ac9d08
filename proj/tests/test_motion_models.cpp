#include "slammot/motion_models.hpp"

#include "oracles.hpp"
#include "slammot/angles.hpp"

#include <doctest.h>

#include <random>

using namespace slammot;

namespace {

ModelState make_state(ModelId model, double x, double z, double theta,
                      double v = 0.0, double omega = 0.0) {
    ModelState s;
    s.model = model;
    s.x = x;
    s.z = z;
    s.theta = theta;
    s.v = v;
    s.omega = omega;
    return s;
}

ModelState random_state(std::mt19937_64& rng, ModelId model) {
    return make_state(model, testutil::uniform(rng, -20, 20),
                      testutil::uniform(rng, -20, 20),
                      testutil::uniform(rng, -2.5, 2.5),
                      testutil::uniform(rng, -8, 8),
                      testutil::uniform(rng, -0.8, 0.8));
}

}  // namespace

TEST_CASE("propagate CP is the identity") {
    const ModelState s = make_state(ModelId::CP, 3.0, -1.0, 0.7);
    const ModelState out = propagate(s, 0.1);
    CHECK(out.x == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(out.z == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(out.theta == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(out.model == ModelId::CP);
}

TEST_CASE("propagate CV advances along the heading") {
    const ModelState s = make_state(ModelId::CV, 0.0, 0.0, 0.0, 2.0);
    const ModelState out = propagate(s, 0.5);
    CHECK(out.x == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(out.z == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(out.theta == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(out.v == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("propagate CTRV uses the half-angle heading") {
    const ModelState s = make_state(ModelId::CTRV, 0.0, 0.0, 0.0, 1.0, M_PI);
    const ModelState out = propagate(s, 1.0);
    CHECK(out.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(out.z == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.theta == doctest::Approx(M_PI).epsilon(1e-12));
    CHECK(out.v == doctest::Approx(1.0));
    CHECK(out.omega == doctest::Approx(M_PI));
}

TEST_CASE("propagate rejects bad input") {
    const ModelState s = make_state(ModelId::CV, 0, 0, 0, 1);
    CHECK_THROWS_AS(propagate(s, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(propagate(s, -0.1), std::invalid_argument);
    ModelState bad = s;
    bad.x = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(propagate(bad, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(jacobian(bad, 0.1), std::invalid_argument);
}

TEST_CASE("propagated heading is wrapped to (-pi, pi]") {
    const ModelState s = make_state(ModelId::CTRV, 0, 0, 3.0, 1.0, 4.0);
    const ModelState out = propagate(s, 0.5);  // raw heading 5.0
    CHECK(out.theta == doctest::Approx(5.0 - 2.0 * M_PI).epsilon(1e-12));
    CHECK(out.theta <= M_PI);
    CHECK(out.theta > -M_PI);
}

TEST_CASE("jacobian CP is the 3x3 identity") {
    const ModelState s = make_state(ModelId::CP, 1, 2, 0.5);
    CHECK((jacobian(s, 0.3) - Eigen::Matrix3d::Identity()).norm() == 0.0);
}

TEST_CASE("jacobian matches finite differences at the spec examples") {
    const double dt_cv = 0.5;
    const ModelState cv = make_state(ModelId::CV, 0, 0, 0, 2);
    auto f_cv = [&](const Eigen::VectorXd& d) {
        const Eigen::VectorXd x = cv.as_vector() + d;
        return propagate(ModelState::from_vector(ModelId::CV, x), dt_cv)
            .as_vector();
    };
    CHECK(testutil::relative_error(
              jacobian(cv, dt_cv),
              testutil::finite_difference(f_cv, 4)) < 1e-6);

    const double dt_ctrv = 0.1;
    const ModelState ctrv = make_state(ModelId::CTRV, 1, 2, 0.3, 1.5, 0.2);
    auto f_ctrv = [&](const Eigen::VectorXd& d) {
        const Eigen::VectorXd x = ctrv.as_vector() + d;
        return propagate(ModelState::from_vector(ModelId::CTRV, x), dt_ctrv)
            .as_vector();
    };
    CHECK(testutil::relative_error(
              jacobian(ctrv, dt_ctrv),
              testutil::finite_difference(f_ctrv, 5)) < 1e-6);
}

TEST_CASE("jacobian matches finite differences on randomized states") {
    std::mt19937_64 rng(7);
    for (ModelId model : kAllModels) {
        for (int i = 0; i < 1000; ++i) {
            const ModelState s = random_state(rng, model);
            const double dt = testutil::uniform(rng, 0.01, 0.5);
            auto f = [&](const Eigen::VectorXd& d) {
                const Eigen::VectorXd x = s.as_vector() + d;
                return propagate(ModelState::from_vector(model, x), dt)
                    .as_vector();
            };
            CHECK(testutil::relative_error(
                      jacobian(s, dt),
                      testutil::finite_difference(f, s.dim())) < 1e-6);
        }
    }
}

TEST_CASE("lift zero-fills the absent components") {
    const FullState cp = lift(make_state(ModelId::CP, 1, 2, 0.5));
    CHECK(cp.as_vector().isApprox(
        (Eigen::Matrix<double, 5, 1>() << 1, 2, 0.5, 0, 0).finished()));
    const FullState cv = lift(make_state(ModelId::CV, 1, 2, 0.5, 3));
    CHECK(cv.as_vector().isApprox(
        (Eigen::Matrix<double, 5, 1>() << 1, 2, 0.5, 3, 0).finished()));
    const FullState ctrv =
        lift(make_state(ModelId::CTRV, 1, 2, 0.5, 3, 0.1));
    CHECK(ctrv.as_vector().isApprox(
        (Eigen::Matrix<double, 5, 1>() << 1, 2, 0.5, 3, 0.1).finished()));
}

TEST_CASE("lift then truncate is the identity") {
    std::mt19937_64 rng(11);
    for (ModelId model : kAllModels) {
        for (int i = 0; i < 100; ++i) {
            ModelState s = random_state(rng, model);
            if (s.dim() < 4) s.v = 0.0;
            if (s.dim() < 5) s.omega = 0.0;
            const ModelState back = truncate(lift(s), model);
            CHECK(back.as_vector() == s.as_vector());
        }
    }
}

TEST_CASE("process noise is the configured diagonal") {
    NoiseConfig cfg;
    cfg.q_position = 0.5;
    cfg.q_heading = 0.25;
    cfg.q_velocity = 2.0;
    cfg.q_turn_rate = 4.0;
    const Eigen::MatrixXd q_cp = process_noise(ModelId::CP, cfg);
    CHECK(q_cp.rows() == 3);
    CHECK(q_cp.isApprox(
        Eigen::Vector3d(0.5, 0.5, 0.25).asDiagonal().toDenseMatrix()));
    const Eigen::MatrixXd q_cv = process_noise(ModelId::CV, cfg);
    CHECK(q_cv.rows() == 4);
    CHECK(q_cv(3, 3) == 2.0);
    const Eigen::MatrixXd q_ctrv = process_noise(ModelId::CTRV, cfg);
    CHECK(q_ctrv.rows() == 5);
    CHECK(q_ctrv(4, 4) == 4.0);
    for (ModelId m : kAllModels) {
        const Eigen::MatrixXd q = process_noise(m, cfg);
        CHECK(q.diagonal().minCoeff() > 0.0);
        CHECK((q - Eigen::MatrixXd(q.diagonal().asDiagonal())).norm() == 0.0);
    }
}

TEST_CASE("two short steps equal one combined step") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 200; ++i) {
        const double d1 = testutil::uniform(rng, 0.01, 0.4);
        const double d2 = testutil::uniform(rng, 0.01, 0.4);
        {
            const ModelState s = random_state(rng, ModelId::CP);
            const auto two = propagate(propagate(s, d1), d2);
            const auto one = propagate(s, d1 + d2);
            CHECK(two.as_vector() == one.as_vector());
        }
        {
            const ModelState s = random_state(rng, ModelId::CV);
            const auto two = propagate(propagate(s, d1), d2);
            const auto one = propagate(s, d1 + d2);
            CHECK((two.as_vector() - one.as_vector()).cwiseAbs().maxCoeff() <
                  1e-12);
        }
        {
            ModelState s = random_state(rng, ModelId::CTRV);
            s.omega = 0.0;  // heading held: additivity only without turning
            const auto two = propagate(propagate(s, d1), d2);
            const auto one = propagate(s, d1 + d2);
            CHECK((two.as_vector() - one.as_vector()).cwiseAbs().maxCoeff() <
                  1e-9);
        }
    }
}

TEST_CASE("CTRV at negligible turn rate matches CV") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 200; ++i) {
        ModelState ctrv = random_state(rng, ModelId::CTRV);
        ctrv.omega = testutil::uniform(rng, -1e-9, 1e-9);
        const ModelState cv = truncate(lift(ctrv), ModelId::CV);
        const double dt = testutil::uniform(rng, 0.01, 0.5);
        const auto a = propagate(ctrv, dt);
        const auto b = propagate(cv, dt);
        CHECK(std::abs(a.x - b.x) < 1e-8);
        CHECK(std::abs(a.z - b.z) < 1e-8);
        CHECK(std::abs(wrap_angle(a.theta - b.theta)) < 1e-8);
        CHECK(std::abs(a.v - b.v) < 1e-8);
    }
}
