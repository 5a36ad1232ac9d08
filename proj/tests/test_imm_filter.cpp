#include "slammot/imm_filter.hpp"

#include "oracles.hpp"
#include "slammot/angles.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <random>

using namespace slammot;

namespace {

using Vector5d = Eigen::Matrix<double, 5, 1>;
using Matrix5d = Eigen::Matrix<double, 5, 5>;

Measurement make_meas(int id, double x, double z, double theta, int frame) {
    Measurement m;
    m.object_id = id;
    m.x = x;
    m.z = z;
    m.theta = theta;
    m.frame = frame;
    return m;
}

ImmTrack random_track(std::mt19937_64& rng, const NoiseConfig& cfg) {
    Measurement m = make_meas(0, testutil::uniform(rng, -10, 10),
                              testutil::uniform(rng, -10, 10),
                              testutil::uniform(rng, -2.5, 2.5), 0);
    ImmTrack track = init_track(0, m, cfg);
    Eigen::Vector3d w(testutil::uniform(rng, 0.05, 1.0),
                      testutil::uniform(rng, 0.05, 1.0),
                      testutil::uniform(rng, 0.05, 1.0));
    track.weights = w / w.sum();
    for (auto& est : track.estimates) {
        const int d = est.mean.dim();
        est.covariance = testutil::random_spd(rng, d, 2.0);
        est.mean.x += testutil::uniform(rng, -1, 1);
        est.mean.z += testutil::uniform(rng, -1, 1);
        est.mean.theta =
            wrap_angle(est.mean.theta + testutil::uniform(rng, -0.2, 0.2));
        if (d > 3) est.mean.v = testutil::uniform(rng, -5, 5);
        if (d > 4) est.mean.omega = testutil::uniform(rng, -0.5, 0.5);
    }
    return track;
}

Vector5d lifted(const ModelState& s) { return lift(s).as_vector(); }

Matrix5d lifted_cov(const Eigen::MatrixXd& p) {
    Matrix5d out = Matrix5d::Zero();
    out.topLeftCorner(p.rows(), p.cols()) = p;
    return out;
}

}  // namespace

TEST_CASE("transition matrix layout") {
    const TransitionMatrix c = transition_matrix(0.02);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            CHECK(c(i, j) == doctest::Approx(i == j ? 0.96 : 0.02));
        }
        CHECK(c.row(i).sum() == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(transition_matrix(0.0)
              .isApprox(Eigen::Matrix3d::Identity(), 1e-15));
    CHECK(transition_matrix(1.0 / 3.0)
              .isApprox(Eigen::Matrix3d::Constant(3, 3, 1.0 / 3.0), 1e-12));
    CHECK_THROWS_AS(transition_matrix(-0.01), std::invalid_argument);
    CHECK_THROWS_AS(transition_matrix(0.5), std::invalid_argument);
}

TEST_CASE("init track seeds all models from the measurement") {
    NoiseConfig cfg;
    const ImmTrack track = init_track(7, make_meas(7, 5.0, 2.0, 0.1, 3), cfg);
    CHECK(track.object_id == 7);
    CHECK(track.last_update == 3);
    CHECK(track.model_count() == 3);
    for (int d = 0; d < 3; ++d) {
        CHECK(track.weights[d] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(track.estimates[d].mean.x == 5.0);
        CHECK(track.estimates[d].mean.z == 2.0);
        CHECK(track.estimates[d].mean.theta == doctest::Approx(0.1));
        CHECK(track.estimates[d].mean.v == 0.0);
        CHECK(track.estimates[d].mean.omega == 0.0);
    }
    const Eigen::MatrixXd& p_ctrv = track.estimates[2].covariance;
    CHECK(p_ctrv.rows() == 5);
    CHECK(p_ctrv(0, 0) == 1e4);
    CHECK(p_ctrv(1, 1) == 1e4);
    CHECK(p_ctrv(2, 2) == 1e2);
    CHECK(p_ctrv(3, 3) == 1e2);
    CHECK(p_ctrv(4, 4) == 1e2);
    CHECK(track.estimates[0].covariance.rows() == 3);
}

TEST_CASE("merge with the identity transition is the identity") {
    std::mt19937_64 rng(23);
    NoiseConfig cfg;
    for (int i = 0; i < 100; ++i) {
        const ImmTrack track = random_track(rng, cfg);
        const ImmTrack merged = merge(track, identity_transition(3));
        for (int d = 0; d < 3; ++d) {
            CHECK((merged.weights[d] - track.weights[d]) == 0.0);
            CHECK((merged.estimates[d].mean.as_vector() -
                   track.estimates[d].mean.as_vector())
                      .cwiseAbs()
                      .maxCoeff() < 1e-15);
            CHECK((merged.estimates[d].covariance -
                   track.estimates[d].covariance)
                      .cwiseAbs()
                      .maxCoeff() < 1e-15);
        }
    }
}

TEST_CASE("merge keeps a symmetric bank unchanged") {
    NoiseConfig cfg;
    ImmTrack track = init_track(0, make_meas(0, 1.0, -2.0, 0.4, 0), cfg);
    for (auto& est : track.estimates) {
        est.covariance =
            Eigen::MatrixXd::Identity(est.mean.dim(), est.mean.dim());
    }
    const ImmTrack merged = merge(track, transition_matrix(0.05));
    for (int d = 0; d < 3; ++d) {
        CHECK(merged.weights[d] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
        CHECK(merged.estimates[d].mean.x == doctest::Approx(1.0));
        CHECK(merged.estimates[d].mean.z == doctest::Approx(-2.0));
        CHECK(merged.estimates[d].mean.v == doctest::Approx(0.0));
    }
}

TEST_CASE("merge matches a direct evaluation of the mixing equations") {
    std::mt19937_64 rng(29);
    NoiseConfig cfg;
    const TransitionMatrix c = transition_matrix(0.02);
    for (int rep = 0; rep < 50; ++rep) {
        ImmTrack track = random_track(rng, cfg);
        track.weights = Eigen::Vector3d(0.5, 0.3, 0.2);

        const ImmTrack merged = merge(track, c);

        for (int d = 0; d < 3; ++d) {
            // Direct oracle in the lifted 5-dim space.
            double wm = 0.0;
            for (int s = 0; s < 3; ++s) wm += c(s, d) * track.weights[s];
            Vector5d mean = Vector5d::Zero();
            for (int s = 0; s < 3; ++s) {
                mean += lifted(track.estimates[s].mean) * c(s, d) *
                        track.weights[s];
            }
            mean /= wm;
            Matrix5d cov = Matrix5d::Zero();
            for (int s = 0; s < 3; ++s) {
                const Vector5d dx = lifted(track.estimates[s].mean) - mean;
                cov += c(s, d) * track.weights[s] *
                       (lifted_cov(track.estimates[s].covariance) +
                        dx * dx.transpose());
            }
            cov /= wm;

            const int dim = model_dim(track.models[d]);
            CHECK(merged.weights[d] == doctest::Approx(wm).epsilon(1e-12));
            CHECK((merged.estimates[d].mean.as_vector() - mean.head(dim))
                      .cwiseAbs()
                      .maxCoeff() < 1e-12);
            CHECK((merged.estimates[d].covariance -
                   cov.topLeftCorner(dim, dim))
                      .cwiseAbs()
                      .maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("ekf predict: CP adds process noise only") {
    NoiseConfig cfg;
    ModelEstimate est;
    est.mean = ModelState{ModelId::CP, 1.0, 2.0, 0.3, 0.0, 0.0};
    est.covariance = Eigen::Matrix3d::Identity() * 0.5;
    const ModelEstimate out = ekf_predict(est, 0.1, cfg);
    CHECK(out.mean.as_vector() == est.mean.as_vector());
    CHECK((out.covariance - (est.covariance + process_noise(ModelId::CP, cfg)))
              .norm() < 1e-15);
}

TEST_CASE("ekf predict: negligible noise leaves A P A^T") {
    NoiseConfig cfg;
    cfg.q_position = cfg.q_heading = cfg.q_velocity = cfg.q_turn_rate = 1e-30;
    ModelEstimate est;
    est.mean = ModelState{ModelId::CV, 0.0, 0.0, 0.5, 2.0, 0.0};
    std::mt19937_64 rng(31);
    est.covariance = testutil::random_spd(rng, 4);
    const Eigen::MatrixXd a = jacobian(est.mean, 0.2);
    const ModelEstimate out = ekf_predict(est, 0.2, cfg);
    CHECK((out.covariance - a * est.covariance * a.transpose())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("ekf predict covariance matches a finite-difference oracle") {
    std::mt19937_64 rng(37);
    NoiseConfig cfg;
    for (int rep = 0; rep < 50; ++rep) {
        ModelEstimate est;
        est.mean = ModelState{ModelId::CTRV,
                              testutil::uniform(rng, -5, 5),
                              testutil::uniform(rng, -5, 5),
                              testutil::uniform(rng, -2, 2),
                              testutil::uniform(rng, -5, 5),
                              testutil::uniform(rng, -0.5, 0.5)};
        est.covariance = testutil::random_spd(rng, 5);
        const double dt = testutil::uniform(rng, 0.05, 0.3);
        auto f = [&](const Eigen::VectorXd& d) {
            const Eigen::VectorXd x = est.mean.as_vector() + d;
            return propagate(ModelState::from_vector(ModelId::CTRV, x), dt)
                .as_vector();
        };
        const Eigen::MatrixXd a_fd = testutil::finite_difference(f, 5);
        const Eigen::MatrixXd expected =
            a_fd * est.covariance * a_fd.transpose() +
            process_noise(ModelId::CTRV, cfg);
        const ModelEstimate out = ekf_predict(est, dt, cfg);
        CHECK(testutil::relative_error(out.covariance, expected) < 1e-5);
    }
}

TEST_CASE("ekf update basics") {
    NoiseConfig cfg;
    ModelEstimate est;
    est.mean = ModelState{ModelId::CV, 1.0, 2.0, 0.3, 1.5, 0.0};
    est.covariance = Eigen::Matrix4d::Identity();

    SUBCASE("zero innovation keeps the mean") {
        const auto res =
            ekf_update(est, make_meas(0, 1.0, 2.0, 0.3, 0), cfg);
        CHECK((res.estimate.mean.as_vector() - est.mean.as_vector())
                  .cwiseAbs()
                  .maxCoeff() < 1e-14);
        CHECK(res.innovation.cwiseAbs().maxCoeff() < 1e-14);
    }

    SUBCASE("uninformative measurement keeps the prior") {
        NoiseConfig wide = cfg;
        wide.r_position = 1e12;
        wide.r_heading = 1e12;
        const auto res = ekf_update(est, make_meas(0, 5.0, -3.0, 1.0, 0), wide);
        CHECK((res.estimate.mean.as_vector() - est.mean.as_vector())
                  .cwiseAbs()
                  .maxCoeff() < 1e-6);
    }

    SUBCASE("unit prior and unit noise halve the innovation") {
        NoiseConfig unit = cfg;
        unit.r_position = 1.0;
        unit.r_heading = 1.0;
        ModelEstimate cp;
        cp.mean = ModelState{ModelId::CP, 0.0, 0.0, 0.0, 0.0, 0.0};
        cp.covariance = Eigen::Matrix3d::Identity();
        const Eigen::Vector3d z(0.4, -0.6, 0.2);
        const auto res =
            ekf_update(cp, make_meas(0, z[0], z[1], z[2], 0), unit);
        // Direct 3x3 oracle: K = I (I + I)^-1 = 0.5 I.
        CHECK((res.estimate.mean.as_vector() - 0.5 * z).cwiseAbs().maxCoeff() <
              1e-14);
        // Returned innovation is the post-update residual.
        CHECK((res.innovation - 0.5 * z).cwiseAbs().maxCoeff() < 1e-14);
        const Eigen::Matrix3d p_post = 0.5 * Eigen::Matrix3d::Identity();
        CHECK((res.innovation_covariance -
               (p_post + Eigen::Matrix3d::Identity()))
                  .cwiseAbs()
                  .maxCoeff() < 1e-14);
    }

    SUBCASE("degenerate innovation covariance throws") {
        NoiseConfig tiny = cfg;
        tiny.r_position = 1e-9;
        tiny.r_heading = 1e-9;
        ModelEstimate bad;
        bad.mean = ModelState{ModelId::CP, 0.0, 0.0, 0.0, 0.0, 0.0};
        bad.covariance = Eigen::Vector3d(1e9, 1e-9, 1e-9).asDiagonal();
        CHECK_THROWS_AS(ekf_update(bad, make_meas(0, 1, 1, 0.1, 0), tiny),
                        DegenerateUpdateError);
    }
}

TEST_CASE("weight update follows the innovation likelihoods") {
    const Eigen::Vector3d merged(1.0 / 3, 1.0 / 3, 1.0 / 3);

    SUBCASE("identical statistics keep the merged weights") {
        const Eigen::Vector3d innov(0.3, -0.2, 0.1);
        const Eigen::Matrix3d s = 2.0 * Eigen::Matrix3d::Identity();
        const Eigen::VectorXd w = update_weights(
            Eigen::Vector3d(0.5, 0.3, 0.2), {innov, innov, innov},
            {s, s, s}, 0.0);
        CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(w[1] == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(w[2] == doctest::Approx(0.2).epsilon(1e-12));
    }

    SUBCASE("smallest innovation wins") {
        const Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
        const Eigen::VectorXd w = update_weights(
            merged,
            {Eigen::Vector3d::Zero(), Eigen::Vector3d(3, 0, 0),
             Eigen::Vector3d(0, 4, 0)},
            {s, s, s}, 0.0);
        CHECK(w[0] > w[1]);
        CHECK(w[0] > w[2]);
    }

    SUBCASE("direct evaluation of the likelihood formula") {
        const Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
        const Eigen::VectorXd w = update_weights(
            merged,
            {Eigen::Vector3d::Zero(), Eigen::Vector3d(1, 0, 0),
             Eigen::Vector3d(2, 0, 0)},
            {s, s, s}, 0.0);
        const double norm = 1.0 + std::exp(-0.5) + std::exp(-2.0);
        CHECK(w[0] == doctest::Approx(1.0 / norm).epsilon(1e-12));
        CHECK(w[1] == doctest::Approx(std::exp(-0.5) / norm).epsilon(1e-12));
        CHECK(w[2] == doctest::Approx(std::exp(-2.0) / norm).epsilon(1e-12));
        CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("floor keeps starved models alive") {
        const Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
        const Eigen::VectorXd w = update_weights(
            merged,
            {Eigen::Vector3d::Zero(), Eigen::Vector3d(30, 0, 0),
             Eigen::Vector3d(30, 0, 0)},
            {s, s, s}, 1e-6);
        CHECK(w[1] >= 1e-7);
        CHECK(w[2] >= 1e-7);
        CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("total underflow falls back to the merged weights") {
        const Eigen::Matrix3d s = 1e-8 * Eigen::Matrix3d::Identity();
        const Eigen::Vector3d huge(1e6, 1e6, 1e6);
        const Eigen::VectorXd w = update_weights(
            Eigen::Vector3d(0.6, 0.3, 0.1), {huge, huge, huge}, {s, s, s},
            0.0);
        CHECK(w[0] == doctest::Approx(0.6));
        CHECK(w[1] == doctest::Approx(0.3));
        CHECK(w[2] == doctest::Approx(0.1));
    }
}

TEST_CASE("synthesis combines lifted estimates") {
    NoiseConfig cfg;
    ImmTrack track = init_track(0, make_meas(0, 2.0, 3.0, 0.5, 0), cfg);

    SUBCASE("a single active model passes through") {
        track.weights = Eigen::Vector3d(1.0, 0.0, 0.0);
        const SynthesizedState out = synthesize(track);
        CHECK((out.state.as_vector() - lifted(track.estimates[0].mean))
                  .cwiseAbs()
                  .maxCoeff() < 1e-15);
        CHECK((out.covariance - lifted_cov(track.estimates[0].covariance))
                  .cwiseAbs()
                  .maxCoeff() < 1e-15);
    }

    SUBCASE("identical means leave no spread term") {
        for (auto& est : track.estimates) {
            est.covariance =
                Eigen::MatrixXd::Identity(est.mean.dim(), est.mean.dim());
        }
        const SynthesizedState out = synthesize(track);
        Matrix5d expected = Matrix5d::Zero();
        for (int d = 0; d < 3; ++d) {
            expected += track.weights[d] *
                        lifted_cov(track.estimates[d].covariance);
        }
        CHECK((out.covariance - expected).cwiseAbs().maxCoeff() < 1e-14);
    }

    SUBCASE("direct evaluation with distinct means") {
        std::mt19937_64 rng(41);
        ImmTrack t = random_track(rng, cfg);
        t.weights = Eigen::Vector3d(0.5, 0.5, 0.0);
        const SynthesizedState out = synthesize(t);
        Vector5d mean = Vector5d::Zero();
        for (int d = 0; d < 3; ++d) {
            mean += t.weights[d] * lifted(t.estimates[d].mean);
        }
        Matrix5d cov = Matrix5d::Zero();
        for (int d = 0; d < 3; ++d) {
            const Vector5d dx = lifted(t.estimates[d].mean) - mean;
            cov += t.weights[d] * (lifted_cov(t.estimates[d].covariance) +
                                   dx * dx.transpose());
        }
        CHECK((out.state.as_vector() - mean).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((out.covariance - cov).cwiseAbs().maxCoeff() < 1e-12);
    }
}

namespace {

// Standalone single-model Kalman filter written directly against the
// textbook equations; the IMM cycle must reduce to this when only one
// model is active.
struct PlainKf {
    Eigen::VectorXd x;
    Eigen::MatrixXd p;

    void predict_cp(const NoiseConfig& cfg) {
        p = p + Eigen::MatrixXd(Eigen::Vector3d(cfg.q_position,
                                                cfg.q_position,
                                                cfg.q_heading)
                                    .asDiagonal());
    }

    void predict_cv(double dt, const NoiseConfig& cfg) {
        const double c = std::cos(x[2]);
        const double s = std::sin(x[2]);
        Eigen::Matrix4d a = Eigen::Matrix4d::Identity();
        a(0, 2) = -x[3] * s * dt;
        a(0, 3) = c * dt;
        a(1, 2) = x[3] * c * dt;
        a(1, 3) = s * dt;
        Eigen::Vector4d nx;
        nx << x[0] + x[3] * c * dt, x[1] + x[3] * s * dt, x[2], x[3];
        x = nx;
        const Eigen::Vector4d q(cfg.q_position, cfg.q_position, cfg.q_heading,
                                cfg.q_velocity);
        p = a * p * a.transpose() + Eigen::Matrix4d(q.asDiagonal());
        p = 0.5 * (p + p.transpose());
    }

    void update(const Eigen::Vector3d& z, const NoiseConfig& cfg) {
        const int d = static_cast<int>(x.size());
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, d);
        h(0, 0) = h(1, 1) = h(2, 2) = 1.0;
        const Eigen::Matrix3d r =
            Eigen::Vector3d(cfg.r_position, cfg.r_position, cfg.r_heading)
                .asDiagonal();
        const Eigen::Matrix3d s = h * p * h.transpose() + r;
        const Eigen::MatrixXd k = p * h.transpose() * s.inverse();
        Eigen::Vector3d innov = z - h * x;
        innov[2] = wrap_angle(innov[2]);
        x = x + k * innov;
        x[2] = wrap_angle(x[2]);
        p = (Eigen::MatrixXd::Identity(d, d) - k * h) * p;
        p = 0.5 * (p + p.transpose());
    }
};

}  // namespace

TEST_CASE("pinned CP weights reproduce a plain CP Kalman filter") {
    NoiseConfig cfg;
    ImmTrack track = init_track(0, make_meas(0, 1.0, 1.0, 0.2, 0), cfg);
    track.weights = Eigen::Vector3d(1.0, 0.0, 0.0);

    PlainKf kf;
    kf.x = track.estimates[0].mean.as_vector();
    kf.p = track.estimates[0].covariance;

    std::mt19937_64 rng(43);
    for (int t = 1; t <= 20; ++t) {
        const Eigen::Vector3d z(1.0 + testutil::uniform(rng, -0.3, 0.3),
                                1.0 + testutil::uniform(rng, -0.3, 0.3),
                                0.2 + testutil::uniform(rng, -0.05, 0.05));
        const ImmStepResult res =
            imm_step(track, make_meas(0, z[0], z[1], z[2], t), 0.1,
                     identity_transition(3), cfg, /*weight_floor=*/0.0);
        track = res.track;
        kf.predict_cp(cfg);
        kf.update(z, cfg);
        CHECK(track.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((track.estimates[0].mean.as_vector() - kf.x)
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
        CHECK((track.estimates[0].covariance - kf.p).cwiseAbs().maxCoeff() <
              1e-12);
        CHECK((res.output.state.as_vector().head<3>() - kf.x)
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
    }
}

TEST_CASE("single-model bank reproduces a standalone CV EKF") {
    NoiseConfig cfg;
    const std::vector<ModelId> cv_only = {ModelId::CV};
    ImmTrack track =
        init_track(0, make_meas(0, 0.0, 0.0, 0.1, 0), cfg, cv_only);

    PlainKf kf;
    kf.x = track.estimates[0].mean.as_vector();
    kf.p = track.estimates[0].covariance;

    std::mt19937_64 rng(47);
    double gx = 0.0;
    for (int t = 1; t <= 100; ++t) {
        gx += 2.0 * 0.1;
        const Eigen::Vector3d z(gx + testutil::uniform(rng, -0.5, 0.5),
                                testutil::uniform(rng, -0.5, 0.5),
                                0.1 + testutil::uniform(rng, -0.1, 0.1));
        const ImmStepResult res =
            imm_step(track, make_meas(0, z[0], z[1], z[2], t), 0.1,
                     identity_transition(1), cfg, 0.0);
        track = res.track;
        kf.predict_cv(0.1, cfg);
        kf.update(z, cfg);
        CHECK(track.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((track.estimates[0].mean.as_vector() - kf.x)
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);
        CHECK((track.estimates[0].covariance - kf.p).cwiseAbs().maxCoeff() <
              1e-12);
    }
}

TEST_CASE("imm step maintains the track invariants") {
    std::mt19937_64 rng(53);
    NoiseConfig cfg;
    const TransitionMatrix c = transition_matrix(0.02);
    for (int rep = 0; rep < 300; ++rep) {
        ImmTrack track = random_track(rng, cfg);
        const Measurement z = make_meas(
            0, track.estimates[0].mean.x + testutil::uniform(rng, -2, 2),
            track.estimates[0].mean.z + testutil::uniform(rng, -2, 2),
            wrap_angle(track.estimates[0].mean.theta +
                       testutil::uniform(rng, -0.3, 0.3)),
            1);
        const ImmStepResult res = imm_step(track, z, 0.1, c, cfg);
        CHECK(std::abs(res.track.weights.sum() - 1.0) < 1e-12);
        for (const auto& est : res.track.estimates) {
            CHECK((est.covariance - est.covariance.transpose())
                      .cwiseAbs()
                      .maxCoeff() < 1e-12);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(est.covariance);
            CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
        }
        // Spread term keeps the synthesized covariance at least as large
        // as the weighted model covariances.
        double weighted_trace = 0.0;
        for (int d = 0; d < 3; ++d) {
            weighted_trace +=
                res.track.weights[d] *
                lifted_cov(res.track.estimates[d].covariance).trace();
        }
        CHECK(res.output.covariance.trace() >= weighted_trace - 1e-10);
    }
}

TEST_CASE("model order permutation permutes the outputs") {
    NoiseConfig cfg;
    const Measurement first = make_meas(0, 1.0, 2.0, 0.3, 0);
    const std::vector<ModelId> order_a = {ModelId::CP, ModelId::CV,
                                          ModelId::CTRV};
    const std::vector<ModelId> order_b = {ModelId::CTRV, ModelId::CP,
                                          ModelId::CV};
    ImmTrack ta = init_track(0, first, cfg, order_a);
    ImmTrack tb = init_track(0, first, cfg, order_b);

    std::mt19937_64 rng(59);
    for (int t = 1; t <= 30; ++t) {
        const Measurement z = make_meas(
            0, 1.0 + 0.2 * t + testutil::uniform(rng, -0.3, 0.3),
            2.0 + testutil::uniform(rng, -0.3, 0.3),
            wrap_angle(0.3 + testutil::uniform(rng, -0.05, 0.05)), t);
        ta = imm_step(ta, z, 0.1, transition_matrix(0.02), cfg).track;
        tb = imm_step(tb, z, 0.1, transition_matrix(0.02), cfg).track;
    }
    auto weight_of = [](const ImmTrack& t, ModelId m) {
        for (int d = 0; d < t.model_count(); ++d) {
            if (t.models[d] == m) return t.weights[d];
        }
        return -1.0;
    };
    for (ModelId m : kAllModels) {
        CHECK(weight_of(ta, m) ==
              doctest::Approx(weight_of(tb, m)).epsilon(1e-10));
    }
}

TEST_CASE("zero-noise CV target converges quickly from the wide prior") {
    // Exact measurements: the filter is configured with a measurement
    // noise matching the (near-zero) sensor sigma.
    NoiseConfig cfg;
    cfg.r_position = 1e-4;
    cfg.r_heading = 2.5e-5;
    ImmTrack track = init_track(0, make_meas(0, 0.0, 0.0, 0.0, 0), cfg);
    const TransitionMatrix c = transition_matrix(0.02);
    double gx = 0.0;
    ImmStepResult res;
    for (int t = 1; t <= 10; ++t) {
        gx += 2.0 * 0.1;
        res = imm_step(track, make_meas(0, gx, 0.0, 0.0, t), 0.1, c, cfg);
        track = res.track;
    }
    CHECK(std::hypot(res.output.state.x - gx, res.output.state.z) < 0.05);
}

TEST_CASE("stationary target favors the CP model") {
    NoiseConfig cfg;
    ImmTrack track = init_track(0, make_meas(0, 4.0, -1.0, 0.7, 0), cfg);
    const TransitionMatrix c = transition_matrix(0.02);
    std::mt19937_64 rng(61);
    for (int t = 1; t <= 50; ++t) {
        const Measurement z =
            make_meas(0, 4.0 + testutil::uniform(rng, -0.5, 0.5),
                      -1.0 + testutil::uniform(rng, -0.5, 0.5),
                      wrap_angle(0.7 + testutil::uniform(rng, -0.1, 0.1)), t);
        track = imm_step(track, z, 0.1, c, cfg).track;
    }
    CHECK(track.weights[0] > track.weights[1]);
    CHECK(track.weights[0] > track.weights[2]);
}
