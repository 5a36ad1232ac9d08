#include "slammot/imm_filter.hpp"

#include "slammot/angles.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace slammot {

namespace {

using Matrix5d = Eigen::Matrix<double, 5, 5>;
using Vector5d = Eigen::Matrix<double, 5, 1>;

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

Vector5d lift_vector(const ModelState& s) { return lift(s).as_vector(); }

// Embeds a d x d covariance into the top-left block of a 5x5 zero matrix.
Matrix5d lift_covariance(const Eigen::MatrixXd& cov) {
    Matrix5d out = Matrix5d::Zero();
    out.topLeftCorner(cov.rows(), cov.cols()) = cov;
    return out;
}

}  // namespace

TransitionMatrix transition_matrix(double tau) {
    if (!(tau >= 0.0) || !(tau < 0.5)) {
        throw std::invalid_argument(
            "transition_matrix: tau must satisfy 0 <= tau < 0.5");
    }
    TransitionMatrix c = TransitionMatrix::Constant(3, 3, tau);
    c.diagonal().setConstant(1.0 - 2.0 * tau);
    return c;
}

TransitionMatrix identity_transition(int model_count) {
    return TransitionMatrix::Identity(model_count, model_count);
}

ImmTrack init_track(int id, const Measurement& first_meas,
                    const NoiseConfig& cfg, const std::vector<ModelId>& models) {
    if (models.empty()) {
        throw std::invalid_argument("init_track: empty model set");
    }
    if (!std::isfinite(first_meas.x) || !std::isfinite(first_meas.z) ||
        !std::isfinite(first_meas.theta)) {
        throw std::invalid_argument("init_track: non-finite measurement");
    }
    ImmTrack track;
    track.object_id = id;
    track.models = models;
    track.last_update = first_meas.frame;
    const int n = track.model_count();
    track.weights = Eigen::VectorXd::Constant(n, 1.0 / n);
    track.estimates.reserve(n);
    for (ModelId m : models) {
        ModelEstimate est;
        est.mean.model = m;
        est.mean.x = first_meas.x;
        est.mean.z = first_meas.z;
        est.mean.theta = wrap_angle(first_meas.theta);
        est.covariance = initial_covariance(m, cfg);
        track.estimates.push_back(std::move(est));
    }
    return track;
}

ImmTrack merge(const ImmTrack& track, const TransitionMatrix& c) {
    const int n = track.model_count();
    if (c.rows() != n || c.cols() != n) {
        throw std::invalid_argument("merge: transition matrix size mismatch");
    }

    ImmTrack out = track;
    Eigen::VectorXd merged_w(n);
    for (int d = 0; d < n; ++d) {
        double w = 0.0;
        for (int s = 0; s < n; ++s) {
            w += c(s, d) * track.weights[s];
        }
        merged_w[d] = w;
    }

    for (int d = 0; d < n; ++d) {
        const int dim = model_dim(track.models[d]);
        if (merged_w[d] < 1e-12) {
            // Nothing mixes in; keep the model's own estimate.
            out.estimates[d] = track.estimates[d];
            continue;
        }
        Vector5d mean5 = Vector5d::Zero();
        for (int s = 0; s < n; ++s) {
            const double coeff = c(s, d) * track.weights[s] / merged_w[d];
            if (coeff == 0.0) continue;
            mean5 += coeff * lift_vector(track.estimates[s].mean);
        }
        Matrix5d cov5 = Matrix5d::Zero();
        for (int s = 0; s < n; ++s) {
            const double coeff = c(s, d) * track.weights[s] / merged_w[d];
            if (coeff == 0.0) continue;
            const Vector5d dx = lift_vector(track.estimates[s].mean) - mean5;
            cov5 += coeff * (lift_covariance(track.estimates[s].covariance) +
                             dx * dx.transpose());
        }
        ModelEstimate est;
        est.mean = truncate(FullState::from_vector(mean5), track.models[d]);
        est.mean.theta = wrap_angle(est.mean.theta);
        est.covariance = symmetrized(cov5.topLeftCorner(dim, dim));
        out.estimates[d] = std::move(est);
    }
    out.weights = merged_w;
    return out;
}

ModelEstimate ekf_predict(const ModelEstimate& est, double dt,
                          const NoiseConfig& cfg) {
    const Eigen::MatrixXd a = jacobian(est.mean, dt);
    ModelEstimate out;
    out.mean = propagate(est.mean, dt);
    out.covariance = symmetrized(a * est.covariance * a.transpose() +
                                 process_noise(est.mean.model, cfg));
    return out;
}

EkfUpdateResult ekf_update(const ModelEstimate& est, const Measurement& z,
                           const NoiseConfig& cfg) {
    if (!std::isfinite(z.x) || !std::isfinite(z.z) || !std::isfinite(z.theta)) {
        throw std::invalid_argument("ekf_update: non-finite measurement");
    }
    const int d = est.mean.dim();
    // H selects (x, z, theta): the first three state components.
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, d);
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    h(2, 2) = 1.0;

    const Eigen::Matrix3d r = measurement_noise(cfg);
    const Eigen::Matrix3d s_prior =
        h * est.covariance * h.transpose() + r;

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(s_prior);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(2);
    if (!(smin > 0.0) || smax / smin > 1e12) {
        throw DegenerateUpdateError(
            "ekf_update: innovation covariance numerically singular");
    }

    Eigen::Vector3d prior_innov(z.x - est.mean.x, z.z - est.mean.z,
                                wrap_angle(z.theta - est.mean.theta));
    const Eigen::MatrixXd k =
        est.covariance * h.transpose() * s_prior.inverse();

    Eigen::VectorXd mean = est.mean.as_vector() + k * prior_innov;
    EkfUpdateResult out;
    out.estimate.mean = ModelState::from_vector(est.mean.model, mean);
    out.estimate.mean.theta = wrap_angle(out.estimate.mean.theta);
    out.estimate.covariance = symmetrized(
        (Eigen::MatrixXd::Identity(d, d) - k * h) * est.covariance);

    // Weight-update statistics, evaluated at the posterior.
    out.innovation =
        Eigen::Vector3d(z.x - out.estimate.mean.x, z.z - out.estimate.mean.z,
                        wrap_angle(z.theta - out.estimate.mean.theta));
    out.innovation_covariance =
        h * out.estimate.covariance * h.transpose() + r;
    return out;
}

Eigen::VectorXd update_weights(const Eigen::VectorXd& merged_weights,
                               const std::vector<Eigen::Vector3d>& innovations,
                               const std::vector<Eigen::Matrix3d>& s_matrices,
                               double weight_floor) {
    const int n = static_cast<int>(merged_weights.size());
    if (static_cast<int>(innovations.size()) != n ||
        static_cast<int>(s_matrices.size()) != n) {
        throw std::invalid_argument("update_weights: size mismatch");
    }
    Eigen::VectorXd raw(n);
    for (int d = 0; d < n; ++d) {
        const Eigen::Matrix3d& s = s_matrices[d];
        const double det = s.determinant();
        if (!(det > 0.0)) {
            throw std::invalid_argument(
                "update_weights: S matrix not positive definite");
        }
        const double maha = innovations[d].dot(s.inverse() * innovations[d]);
        raw[d] = merged_weights[d] / std::sqrt(det) * std::exp(-0.5 * maha);
    }
    const double total = raw.sum();
    if (!(total > 0.0) || !std::isfinite(total)) {
        // Every numerator underflowed; keep the merged weights.
        raw = merged_weights;
    } else {
        raw /= total;
    }
    if (weight_floor > 0.0) {
        for (int d = 0; d < n; ++d) {
            if (raw[d] < weight_floor) raw[d] = weight_floor;
        }
        raw /= raw.sum();
    }
    return raw;
}

SynthesizedState synthesize(const ImmTrack& track) {
    const int n = track.model_count();
    Vector5d mean = Vector5d::Zero();
    for (int d = 0; d < n; ++d) {
        mean += track.weights[d] * lift_vector(track.estimates[d].mean);
    }
    Matrix5d cov = Matrix5d::Zero();
    for (int d = 0; d < n; ++d) {
        const Vector5d dx = lift_vector(track.estimates[d].mean) - mean;
        cov += track.weights[d] *
               (lift_covariance(track.estimates[d].covariance) +
                dx * dx.transpose());
    }
    SynthesizedState out;
    out.state = FullState::from_vector(mean);
    out.state.theta = wrap_angle(out.state.theta);
    out.covariance = 0.5 * (cov + cov.transpose());
    return out;
}

ImmStepResult imm_step(const ImmTrack& track, const Measurement& z, double dt,
                       const TransitionMatrix& c, const NoiseConfig& cfg,
                       double weight_floor) {
    if (z.object_id != track.object_id) {
        throw std::invalid_argument("imm_step: measurement for another object");
    }
    ImmTrack merged = merge(track, c);

    std::vector<Eigen::Vector3d> innovations;
    std::vector<Eigen::Matrix3d> s_matrices;
    innovations.reserve(merged.model_count());
    s_matrices.reserve(merged.model_count());

    ImmTrack updated = merged;
    for (int d = 0; d < merged.model_count(); ++d) {
        const ModelEstimate predicted =
            ekf_predict(merged.estimates[d], dt, cfg);
        EkfUpdateResult res = ekf_update(predicted, z, cfg);
        updated.estimates[d] = std::move(res.estimate);
        innovations.push_back(res.innovation);
        s_matrices.push_back(res.innovation_covariance);
    }
    updated.weights =
        update_weights(merged.weights, innovations, s_matrices, weight_floor);
    updated.last_update = z.frame;

    ImmStepResult out;
    out.output = synthesize(updated);
    out.track = std::move(updated);
    return out;
}

ImmStepResult imm_predict_only(const ImmTrack& track, double dt,
                               const TransitionMatrix& c,
                               const NoiseConfig& cfg) {
    ImmTrack merged = merge(track, c);
    for (int d = 0; d < merged.model_count(); ++d) {
        merged.estimates[d] = ekf_predict(merged.estimates[d], dt, cfg);
    }
    ImmStepResult out;
    out.output = synthesize(merged);
    out.track = std::move(merged);
    return out;
}

}  // namespace slammot
