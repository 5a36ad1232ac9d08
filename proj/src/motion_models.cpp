#include "slammot/motion_models.hpp"

#include "slammot/angles.hpp"

#include <cmath>
#include <stdexcept>

namespace slammot {

namespace {

bool state_finite(const ModelState& s) {
    return std::isfinite(s.x) && std::isfinite(s.z) && std::isfinite(s.theta) &&
           std::isfinite(s.v) && std::isfinite(s.omega);
}

}  // namespace

Eigen::VectorXd ModelState::as_vector() const {
    Eigen::VectorXd out(dim());
    out[0] = x;
    out[1] = z;
    out[2] = theta;
    if (dim() > 3) out[3] = v;
    if (dim() > 4) out[4] = omega;
    return out;
}

ModelState ModelState::from_vector(ModelId model, const Eigen::VectorXd& v) {
    if (v.size() != model_dim(model)) {
        throw std::invalid_argument("ModelState::from_vector: wrong dimension");
    }
    ModelState s;
    s.model = model;
    s.x = v[0];
    s.z = v[1];
    s.theta = v[2];
    if (v.size() > 3) s.v = v[3];
    if (v.size() > 4) s.omega = v[4];
    return s;
}

ModelState propagate(const ModelState& state, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("propagate: dt must be finite and > 0");
    }
    if (!state_finite(state)) {
        throw std::invalid_argument("propagate: non-finite state");
    }
    ModelState out = state;
    switch (state.model) {
        case ModelId::CP:
            break;
        case ModelId::CV:
            out.x = state.x + state.v * std::cos(state.theta) * dt;
            out.z = state.z + state.v * std::sin(state.theta) * dt;
            break;
        case ModelId::CTRV: {
            const double alpha = state.theta + 0.5 * state.omega * dt;
            out.x = state.x + state.v * std::cos(alpha) * dt;
            out.z = state.z + state.v * std::sin(alpha) * dt;
            out.theta = state.theta + state.omega * dt;
            break;
        }
    }
    out.theta = wrap_angle(out.theta);
    return out;
}

Eigen::MatrixXd jacobian(const ModelState& state, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("jacobian: dt must be finite and > 0");
    }
    if (!state_finite(state)) {
        throw std::invalid_argument("jacobian: non-finite state");
    }
    const int d = state.dim();
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(d, d);
    switch (state.model) {
        case ModelId::CP:
            break;
        case ModelId::CV: {
            const double c = std::cos(state.theta);
            const double s = std::sin(state.theta);
            A(0, 2) = -state.v * s * dt;
            A(0, 3) = c * dt;
            A(1, 2) = state.v * c * dt;
            A(1, 3) = s * dt;
            break;
        }
        case ModelId::CTRV: {
            const double alpha = state.theta + 0.5 * state.omega * dt;
            const double c = std::cos(alpha);
            const double s = std::sin(alpha);
            A(0, 2) = -state.v * s * dt;
            A(0, 3) = c * dt;
            A(0, 4) = -state.v * s * dt * dt * 0.5;
            A(1, 2) = state.v * c * dt;
            A(1, 3) = s * dt;
            A(1, 4) = state.v * c * dt * dt * 0.5;
            A(2, 4) = dt;
            break;
        }
    }
    return A;
}

FullState lift(const ModelState& state) {
    FullState f;
    f.x = state.x;
    f.z = state.z;
    f.theta = state.theta;
    if (state.dim() > 3) f.v = state.v;
    if (state.dim() > 4) f.omega = state.omega;
    return f;
}

ModelState truncate(const FullState& full, ModelId model) {
    ModelState s;
    s.model = model;
    s.x = full.x;
    s.z = full.z;
    s.theta = full.theta;
    if (model_dim(model) > 3) s.v = full.v;
    if (model_dim(model) > 4) s.omega = full.omega;
    return s;
}

Eigen::MatrixXd process_noise(ModelId model, const NoiseConfig& cfg) {
    const int d = model_dim(model);
    Eigen::VectorXd diag(d);
    diag[0] = cfg.q_position;
    diag[1] = cfg.q_position;
    diag[2] = cfg.q_heading;
    if (d > 3) diag[3] = cfg.q_velocity;
    if (d > 4) diag[4] = cfg.q_turn_rate;
    return diag.asDiagonal();
}

Eigen::Matrix3d measurement_noise(const NoiseConfig& cfg) {
    return Eigen::Vector3d(cfg.r_position, cfg.r_position, cfg.r_heading)
        .asDiagonal();
}

Eigen::MatrixXd initial_covariance(ModelId model, const NoiseConfig& cfg) {
    const int d = model_dim(model);
    Eigen::VectorXd diag(d);
    diag[0] = cfg.init_position_var;
    diag[1] = cfg.init_position_var;
    diag[2] = cfg.init_heading_var;
    if (d > 3) diag[3] = cfg.init_velocity_var;
    if (d > 4) diag[4] = cfg.init_turn_rate_var;
    return diag.asDiagonal();
}

}  // namespace slammot
