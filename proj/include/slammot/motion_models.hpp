#pragma once

// Planar object motion models: constant position (CP), constant velocity
// (CV) and constant turn rate and velocity (CTRV). Motion lives in the
// x-z plane of the visual coordinate convention (right-handed, y down);
// theta is the heading measured from +x toward +z, omega its rate.

#include <Eigen/Core>

#include <array>
#include <cstdint>

namespace slammot {

enum class ModelId : std::uint8_t { CP = 0, CV = 1, CTRV = 2 };

inline constexpr std::array<ModelId, 3> kAllModels = {ModelId::CP, ModelId::CV,
                                                      ModelId::CTRV};

constexpr int model_dim(ModelId m) {
    switch (m) {
        case ModelId::CP:
            return 3;
        case ModelId::CV:
            return 4;
        case ModelId::CTRV:
            return 5;
    }
    return 0;
}

constexpr const char* model_name(ModelId m) {
    switch (m) {
        case ModelId::CP:
            return "CP";
        case ModelId::CV:
            return "CV";
        case ModelId::CTRV:
            return "CTRV";
    }
    return "?";
}

// State of one motion model. Unused components (v for CP, omega for
// CP/CV) are kept at zero so that lift/truncate are trivial.
struct ModelState {
    ModelId model = ModelId::CP;
    double x = 0.0;
    double z = 0.0;
    double theta = 0.0;
    double v = 0.0;
    double omega = 0.0;

    int dim() const { return model_dim(model); }

    Eigen::VectorXd as_vector() const;
    static ModelState from_vector(ModelId model, const Eigen::VectorXd& v);
};

// Common 5-dimensional state [x, z, theta, v, omega]; components a model
// does not carry are zero.
struct FullState {
    double x = 0.0;
    double z = 0.0;
    double theta = 0.0;
    double v = 0.0;
    double omega = 0.0;

    Eigen::Matrix<double, 5, 1> as_vector() const {
        return {x, z, theta, v, omega};
    }
    static FullState from_vector(const Eigen::Matrix<double, 5, 1>& v) {
        return {v[0], v[1], v[2], v[3], v[4]};
    }
};

// Diagonal process noise Q^d per state component, measurement noise R for
// the (x, z, theta) observation, and the large diagonal used to seed
// fresh track covariances. All entries are variances and must be > 0.
struct NoiseConfig {
    double q_position = 0.01;      // m^2
    double q_heading = 0.0025;     // rad^2
    double q_velocity = 0.04;      // (m/s)^2
    double q_turn_rate = 0.01;     // (rad/s)^2
    double r_position = 0.25;      // m^2
    double r_heading = 0.01;       // rad^2
    double init_position_var = 1e4;
    double init_heading_var = 1e2;
    double init_velocity_var = 1e2;
    double init_turn_rate_var = 1e2;

    bool valid() const {
        return q_position > 0 && q_heading > 0 && q_velocity > 0 &&
               q_turn_rate > 0 && r_position > 0 && r_heading > 0 &&
               init_position_var > 0 && init_heading_var > 0 &&
               init_velocity_var > 0 && init_turn_rate_var > 0;
    }
};

// Discrete-time transition g^d over an interval dt. Heading of the
// result is wrapped to (-pi, pi]. Throws std::invalid_argument for
// non-finite input or dt <= 0.
ModelState propagate(const ModelState& state, double dt);

// First-order linearization A^d = dg^d/dx at the given state (d x d).
Eigen::MatrixXd jacobian(const ModelState& state, double dt);

// Zero-fills the components the model does not carry.
FullState lift(const ModelState& state);

// Inverse of lift: keeps the first model_dim(model) components.
ModelState truncate(const FullState& full, ModelId model);

// Diagonal process noise matrix for the model (d x d).
Eigen::MatrixXd process_noise(ModelId model, const NoiseConfig& cfg);

// Diagonal measurement noise for the (x, z, theta) observation.
Eigen::Matrix3d measurement_noise(const NoiseConfig& cfg);

// Diagonal with the configured initial ("large") variances, truncated to
// the model dimension.
Eigen::MatrixXd initial_covariance(ModelId model, const NoiseConfig& cfg);

}  // namespace slammot
