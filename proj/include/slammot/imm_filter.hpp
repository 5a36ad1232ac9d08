#pragma once

// Interacting multiple model estimator. One ImmTrack holds a bank of
// model-conditioned EKF estimates plus their weights; imm_step runs the
// four-step recursion (merge, per-model EKF, weight update, synthesis).
// The bank normally carries {CP, CV, CTRV} but any non-empty subset is
// supported; with {CV} alone the cycle reduces to a plain CV EKF.

#include "slammot/motion_models.hpp"

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

namespace slammot {

struct DegenerateUpdateError : std::runtime_error {
    explicit DegenerateUpdateError(const std::string& what)
        : std::runtime_error(what) {}
};

struct ModelEstimate {
    ModelState mean;
    Eigen::MatrixXd covariance;  // dim() x dim(), symmetric PSD
};

struct ImmTrack {
    int object_id = -1;
    std::vector<ModelId> models;
    std::vector<ModelEstimate> estimates;  // aligned with models
    Eigen::VectorXd weights;               // aligned, sums to 1
    int last_update = -1;                  // frame index of last measurement

    int model_count() const { return static_cast<int>(models.size()); }
};

// Row-stochastic model transition matrix C^{cd}.
using TransitionMatrix = Eigen::MatrixXd;

struct Measurement {
    int object_id = -1;
    double x = 0.0;
    double z = 0.0;
    double theta = 0.0;
    int frame = 0;
};

inline constexpr double kDefaultWeightFloor = 1e-6;

// 3x3 matrix with diagonal 1-2*tau and off-diagonal tau. Requires
// 0 <= tau < 0.5.
TransitionMatrix transition_matrix(double tau);

// Identity-mixing matrix for an arbitrary bank size (used by tests and
// by single-model banks, where it is just [1]).
TransitionMatrix identity_transition(int model_count);

// Fresh track: weights 1/N, all means seeded from the measurement with
// zero velocity components, covariances from the configured large diagonal.
ImmTrack init_track(int id, const Measurement& first_meas,
                    const NoiseConfig& cfg,
                    const std::vector<ModelId>& models = {kAllModels.begin(),
                                                          kAllModels.end()});

// Multi-model merging. Cross-dimension mixing lifts states and
// covariances to 5 dimensions (zero fill), mixes, then truncates back to
// each destination model. Merged weights below 1e-12 fall back to the
// destination model's own estimate instead of dividing by ~0.
ImmTrack merge(const ImmTrack& track, const TransitionMatrix& c);

// EKF prediction: mean through propagate, covariance A P A^T + Q,
// symmetrized.
ModelEstimate ekf_predict(const ModelEstimate& est, double dt,
                          const NoiseConfig& cfg);

struct EkfUpdateResult {
    ModelEstimate estimate;
    // Post-update residual z - H x_hat (theta wrapped) and its covariance
    // H P_hat H^T + R; these feed the model weight update.
    Eigen::Vector3d innovation;
    Eigen::Matrix3d innovation_covariance;
};

// EKF measurement update with H selecting (x, z, theta). Throws
// DegenerateUpdateError when the gain's innovation covariance is
// numerically singular (condition number > 1e12).
EkfUpdateResult ekf_update(const ModelEstimate& est, const Measurement& z,
                           const NoiseConfig& cfg);

// Model weight update: w^d ~ (w_merged^d / sqrt(det S^d)) *
// exp(-0.5 innov^T (S^d)^-1 innov), normalized, floored. If every raw
// weight underflows to zero the merged weights are returned unchanged.
Eigen::VectorXd update_weights(const Eigen::VectorXd& merged_weights,
                               const std::vector<Eigen::Vector3d>& innovations,
                               const std::vector<Eigen::Matrix3d>& s_matrices,
                               double weight_floor = kDefaultWeightFloor);

struct SynthesizedState {
    FullState state;
    Eigen::Matrix<double, 5, 5> covariance;
};

// Weighted combination of the lifted model estimates, covariance with the
// cross-model spread term.
SynthesizedState synthesize(const ImmTrack& track);

struct ImmStepResult {
    ImmTrack track;
    SynthesizedState output;
};

// One full recursion: merge -> per-model predict -> per-model update ->
// weight update -> synthesis.
ImmStepResult imm_step(const ImmTrack& track, const Measurement& z, double dt,
                       const TransitionMatrix& c, const NoiseConfig& cfg,
                       double weight_floor = kDefaultWeightFloor);

// Coasting step for a frame without a measurement: merge and predict
// only; weights become the merged weights.
ImmStepResult imm_predict_only(const ImmTrack& track, double dt,
                               const TransitionMatrix& c,
                               const NoiseConfig& cfg);

}  // namespace slammot
