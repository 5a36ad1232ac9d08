#pragma once

// Sliding-window factor graph coupling ego poses, static map points and
// per-model object states. Residual kinds: map-point reprojection, ego
// odometry, object measurement, object system (motion consistency) and
// constant-motion. Object edges carry the IMM model weight of their
// (object, frame); the Level-2 construction keeps CV only with unit
// weights. Solved by Levenberg-Marquardt on the weighted least-squares
// objective.

#include "slammot/camera.hpp"
#include "slammot/motion_models.hpp"
#include "slammot/se3.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace slammot {

struct CheiralityError : std::runtime_error {
    explicit CheiralityError(const std::string& what)
        : std::runtime_error(what) {}
};

struct SingularSystemError : std::runtime_error {
    SingularSystemError(const std::string& what, int iteration_index)
        : std::runtime_error(what), iteration(iteration_index) {}
    int iteration;
};

// ---------------------------------------------------------------------------
// Residual functions. Poses are world-from-camera throughout.

// u - pi(T^-1 m). Throws CheiralityError when the transformed point has
// depth <= 0.
Eigen::Vector2d residual_reprojection(const Se3Pose& pose,
                                      const Eigen::Vector3d& point,
                                      const Eigen::Vector2d& pixel,
                                      const CameraIntrinsics& k);

// log((T_rel * T_a)^-1 * T_b), rotation part first. Zero iff
// T_b == T_rel * T_a.
Vector6d residual_odometry(const Se3Pose& pose_a, const Se3Pose& pose_b,
                           const Se3Pose& rel);

// Object pose state in the graph: position (world) plus heading.
struct ObjectPoseState {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();  // x, y, z (world)
    double theta = 0.0;
};

// [(T^-1 p); theta - phi] - meas, with the angle component wrapped.
// meas is the camera-frame measurement (x, y, z, theta_cam); phi is the
// ego heading extracted from the pose.
Eigen::Vector4d residual_object_measurement(const Se3Pose& pose,
                                            const ObjectPoseState& obj,
                                            const Eigen::Vector4d& meas);

// o_{t+1} - g_s(s_t): position/heading consistency under the model, with
// y held constant and the angle component wrapped.
Eigen::Vector4d residual_object_system(const ObjectPoseState& obj_t,
                                       const Eigen::VectorXd& velocity_t,
                                       ModelId model,
                                       const ObjectPoseState& obj_t1,
                                       double dt);

// v_{t+1} - v_t for CV (1-dim) and CTRV (2-dim). Throws
// std::invalid_argument for CP.
Eigen::VectorXd residual_constant_motion(const Eigen::VectorXd& vel_t,
                                         const Eigen::VectorXd& vel_t1,
                                         ModelId model);

// ---------------------------------------------------------------------------
// Graph structure.

struct MapPoint {
    int id = -1;
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    std::vector<std::pair<int, Eigen::Vector2d>> observations;  // frame, pixel
};

// Per-vertex object state: pose block (x, y, z, theta) plus the model's
// velocity block (none / v / v, omega).
struct ObjectVertex {
    int object_id = -1;
    int frame = -1;
    ModelId model = ModelId::CP;
    ObjectPoseState pose_state;
    Eigen::VectorXd velocity_state;  // dim 0, 1 or 2

    int dof() const { return 4 + static_cast<int>(velocity_state.size()); }
};

// Information weights per residual kind; entries are 1/variance in the
// residual's own units.
struct InfoWeights {
    double reprojection = 1.0;           // px^-2
    double odometry_rotation = 100.0;    // rad^-2
    double odometry_translation = 25.0;  // m^-2
    double object_position = 4.0;        // m^-2 (1 / 0.25)
    double object_heading = 100.0;       // rad^-2 (1 / 0.01)
    double system_position = 100.0;      // 1 / q_position
    double system_heading = 400.0;       // 1 / q_heading
    double cst_velocity = 25.0;          // 1 / q_velocity
    double cst_turn_rate = 100.0;        // 1 / q_turn_rate
    // Optional Huber kernel in whitened units; <= 0 disables it.
    double huber_delta = 0.0;
};

struct ReprojectionEdge {
    int pose = -1;   // index into poses
    int point = -1;  // index into points
    Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
};

struct OdometryEdge {
    int pose_a = -1;
    int pose_b = -1;
    Se3Pose rel;
};

struct ObjectMeasurementEdge {
    int pose = -1;
    int object = -1;  // index into objects
    Eigen::Vector4d meas = Eigen::Vector4d::Zero();
    double model_weight = 1.0;
};

struct ObjectSystemEdge {
    int object_a = -1;
    int object_b = -1;
    double dt = 0.1;
    double model_weight = 1.0;
};

struct ConstantMotionEdge {
    int object_a = -1;
    int object_b = -1;
    double model_weight = 1.0;
};

struct PoseVertex {
    int frame = -1;
    Se3Pose value;
    bool fixed = false;
};

struct SlammotGraph {
    std::vector<PoseVertex> poses;
    std::vector<MapPoint> points;  // position doubles as the vertex value
    std::vector<ObjectVertex> objects;

    std::vector<ReprojectionEdge> reprojection_edges;
    std::vector<OdometryEdge> odometry_edges;
    std::vector<ObjectMeasurementEdge> measurement_edges;
    std::vector<ObjectSystemEdge> system_edges;
    std::vector<ConstantMotionEdge> constant_motion_edges;

    InfoWeights info;
    CameraIntrinsics intrinsics;
    int dropped_cheirality = 0;

    // Plain-text dump, one vertex or edge per line.
    void dump(std::ostream& os) const;
};

// Throws std::invalid_argument when an edge references a missing vertex
// or the per-(object, frame) model weights do not sum to 1 within 1e-9.
void validate(const SlammotGraph& graph);

// ---------------------------------------------------------------------------
// Window construction.

struct WindowFrame {
    int frame = -1;
    Se3Pose pose_estimate;
    bool has_odometry = false;  // increment from the previous window frame
    Se3Pose odometry;
};

struct ObjectFrameEntry {
    int frame = -1;
    bool has_measurement = false;
    Eigen::Vector4d measurement = Eigen::Vector4d::Zero();  // camera frame
    // One entry per model in the bank order; weights aligned.
    std::vector<ModelState> model_means;
    Eigen::VectorXd weights;
    double y = 0.0;  // world-frame height carried outside the filter
};

struct TrackWindow {
    int object_id = -1;
    std::vector<ModelId> models;
    std::vector<ObjectFrameEntry> frames;  // consecutive frames
};

struct WindowInput {
    std::vector<WindowFrame> frames;
    std::vector<MapPoint> points;  // observations restricted to the window
    std::vector<TrackWindow> tracks;
    CameraIntrinsics intrinsics;
    double dt = 0.1;
};

enum class GraphMode {
    Level3,  // all models, IMM-weighted object edges
    Level2,  // CV only, unit weights
};

// Builds the window graph: a pose vertex per frame (oldest fixed), map
// point vertices for points observed at least twice, object vertices per
// (object, frame, model) joined by system/constant-motion edges and
// weighted measurement edges. Reprojection edges whose initial depth is
// non-positive are dropped and counted.
SlammotGraph build_window(const WindowInput& input, GraphMode mode,
                          const InfoWeights& info);

// Weighted squared-residual objective over the whole graph.
double total_cost(const SlammotGraph& graph);

struct SolverConfig {
    int max_iterations = 20;
    double initial_lambda = 1e-4;
    double lambda_factor = 10.0;
    double relative_decrease_tol = 1e-9;
    double cost_tolerance = 1e-16;  // absolute: below this is converged
    double max_lambda = 1e12;
    double min_depth = 1e-6;
};

struct OptimizeReport {
    int iterations = 0;  // accepted LM steps
    double initial_cost = 0.0;
    double final_cost = 0.0;
};

// Levenberg-Marquardt over all non-fixed vertices. Pose updates are
// left-multiplicative exponential steps; object headings are re-wrapped.
// Throws SingularSystemError if the damped normal equations cannot be
// factorized.
OptimizeReport optimize(SlammotGraph& graph, const SolverConfig& solver);

// Gradient of total_cost with respect to the stacked local coordinates of
// all free vertices (pose blocks first, then points, then objects, in
// storage order). Exposed for derivative checks.
Eigen::VectorXd cost_gradient(const SlammotGraph& graph);

}  // namespace slammot
