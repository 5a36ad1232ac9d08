#pragma once

// Deterministic synthetic world: scripted ego trajectory, static
// landmarks, and moving objects that switch motion patterns mid-sequence.
// Produces the noisy per-frame measurements the pipelines consume: pixel
// observations of landmarks (and of points attached to moving objects),
// SE(3) odometry increments, and camera-frame object detections.

#include "slammot/camera.hpp"
#include "slammot/motion_models.hpp"
#include "slammot/se3.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace slammot {

struct EgoSegment {
    int frames = 0;
    double speed = 0.0;      // m/s along the heading
    double turn_rate = 0.0;  // rad/s
};

struct ObjectSegment {
    ModelId model = ModelId::CP;
    double v = 0.0;
    double omega = 0.0;
    int frames = 0;
};

struct ObjectScript {
    int id = 0;
    double x0 = 0.0;
    double z0 = 0.0;
    double theta0 = 0.0;
    double y = 0.0;  // constant height of the object reference point
    int first_frame = 0;
    std::vector<ObjectSegment> segments;
};

struct NoiseLevels {
    double pixel = 1.0;                // px
    double object_position = 0.5;      // m per camera-frame axis
    double object_heading = 0.1;       // rad
    double odometry_rotation = 0.002;  // rad per increment axis
    double odometry_translation = 0.02;  // m per increment axis

    bool valid() const {
        return pixel >= 0 && object_position >= 0 && object_heading >= 0 &&
               odometry_rotation >= 0 && odometry_translation >= 0;
    }
};

struct LandmarkBounds {
    double x_min = 0.0, x_max = 100.0;
    double y_min = -4.0, y_max = 4.0;
    double z_min = -25.0, z_max = 25.0;
};

struct ScenarioConfig {
    std::string name = "custom";
    int frames = 0;
    double dt = 0.1;
    CameraIntrinsics intrinsics;
    int image_width = 640;
    int image_height = 480;

    double ego_x0 = 0.0;
    double ego_z0 = 0.0;
    double ego_heading0 = 0.0;
    std::vector<EgoSegment> ego_segments;

    int landmark_count = 0;
    LandmarkBounds landmark_bounds;

    std::vector<ObjectScript> objects;
    int object_points = 3;  // trackable points attached to each object

    NoiseLevels noise;
    bool heavy_tail = false;  // 5% of object measurements get 5-sigma noise
    std::uint64_t seed = 1;

    // Frame range highlighting the scripted motion-pattern transition.
    int segment_start = 0;
    int segment_end = 0;
};

struct ObjectTruthFrame {
    bool active = false;
    FullState state;
    ModelId model = ModelId::CP;  // model governing the step out of this frame
};

struct GroundTruth {
    std::vector<Se3Pose> ego;          // world-from-camera per frame
    std::vector<double> ego_heading;   // phi_t
    std::vector<Eigen::Vector3d> landmarks;
    std::map<int, std::vector<ObjectTruthFrame>> objects;
    std::map<int, double> object_y;  // constant height per object
    // Per object: fixed body-frame offsets of its trackable points.
    std::map<int, std::vector<Eigen::Vector3d>> object_point_offsets;
};

struct PixelObservation {
    int id = -1;  // landmark id, or object-point id >= landmark_count
    Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
    bool dynamic = false;  // attached to a moving object
};

struct ObjectObservation {
    int id = -1;
    Eigen::Vector3d position_cam = Eigen::Vector3d::Zero();
    double theta_cam = 0.0;
};

struct FrameMeasurements {
    int frame = -1;
    std::vector<PixelObservation> pixels;
    // Frame 0 carries the absolute starting pose (noise free anchor);
    // later frames carry the noisy increment from the previous frame.
    bool odometry_absolute = false;
    Se3Pose odometry;
    std::vector<ObjectObservation> objects;
};

// Validates the scenario; throws std::invalid_argument naming the
// offending field.
void validate_scenario(const ScenarioConfig& cfg);

// Deterministic ground truth for the scenario (landmarks and object point
// offsets drawn from cfg.seed).
GroundTruth generate_scenario(const ScenarioConfig& cfg);

// Noisy measurements for one frame, consuming the given noise stream.
FrameMeasurements observe_frame(const GroundTruth& truth, int t,
                                const ScenarioConfig& cfg,
                                std::mt19937_64& noise_stream);

// All frames with a stream derived from cfg.seed.
std::vector<FrameMeasurements> observe_all(const GroundTruth& truth,
                                           const ScenarioConfig& cfg);

// All frames with an explicit noise-stream seed (Monte Carlo trials keep
// the world fixed and redraw only the measurement noise).
std::vector<FrameMeasurements> observe_all_seeded(const GroundTruth& truth,
                                                  const ScenarioConfig& cfg,
                                                  std::uint64_t stream_seed);

// World position of one object surface point at frame t.
Eigen::Vector3d object_point_position(const GroundTruth& truth, int object_id,
                                      int point_index, int t);

// Built-in scenario archetypes: mostly-static, oncoming, mixed, highway,
// transition, and the zero-noise diagnostic.
std::vector<ScenarioConfig> builtin_scenarios();

// Lookup by name; std::nullopt when the name is unknown.
std::optional<ScenarioConfig> builtin_scenario(const std::string& name);

}  // namespace slammot
