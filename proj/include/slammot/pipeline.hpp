#pragma once

// End-to-end processing at the four methodology levels.
//   L0: pose/point bundle adjustment only; dynamic surface points are
//       treated as static landmarks (nothing filters them out).
//   L1: dynamic points removed from SLAM; objects tracked independently
//       by a per-object CV EKF on pose-transformed measurements.
//   L2: coupled sliding-window optimization with CV-only object vertices.
//   L3: full IMM bank per object, IMM-weighted graph, feedback of the
//       optimized states into the subsequent filter cycles.

#include "slammot/graph.hpp"
#include "slammot/imm_filter.hpp"
#include "slammot/metrics.hpp"
#include "slammot/simulator.hpp"

#include <array>
#include <map>
#include <optional>
#include <vector>

namespace slammot {

enum class LevelId { L0 = 0, L1 = 1, L2 = 2, L3 = 3 };

constexpr const char* level_name(LevelId level) {
    switch (level) {
        case LevelId::L0:
            return "L0";
        case LevelId::L1:
            return "L1";
        case LevelId::L2:
            return "L2";
        case LevelId::L3:
            return "L3";
    }
    return "?";
}

std::optional<LevelId> level_from_name(const std::string& name);

struct PipelineConfig {
    int window = 10;
    int stride = 1;       // frames between window solves
    int coast_limit = 2;  // unmeasured frames tolerated before dropping
    double tau = 0.02;
    double weight_floor = kDefaultWeightFloor;
    bool identity_transition = false;
    // Overrides the 1/N init weights right after track creation.
    std::optional<std::array<double, 3>> initial_weights;
    NoiseConfig noise;
    InfoWeights info;
    SolverConfig solver;
    CameraIntrinsics intrinsics;
    double dt = 0.1;
};

struct ObjectLogEntry {
    int frame = -1;
    FullState state;
    std::vector<ModelId> models;
    Eigen::VectorXd weights;
};

struct EstimateLog {
    // Final (end-of-run) pose estimates, one per input frame.
    std::vector<Se3Pose> ego;
    // Online per-frame object estimates, only for frames where the object
    // was measured or coasted.
    std::map<int, std::vector<ObjectLogEntry>> objects;
    std::vector<double> frame_time_ms;
    std::vector<int> window_iterations;  // accepted LM steps per solve
    int dropped_cheirality = 0;
};

// Pipeline configuration wired to a scenario: frame interval, intrinsics,
// and the noise-dependent terms. Measurement noise R and the data-scaled
// information weights follow the scenario sigmas (floored so zero-noise
// scenarios stay finite); at the default sigmas they equal the stock
// NoiseConfig / InfoWeights values.
PipelineConfig pipeline_config_for(const ScenarioConfig& scenario);

EstimateLog run_level(LevelId level,
                      const std::vector<FrameMeasurements>& meas,
                      const PipelineConfig& cfg);

inline EstimateLog run_level0(const std::vector<FrameMeasurements>& m,
                              const PipelineConfig& c) {
    return run_level(LevelId::L0, m, c);
}
inline EstimateLog run_level1(const std::vector<FrameMeasurements>& m,
                              const PipelineConfig& c) {
    return run_level(LevelId::L1, m, c);
}
inline EstimateLog run_level2(const std::vector<FrameMeasurements>& m,
                              const PipelineConfig& c) {
    return run_level(LevelId::L2, m, c);
}
inline EstimateLog run_level3(const std::vector<FrameMeasurements>& m,
                              const PipelineConfig& c) {
    return run_level(LevelId::L3, m, c);
}

// Flattened object positions for MOTP.
std::vector<TrackPoint> estimate_track_points(const EstimateLog& log);
std::vector<TrackPoint> truth_track_points(const GroundTruth& truth);

}  // namespace slammot
