#pragma once

// File formats: JSON scenario configs, CSV data files, and the ingest
// adapter for externally produced detections/odometry. Every CSV has a
// header row; schemas are fixed and validated by check_schema. No
// timestamps are written anywhere: identical inputs give identical bytes.
//
//   measurements.csv  frame,kind{pixel|odo|obj},id,v1..v12
//     pixel: v1=u v2=v v3=dynamic_flag
//     odo:   v1..v12 = 3x4 row-major [R|t]; the frame-0 row is the
//            absolute starting pose, later rows are increments
//     obj:   v1..v4 = camera-frame x,y,z,theta
//   ground_truth.csv  frame,kind{ego|lm|obj},id,v1..v12
//     ego: v1..v12 = 3x4 pose   lm (frame -1): v1..v3 = position
//     obj: v1..v6 = x,y,z,theta,v,omega  v7 = model id  (active frames)
//   estimates.csv     frame,kind{ego|obj},id,v1..v13
//     ego: v1..v12 = 3x4 pose, v13 = frame time ms
//     obj: v1..v6 = x,y,z,theta,v,omega  v7..v9 = wCP,wCV,wCTRV
//   metrics.csv       level,scenario,trial,segment,metric,value
//   comparison.csv    level,scenario,segment,metric,mean,stddev,median,count
//   detections.csv    frame,track_id,x,y,z,theta,score
//   odometry.csv      frame,r11,r12,r13,r21,r22,r23,r31,r32,r33,t1,t2,t3

#include "slammot/metrics.hpp"
#include "slammot/pipeline.hpp"
#include "slammot/simulator.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace slammot {

// --- JSON scenario configs -------------------------------------------------

std::string scenario_to_json(const ScenarioConfig& cfg);
// Throws std::invalid_argument naming the offending field.
ScenarioConfig scenario_from_json(const std::string& text);

// Resolves a --scenario argument: builtin name first, then a JSON file.
ScenarioConfig resolve_scenario(const std::string& name_or_path);

// --- CSV data files ----------------------------------------------------------

void write_measurements_csv(const std::filesystem::path& path,
                            const std::vector<FrameMeasurements>& meas);
std::vector<FrameMeasurements> read_measurements_csv(
    const std::filesystem::path& path);

void write_ground_truth_csv(const std::filesystem::path& path,
                            const GroundTruth& truth);
GroundTruth read_ground_truth_csv(const std::filesystem::path& path);

void write_estimates_csv(const std::filesystem::path& path,
                         const EstimateLog& log);
EstimateLog read_estimates_csv(const std::filesystem::path& path);

struct MetricRow {
    std::string level;
    std::string scenario;
    int trial = 0;
    std::string segment;  // "full" or "a:b"
    std::string metric;   // ape | rpe | motp
    double value = 0.0;
};

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<MetricRow>& rows);
std::vector<MetricRow> read_metrics_csv(const std::filesystem::path& path);

struct ComparisonRow {
    std::string level;
    std::string scenario;
    std::string segment;
    std::string metric;
    Aggregate stats;
};

void write_comparison_csv(const std::filesystem::path& path,
                          const std::vector<ComparisonRow>& rows);

// --- Ingest adapter ----------------------------------------------------------

struct IngestDetection {
    int frame = 0;
    int track_id = 0;
    double x = 0.0, y = 0.0, z = 0.0;  // camera frame
    double theta = 0.0;                // camera frame
    double score = 1.0;
};

struct IngestOdometry {
    int frame = 0;
    Se3Pose pose;  // absolute, KITTI pose style
};

// Parse errors name the file and 1-based line number.
std::vector<IngestDetection> read_detections_csv(
    const std::filesystem::path& path);
std::vector<IngestOdometry> read_odometry_csv(
    const std::filesystem::path& path);

void write_detections_csv(const std::filesystem::path& path,
                          const std::vector<IngestDetection>& rows);
void write_odometry_csv(const std::filesystem::path& path,
                        const std::vector<IngestOdometry>& rows);

// Converts absolute odometry + detections into the measurement stream
// (no pixels: the SLAM half runs odometry-only). Throws
// std::invalid_argument when frames are not contiguous from 0.
std::vector<FrameMeasurements> ingest_to_measurements(
    const std::vector<IngestDetection>& detections,
    const std::vector<IngestOdometry>& odometry);

// Export a measurement stream as ingest files (detections + absolute
// odometry composed from the increments).
void export_ingest_files(const std::filesystem::path& detections_path,
                         const std::filesystem::path& odometry_path,
                         const std::vector<FrameMeasurements>& meas);

// --- Schema check -------------------------------------------------------------

// Recognizes the file by its header row; throws std::invalid_argument
// when the header matches no known schema. Returns the schema name.
std::string check_schema(const std::filesystem::path& path);

}  // namespace slammot
