#pragma once

// Trajectory and tracking error metrics (APE, RPE, MOTP) plus the
// seeded Monte Carlo aggregation harness. No trajectory alignment is
// applied anywhere: all estimators share the ground-truth initial frame.

#include "slammot/se3.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace slammot {

// Inclusive frame range; negative end means "to the last frame".
struct FrameRange {
    int start = 0;
    int end = -1;

    bool contains(int frame) const {
        return frame >= start && (end < 0 || frame <= end);
    }
};

struct TrajectoryError {
    double ape = 0.0;  // RMSE of per-frame translation error, meters
    double rpe = 0.0;  // RMSE of per-pair relative translation error, m/frame
    std::vector<double> per_frame;  // translation error norm per frame
};

// RMSE of per-frame translation error norms over the range.
double ape(const std::vector<Se3Pose>& est, const std::vector<Se3Pose>& gt,
           const FrameRange& range = {});

// RMSE over consecutive-frame pairs of the translation norm of
// (gt relative motion)^-1 * (est relative motion).
double rpe(const std::vector<Se3Pose>& est, const std::vector<Se3Pose>& gt,
           const FrameRange& range = {});

TrajectoryError trajectory_error(const std::vector<Se3Pose>& est,
                                 const std::vector<Se3Pose>& gt,
                                 const FrameRange& range = {});

// One object position at one frame (x-z plane distances are what MOTP
// measures; y is ignored).
struct TrackPoint {
    int frame = -1;
    int id = -1;
    double x = 0.0;
    double z = 0.0;
};

struct TrackingError {
    double motp = 0.0;  // mean distance over matched pairs, meters
    int matched = 0;
    int missed = 0;
};

// ID-based matching per frame; pairs farther apart than the gate count as
// misses. Ground-truth points with no estimate in the frame also count as
// misses.
TrackingError motp(const std::vector<TrackPoint>& est,
                   const std::vector<TrackPoint>& gt, double gate,
                   const FrameRange& range = {});

// Assignment-based fallback for data without consistent ids: per frame,
// a minimum-total-distance matching (Hungarian algorithm) under the gate.
TrackingError motp_hungarian(const std::vector<TrackPoint>& est,
                             const std::vector<TrackPoint>& gt, double gate,
                             const FrameRange& range = {});

// Minimum-cost assignment of rows to columns; entries above `gate` are
// treated as forbidden. Returns column index per row (-1 = unassigned).
std::vector<int> hungarian_assignment(const Eigen::MatrixXd& cost,
                                      double gate);

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation; 0 when count < 2
    double median = 0.0;
    int count = 0;
};

Aggregate aggregate(const std::vector<double>& values);

struct TrialOutcome {
    std::uint64_t seed = 0;
    std::map<std::string, double> values;
    std::optional<std::string> error;
};

struct MonteCarloReport {
    std::map<std::string, Aggregate> aggregates;
    std::vector<TrialOutcome> trials;  // ordered by seed list position
    int failed = 0;
};

// Runs the trial procedure once per seed (optionally across a worker
// pool); failed trials are recorded and excluded from the aggregates.
// Deterministic given the seed list regardless of the job count.
MonteCarloReport monte_carlo(
    const std::function<std::map<std::string, double>(std::uint64_t)>& trial,
    std::span<const std::uint64_t> seeds, int jobs = 1);

}  // namespace slammot
