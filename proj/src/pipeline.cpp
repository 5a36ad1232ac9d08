#include "slammot/pipeline.hpp"

#include "slammot/angles.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace slammot {

std::optional<LevelId> level_from_name(const std::string& name) {
    for (LevelId l :
         {LevelId::L0, LevelId::L1, LevelId::L2, LevelId::L3}) {
        if (name == level_name(l)) return l;
    }
    return std::nullopt;
}

namespace {

struct Landmark {
    bool has_estimate = false;
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    std::map<int, Eigen::Vector2d> observations;  // frame -> pixel
};

struct FrameRecord {
    bool measured = false;
    Eigen::Vector4d meas_cam = Eigen::Vector4d::Zero();
    std::vector<ModelState> means;
    Eigen::VectorXd weights;
    double y = 0.0;
};

struct Track {
    ImmTrack bank;
    int missed = 0;
    std::map<int, FrameRecord> history;  // frame -> record
};

FrameRecord record_from_bank(const ImmTrack& bank, bool measured,
                             const Eigen::Vector4d& meas_cam, double y) {
    FrameRecord rec;
    rec.measured = measured;
    rec.meas_cam = meas_cam;
    rec.weights = bank.weights;
    rec.means.reserve(bank.estimates.size());
    for (const auto& est : bank.estimates) rec.means.push_back(est.mean);
    rec.y = y;
    return rec;
}

// Linear multi-view triangulation: minimizes the squared distance to the
// observation rays. Returns false for degenerate geometry.
bool triangulate(const std::vector<std::pair<Se3Pose, Eigen::Vector2d>>& obs,
                 const CameraIntrinsics& k, Eigen::Vector3d& out) {
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (const auto& [pose, pixel] : obs) {
        const Eigen::Vector3d dir_cam =
            back_project(pixel, 1.0, k).normalized();
        const Eigen::Vector3d dir = pose.rotation * dir_cam;
        const Eigen::Matrix3d m =
            Eigen::Matrix3d::Identity() - dir * dir.transpose();
        a += m;
        b += m * pose.translation;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(a);
    if (eig.eigenvalues()(0) < 1e-9) return false;
    out = a.ldlt().solve(b);
    // Require positive depth in every observing view.
    for (const auto& [pose, pixel] : obs) {
        if (!((pose.inverse() * out).z() > 0.1)) return false;
    }
    return true;
}

class LevelRunner {
  public:
    LevelRunner(LevelId level, const std::vector<FrameMeasurements>& meas,
                const PipelineConfig& cfg)
        : level_(level), meas_(meas), cfg_(cfg) {
        if (meas.size() < 2) {
            throw std::invalid_argument("run_level: need at least 2 frames");
        }
        if (level_ == LevelId::L3) {
            models_ = {ModelId::CP, ModelId::CV, ModelId::CTRV};
            transition_ = cfg.identity_transition
                              ? identity_transition(3)
                              : transition_matrix(cfg.tau);
        } else {
            models_ = {ModelId::CV};
            transition_ = identity_transition(1);
        }
    }

    EstimateLog run() {
        const int frames = static_cast<int>(meas_.size());
        for (int t = 0; t < frames; ++t) {
            const auto start = std::chrono::steady_clock::now();
            advance_pose(t);
            ingest_pixels(t);
            if (level_ != LevelId::L0) ingest_objects(t);
            const bool solve_now =
                t >= 1 && (t % cfg_.stride == 0 || t == frames - 1);
            if (solve_now) solve_window(t);
            log_frame(t);
            const auto stop = std::chrono::steady_clock::now();
            log_.frame_time_ms.push_back(
                std::chrono::duration<double, std::milli>(stop - start)
                    .count());
        }
        log_.ego = poses_;
        return std::move(log_);
    }

  private:
    void advance_pose(int t) {
        if (t == 0) {
            poses_.push_back(meas_[0].odometry_absolute ? meas_[0].odometry
                                                        : Se3Pose{});
        } else {
            poses_.push_back(meas_[t].odometry * poses_[t - 1]);
        }
    }

    void ingest_pixels(int t) {
        for (const auto& px : meas_[t].pixels) {
            if (px.dynamic && level_ != LevelId::L0) continue;
            landmarks_[px.id].observations[t] = px.pixel;
        }
    }

    void ingest_objects(int t) {
        const Se3Pose& pose = poses_[t];
        const double phi = heading_from_rotation(pose.rotation);
        std::vector<int> measured;
        for (const auto& obs : meas_[t].objects) {
            const Eigen::Vector3d world = pose * obs.position_cam;
            Measurement m;
            m.object_id = obs.id;
            m.x = world.x();
            m.z = world.z();
            m.theta = wrap_angle(obs.theta_cam + phi);
            m.frame = t;
            const Eigen::Vector4d meas_cam(obs.position_cam.x(),
                                           obs.position_cam.y(),
                                           obs.position_cam.z(),
                                           obs.theta_cam);
            auto it = tracks_.find(obs.id);
            if (it == tracks_.end()) {
                Track track;
                track.bank = init_track(obs.id, m, cfg_.noise, models_);
                if (cfg_.initial_weights && models_.size() == 3) {
                    for (int i = 0; i < 3; ++i) {
                        track.bank.weights[i] = (*cfg_.initial_weights)[i];
                    }
                }
                track.history[t] = record_from_bank(track.bank, true,
                                                    meas_cam, world.y());
                tracks_.emplace(obs.id, std::move(track));
            } else {
                Track& track = it->second;
                ImmStepResult res =
                    imm_step(track.bank, m, cfg_.dt, transition_, cfg_.noise,
                             cfg_.weight_floor);
                track.bank = std::move(res.track);
                track.missed = 0;
                track.history[t] = record_from_bank(track.bank, true,
                                                    meas_cam, world.y());
            }
            measured.push_back(obs.id);
        }
        // Coast or drop unmeasured tracks.
        for (auto it = tracks_.begin(); it != tracks_.end();) {
            Track& track = it->second;
            const bool seen = std::find(measured.begin(), measured.end(),
                                        it->first) != measured.end();
            if (seen) {
                ++it;
                continue;
            }
            ++track.missed;
            if (track.missed > cfg_.coast_limit) {
                it = tracks_.erase(it);
                continue;
            }
            ImmStepResult res =
                imm_predict_only(track.bank, cfg_.dt, transition_, cfg_.noise);
            track.bank = std::move(res.track);
            const double y = track.history.empty()
                                 ? 0.0
                                 : track.history.rbegin()->second.y;
            track.history[t] = record_from_bank(
                track.bank, false, Eigen::Vector4d::Zero(), y);
            ++it;
        }
    }

    void solve_window(int t) {
        const int first = std::max(0, t - cfg_.window + 1);
        WindowInput input;
        input.intrinsics = cfg_.intrinsics;
        input.dt = cfg_.dt;
        for (int f = first; f <= t; ++f) {
            WindowFrame wf;
            wf.frame = f;
            wf.pose_estimate = poses_[f];
            if (f > first && !meas_[f].odometry_absolute) {
                wf.has_odometry = true;
                wf.odometry = meas_[f].odometry;
            }
            input.frames.push_back(wf);
        }

        for (auto& [id, lm] : landmarks_) {
            std::vector<std::pair<int, Eigen::Vector2d>> window_obs;
            for (const auto& [frame, pixel] : lm.observations) {
                if (frame >= first && frame <= t) {
                    window_obs.emplace_back(frame, pixel);
                }
            }
            if (window_obs.size() < 2) continue;
            if (!lm.has_estimate) {
                std::vector<std::pair<Se3Pose, Eigen::Vector2d>> rays;
                rays.reserve(window_obs.size());
                for (const auto& [frame, pixel] : window_obs) {
                    rays.emplace_back(poses_[frame], pixel);
                }
                if (!triangulate(rays, cfg_.intrinsics, lm.position)) {
                    continue;  // retry from a wider baseline later
                }
                lm.has_estimate = true;
            }
            MapPoint pt;
            pt.id = id;
            pt.position = lm.position;
            pt.observations = std::move(window_obs);
            input.points.push_back(std::move(pt));
        }

        const bool with_objects =
            level_ == LevelId::L2 || level_ == LevelId::L3;
        if (with_objects) {
            for (const auto& [id, track] : tracks_) {
                TrackWindow tw;
                tw.object_id = id;
                tw.models = models_;
                for (const auto& [frame, rec] : track.history) {
                    if (frame < first || frame > t) continue;
                    ObjectFrameEntry entry;
                    entry.frame = frame;
                    entry.has_measurement = rec.measured;
                    entry.measurement = rec.meas_cam;
                    entry.model_means = rec.means;
                    entry.weights = rec.weights;
                    entry.y = rec.y;
                    tw.frames.push_back(std::move(entry));
                }
                if (!tw.frames.empty()) input.tracks.push_back(std::move(tw));
            }
        }

        SlammotGraph graph = build_window(
            input,
            level_ == LevelId::L2 ? GraphMode::Level2 : GraphMode::Level3,
            cfg_.info);
        const OptimizeReport report = optimize(graph, cfg_.solver);
        log_.window_iterations.push_back(report.iterations);
        log_.dropped_cheirality += graph.dropped_cheirality;

        for (std::size_t i = 0; i < graph.poses.size(); ++i) {
            poses_[first + static_cast<int>(i)] = graph.poses[i].value;
        }
        for (const auto& pt : graph.points) {
            landmarks_[pt.id].position = pt.position;
        }
        if (with_objects) {
            for (const auto& v : graph.objects) {
                Track& track = tracks_.at(v.object_id);
                FrameRecord& rec = track.history.at(v.frame);
                for (std::size_t mi = 0; mi < models_.size(); ++mi) {
                    if (models_[mi] != v.model) continue;
                    ModelState& mean = rec.means[mi];
                    mean.x = v.pose_state.position.x();
                    mean.z = v.pose_state.position.z();
                    mean.theta = v.pose_state.theta;
                    if (v.velocity_state.size() > 0) {
                        mean.v = v.velocity_state[0];
                    }
                    if (v.velocity_state.size() > 1) {
                        mean.omega = v.velocity_state[1];
                    }
                    rec.y = v.pose_state.position.y();
                }
            }
            // Optimized latest-frame states feed the next filter cycle.
            for (auto& [id, track] : tracks_) {
                auto it = track.history.find(t);
                if (it == track.history.end()) continue;
                for (std::size_t mi = 0; mi < models_.size(); ++mi) {
                    track.bank.estimates[mi].mean = it->second.means[mi];
                }
            }
            prune_history(first);
        }
    }

    void prune_history(int first) {
        for (auto& [id, track] : tracks_) {
            for (auto it = track.history.begin();
                 it != track.history.end() && it->first < first - 1;) {
                it = track.history.erase(it);
            }
        }
    }

    void log_frame(int t) {
        if (level_ == LevelId::L0) return;
        for (const auto& [id, track] : tracks_) {
            auto it = track.history.find(t);
            if (it == track.history.end()) continue;
            const SynthesizedState synth = synthesize(track.bank);
            ObjectLogEntry entry;
            entry.frame = t;
            entry.state = synth.state;
            entry.models = models_;
            entry.weights = track.bank.weights;
            log_.objects[id].push_back(std::move(entry));
        }
    }

    LevelId level_;
    const std::vector<FrameMeasurements>& meas_;
    const PipelineConfig& cfg_;
    std::vector<ModelId> models_;
    TransitionMatrix transition_;

    std::vector<Se3Pose> poses_;
    std::map<int, Landmark> landmarks_;
    std::map<int, Track> tracks_;
    EstimateLog log_;
};

}  // namespace

PipelineConfig pipeline_config_for(const ScenarioConfig& scenario) {
    PipelineConfig pc;
    pc.dt = scenario.dt;
    pc.intrinsics = scenario.intrinsics;
    const double s_px = std::max(scenario.noise.pixel, 0.05);
    const double s_pos = std::max(scenario.noise.object_position, 0.01);
    const double s_theta = std::max(scenario.noise.object_heading, 0.005);
    pc.noise.r_position = s_pos * s_pos;
    pc.noise.r_heading = s_theta * s_theta;
    pc.info.reprojection = 1.0 / (s_px * s_px);
    pc.info.object_position = 1.0 / (s_pos * s_pos);
    pc.info.object_heading = 1.0 / (s_theta * s_theta);
    return pc;
}

EstimateLog run_level(LevelId level,
                      const std::vector<FrameMeasurements>& meas,
                      const PipelineConfig& cfg) {
    return LevelRunner(level, meas, cfg).run();
}

std::vector<TrackPoint> estimate_track_points(const EstimateLog& log) {
    std::vector<TrackPoint> out;
    for (const auto& [id, entries] : log.objects) {
        for (const auto& e : entries) {
            out.push_back({e.frame, id, e.state.x, e.state.z});
        }
    }
    return out;
}

std::vector<TrackPoint> truth_track_points(const GroundTruth& truth) {
    std::vector<TrackPoint> out;
    for (const auto& [id, frames] : truth.objects) {
        for (std::size_t t = 0; t < frames.size(); ++t) {
            if (!frames[t].active) continue;
            out.push_back({static_cast<int>(t), id, frames[t].state.x,
                           frames[t].state.z});
        }
    }
    return out;
}

}  // namespace slammot
