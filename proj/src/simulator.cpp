#include "slammot/simulator.hpp"

#include "slammot/angles.hpp"

#include <cmath>
#include <stdexcept>

namespace slammot {

namespace {

double gauss(std::mt19937_64& rng, double sigma) {
    if (sigma <= 0.0) return 0.0;
    std::normal_distribution<double> n(0.0, sigma);
    return n(rng);
}

// Body-frame rotation of an object heading about the vertical axis.
Eigen::Matrix3d body_rotation(double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Eigen::Matrix3d r;
    r << c, 0.0, -s,
         0.0, 1.0, 0.0,
         s, 0.0, c;
    return r;
}

void fail(const std::string& field, const std::string& why) {
    throw std::invalid_argument("scenario config: " + field + ": " + why);
}

}  // namespace

void validate_scenario(const ScenarioConfig& cfg) {
    if (cfg.frames <= 0) fail("frames", "must be > 0");
    if (!(cfg.dt > 0.0)) fail("dt", "must be > 0");
    if (!cfg.intrinsics.valid()) fail("intrinsics", "fx and fy must be > 0");
    if (cfg.image_width <= 0 || cfg.image_height <= 0) {
        fail("image_size", "must be positive");
    }
    if (cfg.landmark_count < 0) fail("landmark_count", "must be >= 0");
    if (!cfg.noise.valid()) fail("noise", "sigmas must be >= 0");
    if (cfg.object_points < 0) fail("object_points", "must be >= 0");
    int ego_frames = 0;
    for (const auto& s : cfg.ego_segments) {
        if (s.frames <= 0) fail("ego_segments", "segment frames must be > 0");
        ego_frames += s.frames;
    }
    if (ego_frames < cfg.frames - 1) {
        fail("ego_segments", "durations do not cover the scenario");
    }
    for (std::size_t i = 0; i < cfg.objects.size(); ++i) {
        const auto& o = cfg.objects[i];
        const std::string field = "objects[" + std::to_string(i) + "]";
        if (o.first_frame < 0) fail(field, "first_frame must be >= 0");
        if (o.segments.empty()) fail(field, "needs at least one segment");
        int total = 0;
        for (const auto& s : o.segments) {
            if (s.frames <= 0) fail(field, "segment frames must be > 0");
            total += s.frames;
        }
        if (o.first_frame + total > cfg.frames) {
            fail(field, "segment durations exceed the scenario length");
        }
    }
    if (cfg.segment_start < 0 || cfg.segment_end < cfg.segment_start ||
        cfg.segment_end >= cfg.frames) {
        fail("segment", "transition segment out of range");
    }
}

GroundTruth generate_scenario(const ScenarioConfig& cfg) {
    validate_scenario(cfg);
    GroundTruth truth;
    truth.ego.reserve(cfg.frames);
    truth.ego_heading.reserve(cfg.frames);

    // Ego trajectory: piecewise constant speed / turn rate arcs.
    double x = cfg.ego_x0;
    double z = cfg.ego_z0;
    double phi = wrap_angle(cfg.ego_heading0);
    std::size_t seg = 0;
    int seg_left = cfg.ego_segments.empty() ? 0 : cfg.ego_segments[0].frames;
    for (int t = 0; t < cfg.frames; ++t) {
        truth.ego.push_back(
            {rotation_from_heading(phi), Eigen::Vector3d(x, 0.0, z)});
        truth.ego_heading.push_back(phi);
        if (t + 1 >= cfg.frames) break;
        while (seg_left == 0 && seg + 1 < cfg.ego_segments.size()) {
            ++seg;
            seg_left = cfg.ego_segments[seg].frames;
        }
        const EgoSegment& s = cfg.ego_segments[seg];
        // The ego advances along its optical axis: heading 0 is world +z.
        const double alpha = phi + 0.5 * s.turn_rate * cfg.dt;
        x += s.speed * std::sin(alpha) * cfg.dt;
        z += s.speed * std::cos(alpha) * cfg.dt;
        phi = wrap_angle(phi + s.turn_rate * cfg.dt);
        if (seg_left > 0) --seg_left;
    }

    std::mt19937_64 rng(cfg.seed);
    truth.landmarks.reserve(cfg.landmark_count);
    {
        std::uniform_real_distribution<double> ux(cfg.landmark_bounds.x_min,
                                                  cfg.landmark_bounds.x_max);
        std::uniform_real_distribution<double> uy(cfg.landmark_bounds.y_min,
                                                  cfg.landmark_bounds.y_max);
        std::uniform_real_distribution<double> uz(cfg.landmark_bounds.z_min,
                                                  cfg.landmark_bounds.z_max);
        for (int i = 0; i < cfg.landmark_count; ++i) {
            const double lx = ux(rng);
            const double ly = uy(rng);
            const double lz = uz(rng);
            truth.landmarks.emplace_back(lx, ly, lz);
        }
    }

    for (const auto& script : cfg.objects) {
        std::vector<ObjectTruthFrame> frames(cfg.frames);
        FullState state;
        state.x = script.x0;
        state.z = script.z0;
        state.theta = wrap_angle(script.theta0);

        int t = script.first_frame;
        for (std::size_t si = 0; si < script.segments.size(); ++si) {
            const ObjectSegment& s = script.segments[si];
            // Entering a segment re-labels the velocity components.
            state.v = model_dim(s.model) > 3 ? s.v : 0.0;
            state.omega = model_dim(s.model) > 4 ? s.omega : 0.0;
            for (int k = 0; k < s.frames; ++k, ++t) {
                frames[t].active = true;
                frames[t].state = state;
                frames[t].model = s.model;
                const ModelState ms = truncate(state, s.model);
                state = lift(propagate(ms, cfg.dt));
            }
        }
        truth.objects[script.id] = std::move(frames);
        truth.object_y[script.id] = script.y;

        std::vector<Eigen::Vector3d> offsets;
        std::uniform_real_distribution<double> ox(-1.5, 1.5);
        std::uniform_real_distribution<double> oy(-0.8, 0.2);
        std::uniform_real_distribution<double> oz(-0.8, 0.8);
        for (int k = 0; k < cfg.object_points; ++k) {
            const double px = ox(rng);
            const double py = oy(rng);
            const double pz = oz(rng);
            offsets.emplace_back(px, py, pz);
        }
        truth.object_point_offsets[script.id] = std::move(offsets);
    }
    return truth;
}

Eigen::Vector3d object_point_position(const GroundTruth& truth, int object_id,
                                      int point_index, int t) {
    const auto& frames = truth.objects.at(object_id);
    const auto& offsets = truth.object_point_offsets.at(object_id);
    const FullState& s = frames[t].state;
    const Eigen::Vector3d base(s.x, truth.object_y.at(object_id), s.z);
    return base + body_rotation(s.theta) * offsets[point_index];
}

FrameMeasurements observe_frame(const GroundTruth& truth, int t,
                                const ScenarioConfig& cfg,
                                std::mt19937_64& noise_stream) {
    if (t < 0 || t >= static_cast<int>(truth.ego.size())) {
        throw std::invalid_argument("observe_frame: frame out of range");
    }
    FrameMeasurements out;
    out.frame = t;
    const Se3Pose& pose = truth.ego[t];
    const Se3Pose inv = pose.inverse();

    auto observe_point = [&](int id, const Eigen::Vector3d& world,
                             bool dynamic) {
        const Eigen::Vector3d p_cam = inv * world;
        if (!(p_cam.z() > 0.1)) return;
        Eigen::Vector2d pix = project(p_cam, cfg.intrinsics);
        if (pix.x() < 0.0 || pix.x() > cfg.image_width || pix.y() < 0.0 ||
            pix.y() > cfg.image_height) {
            return;
        }
        pix.x() += gauss(noise_stream, cfg.noise.pixel);
        pix.y() += gauss(noise_stream, cfg.noise.pixel);
        if (pix.x() < 0.0 || pix.x() > cfg.image_width || pix.y() < 0.0 ||
            pix.y() > cfg.image_height) {
            return;  // noise pushed it out of the image
        }
        out.pixels.push_back({id, pix, dynamic});
    };

    for (std::size_t i = 0; i < truth.landmarks.size(); ++i) {
        observe_point(static_cast<int>(i), truth.landmarks[i], false);
    }
    {
        int slot = 0;
        for (const auto& [id, frames] : truth.objects) {
            if (frames[t].active) {
                const int n_points =
                    static_cast<int>(truth.object_point_offsets.at(id).size());
                for (int k = 0; k < n_points; ++k) {
                    observe_point(static_cast<int>(truth.landmarks.size()) +
                                      slot * cfg.object_points + k,
                                  object_point_position(truth, id, k, t), true);
                }
            }
            ++slot;
        }
    }

    if (t == 0) {
        out.odometry_absolute = true;
        out.odometry = pose;
    } else {
        const Se3Pose rel = pose * truth.ego[t - 1].inverse();
        Vector6d xi;
        for (int i = 0; i < 3; ++i) {
            xi[i] = gauss(noise_stream, cfg.noise.odometry_rotation);
        }
        for (int i = 3; i < 6; ++i) {
            xi[i] = gauss(noise_stream, cfg.noise.odometry_translation);
        }
        out.odometry = exp_se3(xi) * rel;
    }

    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (const auto& [id, frames] : truth.objects) {
        if (!frames[t].active) continue;
        const FullState& s = frames[t].state;
        const Eigen::Vector3d world(s.x, truth.object_y.at(id), s.z);
        const Eigen::Vector3d p_cam = inv * world;
        if (!(p_cam.z() > 0.1)) continue;
        double scale = 1.0;
        if (cfg.heavy_tail && uniform(noise_stream) < 0.05) {
            scale = 5.0;
        }
        ObjectObservation obs;
        obs.id = id;
        obs.position_cam =
            p_cam + Eigen::Vector3d(
                        gauss(noise_stream, scale * cfg.noise.object_position),
                        gauss(noise_stream, scale * cfg.noise.object_position),
                        gauss(noise_stream, scale * cfg.noise.object_position));
        obs.theta_cam = wrap_angle(
            s.theta - truth.ego_heading[t] +
            gauss(noise_stream, scale * cfg.noise.object_heading));
        out.objects.push_back(obs);
    }
    return out;
}

std::vector<FrameMeasurements> observe_all(const GroundTruth& truth,
                                           const ScenarioConfig& cfg) {
    return observe_all_seeded(truth, cfg, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
}

std::vector<FrameMeasurements> observe_all_seeded(const GroundTruth& truth,
                                                  const ScenarioConfig& cfg,
                                                  std::uint64_t stream_seed) {
    std::mt19937_64 rng(stream_seed);
    std::vector<FrameMeasurements> out;
    out.reserve(truth.ego.size());
    for (int t = 0; t < static_cast<int>(truth.ego.size()); ++t) {
        out.push_back(observe_frame(truth, t, cfg, rng));
    }
    return out;
}

namespace {

ScenarioConfig base_scenario(const std::string& name, int frames) {
    ScenarioConfig cfg;
    cfg.name = name;
    cfg.frames = frames;
    cfg.dt = 0.1;
    cfg.landmark_count = 150;
    cfg.seed = 1;
    return cfg;
}

// Object headings use the motion-model convention (direction
// (cos theta, sin theta) in the x-z plane): pi/2 drives along +z, the
// same way the ego at heading 0 looks.
constexpr double kForward = M_PI / 2.0;
constexpr double kOncoming = -M_PI / 2.0;

ObjectScript parked(int id, double lateral, double ahead, int frames) {
    ObjectScript o;
    o.id = id;
    o.x0 = lateral;
    o.z0 = ahead;
    o.theta0 = kForward;
    o.y = 0.5;
    o.segments = {{ModelId::CP, 0.0, 0.0, frames}};
    return o;
}

ObjectScript cruising(int id, double lateral, double ahead, double theta,
                      double speed, int frames) {
    ObjectScript o;
    o.id = id;
    o.x0 = lateral;
    o.z0 = ahead;
    o.theta0 = theta;
    o.y = 0.5;
    o.segments = {{ModelId::CV, speed, 0.0, frames}};
    return o;
}

}  // namespace

std::vector<ScenarioConfig> builtin_scenarios() {
    std::vector<ScenarioConfig> out;

    {
        // Mostly parked vehicles, one of the five stopping mid-sequence.
        ScenarioConfig cfg = base_scenario("mostly-static", 60);
        cfg.ego_segments = {{60, 5.0, 0.0}};
        cfg.landmark_bounds = {-25.0, 25.0, -4.0, 4.0, -5.0, 75.0};
        cfg.objects = {parked(0, 5.0, 20.0, 60), parked(1, -5.0, 28.0, 60),
                       parked(2, 6.0, 38.0, 60), parked(3, -6.0, 46.0, 60)};
        ObjectScript stopping;
        stopping.id = 4;
        stopping.x0 = 1.5;
        stopping.z0 = 24.0;
        stopping.theta0 = kForward;
        stopping.y = 0.5;
        stopping.segments = {{ModelId::CV, 5.0, 0.0, 25},
                             {ModelId::CP, 0.0, 0.0, 35}};
        cfg.objects.push_back(stopping);
        cfg.segment_start = 20;
        cfg.segment_end = 40;
        out.push_back(cfg);
    }

    {
        // Oncoming traffic at distance; one oncoming car weaves.
        ScenarioConfig cfg = base_scenario("oncoming", 60);
        cfg.ego_segments = {{60, 5.0, 0.0}};
        cfg.landmark_bounds = {-25.0, 25.0, -4.0, 4.0, -5.0, 95.0};
        cfg.objects = {
            cruising(0, -3.0, 60.0, kOncoming, 4.5, 60),
            cruising(1, 3.0, 72.0, kOncoming, 5.5, 60),
            cruising(2, -2.0, 85.0, kOncoming, 6.0, 60),
        };
        ObjectScript weaving;
        weaving.id = 3;
        weaving.x0 = 1.0;
        weaving.z0 = 68.0;
        weaving.theta0 = kOncoming;
        weaving.y = 0.5;
        weaving.segments = {{ModelId::CV, 5.0, 0.0, 25},
                            {ModelId::CTRV, 5.0, 0.2, 20},
                            {ModelId::CV, 5.0, 0.0, 15}};
        cfg.objects.push_back(weaving);
        cfg.segment_start = 20;
        cfg.segment_end = 50;
        out.push_back(cfg);
    }

    {
        // Mixed parked and moving vehicles.
        ScenarioConfig cfg = base_scenario("mixed", 60);
        cfg.ego_segments = {{30, 6.0, 0.0}, {30, 6.0, 0.04}};
        cfg.landmark_bounds = {-25.0, 25.0, -4.0, 4.0, -5.0, 85.0};
        cfg.objects = {parked(0, -5.0, 22.0, 60), parked(1, 5.5, 34.0, 60),
                       cruising(2, 0.0, 20.0, kForward, 6.5, 60)};
        ObjectScript stopping;
        stopping.id = 3;
        stopping.x0 = 2.0;
        stopping.z0 = 28.0;
        stopping.theta0 = kForward;
        stopping.y = 0.5;
        stopping.segments = {{ModelId::CV, 6.0, 0.0, 30},
                             {ModelId::CP, 0.0, 0.0, 30}};
        cfg.objects.push_back(stopping);
        ObjectScript turning;
        turning.id = 4;
        turning.x0 = -3.0;
        turning.z0 = 30.0;
        turning.theta0 = kForward;
        turning.y = 0.5;
        turning.segments = {{ModelId::CV, 6.0, 0.0, 20},
                            {ModelId::CTRV, 6.0, 0.15, 25},
                            {ModelId::CV, 6.0, 0.0, 15}};
        cfg.objects.push_back(turning);
        cfg.segment_start = 25;
        cfg.segment_end = 50;
        out.push_back(cfg);
    }

    {
        // Highway: everything moves.
        ScenarioConfig cfg = base_scenario("highway", 60);
        cfg.ego_segments = {{60, 10.0, 0.0}};
        cfg.landmark_bounds = {-30.0, 30.0, -4.0, 4.0, -5.0, 130.0};
        cfg.objects = {
            cruising(0, -2.0, 20.0, kForward, 9.0, 60),
            cruising(1, 2.0, 28.0, kForward, 11.0, 60),
            cruising(2, -4.5, 36.0, kForward, 8.5, 60),
            cruising(3, 4.5, 95.0, kOncoming, 9.0, 60),
        };
        ObjectScript lane_change;
        lane_change.id = 4;
        lane_change.x0 = 4.0;
        lane_change.z0 = 24.0;
        lane_change.theta0 = kForward;
        lane_change.y = 0.5;
        lane_change.segments = {{ModelId::CV, 10.5, 0.0, 20},
                                {ModelId::CTRV, 10.5, -0.12, 20},
                                {ModelId::CTRV, 10.5, 0.12, 20}};
        cfg.objects.push_back(lane_change);
        cfg.segment_start = 15;
        cfg.segment_end = 45;
        out.push_back(cfg);
    }

    {
        // Motion-pattern transitions front and center: a car stopping, a
        // car pulling away, a car swerving, plus steady companions.
        ScenarioConfig cfg = base_scenario("transition", 70);
        cfg.ego_segments = {{30, 6.0, 0.0}, {20, 6.0, 0.05}, {20, 6.0, 0.0}};
        cfg.landmark_bounds = {-25.0, 25.0, -4.0, 4.0, -5.0, 95.0};
        ObjectScript stopping;
        stopping.id = 0;
        stopping.x0 = 1.5;
        stopping.z0 = 28.0;
        stopping.theta0 = kForward;
        stopping.y = 0.5;
        stopping.segments = {{ModelId::CV, 5.5, 0.0, 30},
                             {ModelId::CP, 0.0, 0.0, 40}};
        ObjectScript starting;
        starting.id = 1;
        starting.x0 = -2.5;
        starting.z0 = 38.0;
        starting.theta0 = kForward;
        starting.y = 0.5;
        starting.segments = {{ModelId::CP, 0.0, 0.0, 35},
                             {ModelId::CV, 5.0, 0.0, 35}};
        ObjectScript swerving;
        swerving.id = 2;
        swerving.x0 = 5.0;
        swerving.z0 = 32.0;
        swerving.theta0 = kForward;
        swerving.y = 0.5;
        swerving.segments = {{ModelId::CV, 6.0, 0.0, 25},
                             {ModelId::CTRV, 6.0, 0.25, 25},
                             {ModelId::CV, 6.0, 0.0, 20}};
        cfg.objects = {stopping, starting, swerving,
                       parked(3, -5.0, 18.0, 70),
                       cruising(4, 0.0, 22.0, kForward, 6.0, 70)};
        cfg.segment_start = 25;
        cfg.segment_end = 55;
        out.push_back(cfg);
    }

    {
        // Zero-noise diagnostic: exact measurements, no dynamic surface
        // points, and objects representable by a single model throughout.
        ScenarioConfig cfg = base_scenario("diagnostic", 40);
        cfg.ego_segments = {{40, 6.0, 0.0}};
        cfg.landmark_bounds = {-25.0, 25.0, -4.0, 4.0, -5.0, 70.0};
        cfg.landmark_count = 120;
        cfg.objects = {parked(0, 4.0, 20.0, 40),
                       cruising(1, -2.0, 18.0, kForward, 5.0, 40),
                       cruising(2, 1.0, 26.0, kForward, 6.5, 40)};
        cfg.object_points = 0;
        cfg.noise = {0.0, 0.0, 0.0, 0.0, 0.0};
        cfg.segment_start = 10;
        cfg.segment_end = 30;
        out.push_back(cfg);
    }

    return out;
}

std::optional<ScenarioConfig> builtin_scenario(const std::string& name) {
    for (auto& cfg : builtin_scenarios()) {
        if (cfg.name == name) return cfg;
    }
    return std::nullopt;
}

}  // namespace slammot
