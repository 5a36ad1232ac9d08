#include "slammot/simulator.hpp"

#include "oracles.hpp"
#include "slammot/angles.hpp"

#include <doctest.h>

#include <cmath>

using namespace slammot;

namespace {

ScenarioConfig tiny_scenario() {
    ScenarioConfig cfg;
    cfg.name = "tiny";
    cfg.frames = 12;
    cfg.dt = 0.1;
    cfg.ego_segments = {{12, 5.0, 0.0}};
    cfg.landmark_count = 40;
    cfg.landmark_bounds = {-15.0, 15.0, -3.0, 3.0, 2.0, 40.0};
    ObjectScript obj;
    obj.id = 0;
    obj.x0 = 1.0;
    obj.z0 = 10.0;
    obj.theta0 = M_PI / 2.0;
    obj.y = 0.5;
    obj.segments = {{ModelId::CV, 2.0, 0.0, 12}};
    cfg.objects = {obj};
    cfg.segment_start = 2;
    cfg.segment_end = 8;
    return cfg;
}

Eigen::Vector2d oracle_project(const Se3Pose& pose,
                               const Eigen::Vector3d& world,
                               const CameraIntrinsics& k) {
    const Eigen::Vector3d x =
        pose.rotation.transpose() * (world - pose.translation);
    return {k.fx * x.x() / x.z() + k.cx, k.fy * x.y() / x.z() + k.cy};
}

}  // namespace

TEST_CASE("scenario validation names the offending field") {
    ScenarioConfig cfg = tiny_scenario();
    cfg.frames = 0;
    try {
        validate_scenario(cfg);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("frames") != std::string::npos);
    }

    cfg = tiny_scenario();
    cfg.objects[0].segments[0].frames = 100;  // exceeds the scenario
    try {
        validate_scenario(cfg);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("objects[0]") != std::string::npos);
    }

    cfg = tiny_scenario();
    cfg.noise.pixel = -1.0;
    CHECK_THROWS_AS(validate_scenario(cfg), std::invalid_argument);
}

TEST_CASE("generation is deterministic") {
    const ScenarioConfig cfg = tiny_scenario();
    const GroundTruth a = generate_scenario(cfg);
    const GroundTruth b = generate_scenario(cfg);
    REQUIRE(a.ego.size() == b.ego.size());
    for (std::size_t t = 0; t < a.ego.size(); ++t) {
        CHECK(a.ego[t].translation == b.ego[t].translation);
        CHECK(a.ego[t].rotation == b.ego[t].rotation);
    }
    REQUIRE(a.landmarks.size() == b.landmarks.size());
    for (std::size_t i = 0; i < a.landmarks.size(); ++i) {
        CHECK(a.landmarks[i] == b.landmarks[i]);
    }
    const auto& oa = a.objects.at(0);
    const auto& ob = b.objects.at(0);
    for (std::size_t t = 0; t < oa.size(); ++t) {
        CHECK(oa[t].state.as_vector() == ob[t].state.as_vector());
    }

    const auto ma = observe_all(a, cfg);
    const auto mb = observe_all(b, cfg);
    REQUIRE(ma.size() == mb.size());
    for (std::size_t t = 0; t < ma.size(); ++t) {
        REQUIRE(ma[t].pixels.size() == mb[t].pixels.size());
        for (std::size_t i = 0; i < ma[t].pixels.size(); ++i) {
            CHECK(ma[t].pixels[i].pixel == mb[t].pixels[i].pixel);
        }
    }
}

TEST_CASE("constant velocity script advances the position per frame") {
    const ScenarioConfig cfg = tiny_scenario();
    const GroundTruth truth = generate_scenario(cfg);
    const auto& frames = truth.objects.at(0);
    for (int t = 0; t + 1 < cfg.frames; ++t) {
        const double dz = frames[t + 1].state.z - frames[t].state.z;
        const double dx = frames[t + 1].state.x - frames[t].state.x;
        CHECK(dz == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(std::abs(dx) < 1e-12);
        CHECK(frames[t].state.v == doctest::Approx(2.0));
        CHECK(frames[t].model == ModelId::CV);
    }
}

TEST_CASE("pattern transition drops the velocity label") {
    ScenarioConfig cfg = tiny_scenario();
    cfg.frames = 40;
    cfg.ego_segments = {{40, 5.0, 0.0}};
    cfg.objects[0].segments = {{ModelId::CV, 2.0, 0.0, 20},
                               {ModelId::CP, 0.0, 0.0, 20}};
    const GroundTruth truth = generate_scenario(cfg);
    const auto& frames = truth.objects.at(0);
    CHECK(frames[19].state.v == doctest::Approx(2.0));
    CHECK(frames[19].model == ModelId::CV);
    CHECK(frames[20].state.v == 0.0);
    CHECK(frames[20].model == ModelId::CP);
    // Position advances into frame 20 under the outgoing CV step, then
    // stays constant.
    CHECK(frames[20].state.z - frames[19].state.z ==
          doctest::Approx(0.2).epsilon(1e-12));
    for (int t = 20; t + 1 < 40; ++t) {
        CHECK(frames[t + 1].state.z == frames[t].state.z);
        CHECK(frames[t + 1].state.x == frames[t].state.x);
    }
}

TEST_CASE("ground truth is consistent with the labeled models") {
    for (const auto& cfg : builtin_scenarios()) {
        const GroundTruth truth = generate_scenario(cfg);
        for (const auto& [id, frames] : truth.objects) {
            for (std::size_t t = 0; t + 1 < frames.size(); ++t) {
                if (!frames[t].active || !frames[t + 1].active) continue;
                const ModelId m = frames[t].model;
                const ModelState next =
                    propagate(truncate(frames[t].state, m), cfg.dt);
                CHECK(std::abs(next.x - frames[t + 1].state.x) < 1e-9);
                CHECK(std::abs(next.z - frames[t + 1].state.z) < 1e-9);
                CHECK(std::abs(wrap_angle(next.theta -
                                          frames[t + 1].state.theta)) <
                      1e-9);
                // Velocity components are re-labeled at segment switches;
                // inside a segment they are constant and must propagate.
                const bool same_segment =
                    frames[t + 1].model == m &&
                    frames[t].state.v == frames[t + 1].state.v &&
                    frames[t].state.omega == frames[t + 1].state.omega;
                if (same_segment) {
                    CHECK(std::abs(lift(next).v - frames[t + 1].state.v) <
                          1e-9);
                    CHECK(std::abs(lift(next).omega -
                                   frames[t + 1].state.omega) < 1e-9);
                }
            }
        }
    }
}

TEST_CASE("zero noise observations match an independent projection oracle") {
    ScenarioConfig cfg = tiny_scenario();
    cfg.noise = {0.0, 0.0, 0.0, 0.0, 0.0};
    const GroundTruth truth = generate_scenario(cfg);
    const auto meas = observe_all(truth, cfg);
    for (const auto& frame : meas) {
        const Se3Pose& pose = truth.ego[frame.frame];
        for (const auto& px : frame.pixels) {
            REQUIRE(px.id < static_cast<int>(truth.landmarks.size()) +
                                cfg.object_points);
            const Eigen::Vector3d world =
                px.dynamic
                    ? object_point_position(
                          truth, 0,
                          px.id - static_cast<int>(truth.landmarks.size()), frame.frame)
                    : truth.landmarks[px.id];
            CHECK((px.pixel - oracle_project(pose, world, cfg.intrinsics))
                      .norm() < 1e-10);
            CHECK(px.pixel.x() >= 0.0);
            CHECK(px.pixel.x() <= cfg.image_width);
            CHECK(px.pixel.y() >= 0.0);
            CHECK(px.pixel.y() <= cfg.image_height);
        }
        if (frame.frame == 0) {
            CHECK(frame.odometry_absolute);
            CHECK((frame.odometry.translation -
                   truth.ego[0].translation).norm() < 1e-15);
        } else {
            const Se3Pose expected =
                truth.ego[frame.frame] * truth.ego[frame.frame - 1].inverse();
            CHECK((frame.odometry.translation - expected.translation)
                      .norm() < 1e-12);
            CHECK((frame.odometry.rotation - expected.rotation).norm() <
                  1e-12);
        }
        for (const auto& obj : frame.objects) {
            const FullState& s = truth.objects.at(obj.id)[frame.frame].state;
            const Eigen::Vector3d world(s.x, truth.object_y.at(obj.id), s.z);
            const Eigen::Vector3d p_cam =
                pose.rotation.transpose() * (world - pose.translation);
            CHECK((obj.position_cam - p_cam).norm() < 1e-12);
            CHECK(std::abs(wrap_angle(
                      obj.theta_cam -
                      (s.theta - truth.ego_heading[frame.frame]))) < 1e-12);
        }
    }
}

TEST_CASE("landmarks behind the camera are excluded") {
    ScenarioConfig cfg = tiny_scenario();
    cfg.landmark_count = 0;
    cfg.objects.clear();
    cfg.noise = {0.0, 0.0, 0.0, 0.0, 0.0};
    GroundTruth truth = generate_scenario(cfg);
    truth.landmarks = {Eigen::Vector3d(0.0, 0.0, -5.0),   // behind
                       Eigen::Vector3d(0.0, 0.0, 10.0)};  // ahead
    std::mt19937_64 rng(1);
    const FrameMeasurements frame = observe_frame(truth, 0, cfg, rng);
    REQUIRE(frame.pixels.size() == 1);
    CHECK(frame.pixels[0].id == 1);
}

TEST_CASE("pixel noise has the configured standard deviation") {
    ScenarioConfig cfg = tiny_scenario();
    cfg.frames = 30;
    cfg.ego_segments = {{30, 5.0, 0.0}};
    cfg.landmark_count = 9000;
    cfg.objects.clear();
    cfg.noise = {1.0, 0.0, 0.0, 0.0, 0.0};
    cfg.segment_start = 0;
    cfg.segment_end = 10;
    const GroundTruth truth = generate_scenario(cfg);
    const auto meas = observe_all(truth, cfg);
    std::vector<double> diffs;
    for (const auto& frame : meas) {
        const Se3Pose& pose = truth.ego[frame.frame];
        for (const auto& px : frame.pixels) {
            const Eigen::Vector2d exact =
                oracle_project(pose, truth.landmarks[px.id], cfg.intrinsics);
            diffs.push_back(px.pixel.x() - exact.x());
            diffs.push_back(px.pixel.y() - exact.y());
        }
    }
    REQUIRE(diffs.size() >= 100000);
    double mean = 0.0;
    for (double d : diffs) mean += d;
    mean /= diffs.size();
    double var = 0.0;
    for (double d : diffs) var += (d - mean) * (d - mean);
    var /= (diffs.size() - 1);
    const double std_dev = std::sqrt(var);
    CHECK(std_dev > 0.98);
    CHECK(std_dev < 1.02);
}

TEST_CASE("builtin scenarios cover the archetypes") {
    const auto scenarios = builtin_scenarios();
    REQUIRE(scenarios.size() == 6);
    for (const char* name : {"mostly-static", "oncoming", "mixed", "highway",
                             "transition", "diagnostic"}) {
        CHECK(builtin_scenario(name).has_value());
    }
    CHECK(!builtin_scenario("nope").has_value());

    for (const auto& cfg : scenarios) {
        CHECK_NOTHROW(validate_scenario(cfg));
        // Transition segment metadata present everywhere.
        CHECK(cfg.segment_end > cfg.segment_start);
        CHECK(cfg.segment_end < cfg.frames);
    }

    {
        const ScenarioConfig cfg = *builtin_scenario("mostly-static");
        int cp_only = 0;
        for (const auto& o : cfg.objects) {
            bool all_cp = true;
            for (const auto& s : o.segments) all_cp &= s.model == ModelId::CP;
            cp_only += all_cp ? 1 : 0;
        }
        CHECK(cp_only * 5 >= 4 * static_cast<int>(cfg.objects.size()));
    }
    {
        const ScenarioConfig cfg = *builtin_scenario("highway");
        for (const auto& o : cfg.objects) {
            for (const auto& s : o.segments) {
                CHECK(s.model != ModelId::CP);
                CHECK(std::abs(s.v) > 0.0);
            }
        }
    }
    {
        const ScenarioConfig cfg = *builtin_scenario("diagnostic");
        CHECK(cfg.noise.pixel == 0.0);
        CHECK(cfg.noise.object_position == 0.0);
        CHECK(cfg.object_points == 0);
    }
}

TEST_CASE("objects in the transition scenario stay observable") {
    const ScenarioConfig cfg = *builtin_scenario("transition");
    const GroundTruth truth = generate_scenario(cfg);
    const auto meas = observe_all(truth, cfg);
    std::map<int, int> seen;
    for (const auto& frame : meas) {
        for (const auto& obj : frame.objects) seen[obj.id]++;
    }
    // The principal actors (stopping, starting, swerving, lead) must be
    // measured nearly every frame.
    for (int id : {0, 1, 2, 4}) {
        CHECK(seen[id] >= cfg.frames - 5);
    }
}
