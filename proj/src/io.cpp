#include "slammot/io.hpp"

#include "slammot/angles.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace slammot {

namespace {

using nlohmann::json;

std::string fmt(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open for reading: " + path.string());
    }
    return in;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double to_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(where + ": bad number '" + s + "'");
    }
}

int to_int(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(where + ": bad integer '" + s + "'");
    }
}

void write_pose_cells(std::ostream& os, const Se3Pose& pose) {
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) os << ',' << fmt(pose.rotation(r, c));
        os << ',' << fmt(pose.translation[r]);
    }
}

Se3Pose pose_from_cells(const std::vector<std::string>& cells, int offset,
                        const std::string& where) {
    Se3Pose pose;
    int i = offset;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            pose.rotation(r, c) = to_double(cells[i++], where);
        }
        pose.translation[r] = to_double(cells[i++], where);
    }
    return pose;
}

constexpr const char* kMeasurementsHeader =
    "frame,kind,id,v1,v2,v3,v4,v5,v6,v7,v8,v9,v10,v11,v12";
constexpr const char* kGroundTruthHeader =
    "frame,kind,id,v1,v2,v3,v4,v5,v6,v7,v8,v9,v10,v11,v12";
constexpr const char* kEstimatesHeader =
    "frame,kind,id,v1,v2,v3,v4,v5,v6,v7,v8,v9,v10,v11,v12,v13";
constexpr const char* kMetricsHeader =
    "level,scenario,trial,segment,metric,value";
constexpr const char* kComparisonHeader =
    "level,scenario,segment,metric,mean,stddev,median,count";
constexpr const char* kDetectionsHeader =
    "frame,track_id,x,y,z,theta,score";
constexpr const char* kOdometryHeader =
    "frame,r11,r12,r13,r21,r22,r23,r31,r32,r33,t1,t2,t3";

}  // namespace

// ---------------------------------------------------------------------------
// JSON scenario configs.

namespace {

ModelId model_from_string(const std::string& s, const std::string& field) {
    if (s == "CP") return ModelId::CP;
    if (s == "CV") return ModelId::CV;
    if (s == "CTRV") return ModelId::CTRV;
    throw std::invalid_argument("scenario config: " + field +
                                ": unknown model '" + s + "'");
}

template <typename T>
T get_field(const json& j, const std::string& field) {
    if (!j.contains(field)) {
        throw std::invalid_argument("scenario config: missing field '" +
                                    field + "'");
    }
    try {
        return j.at(field).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument("scenario config: field '" + field +
                                    "' has the wrong type");
    }
}

}  // namespace

std::string scenario_to_json(const ScenarioConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["frames"] = cfg.frames;
    j["dt"] = cfg.dt;
    j["intrinsics"] = {{"fx", cfg.intrinsics.fx},
                       {"fy", cfg.intrinsics.fy},
                       {"cx", cfg.intrinsics.cx},
                       {"cy", cfg.intrinsics.cy}};
    j["image_width"] = cfg.image_width;
    j["image_height"] = cfg.image_height;
    j["ego_start"] = {{"x", cfg.ego_x0},
                      {"z", cfg.ego_z0},
                      {"heading", cfg.ego_heading0}};
    j["ego_segments"] = json::array();
    for (const auto& s : cfg.ego_segments) {
        j["ego_segments"].push_back({{"frames", s.frames},
                                     {"speed", s.speed},
                                     {"turn_rate", s.turn_rate}});
    }
    j["landmark_count"] = cfg.landmark_count;
    j["landmark_bounds"] = {{"x_min", cfg.landmark_bounds.x_min},
                            {"x_max", cfg.landmark_bounds.x_max},
                            {"y_min", cfg.landmark_bounds.y_min},
                            {"y_max", cfg.landmark_bounds.y_max},
                            {"z_min", cfg.landmark_bounds.z_min},
                            {"z_max", cfg.landmark_bounds.z_max}};
    j["objects"] = json::array();
    for (const auto& o : cfg.objects) {
        json jo = {{"id", o.id},          {"x0", o.x0},
                   {"z0", o.z0},          {"theta0", o.theta0},
                   {"y", o.y},            {"first_frame", o.first_frame},
                   {"segments", json::array()}};
        for (const auto& s : o.segments) {
            jo["segments"].push_back({{"model", model_name(s.model)},
                                      {"v", s.v},
                                      {"omega", s.omega},
                                      {"frames", s.frames}});
        }
        j["objects"].push_back(jo);
    }
    j["object_points"] = cfg.object_points;
    j["noise"] = {{"pixel", cfg.noise.pixel},
                  {"object_position", cfg.noise.object_position},
                  {"object_heading", cfg.noise.object_heading},
                  {"odometry_rotation", cfg.noise.odometry_rotation},
                  {"odometry_translation", cfg.noise.odometry_translation}};
    j["heavy_tail"] = cfg.heavy_tail;
    j["seed"] = cfg.seed;
    j["transition_segment"] = {cfg.segment_start, cfg.segment_end};
    return j.dump(2) + "\n";
}

ScenarioConfig scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("scenario config: ") +
                                    e.what());
    }
    ScenarioConfig cfg;
    cfg.name = get_field<std::string>(j, "name");
    cfg.frames = get_field<int>(j, "frames");
    cfg.dt = get_field<double>(j, "dt");
    {
        const json ji = get_field<json>(j, "intrinsics");
        cfg.intrinsics.fx = get_field<double>(ji, "fx");
        cfg.intrinsics.fy = get_field<double>(ji, "fy");
        cfg.intrinsics.cx = get_field<double>(ji, "cx");
        cfg.intrinsics.cy = get_field<double>(ji, "cy");
    }
    cfg.image_width = get_field<int>(j, "image_width");
    cfg.image_height = get_field<int>(j, "image_height");
    {
        const json je = get_field<json>(j, "ego_start");
        cfg.ego_x0 = get_field<double>(je, "x");
        cfg.ego_z0 = get_field<double>(je, "z");
        cfg.ego_heading0 = get_field<double>(je, "heading");
    }
    for (const json& js : get_field<json>(j, "ego_segments")) {
        EgoSegment s;
        s.frames = get_field<int>(js, "frames");
        s.speed = get_field<double>(js, "speed");
        s.turn_rate = get_field<double>(js, "turn_rate");
        cfg.ego_segments.push_back(s);
    }
    cfg.landmark_count = get_field<int>(j, "landmark_count");
    {
        const json jb = get_field<json>(j, "landmark_bounds");
        cfg.landmark_bounds.x_min = get_field<double>(jb, "x_min");
        cfg.landmark_bounds.x_max = get_field<double>(jb, "x_max");
        cfg.landmark_bounds.y_min = get_field<double>(jb, "y_min");
        cfg.landmark_bounds.y_max = get_field<double>(jb, "y_max");
        cfg.landmark_bounds.z_min = get_field<double>(jb, "z_min");
        cfg.landmark_bounds.z_max = get_field<double>(jb, "z_max");
    }
    for (const json& jo : get_field<json>(j, "objects")) {
        ObjectScript o;
        o.id = get_field<int>(jo, "id");
        o.x0 = get_field<double>(jo, "x0");
        o.z0 = get_field<double>(jo, "z0");
        o.theta0 = get_field<double>(jo, "theta0");
        o.y = get_field<double>(jo, "y");
        o.first_frame = get_field<int>(jo, "first_frame");
        for (const json& js : get_field<json>(jo, "segments")) {
            ObjectSegment s;
            s.model = model_from_string(get_field<std::string>(js, "model"),
                                        "objects.segments.model");
            s.v = get_field<double>(js, "v");
            s.omega = get_field<double>(js, "omega");
            s.frames = get_field<int>(js, "frames");
            o.segments.push_back(s);
        }
        cfg.objects.push_back(std::move(o));
    }
    cfg.object_points = get_field<int>(j, "object_points");
    {
        const json jn = get_field<json>(j, "noise");
        cfg.noise.pixel = get_field<double>(jn, "pixel");
        cfg.noise.object_position = get_field<double>(jn, "object_position");
        cfg.noise.object_heading = get_field<double>(jn, "object_heading");
        cfg.noise.odometry_rotation =
            get_field<double>(jn, "odometry_rotation");
        cfg.noise.odometry_translation =
            get_field<double>(jn, "odometry_translation");
    }
    cfg.heavy_tail = get_field<bool>(j, "heavy_tail");
    cfg.seed = get_field<std::uint64_t>(j, "seed");
    {
        const json js = get_field<json>(j, "transition_segment");
        if (!js.is_array() || js.size() != 2) {
            throw std::invalid_argument(
                "scenario config: field 'transition_segment' must be [a, b]");
        }
        cfg.segment_start = js[0].get<int>();
        cfg.segment_end = js[1].get<int>();
    }
    validate_scenario(cfg);
    return cfg;
}

ScenarioConfig resolve_scenario(const std::string& name_or_path) {
    if (auto builtin = builtin_scenario(name_or_path)) {
        return *builtin;
    }
    if (!std::filesystem::exists(name_or_path)) {
        throw std::invalid_argument("unknown scenario '" + name_or_path +
                                    "' (not a builtin, not a file)");
    }
    std::ifstream in = open_in(name_or_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json(ss.str());
}

// ---------------------------------------------------------------------------
// Measurements CSV.

void write_measurements_csv(const std::filesystem::path& path,
                            const std::vector<FrameMeasurements>& meas) {
    std::ofstream out = open_out(path);
    out << kMeasurementsHeader << '\n';
    for (const auto& frame : meas) {
        for (const auto& px : frame.pixels) {
            out << frame.frame << ",pixel," << px.id << ','
                << fmt(px.pixel.x()) << ',' << fmt(px.pixel.y()) << ','
                << (px.dynamic ? 1 : 0) << ",,,,,,,,,\n";
        }
        out << frame.frame << ",odo,0";
        write_pose_cells(out, frame.odometry);
        out << '\n';
        for (const auto& obj : frame.objects) {
            out << frame.frame << ",obj," << obj.id << ','
                << fmt(obj.position_cam.x()) << ','
                << fmt(obj.position_cam.y()) << ','
                << fmt(obj.position_cam.z()) << ',' << fmt(obj.theta_cam)
                << ",,,,,,,,\n";
        }
    }
}

std::vector<FrameMeasurements> read_measurements_csv(
    const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != kMeasurementsHeader) {
        throw std::invalid_argument(path.string() +
                                    ": bad measurements header");
    }
    std::map<int, FrameMeasurements> frames;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where =
            path.string() + ":" + std::to_string(line_no);
        const auto cells = split(line);
        if (cells.size() < 4) {
            throw std::invalid_argument(where + ": too few columns");
        }
        const int frame = to_int(cells[0], where);
        FrameMeasurements& fm = frames[frame];
        fm.frame = frame;
        const std::string& kind = cells[1];
        if (kind == "pixel") {
            PixelObservation px;
            px.id = to_int(cells[2], where);
            px.pixel = {to_double(cells[3], where), to_double(cells[4], where)};
            px.dynamic = to_int(cells[5], where) != 0;
            fm.pixels.push_back(px);
        } else if (kind == "odo") {
            fm.odometry = pose_from_cells(cells, 3, where);
            fm.odometry_absolute = frame == 0;
        } else if (kind == "obj") {
            ObjectObservation obs;
            obs.id = to_int(cells[2], where);
            obs.position_cam = {to_double(cells[3], where),
                                to_double(cells[4], where),
                                to_double(cells[5], where)};
            obs.theta_cam = to_double(cells[6], where);
            fm.objects.push_back(obs);
        } else {
            throw std::invalid_argument(where + ": unknown kind '" + kind +
                                        "'");
        }
    }
    std::vector<FrameMeasurements> out;
    out.reserve(frames.size());
    for (auto& [frame, fm] : frames) out.push_back(std::move(fm));
    return out;
}

// ---------------------------------------------------------------------------
// Ground truth CSV.

void write_ground_truth_csv(const std::filesystem::path& path,
                            const GroundTruth& truth) {
    std::ofstream out = open_out(path);
    out << kGroundTruthHeader << '\n';
    for (std::size_t i = 0; i < truth.landmarks.size(); ++i) {
        out << "-1,lm," << i << ',' << fmt(truth.landmarks[i].x()) << ','
            << fmt(truth.landmarks[i].y()) << ',' << fmt(truth.landmarks[i].z())
            << ",,,,,,,,,\n";
    }
    for (std::size_t t = 0; t < truth.ego.size(); ++t) {
        out << t << ",ego,0";
        write_pose_cells(out, truth.ego[t]);
        out << '\n';
    }
    for (const auto& [id, frames] : truth.objects) {
        for (std::size_t t = 0; t < frames.size(); ++t) {
            if (!frames[t].active) continue;
            const FullState& s = frames[t].state;
            out << t << ",obj," << id << ',' << fmt(s.x) << ','
                << fmt(truth.object_y.count(id) ? truth.object_y.at(id) : 0.0)
                << ',' << fmt(s.z) << ',' << fmt(s.theta) << ',' << fmt(s.v)
                << ',' << fmt(s.omega) << ','
                << static_cast<int>(frames[t].model) << ",,,,,\n";
        }
    }
}

GroundTruth read_ground_truth_csv(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != kGroundTruthHeader) {
        throw std::invalid_argument(path.string() +
                                    ": bad ground truth header");
    }
    GroundTruth truth;
    std::map<int, Se3Pose> ego;
    std::map<int, std::map<int, ObjectTruthFrame>> objects;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where =
            path.string() + ":" + std::to_string(line_no);
        const auto cells = split(line);
        const int frame = to_int(cells[0], where);
        const std::string& kind = cells[1];
        if (kind == "lm") {
            truth.landmarks.emplace_back(to_double(cells[3], where),
                                         to_double(cells[4], where),
                                         to_double(cells[5], where));
        } else if (kind == "ego") {
            ego[frame] = pose_from_cells(cells, 3, where);
        } else if (kind == "obj") {
            const int id = to_int(cells[2], where);
            ObjectTruthFrame f;
            f.active = true;
            f.state.x = to_double(cells[3], where);
            truth.object_y[id] = to_double(cells[4], where);
            f.state.z = to_double(cells[5], where);
            f.state.theta = to_double(cells[6], where);
            f.state.v = to_double(cells[7], where);
            f.state.omega = to_double(cells[8], where);
            f.model = static_cast<ModelId>(to_int(cells[9], where));
            objects[id][frame] = f;
        } else {
            throw std::invalid_argument(where + ": unknown kind '" + kind +
                                        "'");
        }
    }
    truth.ego.reserve(ego.size());
    for (auto& [frame, pose] : ego) {
        truth.ego.push_back(pose);
        truth.ego_heading.push_back(heading_from_rotation(pose.rotation));
    }
    const int frames = static_cast<int>(truth.ego.size());
    for (auto& [id, by_frame] : objects) {
        std::vector<ObjectTruthFrame> series(frames);
        for (auto& [frame, f] : by_frame) {
            if (frame >= 0 && frame < frames) series[frame] = f;
        }
        truth.objects[id] = std::move(series);
    }
    return truth;
}

// ---------------------------------------------------------------------------
// Estimates CSV.

void write_estimates_csv(const std::filesystem::path& path,
                         const EstimateLog& log) {
    std::ofstream out = open_out(path);
    out << kEstimatesHeader << '\n';
    for (std::size_t t = 0; t < log.ego.size(); ++t) {
        out << t << ",ego,0";
        write_pose_cells(out, log.ego[t]);
        out << ','
            << fmt(t < log.frame_time_ms.size() ? log.frame_time_ms[t] : 0.0)
            << '\n';
    }
    for (const auto& [id, entries] : log.objects) {
        for (const auto& e : entries) {
            double w[3] = {0.0, 0.0, 0.0};
            for (std::size_t mi = 0; mi < e.models.size(); ++mi) {
                w[static_cast<int>(e.models[mi])] = e.weights[mi];
            }
            out << e.frame << ",obj," << id << ',' << fmt(e.state.x) << ",0,"
                << fmt(e.state.z) << ',' << fmt(e.state.theta) << ','
                << fmt(e.state.v) << ',' << fmt(e.state.omega) << ','
                << fmt(w[0]) << ',' << fmt(w[1]) << ',' << fmt(w[2])
                << ",,,\n";
        }
    }
}

EstimateLog read_estimates_csv(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != kEstimatesHeader) {
        throw std::invalid_argument(path.string() + ": bad estimates header");
    }
    EstimateLog log;
    std::map<int, Se3Pose> ego;
    std::map<int, double> times;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where =
            path.string() + ":" + std::to_string(line_no);
        const auto cells = split(line);
        const int frame = to_int(cells[0], where);
        const std::string& kind = cells[1];
        if (kind == "ego") {
            ego[frame] = pose_from_cells(cells, 3, where);
            times[frame] = to_double(cells[15], where);
        } else if (kind == "obj") {
            ObjectLogEntry e;
            e.frame = frame;
            e.state.x = to_double(cells[3], where);
            e.state.z = to_double(cells[5], where);
            e.state.theta = to_double(cells[6], where);
            e.state.v = to_double(cells[7], where);
            e.state.omega = to_double(cells[8], where);
            e.models = {ModelId::CP, ModelId::CV, ModelId::CTRV};
            e.weights.resize(3);
            for (int i = 0; i < 3; ++i) {
                e.weights[i] = to_double(cells[9 + i], where);
            }
            log.objects[to_int(cells[2], where)].push_back(std::move(e));
        } else {
            throw std::invalid_argument(where + ": unknown kind '" + kind +
                                        "'");
        }
    }
    for (const auto& [frame, pose] : ego) {
        log.ego.push_back(pose);
        log.frame_time_ms.push_back(times[frame]);
    }
    return log;
}

// ---------------------------------------------------------------------------
// Metrics CSV.

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<MetricRow>& rows) {
    std::ofstream out = open_out(path);
    out << kMetricsHeader << '\n';
    for (const auto& r : rows) {
        out << r.level << ',' << r.scenario << ',' << r.trial << ','
            << r.segment << ',' << r.metric << ',' << fmt(r.value) << '\n';
    }
}

std::vector<MetricRow> read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != kMetricsHeader) {
        throw std::invalid_argument(path.string() + ": bad metrics header");
    }
    std::vector<MetricRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where =
            path.string() + ":" + std::to_string(line_no);
        const auto cells = split(line);
        if (cells.size() != 6) {
            throw std::invalid_argument(where + ": expected 6 columns");
        }
        rows.push_back({cells[0], cells[1], to_int(cells[2], where), cells[3],
                        cells[4], to_double(cells[5], where)});
    }
    return rows;
}

void write_comparison_csv(const std::filesystem::path& path,
                          const std::vector<ComparisonRow>& rows) {
    std::ofstream out = open_out(path);
    out << kComparisonHeader << '\n';
    for (const auto& r : rows) {
        out << r.level << ',' << r.scenario << ',' << r.segment << ','
            << r.metric << ',' << fmt(r.stats.mean) << ','
            << fmt(r.stats.stddev) << ',' << fmt(r.stats.median) << ','
            << r.stats.count << '\n';
    }
}

// ---------------------------------------------------------------------------
// Ingest adapter.

std::vector<IngestDetection> read_detections_csv(
    const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != kDetectionsHeader) {
        throw std::invalid_argument(path.string() + ": bad detections header");
    }
    std::vector<IngestDetection> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where =
            path.string() + ":" + std::to_string(line_no);
        const auto cells = split(line);
        if (cells.size() != 7) {
            throw std::invalid_argument(where + ": expected 7 columns");
        }
        IngestDetection d;
        d.frame = to_int(cells[0], where);
        d.track_id = to_int(cells[1], where);
        d.x = to_double(cells[2], where);
        d.y = to_double(cells[3], where);
        d.z = to_double(cells[4], where);
        d.theta = to_double(cells[5], where);
        d.score = to_double(cells[6], where);
        if (!std::isfinite(d.x) || !std::isfinite(d.y) ||
            !std::isfinite(d.z) || !std::isfinite(d.theta)) {
            throw std::invalid_argument(where + ": non-finite value");
        }
        rows.push_back(d);
    }
    return rows;
}

std::vector<IngestOdometry> read_odometry_csv(
    const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != kOdometryHeader) {
        throw std::invalid_argument(path.string() + ": bad odometry header");
    }
    std::vector<IngestOdometry> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where =
            path.string() + ":" + std::to_string(line_no);
        const auto cells = split(line);
        if (cells.size() != 13) {
            throw std::invalid_argument(where + ": expected 13 columns");
        }
        IngestOdometry o;
        o.frame = to_int(cells[0], where);
        int i = 1;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                o.pose.rotation(r, c) = to_double(cells[i++], where);
            }
        }
        for (int r = 0; r < 3; ++r) {
            o.pose.translation[r] = to_double(cells[i++], where);
        }
        rows.push_back(o);
    }
    return rows;
}

void write_detections_csv(const std::filesystem::path& path,
                          const std::vector<IngestDetection>& rows) {
    std::ofstream out = open_out(path);
    out << kDetectionsHeader << '\n';
    for (const auto& d : rows) {
        out << d.frame << ',' << d.track_id << ',' << fmt(d.x) << ','
            << fmt(d.y) << ',' << fmt(d.z) << ',' << fmt(d.theta) << ','
            << fmt(d.score) << '\n';
    }
}

void write_odometry_csv(const std::filesystem::path& path,
                        const std::vector<IngestOdometry>& rows) {
    std::ofstream out = open_out(path);
    out << kOdometryHeader << '\n';
    for (const auto& o : rows) {
        out << o.frame;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) out << ',' << fmt(o.pose.rotation(r, c));
        }
        for (int r = 0; r < 3; ++r) out << ',' << fmt(o.pose.translation[r]);
        out << '\n';
    }
}

std::vector<FrameMeasurements> ingest_to_measurements(
    const std::vector<IngestDetection>& detections,
    const std::vector<IngestOdometry>& odometry) {
    if (odometry.empty()) {
        throw std::invalid_argument("ingest: odometry is empty");
    }
    for (std::size_t i = 0; i < odometry.size(); ++i) {
        if (odometry[i].frame != static_cast<int>(i)) {
            throw std::invalid_argument(
                "ingest: odometry frames must be contiguous from 0");
        }
    }
    std::vector<FrameMeasurements> out(odometry.size());
    for (std::size_t t = 0; t < odometry.size(); ++t) {
        out[t].frame = static_cast<int>(t);
        if (t == 0) {
            out[t].odometry_absolute = true;
            out[t].odometry = odometry[0].pose;
        } else {
            out[t].odometry =
                odometry[t].pose * odometry[t - 1].pose.inverse();
        }
    }
    for (const auto& d : detections) {
        if (d.frame < 0 || d.frame >= static_cast<int>(out.size())) {
            throw std::invalid_argument(
                "ingest: detection frame outside the odometry range");
        }
        ObjectObservation obs;
        obs.id = d.track_id;
        obs.position_cam = {d.x, d.y, d.z};
        obs.theta_cam = wrap_angle(d.theta);
        out[d.frame].objects.push_back(obs);
    }
    return out;
}

void export_ingest_files(const std::filesystem::path& detections_path,
                         const std::filesystem::path& odometry_path,
                         const std::vector<FrameMeasurements>& meas) {
    std::vector<IngestDetection> detections;
    std::vector<IngestOdometry> odometry;
    Se3Pose pose;
    for (const auto& frame : meas) {
        pose = frame.odometry_absolute ? frame.odometry
                                       : frame.odometry * pose;
        odometry.push_back({frame.frame, pose});
        for (const auto& obj : frame.objects) {
            detections.push_back({frame.frame, obj.id, obj.position_cam.x(),
                                  obj.position_cam.y(), obj.position_cam.z(),
                                  obj.theta_cam, 1.0});
        }
    }
    write_detections_csv(detections_path, detections);
    write_odometry_csv(odometry_path, odometry);
}

// ---------------------------------------------------------------------------
// Schema check.

std::string check_schema(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::string header;
    if (!std::getline(in, header)) {
        throw std::invalid_argument(path.string() + ": empty file");
    }
    const std::pair<const char*, const char*> schemas[] = {
        {kEstimatesHeader, "estimates"},
        {kMeasurementsHeader, "measurements-or-ground-truth"},
        {kMetricsHeader, "metrics"},
        {kComparisonHeader, "comparison"},
        {kDetectionsHeader, "detections"},
        {kOdometryHeader, "odometry"},
    };
    for (const auto& [expected, name] : schemas) {
        if (header == expected) return name;
    }
    throw std::invalid_argument(path.string() +
                                ": header matches no known schema");
}

}  // namespace slammot
