#include "slammot/cli_app.hpp"

#include "slammot/io.hpp"
#include "slammot/metrics.hpp"
#include "slammot/pipeline.hpp"
#include "slammot/simulator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace slammot {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::uint64_t trial_stream_seed(std::uint64_t base, int trial) {
    std::uint64_t x = base ^ 0x9e3779b97f4a7c15ULL;
    x += 0xbf58476d1ce4e5b9ULL * static_cast<std::uint64_t>(trial + 1);
    return x;
}

void scale_noise(ScenarioConfig& cfg, double scale) {
    cfg.noise.pixel *= scale;
    cfg.noise.object_position *= scale;
    cfg.noise.object_heading *= scale;
    cfg.noise.odometry_rotation *= scale;
    cfg.noise.odometry_translation *= scale;
}

double get_or(const json& j, const char* key, double current) {
    return j.contains(key) ? j.at(key).get<double>() : current;
}

// Optional JSON file overriding filter noise, information weights, solver
// and IMM settings.
void apply_config_overrides(PipelineConfig& pc, const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("config file not readable: " + path);
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config file: ") + e.what());
    }
    if (j.contains("filter_noise")) {
        const json& n = j["filter_noise"];
        NoiseConfig& q = pc.noise;
        q.q_position = get_or(n, "q_position", q.q_position);
        q.q_heading = get_or(n, "q_heading", q.q_heading);
        q.q_velocity = get_or(n, "q_velocity", q.q_velocity);
        q.q_turn_rate = get_or(n, "q_turn_rate", q.q_turn_rate);
        q.r_position = get_or(n, "r_position", q.r_position);
        q.r_heading = get_or(n, "r_heading", q.r_heading);
        q.init_position_var = get_or(n, "init_position_var", q.init_position_var);
        q.init_heading_var = get_or(n, "init_heading_var", q.init_heading_var);
        q.init_velocity_var = get_or(n, "init_velocity_var", q.init_velocity_var);
        q.init_turn_rate_var =
            get_or(n, "init_turn_rate_var", q.init_turn_rate_var);
        if (!q.valid()) {
            throw std::invalid_argument(
                "config file: filter_noise entries must be > 0");
        }
    }
    if (j.contains("info_weights")) {
        const json& n = j["info_weights"];
        InfoWeights& w = pc.info;
        w.reprojection = get_or(n, "reprojection", w.reprojection);
        w.odometry_rotation = get_or(n, "odometry_rotation", w.odometry_rotation);
        w.odometry_translation =
            get_or(n, "odometry_translation", w.odometry_translation);
        w.object_position = get_or(n, "object_position", w.object_position);
        w.object_heading = get_or(n, "object_heading", w.object_heading);
        w.system_position = get_or(n, "system_position", w.system_position);
        w.system_heading = get_or(n, "system_heading", w.system_heading);
        w.cst_velocity = get_or(n, "cst_velocity", w.cst_velocity);
        w.cst_turn_rate = get_or(n, "cst_turn_rate", w.cst_turn_rate);
        w.huber_delta = get_or(n, "huber_delta", w.huber_delta);
    }
    if (j.contains("solver")) {
        const json& n = j["solver"];
        SolverConfig& s = pc.solver;
        s.max_iterations =
            static_cast<int>(get_or(n, "max_iterations", s.max_iterations));
        s.initial_lambda = get_or(n, "initial_lambda", s.initial_lambda);
        s.lambda_factor = get_or(n, "lambda_factor", s.lambda_factor);
        s.relative_decrease_tol =
            get_or(n, "relative_decrease_tol", s.relative_decrease_tol);
        s.max_lambda = get_or(n, "max_lambda", s.max_lambda);
    }
    if (j.contains("imm")) {
        const json& n = j["imm"];
        pc.tau = get_or(n, "tau", pc.tau);
        pc.weight_floor = get_or(n, "weight_floor", pc.weight_floor);
        pc.coast_limit =
            static_cast<int>(get_or(n, "coast_limit", pc.coast_limit));
    }
}

FrameRange parse_segment(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw std::invalid_argument("segment must be 'a:b', got '" + text +
                                    "'");
    }
    FrameRange r;
    try {
        r.start = std::stoi(text.substr(0, colon));
        r.end = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("segment must be 'a:b', got '" + text +
                                    "'");
    }
    if (r.start < 0 || r.end < r.start) {
        throw std::invalid_argument("segment range invalid: " + text);
    }
    return r;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOpts {
    std::string scenario;
    std::string out = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    double noise_scale = 1.0;
    bool heavy_tail = false;
    bool export_ingest = false;
};

int cmd_simulate(const SimulateOpts& opts) {
    ScenarioConfig cfg = resolve_scenario(opts.scenario);
    if (opts.seed_set) cfg.seed = opts.seed;
    if (opts.heavy_tail) cfg.heavy_tail = true;
    scale_noise(cfg, opts.noise_scale);
    validate_scenario(cfg);

    const GroundTruth truth = generate_scenario(cfg);
    const std::vector<FrameMeasurements> meas = observe_all(truth, cfg);

    fs::create_directories(opts.out);
    const fs::path out(opts.out);
    {
        std::ofstream f(out / "scenario.json");
        f << scenario_to_json(cfg);
    }
    write_ground_truth_csv(out / "ground_truth.csv", truth);
    write_measurements_csv(out / "measurements.csv", meas);
    if (opts.export_ingest) {
        export_ingest_files(out / "detections.csv", out / "odometry.csv",
                            meas);
    }
    std::cout << "scenario " << cfg.name << ": " << cfg.frames
              << " frames, " << truth.landmarks.size() << " landmarks, "
              << cfg.objects.size() << " objects -> " << opts.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// run

struct RunOpts {
    std::string scenario;
    std::string measurements;
    std::string ground_truth;
    std::string out = "out";
    std::vector<std::string> levels = {"L0", "L1", "L2", "L3"};
    int trials = 1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int window = 10;
    int stride = 1;
    std::vector<std::string> segments;
    double noise_scale = 1.0;
    bool heavy_tail = false;
    int jobs = 0;
    double gate = 2.0;
    std::string config;
};

struct TrialResult {
    EstimateLog log;
    std::optional<std::string> error;
};

struct NamedRange {
    std::string name;
    FrameRange range;
};

int cmd_run(const RunOpts& opts) {
    std::vector<LevelId> levels;
    for (const auto& name : opts.levels) {
        const auto level = level_from_name(name);
        if (!level) {
            throw std::invalid_argument("unknown level '" + name + "'");
        }
        levels.push_back(*level);
    }
    if (levels.empty()) throw std::invalid_argument("no levels selected");
    if (opts.trials < 1) throw std::invalid_argument("trials must be >= 1");

    PipelineConfig pc;

    std::vector<NamedRange> segments;
    segments.push_back({"full", FrameRange{0, -1}});
    for (const auto& s : opts.segments) {
        segments.push_back({s, parse_segment(s)});
    }

    fs::create_directories(opts.out);
    const fs::path out(opts.out);

    GroundTruth truth;
    bool have_truth = false;
    std::string scenario_name;
    int trials = opts.trials;
    ScenarioConfig cfg;
    std::vector<FrameMeasurements> fixed_meas;

    if (!opts.measurements.empty()) {
        // Ingested mode: one fixed measurement stream, single trial.
        fixed_meas = read_measurements_csv(opts.measurements);
        if (fixed_meas.size() < 2) {
            throw std::invalid_argument("measurements file has < 2 frames");
        }
        scenario_name = "ingested";
        trials = 1;
        const fs::path sibling =
            fs::path(opts.measurements).parent_path() / "scenario.json";
        if (fs::exists(sibling)) {
            std::ifstream in(sibling);
            std::stringstream ss;
            ss << in.rdbuf();
            cfg = scenario_from_json(ss.str());
            pc = pipeline_config_for(cfg);
        }
        if (!opts.ground_truth.empty()) {
            truth = read_ground_truth_csv(opts.ground_truth);
            have_truth = true;
        }
    } else {
        if (opts.scenario.empty()) {
            throw std::invalid_argument(
                "run needs --scenario or --measurements");
        }
        cfg = resolve_scenario(opts.scenario);
        if (opts.seed_set) cfg.seed = opts.seed;
        if (opts.heavy_tail) cfg.heavy_tail = true;
        scale_noise(cfg, opts.noise_scale);
        validate_scenario(cfg);
        scenario_name = cfg.name;
        pc = pipeline_config_for(cfg);
        truth = generate_scenario(cfg);
        have_truth = true;
        write_ground_truth_csv(out / "ground_truth.csv", truth);
        segments.push_back(
            {"transition", FrameRange{cfg.segment_start, cfg.segment_end}});
    }
    pc.window = opts.window;
    pc.stride = opts.stride;
    apply_config_overrides(pc, opts.config);

    // One job per (level, trial); deterministic collection by index.
    struct Job {
        std::size_t level_index;
        int trial;
    };
    std::vector<Job> jobs;
    for (std::size_t li = 0; li < levels.size(); ++li) {
        for (int k = 0; k < trials; ++k) jobs.push_back({li, k});
    }
    std::vector<TrialResult> results(jobs.size());

    const int workers = std::max(
        1, opts.jobs > 0 ? opts.jobs
                         : static_cast<int>(
                               std::thread::hardware_concurrency()));
    std::mutex mutex;
    std::size_t next = 0;
    auto worker = [&] {
        while (true) {
            std::size_t ji;
            {
                std::lock_guard<std::mutex> lock(mutex);
                if (next >= jobs.size()) return;
                ji = next++;
            }
            const Job& job = jobs[ji];
            TrialResult& result = results[ji];
            try {
                const std::vector<FrameMeasurements> meas =
                    opts.measurements.empty()
                        ? observe_all_seeded(
                              truth, cfg,
                              trial_stream_seed(cfg.seed, job.trial))
                        : fixed_meas;
                result.log = run_level(levels[job.level_index], meas, pc);
            } catch (const std::exception& e) {
                result.error = e.what();
            }
        }
    };
    if (workers == 1 || jobs.size() == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Reports.
    std::vector<MetricRow> metric_rows;
    std::vector<TrackPoint> gt_points;
    if (have_truth) gt_points = truth_track_points(truth);
    json failed = json::array();

    for (std::size_t ji = 0; ji < jobs.size(); ++ji) {
        const Job& job = jobs[ji];
        const TrialResult& result = results[ji];
        const std::string level = level_name(levels[job.level_index]);
        if (result.error) {
            failed.push_back({{"level", level},
                              {"trial", job.trial},
                              {"error", *result.error}});
            continue;
        }
        char name[64];
        std::snprintf(name, sizeof(name), "estimates_%s_trial%03d.csv",
                      level.c_str(), job.trial);
        write_estimates_csv(out / name, result.log);
        if (!have_truth) continue;
        const std::vector<TrackPoint> est_points =
            estimate_track_points(result.log);
        for (const auto& seg : segments) {
            metric_rows.push_back(
                {level, scenario_name, job.trial, seg.name, "ape",
                 ape(result.log.ego, truth.ego, seg.range)});
            metric_rows.push_back(
                {level, scenario_name, job.trial, seg.name, "rpe",
                 rpe(result.log.ego, truth.ego, seg.range)});
            if (levels[job.level_index] != LevelId::L0) {
                metric_rows.push_back(
                    {level, scenario_name, job.trial, seg.name, "motp",
                     motp(est_points, gt_points, opts.gate, seg.range).motp});
            }
        }
    }

    write_metrics_csv(out / "metrics.csv", metric_rows);

    // Aggregate per (level, segment, metric).
    std::vector<ComparisonRow> comparison;
    for (const auto& level : opts.levels) {
        for (const auto& seg : segments) {
            for (const std::string metric : {"ape", "rpe", "motp"}) {
                std::vector<double> values;
                for (const auto& row : metric_rows) {
                    if (row.level == level && row.segment == seg.name &&
                        row.metric == metric) {
                        values.push_back(row.value);
                    }
                }
                if (values.empty()) continue;
                comparison.push_back({level, scenario_name, seg.name, metric,
                                      aggregate(values)});
            }
        }
    }
    write_comparison_csv(out / "comparison.csv", comparison);

    json report;
    report["scenario"] = scenario_name;
    report["levels"] = opts.levels;
    report["trials"] = trials;
    report["seed"] = opts.measurements.empty() ? cfg.seed : 0;
    report["window"] = opts.window;
    report["gate"] = opts.gate;
    report["noise_scale"] = opts.noise_scale;
    report["heavy_tail"] = opts.heavy_tail;
    json seg_json = json::object();
    for (const auto& seg : segments) {
        seg_json[seg.name] = {seg.range.start, seg.range.end};
    }
    report["segments"] = seg_json;
    report["failed"] = failed;
    {
        std::ofstream f(out / "report.json");
        f << report.dump(2) << "\n";
    }

    // Comparison table on stdout, one block per segment.
    for (const auto& seg : segments) {
        std::printf("segment %-12s %-5s", seg.name.c_str(), "level");
        std::printf(" %12s %12s %12s\n", "ape(m)", "rpe(m/f)", "motp(m)");
        for (const auto& level : opts.levels) {
            double vals[3] = {-1.0, -1.0, -1.0};
            int i = 0;
            for (const std::string metric : {"ape", "rpe", "motp"}) {
                for (const auto& row : comparison) {
                    if (row.level == level && row.segment == seg.name &&
                        row.metric == metric) {
                        vals[i] = row.stats.mean;
                    }
                }
                ++i;
            }
            std::printf("%-20s %-5s", "", level.c_str());
            for (double v : vals) {
                if (v < 0.0) {
                    std::printf(" %12s", "-");
                } else {
                    std::printf(" %12.5f", v);
                }
            }
            std::printf("\n");
        }
    }

    return failed.empty() ? kExitOk : kExitRuntime;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestOpts {
    std::string detections;
    std::string odometry;
    std::string out = "out";
};

int cmd_ingest(const IngestOpts& opts) {
    const auto detections = read_detections_csv(opts.detections);
    const auto odometry = read_odometry_csv(opts.odometry);
    const auto meas = ingest_to_measurements(detections, odometry);
    fs::create_directories(opts.out);
    write_measurements_csv(fs::path(opts.out) / "measurements.csv", meas);
    std::cout << "ingested " << meas.size() << " frames, "
              << detections.size() << " detections -> " << opts.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// plot

struct PlotOpts {
    std::string report;
    std::string out;
};

struct Series {
    std::string name;
    std::string color;
    std::vector<Eigen::Vector2d> points;
};

void write_svg(const fs::path& path, const std::vector<Series>& series,
               const std::string& x_label, const std::string& y_label,
               std::optional<std::pair<double, double>> band_x) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series) {
        for (const auto& p : s.points) {
            xmin = std::min(xmin, p.x());
            xmax = std::max(xmax, p.x());
            ymin = std::min(ymin, p.y());
            ymax = std::max(ymax, p.y());
        }
    }
    if (xmin > xmax) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    const double pad_x = 0.05 * std::max(xmax - xmin, 1e-9);
    const double pad_y = 0.05 * std::max(ymax - ymin, 1e-9);
    xmin -= pad_x;
    xmax += pad_x;
    ymin -= pad_y;
    ymax += pad_y;

    const double width = 800, height = 600, margin = 60;
    auto sx = [&](double x) {
        return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin);
    };
    auto sy = [&](double y) {
        return height - margin -
               (y - ymin) / (ymax - ymin) * (height - 2 * margin);
    };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
        << "' height='" << height << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    if (band_x) {
        out << "<rect x='" << sx(band_x->first) << "' y='" << margin
            << "' width='" << sx(band_x->second) - sx(band_x->first)
            << "' height='" << height - 2 * margin
            << "' fill='#888888' fill-opacity='0.15'/>\n";
    }
    out << "<rect x='" << margin << "' y='" << margin << "' width='"
        << width - 2 * margin << "' height='" << height - 2 * margin
        << "' fill='none' stroke='#333'/>\n";
    out << "<text x='" << width / 2 << "' y='" << height - 15
        << "' text-anchor='middle' font-size='14'>" << x_label
        << "</text>\n";
    out << "<text x='20' y='" << height / 2
        << "' text-anchor='middle' font-size='14' transform='rotate(-90 20 "
        << height / 2 << ")'>" << y_label << "</text>\n";
    double legend_y = margin + 10;
    for (const auto& s : series) {
        out << "<polyline fill='none' stroke='" << s.color
            << "' stroke-width='1.5' points='";
        for (const auto& p : s.points) {
            out << sx(p.x()) << ',' << sy(p.y()) << ' ';
        }
        out << "'/>\n";
        out << "<line x1='" << width - margin - 120 << "' y1='" << legend_y
            << "' x2='" << width - margin - 95 << "' y2='" << legend_y
            << "' stroke='" << s.color << "' stroke-width='2'/>\n";
        out << "<text x='" << width - margin - 88 << "' y='" << legend_y + 4
            << "' font-size='13'>" << s.name << "</text>\n";
        legend_y += 18;
    }
    out << "</svg>\n";
}

int cmd_plot(const PlotOpts& opts) {
    const fs::path report_dir(opts.report);
    const fs::path report_file = report_dir / "report.json";
    const fs::path truth_file = report_dir / "ground_truth.csv";
    if (!fs::exists(report_file) || !fs::exists(truth_file)) {
        throw std::invalid_argument("report dir missing report.json or "
                                    "ground_truth.csv: " +
                                    report_dir.string());
    }
    json report;
    {
        std::ifstream in(report_file);
        report = json::parse(in);
    }
    const GroundTruth truth = read_ground_truth_csv(truth_file);

    const std::map<std::string, std::string> palette = {
        {"L0", "#1f77b4"},
        {"L1", "#2ca02c"},
        {"L2", "#ff7f0e"},
        {"L3", "#d62728"}};

    std::vector<Series> traj;
    std::vector<Series> errs;
    {
        Series s{"truth", "#222222", {}};
        for (const auto& pose : truth.ego) {
            s.points.emplace_back(pose.translation.x(), pose.translation.z());
        }
        traj.push_back(std::move(s));
    }
    for (const auto& level : report["levels"]) {
        const std::string name = level.get<std::string>();
        char file[64];
        std::snprintf(file, sizeof(file), "estimates_%s_trial000.csv",
                      name.c_str());
        const fs::path path = report_dir / file;
        if (!fs::exists(path)) continue;
        const EstimateLog log = read_estimates_csv(path);
        Series st{name, palette.at(name), {}};
        Series se{name, palette.at(name), {}};
        for (std::size_t t = 0; t < log.ego.size(); ++t) {
            st.points.emplace_back(log.ego[t].translation.x(),
                                   log.ego[t].translation.z());
            if (t < truth.ego.size()) {
                se.points.emplace_back(
                    static_cast<double>(t),
                    (log.ego[t].translation - truth.ego[t].translation)
                        .norm());
            }
        }
        traj.push_back(std::move(st));
        errs.push_back(std::move(se));
    }
    if (traj.size() <= 1) {
        throw std::invalid_argument("no estimate files found in " +
                                    report_dir.string());
    }

    std::optional<std::pair<double, double>> band;
    if (report.contains("segments") &&
        report["segments"].contains("transition")) {
        const auto& seg = report["segments"]["transition"];
        band = {{seg[0].get<double>(), seg[1].get<double>()}};
    }

    const fs::path out_dir = opts.out.empty() ? report_dir : fs::path(opts.out);
    fs::create_directories(out_dir);
    write_svg(out_dir / "trajectory.svg", traj, "x (m)", "z (m)",
              std::nullopt);
    write_svg(out_dir / "errors.svg", errs, "frame",
              "ego translation error (m)", band);
    std::cout << "wrote " << (out_dir / "trajectory.svg").string() << " and "
              << (out_dir / "errors.svg").string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// schema

int cmd_schema(const std::vector<std::string>& files) {
    for (const auto& file : files) {
        const std::string name = check_schema(file);
        std::cout << file << ": " << name << "\n";
    }
    return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{
        "Sensor-agnostic SLAMMOT backend: synthetic scenarios, four "
        "methodology levels, and metric reports"};
    app.require_subcommand(1);

    SimulateOpts sim;
    CLI::App* simulate =
        app.add_subcommand("simulate", "generate a scenario to CSV files");
    simulate->add_option("--scenario", sim.scenario,
                         "builtin name or scenario JSON path")
        ->required();
    simulate->add_option("--out", sim.out, "output directory");
    simulate->add_option("--seed", sim.seed, "override the scenario seed")
        ->each([&](const std::string&) { sim.seed_set = true; });
    simulate->add_option("--noise-scale", sim.noise_scale,
                         "multiplier on all noise sigmas");
    simulate->add_flag("--heavy-tail", sim.heavy_tail,
                       "5% of object measurements at 5 sigma");
    simulate->add_flag("--export-ingest", sim.export_ingest,
                       "also write detections.csv and odometry.csv");

    RunOpts run;
    CLI::App* runc = app.add_subcommand(
        "run", "run methodology levels and write metric reports");
    runc->add_option("--scenario", run.scenario,
                     "builtin name or scenario JSON path");
    runc->add_option("--measurements", run.measurements,
                     "run on a measurements.csv instead of simulating");
    runc->add_option("--ground-truth", run.ground_truth,
                     "ground_truth.csv for metrics in --measurements mode");
    runc->add_option("--out", run.out, "output directory");
    runc->add_option("--levels", run.levels, "subset of L0 L1 L2 L3")
        ->delimiter(',');
    runc->add_option("--trials", run.trials, "Monte Carlo trials");
    runc->add_option("--seed", run.seed, "override the scenario seed")
        ->each([&](const std::string&) { run.seed_set = true; });
    runc->add_option("--window", run.window, "sliding window length");
    runc->add_option("--stride", run.stride, "frames between window solves");
    runc->add_option("--segment", run.segments,
                     "extra evaluation segment a:b (repeatable)");
    runc->add_option("--noise-scale", run.noise_scale,
                     "multiplier on all noise sigmas");
    runc->add_flag("--heavy-tail", run.heavy_tail,
                   "5% of object measurements at 5 sigma");
    runc->add_option("--jobs", run.jobs, "worker threads (0 = hardware)");
    runc->add_option("--gate", run.gate, "MOTP match gate in meters");
    runc->add_option("--config", run.config,
                     "JSON overrides for noise/weights/solver/imm");

    IngestOpts ingest;
    CLI::App* ingestc = app.add_subcommand(
        "ingest", "convert external detections + odometry to measurements");
    ingestc->add_option("--detections", ingest.detections, "detections.csv")
        ->required();
    ingestc->add_option("--odometry", ingest.odometry, "odometry.csv")
        ->required();
    ingestc->add_option("--out", ingest.out, "output directory");

    PlotOpts plot;
    CLI::App* plotc =
        app.add_subcommand("plot", "render trajectory and error SVGs");
    plotc->add_option("--report", plot.report, "directory written by run")
        ->required();
    plotc->add_option("--out", plot.out, "output directory (default report)");

    std::vector<std::string> schema_files;
    CLI::App* schemac =
        app.add_subcommand("schema", "validate CSV headers");
    schemac->add_option("files", schema_files, "CSV files to check")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (runc->parsed()) return cmd_run(run);
        if (ingestc->parsed()) return cmd_ingest(ingest);
        if (plotc->parsed()) return cmd_plot(plot);
        if (schemac->parsed()) return cmd_schema(schema_files);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitValidation;
}

}  // namespace slammot
