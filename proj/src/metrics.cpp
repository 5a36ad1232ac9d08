#include "slammot/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

namespace slammot {

namespace {

void check_lengths(const std::vector<Se3Pose>& est,
                   const std::vector<Se3Pose>& gt, std::size_t min_len) {
    if (est.size() != gt.size()) {
        throw std::invalid_argument("trajectory length mismatch");
    }
    if (est.size() < min_len) {
        throw std::invalid_argument("trajectory too short");
    }
}

int range_end(const FrameRange& range, int frames) {
    return range.end < 0 ? frames - 1 : std::min(range.end, frames - 1);
}

}  // namespace

double ape(const std::vector<Se3Pose>& est, const std::vector<Se3Pose>& gt,
           const FrameRange& range) {
    check_lengths(est, gt, 1);
    const int last = range_end(range, static_cast<int>(est.size()));
    double sum = 0.0;
    int count = 0;
    for (int t = std::max(0, range.start); t <= last; ++t) {
        sum += (est[t].translation - gt[t].translation).squaredNorm();
        ++count;
    }
    if (count == 0) throw std::invalid_argument("ape: empty frame range");
    return std::sqrt(sum / count);
}

double rpe(const std::vector<Se3Pose>& est, const std::vector<Se3Pose>& gt,
           const FrameRange& range) {
    check_lengths(est, gt, 2);
    const int last = range_end(range, static_cast<int>(est.size()));
    double sum = 0.0;
    int count = 0;
    for (int t = std::max(0, range.start); t < last; ++t) {
        const Se3Pose d_gt = gt[t].inverse() * gt[t + 1];
        const Se3Pose d_est = est[t].inverse() * est[t + 1];
        sum += (d_gt.inverse() * d_est).translation.squaredNorm();
        ++count;
    }
    if (count == 0) throw std::invalid_argument("rpe: empty frame range");
    return std::sqrt(sum / count);
}

TrajectoryError trajectory_error(const std::vector<Se3Pose>& est,
                                 const std::vector<Se3Pose>& gt,
                                 const FrameRange& range) {
    TrajectoryError out;
    out.ape = ape(est, gt, range);
    out.rpe = est.size() >= 2 ? rpe(est, gt, range) : 0.0;
    out.per_frame.reserve(est.size());
    for (std::size_t t = 0; t < est.size(); ++t) {
        out.per_frame.push_back(
            (est[t].translation - gt[t].translation).norm());
    }
    return out;
}

namespace {

TrackingError motp_impl(const std::vector<TrackPoint>& est,
                        const std::vector<TrackPoint>& gt, double gate,
                        const FrameRange& range, bool by_id) {
    if (!(gate > 0.0)) {
        throw std::invalid_argument("motp: gate must be > 0");
    }
    std::map<int, std::vector<const TrackPoint*>> est_by_frame;
    std::map<int, std::vector<const TrackPoint*>> gt_by_frame;
    for (const auto& p : est) {
        if (range.contains(p.frame)) est_by_frame[p.frame].push_back(&p);
    }
    for (const auto& p : gt) {
        if (range.contains(p.frame)) gt_by_frame[p.frame].push_back(&p);
    }

    TrackingError out;
    double sum = 0.0;
    for (const auto& [frame, gts] : gt_by_frame) {
        auto it = est_by_frame.find(frame);
        const auto* ests = it == est_by_frame.end() ? nullptr : &it->second;
        if (by_id) {
            for (const TrackPoint* g : gts) {
                const TrackPoint* match = nullptr;
                if (ests) {
                    for (const TrackPoint* e : *ests) {
                        if (e->id == g->id) {
                            match = e;
                            break;
                        }
                    }
                }
                if (!match) {
                    ++out.missed;
                    continue;
                }
                const double d = std::hypot(match->x - g->x, match->z - g->z);
                if (d > gate) {
                    ++out.missed;
                } else {
                    sum += d;
                    ++out.matched;
                }
            }
        } else {
            const int ng = static_cast<int>(gts.size());
            const int ne = ests ? static_cast<int>(ests->size()) : 0;
            Eigen::MatrixXd cost(ng, ne);
            for (int i = 0; i < ng; ++i) {
                for (int j = 0; j < ne; ++j) {
                    cost(i, j) = std::hypot((*ests)[j]->x - gts[i]->x,
                                            (*ests)[j]->z - gts[i]->z);
                }
            }
            const std::vector<int> match =
                ne > 0 ? hungarian_assignment(cost, gate)
                       : std::vector<int>(ng, -1);
            for (int i = 0; i < ng; ++i) {
                if (match[i] < 0) {
                    ++out.missed;
                } else {
                    sum += cost(i, match[i]);
                    ++out.matched;
                }
            }
        }
    }
    out.motp = out.matched > 0 ? sum / out.matched : 0.0;
    return out;
}

}  // namespace

TrackingError motp(const std::vector<TrackPoint>& est,
                   const std::vector<TrackPoint>& gt, double gate,
                   const FrameRange& range) {
    return motp_impl(est, gt, gate, range, /*by_id=*/true);
}

TrackingError motp_hungarian(const std::vector<TrackPoint>& est,
                             const std::vector<TrackPoint>& gt, double gate,
                             const FrameRange& range) {
    return motp_impl(est, gt, gate, range, /*by_id=*/false);
}

// Shortest augmenting path formulation (Jonker-Volgenant style) on a
// rectangular cost matrix padded implicitly; forbidden entries get a
// large finite cost and are rejected afterwards.
std::vector<int> hungarian_assignment(const Eigen::MatrixXd& cost,
                                      double gate) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    if (n == 0 || m == 0) return std::vector<int>(n, -1);

    const double big = 1e9;
    const int dim = std::max(n, m);
    Eigen::MatrixXd c = Eigen::MatrixXd::Constant(dim, dim, big);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            c(i, j) = cost(i, j) <= gate ? cost(i, j) : big;
        }
    }

    std::vector<double> u(dim + 1, 0.0), v(dim + 1, 0.0);
    std::vector<int> p(dim + 1, 0), way(dim + 1, 0);
    for (int i = 1; i <= dim; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(dim + 1,
                                 std::numeric_limits<double>::infinity());
        std::vector<bool> used(dim + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            double delta = std::numeric_limits<double>::infinity();
            int j1 = 0;
            for (int j = 1; j <= dim; ++j) {
                if (used[j]) continue;
                const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= dim; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> match(n, -1);
    for (int j = 1; j <= dim; ++j) {
        const int i = p[j];
        if (i >= 1 && i <= n && j <= m && c(i - 1, j - 1) < big) {
            match[i - 1] = j - 1;
        }
    }
    return match;
}

Aggregate aggregate(const std::vector<double>& values) {
    Aggregate out;
    out.count = static_cast<int>(values.size());
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / out.count;
    if (out.count >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.stddev = std::sqrt(ss / (out.count - 1));
    }
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const int mid = out.count / 2;
    out.median = out.count % 2 == 1
                     ? sorted[mid]
                     : 0.5 * (sorted[mid - 1] + sorted[mid]);
    return out;
}

MonteCarloReport monte_carlo(
    const std::function<std::map<std::string, double>(std::uint64_t)>& trial,
    std::span<const std::uint64_t> seeds, int jobs) {
    if (seeds.empty()) {
        throw std::invalid_argument("monte_carlo: need at least one seed");
    }
    MonteCarloReport report;
    report.trials.resize(seeds.size());

    const int workers = std::max(
        1, std::min<int>(jobs, static_cast<int>(seeds.size())));
    std::mutex mutex;
    std::size_t next = 0;
    auto worker = [&] {
        while (true) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(mutex);
                if (next >= seeds.size()) return;
                i = next++;
            }
            TrialOutcome outcome;
            outcome.seed = seeds[i];
            try {
                outcome.values = trial(seeds[i]);
            } catch (const std::exception& e) {
                outcome.error = e.what();
            }
            report.trials[i] = std::move(outcome);
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::map<std::string, std::vector<double>> series;
    for (const auto& outcome : report.trials) {
        if (outcome.error) {
            ++report.failed;
            continue;
        }
        for (const auto& [name, value] : outcome.values) {
            series[name].push_back(value);
        }
    }
    for (const auto& [name, values] : series) {
        report.aggregates[name] = aggregate(values);
    }
    return report;
}

}  // namespace slammot
