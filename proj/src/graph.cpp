#include "slammot/graph.hpp"

#include "slammot/angles.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>
#include <map>
#include <ostream>

namespace slammot {

// ---------------------------------------------------------------------------
// Residuals.

Eigen::Vector2d residual_reprojection(const Se3Pose& pose,
                                      const Eigen::Vector3d& point,
                                      const Eigen::Vector2d& pixel,
                                      const CameraIntrinsics& k) {
    const Eigen::Vector3d p_cam = pose.inverse() * point;
    if (!(p_cam.z() > 0.0)) {
        throw CheiralityError("reprojection: point behind camera");
    }
    return pixel - project(p_cam, k);
}

Vector6d residual_odometry(const Se3Pose& pose_a, const Se3Pose& pose_b,
                           const Se3Pose& rel) {
    return log_se3((rel * pose_a).inverse() * pose_b);
}

Eigen::Vector4d residual_object_measurement(const Se3Pose& pose,
                                            const ObjectPoseState& obj,
                                            const Eigen::Vector4d& meas) {
    const Eigen::Vector3d p_cam = pose.inverse() * obj.position;
    const double phi = heading_from_rotation(pose.rotation);
    Eigen::Vector4d r;
    r.head<3>() = p_cam - meas.head<3>();
    r[3] = wrap_angle(obj.theta - phi - meas[3]);
    return r;
}

namespace {

// Graph-state motion function g_s: advances (x, y, z, theta) under the
// model; y is constant for every model.
Eigen::Vector4d object_motion(const ObjectPoseState& obj,
                              const Eigen::VectorXd& velocity, ModelId model,
                              double dt) {
    Eigen::Vector4d out(obj.position.x(), obj.position.y(), obj.position.z(),
                        obj.theta);
    switch (model) {
        case ModelId::CP:
            break;
        case ModelId::CV: {
            const double v = velocity[0];
            out[0] += v * std::cos(obj.theta) * dt;
            out[2] += v * std::sin(obj.theta) * dt;
            break;
        }
        case ModelId::CTRV: {
            const double v = velocity[0];
            const double w = velocity[1];
            const double alpha = obj.theta + 0.5 * w * dt;
            out[0] += v * std::cos(alpha) * dt;
            out[2] += v * std::sin(alpha) * dt;
            out[3] += w * dt;
            break;
        }
    }
    return out;
}

// d object_motion / d (x, y, z, theta, velocity...), 4 x (4 + vel dim).
Eigen::MatrixXd object_motion_jacobian(const ObjectPoseState& obj,
                                       const Eigen::VectorXd& velocity,
                                       ModelId model, double dt) {
    const int dof = 4 + static_cast<int>(velocity.size());
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(4, dof);
    j.topLeftCorner<4, 4>().setIdentity();
    switch (model) {
        case ModelId::CP:
            break;
        case ModelId::CV: {
            const double v = velocity[0];
            const double c = std::cos(obj.theta);
            const double s = std::sin(obj.theta);
            j(0, 3) = -v * s * dt;
            j(2, 3) = v * c * dt;
            j(0, 4) = c * dt;
            j(2, 4) = s * dt;
            break;
        }
        case ModelId::CTRV: {
            const double v = velocity[0];
            const double w = velocity[1];
            const double alpha = obj.theta + 0.5 * w * dt;
            const double c = std::cos(alpha);
            const double s = std::sin(alpha);
            j(0, 3) = -v * s * dt;
            j(2, 3) = v * c * dt;
            j(0, 4) = c * dt;
            j(2, 4) = s * dt;
            j(0, 5) = -v * s * dt * dt * 0.5;
            j(2, 5) = v * c * dt * dt * 0.5;
            j(3, 5) = dt;
            break;
        }
    }
    return j;
}

}  // namespace

Eigen::Vector4d residual_object_system(const ObjectPoseState& obj_t,
                                       const Eigen::VectorXd& velocity_t,
                                       ModelId model,
                                       const ObjectPoseState& obj_t1,
                                       double dt) {
    const Eigen::Vector4d predicted = object_motion(obj_t, velocity_t, model, dt);
    Eigen::Vector4d r;
    r[0] = obj_t1.position.x() - predicted[0];
    r[1] = obj_t1.position.y() - predicted[1];
    r[2] = obj_t1.position.z() - predicted[2];
    r[3] = wrap_angle(obj_t1.theta - predicted[3]);
    return r;
}

Eigen::VectorXd residual_constant_motion(const Eigen::VectorXd& vel_t,
                                         const Eigen::VectorXd& vel_t1,
                                         ModelId model) {
    if (model == ModelId::CP) {
        throw std::invalid_argument(
            "residual_constant_motion: CP has no velocity state");
    }
    if (vel_t.size() != vel_t1.size() ||
        vel_t.size() != model_dim(model) - 3) {
        throw std::invalid_argument(
            "residual_constant_motion: velocity dimension mismatch");
    }
    return vel_t1 - vel_t;
}

// ---------------------------------------------------------------------------
// Validation and dump.

void validate(const SlammotGraph& graph) {
    const int np = static_cast<int>(graph.poses.size());
    const int nm = static_cast<int>(graph.points.size());
    const int no = static_cast<int>(graph.objects.size());
    auto check = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(what);
    };
    for (const auto& e : graph.reprojection_edges) {
        check(e.pose >= 0 && e.pose < np, "reprojection edge: bad pose index");
        check(e.point >= 0 && e.point < nm,
              "reprojection edge: bad point index");
    }
    for (const auto& e : graph.odometry_edges) {
        check(e.pose_a >= 0 && e.pose_a < np && e.pose_b >= 0 && e.pose_b < np,
              "odometry edge: bad pose index");
    }
    std::map<std::pair<int, int>, double> weight_sums;
    for (const auto& e : graph.measurement_edges) {
        check(e.pose >= 0 && e.pose < np, "measurement edge: bad pose index");
        check(e.object >= 0 && e.object < no,
              "measurement edge: bad object index");
        const auto& v = graph.objects[e.object];
        weight_sums[{v.object_id, v.frame}] += e.model_weight;
    }
    for (const auto& e : graph.system_edges) {
        check(e.object_a >= 0 && e.object_a < no && e.object_b >= 0 &&
                  e.object_b < no,
              "system edge: bad object index");
    }
    for (const auto& e : graph.constant_motion_edges) {
        check(e.object_a >= 0 && e.object_a < no && e.object_b >= 0 &&
                  e.object_b < no,
              "constant-motion edge: bad object index");
    }
    for (const auto& [key, sum] : weight_sums) {
        check(std::abs(sum - 1.0) <= 1e-9,
              "model weights for an (object, frame) do not sum to 1");
    }
}

void SlammotGraph::dump(std::ostream& os) const {
    for (const auto& p : poses) {
        os << "pose " << p.frame << (p.fixed ? " fixed" : " free");
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) os << ' ' << p.value.rotation(r, c);
        for (int i = 0; i < 3; ++i) os << ' ' << p.value.translation[i];
        os << '\n';
    }
    for (const auto& m : points) {
        os << "point " << m.id << ' ' << m.position.x() << ' '
           << m.position.y() << ' ' << m.position.z() << '\n';
    }
    for (const auto& o : objects) {
        os << "object " << o.object_id << ' ' << o.frame << ' '
           << model_name(o.model) << ' ' << o.pose_state.position.x() << ' '
           << o.pose_state.position.y() << ' ' << o.pose_state.position.z()
           << ' ' << o.pose_state.theta;
        for (int i = 0; i < o.velocity_state.size(); ++i)
            os << ' ' << o.velocity_state[i];
        os << '\n';
    }
    for (const auto& e : reprojection_edges)
        os << "edge repr " << e.pose << ' ' << e.point << ' ' << e.pixel.x()
           << ' ' << e.pixel.y() << '\n';
    for (const auto& e : odometry_edges)
        os << "edge odo " << e.pose_a << ' ' << e.pose_b << '\n';
    for (const auto& e : measurement_edges)
        os << "edge meas " << e.pose << ' ' << e.object << " w "
           << e.model_weight << '\n';
    for (const auto& e : system_edges)
        os << "edge sys " << e.object_a << ' ' << e.object_b << " w "
           << e.model_weight << '\n';
    for (const auto& e : constant_motion_edges)
        os << "edge cst " << e.object_a << ' ' << e.object_b << " w "
           << e.model_weight << '\n';
}

// ---------------------------------------------------------------------------
// Window construction.

SlammotGraph build_window(const WindowInput& input, GraphMode mode,
                          const InfoWeights& info) {
    if (input.frames.size() < 2) {
        throw std::invalid_argument("build_window: need at least 2 frames");
    }
    SlammotGraph g;
    g.info = info;
    g.intrinsics = input.intrinsics;

    std::map<int, int> pose_index;  // frame -> pose vertex
    for (const auto& f : input.frames) {
        if (pose_index.count(f.frame)) {
            throw std::invalid_argument("build_window: duplicate frame");
        }
        pose_index[f.frame] = static_cast<int>(g.poses.size());
        g.poses.push_back({f.frame, f.pose_estimate, false});
    }
    g.poses.front().fixed = true;  // gauge

    for (std::size_t i = 1; i < input.frames.size(); ++i) {
        if (input.frames[i].has_odometry) {
            g.odometry_edges.push_back({static_cast<int>(i - 1),
                                        static_cast<int>(i),
                                        input.frames[i].odometry});
        }
    }

    for (const auto& pt : input.points) {
        // Valid observations: inside the window and in front of the
        // camera at the initial values.
        std::vector<std::pair<int, Eigen::Vector2d>> valid;
        int dropped = 0;
        for (const auto& [frame, pixel] : pt.observations) {
            auto it = pose_index.find(frame);
            if (it == pose_index.end()) continue;
            const Se3Pose& pose = g.poses[it->second].value;
            const Eigen::Vector3d p_cam = pose.inverse() * pt.position;
            if (!(p_cam.z() > 0.0)) {
                ++dropped;
                continue;
            }
            valid.emplace_back(it->second, pixel);
        }
        if (valid.size() < 2) continue;
        g.dropped_cheirality += dropped;
        const int point_idx = static_cast<int>(g.points.size());
        MapPoint stored = pt;
        g.points.push_back(std::move(stored));
        for (const auto& [pose_idx, pixel] : valid) {
            g.reprojection_edges.push_back({pose_idx, point_idx, pixel});
        }
    }

    for (const auto& track : input.tracks) {
        if (track.frames.empty()) continue;
        std::vector<int> model_indices;
        for (std::size_t mi = 0; mi < track.models.size(); ++mi) {
            if (mode == GraphMode::Level2 &&
                track.models[mi] != ModelId::CV) {
                continue;
            }
            if (mode == GraphMode::Level3) {
                // A model whose weight is exactly zero at every frame
                // contributes nothing; leave its chain out entirely.
                bool all_zero = true;
                for (const auto& entry : track.frames) {
                    all_zero &= entry.weights[mi] == 0.0;
                }
                if (all_zero) continue;
            }
            model_indices.push_back(static_cast<int>(mi));
        }
        for (int mi : model_indices) {
            const ModelId model = track.models[mi];
            int prev_vertex = -1;
            double prev_weight = 0.0;
            for (const auto& entry : track.frames) {
                auto it = pose_index.find(entry.frame);
                if (it == pose_index.end()) {
                    throw std::invalid_argument(
                        "build_window: track entry outside the window");
                }
                const ModelState& mean = entry.model_means[mi];
                ObjectVertex v;
                v.object_id = track.object_id;
                v.frame = entry.frame;
                v.model = model;
                v.pose_state.position =
                    Eigen::Vector3d(mean.x, entry.y, mean.z);
                v.pose_state.theta = mean.theta;
                const int vel_dim = model_dim(model) - 3;
                v.velocity_state.resize(vel_dim);
                if (vel_dim > 0) v.velocity_state[0] = mean.v;
                if (vel_dim > 1) v.velocity_state[1] = mean.omega;
                const int vertex_idx = static_cast<int>(g.objects.size());
                g.objects.push_back(std::move(v));

                const double w = mode == GraphMode::Level2
                                     ? 1.0
                                     : entry.weights[mi];
                if (entry.has_measurement) {
                    g.measurement_edges.push_back(
                        {it->second, vertex_idx, entry.measurement, w});
                }
                if (prev_vertex >= 0) {
                    g.system_edges.push_back(
                        {prev_vertex, vertex_idx, input.dt, prev_weight});
                    if (model != ModelId::CP) {
                        g.constant_motion_edges.push_back(
                            {prev_vertex, vertex_idx, prev_weight});
                    }
                }
                prev_vertex = vertex_idx;
                prev_weight = w;
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Linearization and Levenberg-Marquardt.

namespace {

struct EdgeRows {
    Eigen::VectorXd residual;                       // whitened
    std::vector<std::pair<int, Eigen::MatrixXd>> jacobians;  // col offset, whitened block
    double rho = 0.0;                               // robust cost contribution
};

struct Indexer {
    std::vector<int> pose_offset;    // -1 when fixed
    std::vector<int> point_offset;
    std::vector<int> object_offset;
    int total = 0;

    Indexer(const SlammotGraph& g, bool include_fixed) {
        pose_offset.assign(g.poses.size(), -1);
        point_offset.assign(g.points.size(), -1);
        object_offset.assign(g.objects.size(), -1);
        for (std::size_t i = 0; i < g.poses.size(); ++i) {
            if (g.poses[i].fixed && !include_fixed) continue;
            pose_offset[i] = total;
            total += 6;
        }
        for (std::size_t i = 0; i < g.points.size(); ++i) {
            point_offset[i] = total;
            total += 3;
        }
        for (std::size_t i = 0; i < g.objects.size(); ++i) {
            object_offset[i] = total;
            total += g.objects[i].dof();
        }
    }
};

double huber_rho(double s, double delta) {
    if (delta <= 0.0) return s;
    const double norm = std::sqrt(s);
    if (norm <= delta) return s;
    return 2.0 * delta * norm - delta * delta;
}

double huber_weight(double s, double delta) {
    if (delta <= 0.0) return 1.0;
    const double norm = std::sqrt(s);
    if (norm <= delta) return 1.0;
    return delta / norm;
}

// Evaluates one edge: raw residual and (optionally) Jacobian blocks, then
// whitens by sqrt(model_weight * info) and the robust weight.
class Evaluator {
  public:
    Evaluator(const SlammotGraph& g, const Indexer& idx, bool with_jacobians)
        : g_(g), idx_(idx), with_jacobians_(with_jacobians) {}

    // Returns false on a cheirality violation (caller decides whether to
    // throw or to treat the configuration as infeasible).
    bool reprojection(const ReprojectionEdge& e, EdgeRows& out) const {
        const PoseVertex& pv = g_.poses[e.pose];
        const MapPoint& pt = g_.points[e.point];
        const Eigen::Matrix3d& rot = pv.value.rotation;
        const Eigen::Vector3d p_cam = pv.value.inverse() * pt.position;
        if (!(p_cam.z() > 0.0)) return false;

        Eigen::Vector2d r = e.pixel - project(p_cam, g_.intrinsics);
        const double info = g_.info.reprojection;
        finish(out, r, info * Eigen::Vector2d::Ones(), 1.0);
        if (with_jacobians_) {
            const Eigen::Matrix<double, 2, 3> dpi =
                project_jacobian(p_cam, g_.intrinsics);
            if (idx_.pose_offset[e.pose] >= 0) {
                Eigen::Matrix<double, 2, 6> jp;
                jp.leftCols<3>() =
                    -dpi * rot.transpose() * skew(pt.position);
                jp.rightCols<3>() = dpi * rot.transpose();
                push(out, idx_.pose_offset[e.pose], jp);
            }
            push(out, idx_.point_offset[e.point],
                 Eigen::MatrixXd(-dpi * rot.transpose()));
        }
        whiten(out);
        return true;
    }

    bool odometry(const OdometryEdge& e, EdgeRows& out) const {
        const Se3Pose& ta = g_.poses[e.pose_a].value;
        const Se3Pose& tb = g_.poses[e.pose_b].value;
        const Se3Pose a = e.rel * ta;
        const Vector6d r = log_se3(a.inverse() * tb);

        Vector6d info;
        info.head<3>().setConstant(g_.info.odometry_rotation);
        info.tail<3>().setConstant(g_.info.odometry_translation);
        finish(out, r, info, 1.0);
        if (with_jacobians_) {
            const Matrix6d jl_inv = inv_left_jacobian_se3(r);
            if (idx_.pose_offset[e.pose_b] >= 0) {
                push(out, idx_.pose_offset[e.pose_b],
                     Eigen::MatrixXd(jl_inv * adjoint(a.inverse())));
            }
            if (idx_.pose_offset[e.pose_a] >= 0) {
                push(out, idx_.pose_offset[e.pose_a],
                     Eigen::MatrixXd(-jl_inv * adjoint(ta.inverse())));
            }
        }
        whiten(out);
        return true;
    }

    bool measurement(const ObjectMeasurementEdge& e, EdgeRows& out) const {
        const PoseVertex& pv = g_.poses[e.pose];
        const ObjectVertex& ov = g_.objects[e.object];
        const Eigen::Matrix3d& rot = pv.value.rotation;
        const Eigen::Vector4d r =
            residual_object_measurement(pv.value, ov.pose_state, e.meas);

        Eigen::Vector4d info;
        info.head<3>().setConstant(g_.info.object_position);
        info[3] = g_.info.object_heading;
        finish(out, r, info, e.model_weight);
        if (with_jacobians_) {
            if (idx_.pose_offset[e.pose] >= 0) {
                Eigen::Matrix<double, 4, 6> jp =
                    Eigen::Matrix<double, 4, 6>::Zero();
                jp.block<3, 3>(0, 0) =
                    rot.transpose() * skew(ov.pose_state.position);
                jp.block<3, 3>(0, 3) = -rot.transpose();
                // Heading row: r3 = theta - phi(R) - meas_theta with
                // phi = atan2(d_x, d_z), d the optical axis.
                const Eigen::Vector3d d = rot.col(2);
                const double s2 = d.x() * d.x() + d.z() * d.z();
                const Eigen::RowVector3d dphi_dd(d.z() / s2, 0.0,
                                                 -d.x() / s2);
                jp.block<1, 3>(3, 0) = dphi_dd * skew(d);
                push(out, idx_.pose_offset[e.pose], jp);
            }
            Eigen::MatrixXd jo = Eigen::MatrixXd::Zero(4, ov.dof());
            jo.block<3, 3>(0, 0) = rot.transpose();
            jo(3, 3) = 1.0;
            push(out, idx_.object_offset[e.object], jo);
        }
        whiten(out);
        return true;
    }

    bool system(const ObjectSystemEdge& e, EdgeRows& out) const {
        const ObjectVertex& a = g_.objects[e.object_a];
        const ObjectVertex& b = g_.objects[e.object_b];
        const Eigen::Vector4d r = residual_object_system(
            a.pose_state, a.velocity_state, a.model, b.pose_state, e.dt);

        Eigen::Vector4d info;
        info.head<3>().setConstant(g_.info.system_position);
        info[3] = g_.info.system_heading;
        finish(out, r, info, e.model_weight);
        if (with_jacobians_) {
            Eigen::MatrixXd jb = Eigen::MatrixXd::Zero(4, b.dof());
            jb.topLeftCorner<4, 4>().setIdentity();
            push(out, idx_.object_offset[e.object_b], jb);
            push(out, idx_.object_offset[e.object_a],
                 Eigen::MatrixXd(-object_motion_jacobian(
                     a.pose_state, a.velocity_state, a.model, e.dt)));
        }
        whiten(out);
        return true;
    }

    bool constant_motion(const ConstantMotionEdge& e, EdgeRows& out) const {
        const ObjectVertex& a = g_.objects[e.object_a];
        const ObjectVertex& b = g_.objects[e.object_b];
        const Eigen::VectorXd r = residual_constant_motion(
            a.velocity_state, b.velocity_state, a.model);

        const int k = static_cast<int>(r.size());
        Eigen::VectorXd info(k);
        info[0] = g_.info.cst_velocity;
        if (k > 1) info[1] = g_.info.cst_turn_rate;
        finish(out, r, info, e.model_weight);
        if (with_jacobians_) {
            Eigen::MatrixXd jb = Eigen::MatrixXd::Zero(k, b.dof());
            jb.rightCols(k).setIdentity();
            push(out, idx_.object_offset[e.object_b], jb);
            Eigen::MatrixXd ja = Eigen::MatrixXd::Zero(k, a.dof());
            ja.rightCols(k) = -Eigen::MatrixXd::Identity(k, k);
            push(out, idx_.object_offset[e.object_a], ja);
        }
        whiten(out);
        return true;
    }

  private:
    static void push(EdgeRows& out, int offset, const Eigen::MatrixXd& block) {
        out.jacobians.emplace_back(offset, block);
    }

    // Stores the raw residual with its per-row weights; whiten() applies
    // sqrt scaling to residual and Jacobian blocks alike.
    void finish(EdgeRows& out, const Eigen::VectorXd& r,
                const Eigen::VectorXd& info, double model_weight) const {
        out.residual = r;
        scale_ = (model_weight * info.array()).sqrt();
        const double s = (out.residual.array() * scale_.array()).matrix()
                             .squaredNorm();
        robust_ = std::sqrt(huber_weight(s, g_.info.huber_delta));
        out.rho = huber_rho(s, g_.info.huber_delta);
    }

    void whiten(EdgeRows& out) const {
        out.residual.array() *= scale_.array() * robust_;
        for (auto& [offset, block] : out.jacobians) {
            block.array().colwise() *= scale_.array() * robust_;
        }
    }

    const SlammotGraph& g_;
    const Indexer& idx_;
    bool with_jacobians_;
    mutable Eigen::ArrayXd scale_;
    mutable double robust_ = 1.0;
};

struct LinearizedSystem {
    Eigen::SparseMatrix<double> jacobian;
    Eigen::VectorXd residual;
    double cost = 0.0;
    bool feasible = true;
};

// throw_on_cheirality: initial evaluations report bad geometry to the
// caller; candidate evaluations inside LM mark the step infeasible.
LinearizedSystem linearize(const SlammotGraph& g, const Indexer& idx,
                           bool with_jacobians, bool throw_on_cheirality) {
    LinearizedSystem sys;
    Evaluator eval(g, idx, with_jacobians);

    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<double> residuals;
    int row = 0;

    auto absorb = [&](const EdgeRows& rows) {
        sys.cost += rows.rho;
        for (int i = 0; i < rows.residual.size(); ++i) {
            residuals.push_back(rows.residual[i]);
        }
        if (with_jacobians) {
            for (const auto& [offset, block] : rows.jacobians) {
                if (offset < 0) continue;
                for (int r = 0; r < block.rows(); ++r) {
                    for (int c = 0; c < block.cols(); ++c) {
                        if (block(r, c) != 0.0) {
                            triplets.emplace_back(row + r, offset + c,
                                                  block(r, c));
                        }
                    }
                }
            }
        }
        row += static_cast<int>(rows.residual.size());
    };

    EdgeRows rows;
    auto run = [&](auto&& edges, auto&& fn) {
        for (const auto& e : edges) {
            rows.residual.resize(0);
            rows.jacobians.clear();
            rows.rho = 0.0;
            if (!(eval.*fn)(e, rows)) {
                if (throw_on_cheirality) {
                    throw CheiralityError(
                        "graph evaluation: point behind camera");
                }
                sys.feasible = false;
                return false;
            }
            absorb(rows);
        }
        return true;
    };

    if (!run(g.reprojection_edges, &Evaluator::reprojection)) return sys;
    if (!run(g.odometry_edges, &Evaluator::odometry)) return sys;
    if (!run(g.measurement_edges, &Evaluator::measurement)) return sys;
    if (!run(g.system_edges, &Evaluator::system)) return sys;
    if (!run(g.constant_motion_edges, &Evaluator::constant_motion)) return sys;

    sys.residual =
        Eigen::Map<Eigen::VectorXd>(residuals.data(), residuals.size());
    if (with_jacobians) {
        sys.jacobian.resize(row, idx.total);
        sys.jacobian.setFromTriplets(triplets.begin(), triplets.end());
    }
    return sys;
}

void apply_step(SlammotGraph& g, const Indexer& idx,
                const Eigen::VectorXd& delta) {
    for (std::size_t i = 0; i < g.poses.size(); ++i) {
        const int off = idx.pose_offset[i];
        if (off < 0) continue;
        const Vector6d xi = delta.segment<6>(off);
        Se3Pose updated = exp_se3(xi) * g.poses[i].value;
        updated.rotation = orthonormalize(updated.rotation);
        g.poses[i].value = updated;
    }
    for (std::size_t i = 0; i < g.points.size(); ++i) {
        g.points[i].position += delta.segment<3>(idx.point_offset[i]);
    }
    for (std::size_t i = 0; i < g.objects.size(); ++i) {
        const int off = idx.object_offset[i];
        ObjectVertex& v = g.objects[i];
        v.pose_state.position += delta.segment<3>(off);
        v.pose_state.theta = wrap_angle(v.pose_state.theta + delta[off + 3]);
        for (int k = 0; k < v.velocity_state.size(); ++k) {
            v.velocity_state[k] += delta[off + 4 + k];
        }
    }
}

}  // namespace

double total_cost(const SlammotGraph& graph) {
    Indexer idx(graph, /*include_fixed=*/false);
    return linearize(graph, idx, /*with_jacobians=*/false,
                     /*throw_on_cheirality=*/true)
        .cost;
}

Eigen::VectorXd cost_gradient(const SlammotGraph& graph) {
    Indexer idx(graph, /*include_fixed=*/true);
    LinearizedSystem sys = linearize(graph, idx, /*with_jacobians=*/true,
                                     /*throw_on_cheirality=*/true);
    return 2.0 * (sys.jacobian.transpose() * sys.residual);
}

OptimizeReport optimize(SlammotGraph& graph, const SolverConfig& solver) {
    bool any_fixed = false;
    for (const auto& p : graph.poses) any_fixed |= p.fixed;
    if (!any_fixed) {
        throw std::invalid_argument("optimize: no fixed pose (gauge)");
    }

    Indexer idx(graph, /*include_fixed=*/false);
    OptimizeReport report;

    LinearizedSystem sys = linearize(graph, idx, /*with_jacobians=*/true,
                                     /*throw_on_cheirality=*/true);
    report.initial_cost = sys.cost;
    report.final_cost = sys.cost;
    if (idx.total == 0 || sys.cost <= solver.cost_tolerance) return report;

    double lambda = solver.initial_lambda;
    Eigen::SparseMatrix<double> identity(idx.total, idx.total);
    identity.setIdentity();

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;

    for (int it = 1; it <= solver.max_iterations; ++it) {
        const Eigen::SparseMatrix<double> h =
            Eigen::SparseMatrix<double>(sys.jacobian.transpose()) *
            sys.jacobian;
        const Eigen::VectorXd g = sys.jacobian.transpose() * sys.residual;

        bool accepted = false;
        while (lambda <= solver.max_lambda) {
            Eigen::SparseMatrix<double> damped = h + lambda * identity;
            ldlt.compute(damped);
            if (ldlt.info() != Eigen::Success) {
                lambda *= solver.lambda_factor;
                continue;
            }
            const Eigen::VectorXd delta = ldlt.solve(-g);
            if (ldlt.info() != Eigen::Success || !delta.allFinite()) {
                lambda *= solver.lambda_factor;
                continue;
            }

            SlammotGraph candidate = graph;
            apply_step(candidate, idx, delta);
            LinearizedSystem cand_sys =
                linearize(candidate, idx, /*with_jacobians=*/true,
                          /*throw_on_cheirality=*/false);
            if (!cand_sys.feasible || !std::isfinite(cand_sys.cost) ||
                cand_sys.cost > sys.cost) {
                lambda *= solver.lambda_factor;
                continue;
            }

            const double decrease = sys.cost - cand_sys.cost;
            graph = std::move(candidate);
            sys = std::move(cand_sys);
            lambda = std::max(lambda / solver.lambda_factor, 1e-12);
            ++report.iterations;
            accepted = true;
            report.final_cost = sys.cost;
            if (sys.cost <= solver.cost_tolerance ||
                decrease <= solver.relative_decrease_tol *
                                std::max(sys.cost, 1e-300)) {
                return report;
            }
            break;
        }
        if (!accepted) {
            if (ldlt.info() != Eigen::Success) {
                throw SingularSystemError(
                    "optimize: damped normal equations not factorizable", it);
            }
            break;  // no step improves the cost
        }
    }
    report.final_cost = sys.cost;
    return report;
}

}  // namespace slammot
