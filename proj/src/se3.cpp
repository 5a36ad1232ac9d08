#include "slammot/se3.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace slammot {

namespace {
constexpr double kSmallAngle = 1e-8;
}

bool is_valid_rotation(const Eigen::Matrix3d& r, double tol) {
    const Eigen::Matrix3d e =
        r.transpose() * r - Eigen::Matrix3d::Identity();
    return e.cwiseAbs().maxCoeff() <= tol &&
           std::abs(r.determinant() - 1.0) <= tol;
}

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& r) {
    // Nearest rotation in Frobenius norm via SVD.
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(
        r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU();
    Eigen::Matrix3d v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0) {
        u.col(2) *= -1.0;
    }
    return u * v.transpose();
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
    Eigen::Matrix3d m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return m;
}

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& omega) {
    const double theta = omega.norm();
    const Eigen::Matrix3d w = skew(omega);
    if (theta < kSmallAngle) {
        return Eigen::Matrix3d::Identity() + w + 0.5 * w * w;
    }
    const double a = std::sin(theta) / theta;
    const double b = (1.0 - std::cos(theta)) / (theta * theta);
    return Eigen::Matrix3d::Identity() + a * w + b * w * w;
}

Eigen::Vector3d log_so3(const Eigen::Matrix3d& r) {
    const double cos_theta =
        std::min(1.0, std::max(-1.0, 0.5 * (r.trace() - 1.0)));
    const double theta = std::acos(cos_theta);
    Eigen::Vector3d w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    if (theta < kSmallAngle) {
        return 0.5 * w;
    }
    if (theta > M_PI - 1e-3) {
        // Near pi the antisymmetric part degenerates; the outer-product
        // part B = (R - cos(theta) I) / (1 - cos(theta)) ~= u u^T stays
        // well conditioned and yields the axis.
        const Eigen::Matrix3d sym = 0.5 * (r + r.transpose());
        const Eigen::Matrix3d b =
            (sym - cos_theta * Eigen::Matrix3d::Identity()) /
            (1.0 - cos_theta);
        int k = 0;
        b.diagonal().maxCoeff(&k);
        Eigen::Vector3d axis;
        axis[k] = std::sqrt(std::max(0.0, b(k, k)));
        for (int i = 0; i < 3; ++i) {
            if (i != k) axis[i] = b(i, k) / axis[k];
        }
        axis.normalize();
        if (w.norm() > 1e-12 && axis.dot(w) < 0.0) {
            axis = -axis;
        }
        return theta * axis;
    }
    return (0.5 * theta / std::sin(theta)) * w;
}

Eigen::Matrix3d left_jacobian_so3(const Eigen::Vector3d& omega) {
    const double theta = omega.norm();
    const Eigen::Matrix3d w = skew(omega);
    if (theta < kSmallAngle) {
        return Eigen::Matrix3d::Identity() + 0.5 * w + w * w / 6.0;
    }
    const double t2 = theta * theta;
    const double a = (1.0 - std::cos(theta)) / t2;
    const double b = (theta - std::sin(theta)) / (t2 * theta);
    return Eigen::Matrix3d::Identity() + a * w + b * w * w;
}

Eigen::Matrix3d inv_left_jacobian_so3(const Eigen::Vector3d& omega) {
    const double theta = omega.norm();
    const Eigen::Matrix3d w = skew(omega);
    if (theta < kSmallAngle) {
        return Eigen::Matrix3d::Identity() - 0.5 * w + w * w / 12.0;
    }
    const double half = 0.5 * theta;
    const double cot = std::cos(half) / std::sin(half);
    const double a = 1.0 / (theta * theta) - 0.5 * cot / theta;
    return Eigen::Matrix3d::Identity() - 0.5 * w + a * w * w;
}

Se3Pose exp_se3(const Vector6d& xi) {
    const Eigen::Vector3d omega = xi.head<3>();
    const Eigen::Vector3d rho = xi.tail<3>();
    return {exp_so3(omega), left_jacobian_so3(omega) * rho};
}

Vector6d log_se3(const Se3Pose& t) {
    Vector6d xi;
    const Eigen::Vector3d omega = log_so3(t.rotation);
    xi.head<3>() = omega;
    xi.tail<3>() = inv_left_jacobian_so3(omega) * t.translation;
    return xi;
}

Matrix6d adjoint(const Se3Pose& t) {
    Matrix6d adj = Matrix6d::Zero();
    adj.topLeftCorner<3, 3>() = t.rotation;
    adj.bottomRightCorner<3, 3>() = t.rotation;
    adj.bottomLeftCorner<3, 3>() = skew(t.translation) * t.rotation;
    return adj;
}

namespace {

// Coupling block of the SE(3) left Jacobian (Barfoot's Q), written for the
// [omega; rho] ordering.
Eigen::Matrix3d se3_q_block(const Eigen::Vector3d& omega,
                            const Eigen::Vector3d& rho) {
    const Eigen::Matrix3d p = skew(rho);
    const Eigen::Matrix3d w = skew(omega);
    const double theta = omega.norm();

    double c1, c2, c3;
    if (theta < 1e-4) {
        const double t2 = theta * theta;
        c1 = 1.0 / 6.0 - t2 / 120.0;
        c2 = 1.0 / 24.0 - t2 / 720.0;
        c3 = 1.0 / 120.0 - t2 / 2520.0;
    } else {
        const double t2 = theta * theta;
        const double t3 = t2 * theta;
        const double t4 = t3 * theta;
        const double t5 = t4 * theta;
        const double st = std::sin(theta);
        const double ct = std::cos(theta);
        c1 = (theta - st) / t3;
        c2 = (1.0 - 0.5 * t2 - ct) / t4;
        c3 = 0.5 * (c2 - 3.0 * (theta - st - t3 / 6.0) / t5);
    }

    return 0.5 * p + c1 * (w * p + p * w + w * p * w) -
           c2 * (w * w * p + p * w * w - 3.0 * w * p * w) -
           c3 * (w * p * w * w + w * w * p * w);
}

}  // namespace

Matrix6d left_jacobian_se3(const Vector6d& xi) {
    const Eigen::Vector3d omega = xi.head<3>();
    const Eigen::Vector3d rho = xi.tail<3>();
    const Eigen::Matrix3d j = left_jacobian_so3(omega);
    Matrix6d out = Matrix6d::Zero();
    out.topLeftCorner<3, 3>() = j;
    out.bottomRightCorner<3, 3>() = j;
    out.bottomLeftCorner<3, 3>() = se3_q_block(omega, rho);
    return out;
}

Matrix6d inv_left_jacobian_se3(const Vector6d& xi) {
    const Eigen::Vector3d omega = xi.head<3>();
    const Eigen::Vector3d rho = xi.tail<3>();
    const Eigen::Matrix3d jinv = inv_left_jacobian_so3(omega);
    const Eigen::Matrix3d q = se3_q_block(omega, rho);
    Matrix6d out = Matrix6d::Zero();
    out.topLeftCorner<3, 3>() = jinv;
    out.bottomRightCorner<3, 3>() = jinv;
    out.bottomLeftCorner<3, 3>() = -jinv * q * jinv;
    return out;
}

double heading_from_rotation(const Eigen::Matrix3d& r) {
    // Optical axis in world coordinates is the third column; zero heading
    // means looking along world +z, so the identity pose has heading 0.
    return std::atan2(r(0, 2), r(2, 2));
}

Eigen::Matrix3d rotation_from_heading(double heading) {
    const double c = std::cos(heading);
    const double s = std::sin(heading);
    Eigen::Matrix3d r;
    // Columns: camera x, y, z axes in world coordinates (y stays down).
    r << c, 0.0, s,
         0.0, 1.0, 0.0,
         -s, 0.0, c;
    return r;
}

}  // namespace slammot
