#pragma once

// Minimal SE(3) machinery for the pose-graph backend. Poses are stored as
// rotation + translation of the world-from-camera transform. Tangent
// vectors are ordered rotation-then-translation: xi = [omega; rho], and
// pose updates are applied on the left: T <- exp(xi) * T.

#include <Eigen/Core>

namespace slammot {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

struct Se3Pose {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Se3Pose() = default;
    Se3Pose(const Eigen::Matrix3d& r, const Eigen::Vector3d& t)
        : rotation(r), translation(t) {}

    Se3Pose inverse() const {
        return {rotation.transpose(), -(rotation.transpose() * translation)};
    }

    Se3Pose operator*(const Se3Pose& other) const {
        return {rotation * other.rotation,
                rotation * other.translation + translation};
    }

    Eigen::Vector3d operator*(const Eigen::Vector3d& p) const {
        return rotation * p + translation;
    }
};

// ||R^T R - I|| and det checks within tol.
bool is_valid_rotation(const Eigen::Matrix3d& r, double tol = 1e-9);

// Projects a nearly-orthonormal matrix back onto SO(3).
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& r);

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& omega);
Eigen::Vector3d log_so3(const Eigen::Matrix3d& r);

// Left Jacobian of SO(3) and its inverse.
Eigen::Matrix3d left_jacobian_so3(const Eigen::Vector3d& omega);
Eigen::Matrix3d inv_left_jacobian_so3(const Eigen::Vector3d& omega);

Se3Pose exp_se3(const Vector6d& xi);
Vector6d log_se3(const Se3Pose& t);

// Adjoint for the [omega; rho] ordering: Adj(T) = [[R, 0], [t^ R, R]].
Matrix6d adjoint(const Se3Pose& t);

// Left Jacobian of SE(3) at xi, and its inverse. Satisfies
// log(exp(delta) * exp(xi)) ~= xi + inv_left_jacobian_se3(xi) * delta.
Matrix6d left_jacobian_se3(const Vector6d& xi);
Matrix6d inv_left_jacobian_se3(const Vector6d& xi);

// Heading of the camera's optical axis (+z) in the world x-z plane,
// measured from +x toward +z. The ego yaw used by object residuals.
double heading_from_rotation(const Eigen::Matrix3d& r);

// World-from-camera rotation for a camera whose optical axis points
// along the given heading and whose y axis stays world-down.
Eigen::Matrix3d rotation_from_heading(double heading);

}  // namespace slammot
