#pragma once

#include <Eigen/Core>

namespace slammot {

struct CameraIntrinsics {
    double fx = 500.0;
    double fy = 500.0;
    double cx = 320.0;
    double cy = 240.0;

    bool valid() const { return fx > 0.0 && fy > 0.0; }
};

// Pinhole projection of a camera-frame point with positive depth.
inline Eigen::Vector2d project(const Eigen::Vector3d& p_cam,
                               const CameraIntrinsics& k) {
    return {k.fx * p_cam.x() / p_cam.z() + k.cx,
            k.fy * p_cam.y() / p_cam.z() + k.cy};
}

// Camera-frame point on the ray through the pixel at the given depth.
inline Eigen::Vector3d back_project(const Eigen::Vector2d& pixel, double depth,
                                    const CameraIntrinsics& k) {
    return {(pixel.x() - k.cx) / k.fx * depth, (pixel.y() - k.cy) / k.fy * depth,
            depth};
}

// d project / d p_cam (2x3).
inline Eigen::Matrix<double, 2, 3> project_jacobian(const Eigen::Vector3d& p,
                                                    const CameraIntrinsics& k) {
    const double iz = 1.0 / p.z();
    Eigen::Matrix<double, 2, 3> j;
    j << k.fx * iz, 0.0, -k.fx * p.x() * iz * iz,
         0.0, k.fy * iz, -k.fy * p.y() * iz * iz;
    return j;
}

}  // namespace slammot
