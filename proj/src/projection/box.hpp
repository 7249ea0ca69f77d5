#pragma once

#include <Eigen/Core>

namespace wsground {

// Axis-aligned box given by its min and max corners, in meters.
struct AxisAlignedBox3D {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();

  bool valid() const { return (min.array() <= max.array()).all(); }
  Eigen::Vector3d extent() const { return max - min; }
  Eigen::Vector3d center() const { return 0.5 * (min + max); }
  double diagonal() const { return extent().norm(); }
  double volume() const {
    const Eigen::Vector3d e = extent();
    return e.x() * e.y() * e.z();
  }
  bool contains(const Eigen::Vector3d& p, double tol = 0.0) const {
    return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
  }
  bool operator==(const AxisAlignedBox3D&) const = default;
};

}  // namespace wsground
