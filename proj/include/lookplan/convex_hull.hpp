#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace lookplan::geometry {

// Oriented hull triangle: `normal` is the outward unit normal and
// `offset = normal . vertex` for every vertex on the face.
struct HullTriangle {
  std::array<int, 3> v;
  Eigen::Vector3d normal;
  double offset;
};

// Triangulated convex hull via incremental insertion with visibility horizons.
// Throws DEGENERATE_VERTICES when the points span fewer than 3 dimensions.
std::vector<HullTriangle> convex_hull(const std::vector<Eigen::Vector3d>& points);

// Signed-tetrahedron volume sum of an outward-oriented triangulated hull.
double hull_volume(const std::vector<Eigen::Vector3d>& points,
                   const std::vector<HullTriangle>& triangles);

}  // namespace lookplan::geometry
