#include "lookplan/convex_hull.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "lookplan/errors.hpp"

namespace lookplan::geometry {

namespace {

using Eigen::Vector3d;

struct Face {
  std::array<int, 3> v;
  Vector3d normal;  // unit, outward
  double offset;
  bool alive = true;
};

Face make_face(int a, int b, int c, const std::vector<Vector3d>& pts,
               const Vector3d& interior) {
  Face f;
  f.v = {a, b, c};
  Vector3d n = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
  double len = n.norm();
  n /= len;
  if (n.dot(interior - pts[a]) > 0) {
    std::swap(f.v[1], f.v[2]);
    n = -n;
  }
  f.normal = n;
  f.offset = n.dot(pts[a]);
  return f;
}

}  // namespace

std::vector<HullTriangle> convex_hull(const std::vector<Vector3d>& points) {
  const int n = int(points.size());
  require(n >= 4, ErrorCode::DegenerateVertices,
          "convex hull needs at least 4 points, got " + std::to_string(n));

  Vector3d lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double scale = std::max((hi - lo).norm(), 1e-12);
  const double eps = 1e-9 * scale;

  // Seed tetrahedron from mutually extreme points.
  int i0 = 0;
  for (int i = 1; i < n; ++i) {
    if (std::lexicographical_compare(points[i].data(), points[i].data() + 3,
                                     points[i0].data(), points[i0].data() + 3))
      i0 = i;
  }
  int i1 = -1;
  double best = eps;
  for (int i = 0; i < n; ++i) {
    double d = (points[i] - points[i0]).norm();
    if (d > best) {
      best = d;
      i1 = i;
    }
  }
  require(i1 >= 0, ErrorCode::DegenerateVertices, "all points coincide");

  const Vector3d axis = (points[i1] - points[i0]).normalized();
  int i2 = -1;
  best = eps;
  for (int i = 0; i < n; ++i) {
    Vector3d d = points[i] - points[i0];
    double dist = (d - d.dot(axis) * axis).norm();
    if (dist > best) {
      best = dist;
      i2 = i;
    }
  }
  require(i2 >= 0, ErrorCode::DegenerateVertices, "points are collinear");

  Vector3d plane_n = (points[i1] - points[i0]).cross(points[i2] - points[i0]).normalized();
  int i3 = -1;
  best = eps;
  for (int i = 0; i < n; ++i) {
    double dist = std::abs(plane_n.dot(points[i] - points[i0]));
    if (dist > best) {
      best = dist;
      i3 = i;
    }
  }
  require(i3 >= 0, ErrorCode::DegenerateVertices, "points are coplanar");

  const Vector3d interior =
      0.25 * (points[i0] + points[i1] + points[i2] + points[i3]);

  std::vector<Face> faces;
  faces.push_back(make_face(i0, i1, i2, points, interior));
  faces.push_back(make_face(i0, i1, i3, points, interior));
  faces.push_back(make_face(i0, i2, i3, points, interior));
  faces.push_back(make_face(i1, i2, i3, points, interior));

  for (int p = 0; p < n; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;

    std::vector<int> visible;
    for (int f = 0; f < int(faces.size()); ++f) {
      if (faces[f].alive && faces[f].normal.dot(points[p]) - faces[f].offset > eps)
        visible.push_back(f);
    }
    if (visible.empty()) continue;

    // Horizon = directed edges of the visible region whose reverse edge is
    // not itself visible.
    std::map<std::pair<int, int>, int> edge_count;
    for (int f : visible) {
      const auto& v = faces[f].v;
      for (int k = 0; k < 3; ++k) {
        edge_count[{v[k], v[(k + 1) % 3]}]++;
      }
    }
    std::vector<std::pair<int, int>> horizon;
    for (const auto& [edge, count] : edge_count) {
      (void)count;
      if (!edge_count.contains({edge.second, edge.first})) horizon.push_back(edge);
    }
    for (int f : visible) faces[f].alive = false;
    for (const auto& [a, b] : horizon) {
      faces.push_back(make_face(a, b, p, points, interior));
    }
  }

  std::vector<HullTriangle> result;
  for (const auto& f : faces) {
    if (f.alive) result.push_back({f.v, f.normal, f.offset});
  }
  return result;
}

double hull_volume(const std::vector<Vector3d>& points,
                   const std::vector<HullTriangle>& triangles) {
  double six_v = 0;
  for (const auto& t : triangles) {
    const Vector3d& a = points[t.v[0]];
    const Vector3d& b = points[t.v[1]];
    const Vector3d& c = points[t.v[2]];
    double contribution = a.dot(b.cross(c));
    // Orient by the stored outward normal so winding mistakes cannot flip signs.
    if ((b - a).cross(c - a).dot(t.normal) < 0) contribution = -contribution;
    six_v += contribution;
  }
  return six_v / 6.0;
}

}  // namespace lookplan::geometry
