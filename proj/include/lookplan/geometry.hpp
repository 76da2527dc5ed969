#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lookplan/dates.hpp"

namespace lookplan::geometry {

using Point3 = Eigen::Vector3d;

enum class Frame { Scanner, Bim };
enum class CloudFormat { XyzAscii, PlyAscii };

struct PointCloud {
  std::vector<Point3> points;
  Date capture_date;
  Frame frame = Frame::Scanner;
};

// Proper rigid motion p -> R p + t.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  // R must be orthonormal with det +1; max |R^T R - I| < 1e-9.
  void validate() const;
  RigidTransform inverse() const;
  Point3 operator()(const Point3& p) const { return rotation * p + translation; }
};

// Inside iff normal . p <= offset. Normals are unit length.
struct HalfSpace {
  Eigen::Vector3d normal;
  double offset;
};

// Convex containment volume for one BIM element, allowance already applied
// to the stored offsets.
struct Enclosure {
  std::string element_id;
  std::vector<HalfSpace> half_spaces;
  double allowance = 0.0;
  std::vector<Point3> source_vertices;
  double volume = 0.0;  // of the allowance-inflated region

  bool contains(const Point3& p) const {
    for (const auto& h : half_spaces) {
      if (h.normal.dot(p) > h.offset) return false;
    }
    return true;
  }
};

inline constexpr const char* kTemporaryLabel = "TEMPORARY";

struct ClassificationResult {
  std::vector<std::string> labels;               // one per point
  std::map<std::string, std::size_t> counts;     // label -> point count
};

struct SpatialMetrics {
  Date capture_date;
  std::optional<Point3> closeness;  // absent when there are no temporary points
  double utilization_extent = 0.0;
  std::size_t n_temp = 0;
  std::size_t n_floor = 0;
};

PointCloud load_point_cloud(const std::filesystem::path& path, CloudFormat format);
void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path);

PointCloud apply_rigid_transform(const PointCloud& cloud, const RigidTransform& t);

// Least-squares rigid alignment (no scale) of matched point pairs,
// reflection-corrected so det R = +1.
RigidTransform estimate_rigid_transform(std::span<const Point3> src,
                                        std::span<const Point3> dst);

// Convex hull of `vertices` as half-spaces, each plane pushed outward along
// its normal by `allowance`. Coplanar/degenerate vertex sets fall back to the
// axis-aligned bounding box; a fallback with empty interior is an error.
Enclosure build_enclosure(std::vector<Point3> vertices, std::string element_id,
                          double allowance);

// Labels every point with the id of the containing enclosure (smallest volume
// wins, ties by lexicographic id) or TEMPORARY when no enclosure contains it.
ClassificationResult classify_points(const PointCloud& cloud,
                                     const std::vector<Enclosure>& enclosures);

SpatialMetrics compute_spatial_metrics(const ClassificationResult& result,
                                       const PointCloud& cloud,
                                       const std::string& floor_element_id,
                                       Date capture_date);

// Append-only metrics log:
// date,closeness_x,closeness_y,closeness_z,utilization_extent,n_temp,n_floor
void append_metrics_row(const std::filesystem::path& path, const SpatialMetrics& metrics);
std::vector<SpatialMetrics> read_metrics_log(const std::filesystem::path& path);

// Correspondence CSV: src_x,src_y,src_z,dst_x,dst_y,dst_z
RigidTransform load_transform_from_correspondences(const std::filesystem::path& path);

}  // namespace lookplan::geometry
