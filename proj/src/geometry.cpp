#include "lookplan/geometry.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "lookplan/convex_hull.hpp"
#include "lookplan/csv.hpp"
#include "lookplan/errors.hpp"

namespace lookplan::geometry {

namespace {

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

Point3 parse_point_line(const std::string& line, const std::filesystem::path& path,
                        std::size_t line_no) {
  std::istringstream iss(line);
  double x, y, z;
  if (!(iss >> x >> y >> z)) {
    raise(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) +
                                     ": expected three numeric fields, got \"" + line + "\"");
  }
  std::string rest;
  if (iss >> rest) {
    raise(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) +
                                     ": trailing content \"" + rest + "\"");
  }
  require(std::isfinite(x) && std::isfinite(y) && std::isfinite(z), ErrorCode::ParseError,
          path.string() + ":" + std::to_string(line_no) + ": non-finite coordinate");
  return Point3(x, y, z);
}

PointCloud load_xyz(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoFailure, "cannot open " + path.string());
  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line) || line.front() == '#') continue;
    cloud.points.push_back(parse_point_line(line, path, line_no));
  }
  require(!in.bad(), ErrorCode::IoFailure, "read error on " + path.string());
  return cloud;
}

PointCloud load_ply(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoFailure, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() {
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::ParseError,
            path.string() + ": truncated header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };

  next_line();
  require(line == "ply", ErrorCode::ParseError, path.string() + ": missing ply magic");
  next_line();
  require(line == "format ascii 1.0", ErrorCode::ParseError,
          path.string() + ": only \"format ascii 1.0\" is supported, got \"" + line + "\"");

  long vertex_count = -1;
  bool in_vertex_element = false;
  int property_index = 0;
  int ix = -1, iy = -1, iz = -1;
  int vertex_property_count = 0;
  while (true) {
    next_line();
    std::istringstream iss(line);
    std::string keyword;
    iss >> keyword;
    if (keyword == "comment" || keyword.empty()) continue;
    if (keyword == "end_header") break;
    if (keyword == "element") {
      std::string name;
      long count;
      require(static_cast<bool>(iss >> name >> count), ErrorCode::ParseError,
              path.string() + ":" + std::to_string(line_no) + ": malformed element line");
      in_vertex_element = (name == "vertex");
      if (in_vertex_element) {
        require(vertex_count < 0, ErrorCode::ParseError,
                path.string() + ": duplicate vertex element");
        vertex_count = count;
      } else {
        require(count == 0, ErrorCode::ParseError,
                path.string() + ": unsupported non-empty element \"" + name + "\"");
      }
      property_index = 0;
      continue;
    }
    if (keyword == "property") {
      if (!in_vertex_element) continue;
      std::string type, name;
      require(static_cast<bool>(iss >> type >> name), ErrorCode::ParseError,
              path.string() + ":" + std::to_string(line_no) + ": malformed property line");
      require(type != "list", ErrorCode::ParseError,
              path.string() + ": list properties are not supported on vertices");
      if (name == "x") ix = property_index;
      if (name == "y") iy = property_index;
      if (name == "z") iz = property_index;
      ++property_index;
      ++vertex_property_count;
      continue;
    }
    raise(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) +
                                     ": unsupported header keyword \"" + keyword + "\"");
  }
  require(vertex_count >= 0, ErrorCode::ParseError, path.string() + ": no vertex element");
  require(ix >= 0 && iy >= 0 && iz >= 0, ErrorCode::ParseError,
          path.string() + ": vertex element lacks x/y/z properties");

  PointCloud cloud;
  cloud.points.reserve(static_cast<std::size_t>(vertex_count));
  for (long i = 0; i < vertex_count; ++i) {
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::ParseError,
            path.string() + ": expected " + std::to_string(vertex_count) +
                " vertex rows, file ended after " + std::to_string(i));
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream iss(line);
    std::vector<double> fields(static_cast<std::size_t>(vertex_property_count));
    for (int f = 0; f < vertex_property_count; ++f) {
      require(static_cast<bool>(iss >> fields[static_cast<std::size_t>(f)]),
              ErrorCode::ParseError,
              path.string() + ":" + std::to_string(line_no) + ": short vertex row");
    }
    cloud.points.emplace_back(fields[static_cast<std::size_t>(ix)],
                              fields[static_cast<std::size_t>(iy)],
                              fields[static_cast<std::size_t>(iz)]);
  }
  return cloud;
}

// Groups near-identical face planes of a hull so each geometric face appears
// once, and anchors every offset to the farthest source vertex so membership
// at allowance 0 is exact for the vertices themselves.
std::vector<HalfSpace> hull_planes(const std::vector<Point3>& vertices,
                                   const std::vector<HullTriangle>& triangles) {
  double scale = 0.0;
  for (const auto& v : vertices) scale = std::max(scale, v.cwiseAbs().maxCoeff());
  const double offset_tol = 1e-7 * std::max(scale, 1.0);

  std::vector<HalfSpace> planes;
  for (const auto& tri : triangles) {
    bool merged = false;
    for (auto& p : planes) {
      if (p.normal.dot(tri.normal) > 1.0 - 1e-9 &&
          std::abs(p.offset - tri.offset) < offset_tol) {
        p.offset = std::max(p.offset, tri.offset);
        merged = true;
        break;
      }
    }
    if (!merged) planes.push_back({tri.normal, tri.offset});
  }
  for (auto& p : planes) {
    for (const auto& v : vertices) p.offset = std::max(p.offset, p.normal.dot(v));
  }
  return planes;
}

// Vertices of the polytope {p : n_i . p <= o_i} by intersecting every plane
// triple and keeping the feasible intersections.
std::vector<Point3> polytope_vertices(const std::vector<HalfSpace>& planes) {
  double scale = 1.0;
  for (const auto& p : planes) scale = std::max(scale, std::abs(p.offset));
  const double feas_tol = 1e-7 * scale;
  const double dedupe_tol = 1e-7 * scale;

  std::vector<Point3> vertices;
  const std::size_t n = planes.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      for (std::size_t c = b + 1; c < n; ++c) {
        Eigen::Matrix3d m;
        m.row(0) = planes[a].normal.transpose();
        m.row(1) = planes[b].normal.transpose();
        m.row(2) = planes[c].normal.transpose();
        if (std::abs(m.determinant()) < 1e-12) continue;
        const Eigen::Vector3d rhs(planes[a].offset, planes[b].offset, planes[c].offset);
        const Point3 candidate = m.partialPivLu().solve(rhs);
        bool feasible = true;
        for (const auto& p : planes) {
          if (p.normal.dot(candidate) > p.offset + feas_tol) {
            feasible = false;
            break;
          }
        }
        if (!feasible) continue;
        bool duplicate = false;
        for (const auto& v : vertices) {
          if ((v - candidate).cwiseAbs().maxCoeff() < dedupe_tol) {
            duplicate = true;
            break;
          }
        }
        if (!duplicate) vertices.push_back(candidate);
      }
    }
  }
  return vertices;
}

double polytope_volume(const std::vector<HalfSpace>& planes) {
  const std::vector<Point3> vertices = polytope_vertices(planes);
  if (vertices.size() < 4) return 0.0;
  try {
    const auto triangles = convex_hull(vertices);
    return hull_volume(vertices, triangles);
  } catch (const Error&) {
    return 0.0;  // vertices collapsed onto a plane: empty interior
  }
}

void sort_half_spaces(std::vector<HalfSpace>& planes) {
  std::sort(planes.begin(), planes.end(), [](const HalfSpace& a, const HalfSpace& b) {
    for (int i = 0; i < 3; ++i) {
      if (a.normal[i] != b.normal[i]) return a.normal[i] < b.normal[i];
    }
    return a.offset < b.offset;
  });
}

}  // namespace

void RigidTransform::validate() const {
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  const double defect = (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  require(defect < 1e-9, ErrorCode::NonOrthonormalRotation,
          "rotation is not orthonormal (max |R^T R - I| = " + format_double(defect) + ")");
  require(rotation.determinant() > 0.0, ErrorCode::NonOrthonormalRotation,
          "rotation has negative determinant (reflection)");
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(rotation.transpose() * translation);
  return inv;
}

PointCloud load_point_cloud(const std::filesystem::path& path, CloudFormat format) {
  PointCloud cloud =
      format == CloudFormat::XyzAscii ? load_xyz(path) : load_ply(path);
  require(!cloud.points.empty(), ErrorCode::EmptyCloud,
          path.string() + " contains no points");
  cloud.frame = Frame::Scanner;
  return cloud;
}

void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
  std::string out;
  out.reserve(cloud.points.size() * 24);
  for (const auto& p : cloud.points) {
    out += format_double(p.x());
    out += ' ';
    out += format_double(p.y());
    out += ' ';
    out += format_double(p.z());
    out += '\n';
  }
  write_text_file(path, out);
}

PointCloud apply_rigid_transform(const PointCloud& cloud, const RigidTransform& t) {
  t.validate();
  PointCloud out;
  out.capture_date = cloud.capture_date;
  out.frame = Frame::Bim;
  out.points.reserve(cloud.points.size());
  for (const auto& p : cloud.points) out.points.push_back(t(p));
  return out;
}

RigidTransform estimate_rigid_transform(std::span<const Point3> src,
                                        std::span<const Point3> dst) {
  require(src.size() == dst.size(), ErrorCode::ShapeMismatch,
          "correspondence lists differ in length (" + std::to_string(src.size()) +
              " vs " + std::to_string(dst.size()) + ")");
  require(src.size() >= 3, ErrorCode::DegenerateCorrespondences,
          "need at least 3 correspondences, got " + std::to_string(src.size()));

  Point3 src_centroid = Point3::Zero();
  Point3 dst_centroid = Point3::Zero();
  for (const auto& p : src) src_centroid += p;
  for (const auto& p : dst) dst_centroid += p;
  src_centroid /= static_cast<double>(src.size());
  dst_centroid /= static_cast<double>(dst.size());

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cross += (src[i] - src_centroid) * (dst[i] - dst_centroid).transpose();
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sigma = svd.singularValues();
  require(sigma(0) > 0.0 && sigma(1) > 1e-9 * sigma(0),
          ErrorCode::DegenerateCorrespondences,
          "correspondences are collinear or coincident");

  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) d(2, 2) = -1.0;

  RigidTransform t;
  t.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  t.translation = dst_centroid - t.rotation * src_centroid;
  t.validate();
  return t;
}

Enclosure build_enclosure(std::vector<Point3> vertices, std::string element_id,
                          double allowance) {
  require(allowance >= 0.0, ErrorCode::InvalidConfig,
          "enclosure allowance must be non-negative");
  require(vertices.size() >= 4, ErrorCode::DegenerateVertices,
          "enclosure \"" + element_id + "\" needs at least 4 vertices, got " +
              std::to_string(vertices.size()));

  Enclosure enc;
  enc.element_id = std::move(element_id);
  enc.allowance = allowance;

  std::vector<HalfSpace> planes;
  try {
    const auto triangles = convex_hull(vertices);
    planes = hull_planes(vertices, triangles);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateVertices) throw;
    // Flat vertex set (a wall face, say): box it instead.
    Point3 lo = vertices.front();
    Point3 hi = vertices.front();
    for (const auto& v : vertices) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    require(allowance > 0.0 || (hi - lo).minCoeff() > 0.0, ErrorCode::DegenerateVertices,
            "enclosure \"" + enc.element_id +
                "\" has a flat bounding box and zero allowance: empty interior");
    for (int axis = 0; axis < 3; ++axis) {
      Point3 n = Point3::Zero();
      n[axis] = 1.0;
      planes.push_back({n, hi[axis]});
      planes.push_back({-n, -lo[axis]});
    }
  }

  for (auto& p : planes) p.offset += allowance;
  sort_half_spaces(planes);
  enc.half_spaces = std::move(planes);
  enc.volume = polytope_volume(enc.half_spaces);
  require(enc.volume > 0.0, ErrorCode::DegenerateVertices,
          "enclosure \"" + enc.element_id + "\" has empty interior");

  for (const auto& v : vertices) {
    require(enc.contains(v), ErrorCode::DegenerateVertices,
            "enclosure \"" + enc.element_id + "\" does not contain its own vertex");
  }
  enc.source_vertices = std::move(vertices);
  return enc;
}

ClassificationResult classify_points(const PointCloud& cloud,
                                     const std::vector<Enclosure>& enclosures) {
  require(cloud.frame == Frame::Bim, ErrorCode::ScannerFrame,
          "cloud must be registered to the model frame before classification");

  // Containment ambiguity resolves to the tightest enclosure, then by id.
  std::vector<const Enclosure*> ordered;
  ordered.reserve(enclosures.size());
  for (const auto& e : enclosures) ordered.push_back(&e);
  std::sort(ordered.begin(), ordered.end(), [](const Enclosure* a, const Enclosure* b) {
    if (a->volume != b->volume) return a->volume < b->volume;
    return a->element_id < b->element_id;
  });

  ClassificationResult result;
  result.counts[kTemporaryLabel] = 0;
  for (const auto& e : enclosures) {
    const auto [it, inserted] = result.counts.emplace(e.element_id, 0);
    require(inserted, ErrorCode::SchemaViolation,
            "duplicate enclosure element id \"" + e.element_id + "\"");
  }

  result.labels.reserve(cloud.points.size());
  for (const auto& p : cloud.points) {
    const char* label = kTemporaryLabel;
    for (const Enclosure* e : ordered) {
      if (e->contains(p)) {
        label = e->element_id.c_str();
        break;
      }
    }
    result.labels.emplace_back(label);
    ++result.counts[result.labels.back()];
  }
  return result;
}

SpatialMetrics compute_spatial_metrics(const ClassificationResult& result,
                                       const PointCloud& cloud,
                                       const std::string& floor_element_id,
                                       Date capture_date) {
  require(result.labels.size() == cloud.points.size(), ErrorCode::ShapeMismatch,
          "classification labels and cloud differ in size");
  const auto floor_it = result.counts.find(floor_element_id);
  require(floor_it != result.counts.end(), ErrorCode::UnknownElement,
          "floor element \"" + floor_element_id + "\" was not among the enclosures");

  SpatialMetrics m;
  m.capture_date = capture_date;
  m.n_floor = floor_it->second;
  const auto temp_it = result.counts.find(kTemporaryLabel);
  m.n_temp = temp_it == result.counts.end() ? 0 : temp_it->second;
  require(m.n_temp + m.n_floor > 0, ErrorCode::NoFloorOrTempPoints,
          "no temporary or floor points on " + capture_date.iso());
  m.utilization_extent =
      static_cast<double>(m.n_temp) / static_cast<double>(m.n_temp + m.n_floor);

  if (m.n_temp > 0) {
    Point3 sum = Point3::Zero();
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
      if (result.labels[i] == kTemporaryLabel) sum += cloud.points[i];
    }
    m.closeness = sum / static_cast<double>(m.n_temp);
  }
  return m;
}

static const char* kMetricsHeader =
    "date,closeness_x,closeness_y,closeness_z,utilization_extent,n_temp,n_floor";

void append_metrics_row(const std::filesystem::path& path, const SpatialMetrics& metrics) {
  std::string row = metrics.capture_date.iso();
  row += ',';
  if (metrics.closeness) {
    row += format_double(metrics.closeness->x());
    row += ',';
    row += format_double(metrics.closeness->y());
    row += ',';
    row += format_double(metrics.closeness->z());
  } else {
    row += ",,";
  }
  row += ',';
  row += format_double(metrics.utilization_extent);
  row += ',';
  row += std::to_string(metrics.n_temp);
  row += ',';
  row += std::to_string(metrics.n_floor);
  row += '\n';

  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::app);
  require(out.good(), ErrorCode::IoFailure, "cannot open " + path.string());
  if (fresh) out << kMetricsHeader << '\n';
  out << row;
  require(out.good(), ErrorCode::IoFailure, "write failed on " + path.string());
}

std::vector<SpatialMetrics> read_metrics_log(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::vector<std::string> expected = {
      "date",   "closeness_x",        "closeness_y", "closeness_z",
      "utilization_extent", "n_temp", "n_floor"};
  require(table.header == expected, ErrorCode::SchemaViolation,
          path.string() + ": unexpected metrics log header");

  std::vector<SpatialMetrics> rows;
  rows.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    SpatialMetrics m;
    m.capture_date = Date::parse(r[0]);
    const bool absent = r[1].empty() && r[2].empty() && r[3].empty();
    const bool present = !r[1].empty() && !r[2].empty() && !r[3].empty();
    require(absent || present, ErrorCode::SchemaViolation,
            path.string() + ": closeness fields must be all present or all empty on " +
                r[0]);
    const std::string where = path.string() + " row " + r[0];
    if (present) {
      m.closeness = Point3(parse_double(r[1], where), parse_double(r[2], where),
                           parse_double(r[3], where));
    }
    m.utilization_extent = parse_double(r[4], where);
    m.n_temp = static_cast<std::size_t>(parse_long(r[5], where));
    m.n_floor = static_cast<std::size_t>(parse_long(r[6], where));
    rows.push_back(m);
  }
  return rows;
}

RigidTransform load_transform_from_correspondences(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::vector<std::string> expected = {"src_x", "src_y", "src_z",
                                             "dst_x", "dst_y", "dst_z"};
  require(table.header == expected, ErrorCode::SchemaViolation,
          path.string() + ": expected header src_x,src_y,src_z,dst_x,dst_y,dst_z");
  std::vector<Point3> src, dst;
  src.reserve(table.rows.size());
  dst.reserve(table.rows.size());
  const std::string where = path.string() + " correspondence row";
  for (const auto& r : table.rows) {
    src.emplace_back(parse_double(r[0], where), parse_double(r[1], where),
                     parse_double(r[2], where));
    dst.emplace_back(parse_double(r[3], where), parse_double(r[4], where),
                     parse_double(r[5], where));
  }
  return estimate_rigid_transform(src, dst);
}

}  // namespace lookplan::geometry
