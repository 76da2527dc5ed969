#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lookplan/dates.hpp"
#include "lookplan/geometry.hpp"

namespace lookplan::bim {

using geometry::Point3;

enum class ElementKind { Wall, Floor, Ceiling, Other };

ElementKind parse_element_kind(const std::string& text);
std::string element_kind_name(ElementKind kind);

struct BimElement {
  std::string id;
  ElementKind kind = ElementKind::Other;
  std::vector<Point3> vertices;  // >= 4
};

struct PlannedTask {
  std::string id;
  std::string material_condition;
  std::string element_id;
  double planned_quantity = 0.0;  // > 0
  std::string unit;               // m2 | m | count
  Date start_date;
  int duration_days = 1;
};

// As-planned model: element geometry plus the schedule rows tied to it.
struct Bim4D {
  std::vector<BimElement> elements;
  std::vector<PlannedTask> tasks;

  // Sorted unique material-condition names; index order is the stable
  // encoding order used downstream.
  std::vector<std::string> vocabulary() const;

  const BimElement& element(const std::string& element_id) const;
  const PlannedTask& task(const std::string& task_id) const;
  // The unique task whose material_condition matches; ambiguity is an error.
  const PlannedTask& task_for_condition(const std::string& condition) const;
};

Bim4D load_bim(const std::filesystem::path& path);
void save_bim(const Bim4D& bim, const std::filesystem::path& path);

// Planned completion in [0,100]: 0 before start, linear over calendar days,
// 100 from start + duration onward. The second form takes a fractional
// day-since-1970 position for sub-day evaluation.
double planned_fraction_at(const PlannedTask& task, Date date);
double planned_fraction_at(const PlannedTask& task, double serial_days);

std::vector<Point3> element_vertices(const Bim4D& bim, const std::string& element_id);

}  // namespace lookplan::bim
