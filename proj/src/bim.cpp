#include "lookplan/bim.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "lookplan/csv.hpp"
#include "lookplan/errors.hpp"

namespace lookplan::bim {

namespace {

using nlohmann::ordered_json;

const nlohmann::json& field(const nlohmann::json& obj, const char* name,
                            const std::string& where) {
  const auto it = obj.find(name);
  require(it != obj.end(), ErrorCode::SchemaViolation,
          where + ": missing field \"" + name + "\"");
  return *it;
}

std::string string_field(const nlohmann::json& obj, const char* name,
                         const std::string& where) {
  const auto& v = field(obj, name, where);
  require(v.is_string(), ErrorCode::SchemaViolation,
          where + ": field \"" + name + "\" must be a string");
  return v.get<std::string>();
}

double number_field(const nlohmann::json& obj, const char* name,
                    const std::string& where) {
  const auto& v = field(obj, name, where);
  require(v.is_number(), ErrorCode::SchemaViolation,
          where + ": field \"" + name + "\" must be a number");
  return v.get<double>();
}

bool valid_unit(const std::string& unit) {
  return unit == "m2" || unit == "m" || unit == "count";
}

}  // namespace

ElementKind parse_element_kind(const std::string& text) {
  if (text == "WALL") return ElementKind::Wall;
  if (text == "FLOOR") return ElementKind::Floor;
  if (text == "CEILING") return ElementKind::Ceiling;
  if (text == "OTHER") return ElementKind::Other;
  raise(ErrorCode::SchemaViolation, "unknown element kind \"" + text + "\"");
}

std::string element_kind_name(ElementKind kind) {
  switch (kind) {
    case ElementKind::Wall: return "WALL";
    case ElementKind::Floor: return "FLOOR";
    case ElementKind::Ceiling: return "CEILING";
    case ElementKind::Other: return "OTHER";
  }
  raise(ErrorCode::SchemaViolation, "invalid element kind value");
}

std::vector<std::string> Bim4D::vocabulary() const {
  std::set<std::string> names;
  for (const auto& t : tasks) names.insert(t.material_condition);
  return {names.begin(), names.end()};
}

const BimElement& Bim4D::element(const std::string& element_id) const {
  for (const auto& e : elements) {
    if (e.id == element_id) return e;
  }
  raise(ErrorCode::UnknownElement, "no element with id \"" + element_id + "\"");
}

const PlannedTask& Bim4D::task(const std::string& task_id) const {
  for (const auto& t : tasks) {
    if (t.id == task_id) return t;
  }
  raise(ErrorCode::UnknownTask, "no task with id \"" + task_id + "\"");
}

const PlannedTask& Bim4D::task_for_condition(const std::string& condition) const {
  const PlannedTask* found = nullptr;
  for (const auto& t : tasks) {
    if (t.material_condition != condition) continue;
    require(found == nullptr, ErrorCode::AmbiguousCondition,
            "material condition \"" + condition +
                "\" matches several tasks; observations cannot be resolved");
    found = &t;
  }
  require(found != nullptr, ErrorCode::UnknownCondition,
          "material condition \"" + condition + "\" matches no task");
  return *found;
}

Bim4D load_bim(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  const std::string where = path.string();
  require(doc.is_object(), ErrorCode::SchemaViolation, where + ": root must be an object");

  Bim4D bim;
  const auto& elements = field(doc, "elements", where);
  require(elements.is_array(), ErrorCode::SchemaViolation,
          where + ": \"elements\" must be an array");
  std::set<std::string> element_ids;
  for (const auto& e : elements) {
    BimElement elem;
    const std::string ctx = where + ": element";
    elem.id = string_field(e, "id", ctx);
    elem.kind = parse_element_kind(string_field(e, "kind", ctx + " " + elem.id));
    const auto& verts = field(e, "vertices", ctx + " " + elem.id);
    require(verts.is_array(), ErrorCode::SchemaViolation,
            ctx + " " + elem.id + ": \"vertices\" must be an array");
    for (const auto& v : verts) {
      require(v.is_array() && v.size() == 3 && v[0].is_number() && v[1].is_number() &&
                  v[2].is_number(),
              ErrorCode::SchemaViolation,
              ctx + " " + elem.id + ": each vertex must be [x, y, z]");
      const Point3 p(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
      require(p.allFinite(), ErrorCode::SchemaViolation,
              ctx + " " + elem.id + ": non-finite vertex coordinate");
      elem.vertices.push_back(p);
    }
    require(elem.vertices.size() >= 4, ErrorCode::SchemaViolation,
            ctx + " " + elem.id + ": needs at least 4 vertices, has " +
                std::to_string(elem.vertices.size()));
    require(element_ids.insert(elem.id).second, ErrorCode::SchemaViolation,
            where + ": duplicate element id \"" + elem.id + "\"");
    bim.elements.push_back(std::move(elem));
  }

  const auto& tasks = field(doc, "tasks", where);
  require(tasks.is_array(), ErrorCode::SchemaViolation,
          where + ": \"tasks\" must be an array");
  std::set<std::string> task_ids;
  std::set<std::pair<std::string, std::string>> condition_per_element;
  for (const auto& t : tasks) {
    PlannedTask task;
    const std::string ctx = where + ": task";
    task.id = string_field(t, "id", ctx);
    const std::string tctx = ctx + " " + task.id;
    task.material_condition = string_field(t, "material_condition", tctx);
    require(!task.material_condition.empty(), ErrorCode::SchemaViolation,
            tctx + ": empty material_condition");
    task.element_id = string_field(t, "element_id", tctx);
    task.planned_quantity = number_field(t, "planned_quantity", tctx);
    require(task.planned_quantity > 0.0, ErrorCode::SchemaViolation,
            tctx + ": planned_quantity must be positive");
    task.unit = string_field(t, "unit", tctx);
    require(valid_unit(task.unit), ErrorCode::SchemaViolation,
            tctx + ": unit must be one of m2, m, count; got \"" + task.unit + "\"");
    task.start_date = Date::parse(string_field(t, "start_date", tctx));
    const double duration = number_field(t, "duration_days", tctx);
    require(duration >= 1.0 && duration == std::floor(duration),
            ErrorCode::SchemaViolation, tctx + ": duration_days must be an integer >= 1");
    task.duration_days = static_cast<int>(duration);

    require(task_ids.insert(task.id).second, ErrorCode::SchemaViolation,
            where + ": duplicate task id \"" + task.id + "\"");
    require(element_ids.count(task.element_id) == 1, ErrorCode::DanglingElement,
            tctx + ": references unknown element \"" + task.element_id + "\"");
    require(
        condition_per_element.insert({task.element_id, task.material_condition}).second,
        ErrorCode::SchemaViolation,
        tctx + ": material condition \"" + task.material_condition +
            "\" repeats on element \"" + task.element_id + "\"");
    bim.tasks.push_back(std::move(task));
  }
  return bim;
}

void save_bim(const Bim4D& bim, const std::filesystem::path& path) {
  ordered_json doc;
  doc["elements"] = ordered_json::array();
  for (const auto& e : bim.elements) {
    ordered_json elem;
    elem["id"] = e.id;
    elem["kind"] = element_kind_name(e.kind);
    elem["vertices"] = ordered_json::array();
    for (const auto& v : e.vertices) {
      elem["vertices"].push_back({v.x(), v.y(), v.z()});
    }
    doc["elements"].push_back(std::move(elem));
  }
  doc["tasks"] = ordered_json::array();
  for (const auto& t : bim.tasks) {
    ordered_json task;
    task["id"] = t.id;
    task["material_condition"] = t.material_condition;
    task["element_id"] = t.element_id;
    task["planned_quantity"] = t.planned_quantity;
    task["unit"] = t.unit;
    task["start_date"] = t.start_date.iso();
    task["duration_days"] = t.duration_days;
    doc["tasks"].push_back(std::move(task));
  }
  write_text_file(path, doc.dump(2) + "\n");
}

double planned_fraction_at(const PlannedTask& task, Date date) {
  return planned_fraction_at(task, static_cast<double>(date.serial()));
}

double planned_fraction_at(const PlannedTask& task, double serial_days) {
  const double elapsed = serial_days - static_cast<double>(task.start_date.serial());
  if (elapsed <= 0.0) return 0.0;
  if (elapsed >= static_cast<double>(task.duration_days)) return 100.0;
  return 100.0 * elapsed / static_cast<double>(task.duration_days);
}

std::vector<Point3> element_vertices(const Bim4D& bim, const std::string& element_id) {
  return bim.element(element_id).vertices;
}

}  // namespace lookplan::bim
