#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "perceptqa/geometry.hpp"

namespace pqa {

using json = nlohmann::ordered_json;

// ===== Element references =====

enum class ElemPart { Whole, Side, Vertex };

struct ElementRef {
  int shape = 0;
  ElemPart part = ElemPart::Whole;
  int index = 0;

  bool operator==(const ElementRef&) const = default;
};

struct RelationSpec {
  RelationKind kind = RelationKind::Intersect;
  ElementRef subject;
  ElementRef object;
};

// ===== Annotations =====
//
// Every annotation stores the exact measured value or group identity it
// depicts; rendering rounds for display, validation recomputes the claim.

struct RightAngleMark {
  int shape = 0;
  int vertex = 0;
};

struct EqualSideTick {
  int group = 1;  // 1..3, doubles as the tick count when drawn
  int shape = 0;
  int side = 0;
};

struct EqualAngleArc {
  int group = 1;
  int shape = 0;
  int vertex = 0;
};

struct LengthLabel {
  int shape = 0;
  int side = 0;
  double value = 0;
};

struct AngleLabel {
  int shape = 0;
  int vertex = 0;
  double degrees = 0;
};

struct Annotation {
  std::variant<RightAngleMark, EqualSideTick, EqualAngleArc, LengthLabel, AngleLabel> mark;
};

// Placement derived from another shape by a recorded transform.
struct DerivedPlacement {
  int src = 0;
  int dst = 0;
  Transform transform;
};

// ===== Scene =====

struct Scene {
  std::uint64_t seed = 0;
  std::string source = "synthetic";
  std::vector<Shape> shapes;
  std::vector<RelationSpec> relations;
  std::vector<Annotation> annotations;
  std::vector<DerivedPlacement> derived;
};

struct AabBox {
  double min_x = 0, min_y = 0, max_x = 1, max_y = 1;
};

inline AabBox scene_bbox(const Scene& scene) {
  AabBox box{1e9, 1e9, -1e9, -1e9};
  auto grow = [&](double x, double y) {
    box.min_x = std::min(box.min_x, x);
    box.min_y = std::min(box.min_y, y);
    box.max_x = std::max(box.max_x, x);
    box.max_y = std::max(box.max_y, y);
  };
  for (const Shape& s : scene.shapes) {
    if (const auto* c = std::get_if<Circle>(&s.geom)) {
      grow(c->center.x - c->radius, c->center.y - c->radius);
      grow(c->center.x + c->radius, c->center.y + c->radius);
    } else {
      for (Point p : s.points()) grow(p.x, p.y);
    }
  }
  if (box.min_x > box.max_x) box = {0, 0, 1, 1};
  return box;
}

inline double scene_diameter(const Scene& scene) {
  AabBox b = scene_bbox(scene);
  return std::max(1e-6, std::hypot(b.max_x - b.min_x, b.max_y - b.min_y));
}

inline Tolerance scene_tolerance(const Scene& scene) {
  return Tolerance::for_diameter(scene_diameter(scene));
}

// ===== Labels =====

// Letters run A, B, C, ... over all labelable points ordered top to bottom,
// then left to right, matching how a reader scans a figure.
inline void assign_labels(Scene& scene) {
  struct Slot {
    double x, y;
    std::size_t shape, point;
  };
  std::vector<Slot> slots;
  for (std::size_t si = 0; si < scene.shapes.size(); ++si) {
    auto pts = scene.shapes[si].points();
    scene.shapes[si].labels.assign(pts.size(), 0);
    for (std::size_t pi = 0; pi < pts.size(); ++pi)
      slots.push_back({pts[pi].x, pts[pi].y, si, pi});
  }
  if (slots.size() > 26) fail(Err::OutOfRange, "more labelable points than letters");
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
    if (a.y != b.y) return a.y > b.y;
    if (a.x != b.x) return a.x < b.x;
    if (a.shape != b.shape) return a.shape < b.shape;
    return a.point < b.point;
  });
  char next = 'A';
  for (const Slot& s : slots) scene.shapes[s.shape].labels[s.point] = next++;
}

struct LabeledPoint {
  char label = 0;
  Point at;
  int shape = 0;
  int point = 0;
};

inline std::vector<LabeledPoint> labeled_points(const Scene& scene) {
  std::vector<LabeledPoint> out;
  for (std::size_t si = 0; si < scene.shapes.size(); ++si) {
    auto pts = scene.shapes[si].points();
    const auto& labels = scene.shapes[si].labels;
    for (std::size_t pi = 0; pi < pts.size() && pi < labels.size(); ++pi)
      if (labels[pi])
        out.push_back({labels[pi], pts[pi], static_cast<int>(si), static_cast<int>(pi)});
  }
  return out;
}

inline std::optional<LabeledPoint> find_label(const Scene& scene, char label) {
  for (const auto& lp : labeled_points(scene))
    if (lp.label == label) return lp;
  return std::nullopt;
}

// Label string for a shape: vertex letters in order, or the center letter.
inline std::string shape_label_string(const Shape& s) {
  std::string out;
  for (char c : s.labels)
    if (c) out.push_back(c);
  return out;
}

inline std::string shape_display_name(const Shape& s) {
  std::string letters = shape_label_string(s);
  switch (s.kind()) {
    case ShapeKind::Segment: return "segment " + letters;
    case ShapeKind::Circle: return "the circle centered at " + letters;
    case ShapeKind::Triangle: return "triangle " + letters;
    case ShapeKind::Quadrilateral: return "quadrilateral " + letters;
    case ShapeKind::Pentagon: return "pentagon " + letters;
  }
  return letters;
}

// ===== Element resolution =====

inline const Shape& shape_at(const Scene& scene, int idx) {
  if (idx < 0 || static_cast<std::size_t>(idx) >= scene.shapes.size())
    fail(Err::OutOfRange, "shape index " + std::to_string(idx));
  return scene.shapes[static_cast<std::size_t>(idx)];
}

// Resolves a reference to a concrete shape; sides come back as segments
// carrying their endpoint labels.
inline Shape element_shape(const Scene& scene, const ElementRef& ref) {
  const Shape& base = shape_at(scene, ref.shape);
  switch (ref.part) {
    case ElemPart::Whole:
      return base;
    case ElemPart::Side: {
      Segment seg = base.side(static_cast<std::size_t>(ref.index));
      Shape out = make_segment(seg.a, seg.b);
      if (const auto* poly = std::get_if<Polygon>(&base.geom)) {
        std::size_t n = poly->vertices.size();
        out.labels[0] = base.labels[static_cast<std::size_t>(ref.index)];
        out.labels[1] = base.labels[(static_cast<std::size_t>(ref.index) + 1) % n];
      } else {
        out.labels = base.labels;
      }
      return out;
    }
    case ElemPart::Vertex:
      fail(Err::OutOfRange, "vertex reference is a point, not a shape");
  }
  fail(Err::OutOfRange, "bad element part");
}

inline Point element_point(const Scene& scene, const ElementRef& ref) {
  const Shape& base = shape_at(scene, ref.shape);
  auto pts = base.points();
  if (ref.part != ElemPart::Vertex || ref.index < 0 ||
      static_cast<std::size_t>(ref.index) >= pts.size())
    fail(Err::OutOfRange, "bad vertex reference");
  return pts[static_cast<std::size_t>(ref.index)];
}

inline bool refers_to_shape(const RelationSpec& rel, int shape_idx) {
  return rel.subject.shape == shape_idx || rel.object.shape == shape_idx;
}

// Relations that justify two shapes touching on canvas.
inline bool is_contact_kind(RelationKind k) {
  return k == RelationKind::Tangent || k == RelationKind::Intersect ||
         k == RelationKind::Contains;
}

inline bool declared_contact(const Scene& scene, int i, int j) {
  for (const auto& rel : scene.relations)
    if (is_contact_kind(rel.kind) && refers_to_shape(rel, i) && refers_to_shape(rel, j))
      return true;
  return false;
}

// ===== Validation =====

inline constexpr double kMinSeparation = 0.02;

struct Violation {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const {
    std::ostringstream os;
    for (const auto& v : violations) os << v.code << ": " << v.message << "\n";
    return os.str();
  }
};

inline ValidationReport validate_scene(const Scene& scene) {
  ValidationReport rep;
  auto flag = [&](std::string code, std::string msg) {
    rep.violations.push_back({std::move(code), std::move(msg)});
  };
  if (scene.shapes.empty() || scene.shapes.size() > 4)
    flag("ShapeCount", "scene holds " + std::to_string(scene.shapes.size()) + " shapes");
  Tolerance tol = scene_tolerance(scene);

  for (std::size_t i = 0; i < scene.shapes.size(); ++i) {
    const Shape& s = scene.shapes[i];
    if (auto defect = shape_defect(s))
      flag("ShapeInvalid", "shape " + std::to_string(i) + ": " + *defect);
    if (s.labels.size() != s.point_count())
      flag("LabelArity", "shape " + std::to_string(i) + " label slots");
    for (Point p : s.points())
      if (p.x < -tol.abs_eps || p.x > 1 + tol.abs_eps || p.y < -tol.abs_eps ||
          p.y > 1 + tol.abs_eps)
        flag("OutOfBounds", "shape " + std::to_string(i) + " leaves the unit canvas");
    if (const auto* c = std::get_if<Circle>(&s.geom)) {
      if (c->center.x - c->radius < -tol.abs_eps || c->center.x + c->radius > 1 + tol.abs_eps ||
          c->center.y - c->radius < -tol.abs_eps || c->center.y + c->radius > 1 + tol.abs_eps)
        flag("OutOfBounds", "circle " + std::to_string(i) + " leaves the unit canvas");
    }
  }

  // Duplicate labels.
  std::map<char, int> seen;
  for (const auto& lp : labeled_points(scene))
    if (++seen[lp.label] == 2) flag("LabelDuplicate", std::string("label ") + lp.label);

  // Declared relations must hold.
  for (std::size_t i = 0; i < scene.relations.size(); ++i) {
    const auto& rel = scene.relations[i];
    try {
      Shape a = element_shape(scene, rel.subject);
      Shape b = element_shape(scene, rel.object);
      if (!relation_holds(rel.kind, a, b, tol))
        flag("DeclaredRelationFalse",
             std::string(relation_name(rel.kind)) + " relation " + std::to_string(i));
    } catch (const Error& e) {
      flag("RelationInvalid", "relation " + std::to_string(i) + ": " + e.what());
    }
  }

  // Derived placements must reproduce their target shape.
  for (const auto& d : scene.derived) {
    try {
      Shape expect = apply_transform(shape_at(scene, d.src), d.transform);
      const Shape& got = shape_at(scene, d.dst);
      auto ep = expect.points();
      auto gp = got.points();
      bool same = ep.size() == gp.size();
      for (std::size_t k = 0; same && k < ep.size(); ++k)
        same = distance(ep[k], gp[k]) <= 1e-6;
      if (const auto* ce = std::get_if<Circle>(&expect.geom); same && ce)
        same = std::abs(ce->radius - std::get<Circle>(got.geom).radius) <= 1e-6;
      if (!same) flag("DerivedTransformFalse", "derived shape " + std::to_string(d.dst));
    } catch (const Error& e) {
      flag("DerivedTransformFalse", e.what());
    }
  }

  // Annotations must state true facts about the drawn geometry.
  for (std::size_t ai = 0; ai < scene.annotations.size(); ++ai) {
    const auto& a = scene.annotations[ai];
    auto where = "annotation " + std::to_string(ai);
    try {
      if (const auto* m = std::get_if<RightAngleMark>(&a.mark)) {
        const auto& poly = std::get<Polygon>(shape_at(scene, m->shape).geom);
        double deg = interior_angle(poly, static_cast<std::size_t>(m->vertex), tol);
        if (classify_angle(deg, tol) != AngleClass::Right)
          flag("AnnotationFalse", where + ": right angle mark on " + format_double(deg));
      } else if (const auto* t = std::get_if<EqualSideTick>(&a.mark)) {
        shape_at(scene, t->shape).side(static_cast<std::size_t>(t->side));
        bool partner = false;
        for (const auto& other : scene.annotations)
          if (const auto* u = std::get_if<EqualSideTick>(&other.mark))
            if (u->group == t->group && (u->shape != t->shape || u->side != t->side)) {
              partner = true;
              Segment s1 = shape_at(scene, t->shape).side(static_cast<std::size_t>(t->side));
              Segment s2 = shape_at(scene, u->shape).side(static_cast<std::size_t>(u->side));
              if (std::abs(distance(s1.a, s1.b) - distance(s2.a, s2.b)) > tol.abs_eps)
                flag("AnnotationFalse", where + ": unequal sides share tick group");
            }
        if (!partner) flag("AnnotationFalse", where + ": tick group of one");
      } else if (const auto* arc = std::get_if<EqualAngleArc>(&a.mark)) {
        const auto& poly = std::get<Polygon>(shape_at(scene, arc->shape).geom);
        double deg = interior_angle(poly, static_cast<std::size_t>(arc->vertex), tol);
        bool partner = false;
        for (const auto& other : scene.annotations)
          if (const auto* u = std::get_if<EqualAngleArc>(&other.mark))
            if (u->group == arc->group && (u->shape != arc->shape || u->vertex != arc->vertex)) {
              partner = true;
              const auto& p2 = std::get<Polygon>(shape_at(scene, u->shape).geom);
              double deg2 = interior_angle(p2, static_cast<std::size_t>(u->vertex), tol);
              if (std::abs(deg - deg2) > tol.angle_eps)
                flag("AnnotationFalse", where + ": unequal angles share arc group");
            }
        if (!partner) flag("AnnotationFalse", where + ": arc group of one");
      } else if (const auto* ll = std::get_if<LengthLabel>(&a.mark)) {
        Segment s = shape_at(scene, ll->shape).side(static_cast<std::size_t>(ll->side));
        if (std::abs(distance(s.a, s.b) - ll->value) > 1e-6)
          flag("AnnotationFalse", where + ": length label off by more than 1e-6");
      } else if (const auto* al = std::get_if<AngleLabel>(&a.mark)) {
        const auto& poly = std::get<Polygon>(shape_at(scene, al->shape).geom);
        double deg = interior_angle(poly, static_cast<std::size_t>(al->vertex), tol);
        if (std::abs(deg - al->degrees) > 1e-6)
          flag("AnnotationFalse", where + ": angle label off by more than 1e-6");
      }
    } catch (const Error& e) {
      flag("AnnotationRef", where + ": " + e.what());
    } catch (const std::bad_variant_access&) {
      flag("AnnotationRef", where + ": mark on wrong shape kind");
    }
  }

  // Shapes without a declared contact keep a visible gap.
  for (std::size_t i = 0; i < scene.shapes.size(); ++i)
    for (std::size_t j = i + 1; j < scene.shapes.size(); ++j) {
      if (declared_contact(scene, static_cast<int>(i), static_cast<int>(j))) continue;
      double d = boundary_distance(scene.shapes[i], scene.shapes[j]);
      if (d < kMinSeparation - tol.abs_eps)
        flag("MinSeparation", "shapes " + std::to_string(i) + " and " + std::to_string(j) +
                                  " sit " + format_double(d) + " apart");
    }

  return rep;
}

// ===== Serialization =====

inline json point_to_json(Point p) { return json{{"x", p.x}, {"y", p.y}}; }
inline Point point_from_json(const json& j) { return {j.at("x").get<double>(), j.at("y").get<double>()}; }

inline json shape_to_json(const Shape& s) {
  json j;
  j["kind"] = kind_name(s.kind());
  if (const auto* seg = std::get_if<Segment>(&s.geom)) {
    j["points"] = json::array({point_to_json(seg->a), point_to_json(seg->b)});
  } else if (const auto* c = std::get_if<Circle>(&s.geom)) {
    j["center"] = point_to_json(c->center);
    j["radius"] = c->radius;
  } else {
    json pts = json::array();
    for (Point p : std::get<Polygon>(s.geom).vertices) pts.push_back(point_to_json(p));
    j["points"] = pts;
  }
  std::string labels;
  for (char c : s.labels) labels.push_back(c ? c : '.');
  j["labels"] = labels;
  return j;
}

inline Shape shape_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  Shape s;
  if (kind == "circle") {
    s = make_circle(point_from_json(j.at("center")), j.at("radius").get<double>());
  } else {
    std::vector<Point> pts;
    for (const auto& pj : j.at("points")) pts.push_back(point_from_json(pj));
    if (kind == "segment") {
      if (pts.size() != 2) fail(Err::SchemaViolation, "segment needs two points");
      s = make_segment(pts[0], pts[1]);
    } else {
      s = make_polygon(pts);
      if (kind_name(s.kind()) != kind) fail(Err::SchemaViolation, "vertex count disagrees with kind");
    }
  }
  std::string labels = j.value("labels", std::string());
  for (std::size_t i = 0; i < labels.size() && i < s.labels.size(); ++i)
    s.labels[i] = labels[i] == '.' ? 0 : labels[i];
  return s;
}

inline const char* part_name(ElemPart p) {
  switch (p) {
    case ElemPart::Whole: return "whole";
    case ElemPart::Side: return "side";
    case ElemPart::Vertex: return "vertex";
  }
  return "whole";
}

inline ElemPart part_from_name(const std::string& s) {
  if (s == "whole") return ElemPart::Whole;
  if (s == "side") return ElemPart::Side;
  if (s == "vertex") return ElemPart::Vertex;
  fail(Err::SchemaViolation, "bad element part: " + s);
}

inline json ref_to_json(const ElementRef& r) {
  return json{{"shape", r.shape}, {"part", part_name(r.part)}, {"index", r.index}};
}

inline ElementRef ref_from_json(const json& j) {
  return {j.at("shape").get<int>(), part_from_name(j.at("part").get<std::string>()),
          j.value("index", 0)};
}

inline json transform_to_json(const Transform& t) {
  json j;
  if (const auto* tr = std::get_if<Translation>(&t.op)) {
    j["kind"] = "translation";
    j["dx"] = tr->dx;
    j["dy"] = tr->dy;
  } else if (const auto* ro = std::get_if<Rotation>(&t.op)) {
    j["kind"] = "rotation";
    j["degrees"] = ro->angle_deg;
    j["center"] = point_to_json(ro->center);
  } else if (const auto* re = std::get_if<Reflection>(&t.op)) {
    j["kind"] = "reflection";
    j["axis_a"] = point_to_json(re->axis_a);
    j["axis_b"] = point_to_json(re->axis_b);
  } else {
    const auto& sc = std::get<UniformScale>(t.op);
    j["kind"] = "scale";
    j["factor"] = sc.factor;
    j["center"] = point_to_json(sc.center);
  }
  return j;
}

inline Transform transform_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "translation") return make_translation(j.at("dx").get<double>(), j.at("dy").get<double>());
  if (kind == "rotation")
    return make_rotation(j.at("degrees").get<double>(), point_from_json(j.at("center")));
  if (kind == "reflection")
    return make_reflection(point_from_json(j.at("axis_a")), point_from_json(j.at("axis_b")));
  if (kind == "scale")
    return make_scale(j.at("factor").get<double>(), point_from_json(j.at("center")));
  fail(Err::SchemaViolation, "bad transform kind: " + kind);
}

inline const char* transform_kind_name(const Transform& t) {
  if (std::holds_alternative<Translation>(t.op)) return "translation";
  if (std::holds_alternative<Rotation>(t.op)) return "rotation";
  if (std::holds_alternative<Reflection>(t.op)) return "reflection";
  return "scale";
}

inline json annotation_to_json(const Annotation& a) {
  json j;
  if (const auto* m = std::get_if<RightAngleMark>(&a.mark)) {
    j["kind"] = "right_angle";
    j["shape"] = m->shape;
    j["vertex"] = m->vertex;
  } else if (const auto* t = std::get_if<EqualSideTick>(&a.mark)) {
    j["kind"] = "equal_side";
    j["group"] = t->group;
    j["shape"] = t->shape;
    j["side"] = t->side;
  } else if (const auto* arc = std::get_if<EqualAngleArc>(&a.mark)) {
    j["kind"] = "equal_angle";
    j["group"] = arc->group;
    j["shape"] = arc->shape;
    j["vertex"] = arc->vertex;
  } else if (const auto* ll = std::get_if<LengthLabel>(&a.mark)) {
    j["kind"] = "length_label";
    j["shape"] = ll->shape;
    j["side"] = ll->side;
    j["value"] = ll->value;
  } else {
    const auto& al = std::get<AngleLabel>(a.mark);
    j["kind"] = "angle_label";
    j["shape"] = al.shape;
    j["vertex"] = al.vertex;
    j["degrees"] = al.degrees;
  }
  return j;
}

inline Annotation annotation_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "right_angle")
    return {RightAngleMark{j.at("shape").get<int>(), j.at("vertex").get<int>()}};
  if (kind == "equal_side")
    return {EqualSideTick{j.at("group").get<int>(), j.at("shape").get<int>(), j.at("side").get<int>()}};
  if (kind == "equal_angle")
    return {EqualAngleArc{j.at("group").get<int>(), j.at("shape").get<int>(), j.at("vertex").get<int>()}};
  if (kind == "length_label")
    return {LengthLabel{j.at("shape").get<int>(), j.at("side").get<int>(), j.at("value").get<double>()}};
  if (kind == "angle_label")
    return {AngleLabel{j.at("shape").get<int>(), j.at("vertex").get<int>(), j.at("degrees").get<double>()}};
  fail(Err::SchemaViolation, "bad annotation kind: " + kind);
}

inline json scene_to_json(const Scene& scene) {
  json j;
  j["format"] = "scene/1";
  j["seed"] = scene.seed;
  j["source"] = scene.source;
  json shapes = json::array();
  for (const Shape& s : scene.shapes) shapes.push_back(shape_to_json(s));
  j["shapes"] = shapes;
  json rels = json::array();
  for (const auto& r : scene.relations)
    rels.push_back(json{{"kind", relation_name(r.kind)},
                        {"subject", ref_to_json(r.subject)},
                        {"object", ref_to_json(r.object)}});
  j["relations"] = rels;
  json anns = json::array();
  for (const auto& a : scene.annotations) anns.push_back(annotation_to_json(a));
  j["annotations"] = anns;
  json der = json::array();
  for (const auto& d : scene.derived)
    der.push_back(json{{"src", d.src}, {"dst", d.dst}, {"transform", transform_to_json(d.transform)}});
  j["derived"] = der;
  return j;
}

inline Scene scene_from_json(const json& j) {
  if (j.value("format", std::string()) != "scene/1")
    fail(Err::SchemaViolation, "unrecognized scene format");
  Scene scene;
  scene.seed = j.value("seed", 0ULL);
  scene.source = j.value("source", std::string("synthetic"));
  for (const auto& sj : j.at("shapes")) scene.shapes.push_back(shape_from_json(sj));
  for (const auto& rj : j.value("relations", json::array())) {
    auto kind = relation_from_name(rj.at("kind").get<std::string>());
    if (!kind) fail(Err::SchemaViolation, "bad relation kind");
    scene.relations.push_back({*kind, ref_from_json(rj.at("subject")), ref_from_json(rj.at("object"))});
  }
  for (const auto& aj : j.value("annotations", json::array()))
    scene.annotations.push_back(annotation_from_json(aj));
  for (const auto& dj : j.value("derived", json::array()))
    scene.derived.push_back({dj.at("src").get<int>(), dj.at("dst").get<int>(),
                             transform_from_json(dj.at("transform"))});
  return scene;
}

inline std::string scene_to_text(const Scene& scene) { return scene_to_json(scene).dump(2) + "\n"; }

inline Scene scene_from_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(Err::SchemaViolation, "scene file is not valid JSON");
  return scene_from_json(j);
}

}  // namespace pqa
