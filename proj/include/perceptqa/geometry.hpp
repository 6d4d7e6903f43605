#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "perceptqa/common.hpp"

namespace pqa {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * (kPi / 180.0); }
inline double rad2deg(double r) { return r * (180.0 / kPi); }

struct Point {
  double x = 0;
  double y = 0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }
inline Point operator*(double s, Point a) { return a * s; }

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::sqrt(dot(a, a)); }
inline double distance(Point a, Point b) { return norm(a - b); }
inline Point perp(Point a) { return {-a.y, a.x}; }

inline Point normalized(Point a) {
  double n = norm(a);
  if (n == 0) fail(Err::DegenerateAngle, "cannot normalize zero vector");
  return {a.x / n, a.y / n};
}

inline Point rotate_about(Point p, Point center, double deg) {
  double r = deg2rad(deg);
  double c = std::cos(r), s = std::sin(r);
  Point d = p - center;
  return {center.x + d.x * c - d.y * s, center.y + d.x * s + d.y * c};
}

inline Point reflect_across(Point p, Point axis_a, Point axis_b) {
  Point d = normalized(axis_b - axis_a);
  Point v = p - axis_a;
  double t = dot(v, d);
  Point foot = axis_a + d * t;
  return foot + (foot - p);
}

// ===== Tolerances =====
//
// abs_eps is a length in canvas units; predicates treat values within it as
// equal. angle_eps is in degrees. Callers derive abs_eps from the scene
// diameter so predicates scale with the figure.

struct Tolerance {
  double abs_eps = 1e-9;
  double angle_eps = 0.5;

  static Tolerance for_diameter(double diameter) {
    return Tolerance{1e-9 * std::max(diameter, 1e-6), 0.5};
  }
};

// ===== Shapes =====

struct Segment {
  Point a, b;
};

struct Circle {
  Point center;
  double radius = 0;
};

struct Polygon {
  std::vector<Point> vertices;  // 3..5, stored counterclockwise
};

enum class ShapeKind { Segment, Circle, Triangle, Quadrilateral, Pentagon };

inline const char* kind_name(ShapeKind k) {
  switch (k) {
    case ShapeKind::Segment: return "segment";
    case ShapeKind::Circle: return "circle";
    case ShapeKind::Triangle: return "triangle";
    case ShapeKind::Quadrilateral: return "quadrilateral";
    case ShapeKind::Pentagon: return "pentagon";
  }
  return "unknown";
}

inline std::optional<ShapeKind> kind_from_name(const std::string& s) {
  if (s == "segment") return ShapeKind::Segment;
  if (s == "circle") return ShapeKind::Circle;
  if (s == "triangle") return ShapeKind::Triangle;
  if (s == "quadrilateral") return ShapeKind::Quadrilateral;
  if (s == "pentagon") return ShapeKind::Pentagon;
  return std::nullopt;
}

// A shape plus one label slot per defining point (endpoints, vertices, or the
// circle center). 0 means unlabeled.
struct Shape {
  std::variant<Segment, Circle, Polygon> geom;
  std::vector<char> labels;

  ShapeKind kind() const {
    if (std::holds_alternative<Segment>(geom)) return ShapeKind::Segment;
    if (std::holds_alternative<Circle>(geom)) return ShapeKind::Circle;
    const auto& p = std::get<Polygon>(geom);
    switch (p.vertices.size()) {
      case 3: return ShapeKind::Triangle;
      case 4: return ShapeKind::Quadrilateral;
      default: return ShapeKind::Pentagon;
    }
  }

  std::vector<Point> points() const {
    if (const auto* s = std::get_if<Segment>(&geom)) return {s->a, s->b};
    if (const auto* c = std::get_if<Circle>(&geom)) return {c->center};
    return std::get<Polygon>(geom).vertices;
  }

  std::size_t point_count() const {
    if (std::holds_alternative<Segment>(geom)) return 2;
    if (std::holds_alternative<Circle>(geom)) return 1;
    return std::get<Polygon>(geom).vertices.size();
  }

  std::size_t side_count() const {
    if (std::holds_alternative<Segment>(geom)) return 1;
    if (std::holds_alternative<Circle>(geom)) return 0;
    return std::get<Polygon>(geom).vertices.size();
  }

  Segment side(std::size_t i) const {
    if (const auto* s = std::get_if<Segment>(&geom)) {
      if (i != 0) fail(Err::OutOfRange, "segment has a single side");
      return *s;
    }
    if (const auto* p = std::get_if<Polygon>(&geom)) {
      const auto& v = p->vertices;
      if (i >= v.size()) fail(Err::OutOfRange, "side index past polygon");
      return Segment{v[i], v[(i + 1) % v.size()]};
    }
    fail(Err::OutOfRange, "circle has no sides");
  }
};

inline Shape make_segment(Point a, Point b) { return Shape{Segment{a, b}, {0, 0}}; }
inline Shape make_circle(Point c, double r) { return Shape{Circle{c, r}, {0}}; }
inline Shape make_polygon(std::vector<Point> v) {
  std::vector<char> labels(v.size(), 0);
  return Shape{Polygon{std::move(v)}, std::move(labels)};
}

inline double shoelace_signed(const std::vector<Point>& v) {
  double acc = 0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += cross(v[i], v[(i + 1) % v.size()]);
  return acc / 2.0;
}

// nullopt when well-formed, otherwise a short defect description.
inline std::optional<std::string> shape_defect(const Shape& s) {
  for (Point p : s.points())
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return "non-finite coordinate";
  if (const auto* c = std::get_if<Circle>(&s.geom)) {
    if (!(c->radius > 0)) return "radius must be positive";
    return std::nullopt;
  }
  if (const auto* seg = std::get_if<Segment>(&s.geom)) {
    if (distance(seg->a, seg->b) <= 1e-12) return "zero-length segment";
    return std::nullopt;
  }
  const auto& v = std::get<Polygon>(s.geom).vertices;
  if (v.size() < 3 || v.size() > 5) return "polygon must have 3 to 5 vertices";
  if (std::abs(shoelace_signed(v)) <= 1e-12) return "polygon area must be positive";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (distance(v[i], v[(i + 1) % v.size()]) <= 1e-12) return "zero-length polygon side";
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      if (i == 0 && j == v.size() - 1) continue;  // adjacent via wraparound
      if (j == i + 1) continue;
      // Proper crossing between non-adjacent sides means self-intersection.
      Segment s1{v[i], v[(i + 1) % v.size()]};
      Segment s2{v[j], v[(j + 1) % v.size()]};
      double d1 = cross(s1.b - s1.a, s2.a - s1.a);
      double d2 = cross(s1.b - s1.a, s2.b - s1.a);
      double d3 = cross(s2.b - s2.a, s1.a - s2.a);
      double d4 = cross(s2.b - s2.a, s1.b - s2.a);
      if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return "self-intersecting polygon";
    }
  }
  return std::nullopt;
}

// ===== Angles =====

// Unsigned angle at `vertex` between rays toward `ray_a` and `ray_b`, in
// degrees within [0, 180].
inline double angle_measure(Point vertex, Point ray_a, Point ray_b,
                            const Tolerance& tol = Tolerance{}) {
  Point u = ray_a - vertex;
  Point v = ray_b - vertex;
  if (norm(u) <= tol.abs_eps || norm(v) <= tol.abs_eps)
    fail(Err::DegenerateAngle, "ray endpoint coincides with vertex");
  double c = dot(u, v) / (norm(u) * norm(v));
  c = std::clamp(c, -1.0, 1.0);
  return rad2deg(std::acos(c));
}

enum class AngleClass { Acute, Right, Obtuse, Straight };

inline const char* angle_class_name(AngleClass c) {
  switch (c) {
    case AngleClass::Acute: return "acute";
    case AngleClass::Right: return "right";
    case AngleClass::Obtuse: return "obtuse";
    case AngleClass::Straight: return "straight";
  }
  return "unknown";
}

inline AngleClass classify_angle(double deg, const Tolerance& tol = Tolerance{}) {
  if (deg < -1e-9 || deg > 180.0 + 1e-9)
    fail(Err::OutOfRange, "angle outside [0, 180]: " + format_double(deg));
  if (std::abs(deg - 90.0) <= tol.angle_eps) return AngleClass::Right;
  if (std::abs(deg - 180.0) <= tol.angle_eps) return AngleClass::Straight;
  return deg < 90.0 ? AngleClass::Acute : AngleClass::Obtuse;
}

// Interior angle of a convex polygon at vertex i, degrees.
inline double interior_angle(const Polygon& poly, std::size_t i,
                             const Tolerance& tol = Tolerance{}) {
  const auto& v = poly.vertices;
  if (i >= v.size()) fail(Err::OutOfRange, "vertex index past polygon");
  std::size_t n = v.size();
  return angle_measure(v[i], v[(i + n - 1) % n], v[(i + 1) % n], tol);
}

// ===== Measures =====

enum class Quantity { Length, Perimeter, Area };

inline const char* quantity_name(Quantity q) {
  switch (q) {
    case Quantity::Length: return "length";
    case Quantity::Perimeter: return "perimeter";
    case Quantity::Area: return "area";
  }
  return "unknown";
}

inline double measure(const Shape& s, Quantity q) {
  if (const auto* seg = std::get_if<Segment>(&s.geom)) {
    if (q != Quantity::Length)
      fail(Err::IncompatibleQuantity,
           std::string(quantity_name(q)) + " undefined for a segment");
    return distance(seg->a, seg->b);
  }
  if (q == Quantity::Length)
    fail(Err::IncompatibleQuantity, "length defined only for segments");
  if (const auto* c = std::get_if<Circle>(&s.geom)) {
    return q == Quantity::Area ? kPi * c->radius * c->radius : 2.0 * kPi * c->radius;
  }
  const auto& v = std::get<Polygon>(s.geom).vertices;
  if (q == Quantity::Area) return std::abs(shoelace_signed(v));
  double per = 0;
  for (std::size_t i = 0; i < v.size(); ++i) per += distance(v[i], v[(i + 1) % v.size()]);
  return per;
}

// ===== Transforms =====

struct Translation {
  double dx = 0, dy = 0;
};
struct Rotation {
  double angle_deg = 0;  // normalized to [0, 360)
  Point center;
};
struct Reflection {
  Point axis_a, axis_b;
};
struct UniformScale {
  double factor = 1;  // > 0
  Point center;
};

struct Transform {
  std::variant<Translation, Rotation, Reflection, UniformScale> op;
};

inline double normalize_deg(double d) {
  double r = std::fmod(d, 360.0);
  if (r < 0) r += 360.0;
  return r;
}

inline Transform make_translation(double dx, double dy) { return {Translation{dx, dy}}; }
inline Transform make_rotation(double deg, Point center) {
  return {Rotation{normalize_deg(deg), center}};
}
inline Transform make_reflection(Point a, Point b) {
  if (distance(a, b) <= 1e-12) fail(Err::DegenerateAngle, "reflection axis needs two points");
  return {Reflection{a, b}};
}
inline Transform make_scale(double factor, Point center) {
  if (!(factor > 0)) fail(Err::OutOfRange, "scale factor must be positive");
  return {UniformScale{factor, center}};
}

inline Point apply(const Transform& t, Point p) {
  if (const auto* tr = std::get_if<Translation>(&t.op)) return {p.x + tr->dx, p.y + tr->dy};
  if (const auto* ro = std::get_if<Rotation>(&t.op))
    return rotate_about(p, ro->center, ro->angle_deg);
  if (const auto* re = std::get_if<Reflection>(&t.op))
    return reflect_across(p, re->axis_a, re->axis_b);
  const auto& sc = std::get<UniformScale>(t.op);
  return sc.center + (p - sc.center) * sc.factor;
}

inline Shape apply_transform(const Shape& s, const Transform& t) {
  Shape out = s;
  if (auto* seg = std::get_if<Segment>(&out.geom)) {
    seg->a = apply(t, seg->a);
    seg->b = apply(t, seg->b);
  } else if (auto* c = std::get_if<Circle>(&out.geom)) {
    c->center = apply(t, c->center);
    if (const auto* sc = std::get_if<UniformScale>(&t.op)) c->radius *= sc->factor;
  } else {
    for (auto& v : std::get<Polygon>(out.geom).vertices) v = apply(t, v);
  }
  return out;
}

// ===== Point/element distances =====

inline double point_segment_distance(Point p, const Segment& s) {
  Point d = s.b - s.a;
  double len2 = dot(d, d);
  if (len2 <= 0) return distance(p, s.a);
  double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return distance(p, s.a + d * t);
}

inline bool point_in_polygon(Point p, const Polygon& poly, double eps) {
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (point_segment_distance(p, Segment{v[i], v[(i + 1) % v.size()]}) <= eps) return true;
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    bool crosses = (v[i].y > p.y) != (v[j].y > p.y);
    if (crosses) {
      double x = v[j].x + (p.y - v[j].y) / (v[i].y - v[j].y) * (v[i].x - v[j].x);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

inline double segment_segment_distance(const Segment& s1, const Segment& s2) {
  double d1 = cross(s1.b - s1.a, s2.a - s1.a);
  double d2 = cross(s1.b - s1.a, s2.b - s1.a);
  double d3 = cross(s2.b - s2.a, s1.a - s2.a);
  double d4 = cross(s2.b - s2.a, s1.b - s2.a);
  if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return 0;  // proper crossing
  return std::min(std::min(point_segment_distance(s2.a, s1), point_segment_distance(s2.b, s1)),
                  std::min(point_segment_distance(s1.a, s2), point_segment_distance(s1.b, s2)));
}

// Distance between shape boundaries; 0 when they touch or cross. Outlines
// only, so one boundary nested strictly inside another is still separated.
inline double boundary_distance(const Shape& a, const Shape& b) {
  auto segs = [](const Shape& s) {
    std::vector<Segment> out;
    for (std::size_t i = 0; i < s.side_count(); ++i) out.push_back(s.side(i));
    return out;
  };
  const auto* ca = std::get_if<Circle>(&a.geom);
  const auto* cb = std::get_if<Circle>(&b.geom);
  if (ca && cb) {
    double d = distance(ca->center, cb->center);
    double rsum = ca->radius + cb->radius;
    double rdiff = std::abs(ca->radius - cb->radius);
    if (d >= rdiff && d <= rsum) return 0.0;
    return d > rsum ? d - rsum : rdiff - d;
  }
  if (ca || cb) {
    const Circle& c = ca ? *ca : *cb;
    const Shape& other = ca ? b : a;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : segs(other)) {
      double dc = point_segment_distance(c.center, s);
      double lo = dc;
      double hi = std::max(distance(c.center, s.a), distance(c.center, s.b));
      if (c.radius >= lo && c.radius <= hi) return 0.0;  // segment crosses the ring band
      best = std::min(best, std::min(std::abs(lo - c.radius), std::abs(hi - c.radius)));
    }
    return best;
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s1 : segs(a))
    for (const auto& s2 : segs(b)) best = std::min(best, segment_segment_distance(s1, s2));
  return best;
}

// ===== Intersections =====

// Finite crossing points between shape outlines. `infinite` marks collinear
// or coincident overlap; the point list is empty in that case.
struct IntersectionResult {
  bool infinite = false;
  std::vector<Point> points;
};

namespace detail {

inline void add_point(std::vector<Point>& pts, Point p, double merge_eps) {
  for (const Point& q : pts)
    if (distance(p, q) <= merge_eps) return;
  pts.push_back(p);
}

inline void segment_segment_hits(const Segment& s1, const Segment& s2, const Tolerance& tol,
                                 bool& infinite, std::vector<Point>& pts) {
  Point r = s1.b - s1.a;
  Point s = s2.b - s2.a;
  double denom = cross(r, s);
  Point qp = s2.a - s1.a;
  // Branch on direction alone with a fixed threshold; tolerance only widens
  // inclusion slacks, which keeps the hit set monotone in the tolerance.
  if (std::abs(denom) <= 1e-12 * norm(r) * norm(s)) {
    // Parallel. Collinear with positive-length overlap counts as infinite.
    if (std::abs(cross(qp, r)) > tol.abs_eps * std::max(norm(r), 1e-12)) return;
    double rlen2 = dot(r, r);
    if (rlen2 <= 0) return;
    double t0 = dot(qp, r) / rlen2;
    double t1 = t0 + dot(s, r) / rlen2;
    double lo = std::min(t0, t1), hi = std::max(t0, t1);
    double ov_lo = std::max(0.0, lo), ov_hi = std::min(1.0, hi);
    double overlap = (ov_hi - ov_lo) * norm(r);
    if (overlap > tol.abs_eps) {
      infinite = true;
    } else if (ov_hi >= ov_lo - tol.abs_eps / std::max(norm(r), 1e-12)) {
      add_point(pts, s1.a + r * std::clamp(ov_lo, 0.0, 1.0), tol.abs_eps);
    }
    return;
  }
  double t = cross(qp, s) / denom;
  double u = cross(qp, r) / denom;
  double tslack = tol.abs_eps / std::max(norm(r), 1e-12);
  double uslack = tol.abs_eps / std::max(norm(s), 1e-12);
  if (t < -tslack || t > 1 + tslack || u < -uslack || u > 1 + uslack) return;
  add_point(pts, s1.a + r * t, tol.abs_eps);
}

inline void segment_circle_hits(const Segment& seg, const Circle& c, const Tolerance& tol,
                                std::vector<Point>& pts) {
  Point d = seg.b - seg.a;
  double len = norm(d);
  if (len <= 0) return;
  Point u = d * (1.0 / len);
  double proj = dot(c.center - seg.a, u);
  Point foot = seg.a + u * proj;
  double h = distance(c.center, foot);
  double tslack = tol.abs_eps / len;
  if (std::abs(h - c.radius) <= tol.abs_eps) {
    // Tangent to the supporting line; one hit if the foot lies on the segment.
    double t = proj / len;
    if (t >= -tslack && t <= 1 + tslack) add_point(pts, foot, tol.abs_eps);
    return;
  }
  if (h > c.radius) return;
  double half = std::sqrt(std::max(0.0, c.radius * c.radius - h * h));
  for (double off : {-half, half}) {
    double t = (proj + off) / len;
    if (t >= -tslack && t <= 1 + tslack) add_point(pts, seg.a + d * t, tol.abs_eps);
  }
}

inline void circle_circle_hits(const Circle& a, const Circle& b, const Tolerance& tol,
                               bool& infinite, std::vector<Point>& pts) {
  double d = distance(a.center, b.center);
  if (d <= tol.abs_eps && std::abs(a.radius - b.radius) <= tol.abs_eps) {
    infinite = true;  // same circle
    return;
  }
  double ext = std::abs(d - (a.radius + b.radius));
  double inn = std::abs(d - std::abs(a.radius - b.radius));
  if (std::min(ext, inn) <= tol.abs_eps) {
    // Tangent: single point along the center line.
    if (d <= tol.abs_eps) return;
    Point u = normalized(b.center - a.center);
    double sign = (ext <= inn) ? 1.0 : (a.radius >= b.radius ? 1.0 : -1.0);
    add_point(pts, a.center + u * (a.radius * sign), tol.abs_eps);
    return;
  }
  if (d > a.radius + b.radius || d < std::abs(a.radius - b.radius)) return;
  double x = (d * d + a.radius * a.radius - b.radius * b.radius) / (2 * d);
  double h2 = a.radius * a.radius - x * x;
  if (h2 < 0) return;
  double h = std::sqrt(h2);
  Point u = normalized(b.center - a.center);
  Point base = a.center + u * x;
  Point n = perp(u);
  add_point(pts, base + n * h, tol.abs_eps);
  add_point(pts, base - n * h, tol.abs_eps);
}

}  // namespace detail

inline IntersectionResult intersection_count(const Shape& a, const Shape& b,
                                             const Tolerance& tol = Tolerance{}) {
  IntersectionResult res;
  auto elems = [](const Shape& s) {
    struct Elems {
      std::vector<Segment> segs;
      std::vector<Circle> circles;
    } e;
    if (const auto* c = std::get_if<Circle>(&s.geom)) {
      e.circles.push_back(*c);
    } else {
      for (std::size_t i = 0; i < s.side_count(); ++i) e.segs.push_back(s.side(i));
    }
    return e;
  };
  auto ea = elems(a), eb = elems(b);
  for (const auto& s1 : ea.segs)
    for (const auto& s2 : eb.segs)
      detail::segment_segment_hits(s1, s2, tol, res.infinite, res.points);
  for (const auto& s1 : ea.segs)
    for (const auto& c2 : eb.circles) detail::segment_circle_hits(s1, c2, tol, res.points);
  for (const auto& c1 : ea.circles)
    for (const auto& s2 : eb.segs) detail::segment_circle_hits(s2, c1, tol, res.points);
  for (const auto& c1 : ea.circles)
    for (const auto& c2 : eb.circles)
      detail::circle_circle_hits(c1, c2, tol, res.infinite, res.points);
  if (res.infinite) {
    res.points.clear();
    return res;
  }
  std::sort(res.points.begin(), res.points.end(), [](Point p, Point q) {
    return p.x != q.x ? p.x < q.x : p.y < q.y;
  });
  return res;
}

// ===== Containment =====

inline bool contains_point(const Shape& s, Point p, const Tolerance& tol = Tolerance{}) {
  if (const auto* c = std::get_if<Circle>(&s.geom))
    return distance(p, c->center) <= c->radius + tol.abs_eps;
  if (const auto* seg = std::get_if<Segment>(&s.geom))
    return point_segment_distance(p, *seg) <= tol.abs_eps;
  return point_in_polygon(p, std::get<Polygon>(s.geom), tol.abs_eps);
}

// ===== Pairwise relations =====

enum class RelationKind {
  Parallel,
  Perpendicular,
  Tangent,
  Intersect,
  Congruent,
  Similar,
  Contains,
};

inline const char* relation_name(RelationKind k) {
  switch (k) {
    case RelationKind::Parallel: return "parallel";
    case RelationKind::Perpendicular: return "perpendicular";
    case RelationKind::Tangent: return "tangent";
    case RelationKind::Intersect: return "intersect";
    case RelationKind::Congruent: return "congruent";
    case RelationKind::Similar: return "similar";
    case RelationKind::Contains: return "contains";
  }
  return "unknown";
}

inline std::optional<RelationKind> relation_from_name(const std::string& s) {
  if (s == "parallel") return RelationKind::Parallel;
  if (s == "perpendicular") return RelationKind::Perpendicular;
  if (s == "tangent") return RelationKind::Tangent;
  if (s == "intersect") return RelationKind::Intersect;
  if (s == "congruent") return RelationKind::Congruent;
  if (s == "similar") return RelationKind::Similar;
  if (s == "contains") return RelationKind::Contains;
  return std::nullopt;
}

namespace detail {

// Degrees in [0, 90] between the directions of two segments.
inline double direction_angle(const Segment& s1, const Segment& s2) {
  Point u = normalized(s1.b - s1.a);
  Point v = normalized(s2.b - s2.a);
  double d = std::abs(dot(u, v));
  return rad2deg(std::acos(std::clamp(d, 0.0, 1.0)));
}

inline bool tangent_circle_segment(const Circle& c, const Segment& s, const Tolerance& tol) {
  Point d = s.b - s.a;
  double len = norm(d);
  if (len <= 0) return false;
  Point u = d * (1.0 / len);
  double proj = dot(c.center - s.a, u);
  double h = distance(c.center, s.a + u * proj);
  double tslack = tol.abs_eps / len;
  // Touch point must lie on the segment itself, not just the supporting line.
  return std::abs(h - c.radius) <= tol.abs_eps && proj / len >= -tslack &&
         proj / len <= 1 + tslack;
}

inline bool tangent_circles(const Circle& a, const Circle& b, const Tolerance& tol) {
  double d = distance(a.center, b.center);
  if (d <= tol.abs_eps) return false;
  return std::abs(d - (a.radius + b.radius)) <= tol.abs_eps ||
         std::abs(d - std::abs(a.radius - b.radius)) <= tol.abs_eps;
}

struct SideAngleProfile {
  std::vector<double> sides;
  std::vector<double> angles;
};

inline SideAngleProfile polygon_profile(const Polygon& p, std::size_t shift, int dir) {
  std::size_t n = p.vertices.size();
  std::vector<Point> seq(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t idx = dir > 0 ? (shift + i) % n : (shift + n - i) % n;
    seq[i] = p.vertices[idx];
  }
  SideAngleProfile prof;
  for (std::size_t i = 0; i < n; ++i) prof.sides.push_back(distance(seq[i], seq[(i + 1) % n]));
  for (std::size_t i = 0; i < n; ++i)
    prof.angles.push_back(angle_measure(seq[i], seq[(i + n - 1) % n], seq[(i + 1) % n]));
  return prof;
}

// Checks every cyclic and reflected vertex correspondence (at most 2n).
inline bool polygons_match(const Polygon& a, const Polygon& b, bool allow_scale,
                           const Tolerance& tol) {
  std::size_t n = a.vertices.size();
  if (b.vertices.size() != n) return false;
  SideAngleProfile pa = polygon_profile(a, 0, 1);
  for (int dir : {1, -1}) {
    for (std::size_t shift = 0; shift < n; ++shift) {
      SideAngleProfile pb = polygon_profile(b, shift, dir);
      double ratio = 1.0;
      if (allow_scale) {
        if (pa.sides[0] <= tol.abs_eps) continue;
        ratio = pb.sides[0] / pa.sides[0];
        if (!(ratio > 0)) continue;
      }
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i)
        ok = std::abs(pb.sides[i] - ratio * pa.sides[i]) <= tol.abs_eps * (1.0 + ratio);
      for (std::size_t i = 0; i < n && ok; ++i)
        ok = std::abs(pb.angles[i] - pa.angles[i]) <= tol.angle_eps;
      if (ok) return true;
    }
  }
  return false;
}

}  // namespace detail

// Pairwise predicate dispatch. Parallel and Perpendicular accept segments
// only; Tangent requires at least one circle.
inline bool relation_holds(RelationKind kind, const Shape& a, const Shape& b,
                           const Tolerance& tol = Tolerance{}) {
  const auto* sa = std::get_if<Segment>(&a.geom);
  const auto* sb = std::get_if<Segment>(&b.geom);
  const auto* ca = std::get_if<Circle>(&a.geom);
  const auto* cb = std::get_if<Circle>(&b.geom);
  switch (kind) {
    case RelationKind::Parallel:
    case RelationKind::Perpendicular: {
      if (!sa || !sb)
        fail(Err::UnsupportedPair,
             std::string(relation_name(kind)) + " needs two segments, got " +
                 kind_name(a.kind()) + " and " + kind_name(b.kind()));
      double ang = detail::direction_angle(*sa, *sb);
      return kind == RelationKind::Parallel ? ang <= tol.angle_eps
                                            : std::abs(ang - 90.0) <= tol.angle_eps;
    }
    case RelationKind::Tangent: {
      if (ca && cb) return detail::tangent_circles(*ca, *cb, tol);
      if (!ca && !cb)
        fail(Err::UnsupportedPair, std::string("tangent needs a circle, got ") +
                                       kind_name(a.kind()) + " and " + kind_name(b.kind()));
      const Circle& c = ca ? *ca : *cb;
      const Shape& other = ca ? b : a;
      for (std::size_t i = 0; i < other.side_count(); ++i)
        if (detail::tangent_circle_segment(c, other.side(i), tol)) return true;
      return false;
    }
    case RelationKind::Intersect: {
      IntersectionResult r = intersection_count(a, b, tol);
      return r.infinite || !r.points.empty();
    }
    case RelationKind::Congruent:
    case RelationKind::Similar: {
      bool allow_scale = kind == RelationKind::Similar;
      if (ca && cb)
        return allow_scale ? true : std::abs(ca->radius - cb->radius) <= tol.abs_eps;
      if (sa && sb) {
        double la = distance(sa->a, sa->b), lb = distance(sb->a, sb->b);
        return allow_scale ? (la > tol.abs_eps && lb > tol.abs_eps)
                           : std::abs(la - lb) <= tol.abs_eps;
      }
      const auto* pa = std::get_if<Polygon>(&a.geom);
      const auto* pb = std::get_if<Polygon>(&b.geom);
      if (!pa || !pb) return false;  // mixed kinds are never congruent or similar
      return detail::polygons_match(*pa, *pb, allow_scale, tol);
    }
    case RelationKind::Contains: {
      // True when every point of b lies inside or on a.
      if (sa) {
        if (!sb) return false;
        return point_segment_distance(sb->a, *sa) <= tol.abs_eps &&
               point_segment_distance(sb->b, *sa) <= tol.abs_eps;
      }
      if (ca) {
        if (cb) return distance(ca->center, cb->center) + cb->radius <= ca->radius + tol.abs_eps;
        for (Point p : b.points())
          if (distance(p, ca->center) > ca->radius + tol.abs_eps) return false;
        return true;  // circle is convex, vertices suffice
      }
      // a is a polygon.
      if (cb) {
        if (!point_in_polygon(cb->center, std::get<Polygon>(a.geom), tol.abs_eps)) return false;
        for (std::size_t i = 0; i < a.side_count(); ++i)
          if (point_segment_distance(cb->center, a.side(i)) < cb->radius - tol.abs_eps)
            return false;
        return true;
      }
      for (Point p : b.points())
        if (!point_in_polygon(p, std::get<Polygon>(a.geom), tol.abs_eps)) return false;
      // Vertices inside is not enough for polygon-in-polygon; edges must not
      // properly cross the container boundary.
      if (sb) return true;
      for (std::size_t i = 0; i < a.side_count(); ++i)
        for (std::size_t j = 0; j < b.side_count(); ++j) {
          Segment e1 = a.side(i), e2 = b.side(j);
          double d1 = cross(e1.b - e1.a, e2.a - e1.a);
          double d2 = cross(e1.b - e1.a, e2.b - e1.a);
          double d3 = cross(e2.b - e2.a, e1.a - e2.a);
          double d4 = cross(e2.b - e2.a, e1.b - e2.a);
          if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return false;
        }
      return true;
    }
  }
  fail(Err::OutOfRange, "unknown relation kind");
}

inline bool relation_symmetric(RelationKind k) {
  switch (k) {
    case RelationKind::Parallel:
    case RelationKind::Perpendicular:
    case RelationKind::Tangent:
    case RelationKind::Intersect:
    case RelationKind::Congruent:
    case RelationKind::Similar:
      return true;
    case RelationKind::Contains:
      return false;
  }
  return false;
}

}  // namespace pqa
