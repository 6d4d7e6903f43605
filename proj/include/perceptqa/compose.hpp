#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "perceptqa/rng.hpp"
#include "perceptqa/scene.hpp"

namespace pqa {

// ===== Shape construction =====

enum class ShapeStyle {
  Any,          // builder's choice, mixes plain and special forms
  Scalene,
  Right,        // triangle with one right angle
  Isosceles,
  Equilateral,
  RightIsosceles,
  Square,
  Rectangle,
  Parallelogram,
  Rhombus,
  Trapezoid,
  Regular,      // regular pentagon
  Convex,       // generic convex polygon
};

struct ShapePlan {
  ShapeKind kind = ShapeKind::Triangle;
  ShapeStyle style = ShapeStyle::Any;
  double scale = 0;  // rough circumradius; 0 lets the builder pick
};

namespace detail {

inline Point centroid_of(const std::vector<Point>& v) {
  Point c{0, 0};
  for (Point p : v) c = c + p;
  return c * (1.0 / static_cast<double>(v.size()));
}

inline void ensure_ccw(std::vector<Point>& v) {
  if (shoelace_signed(v) < 0) std::reverse(v.begin(), v.end());
}

inline bool convex_enough(const std::vector<Point>& v, double min_side, double min_angle_deg) {
  std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (distance(v[i], v[(i + 1) % n]) < min_side) return false;
    Point e1 = v[(i + 1) % n] - v[i];
    Point e2 = v[(i + 2) % n] - v[(i + 1) % n];
    if (cross(e1, e2) <= 1e-9) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double a = angle_measure(v[i], v[(i + n - 1) % n], v[(i + 1) % n]);
    if (a < min_angle_deg || a > 180.0 - 10.0) return false;
  }
  return true;
}

// Local vertex rings around the origin; placement happens afterwards.
inline std::vector<Point> local_triangle(Rng& rng, ShapeStyle style, double scale) {
  switch (style) {
    case ShapeStyle::Right: {
      double a = scale * rng.uniform(0.9, 1.5);
      double b = scale * rng.uniform(0.9, 1.5);
      return {{0, 0}, {a, 0}, {0, b}};
    }
    case ShapeStyle::RightIsosceles: {
      double a = scale * rng.uniform(1.0, 1.4);
      return {{0, 0}, {a, 0}, {0, a}};
    }
    case ShapeStyle::Isosceles: {
      double w = scale * rng.uniform(1.0, 1.5);
      double h = scale * rng.uniform(0.9, 1.7);
      if (std::abs(std::hypot(w / 2, h) - w) < 0.03) h += 0.05;  // keep it plainly non-equilateral
      return {{-w / 2, 0}, {w / 2, 0}, {0, h}};
    }
    case ShapeStyle::Equilateral: {
      double s = scale * rng.uniform(1.1, 1.6);
      return {{0, 0}, {s, 0}, {s / 2, s * 0.8660254037844386}};
    }
    default:
      for (int tries = 0; tries < 400; ++tries) {
        std::vector<Point> v;
        for (int i = 0; i < 3; ++i)
          v.push_back({rng.uniform(-scale, scale), rng.uniform(-scale, scale)});
        ensure_ccw(v);
        if (convex_enough(v, 0.55 * scale, 22.0)) return v;
      }
      fail(Err::Unsatisfiable, "triangle construction exhausted retries");
  }
}

inline std::vector<Point> local_quad(Rng& rng, ShapeStyle style, double scale) {
  switch (style) {
    case ShapeStyle::Square: {
      double s = scale * rng.uniform(1.0, 1.5);
      return {{0, 0}, {s, 0}, {s, s}, {0, s}};
    }
    case ShapeStyle::Rectangle: {
      double w = scale * rng.uniform(1.2, 1.8);
      double h = scale * rng.uniform(0.6, 0.95);
      return {{0, 0}, {w, 0}, {w, h}, {0, h}};
    }
    case ShapeStyle::Parallelogram: {
      double w = scale * rng.uniform(1.1, 1.6);
      double h = scale * rng.uniform(0.6, 1.0);
      double dx = scale * rng.uniform(0.35, 0.7);
      return {{0, 0}, {w, 0}, {w + dx, h}, {dx, h}};
    }
    case ShapeStyle::Rhombus: {
      double p = scale * rng.uniform(1.2, 1.8);
      double q = scale * rng.uniform(0.6, 0.95);
      return {{-p / 2, 0}, {0, -q / 2}, {p / 2, 0}, {0, q / 2}};
    }
    case ShapeStyle::Trapezoid: {
      double w1 = scale * rng.uniform(1.3, 1.8);
      double w2 = scale * rng.uniform(0.6, 0.95);
      double h = scale * rng.uniform(0.7, 1.1);
      double off = rng.chance(0.5) ? 0.0 : scale * rng.uniform(-0.15, 0.15);
      return {{-w1 / 2, 0}, {w1 / 2, 0}, {w2 / 2 + off, h}, {-w2 / 2 + off, h}};
    }
    default:
      for (int tries = 0; tries < 400; ++tries) {
        std::vector<double> angles;
        for (int i = 0; i < 4; ++i) angles.push_back(rng.uniform(0.0, 2 * kPi));
        std::sort(angles.begin(), angles.end());
        bool spaced = true;
        for (int i = 0; i < 4; ++i) {
          double gap = (i == 3 ? angles[0] + 2 * kPi : angles[i + 1]) - angles[i];
          if (gap < 2 * kPi / 10.0) spaced = false;
        }
        if (!spaced) continue;
        std::vector<Point> v;
        for (double a : angles) {
          double r = scale * rng.uniform(0.75, 1.0);
          v.push_back({r * std::cos(a), r * std::sin(a)});
        }
        if (convex_enough(v, 0.45 * scale, 28.0)) return v;
      }
      fail(Err::Unsatisfiable, "quadrilateral construction exhausted retries");
  }
}

inline std::vector<Point> local_pentagon(Rng& rng, ShapeStyle style, double scale) {
  if (style == ShapeStyle::Regular) {
    double r = scale * rng.uniform(1.0, 1.3);
    std::vector<Point> v;
    for (int i = 0; i < 5; ++i) {
      double a = deg2rad(90.0 + 72.0 * i);
      v.push_back({r * std::cos(a), r * std::sin(a)});
    }
    return v;
  }
  for (int tries = 0; tries < 400; ++tries) {
    std::vector<double> angles;
    for (int i = 0; i < 5; ++i) angles.push_back(rng.uniform(0.0, 2 * kPi));
    std::sort(angles.begin(), angles.end());
    bool spaced = true;
    for (int i = 0; i < 5; ++i) {
      double gap = (i == 4 ? angles[0] + 2 * kPi : angles[i + 1]) - angles[i];
      if (gap < 2 * kPi / 12.0) spaced = false;
    }
    if (!spaced) continue;
    std::vector<Point> v;
    for (double a : angles) {
      double r = scale * rng.uniform(0.8, 1.0);
      v.push_back({r * std::cos(a), r * std::sin(a)});
    }
    if (convex_enough(v, 0.4 * scale, 60.0)) return v;
  }
  fail(Err::Unsatisfiable, "pentagon construction exhausted retries");
}

inline ShapeStyle pick_style(Rng& rng, ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Triangle: {
      const std::vector<ShapeStyle> pool{ShapeStyle::Scalene, ShapeStyle::Scalene,
                                         ShapeStyle::Right, ShapeStyle::Right,
                                         ShapeStyle::Isosceles, ShapeStyle::Equilateral,
                                         ShapeStyle::RightIsosceles};
      return rng.pick(pool);
    }
    case ShapeKind::Quadrilateral: {
      const std::vector<ShapeStyle> pool{ShapeStyle::Convex, ShapeStyle::Convex,
                                         ShapeStyle::Square, ShapeStyle::Rectangle,
                                         ShapeStyle::Rectangle, ShapeStyle::Parallelogram,
                                         ShapeStyle::Rhombus, ShapeStyle::Trapezoid};
      return rng.pick(pool);
    }
    case ShapeKind::Pentagon:
      return rng.chance(0.4) ? ShapeStyle::Regular : ShapeStyle::Convex;
    default:
      return ShapeStyle::Any;
  }
}

inline std::vector<Point> rotate_all(const std::vector<Point>& v, Point about, double deg) {
  std::vector<Point> out;
  out.reserve(v.size());
  for (Point p : v) out.push_back(rotate_about(p, about, deg));
  return out;
}

}  // namespace detail

// Builds a shape of the requested kind in local coordinates around the
// origin. Circles and segments come back ready for translation; polygons may
// still need a rotation.
inline Shape build_styled(Rng& rng, ShapePlan plan) {
  double scale = plan.scale > 0 ? plan.scale : rng.uniform(0.13, 0.23);
  ShapeStyle style = plan.style == ShapeStyle::Any ? detail::pick_style(rng, plan.kind) : plan.style;
  switch (plan.kind) {
    case ShapeKind::Circle:
      return make_circle({0, 0}, scale * rng.uniform(0.8, 1.3));
    case ShapeKind::Segment: {
      double len = scale * rng.uniform(1.6, 2.8);
      double ang = rng.uniform(0.0, 2 * kPi);
      Point h{len / 2 * std::cos(ang), len / 2 * std::sin(ang)};
      return make_segment({-h.x, -h.y}, h);
    }
    case ShapeKind::Triangle: {
      auto v = detail::local_triangle(rng, style, scale);
      detail::ensure_ccw(v);
      return make_polygon(v);
    }
    case ShapeKind::Quadrilateral: {
      auto v = detail::local_quad(rng, style, scale);
      detail::ensure_ccw(v);
      return make_polygon(v);
    }
    case ShapeKind::Pentagon: {
      auto v = detail::local_pentagon(rng, style, scale);
      detail::ensure_ccw(v);
      return make_polygon(v);
    }
  }
  fail(Err::OutOfRange, "unknown shape kind");
}

namespace detail {

inline AabBox points_bbox(const std::vector<Point>& pts, double pad = 0) {
  AabBox b{1e9, 1e9, -1e9, -1e9};
  for (Point p : pts) {
    b.min_x = std::min(b.min_x, p.x - pad);
    b.min_y = std::min(b.min_y, p.y - pad);
    b.max_x = std::max(b.max_x, p.x + pad);
    b.max_y = std::max(b.max_y, p.y + pad);
  }
  return b;
}

inline AabBox shape_bbox(const Shape& s) {
  if (const auto* c = std::get_if<Circle>(&s.geom))
    return points_bbox({c->center}, c->radius);
  return points_bbox(s.points());
}

inline bool shape_in_box(const Shape& s, double margin) {
  AabBox b = shape_bbox(s);
  return b.min_x >= margin && b.min_y >= margin && b.max_x <= 1 - margin && b.max_y <= 1 - margin;
}

// Random rotation plus a translation that drops the shape inside the canvas.
inline std::optional<Shape> settle_into_box(Shape s, Rng& rng, double margin,
                                            bool allow_rotation = true) {
  if (allow_rotation && std::holds_alternative<Polygon>(s.geom) && rng.chance(0.6))
    s = apply_transform(s, make_rotation(rng.uniform(0.0, 360.0), {0, 0}));
  else if (allow_rotation && std::holds_alternative<Segment>(s.geom))
    s = apply_transform(s, make_rotation(rng.uniform(0.0, 360.0), {0, 0}));
  AabBox b = shape_bbox(s);
  double w = b.max_x - b.min_x, h = b.max_y - b.min_y;
  if (w > 1 - 2 * margin || h > 1 - 2 * margin) return std::nullopt;
  double ox = rng.uniform(margin - b.min_x, 1 - margin - b.max_x);
  double oy = rng.uniform(margin - b.min_y, 1 - margin - b.max_y);
  return apply_transform(s, make_translation(ox, oy));
}

}  // namespace detail

// ===== Constraint solving =====

// Places a shape of `plan` so that `rel` holds against the already-placed
// `fixed` element. The shape being placed is the subject of `rel`; for
// Contains, `movable_contains_fixed` says which operand is the container.
inline Shape solve_placement(const Shape& fixed, ShapePlan plan, RelationKind rel,
                             Rng& rng, Transform* derived = nullptr,
                             bool movable_contains_fixed = false) {
  const auto* fc = std::get_if<Circle>(&fixed.geom);
  const auto* fs = std::get_if<Segment>(&fixed.geom);
  switch (rel) {
    case RelationKind::Tangent: {
      if (plan.kind == ShapeKind::Circle) {
        double r = (plan.scale > 0 ? plan.scale : rng.uniform(0.08, 0.16));
        if (fc) {
          bool internal = rng.chance(0.25) && fc->radius - r >= 0.05;
          double d = internal ? fc->radius - r : fc->radius + r;
          double theta = rng.uniform(0.0, 2 * kPi);
          Point u{std::cos(theta), std::sin(theta)};
          return make_circle(fc->center + u * d, r);
        }
        // Segment or polygon side: drop the center one radius off the line.
        Segment side = fs ? *fs : fixed.side(rng.below(fixed.side_count()));
        double t = rng.uniform(0.25, 0.75);
        Point foot = side.a + (side.b - side.a) * t;
        Point n = normalized(perp(side.b - side.a));
        double sgn = rng.chance(0.5) ? 1.0 : -1.0;
        if (const auto* poly = std::get_if<Polygon>(&fixed.geom)) {
          Point g = detail::centroid_of(poly->vertices);
          sgn = dot(n, g - foot) > 0 ? -1.0 : 1.0;  // push away from the interior
        }
        return make_circle(foot + n * (sgn * r), r);
      }
      if (!fc) fail(Err::UnsupportedPair, "tangency placement needs a circle on one side");
      if (plan.kind == ShapeKind::Segment) {
        double theta = rng.uniform(0.0, 2 * kPi);
        Point u{std::cos(theta), std::sin(theta)};
        Point p = fc->center + u * fc->radius;
        Point d = perp(u);
        double len = (plan.scale > 0 ? plan.scale : rng.uniform(0.12, 0.2)) * 2.2;
        double t0 = rng.uniform(0.3, 0.7);
        return make_segment(p - d * (len * t0), p + d * (len * (1 - t0)));
      }
      // Polygon tangent to the circle through one full side.
      Shape poly = build_styled(rng, plan);
      double theta = rng.uniform(0.0, 2 * kPi);
      Point u{std::cos(theta), std::sin(theta)};
      Point p = fc->center + u * fc->radius;
      Segment s0 = poly.side(0);
      Point dir = normalized(s0.b - s0.a);
      Point want = perp(u);
      double turn = rad2deg(std::atan2(cross(dir, want), dot(dir, want)));
      poly = apply_transform(poly, make_rotation(turn, {0, 0}));
      s0 = poly.side(0);
      Point mid = (s0.a + s0.b) * 0.5;
      poly = apply_transform(poly, make_translation(p.x - mid.x, p.y - mid.y));
      Point g = detail::centroid_of(std::get<Polygon>(poly.geom).vertices);
      if (dot(g - p, u) < 0)  // interior fell on the circle's side, flip across the tangent
        poly = apply_transform(poly, make_reflection(p, p + want));
      return poly;
    }
    case RelationKind::Parallel:
    case RelationKind::Perpendicular: {
      if (plan.kind != ShapeKind::Segment || !fs)
        fail(Err::UnsupportedPair, "parallel and perpendicular need segments");
      Point dir = normalized(fs->b - fs->a);
      if (rel == RelationKind::Perpendicular) dir = perp(dir);
      double len = (plan.scale > 0 ? plan.scale : rng.uniform(0.12, 0.2)) * 2.2;
      Point h = dir * (len / 2);
      return make_segment({-h.x, -h.y}, h);  // direction fixed; caller translates into place
    }
    case RelationKind::Congruent:
    case RelationKind::Similar: {
      Point g = detail::centroid_of(fixed.points());
      Point target{rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)};
      Transform t;
      if (rel == RelationKind::Similar) {
        double f = rng.chance(0.75) ? rng.uniform(0.45, 0.75) : rng.uniform(1.2, 1.45);
        Point c = (target - g * f) * (1.0 / (1.0 - f));
        t = make_scale(f, c);
      } else {
        int mode = rng.uniform_int(0, 2);
        if (mode == 0) {
          t = make_translation(target.x - g.x, target.y - g.y);
        } else if (mode == 1) {
          double deg = rng.uniform(20.0, 340.0);
          double rad = deg2rad(deg);
          // The rigid motion "rotate by deg, land centroid on target" is a
          // pure rotation about c with (I - R) c = target - R g.
          double a = 1 - std::cos(rad), b = std::sin(rad);
          Point rg{g.x * std::cos(rad) - g.y * std::sin(rad),
                   g.x * std::sin(rad) + g.y * std::cos(rad)};
          Point rhs = target - rg;
          double det = a * a + b * b;
          Point c{(a * rhs.x + b * rhs.y) / det, (-b * rhs.x + a * rhs.y) / det};
          t = make_rotation(deg, c);
        } else {
          Point mid = (g + target) * 0.5;
          t = make_reflection(mid, mid + perp(target - g));
        }
      }
      if (derived) *derived = t;
      Shape out = apply_transform(fixed, t);
      out.labels.assign(out.labels.size(), 0);
      return out;
    }
    case RelationKind::Intersect: {
      // Anchor the new shape on a boundary point of the fixed one.
      Point anchor;
      if (fc) {
        double theta = rng.uniform(0.0, 2 * kPi);
        anchor = fc->center + Point{std::cos(theta), std::sin(theta)} * fc->radius;
      } else {
        Segment side = fs ? *fs : fixed.side(rng.below(fixed.side_count()));
        anchor = side.a + (side.b - side.a) * rng.uniform(0.3, 0.7);
      }
      Shape s = build_styled(rng, plan);
      if (std::holds_alternative<Polygon>(s.geom) || std::holds_alternative<Segment>(s.geom))
        s = apply_transform(s, make_rotation(rng.uniform(0.0, 360.0), {0, 0}));
      Point g = detail::centroid_of(s.points());
      return apply_transform(s, make_translation(anchor.x - g.x, anchor.y - g.y));
    }
    case RelationKind::Contains: {
      if (movable_contains_fixed) {
        // New shape wraps around the fixed one.
        Point g = detail::centroid_of(fixed.points());
        double reach = 0;
        for (Point p : fixed.points()) reach = std::max(reach, distance(p, g));
        if (fc) reach = fc->radius;
        if (plan.kind == ShapeKind::Circle)
          return make_circle(g, reach + rng.uniform(0.05, 0.12));
        if (plan.kind == ShapeKind::Segment)
          fail(Err::UnsupportedPair, "a segment cannot contain a shape");
        ShapePlan big = plan;
        big.scale = reach * rng.uniform(2.3, 2.8);
        Shape s = build_styled(rng, big);
        Point sg = detail::centroid_of(s.points());
        return apply_transform(s, make_translation(g.x - sg.x, g.y - sg.y));
      }
      // New shape nested inside the fixed one.
      Point g;
      double room;
      if (fc) {
        g = fc->center;
        room = fc->radius;
      } else if (fs) {
        fail(Err::UnsupportedPair, "a segment cannot contain a shape");
      } else {
        const auto& v = std::get<Polygon>(fixed.geom).vertices;
        g = detail::centroid_of(v);
        room = 1e9;
        for (std::size_t i = 0; i < fixed.side_count(); ++i)
          room = std::min(room, point_segment_distance(g, fixed.side(i)));
      }
      ShapePlan small = plan;
      small.scale = std::max(0.03, room * rng.uniform(0.3, 0.45));
      Shape s = build_styled(rng, small);
      if (std::holds_alternative<Polygon>(s.geom) && rng.chance(0.5))
        s = apply_transform(s, make_rotation(rng.uniform(0.0, 360.0), {0, 0}));
      Point sg = detail::centroid_of(s.points());
      Point jig{rng.uniform(-0.1, 0.1) * room, rng.uniform(-0.1, 0.1) * room};
      return apply_transform(s, make_translation(g.x - sg.x + jig.x, g.y - sg.y + jig.y));
    }
  }
  fail(Err::OutOfRange, "unknown relation kind");
}

// ===== Annotation =====

struct AnnotationPolicy {
  double right_angle = 0.85;
  double equal_sides = 0.7;
  double equal_angles = 0.4;
  double length_labels = 0.3;
  double angle_labels = 0.3;
  int max_tick_groups = 3;
  int max_arc_groups = 2;
};

// Adds marks that restate measured facts. Marks never assert anything the
// geometry does not already satisfy.
inline Scene annotate(Scene scene, const AnnotationPolicy& policy, std::uint64_t seed) {
  Rng rng(Rng::mix(seed, 0xA11071ULL));
  Tolerance tol = scene_tolerance(scene);
  scene.annotations.clear();

  std::vector<std::pair<int, int>> right_marked;
  for (std::size_t si = 0; si < scene.shapes.size(); ++si) {
    const auto* poly = std::get_if<Polygon>(&scene.shapes[si].geom);
    if (!poly) continue;
    for (std::size_t vi = 0; vi < poly->vertices.size(); ++vi) {
      double deg = interior_angle(*poly, vi, tol);
      if (classify_angle(deg, tol) == AngleClass::Right && rng.chance(policy.right_angle)) {
        scene.annotations.push_back({RightAngleMark{static_cast<int>(si), static_cast<int>(vi)}});
        right_marked.emplace_back(static_cast<int>(si), static_cast<int>(vi));
      }
    }
  }

  struct SideInfo {
    int shape, side;
    double len;
  };
  std::vector<SideInfo> sides;
  for (std::size_t si = 0; si < scene.shapes.size(); ++si) {
    const Shape& s = scene.shapes[si];
    for (std::size_t k = 0; k < s.side_count(); ++k) {
      Segment seg = s.side(k);
      sides.push_back({static_cast<int>(si), static_cast<int>(k), distance(seg.a, seg.b)});
    }
  }
  // Equal-length clusters; each emitted cluster gets one tick group.
  {
    std::vector<int> order(sides.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[static_cast<std::size_t>(i)] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return sides[static_cast<std::size_t>(a)].len < sides[static_cast<std::size_t>(b)].len; });
    int group = 0;
    std::size_t i = 0;
    while (i < order.size() && group < policy.max_tick_groups) {
      std::size_t j = i + 1;
      // Cluster against the head so every in-group pair stays within tolerance.
      while (j < order.size() &&
             sides[static_cast<std::size_t>(order[j])].len -
                     sides[static_cast<std::size_t>(order[i])].len <=
                 tol.abs_eps * 0.9)
        ++j;
      if (j - i >= 2 && rng.chance(policy.equal_sides)) {
        ++group;
        std::vector<int> members(order.begin() + static_cast<long>(i), order.begin() + static_cast<long>(j));
        std::sort(members.begin(), members.end());
        for (int m : members)
          scene.annotations.push_back({EqualSideTick{group, sides[static_cast<std::size_t>(m)].shape,
                                                     sides[static_cast<std::size_t>(m)].side}});
      }
      i = j;
    }
  }

  struct AngleInfo {
    int shape, vertex;
    double deg;
  };
  std::vector<AngleInfo> angles;
  for (std::size_t si = 0; si < scene.shapes.size(); ++si) {
    const auto* poly = std::get_if<Polygon>(&scene.shapes[si].geom);
    if (!poly) continue;
    for (std::size_t vi = 0; vi < poly->vertices.size(); ++vi)
      angles.push_back({static_cast<int>(si), static_cast<int>(vi), interior_angle(*poly, vi, tol)});
  }
  {
    std::vector<int> order(angles.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[static_cast<std::size_t>(i)] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return angles[static_cast<std::size_t>(a)].deg < angles[static_cast<std::size_t>(b)].deg; });
    int group = 0;
    std::size_t i = 0;
    while (i < order.size() && group < policy.max_arc_groups) {
      std::size_t j = i + 1;
      while (j < order.size() &&
             angles[static_cast<std::size_t>(order[j])].deg -
                     angles[static_cast<std::size_t>(order[i])].deg <=
                 tol.angle_eps * 0.9)
        ++j;
      double deg = angles[static_cast<std::size_t>(order[i])].deg;
      bool is_right = std::abs(deg - 90.0) <= tol.angle_eps;  // right marks already say this
      if (j - i >= 2 && !is_right && rng.chance(policy.equal_angles)) {
        ++group;
        std::vector<int> members(order.begin() + static_cast<long>(i), order.begin() + static_cast<long>(j));
        std::sort(members.begin(), members.end());
        for (int m : members)
          scene.annotations.push_back({EqualAngleArc{group, angles[static_cast<std::size_t>(m)].shape,
                                                     angles[static_cast<std::size_t>(m)].vertex}});
      }
      i = j;
    }
  }

  // Numeric labels go all-or-none per shape so figures read consistently.
  for (std::size_t si = 0; si < scene.shapes.size(); ++si) {
    const Shape& s = scene.shapes[si];
    if (s.side_count() > 0 && rng.chance(policy.length_labels)) {
      for (std::size_t k = 0; k < s.side_count(); ++k) {
        Segment seg = s.side(k);
        scene.annotations.push_back(
            {LengthLabel{static_cast<int>(si), static_cast<int>(k), distance(seg.a, seg.b)}});
      }
    }
    const auto* poly = std::get_if<Polygon>(&s.geom);
    if (poly && rng.chance(policy.angle_labels)) {
      for (std::size_t vi = 0; vi < poly->vertices.size(); ++vi) {
        bool marked = false;
        for (auto [ms, mv] : right_marked)
          if (ms == static_cast<int>(si) && mv == static_cast<int>(vi)) marked = true;
        if (!marked)
          scene.annotations.push_back({AngleLabel{static_cast<int>(si), static_cast<int>(vi),
                                                  interior_angle(*poly, vi, tol)}});
      }
    }
  }

  return scene;
}

// ===== Composition =====

struct ComposeSpec {
  std::uint64_t seed = 0;
  std::vector<ShapePlan> plans;          // 1 to 4 shapes
  std::vector<RelationSpec> required;    // element refs index into plans
  AnnotationPolicy annotations;
  std::string source = "synthetic";
};

inline Scene sample_basic(std::uint64_t seed, ShapeKind kind) {
  Rng rng(Rng::mix(seed, 0xBA51CULL));
  for (int attempt = 0; attempt < 64; ++attempt) {
    Rng arng = rng.fork(static_cast<std::uint64_t>(attempt));
    Shape s = build_styled(arng, ShapePlan{kind, ShapeStyle::Any, arng.uniform(0.16, 0.3)});
    auto placed = detail::settle_into_box(std::move(s), arng, 0.08);
    if (!placed) continue;
    Scene scene;
    scene.seed = seed;
    scene.shapes.push_back(std::move(*placed));
    assign_labels(scene);
    if (validate_scene(scene).ok()) return scene;
  }
  fail(Err::Unsatisfiable, "single-shape scene did not settle");
}

namespace detail {

// The relation used to anchor shape i, normalized so the subject is the
// shape being placed.
struct Anchor {
  RelationSpec rel;
  bool movable_is_container = false;
};

inline std::optional<Anchor> anchor_relation(const std::vector<RelationSpec>& rels, int i) {
  for (const auto& r : rels) {
    int hi = std::max(r.subject.shape, r.object.shape);
    int lo = std::min(r.subject.shape, r.object.shape);
    if (hi != i || lo == i) continue;
    if (r.subject.shape == i)
      return Anchor{r, r.kind == RelationKind::Contains};
    RelationSpec sw = r;
    std::swap(sw.subject, sw.object);
    return Anchor{sw, false};
  }
  return std::nullopt;
}

inline bool placement_clear(const Scene& partial, const Shape& candidate, int idx,
                            const std::vector<RelationSpec>& required) {
  if (!shape_in_box(candidate, 0.03)) return false;
  for (std::size_t j = 0; j < partial.shapes.size(); ++j) {
    std::vector<RelationKind> contact_kinds;
    for (const auto& r : required)
      if (is_contact_kind(r.kind) && refers_to_shape(r, idx) &&
          refers_to_shape(r, static_cast<int>(j)))
        contact_kinds.push_back(r.kind);
    IntersectionResult hits = intersection_count(partial.shapes[j], candidate);
    if (contact_kinds.empty()) {
      if (boundary_distance(partial.shapes[j], candidate) < kMinSeparation + 0.005) return false;
      // An undeclared containment is as confusing as an undeclared touch.
      if (hits.infinite || !hits.points.empty()) return false;
      continue;
    }
    for (RelationKind k : contact_kinds) {
      // Hold contact pairs to the cleanest drawing of their relation.
      if (k == RelationKind::Tangent && (hits.infinite || hits.points.size() != 1)) return false;
      if (k == RelationKind::Contains && (hits.infinite || !hits.points.empty())) return false;
      if (k == RelationKind::Intersect && !hits.infinite && hits.points.empty()) return false;
    }
  }
  return true;
}

}  // namespace detail

// Builds a multi-shape scene whose declared relations all hold, retrying with
// derived seeds a bounded number of times before giving up.
inline Scene compose(const ComposeSpec& spec) {
  if (spec.plans.empty() || spec.plans.size() > 4)
    fail(Err::SpecInvalid, "composition takes 1 to 4 shapes");
  for (const auto& r : spec.required) {
    auto check_ref = [&](const ElementRef& ref) {
      if (ref.shape < 0 || static_cast<std::size_t>(ref.shape) >= spec.plans.size())
        fail(Err::SpecInvalid, "relation refers to a missing shape");
    };
    check_ref(r.subject);
    check_ref(r.object);
    if (r.subject.shape == r.object.shape && r.subject.part == ElemPart::Whole &&
        r.object.part == ElemPart::Whole)
      fail(Err::SpecInvalid, "relation relates a whole shape to itself");
  }

  for (int attempt = 0; attempt < 64; ++attempt) {
    Rng arng(Rng::mix(spec.seed, 0xC0117705EULL + static_cast<std::uint64_t>(attempt)));
    Scene scene;
    scene.seed = spec.seed;
    scene.source = spec.source;
    bool dead = false;
    std::vector<DerivedPlacement> derived;

    for (std::size_t i = 0; i < spec.plans.size() && !dead; ++i) {
      auto anchor = detail::anchor_relation(spec.required, static_cast<int>(i));
      bool placed_ok = false;
      for (int local = 0; local < 40 && !placed_ok; ++local) {
        Shape candidate;
        std::optional<Transform> derived_t;
        try {
          if (!anchor) {
            Shape raw = build_styled(arng, spec.plans[i]);
            auto settled = detail::settle_into_box(std::move(raw), arng, 0.06);
            if (!settled) continue;
            candidate = std::move(*settled);
          } else {
            RelationKind k = anchor->rel.kind;
            Shape fixed = element_shape(scene, anchor->rel.object);
            bool record = k == RelationKind::Congruent || k == RelationKind::Similar;
            Transform t = make_translation(0, 0);
            candidate = solve_placement(fixed, spec.plans[i], k, arng, record ? &t : nullptr,
                                        anchor->movable_is_container);
            if (record) derived_t = t;
            if (k == RelationKind::Parallel || k == RelationKind::Perpendicular) {
              auto settled = detail::settle_into_box(candidate, arng, 0.06, false);
              if (!settled) continue;
              candidate = std::move(*settled);
            }
          }
        } catch (const Error& e) {
          if (e.code() == Err::UnsupportedPair) throw Error(Err::SpecInvalid, e.what());
          continue;
        }
        if (!detail::placement_clear(scene, candidate, static_cast<int>(i), spec.required))
          continue;
        scene.shapes.push_back(candidate);
        if (derived_t)
          derived.push_back({anchor->rel.object.shape, static_cast<int>(i), *derived_t});
        placed_ok = true;
      }
      if (!placed_ok) dead = true;
    }
    if (dead) continue;

    scene.relations = spec.required;
    scene.derived = derived;
    assign_labels(scene);
    Scene annotated = annotate(scene, spec.annotations, Rng::mix(spec.seed, 0xA201A7EULL));
    if (validate_scene(annotated).ok()) return annotated;
  }
  fail(Err::Unsatisfiable, "composition exhausted retries");
}

}  // namespace pqa
