#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "perceptqa/scene.hpp"

namespace pqa {

// Integer when close enough to one, otherwise two decimals. Used for drawn
// numeric labels and for numeric answer text.
inline std::string display_number(double v) {
  double r = std::round(v);
  if (std::abs(v - r) <= 1e-6) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", r);
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string display_angle(double deg) { return display_number(deg) + "\xC2\xB0"; }

// ===== Canvas mapping =====
//
// Scene coordinates live in the unit square with y up; pixels have y down.
// The square maps onto the largest centered square inside the canvas.

struct Mapper {
  double ox = 0, oy = 0, side = 1;

  Point to_px(Point scene) const { return {ox + scene.x * side, oy + (1.0 - scene.y) * side}; }
  Point from_px(Point px) const { return {(px.x - ox) / side, 1.0 - (px.y - oy) / side}; }
  // Directions flip y and carry no offset.
  static Point dir_px(Point d) { return {d.x, -d.y}; }
};

inline Mapper mapper_for(double width, double height, double margin_frac = 0.06) {
  double m = margin_frac * std::min(width, height);
  double side = std::min(width, height) - 2 * m;
  return {(width - side) / 2, (height - side) / 2, side};
}

inline constexpr double kSvgView = 1000.0;

// ===== Annotation geometry =====
//
// Each annotation renders as a single polyline chain (possibly with pen
// lifts) or as text. Chains are produced in pixel space.

struct GlyphChain {
  std::vector<std::vector<Point>> runs;  // each run is one connected polyline
};

namespace detail {

inline Point unit_toward(Point from, Point to) { return normalized(to - from); }

inline GlyphChain right_angle_glyph(const Scene& scene, const RightAngleMark& m,
                                    const Mapper& map) {
  const auto& poly = std::get<Polygon>(shape_at(scene, m.shape).geom);
  std::size_t n = poly.vertices.size();
  std::size_t vi = static_cast<std::size_t>(m.vertex);
  Point v = poly.vertices[vi];
  Point u1 = unit_toward(v, poly.vertices[(vi + n - 1) % n]);
  Point u2 = unit_toward(v, poly.vertices[(vi + 1) % n]);
  double s = 0.014 * map.side;
  Point vp = map.to_px(v);
  Point a = vp + Mapper::dir_px(u1) * s;
  Point b = vp + Mapper::dir_px(u1 + u2) * s;
  Point c = vp + Mapper::dir_px(u2) * s;
  return {{{a, b, c}}};
}

inline GlyphChain side_tick_glyph(const Scene& scene, const EqualSideTick& t, const Mapper& map) {
  Segment side = shape_at(scene, t.shape).side(static_cast<std::size_t>(t.side));
  Point a = map.to_px(side.a), b = map.to_px(side.b);
  Point mid = (a + b) * 0.5;
  Point d = normalized(b - a);
  Point n = perp(d);
  double len = 0.012 * map.side;
  double gap = 0.007 * map.side;
  GlyphChain chain;
  for (int i = 0; i < t.group; ++i) {
    double off = gap * (i - (t.group - 1) / 2.0);
    Point c = mid + d * off;
    chain.runs.push_back({c - n * len, c + n * len});
  }
  return chain;
}

inline GlyphChain angle_arc_glyph(const Scene& scene, const EqualAngleArc& arc,
                                  const Mapper& map) {
  const auto& poly = std::get<Polygon>(shape_at(scene, arc.shape).geom);
  std::size_t n = poly.vertices.size();
  std::size_t vi = static_cast<std::size_t>(arc.vertex);
  Point v = poly.vertices[vi];
  Point u1 = unit_toward(v, poly.vertices[(vi + n - 1) % n]);
  Point u2 = unit_toward(v, poly.vertices[(vi + 1) % n]);
  double phi = deg2rad(angle_measure(v, poly.vertices[(vi + n - 1) % n],
                                     poly.vertices[(vi + 1) % n]));
  // Rotate u1 toward u2 through the interior; probe both turn directions.
  double sgn = 1.0;
  {
    double c = std::cos(phi / 2), s = std::sin(phi / 2);
    Point probe{u1.x * c - u1.y * s, u1.x * s + u1.y * c};
    if (!point_in_polygon(v + probe * 0.01, poly, 1e-12)) sgn = -1.0;
  }
  GlyphChain chain;
  for (int g = 0; g < arc.group; ++g) {
    double r = (0.020 + 0.007 * g) * map.side;
    std::vector<Point> run;
    const int steps = 12;
    for (int k = 0; k <= steps; ++k) {
      double a = sgn * phi * k / steps;
      double c = std::cos(a), s = std::sin(a);
      Point u{u1.x * c - u1.y * s, u1.x * s + u1.y * c};
      run.push_back(map.to_px(v) + Mapper::dir_px(u) * r);
    }
    chain.runs.push_back(std::move(run));
  }
  return chain;
}

}  // namespace detail

// One chain per annotation; text annotations yield an empty chain.
inline std::vector<GlyphChain> annotation_glyphs(const Scene& scene, const Mapper& map) {
  std::vector<GlyphChain> out;
  for (const auto& a : scene.annotations) {
    if (const auto* m = std::get_if<RightAngleMark>(&a.mark))
      out.push_back(detail::right_angle_glyph(scene, *m, map));
    else if (const auto* t = std::get_if<EqualSideTick>(&a.mark))
      out.push_back(detail::side_tick_glyph(scene, *t, map));
    else if (const auto* arc = std::get_if<EqualAngleArc>(&a.mark))
      out.push_back(detail::angle_arc_glyph(scene, *arc, map));
    else
      out.push_back({});
  }
  return out;
}

struct TextItem {
  std::string text;
  Point center_px;
  double font_px = 26;
};

inline std::vector<TextItem> text_items(const Scene& scene, const Mapper& map) {
  std::vector<TextItem> out;
  double letter_px = 0.026 * map.side;
  double numeric_px = 0.020 * map.side;

  for (std::size_t si = 0; si < scene.shapes.size(); ++si) {
    const Shape& s = scene.shapes[si];
    auto pts = s.points();
    Point g = pts[0];
    if (pts.size() > 1) {
      g = {0, 0};
      for (Point p : pts) g = g + p;
      g = g * (1.0 / static_cast<double>(pts.size()));
    }
    for (std::size_t pi = 0; pi < pts.size(); ++pi) {
      if (!s.labels[pi]) continue;
      Point dir{0.7, 0.7};
      if (const auto* seg = std::get_if<Segment>(&s.geom))
        dir = normalized(pts[pi] - (pi == 0 ? seg->b : seg->a));
      else if (pts.size() > 1 && distance(pts[pi], g) > 1e-9)
        dir = normalized(pts[pi] - g);
      Point pos = map.to_px(pts[pi]) + Mapper::dir_px(dir) * (0.022 * map.side);
      out.push_back({std::string(1, s.labels[pi]), pos, letter_px});
    }
  }

  Point canvas_center{0.5, 0.5};
  for (const auto& a : scene.annotations) {
    if (const auto* ll = std::get_if<LengthLabel>(&a.mark)) {
      const Shape& s = shape_at(scene, ll->shape);
      Segment side = s.side(static_cast<std::size_t>(ll->side));
      Point mid = (side.a + side.b) * 0.5;
      Point n = normalized(perp(side.b - side.a));
      Point away = mid;
      if (const auto* poly = std::get_if<Polygon>(&s.geom)) {
        Point g{0, 0};
        for (Point p : poly->vertices) g = g + p;
        g = g * (1.0 / static_cast<double>(poly->vertices.size()));
        away = g;
      } else {
        away = canvas_center;
      }
      if (dot(n, mid - away) < 0) n = n * -1.0;
      Point pos = map.to_px(mid) + Mapper::dir_px(n) * (0.024 * map.side);
      out.push_back({display_number(ll->value), pos, numeric_px});
    } else if (const auto* al = std::get_if<AngleLabel>(&a.mark)) {
      const auto& poly = std::get<Polygon>(shape_at(scene, al->shape).geom);
      std::size_t n = poly.vertices.size();
      std::size_t vi = static_cast<std::size_t>(al->vertex);
      Point v = poly.vertices[vi];
      Point u1 = detail::unit_toward(v, poly.vertices[(vi + n - 1) % n]);
      Point u2 = detail::unit_toward(v, poly.vertices[(vi + 1) % n]);
      Point bis = u1 + u2;
      if (norm(bis) < 1e-9) bis = perp(u1);
      bis = normalized(bis);
      if (!point_in_polygon(v + bis * 0.02, poly, 1e-12)) bis = bis * -1.0;
      Point pos = map.to_px(v) + Mapper::dir_px(bis) * (0.045 * map.side);
      out.push_back({display_angle(al->degrees), pos, numeric_px});
    }
  }
  return out;
}

// ===== SVG emission =====

namespace detail {

inline std::string px(double v) { return format_double(v); }

}  // namespace detail

// Vector rendering: a fixed 1000-unit viewport, one element per shape, one
// path per annotation glyph, one text element per label.
inline std::string render_svg(const Scene& scene) {
  Mapper map = mapper_for(kSvgView, kSvgView);
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"1000\" "
         "viewBox=\"0 0 1000 1000\">\n";
  out += "<rect width=\"1000\" height=\"1000\" fill=\"#ffffff\"/>\n";
  const char* stroke = "stroke=\"#1a1a1a\" stroke-width=\"3\" fill=\"none\" "
                       "stroke-linecap=\"round\" stroke-linejoin=\"round\"";

  for (const Shape& s : scene.shapes) {
    if (const auto* seg = std::get_if<Segment>(&s.geom)) {
      Point a = map.to_px(seg->a), b = map.to_px(seg->b);
      out += "<line x1=\"" + detail::px(a.x) + "\" y1=\"" + detail::px(a.y) + "\" x2=\"" +
             detail::px(b.x) + "\" y2=\"" + detail::px(b.y) + "\" " + stroke + "/>\n";
    } else if (const auto* c = std::get_if<Circle>(&s.geom)) {
      Point ctr = map.to_px(c->center);
      out += "<circle cx=\"" + detail::px(ctr.x) + "\" cy=\"" + detail::px(ctr.y) + "\" r=\"" +
             detail::px(c->radius * map.side) + "\" " + stroke + "/>\n";
    } else {
      out += "<polygon points=\"";
      bool first = true;
      for (Point p : std::get<Polygon>(s.geom).vertices) {
        Point q = map.to_px(p);
        if (!first) out += " ";
        out += detail::px(q.x) + "," + detail::px(q.y);
        first = false;
      }
      out += "\" " + std::string(stroke) + "/>\n";
    }
  }

  for (const auto& chain : annotation_glyphs(scene, map)) {
    if (chain.runs.empty()) continue;
    std::string d;
    for (const auto& run : chain.runs) {
      for (std::size_t i = 0; i < run.size(); ++i) {
        d += (i == 0 ? (d.empty() ? "M " : " M ") : " L ");
        d += detail::px(run[i].x) + " " + detail::px(run[i].y);
      }
    }
    out += "<path d=\"" + d + "\" stroke=\"#1a1a1a\" stroke-width=\"2\" fill=\"none\"/>\n";
  }

  for (const auto& t : text_items(scene, map)) {
    out += "<text x=\"" + detail::px(t.center_px.x) + "\" y=\"" +
           detail::px(t.center_px.y + t.font_px * 0.35) + "\" font-family=\"sans-serif\" " +
           "font-size=\"" + detail::px(t.font_px) + "\" text-anchor=\"middle\" " +
           "fill=\"#1a1a1a\">" + t.text + "</text>\n";
  }

  out += "</svg>\n";
  return out;
}

}  // namespace pqa
