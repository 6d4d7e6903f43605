#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "perceptqa/answer.hpp"
#include "perceptqa/scene.hpp"

namespace pqa {

// Every question the generator can ask names one of these predicate families.
enum class FactKind {
  ShapeKindQuery,
  KindPresent,
  KindCount,
  ShapeCount,
  RightTriangle,
  IsoscelesTriangle,
  RegularPoly,
  AngleMeasure,
  AngleClassQuery,
  AngleIsRight,
  RightAngleVertex,
  SidesEqual,
  SideLonger,
  LongestSide,
  SegmentLength,
  PerimeterValue,
  AreaValue,
  PointCount,
  SideCountQuery,
  ContainsShape,
  PointAbove,
  PointLeft,
  PointInShape,
  PointOnCircle,
  IntersectsQ,
  IntersectionCountQ,
  PerpendicularQ,
  ParallelQ,
  TangentQ,
  CongruentQ,
  SimilarQ,
  TransformKind,
  TransformIs,
};

inline QuestionCategory fact_category(FactKind k) {
  switch (k) {
    case FactKind::ShapeKindQuery:
    case FactKind::KindPresent:
    case FactKind::KindCount:
    case FactKind::ShapeCount:
    case FactKind::RightTriangle:
    case FactKind::IsoscelesTriangle:
    case FactKind::RegularPoly:
      return QuestionCategory::Shapes;
    case FactKind::AngleMeasure:
    case FactKind::AngleClassQuery:
    case FactKind::AngleIsRight:
    case FactKind::RightAngleVertex:
      return QuestionCategory::Angles;
    case FactKind::SidesEqual:
    case FactKind::SideLonger:
    case FactKind::LongestSide:
    case FactKind::SegmentLength:
      return QuestionCategory::Lengths;
    case FactKind::PerimeterValue:
    case FactKind::AreaValue:
      return QuestionCategory::AreaPerimeter;
    case FactKind::PointCount:
    case FactKind::SideCountQuery:
      return QuestionCategory::OtherElement;
    case FactKind::ContainsShape:
    case FactKind::PointAbove:
    case FactKind::PointLeft:
    case FactKind::PointInShape:
    case FactKind::PointOnCircle:
      return QuestionCategory::RelativePosition;
    case FactKind::IntersectsQ:
    case FactKind::IntersectionCountQ:
      return QuestionCategory::Intersection;
    case FactKind::PerpendicularQ:
      return QuestionCategory::Perpendicularity;
    case FactKind::ParallelQ:
      return QuestionCategory::Parallelism;
    case FactKind::TangentQ:
      return QuestionCategory::Tangency;
    case FactKind::CongruentQ:
    case FactKind::SimilarQ:
      return QuestionCategory::CongruenceSimilarity;
    case FactKind::TransformKind:
    case FactKind::TransformIs:
      return QuestionCategory::Transformation;
  }
  return QuestionCategory::OtherElement;
}

// One askable predicate with its computed answer. `group` identifies facts
// that would paraphrase each other; at most one question per group is asked.
struct Fact {
  FactKind kind = FactKind::ShapeKindQuery;
  QuestionCategory category = QuestionCategory::Shapes;
  std::string question;
  Answer answer;
  std::string group;
};

// Visual decidability gates: a fact is only worth asking when the drawing
// makes the answer unambiguous at a glance.
inline constexpr double kVisualLengthGap = 0.05;
inline constexpr double kVisualAngleMargin = 5.0;
inline constexpr double kVisualPositionGap = 0.05;
inline const Tolerance kLooseTolerance{0.05, 5.0};

namespace detail {

inline const char* kind_word(ShapeKind k) {
  switch (k) {
    case ShapeKind::Segment: return "line segment";
    case ShapeKind::Circle: return "circle";
    case ShapeKind::Triangle: return "triangle";
    case ShapeKind::Quadrilateral: return "quadrilateral";
    case ShapeKind::Pentagon: return "pentagon";
  }
  return "shape";
}

inline const char* kind_plural(ShapeKind k) {
  switch (k) {
    case ShapeKind::Segment: return "line segments";
    case ShapeKind::Circle: return "circles";
    case ShapeKind::Triangle: return "triangles";
    case ShapeKind::Quadrilateral: return "quadrilaterals";
    case ShapeKind::Pentagon: return "pentagons";
  }
  return "shapes";
}

// Whitespace-free token for "what kind of shape" answers.
inline const char* kind_token(ShapeKind k) {
  return k == ShapeKind::Segment ? "segment" : kind_word(k);
}

inline std::string side_letters(const Shape& s, std::size_t k) {
  std::string out;
  if (std::holds_alternative<Segment>(s.geom)) {
    out.push_back(s.labels[0]);
    out.push_back(s.labels[1]);
  } else {
    const auto& v = std::get<Polygon>(s.geom).vertices;
    out.push_back(s.labels[k]);
    out.push_back(s.labels[(k + 1) % v.size()]);
  }
  return out;
}

// "side AB" inside its polygon, "segment AB" when free-standing.
inline std::string side_phrase(const Shape& s, std::size_t k) {
  const char* noun = std::holds_alternative<Segment>(s.geom) ? "segment " : "side ";
  return noun + side_letters(s, k);
}

inline std::string angle_letters(const Shape& s, std::size_t vi) {
  const auto& v = std::get<Polygon>(s.geom).vertices;
  std::size_t n = v.size();
  std::string out;
  out.push_back(s.labels[(vi + n - 1) % n]);
  out.push_back(s.labels[vi]);
  out.push_back(s.labels[(vi + 1) % n]);
  return out;
}

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

struct SideRef {
  int shape = 0;
  int side = 0;
  Segment seg;
  double len = 0;
};

inline std::vector<SideRef> all_sides(const Scene& scene) {
  std::vector<SideRef> out;
  for (std::size_t si = 0; si < scene.shapes.size(); ++si) {
    const Shape& s = scene.shapes[si];
    for (std::size_t k = 0; k < s.side_count(); ++k) {
      Segment seg = s.side(k);
      out.push_back({static_cast<int>(si), static_cast<int>(k), seg, distance(seg.a, seg.b)});
    }
  }
  return out;
}

inline bool adjacent_sides(const Scene& scene, const SideRef& a, const SideRef& b) {
  if (a.shape != b.shape) return false;
  std::size_t n = scene.shapes[static_cast<std::size_t>(a.shape)].side_count();
  if (n < 2) return true;  // a segment's single side is adjacent to itself
  auto d = static_cast<std::size_t>(std::abs(a.side - b.side));
  return d == 1 || d == n - 1;
}

inline std::vector<Point> dedupe_points(const std::vector<Point>& pts, double eps) {
  std::vector<Point> out;
  for (Point p : pts) {
    bool seen = false;
    for (Point q : out)
      if (distance(p, q) <= eps) seen = true;
    if (!seen) out.push_back(p);
  }
  return out;
}

inline const LengthLabel* length_label_for(const Scene& scene, int shape, int side) {
  for (const auto& a : scene.annotations)
    if (const auto* l = std::get_if<LengthLabel>(&a.mark))
      if (l->shape == shape && l->side == side) return l;
  return nullptr;
}

inline const AngleLabel* angle_label_for(const Scene& scene, int shape, int vertex) {
  for (const auto& a : scene.annotations)
    if (const auto* l = std::get_if<AngleLabel>(&a.mark))
      if (l->shape == shape && l->vertex == vertex) return l;
  return nullptr;
}

inline bool right_marked(const Scene& scene, int shape, int vertex) {
  for (const auto& a : scene.annotations)
    if (const auto* m = std::get_if<RightAngleMark>(&a.mark))
      if (m->shape == shape && m->vertex == vertex) return true;
  return false;
}

}  // namespace detail

// Walks the scene graph and lists every question-worthy fact. Deterministic:
// no randomness, ordering fixed by scene structure. Facts answered "no" are
// gated on clear visual margins so the drawing alone decides them.
inline std::vector<Fact> enumerate_facts(const Scene& scene, const Tolerance& tol) {
  using namespace detail;
  std::vector<Fact> out;
  auto add = [&](FactKind kind, std::string question, Answer answer, std::string group) {
    out.push_back({kind, fact_category(kind), std::move(question), std::move(answer),
                   std::move(group)});
  };

  const std::size_t nshapes = scene.shapes.size();

  // A figure of one bare segment is too simple to question.
  if (nshapes == 1 && scene.shapes[0].kind() == ShapeKind::Segment) {
    add(FactKind::ShapeKindQuery, "What kind of shape is shown in the figure?",
        Answer::word("segment"), "shapekind");
    return out;
  }

  // ----- shape identity -----
  if (nshapes == 1) {
    add(FactKind::ShapeKindQuery, "What kind of shape is shown in the figure?",
        Answer::word(kind_token(scene.shapes[0].kind())), "shapekind");
  } else {
    int kind_counts[5] = {0, 0, 0, 0, 0};
    for (const Shape& s : scene.shapes) ++kind_counts[static_cast<int>(s.kind())];
    for (int k = 0; k < 5; ++k) {
      auto kind = static_cast<ShapeKind>(k);
      add(FactKind::KindPresent,
          std::string("Is there a ") + kind_word(kind) + " in the figure?",
          Answer::yes_no(kind_counts[k] > 0), std::string("kindpresent:") + kind_name(kind));
      if (kind_counts[k] > 0)
        add(FactKind::KindCount,
            std::string("How many ") + kind_plural(kind) + " are in the figure?",
            Answer::number(kind_counts[k]), std::string("kindcount:") + kind_name(kind));
    }
    add(FactKind::ShapeCount, "How many shapes are in the figure?",
        Answer::number(static_cast<double>(nshapes)), "shapecount");
  }

  // ----- per-polygon facts -----
  for (std::size_t si = 0; si < nshapes; ++si) {
    const Shape& s = scene.shapes[si];
    const auto* poly = std::get_if<Polygon>(&s.geom);
    if (!poly) continue;
    std::size_t n = poly->vertices.size();
    std::string name = shape_display_name(s);
    std::string sidx = std::to_string(si);

    std::vector<double> degs(n);
    for (std::size_t vi = 0; vi < n; ++vi) degs[vi] = interior_angle(*poly, vi, tol);

    if (s.kind() == ShapeKind::Triangle) {
      int right_at = -1, rights = 0;
      bool all_far = true;
      for (std::size_t vi = 0; vi < n; ++vi) {
        if (std::abs(degs[vi] - 90.0) <= tol.angle_eps) {
          right_at = static_cast<int>(vi);
          ++rights;
        }
        if (std::abs(degs[vi] - 90.0) < kVisualAngleMargin) all_far = false;
      }
      if (rights == 1)
        add(FactKind::RightTriangle, "Is " + name + " a right triangle?", Answer::yes_no(true),
            "righttri:" + sidx);
      else if (all_far)
        add(FactKind::RightTriangle, "Is " + name + " a right triangle?", Answer::yes_no(false),
            "righttri:" + sidx);
      if (rights == 1)
        add(FactKind::RightAngleVertex, "Which vertex has the right angle in " + name + "?",
            Answer::word(std::string(1, s.labels[static_cast<std::size_t>(right_at)])),
            "rightvertex:" + sidx);

      double l0 = distance(poly->vertices[0], poly->vertices[1]);
      double l1 = distance(poly->vertices[1], poly->vertices[2]);
      double l2 = distance(poly->vertices[2], poly->vertices[0]);
      double close = std::min({std::abs(l0 - l1), std::abs(l1 - l2), std::abs(l2 - l0)});
      if (close <= tol.abs_eps)
        add(FactKind::IsoscelesTriangle, "Is " + name + " isosceles?", Answer::yes_no(true),
            "isotri:" + sidx);
      else if (close >= kVisualLengthGap)
        add(FactKind::IsoscelesTriangle, "Is " + name + " isosceles?", Answer::yes_no(false),
            "isotri:" + sidx);
    }

    if (s.kind() == ShapeKind::Quadrilateral || s.kind() == ShapeKind::Pentagon) {
      double want = s.kind() == ShapeKind::Quadrilateral ? 90.0 : 108.0;
      std::vector<double> lens(n);
      for (std::size_t k = 0; k < n; ++k) {
        Segment seg = s.side(k);
        lens[k] = distance(seg.a, seg.b);
      }
      double len_spread = 0, ang_spread = 0;
      for (std::size_t k = 0; k < n; ++k) {
        len_spread = std::max(len_spread, std::abs(lens[k] - lens[0]));
        ang_spread = std::max(ang_spread, std::abs(degs[k] - want));
      }
      std::string q = s.kind() == ShapeKind::Quadrilateral ? "Is " + name + " a square?"
                                                           : "Is " + name + " regular?";
      if (len_spread <= tol.abs_eps && ang_spread <= tol.angle_eps)
        add(FactKind::RegularPoly, q, Answer::yes_no(true), "regular:" + sidx);
      else if (len_spread >= kVisualLengthGap || ang_spread >= kVisualAngleMargin)
        add(FactKind::RegularPoly, q, Answer::yes_no(false), "regular:" + sidx);
    }

    for (std::size_t vi = 0; vi < n; ++vi) {
      std::string aname = angle_letters(s, vi);
      std::string vidx = sidx + ":" + std::to_string(vi);
      const AngleLabel* label = angle_label_for(scene, static_cast<int>(si),
                                                static_cast<int>(vi));
      bool integer = std::abs(degs[vi] - std::round(degs[vi])) < 1e-6;
      if (label || integer)
        add(FactKind::AngleMeasure, "What is the measure of angle " + aname + "?",
            Answer::number(integer ? std::round(degs[vi]) : round2(degs[vi])),
            "anglemeasure:" + vidx);

      bool marked = right_marked(scene, static_cast<int>(si), static_cast<int>(vi));
      bool is_right = std::abs(degs[vi] - 90.0) <= tol.angle_eps;
      if (is_right || marked) {
        add(FactKind::AngleClassQuery, "Is angle " + aname + " acute, right, or obtuse?",
            Answer::word("right"), "angleclass:" + vidx);
        add(FactKind::AngleIsRight, "Is angle " + aname + " a right angle?", Answer::yes_no(true),
            "angleclass:" + vidx);
      } else if (degs[vi] <= 90.0 - kVisualAngleMargin && degs[vi] >= kVisualAngleMargin) {
        add(FactKind::AngleClassQuery, "Is angle " + aname + " acute, right, or obtuse?",
            Answer::word("acute"), "angleclass:" + vidx);
        add(FactKind::AngleIsRight, "Is angle " + aname + " a right angle?", Answer::yes_no(false),
            "angleclass:" + vidx);
      } else if (degs[vi] >= 90.0 + kVisualAngleMargin &&
                 degs[vi] <= 180.0 - kVisualAngleMargin) {
        add(FactKind::AngleClassQuery, "Is angle " + aname + " acute, right, or obtuse?",
            Answer::word("obtuse"), "angleclass:" + vidx);
        add(FactKind::AngleIsRight, "Is angle " + aname + " a right angle?", Answer::yes_no(false),
            "angleclass:" + vidx);
      }
    }

    // Longest side, when one wins by a visible margin.
    {
      std::size_t best = 0;
      double best_len = -1, second = -1;
      for (std::size_t k = 0; k < n; ++k) {
        Segment seg = s.side(k);
        double len = distance(seg.a, seg.b);
        if (len > best_len) {
          second = best_len;
          best_len = len;
          best = k;
        } else if (len > second) {
          second = len;
        }
      }
      if (best_len - second >= kVisualLengthGap)
        add(FactKind::LongestSide, "Which side of " + name + " is the longest?",
            Answer::word(side_letters(s, best), TokenForm::Segment), "longest:" + sidx);
    }

    add(FactKind::SideCountQuery, "How many sides does " + name + " have?",
        Answer::number(static_cast<double>(n)), "sidecount:" + sidx);

    // Perimeter and area only when the drawing spells out the side lengths.
    bool all_labeled = true;
    double perim = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const LengthLabel* l = length_label_for(scene, static_cast<int>(si), static_cast<int>(k));
      if (!l) {
        all_labeled = false;
        break;
      }
      perim += round2(l->value);
    }
    if (all_labeled) {
      add(FactKind::PerimeterValue, "What is the perimeter of " + name + "?",
          Answer::number(perim), "perimeter:" + sidx);
      for (std::size_t vi = 0; vi < n && s.kind() == ShapeKind::Triangle; ++vi) {
        if (std::abs(degs[vi] - 90.0) > tol.angle_eps) continue;
        const LengthLabel* la =
            length_label_for(scene, static_cast<int>(si), static_cast<int>((vi + n - 1) % n));
        const LengthLabel* lb =
            length_label_for(scene, static_cast<int>(si), static_cast<int>(vi));
        if (la && lb)
          add(FactKind::AreaValue, "What is the area of " + name + "?",
              Answer::number(0.5 * round2(la->value) * round2(lb->value)), "area:" + sidx);
        break;
      }
    }
  }

  // ----- side lengths and comparisons -----
  auto sides = all_sides(scene);
  for (const auto& sr : sides) {
    const LengthLabel* l = length_label_for(scene, sr.shape, sr.side);
    if (!l) continue;
    const Shape& s = scene.shapes[static_cast<std::size_t>(sr.shape)];
    add(FactKind::SegmentLength,
        "What is the length of " + side_phrase(s, static_cast<std::size_t>(sr.side)) + "?",
        Answer::number(round2(l->value)),
        "seglen:" + std::to_string(sr.shape) + ":" + std::to_string(sr.side));
  }
  for (std::size_t i = 0; i < sides.size(); ++i)
    for (std::size_t j = i + 1; j < sides.size(); ++j) {
      const auto& a = sides[i];
      const auto& b = sides[j];
      const Shape& sa = scene.shapes[static_cast<std::size_t>(a.shape)];
      const Shape& sb = scene.shapes[static_cast<std::size_t>(b.shape)];
      bool same_poly = a.shape == b.shape && !std::holds_alternative<Segment>(sa.geom);
      std::string na = side_phrase(sa, static_cast<std::size_t>(a.side));
      std::string nb = side_phrase(sb, static_cast<std::size_t>(b.side));
      std::string group = "sidepair:" + std::to_string(a.shape) + ":" + std::to_string(a.side) +
                          ":" + std::to_string(b.shape) + ":" + std::to_string(b.side);
      double diff = a.len - b.len;
      if (std::abs(diff) <= tol.abs_eps) {
        std::string noun = same_poly ? "sides " : "segments ";
        add(FactKind::SidesEqual,
            "Are " + noun + side_letters(sa, static_cast<std::size_t>(a.side)) + " and " +
                side_letters(sb, static_cast<std::size_t>(b.side)) + " equal in length?",
            Answer::yes_no(true), group);
      } else if (std::abs(diff) >= kVisualLengthGap) {
        // Alternate which of the equality and comparison forms gets asked,
        // and which side leads, so yes and no answers both occur.
        if ((a.side + b.side + a.shape) % 2 == 0) {
          std::string noun = same_poly ? "sides " : "segments ";
          add(FactKind::SidesEqual,
              "Are " + noun + side_letters(sa, static_cast<std::size_t>(a.side)) + " and " +
                  side_letters(sb, static_cast<std::size_t>(b.side)) + " equal in length?",
              Answer::yes_no(false), group);
        } else {
          bool lead_a = (a.side + b.shape) % 2 == 0;
          const std::string& lead = lead_a ? na : nb;
          const std::string& tail = lead_a ? nb : na;
          bool longer = lead_a ? diff > 0 : diff < 0;
          add(FactKind::SideLonger, "Is " + lead + " longer than " + tail + "?",
              Answer::yes_no(longer), group);
        }
      }
    }

  // ----- labeled point positions -----
  auto pts = labeled_points(scene);
  if (pts.size() >= 3) {
    add(FactKind::PointCount, "How many labeled points are in the figure?",
        Answer::number(static_cast<double>(pts.size())), "pointcount");
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        const auto& a = pts[i].label < pts[j].label ? pts[i] : pts[j];
        const auto& b = pts[i].label < pts[j].label ? pts[j] : pts[i];
        std::string pair{a.label, b.label};
        if (std::abs(a.at.y - b.at.y) >= kVisualPositionGap)
          add(FactKind::PointAbove,
              std::string("Is point ") + a.label + " above point " + b.label + "?",
              Answer::yes_no(a.at.y > b.at.y), "vert:" + pair);
        if (std::abs(a.at.x - b.at.x) >= kVisualPositionGap)
          add(FactKind::PointLeft,
              std::string("Is point ") + a.label + " to the left of point " + b.label + "?",
              Answer::yes_no(a.at.x < b.at.x), "horiz:" + pair);
      }
  }

  // Point-versus-shape membership.
  for (const auto& lp : pts) {
    for (std::size_t si = 0; si < nshapes; ++si) {
      if (lp.shape == static_cast<int>(si)) continue;
      const Shape& s = scene.shapes[si];
      std::string pgroup = std::string("pshape:") + lp.label + ":" + std::to_string(si);
      if (const auto* c = std::get_if<Circle>(&s.geom)) {
        double d = distance(lp.at, c->center);
        std::string cname = shape_display_name(s);
        if (std::abs(d - c->radius) <= tol.abs_eps)
          add(FactKind::PointOnCircle,
              std::string("Does point ") + lp.label + " lie on " + cname + "?",
              Answer::yes_no(true), pgroup);
        else if (d <= c->radius - kVisualPositionGap)
          add(FactKind::PointInShape,
              std::string("Is point ") + lp.label + " inside " + cname + "?",
              Answer::yes_no(true), pgroup);
        else if (d >= c->radius + kVisualPositionGap) {
          if ((lp.label + si) % 2 == 0)
            add(FactKind::PointOnCircle,
                std::string("Does point ") + lp.label + " lie on " + cname + "?",
                Answer::yes_no(false), pgroup);
          else
            add(FactKind::PointInShape,
                std::string("Is point ") + lp.label + " inside " + cname + "?",
                Answer::yes_no(false), pgroup);
        }
      } else if (const auto* poly = std::get_if<Polygon>(&s.geom)) {
        double edge = 1e9;
        for (std::size_t k = 0; k < s.side_count(); ++k)
          edge = std::min(edge, point_segment_distance(lp.at, s.side(k)));
        if (edge < kVisualPositionGap) continue;
        bool inside = point_in_polygon(lp.at, *poly, tol.abs_eps);
        add(FactKind::PointInShape,
            std::string("Is point ") + lp.label + " inside " + shape_display_name(s) + "?",
            Answer::yes_no(inside), pgroup);
      }
    }
  }

  // ----- pairwise shape relations -----
  for (std::size_t i = 0; i < nshapes; ++i)
    for (std::size_t j = i + 1; j < nshapes; ++j) {
      const Shape& a = scene.shapes[i];
      const Shape& b = scene.shapes[j];
      std::string na = shape_display_name(a);
      std::string nb = shape_display_name(b);
      std::string pidx = std::to_string(i) + ":" + std::to_string(j);

      RelationKind declared_kind{};
      bool declared = false;
      int declared_subject = -1;
      for (const auto& rel : scene.relations)
        if (rel.subject.part == ElemPart::Whole && rel.object.part == ElemPart::Whole &&
            ((rel.subject.shape == static_cast<int>(i) && rel.object.shape == static_cast<int>(j)) ||
             (rel.subject.shape == static_cast<int>(j) && rel.object.shape == static_cast<int>(i)))) {
          declared = true;
          declared_kind = rel.kind;
          declared_subject = rel.subject.shape;
        }

      double gap = boundary_distance(a, b);
      IntersectionResult isect = intersection_count(a, b, tol);
      auto distinct = detail::dedupe_points(isect.points, 1e-6);

      // Intersection facts.
      if (isect.infinite || !distinct.empty())
        add(FactKind::IntersectsQ, "Do " + na + " and " + nb + " intersect?", Answer::yes_no(true),
            "isect:" + pidx);
      else if (gap >= kVisualPositionGap)
        add(FactKind::IntersectsQ, "Do " + na + " and " + nb + " intersect?",
            Answer::yes_no(false), "isect:" + pidx);
      if (!isect.infinite && !distinct.empty()) {
        bool separated = true;
        for (std::size_t u = 0; u < distinct.size() && separated; ++u)
          for (std::size_t v = u + 1; v < distinct.size(); ++v)
            if (distance(distinct[u], distinct[v]) < 0.02) separated = false;
        IntersectionResult wide = intersection_count(a, b, Tolerance{0.005, tol.angle_eps});
        auto wide_distinct = detail::dedupe_points(wide.points, 1e-6);
        if (separated && !wide.infinite && wide_distinct.size() == distinct.size())
          add(FactKind::IntersectionCountQ,
              "At how many points do " + na + " and " + nb + " intersect?",
              Answer::number(static_cast<double>(distinct.size())), "isect:" + pidx);
      }

      // Containment, oriented by declaration or by index order for negatives.
      if (declared && declared_kind == RelationKind::Contains) {
        bool i_contains = declared_subject == static_cast<int>(i);
        const std::string& inner = i_contains ? nb : na;
        const std::string& outer = i_contains ? na : nb;
        add(FactKind::ContainsShape, "Is " + inner + " inside " + outer + "?",
            Answer::yes_no(true), "inside:" + pidx);
      } else if (gap >= kVisualPositionGap) {
        add(FactKind::ContainsShape, "Is " + nb + " inside " + na + "?", Answer::yes_no(false),
            "inside:" + pidx);
      }

      // Tangency needs a circle on at least one side of the pair.
      bool has_circle = std::holds_alternative<Circle>(a.geom) ||
                        std::holds_alternative<Circle>(b.geom);
      if (has_circle) {
        const std::string& cn = std::holds_alternative<Circle>(a.geom) ? na : nb;
        const std::string& on = std::holds_alternative<Circle>(a.geom) ? nb : na;
        std::string q = "Is " + cn + " tangent to " + on + "?";
        if (declared && declared_kind == RelationKind::Tangent)
          add(FactKind::TangentQ, q, Answer::yes_no(true), "tangent:" + pidx);
        else if (gap >= kVisualPositionGap)
          add(FactKind::TangentQ, q, Answer::yes_no(false), "tangent:" + pidx);
        else if (distinct.size() >= 2 && distance(distinct[0], distinct[1]) >= 0.05 &&
                 !relation_holds(RelationKind::Tangent, a, b, tol))
          add(FactKind::TangentQ, q, Answer::yes_no(false), "tangent:" + pidx);
      }

      // Congruence and similarity, same kind only.
      if (a.kind() == b.kind() && a.kind() != ShapeKind::Segment) {
        bool decl_cong = declared && declared_kind == RelationKind::Congruent;
        bool decl_sim = declared && declared_kind == RelationKind::Similar;
        std::string qc = "Are " + na + " and " + nb + " congruent?";
        std::string qs = "Are " + na + " and " + nb + " similar?";
        if (decl_cong) {
          add(FactKind::CongruentQ, qc, Answer::yes_no(true), "congr:" + pidx);
          add(FactKind::SimilarQ, qs, Answer::yes_no(true), "simil:" + pidx);
        } else {
          if (!relation_holds(RelationKind::Congruent, a, b, kLooseTolerance))
            add(FactKind::CongruentQ, qc, Answer::yes_no(false), "congr:" + pidx);
          if (decl_sim || std::holds_alternative<Circle>(a.geom))
            add(FactKind::SimilarQ, qs, Answer::yes_no(true), "simil:" + pidx);
          else if (!relation_holds(RelationKind::Similar, a, b, kLooseTolerance))
            add(FactKind::SimilarQ, qs, Answer::yes_no(false), "simil:" + pidx);
        }
      }
    }

  // Parallel and perpendicular over every pair of drawn segments.
  for (std::size_t i = 0; i < sides.size(); ++i)
    for (std::size_t j = i + 1; j < sides.size(); ++j) {
      const auto& a = sides[i];
      const auto& b = sides[j];
      if (adjacent_sides(scene, a, b)) continue;
      const Shape& sa = scene.shapes[static_cast<std::size_t>(a.shape)];
      const Shape& sb = scene.shapes[static_cast<std::size_t>(b.shape)];
      Shape ea = make_segment(a.seg.a, a.seg.b);
      Shape eb = make_segment(b.seg.a, b.seg.b);
      bool same_poly = a.shape == b.shape;
      std::string noun = same_poly ? "sides " : "segments ";
      std::string names = noun + side_letters(sa, static_cast<std::size_t>(a.side)) + " and " +
                          side_letters(sb, static_cast<std::size_t>(b.side));
      std::string pair_idx = std::to_string(a.shape) + ":" + std::to_string(a.side) + ":" +
                             std::to_string(b.shape) + ":" + std::to_string(b.side);
      Tolerance tight{tol.abs_eps, 0.5};
      Tolerance wide{tol.abs_eps, kVisualAngleMargin};
      if (relation_holds(RelationKind::Parallel, ea, eb, tight))
        add(FactKind::ParallelQ, "Are " + names + " parallel?", Answer::yes_no(true),
            "para:" + pair_idx);
      else if (!relation_holds(RelationKind::Parallel, ea, eb, wide))
        add(FactKind::ParallelQ, "Are " + names + " parallel?", Answer::yes_no(false),
            "para:" + pair_idx);
      if (relation_holds(RelationKind::Perpendicular, ea, eb, tight))
        add(FactKind::PerpendicularQ, "Are " + names + " perpendicular?", Answer::yes_no(true),
            "perp:" + pair_idx);
      else if (!relation_holds(RelationKind::Perpendicular, ea, eb, wide))
        add(FactKind::PerpendicularQ, "Are " + names + " perpendicular?", Answer::yes_no(false),
            "perp:" + pair_idx);
    }

  // ----- declared transformations -----
  for (const auto& d : scene.derived) {
    const Shape& src = shape_at(scene, d.src);
    const Shape& dst = shape_at(scene, d.dst);
    std::string ns = shape_display_name(src);
    std::string nd = shape_display_name(dst);
    std::string didx = std::to_string(d.src) + ":" + std::to_string(d.dst);
    std::string kind = transform_kind_name(d.transform);
    std::string token = kind == "scale" ? "scaling" : kind;
    add(FactKind::TransformKind, "What single transformation maps " + ns + " to " + nd + "?",
        Answer::word(token), "xform:" + didx);
    std::string article = kind == "translation" ? "a translation of"
                          : kind == "rotation"  ? "a rotation of"
                          : kind == "reflection" ? "a reflection of"
                                                 : "a scaled copy of";
    add(FactKind::TransformIs, "Is " + nd + " " + article + " " + ns + "?", Answer::yes_no(true),
        "xform:" + didx);
    // A resized copy is visibly not a rigid copy, which gives the family its
    // clean "no" answers.
    if (const auto* sc = std::get_if<UniformScale>(&d.transform.op)) {
      if (std::abs(sc->factor - 1.0) >= 0.1) {
        const char* asked = (d.src + d.dst) % 2 == 0 ? "a rotation of" : "a translation of";
        add(FactKind::TransformIs, "Is " + nd + " " + asked + " " + ns + "?",
            Answer::yes_no(false), "xform:" + didx);
      }
    }
  }

  return out;
}

inline std::vector<Fact> enumerate_facts(const Scene& scene) {
  return enumerate_facts(scene, scene_tolerance(scene));
}

}  // namespace pqa
