#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "perceptqa/compose.hpp"

using namespace pqa;

namespace {

ComposeSpec tangent_pair_spec(std::uint64_t seed) {
  ComposeSpec spec;
  spec.seed = seed;
  spec.plans = {{ShapeKind::Triangle, ShapeStyle::Any, 0.18},
                {ShapeKind::Circle, ShapeStyle::Any, 0.1}};
  spec.required = {{RelationKind::Tangent, {1, ElemPart::Whole, 0}, {0, ElemPart::Whole, 0}}};
  return spec;
}

}  // namespace

TEST_CASE("single-shape scenes validate and label their points", "[compose]") {
  const ShapeKind kinds[] = {ShapeKind::Segment, ShapeKind::Circle, ShapeKind::Triangle,
                             ShapeKind::Quadrilateral, ShapeKind::Pentagon};
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    for (ShapeKind k : kinds) {
      Scene scene = sample_basic(seed, k);
      REQUIRE(scene.shapes.size() == 1);
      CHECK(scene.shapes[0].kind() == k);
      auto report = validate_scene(scene);
      INFO(report.to_string());
      CHECK(report.ok());

      auto pts = labeled_points(scene);
      REQUIRE(pts.size() == scene.shapes[0].point_count());
      std::sort(pts.begin(), pts.end(),
                [](const LabeledPoint& a, const LabeledPoint& b) { return a.label < b.label; });
      // Letters must follow the top-to-bottom, left-to-right scan.
      for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        CHECK(pts[i].label == static_cast<char>('A' + i));
        bool ordered = pts[i].at.y > pts[i + 1].at.y ||
                       (pts[i].at.y == pts[i + 1].at.y && pts[i].at.x <= pts[i + 1].at.x);
        CHECK(ordered);
      }
    }
  }
}

TEST_CASE("composition is deterministic in the seed", "[compose]") {
  Scene a = compose(tangent_pair_spec(42));
  Scene b = compose(tangent_pair_spec(42));
  CHECK(scene_to_text(a) == scene_to_text(b));
  Scene c = compose(tangent_pair_spec(43));
  CHECK(scene_to_text(a) != scene_to_text(c));

  Scene s1 = sample_basic(7, ShapeKind::Triangle);
  Scene s2 = sample_basic(7, ShapeKind::Triangle);
  CHECK(scene_to_text(s1) == scene_to_text(s2));
}

TEST_CASE("scene serialization round-trips byte for byte", "[compose]") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    Scene scene = compose(tangent_pair_spec(seed));
    std::string text = scene_to_text(scene);
    Scene back = scene_from_text(text);
    CHECK(scene_to_text(back) == text);
  }
  CHECK_THROWS_AS(scene_from_text("{\"format\":\"other/9\"}"), Error);
  CHECK_THROWS_AS(scene_from_text("not json"), Error);
}

TEST_CASE("tangent composition touches at exactly one point", "[compose]") {
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    Scene scene = compose(tangent_pair_spec(seed));
    REQUIRE(scene.shapes.size() == 2);
    Tolerance tol = scene_tolerance(scene);
    CHECK(relation_holds(RelationKind::Tangent, scene.shapes[1], scene.shapes[0], tol));
    auto hits = intersection_count(scene.shapes[0], scene.shapes[1], tol);
    CHECK_FALSE(hits.infinite);
    CHECK(hits.points.size() == 1);
    auto report = validate_scene(scene);
    INFO(report.to_string());
    CHECK(report.ok());
  }
}

TEST_CASE("unrelated shapes keep a visible gap", "[compose]") {
  for (std::uint64_t seed = 200; seed < 240; ++seed) {
    ComposeSpec spec;
    spec.seed = seed;
    spec.plans = {{ShapeKind::Triangle, ShapeStyle::Any, 0.14},
                  {ShapeKind::Circle, ShapeStyle::Any, 0.09},
                  {ShapeKind::Segment, ShapeStyle::Any, 0.1}};
    Scene scene = compose(spec);
    REQUIRE(scene.shapes.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j)
        CHECK(boundary_distance(scene.shapes[i], scene.shapes[j]) >= kMinSeparation);
    CHECK(validate_scene(scene).ok());
  }
}

TEST_CASE("congruent composition records the planting transform", "[compose]") {
  int rotations = 0, reflections = 0, translations = 0;
  for (std::uint64_t seed = 300; seed < 360; ++seed) {
    ComposeSpec spec;
    spec.seed = seed;
    spec.plans = {{ShapeKind::Triangle, ShapeStyle::Any, 0.13},
                  {ShapeKind::Triangle, ShapeStyle::Any, 0.13}};
    spec.required = {{RelationKind::Congruent, {1, ElemPart::Whole, 0}, {0, ElemPart::Whole, 0}}};
    Scene scene = compose(spec);
    Tolerance tol = scene_tolerance(scene);
    CHECK(relation_holds(RelationKind::Congruent, scene.shapes[0], scene.shapes[1], tol));
    REQUIRE(scene.derived.size() == 1);
    CHECK(scene.derived[0].src == 0);
    CHECK(scene.derived[0].dst == 1);
    std::string k = transform_kind_name(scene.derived[0].transform);
    if (k == "rotation") ++rotations;
    if (k == "reflection") ++reflections;
    if (k == "translation") ++translations;
    CHECK(validate_scene(scene).ok());
  }
  CHECK(rotations > 0);
  CHECK(reflections > 0);
  CHECK(translations > 0);
}

TEST_CASE("similar composition scales by the recorded factor", "[compose]") {
  for (std::uint64_t seed = 400; seed < 430; ++seed) {
    ComposeSpec spec;
    spec.seed = seed;
    spec.plans = {{ShapeKind::Triangle, ShapeStyle::Any, 0.15},
                  {ShapeKind::Triangle, ShapeStyle::Any, 0.15}};
    spec.required = {{RelationKind::Similar, {1, ElemPart::Whole, 0}, {0, ElemPart::Whole, 0}}};
    Scene scene = compose(spec);
    Tolerance tol = scene_tolerance(scene);
    CHECK(relation_holds(RelationKind::Similar, scene.shapes[0], scene.shapes[1], tol));
    CHECK_FALSE(relation_holds(RelationKind::Congruent, scene.shapes[0], scene.shapes[1], tol));
    REQUIRE(scene.derived.size() == 1);
    CHECK(std::string(transform_kind_name(scene.derived[0].transform)) == "scale");
  }
}

TEST_CASE("containment composition nests or wraps as declared", "[compose]") {
  for (std::uint64_t seed = 500; seed < 530; ++seed) {
    ComposeSpec spec;
    spec.seed = seed;
    spec.plans = {{ShapeKind::Triangle, ShapeStyle::Any, 0.2},
                  {ShapeKind::Circle, ShapeStyle::Any, 0}};
    // Triangle 0 contains circle 1.
    spec.required = {{RelationKind::Contains, {0, ElemPart::Whole, 0}, {1, ElemPart::Whole, 0}}};
    Scene scene = compose(spec);
    Tolerance tol = scene_tolerance(scene);
    CHECK(relation_holds(RelationKind::Contains, scene.shapes[0], scene.shapes[1], tol));
    CHECK(validate_scene(scene).ok());
  }
  for (std::uint64_t seed = 530; seed < 550; ++seed) {
    ComposeSpec spec;
    spec.seed = seed;
    spec.plans = {{ShapeKind::Triangle, ShapeStyle::Any, 0.12},
                  {ShapeKind::Circle, ShapeStyle::Any, 0}};
    // Circle 1 wraps triangle 0.
    spec.required = {{RelationKind::Contains, {1, ElemPart::Whole, 0}, {0, ElemPart::Whole, 0}}};
    Scene scene = compose(spec);
    CHECK(relation_holds(RelationKind::Contains, scene.shapes[1], scene.shapes[0],
                         scene_tolerance(scene)));
  }
}

TEST_CASE("parallel and perpendicular segment pairs", "[compose]") {
  for (std::uint64_t seed = 600; seed < 640; ++seed) {
    bool para = seed % 2 == 0;
    ComposeSpec spec;
    spec.seed = seed;
    spec.plans = {{ShapeKind::Segment, ShapeStyle::Any, 0.13},
                  {ShapeKind::Segment, ShapeStyle::Any, 0.13}};
    spec.required = {{para ? RelationKind::Parallel : RelationKind::Perpendicular,
                      {1, ElemPart::Whole, 0},
                      {0, ElemPart::Whole, 0}}};
    Scene scene = compose(spec);
    Tolerance tol = scene_tolerance(scene);
    CHECK(relation_holds(spec.required[0].kind, scene.shapes[1], scene.shapes[0], tol));
    CHECK(validate_scene(scene).ok());
  }
}

TEST_CASE("bad composition specs are rejected up front", "[compose]") {
  ComposeSpec empty;
  CHECK_THROWS_AS(compose(empty), Error);

  ComposeSpec five;
  five.plans.assign(5, {ShapeKind::Circle, ShapeStyle::Any, 0.08});
  CHECK_THROWS_AS(compose(five), Error);

  ComposeSpec dangling;
  dangling.plans = {{ShapeKind::Circle, ShapeStyle::Any, 0.08}};
  dangling.required = {{RelationKind::Tangent, {1, ElemPart::Whole, 0}, {0, ElemPart::Whole, 0}}};
  try {
    compose(dangling);
    FAIL("expected invalid spec");
  } catch (const Error& e) {
    CHECK(e.code() == Err::SpecInvalid);
  }

  // Parallel against a circle can never be satisfied; the pair is unsupported.
  ComposeSpec bad_pair;
  bad_pair.seed = 9;
  bad_pair.plans = {{ShapeKind::Circle, ShapeStyle::Any, 0.1},
                    {ShapeKind::Segment, ShapeStyle::Any, 0.12}};
  bad_pair.required = {{RelationKind::Parallel, {1, ElemPart::Whole, 0}, {0, ElemPart::Whole, 0}}};
  try {
    compose(bad_pair);
    FAIL("expected invalid spec");
  } catch (const Error& e) {
    CHECK(e.code() == Err::SpecInvalid);
  }

  // Mutual containment between distinct shapes never settles.
  ComposeSpec mutual;
  mutual.seed = 11;
  mutual.plans = {{ShapeKind::Circle, ShapeStyle::Any, 0.12},
                  {ShapeKind::Circle, ShapeStyle::Any, 0.12}};
  mutual.required = {{RelationKind::Contains, {0, ElemPart::Whole, 0}, {1, ElemPart::Whole, 0}},
                     {RelationKind::Contains, {1, ElemPart::Whole, 0}, {0, ElemPart::Whole, 0}}};
  try {
    compose(mutual);
    FAIL("expected unsatisfiable");
  } catch (const Error& e) {
    CHECK(e.code() == Err::Unsatisfiable);
  }
}

TEST_CASE("annotations restate only measured facts", "[compose]") {
  AnnotationPolicy eager;
  eager.right_angle = 1.0;
  eager.equal_sides = 1.0;
  eager.equal_angles = 1.0;
  eager.length_labels = 1.0;
  eager.angle_labels = 1.0;

  int right_marks = 0, ticks = 0, arcs = 0, len_labels = 0, ang_labels = 0;
  for (std::uint64_t seed = 700; seed < 760; ++seed) {
    ComposeSpec spec;
    spec.seed = seed;
    spec.plans = {{ShapeKind::Triangle, ShapeStyle::Any, 0.16},
                  {ShapeKind::Quadrilateral, ShapeStyle::Any, 0.15}};
    spec.annotations = eager;
    Scene scene = compose(spec);
    auto report = validate_scene(scene);
    INFO(report.to_string());
    REQUIRE(report.ok());
    for (const auto& a : scene.annotations) {
      if (std::holds_alternative<RightAngleMark>(a.mark)) ++right_marks;
      if (std::holds_alternative<EqualSideTick>(a.mark)) ++ticks;
      if (std::holds_alternative<EqualAngleArc>(a.mark)) ++arcs;
      if (std::holds_alternative<LengthLabel>(a.mark)) ++len_labels;
      if (std::holds_alternative<AngleLabel>(a.mark)) ++ang_labels;
    }
  }
  // Special constructions appear often enough to exercise every mark kind.
  CHECK(right_marks > 0);
  CHECK(ticks > 0);
  CHECK(arcs > 0);
  CHECK(len_labels > 0);
  CHECK(ang_labels > 0);

  // A corrupted annotation must be caught.
  Scene scene = sample_basic(3, ShapeKind::Triangle);
  scene.annotations.push_back({AngleLabel{0, 0, 12.0}});
  bool truthful = true;
  const auto& poly = std::get<Polygon>(scene.shapes[0].geom);
  if (std::abs(interior_angle(poly, 0) - 12.0) > 1e-6) truthful = false;
  REQUIRE_FALSE(truthful);
  CHECK_FALSE(validate_scene(scene).ok());
}

TEST_CASE("validation flags broken scenes", "[compose]") {
  Scene scene = sample_basic(5, ShapeKind::Triangle);

  Scene out_of_bounds = scene;
  out_of_bounds.shapes[0] = apply_transform(scene.shapes[0], make_translation(2.0, 0));
  CHECK_FALSE(validate_scene(out_of_bounds).ok());

  Scene dup = scene;
  dup.shapes[0].labels[1] = dup.shapes[0].labels[0];
  CHECK_FALSE(validate_scene(dup).ok());

  Scene false_rel = scene;
  false_rel.shapes.push_back(make_circle({0.9, 0.9}, 0.05));
  false_rel.shapes.back().labels[0] = 'Z';
  false_rel.relations.push_back(
      {RelationKind::Tangent, {1, ElemPart::Whole, 0}, {0, ElemPart::Whole, 0}});
  auto rep = validate_scene(false_rel);
  bool found = false;
  for (const auto& v : rep.violations)
    if (v.code == "DeclaredRelationFalse") found = true;
  CHECK(found);

  Scene crowd = scene;
  crowd.shapes.push_back(apply_transform(scene.shapes[0], make_translation(1e-4, 1e-4)));
  crowd.shapes.back().labels.assign(3, 0);
  rep = validate_scene(crowd);
  found = false;
  for (const auto& v : rep.violations)
    if (v.code == "MinSeparation") found = true;
  CHECK(found);
}
