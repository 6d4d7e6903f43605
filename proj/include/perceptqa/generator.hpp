#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <perceptqa/compose.hpp>
#include <perceptqa/dataset.hpp>
#include <perceptqa/raster.hpp>
#include <perceptqa/svg.hpp>

namespace pqa {

struct GenConfig {
  std::uint64_t seed = 0;
  int count = 0;
  RasterSpec raster;
  bool write_svg = true;
  int max_questions = kMaxQuestionsPerSample;
};

struct GeneratedSample {
  Scene scene;
  Sample sample;  // paths filled in by the batch writer
};

namespace detail {

// Scene recipes weighted to feed every question category: single annotated
// shapes carry measures and labels, relation pairs carry the relation
// categories, and congruent/similar pairs record the transforms behind
// transformation questions.
inline Scene recipe_scene(std::uint64_t seed, Rng& rng) {
  auto plan = [](ShapeKind k) { return ShapePlan{k}; };
  ShapeKind poly[3] = {ShapeKind::Triangle, ShapeKind::Quadrilateral, ShapeKind::Pentagon};
  ShapeKind single[4] = {ShapeKind::Triangle, ShapeKind::Quadrilateral, ShapeKind::Pentagon,
                         ShapeKind::Circle};
  ComposeSpec spec;
  spec.seed = seed;
  switch (rng.weighted({16, 8, 8, 9, 5, 7, 6, 8, 7, 7, 6, 6})) {
    case 0:
      spec.plans = {plan(single[rng.below(4)])};
      break;
    case 1:
      spec.plans = {plan(ShapeKind::Triangle), plan(ShapeKind::Triangle)};
      spec.required = {{RelationKind::Similar, ElementRef{0}, ElementRef{1}}};
      break;
    case 2: {
      ShapeKind k = poly[rng.below(3)];
      spec.plans = {plan(k), plan(k)};
      spec.required = {{RelationKind::Congruent, ElementRef{0}, ElementRef{1}}};
      break;
    }
    case 3:
      spec.plans = {plan(ShapeKind::Circle), plan(poly[rng.below(3)])};
      spec.required = {{RelationKind::Tangent, ElementRef{0}, ElementRef{1}}};
      break;
    case 4:
      spec.plans = {plan(ShapeKind::Circle), plan(ShapeKind::Segment)};
      spec.required = {{RelationKind::Tangent, ElementRef{0}, ElementRef{1}}};
      break;
    case 5:
      spec.plans = {plan(ShapeKind::Segment), plan(ShapeKind::Segment)};
      spec.required = {{RelationKind::Parallel, ElementRef{0}, ElementRef{1}}};
      break;
    case 6:
      spec.plans = {plan(ShapeKind::Segment), plan(ShapeKind::Segment)};
      spec.required = {{RelationKind::Perpendicular, ElementRef{0}, ElementRef{1}}};
      break;
    case 7:
      spec.plans = {plan(poly[rng.below(3)]), plan(ShapeKind::Segment)};
      spec.required = {{RelationKind::Intersect, ElementRef{0}, ElementRef{1}}};
      break;
    case 8:
      spec.plans = {plan(poly[rng.below(3)]), plan(poly[rng.below(3)])};
      spec.required = {{RelationKind::Intersect, ElementRef{0}, ElementRef{1}}};
      break;
    case 9:
      spec.plans = {plan(ShapeKind::Circle), plan(ShapeKind::Triangle)};
      spec.required = {{RelationKind::Contains, ElementRef{0}, ElementRef{1}}};
      break;
    case 10:
      spec.plans = {plan(poly[rng.below(3)]), plan(ShapeKind::Segment), plan(ShapeKind::Circle)};
      spec.required = {{RelationKind::Intersect, ElementRef{0}, ElementRef{1}}};
      break;
    default:
      spec.plans = {plan(poly[rng.below(3)]), plan(ShapeKind::Circle)};
      break;
  }
  return compose(spec);
}

}  // namespace detail

inline std::string synthetic_id(int index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "syn-%07d", index);
  return buf;
}

// Builds one scene with a non-empty question set; scenes whose fact pool is
// too thin (for example a lone segment) are rerolled with a fresh seed.
inline GeneratedSample generate_sample(const GenConfig& cfg, int index) {
  for (std::uint64_t attempt = 0; attempt < 20; ++attempt) {
    std::uint64_t sseed = Rng::mix(cfg.seed, static_cast<std::uint64_t>(index) * 32 + attempt);
    Rng rng(Rng::mix(sseed, 0xC1E0ULL));
    Scene scene;
    try {
      scene = detail::recipe_scene(sseed, rng);
    } catch (const Error&) {
      continue;
    }
    auto qas = generate_qas(scene, Rng::mix(sseed, 0x0A5EEDULL), cfg.max_questions);
    if (qas.empty()) continue;
    GeneratedSample out;
    out.scene = std::move(scene);
    out.sample.id = synthetic_id(index);
    out.sample.source = "synthetic";
    out.sample.qas = std::move(qas);
    return out;
  }
  fail(Err::Unsatisfiable, "sample " + std::to_string(index) + " found no question-worthy scene");
}

namespace detail {

inline void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Err::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace detail

// Writes images/<id>.png (+ .svg), scenes/<id>.scene and samples.jsonl under
// out_dir. Output is a pure function of the config.
inline std::vector<Sample> run_generation(const GenConfig& cfg, const std::filesystem::path& out_dir) {
  if (cfg.count < 0) fail(Err::OutOfRange, "negative sample count");
  std::filesystem::create_directories(out_dir / "images");
  std::filesystem::create_directories(out_dir / "scenes");
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(cfg.count));
  for (int i = 0; i < cfg.count; ++i) {
    GeneratedSample g = generate_sample(cfg, i);
    const std::string& id = g.sample.id;
    detail::write_bytes(out_dir / "images" / (id + ".png"), render_png(g.scene, cfg.raster));
    if (cfg.write_svg) detail::write_bytes(out_dir / "images" / (id + ".svg"), render_svg(g.scene));
    detail::write_bytes(out_dir / "scenes" / (id + ".scene"), scene_to_text(g.scene));
    g.sample.image_path = "images/" + id + ".png";
    g.sample.scene_path = "scenes/" + id + ".scene";
    samples.push_back(std::move(g.sample));
  }
  write_samples_jsonl(out_dir / "samples.jsonl", samples);
  return samples;
}

}  // namespace pqa
