#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <string>
#include <vector>

#include <zlib.h>

#include <perceptqa/compose.hpp>
#include <perceptqa/raster.hpp>
#include <perceptqa/svg.hpp>

using namespace pqa;

namespace {

double attr_after(const std::string& svg, std::size_t from, const std::string& name) {
  std::string key = name + "=\"";
  std::size_t i = svg.find(key, from);
  REQUIRE(i != std::string::npos);
  i += key.size();
  std::size_t j = svg.find('"', i);
  return std::stod(svg.substr(i, j - i));
}

std::vector<std::size_t> find_all(const std::string& hay, const std::string& needle) {
  std::vector<std::size_t> out;
  for (std::size_t i = hay.find(needle); i != std::string::npos; i = hay.find(needle, i + 1))
    out.push_back(i);
  return out;
}

// Reads shape geometry back out of the SVG text and maps it to scene space.
double max_roundtrip_error(const Scene& scene, const std::string& svg) {
  Mapper map = mapper_for(kSvgView, kSvgView);
  auto lines = find_all(svg, "<line ");
  auto circles = find_all(svg, "<circle ");
  auto polys = find_all(svg, "<polygon ");
  std::size_t li = 0, ci = 0, pi = 0;
  double worst = 0;
  auto track = [&](Point got, Point want) {
    worst = std::max(worst, distance(got, want));
  };
  for (const Shape& s : scene.shapes) {
    if (const auto* seg = std::get_if<Segment>(&s.geom)) {
      REQUIRE(li < lines.size());
      std::size_t at = lines[li++];
      track(map.from_px({attr_after(svg, at, "x1"), attr_after(svg, at, "y1")}), seg->a);
      track(map.from_px({attr_after(svg, at, "x2"), attr_after(svg, at, "y2")}), seg->b);
    } else if (const auto* c = std::get_if<Circle>(&s.geom)) {
      REQUIRE(ci < circles.size());
      std::size_t at = circles[ci++];
      track(map.from_px({attr_after(svg, at, "cx"), attr_after(svg, at, "cy")}), c->center);
      worst = std::max(worst, std::abs(attr_after(svg, at, "r") / map.side - c->radius));
    } else {
      REQUIRE(pi < polys.size());
      std::size_t at = svg.find("points=\"", polys[pi++]) + 8;
      std::size_t end = svg.find('"', at);
      std::string pts = svg.substr(at, end - at);
      std::vector<Point> got;
      std::size_t pos = 0;
      while (pos < pts.size()) {
        std::size_t comma = pts.find(',', pos);
        std::size_t space = pts.find(' ', comma);
        if (space == std::string::npos) space = pts.size();
        got.push_back(map.from_px({std::stod(pts.substr(pos, comma - pos)),
                                   std::stod(pts.substr(comma + 1, space - comma - 1))}));
        pos = space + 1;
      }
      const auto& want = std::get<Polygon>(s.geom).vertices;
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < want.size(); ++i) track(got[i], want[i]);
    }
  }
  // Every emitted element must be accounted for by a scene shape.
  REQUIRE(li == lines.size());
  REQUIRE(ci == circles.size());
  REQUIRE(pi == polys.size());
  return worst;
}

Scene tangent_pair_scene(std::uint64_t seed) {
  ComposeSpec spec;
  spec.seed = seed;
  spec.plans = {{ShapeKind::Circle, ShapeStyle::Any, 0},
                {ShapeKind::Triangle, ShapeStyle::Any, 0}};
  spec.required = {{RelationKind::Tangent, ElementRef{0}, ElementRef{1}}};
  return compose(spec);
}

std::uint32_t read_be32(const std::string& s, std::size_t at) {
  return (static_cast<std::uint32_t>(static_cast<unsigned char>(s[at])) << 24) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 1])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 2])) << 8) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + 3]));
}

}  // namespace

TEST_CASE("svg coordinates survive a parse-back round trip", "[render]") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    for (ShapeKind kind : {ShapeKind::Segment, ShapeKind::Circle, ShapeKind::Triangle,
                           ShapeKind::Quadrilateral, ShapeKind::Pentagon}) {
      Scene scene = sample_basic(seed, kind);
      REQUIRE(max_roundtrip_error(scene, render_svg(scene)) <= 1e-6);
      ++checked;
    }
    Scene pair = tangent_pair_scene(seed);
    REQUIRE(max_roundtrip_error(pair, render_svg(pair)) <= 1e-6);
    ++checked;
  }
  REQUIRE(checked == 36);
}

TEST_CASE("svg and png bytes are deterministic", "[render]") {
  Scene scene = tangent_pair_scene(77);
  std::string svg1 = render_svg(scene);
  std::string svg2 = render_svg(scene);
  REQUIRE(svg1 == svg2);

  // Rebuilding the scene from the same spec must reproduce the bytes too.
  Scene again = tangent_pair_scene(77);
  REQUIRE(render_svg(again) == svg1);

  std::string png1 = render_png(scene);
  std::string png2 = render_png(again);
  REQUIRE(png1 == png2);
  REQUIRE(!png1.empty());
}

TEST_CASE("png carries a valid signature and header", "[render]") {
  Scene scene = sample_basic(3, ShapeKind::Triangle);
  RasterSpec spec;
  spec.width = 512;
  spec.height = 384;
  std::string png = render_png(scene, spec);

  const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  REQUIRE(png.size() > 40);
  REQUIRE(std::memcmp(png.data(), sig, 8) == 0);
  REQUIRE(png.substr(12, 4) == "IHDR");
  REQUIRE(read_be32(png, 16) == 512);
  REQUIRE(read_be32(png, 20) == 384);
  REQUIRE(png[24] == 8);  // bit depth
  REQUIRE(png[25] == 2);  // truecolor
  REQUIRE(png.substr(png.size() - 8, 4) == "IEND");
}

TEST_CASE("png scanlines decode back to the raster", "[render]") {
  Scene scene = tangent_pair_scene(5);
  RasterSpec spec;
  spec.width = 320;
  spec.height = 256;
  Image img = rasterize(scene, spec);
  std::string png = png_encode(img);

  std::size_t at = png.find("IDAT");
  REQUIRE(at != std::string::npos);
  std::uint32_t len = read_be32(png, at - 4);
  std::string idat = png.substr(at + 4, len);

  std::size_t row = static_cast<std::size_t>(spec.width) * 3;
  std::vector<unsigned char> raw((row + 1) * spec.height);
  uLongf raw_len = static_cast<uLongf>(raw.size());
  REQUIRE(uncompress(raw.data(), &raw_len, reinterpret_cast<const Bytef*>(idat.data()),
                     static_cast<uLong>(idat.size())) == Z_OK);
  REQUIRE(raw_len == raw.size());

  std::vector<unsigned char> pixels(row * spec.height);
  std::vector<unsigned char> prev(row, 0);
  for (int y = 0; y < spec.height; ++y) {
    const unsigned char* line = raw.data() + static_cast<std::size_t>(y) * (row + 1);
    REQUIRE(line[0] == 2);  // Up filter on every scanline
    for (std::size_t i = 0; i < row; ++i)
      pixels[static_cast<std::size_t>(y) * row + i] =
          static_cast<unsigned char>(line[1 + i] + prev[i]);
    std::memcpy(prev.data(), pixels.data() + static_cast<std::size_t>(y) * row, row);
  }
  REQUIRE(std::memcmp(pixels.data(), img.rgb.data(), pixels.size()) == 0);
}

TEST_CASE("raster budget is enforced at both ends", "[render]") {
  Scene scene = sample_basic(1, ShapeKind::Circle);
  auto code = [&](RasterSpec spec) {
    try {
      rasterize(scene, spec);
      return Err::IoError;  // placeholder meaning "did not throw"
    } catch (const Error& e) {
      return e.code();
    }
  };
  REQUIRE(code({100, 100}) == Err::PixelBudgetViolation);
  REQUIRE(code({2000, 2000}) == Err::PixelBudgetViolation);
  REQUIRE(code({640, 64}) == Err::PixelBudgetViolation);
  REQUIRE(code({0, 640}) == Err::PixelBudgetViolation);

  // Boundary sizes are legal.
  REQUIRE(rasterize(scene, {256, 256}).rgb.size() == 256u * 256u * 3u);
  REQUIRE(rasterize(scene, {1024, 1024}).rgb.size() == 1024u * 1024u * 3u);
}

TEST_CASE("raster puts ink on the page and keeps margins white", "[render]") {
  Scene scene = tangent_pair_scene(9);
  Image img = rasterize(scene, {640, 640});
  std::size_t dark = 0;
  for (std::size_t i = 0; i < img.rgb.size(); i += 3)
    if (img.rgb[i] < 128) ++dark;
  REQUIRE(dark > 500);

  // Shape coordinates live in the unit square, so the extreme corners stay blank.
  auto pixel = [&](int x, int y) { return img.rgb[(static_cast<std::size_t>(y) * 640 + x) * 3]; };
  REQUIRE(pixel(0, 0) == 255);
  REQUIRE(pixel(639, 0) == 255);
  REQUIRE(pixel(0, 639) == 255);
  REQUIRE(pixel(639, 639) == 255);
}

TEST_CASE("glyphs and labels stay inside the viewport", "[render]") {
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL, 14ULL}) {
    Scene scene = sample_basic(seed, ShapeKind::Quadrilateral);
    Mapper map = mapper_for(kSvgView, kSvgView);
    for (const auto& chain : annotation_glyphs(scene, map))
      for (const auto& run : chain.runs)
        for (Point p : run) {
          REQUIRE(p.x >= 0);
          REQUIRE(p.x <= kSvgView);
          REQUIRE(p.y >= 0);
          REQUIRE(p.y <= kSvgView);
        }
    for (const auto& t : text_items(scene, map)) {
      REQUIRE(t.center_px.x >= 0);
      REQUIRE(t.center_px.x <= kSvgView);
      REQUIRE(t.center_px.y >= 0);
      REQUIRE(t.center_px.y <= kSvgView);
      REQUIRE(!t.text.empty());
    }
  }
}
