#pragma once

#include <zlib.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "perceptqa/svg.hpp"

namespace pqa {

inline constexpr long kMinImagePixels = 65536;    // 256 x 256
inline constexpr long kMaxImagePixels = 1048576;  // 1024 x 1024

struct RasterSpec {
  int width = 640;
  int height = 640;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel
};

namespace detail {

// 5x7 bitmap glyphs, bit 4 is the leftmost column.
inline const std::uint8_t* glyph_rows(char c) {
  static const std::uint8_t digits[10][7] = {
      {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}, {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},
      {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}, {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},
      {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}, {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},
      {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}, {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},
      {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}, {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}};
  static const std::uint8_t letters[26][7] = {
      {0x0E, 0x11, 0x11, 0x11, 0x1F, 0x11, 0x11}, {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E},
      {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}, {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C},
      {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}, {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10},
      {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}, {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},
      {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}, {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C},
      {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}, {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F},
      {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}, {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11},
      {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}, {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10},
      {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}, {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11},
      {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}, {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04},
      {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}, {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04},
      {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}, {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11},
      {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}, {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}};
  static const std::uint8_t dot[7] = {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C};
  static const std::uint8_t degree[7] = {0x0C, 0x12, 0x12, 0x0C, 0x00, 0x00, 0x00};
  static const std::uint8_t minus[7] = {0x00, 0x00, 0x00, 0x0E, 0x00, 0x00, 0x00};
  static const std::uint8_t blank[7] = {0, 0, 0, 0, 0, 0, 0};
  if (c >= '0' && c <= '9') return digits[c - '0'];
  if (c >= 'A' && c <= 'Z') return letters[c - 'A'];
  if (c >= 'a' && c <= 'z') return letters[c - 'a'];
  if (c == '.') return dot;
  if (c == '*') return degree;  // degree signs arrive re-encoded as '*'
  if (c == '-') return minus;
  return blank;
}

class Canvas {
 public:
  Canvas(int w, int h) : w_(w), h_(h), rgb_(static_cast<std::size_t>(w) * h * 3, 255) {}

  void blend(int x, int y, double alpha) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_ || alpha <= 0) return;
    if (alpha > 1) alpha = 1;
    std::size_t i = (static_cast<std::size_t>(y) * w_ + x) * 3;
    for (int c = 0; c < 3; ++c) {
      double v = rgb_[i + c] * (1.0 - alpha) + 26.0 * alpha;
      rgb_[i + c] = static_cast<std::uint8_t>(v + 0.5);
    }
  }

  void stroke_segment(Point a, Point b, double width) {
    Segment seg{a, b};
    double half = width / 2;
    int x0 = static_cast<int>(std::floor(std::min(a.x, b.x) - half - 1));
    int x1 = static_cast<int>(std::ceil(std::max(a.x, b.x) + half + 1));
    int y0 = static_cast<int>(std::floor(std::min(a.y, b.y) - half - 1));
    int y1 = static_cast<int>(std::ceil(std::max(a.y, b.y) + half + 1));
    for (int y = std::max(0, y0); y <= std::min(h_ - 1, y1); ++y)
      for (int x = std::max(0, x0); x <= std::min(w_ - 1, x1); ++x) {
        double d = point_segment_distance({x + 0.5, y + 0.5}, seg);
        blend(x, y, half + 0.5 - d);
      }
  }

  void stroke_ring(Point c, double r, double width) {
    double half = width / 2;
    int x0 = static_cast<int>(std::floor(c.x - r - half - 1));
    int x1 = static_cast<int>(std::ceil(c.x + r + half + 1));
    int y0 = static_cast<int>(std::floor(c.y - r - half - 1));
    int y1 = static_cast<int>(std::ceil(c.y + r + half + 1));
    for (int y = std::max(0, y0); y <= std::min(h_ - 1, y1); ++y)
      for (int x = std::max(0, x0); x <= std::min(w_ - 1, x1); ++x) {
        double d = std::abs(distance({x + 0.5, y + 0.5}, c) - r);
        blend(x, y, half + 0.5 - d);
      }
  }

  void draw_text(const std::string& text, Point center, double font_px) {
    int k = std::max(1, static_cast<int>(std::lround(font_px / 7.0)));
    // Re-encode the UTF-8 degree sign to the single-byte glyph key.
    std::string flat;
    for (std::size_t i = 0; i < text.size(); ++i) {
      unsigned char ch = static_cast<unsigned char>(text[i]);
      if (ch == 0xC2 && i + 1 < text.size() &&
          static_cast<unsigned char>(text[i + 1]) == 0xB0) {
        flat.push_back('*');
        ++i;
      } else {
        flat.push_back(static_cast<char>(ch));
      }
    }
    int total_w = static_cast<int>(flat.size()) * 6 * k - k;
    int x0 = static_cast<int>(std::lround(center.x)) - total_w / 2;
    int y0 = static_cast<int>(std::lround(center.y)) - 7 * k / 2;
    for (std::size_t ci = 0; ci < flat.size(); ++ci) {
      const std::uint8_t* rows = glyph_rows(flat[ci]);
      for (int ry = 0; ry < 7; ++ry)
        for (int rx = 0; rx < 5; ++rx) {
          if (!(rows[ry] & (1 << (4 - rx)))) continue;
          for (int dy = 0; dy < k; ++dy)
            for (int dx = 0; dx < k; ++dx)
              blend(x0 + static_cast<int>(ci) * 6 * k + rx * k + dx, y0 + ry * k + dy, 1.0);
        }
    }
  }

  int width() const { return w_; }
  int height() const { return h_; }
  std::vector<std::uint8_t>&& take() { return std::move(rgb_); }

 private:
  int w_, h_;
  std::vector<std::uint8_t> rgb_;
};

}  // namespace detail

// Draws the scene with coverage-based antialiasing. The pixel count must sit
// inside the published raster budget.
inline Image rasterize(const Scene& scene, const RasterSpec& spec = RasterSpec{}) {
  long pixels = static_cast<long>(spec.width) * spec.height;
  if (spec.width <= 0 || spec.height <= 0 || pixels < kMinImagePixels || pixels > kMaxImagePixels)
    fail(Err::PixelBudgetViolation,
         std::to_string(spec.width) + "x" + std::to_string(spec.height) + " is outside [" +
             std::to_string(kMinImagePixels) + ", " + std::to_string(kMaxImagePixels) + "]");

  Mapper map = mapper_for(spec.width, spec.height);
  detail::Canvas canvas(spec.width, spec.height);
  double stroke_w = std::max(1.6, 0.0042 * map.side);
  double glyph_w = std::max(1.2, 0.0028 * map.side);

  for (const Shape& s : scene.shapes) {
    if (const auto* seg = std::get_if<Segment>(&s.geom)) {
      canvas.stroke_segment(map.to_px(seg->a), map.to_px(seg->b), stroke_w);
    } else if (const auto* c = std::get_if<Circle>(&s.geom)) {
      canvas.stroke_ring(map.to_px(c->center), c->radius * map.side, stroke_w);
    } else {
      const auto& v = std::get<Polygon>(s.geom).vertices;
      for (std::size_t i = 0; i < v.size(); ++i)
        canvas.stroke_segment(map.to_px(v[i]), map.to_px(v[(i + 1) % v.size()]), stroke_w);
    }
  }

  for (const auto& chain : annotation_glyphs(scene, map))
    for (const auto& run : chain.runs)
      for (std::size_t i = 0; i + 1 < run.size(); ++i)
        canvas.stroke_segment(run[i], run[i + 1], glyph_w);

  for (const auto& t : text_items(scene, map)) canvas.draw_text(t.text, t.center_px, t.font_px);

  Image img;
  img.width = spec.width;
  img.height = spec.height;
  img.rgb = canvas.take();
  return img;
}

// ===== PNG encoding =====

namespace detail {

inline void be32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>(v & 0xFF));
}

inline void png_chunk(std::string& out, const char* type, const std::string& data) {
  be32(out, static_cast<std::uint32_t>(data.size()));
  std::string body = std::string(type, 4) + data;
  out += body;
  std::uint32_t crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
  be32(out, crc);
}

}  // namespace detail

// 8-bit truecolor PNG with the Up filter on every scanline. White backgrounds
// and long unchanged runs deflate to almost nothing.
inline std::string png_encode(const Image& img) {
  const std::size_t row = static_cast<std::size_t>(img.width) * 3;
  std::string raw;
  raw.reserve((row + 1) * static_cast<std::size_t>(img.height));
  std::vector<std::uint8_t> prev(row, 0);
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(2);  // Up filter
    const std::uint8_t* cur = img.rgb.data() + static_cast<std::size_t>(y) * row;
    for (std::size_t i = 0; i < row; ++i)
      raw.push_back(static_cast<char>(static_cast<std::uint8_t>(cur[i] - prev[i])));
    std::memcpy(prev.data(), cur, row);
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::string compressed(bound, '\0');
  if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                6) != Z_OK)
    fail(Err::IoError, "deflate failed");
  compressed.resize(bound);

  std::string out("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  detail::be32(ihdr, static_cast<std::uint32_t>(img.width));
  detail::be32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // truecolor
  ihdr.push_back(0);   // deflate
  ihdr.push_back(0);   // adaptive filtering
  ihdr.push_back(0);   // no interlace
  detail::png_chunk(out, "IHDR", ihdr);
  detail::png_chunk(out, "IDAT", compressed);
  detail::png_chunk(out, "IEND", "");
  return out;
}

inline std::string render_png(const Scene& scene, const RasterSpec& spec = RasterSpec{}) {
  return png_encode(rasterize(scene, spec));
}

}  // namespace pqa
