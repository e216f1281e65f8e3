#pragma once

// Figure output: grayscale score-map heatmaps and ground-truth vs detection
// overlays, encoded as PNG (zlib) or SVG.

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dgst/geometry.hpp"
#include "dgst/labelgen.hpp"

namespace dgst {

struct Raster {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 = gray, 3 = RGB
  std::vector<std::uint8_t> data;

  Raster() = default;
  Raster(int w, int h, int c) : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, 0) {}

  std::uint8_t* px(int x, int y) { return &data[(static_cast<std::size_t>(y) * width + x) * channels]; }
  const std::uint8_t* px(int x, int y) const { return &data[(static_cast<std::size_t>(y) * width + x) * channels]; }
};

using Rgb = std::array<std::uint8_t, 3>;
inline constexpr Rgb kGtColor{0, 255, 0};
inline constexpr Rgb kDetColor{255, 0, 0};

inline Raster heatmap(const ScoreMap& m) {
  Raster r(m.width, m.height, 1);
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    const double v = std::isfinite(m.values[i]) ? std::clamp<double>(m.values[i], 0.0, 1.0) : 0.0;
    r.data[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return r;
}

namespace detail {

inline void draw_line(Raster& r, int x0, int y0, int x1, int y1, Rgb c) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    if (x0 >= 0 && y0 >= 0 && x0 < r.width && y0 < r.height) {
      std::uint8_t* p = r.px(x0, y0);
      p[0] = c[0];
      p[1] = c[1];
      p[2] = c[2];
    }
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace detail

/// Quad outline; vertices snap to the pixel whose index is the rounded
/// coordinate, clamped to the image.
inline void draw_quad(Raster& r, const Quad& q, Rgb color) {
  auto snap = [](double v, int hi) { return static_cast<int>(std::clamp<long>(std::lround(v), 0, hi - 1)); };
  for (std::size_t k = 0; k < 4; ++k) {
    const Point a = q.v[k];
    const Point b = q.v[(k + 1) % 4];
    detail::draw_line(r, snap(a.x, r.width), snap(a.y, r.height), snap(b.x, r.width), snap(b.y, r.height), color);
  }
}

/// Black canvas with ground truth in green and detections drawn on top in red.
inline Raster overlay(int width, int height, std::span<const Quad> gts, std::span<const Quad> dets) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("overlay: size must be positive");
  Raster r(width, height, 3);
  for (const Quad& q : gts) draw_quad(r, q, kGtColor);
  for (const Quad& q : dets) draw_quad(r, q, kDetColor);
  return r;
}

namespace detail {

inline void put_be32(std::string& out, std::uint32_t v) {
  out += static_cast<char>(v >> 24);
  out += static_cast<char>(v >> 16);
  out += static_cast<char>(v >> 8);
  out += static_cast<char>(v);
}

inline void put_chunk(std::string& out, const char* type, const std::string& body) {
  put_be32(out, static_cast<std::uint32_t>(body.size()));
  const std::string typed = std::string(type, 4) + body;
  out += typed;
  put_be32(out, static_cast<std::uint32_t>(
                    crc32(0L, reinterpret_cast<const Bytef*>(typed.data()), static_cast<uInt>(typed.size()))));
}

}  // namespace detail

/// 8-bit PNG, filter type 0 on every row, zlib level 9.
inline std::string encode_png(const Raster& r) {
  if (r.channels != 1 && r.channels != 3) throw std::invalid_argument("encode_png: 1 or 3 channels");
  const std::size_t stride = static_cast<std::size_t>(r.width) * r.channels;
  std::string raw;
  raw.reserve((stride + 1) * r.height);
  for (int y = 0; y < r.height; ++y) {
    raw += '\0';
    raw.append(reinterpret_cast<const char*>(r.px(0, y)), stride);
  }
  uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
  std::string z(zlen, '\0');
  if (compress2(reinterpret_cast<Bytef*>(z.data()), &zlen, reinterpret_cast<const Bytef*>(raw.data()),
                static_cast<uLong>(raw.size()), 9) != Z_OK) {
    throw std::runtime_error("zlib compression failed");
  }
  z.resize(zlen);

  std::string out = "\x89PNG\r\n\x1a\n";
  std::string ihdr;
  detail::put_be32(ihdr, static_cast<std::uint32_t>(r.width));
  detail::put_be32(ihdr, static_cast<std::uint32_t>(r.height));
  ihdr += static_cast<char>(8);                       // bit depth
  ihdr += static_cast<char>(r.channels == 1 ? 0 : 2);  // gray / truecolor
  ihdr += std::string(3, '\0');                       // compression, filter, interlace
  detail::put_chunk(out, "IHDR", ihdr);
  detail::put_chunk(out, "IDAT", z);
  detail::put_chunk(out, "IEND", "");
  return out;
}

inline std::string base64(std::string_view in) {
  static constexpr char tbl[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < in.size(); i += 3) {
    const std::uint32_t v = std::uint8_t(in[i]) << 16 | std::uint8_t(in[i + 1]) << 8 | std::uint8_t(in[i + 2]);
    out += tbl[v >> 18];
    out += tbl[(v >> 12) & 63];
    out += tbl[(v >> 6) & 63];
    out += tbl[v & 63];
  }
  if (i < in.size()) {
    std::uint32_t v = std::uint8_t(in[i]) << 16;
    if (i + 1 < in.size()) v |= std::uint8_t(in[i + 1]) << 8;
    out += tbl[v >> 18];
    out += tbl[(v >> 12) & 63];
    out += i + 1 < in.size() ? tbl[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

inline std::string svg_heatmap(const ScoreMap& m) {
  const std::string w = std::to_string(m.width), h = std::to_string(m.height);
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + w + "\" height=\"" + h + "\" viewBox=\"0 0 " + w +
         " " + h + "\">\n<image width=\"" + w + "\" height=\"" + h +
         "\" style=\"image-rendering:pixelated\" href=\"data:image/png;base64," + base64(encode_png(heatmap(m))) +
         "\"/>\n</svg>\n";
}

inline std::string svg_overlay(int width, int height, std::span<const Quad> gts, std::span<const Quad> dets) {
  auto poly = [](const Quad& q, const char* color) {
    std::string pts;
    for (std::size_t k = 0; k < 4; ++k) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", k ? " " : "", q.v[k].x, q.v[k].y);
      pts += buf;
    }
    return "<polygon points=\"" + pts + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1\"/>\n";
  };
  const std::string w = std::to_string(width), h = std::to_string(height);
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + w + "\" height=\"" + h +
                    "\" viewBox=\"0 0 " + w + " " + h + "\">\n<rect width=\"" + w + "\" height=\"" + h +
                    "\" fill=\"black\"/>\n";
  for (const Quad& q : gts) out += poly(q, "#00ff00");
  for (const Quad& q : dets) out += poly(q, "#ff0000");
  return out + "</svg>\n";
}

}  // namespace dgst
