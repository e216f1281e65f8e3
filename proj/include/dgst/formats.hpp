#pragma once

// Text and binary interchange: ICDAR quadrilateral annotations, detection
// files and single-channel Portable Float Maps.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dgst/error.hpp"
#include "dgst/geometry.hpp"
#include "dgst/labelgen.hpp"

namespace dgst {

inline constexpr std::string_view kIgnoreTranscript = "###";

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return std::move(ss).str();
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// ICDAR annotations

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::string format_coord(double v) {
  if (std::abs(v) < 1e15 && v == std::round(v)) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// One box per nonempty line: eight coordinates then an optional transcript
/// (everything after the eighth comma). "###" marks an ignore region.
/// When `bounds` is given, vertices are clipped to [0,w]x[0,h].
inline std::vector<TextBox> parse_icdar(std::string_view text,
                                        std::optional<std::pair<int, int>> bounds = std::nullopt) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<TextBox> boxes;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (detail::trim(line).empty()) continue;

    std::array<double, 8> c{};
    std::string_view rest = line;
    for (std::size_t k = 0; k < 8; ++k) {
      const std::size_t comma = rest.find(',');
      if (comma == std::string_view::npos && k < 7) {
        throw ParseError(line_no, "expected 8 coordinates, found " + std::to_string(k + 1));
      }
      const std::string_view field = rest.substr(0, comma);
      const auto v = detail::parse_number(field);
      if (!v) throw ParseError(line_no, "bad coordinate '" + std::string(field) + "'");
      c[k] = *v;
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      if (comma == std::string_view::npos) break;
    }

    std::array<Point, 4> pts{};
    for (std::size_t k = 0; k < 4; ++k) {
      pts[k] = {c[2 * k], c[2 * k + 1]};
      if (bounds) {
        pts[k].x = std::clamp(pts[k].x, 0.0, static_cast<double>(bounds->first));
        pts[k].y = std::clamp(pts[k].y, 0.0, static_cast<double>(bounds->second));
      }
    }
    TextBox box;
    try {
      box.quad = make_quad(pts);
    } catch (const DegenerateQuad& e) {
      throw ParseError(line_no, e.what());
    }
    box.transcript = std::string(detail::trim(rest));
    box.ignore = box.transcript == kIgnoreTranscript;
    boxes.push_back(std::move(box));
  }
  return boxes;
}

/// Ground-truth lines with transcripts; coordinates written exactly.
inline std::string write_annotations(std::span<const TextBox> boxes) {
  std::string out;
  for (const TextBox& b : boxes) {
    for (const Point& p : b.quad.v) {
      out += detail::format_coord(p.x);
      out += ',';
      out += detail::format_coord(p.y);
      out += ',';
    }
    out += b.transcript;
    out += '\n';
  }
  return out;
}

/// Detection lines: eight integer coordinates, no transcript.
inline std::string write_detections(std::span<const Quad> boxes) {
  std::string out;
  for (const Quad& q : boxes) {
    for (std::size_t k = 0; k < 4; ++k) {
      if (k) out += ',';
      out += std::to_string(std::lround(q.v[k].x));
      out += ',';
      out += std::to_string(std::lround(q.v[k].y));
    }
    out += '\n';
  }
  return out;
}

inline std::vector<Quad> parse_detections(std::string_view text) {
  std::vector<Quad> out;
  for (TextBox& b : parse_icdar(text)) out.push_back(b.quad);
  return out;
}

// ---------------------------------------------------------------------------
// PFM: "Pf\n<w> <h>\n-1.0\n" then little-endian float32 rows, bottom row first.

inline std::string write_pfm(const ScoreMap& map) {
  if (map.width <= 0 || map.height <= 0 || map.values.size() != static_cast<std::size_t>(map.width) * map.height) {
    throw std::invalid_argument("write_pfm: invalid map dimensions");
  }
  std::string out = "Pf\n" + std::to_string(map.width) + " " + std::to_string(map.height) + "\n-1.0\n";
  const std::size_t header = out.size();
  out.resize(header + map.values.size() * 4);
  char* dst = out.data() + header;
  for (int row = map.height - 1; row >= 0; --row) {
    for (int x = 0; x < map.width; ++x) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(map.at(x, row));
      for (int b = 0; b < 4; ++b) {
        *dst++ = static_cast<char>(bits & 0xFFu);
        bits >>= 8;
      }
    }
  }
  return out;
}

inline ScoreMap read_pfm(std::string_view bytes) {
  std::size_t pos = 0;
  if (bytes.size() < 2) throw FormatError(0, "missing PFM magic");
  if (bytes.substr(0, 2) == "PF") throw FormatError(0, "3-channel PF images are not supported; expected Pf");
  if (bytes.substr(0, 2) != "Pf") throw FormatError(0, "bad magic, expected Pf");
  pos = 2;

  const auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  auto token = [&](const char* what) {
    if (pos >= bytes.size() || !is_ws(bytes[pos])) throw FormatError(pos, std::string("expected whitespace before ") + what);
    while (pos < bytes.size() && is_ws(bytes[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !is_ws(bytes[pos])) ++pos;
    if (start == pos) throw FormatError(start, std::string("missing ") + what);
    return std::pair{bytes.substr(start, pos - start), start};
  };

  auto parse_dim = [&](const char* what) {
    const auto [tok, at] = token(what);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || v <= 0) {
      throw FormatError(at, std::string("bad ") + what + " '" + std::string(tok) + "'");
    }
    return v;
  };
  const int width = parse_dim("width");
  const int height = parse_dim("height");
  const auto [scale_tok, scale_at] = token("scale");
  const auto scale = detail::parse_number(scale_tok);
  if (!scale || *scale == 0.0) throw FormatError(scale_at, "bad scale '" + std::string(scale_tok) + "'");
  if (pos >= bytes.size() || !is_ws(bytes[pos])) throw FormatError(pos, "expected single whitespace after scale");
  ++pos;

  const bool little = *scale < 0.0;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t need = count * 4;
  if (bytes.size() - pos < need) {
    throw FormatError(bytes.size(), "truncated payload: expected " + std::to_string(need) + " bytes, found " +
                                        std::to_string(bytes.size() - pos));
  }
  if (bytes.size() - pos > need) throw FormatError(pos + need, "trailing bytes after payload");

  ScoreMap map(width, height);
  const auto* src = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (int row = height - 1; row >= 0; --row) {
    for (int x = 0; x < width; ++x) {
      std::uint32_t bits = 0;
      if (little) {
        bits = std::uint32_t(src[0]) | std::uint32_t(src[1]) << 8 | std::uint32_t(src[2]) << 16 |
               std::uint32_t(src[3]) << 24;
      } else {
        bits = std::uint32_t(src[3]) | std::uint32_t(src[2]) << 8 | std::uint32_t(src[1]) << 16 |
               std::uint32_t(src[0]) << 24;
      }
      src += 4;
      map.at(x, row) = std::bit_cast<float>(bits);
    }
  }
  return map;
}

inline ScoreMap load_pfm(const std::filesystem::path& path) {
  try {
    return read_pfm(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(e.offset(), path.string() + ": " + e.reason());
  }
}

inline void save_pfm(const std::filesystem::path& path, const ScoreMap& map) { write_file(path, write_pfm(map)); }

}  // namespace dgst
