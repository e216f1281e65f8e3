#include <gtest/gtest.h>

#include <zlib.h>

#include "dgst/figures.hpp"

using namespace dgst;

namespace {

std::uint32_t be32(const std::string& s, std::size_t at) {
  return std::uint32_t(std::uint8_t(s[at])) << 24 | std::uint32_t(std::uint8_t(s[at + 1])) << 16 |
         std::uint32_t(std::uint8_t(s[at + 2])) << 8 | std::uint32_t(std::uint8_t(s[at + 3]));
}

// Minimal PNG reader for files produced by encode_png (single IDAT, filter 0).
Raster decode_png(const std::string& png) {
  EXPECT_EQ(png.substr(0, 8), "\x89PNG\r\n\x1a\n");
  std::size_t pos = 8;
  Raster r;
  std::string idat;
  while (pos < png.size()) {
    const std::uint32_t len = be32(png, pos);
    const std::string type = png.substr(pos + 4, 4);
    const std::string body = png.substr(pos + 8, len);
    const std::uint32_t crc = be32(png, pos + 8 + len);
    const std::string typed = type + body;
    EXPECT_EQ(crc, crc32(0L, reinterpret_cast<const Bytef*>(typed.data()), static_cast<uInt>(typed.size())));
    if (type == "IHDR") {
      r.width = static_cast<int>(be32(body, 0));
      r.height = static_cast<int>(be32(body, 4));
      r.channels = body[9] == 0 ? 1 : 3;
    } else if (type == "IDAT") {
      idat += body;
    }
    pos += 12 + len;
  }
  const std::size_t stride = static_cast<std::size_t>(r.width) * r.channels;
  std::string raw((stride + 1) * r.height, '\0');
  uLongf n = static_cast<uLongf>(raw.size());
  EXPECT_EQ(uncompress(reinterpret_cast<Bytef*>(raw.data()), &n, reinterpret_cast<const Bytef*>(idat.data()),
                       static_cast<uLong>(idat.size())),
            Z_OK);
  r.data.clear();
  for (int y = 0; y < r.height; ++y) {
    EXPECT_EQ(raw[y * (stride + 1)], '\0');
    r.data.insert(r.data.end(), raw.begin() + y * (stride + 1) + 1, raw.begin() + (y + 1) * (stride + 1));
  }
  return r;
}

}  // namespace

TEST(Heatmap, ZeroMapIsBlack) {
  const Raster r = decode_png(encode_png(heatmap(ScoreMap(33, 17))));
  EXPECT_EQ(r.width, 33);
  EXPECT_EQ(r.height, 17);
  for (auto b : r.data) ASSERT_EQ(b, 0);
}

TEST(Heatmap, BrightestPixelAtBoxCenter) {
  AnnotatedScene s{64, 40, {{axis_rect(11, 9, 52, 30), "w", false}}};
  const Raster r = decode_png(encode_png(heatmap(render_score_map(s, 0.0))));
  std::size_t arg = 0;
  for (std::size_t i = 1; i < r.data.size(); ++i) {
    if (r.data[i] > r.data[arg]) arg = i;
  }
  // Odd-sized 41x21 box: the center pixel (31, 19) holds the unique maximum.
  EXPECT_EQ(static_cast<int>(arg % 64), 31);
  EXPECT_EQ(static_cast<int>(arg / 64), 19);
  EXPECT_EQ(r.data[arg], 255);
}

TEST(Overlay, OutlinesOnExpectedRows) {
  const std::vector<Quad> gts{axis_rect(10, 5, 50, 20)};
  const std::vector<Quad> dets{axis_rect(12, 30, 40, 38)};
  const Raster r = decode_png(encode_png(overlay(64, 48, gts, dets)));
  ASSERT_EQ(r.channels, 3);
  auto at = [&](int x, int y) { return Rgb{r.data[(y * 64 + x) * 3], r.data[(y * 64 + x) * 3 + 1], r.data[(y * 64 + x) * 3 + 2]}; };
  for (int x = 10; x <= 50; ++x) {
    EXPECT_EQ(at(x, 5), kGtColor);
    EXPECT_EQ(at(x, 20), kGtColor);
  }
  for (int x = 12; x <= 40; ++x) {
    EXPECT_EQ(at(x, 30), kDetColor);
    EXPECT_EQ(at(x, 38), kDetColor);
  }
  EXPECT_EQ(at(30, 12), (Rgb{0, 0, 0}));
  EXPECT_EQ(at(10, 12), kGtColor);
}

TEST(Svg, OverlayAndHeatmap) {
  const std::vector<Quad> gts{axis_rect(1, 2, 3, 4)};
  const std::string svg = svg_overlay(10, 10, gts, {});
  EXPECT_NE(svg.find("points=\"1.000,2.000 3.000,2.000 3.000,4.000 1.000,4.000\""), std::string::npos);
  EXPECT_NE(svg_heatmap(ScoreMap(2, 2)).find("data:image/png;base64,iVBORw0KGgo"), std::string::npos);
  EXPECT_EQ(base64("Man"), "TWFu");
  EXPECT_EQ(base64("Ma"), "TWE=");
  EXPECT_EQ(base64("M"), "TQ==");
}
