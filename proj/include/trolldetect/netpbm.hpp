#pragma once

// Plain-text netpbm writers (P2 graymap, P3 pixmap).

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trolldetect/error.hpp"

namespace trolldetect::netpbm {

/// Linear grayscale heatmap of a row-major width x height field. The
/// smallest value is white (255) and the largest black (0); a constant field
/// is uniformly white.
inline std::string heatmap_pgm(std::span<const double> values, std::size_t width,
                               std::size_t height) {
  if (values.size() != width * height)
    throw Error(ErrorKind::input, "heatmap size does not match dimensions");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = values.empty() ? 0.0 : *lo_it;
  const double span = values.empty() ? 0.0 : *hi_it - lo;

  std::string out = "P2\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double t = span > 0.0 ? (values[r * width + c] - lo) / span : 0.0;
      const auto gray = static_cast<int>(std::lround(255.0 * (1.0 - t)));
      if (c) out.push_back(' ');
      out += std::to_string(gray);
    }
    out.push_back('\n');
  }
  return out;
}

using Rgb = std::array<std::uint8_t, 3>;

/// Fixed categorical palette; ids beyond its size wrap around.
inline constexpr std::array<Rgb, 12> kPalette{{
    {228, 26, 28},  {55, 126, 184},  {77, 175, 74},  {152, 78, 163},
    {255, 127, 0},  {255, 255, 51},  {166, 86, 40},  {247, 129, 191},
    {153, 153, 153}, {0, 0, 0},      {102, 194, 165}, {141, 160, 203},
}};

inline std::string categorical_ppm(std::span<const std::size_t> labels, std::size_t width,
                                   std::size_t height) {
  if (labels.size() != width * height)
    throw Error(ErrorKind::input, "label map size does not match dimensions");
  std::string out = "P3\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const Rgb& rgb = kPalette[labels[r * width + c] % kPalette.size()];
      if (c) out += "  ";
      out += std::to_string(rgb[0]) + " " + std::to_string(rgb[1]) + " " + std::to_string(rgb[2]);
    }
    out.push_back('\n');
  }
  return out;
}

/// Parsed plain-text image, for tests and tooling.
struct Image {
  std::string magic;
  std::size_t width = 0;
  std::size_t height = 0;
  int maxval = 0;
  std::vector<int> samples;  // 1 per pixel for P2, 3 for P3
};

inline Image parse(const std::string& text) {
  Image img;
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < text.size()) {
      if (text[pos] == '#') {
        while (pos < text.size() && text[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(text[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (start == pos) throw Error(ErrorKind::input, "truncated netpbm image");
    return text.substr(start, pos - start);
  };
  img.magic = token();
  if (img.magic != "P2" && img.magic != "P3")
    throw Error(ErrorKind::input, "unsupported netpbm format " + img.magic);
  img.width = std::stoul(token());
  img.height = std::stoul(token());
  img.maxval = std::stoi(token());
  const std::size_t per_pixel = img.magic == "P3" ? 3 : 1;
  for (std::size_t i = 0; i < img.width * img.height * per_pixel; ++i)
    img.samples.push_back(std::stoi(token()));
  return img;
}

}  // namespace trolldetect::netpbm
