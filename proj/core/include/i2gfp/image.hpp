#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "i2gfp/error.hpp"

namespace i2gfp {

// Interleaved RGB raster, values in [0,1].
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<float> data;  // height*width*3, r,g,b per pixel

  RgbImage() = default;
  RgbImage(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w * 3, 0.f) {}

  float& at(int y, int x, int ch) { return data[(static_cast<size_t>(y) * width + x) * 3 + ch]; }
  float at(int y, int x, int ch) const { return data[(static_cast<size_t>(y) * width + x) * 3 + ch]; }
  size_t pixels() const { return static_cast<size_t>(height) * width; }
};

// Per-pixel opacity in [0,1].
struct AlphaMatte {
  int height = 0;
  int width = 0;
  std::vector<float> data;  // height*width

  AlphaMatte() = default;
  AlphaMatte(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w, 0.f) {}

  float& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  float at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
  size_t pixels() const { return static_cast<size_t>(height) * width; }
};

enum class TrimapLabel : uint8_t { Background = 0, Unknown = 1, Foreground = 2 };

// 3-label prior map. On disk: 0 background, 128 unknown, 255 foreground.
struct Trimap {
  int height = 0;
  int width = 0;
  std::vector<TrimapLabel> labels;

  Trimap() = default;
  Trimap(int h, int w)
      : height(h), width(w), labels(static_cast<size_t>(h) * w, TrimapLabel::Background) {}

  TrimapLabel& at(int y, int x) { return labels[static_cast<size_t>(y) * width + x]; }
  TrimapLabel at(int y, int x) const { return labels[static_cast<size_t>(y) * width + x]; }
  size_t pixels() const { return static_cast<size_t>(height) * width; }
};

// Boolean per-pixel mask.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> data;

  Mask() = default;
  Mask(int h, int w, uint8_t fill = 0)
      : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

  uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
  size_t count() const;

  static Mask full(int h, int w) { return Mask(h, w, 1); }
};

struct MattingSample {
  RgbImage image;
  Trimap trimap;
  std::optional<AlphaMatte> ground_truth;
  std::optional<RgbImage> foreground;
  std::optional<RgbImage> background;
};

// C = alpha*F + (1-alpha)*B per pixel per channel, clamped to [0,1].
// Throws ShapeError naming both shapes on any dimension mismatch.
RgbImage composite(const RgbImage& fg, const RgbImage& bg, const AlphaMatte& alpha);

// Unknown = square dilation (side 2*radius+1) of {0 < alpha < 1};
// remaining pixels: Foreground where alpha == 1, Background where alpha == 0.
Trimap generate_trimap(const AlphaMatte& alpha, int radius);

Mask unknown_mask(const Trimap& trimap);

uint8_t trimap_to_byte(TrimapLabel label);
TrimapLabel trimap_from_byte(uint8_t value);  // throws IoError on values outside {0,128,255}

void check_same_size(const MattingSample& s);  // throws ShapeError

}  // namespace i2gfp
