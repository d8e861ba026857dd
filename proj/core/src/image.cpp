#include "i2gfp/image.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace i2gfp {

size_t Mask::count() const {
  return static_cast<size_t>(std::count_if(data.begin(), data.end(), [](uint8_t v) { return v != 0; }));
}

namespace {

std::string shape_str(int h, int w) {
  std::ostringstream os;
  os << h << "x" << w;
  return os.str();
}

}  // namespace

RgbImage composite(const RgbImage& fg, const RgbImage& bg, const AlphaMatte& alpha) {
  if (fg.height != bg.height || fg.width != bg.width) {
    throw ShapeError("composite: foreground " + shape_str(fg.height, fg.width) +
                     " vs background " + shape_str(bg.height, bg.width));
  }
  if (fg.height != alpha.height || fg.width != alpha.width) {
    throw ShapeError("composite: foreground " + shape_str(fg.height, fg.width) +
                     " vs alpha " + shape_str(alpha.height, alpha.width));
  }
  RgbImage out(fg.height, fg.width);
  const size_t n = fg.pixels();
  for (size_t j = 0; j < n; ++j) {
    const float a = alpha.data[j];
    for (int c = 0; c < 3; ++c) {
      float v = a * fg.data[j * 3 + c] + (1.f - a) * bg.data[j * 3 + c];
      out.data[j * 3 + c] = std::clamp(v, 0.f, 1.f);
    }
  }
  return out;
}

Trimap generate_trimap(const AlphaMatte& alpha, int radius) {
  if (radius < 0) throw ConfigError("generate_trimap: radius must be >= 0");
  const int h = alpha.height, w = alpha.width;

  std::vector<uint8_t> seed(alpha.pixels());
  for (size_t j = 0; j < alpha.pixels(); ++j) {
    const float a = alpha.data[j];
    seed[j] = (a > 0.f && a < 1.f) ? 1 : 0;
  }

  // Square dilation as two 1-D max passes.
  std::vector<uint8_t> rowpass(alpha.pixels(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
      uint8_t v = 0;
      for (int k = x0; k <= x1 && !v; ++k) v = seed[static_cast<size_t>(y) * w + k];
      rowpass[static_cast<size_t>(y) * w + x] = v;
    }
  }
  std::vector<uint8_t> unknown(alpha.pixels(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
      uint8_t v = 0;
      for (int k = y0; k <= y1 && !v; ++k) v = rowpass[static_cast<size_t>(k) * w + x];
      unknown[static_cast<size_t>(y) * w + x] = v;
    }
  }

  Trimap out(h, w);
  for (size_t j = 0; j < alpha.pixels(); ++j) {
    if (unknown[j]) {
      out.labels[j] = TrimapLabel::Unknown;
    } else {
      out.labels[j] = (alpha.data[j] == 1.f) ? TrimapLabel::Foreground : TrimapLabel::Background;
    }
  }
  return out;
}

Mask unknown_mask(const Trimap& trimap) {
  Mask m(trimap.height, trimap.width);
  for (size_t j = 0; j < trimap.pixels(); ++j) {
    m.data[j] = (trimap.labels[j] == TrimapLabel::Unknown) ? 1 : 0;
  }
  return m;
}

uint8_t trimap_to_byte(TrimapLabel label) {
  switch (label) {
    case TrimapLabel::Background: return 0;
    case TrimapLabel::Unknown: return 128;
    case TrimapLabel::Foreground: return 255;
  }
  return 0;
}

TrimapLabel trimap_from_byte(uint8_t value) {
  switch (value) {
    case 0: return TrimapLabel::Background;
    case 128: return TrimapLabel::Unknown;
    case 255: return TrimapLabel::Foreground;
  }
  throw IoError("trimap: invalid pixel value " + std::to_string(int(value)) +
                ", expected one of {0, 128, 255}");
}

void check_same_size(const MattingSample& s) {
  const int h = s.image.height, w = s.image.width;
  auto fail = [&](const char* what, int oh, int ow) {
    throw ShapeError(std::string("sample: image ") + shape_str(h, w) + " vs " + what + " " +
                     shape_str(oh, ow));
  };
  if (s.trimap.height != h || s.trimap.width != w) fail("trimap", s.trimap.height, s.trimap.width);
  if (s.ground_truth && (s.ground_truth->height != h || s.ground_truth->width != w))
    fail("alpha", s.ground_truth->height, s.ground_truth->width);
  if (s.foreground && (s.foreground->height != h || s.foreground->width != w))
    fail("foreground", s.foreground->height, s.foreground->width);
  if (s.background && (s.background->height != h || s.background->width != w))
    fail("background", s.background->height, s.background->width);
}

}  // namespace i2gfp
