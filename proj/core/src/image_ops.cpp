#include "i2gfp/image_ops.hpp"

#include <algorithm>
#include <cmath>

namespace i2gfp {

namespace {

constexpr double kPi = 3.14159265358979323846;

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

struct BilinearTap {
  int i0, i1;
  float w1;  // weight of i1; i0 gets 1-w1
};

BilinearTap tap_for(int dst, int in_size, double scale) {
  double src = (dst + 0.5) * scale - 0.5;
  double fl = std::floor(src);
  BilinearTap t;
  t.i0 = clampi(static_cast<int>(fl), 0, in_size - 1);
  t.i1 = clampi(static_cast<int>(fl) + 1, 0, in_size - 1);
  t.w1 = static_cast<float>(src - fl);
  if (src <= 0.0) t.w1 = 0.f;
  return t;
}

int nearest_src(int dst, int in_size, double scale) {
  int src = static_cast<int>(std::floor((dst + 0.5) * scale));
  return clampi(src, 0, in_size - 1);
}

// Mirror index into [0, n): n..2n-1 maps back to n-2..-1 style reflection
// without repeating the edge pixel.
int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i %= period;
  if (i < 0) i += period;
  return (i < n) ? i : period - i;
}

}  // namespace

RgbImage resize_bilinear(const RgbImage& in, int oh, int ow) {
  if (oh == in.height && ow == in.width) return in;
  RgbImage out(oh, ow);
  const double sy = static_cast<double>(in.height) / oh;
  const double sx = static_cast<double>(in.width) / ow;
  for (int y = 0; y < oh; ++y) {
    const BilinearTap ty = tap_for(y, in.height, sy);
    for (int x = 0; x < ow; ++x) {
      const BilinearTap tx = tap_for(x, in.width, sx);
      for (int c = 0; c < 3; ++c) {
        const float top = (1.f - tx.w1) * in.at(ty.i0, tx.i0, c) + tx.w1 * in.at(ty.i0, tx.i1, c);
        const float bot = (1.f - tx.w1) * in.at(ty.i1, tx.i0, c) + tx.w1 * in.at(ty.i1, tx.i1, c);
        out.at(y, x, c) = (1.f - ty.w1) * top + ty.w1 * bot;
      }
    }
  }
  return out;
}

AlphaMatte resize_bilinear(const AlphaMatte& in, int oh, int ow) {
  if (oh == in.height && ow == in.width) return in;
  AlphaMatte out(oh, ow);
  const double sy = static_cast<double>(in.height) / oh;
  const double sx = static_cast<double>(in.width) / ow;
  for (int y = 0; y < oh; ++y) {
    const BilinearTap ty = tap_for(y, in.height, sy);
    for (int x = 0; x < ow; ++x) {
      const BilinearTap tx = tap_for(x, in.width, sx);
      const float top = (1.f - tx.w1) * in.at(ty.i0, tx.i0) + tx.w1 * in.at(ty.i0, tx.i1);
      const float bot = (1.f - tx.w1) * in.at(ty.i1, tx.i0) + tx.w1 * in.at(ty.i1, tx.i1);
      out.at(y, x) = (1.f - ty.w1) * top + ty.w1 * bot;
    }
  }
  return out;
}

Trimap resize_nearest(const Trimap& in, int oh, int ow) {
  if (oh == in.height && ow == in.width) return in;
  Trimap out(oh, ow);
  const double sy = static_cast<double>(in.height) / oh;
  const double sx = static_cast<double>(in.width) / ow;
  for (int y = 0; y < oh; ++y) {
    const int iy = nearest_src(y, in.height, sy);
    for (int x = 0; x < ow; ++x) {
      out.at(y, x) = in.at(iy, nearest_src(x, in.width, sx));
    }
  }
  return out;
}

RgbImage flip_horizontal(const RgbImage& in) {
  RgbImage out(in.height, in.width);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = in.at(y, in.width - 1 - x, c);
  return out;
}

AlphaMatte flip_horizontal(const AlphaMatte& in) {
  AlphaMatte out(in.height, in.width);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) out.at(y, x) = in.at(y, in.width - 1 - x);
  return out;
}

Trimap flip_horizontal(const Trimap& in) {
  Trimap out(in.height, in.width);
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) out.at(y, x) = in.at(y, in.width - 1 - x);
  return out;
}

namespace {

template <typename Img>
Img crop_impl(const Img& in, int y0, int x0, int h, int w) {
  if (y0 < 0 || x0 < 0 || y0 + h > in.height || x0 + w > in.width)
    throw ShapeError("crop window out of bounds");
  Img out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(y, x) = in.at(y0 + y, x0 + x);
  return out;
}

}  // namespace

RgbImage crop(const RgbImage& in, int y0, int x0, int h, int w) {
  if (y0 < 0 || x0 < 0 || y0 + h > in.height || x0 + w > in.width)
    throw ShapeError("crop window out of bounds");
  RgbImage out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = in.at(y0 + y, x0 + x, c);
  return out;
}

AlphaMatte crop(const AlphaMatte& in, int y0, int x0, int h, int w) {
  return crop_impl(in, y0, x0, h, w);
}

Trimap crop(const Trimap& in, int y0, int x0, int h, int w) {
  return crop_impl(in, y0, x0, h, w);
}

RgbImage reflect_pad(const RgbImage& in, int oh, int ow) {
  if (oh == in.height && ow == in.width) return in;
  RgbImage out(oh, ow);
  for (int y = 0; y < oh; ++y) {
    const int iy = reflect_index(y, in.height);
    for (int x = 0; x < ow; ++x) {
      const int ix = reflect_index(x, in.width);
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = in.at(iy, ix, c);
    }
  }
  return out;
}

AlphaMatte reflect_pad(const AlphaMatte& in, int oh, int ow) {
  if (oh == in.height && ow == in.width) return in;
  AlphaMatte out(oh, ow);
  for (int y = 0; y < oh; ++y) {
    const int iy = reflect_index(y, in.height);
    for (int x = 0; x < ow; ++x) out.at(y, x) = in.at(iy, reflect_index(x, in.width));
  }
  return out;
}

Trimap reflect_pad(const Trimap& in, int oh, int ow) {
  if (oh == in.height && ow == in.width) return in;
  Trimap out(oh, ow);
  for (int y = 0; y < oh; ++y) {
    const int iy = reflect_index(y, in.height);
    for (int x = 0; x < ow; ++x) out.at(y, x) = in.at(iy, reflect_index(x, in.width));
  }
  return out;
}

namespace {

// Maps output pixel -> source coordinates for the inverse affine transform.
struct InverseAffine {
  double cy, cx, cos_t, sin_t, inv_scale, tx, ty;

  void source(int y, int x, double& sy, double& sx) const {
    const double dy = y - cy - ty;
    const double dx = x - cx - tx;
    sx = cx + inv_scale * (cos_t * dx + sin_t * dy);
    sy = cy + inv_scale * (-sin_t * dx + cos_t * dy);
  }
};

InverseAffine make_inverse(const AffineParams& p, int h, int w) {
  InverseAffine ia;
  ia.cy = (h - 1) / 2.0;
  ia.cx = (w - 1) / 2.0;
  const double theta = p.rotate_deg * kPi / 180.0;
  ia.cos_t = std::cos(theta);
  ia.sin_t = std::sin(theta);
  ia.inv_scale = 1.0 / p.scale;
  ia.tx = p.translate_x;
  ia.ty = p.translate_y;
  return ia;
}

}  // namespace

RgbImage affine_bilinear(const RgbImage& in, const AffineParams& p) {
  if (p.is_identity()) return in;
  RgbImage out(in.height, in.width);
  const InverseAffine ia = make_inverse(p, in.height, in.width);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      double sy, sx;
      ia.source(y, x, sy, sx);
      sy = std::clamp(sy, 0.0, static_cast<double>(in.height - 1));
      sx = std::clamp(sx, 0.0, static_cast<double>(in.width - 1));
      const int y0 = static_cast<int>(std::floor(sy)), x0 = static_cast<int>(std::floor(sx));
      const int y1 = clampi(y0 + 1, 0, in.height - 1), x1 = clampi(x0 + 1, 0, in.width - 1);
      const float wy = static_cast<float>(sy - y0), wx = static_cast<float>(sx - x0);
      for (int c = 0; c < 3; ++c) {
        const float top = (1.f - wx) * in.at(y0, x0, c) + wx * in.at(y0, x1, c);
        const float bot = (1.f - wx) * in.at(y1, x0, c) + wx * in.at(y1, x1, c);
        out.at(y, x, c) = (1.f - wy) * top + wy * bot;
      }
    }
  }
  return out;
}

AlphaMatte affine_bilinear(const AlphaMatte& in, const AffineParams& p) {
  if (p.is_identity()) return in;
  AlphaMatte out(in.height, in.width);
  const InverseAffine ia = make_inverse(p, in.height, in.width);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      double sy, sx;
      ia.source(y, x, sy, sx);
      sy = std::clamp(sy, 0.0, static_cast<double>(in.height - 1));
      sx = std::clamp(sx, 0.0, static_cast<double>(in.width - 1));
      const int y0 = static_cast<int>(std::floor(sy)), x0 = static_cast<int>(std::floor(sx));
      const int y1 = clampi(y0 + 1, 0, in.height - 1), x1 = clampi(x0 + 1, 0, in.width - 1);
      const float wy = static_cast<float>(sy - y0), wx = static_cast<float>(sx - x0);
      const float top = (1.f - wx) * in.at(y0, x0) + wx * in.at(y0, x1);
      const float bot = (1.f - wx) * in.at(y1, x0) + wx * in.at(y1, x1);
      out.at(y, x) = (1.f - wy) * top + wy * bot;
    }
  }
  return out;
}

Trimap affine_nearest(const Trimap& in, const AffineParams& p) {
  if (p.is_identity()) return in;
  Trimap out(in.height, in.width);
  const InverseAffine ia = make_inverse(p, in.height, in.width);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      double sy, sx;
      ia.source(y, x, sy, sx);
      const int iy = clampi(static_cast<int>(std::lround(sy)), 0, in.height - 1);
      const int ix = clampi(static_cast<int>(std::lround(sx)), 0, in.width - 1);
      out.at(y, x) = in.at(iy, ix);
    }
  }
  return out;
}

namespace {

void rgb_to_hsv(float r, float g, float b, float& h, float& s, float& v) {
  const float mx = std::max({r, g, b});
  const float mn = std::min({r, g, b});
  const float d = mx - mn;
  v = mx;
  s = (mx == 0.f) ? 0.f : d / mx;
  if (d == 0.f) {
    h = 0.f;
  } else if (mx == r) {
    h = (g - b) / d;
    if (h < 0.f) h += 6.f;
  } else if (mx == g) {
    h = (b - r) / d + 2.f;
  } else {
    h = (r - g) / d + 4.f;
  }
  h /= 6.f;
}

void hsv_to_rgb(float h, float s, float v, float& r, float& g, float& b) {
  h -= std::floor(h);
  const float hf = h * 6.f;
  const int i = std::min(5, static_cast<int>(hf));
  const float f = hf - i;
  const float p = v * (1.f - s);
  const float q = v * (1.f - s * f);
  const float t = v * (1.f - s * (1.f - f));
  switch (i) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

}  // namespace

RgbImage jitter_colors(const RgbImage& in, double hue_shift, double sat_factor,
                       double val_factor) {
  if (hue_shift == 0.0 && sat_factor == 1.0 && val_factor == 1.0) return in;
  RgbImage out(in.height, in.width);
  const size_t n = in.pixels();
  for (size_t j = 0; j < n; ++j) {
    float h, s, v;
    rgb_to_hsv(in.data[j * 3], in.data[j * 3 + 1], in.data[j * 3 + 2], h, s, v);
    h += static_cast<float>(hue_shift);
    s = std::clamp(s * static_cast<float>(sat_factor), 0.f, 1.f);
    v = std::clamp(v * static_cast<float>(val_factor), 0.f, 1.f);
    float r, g, b;
    hsv_to_rgb(h, s, v, r, g, b);
    out.data[j * 3] = std::clamp(r, 0.f, 1.f);
    out.data[j * 3 + 1] = std::clamp(g, 0.f, 1.f);
    out.data[j * 3 + 2] = std::clamp(b, 0.f, 1.f);
  }
  return out;
}

}  // namespace i2gfp
