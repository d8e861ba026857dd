#pragma once

#include "i2gfp/image.hpp"

namespace i2gfp {

// Bilinear resampling with half-pixel centers; clamped border taps.
// Same-size calls are exact identities.
RgbImage resize_bilinear(const RgbImage& in, int oh, int ow);
AlphaMatte resize_bilinear(const AlphaMatte& in, int oh, int ow);

// Nearest-neighbor; the only resampling that preserves the 3-label set.
Trimap resize_nearest(const Trimap& in, int oh, int ow);

RgbImage flip_horizontal(const RgbImage& in);
AlphaMatte flip_horizontal(const AlphaMatte& in);
Trimap flip_horizontal(const Trimap& in);

RgbImage crop(const RgbImage& in, int y0, int x0, int h, int w);
AlphaMatte crop(const AlphaMatte& in, int y0, int x0, int h, int w);
Trimap crop(const Trimap& in, int y0, int x0, int h, int w);

// Pads right/bottom by mirroring (edge pixel not repeated).
RgbImage reflect_pad(const RgbImage& in, int oh, int ow);
AlphaMatte reflect_pad(const AlphaMatte& in, int oh, int ow);
Trimap reflect_pad(const Trimap& in, int oh, int ow);

// Rotation (degrees) about the image center, isotropic scale, then
// translation in pixels. Inverse-mapped; out-of-range taps clamp to the edge.
struct AffineParams {
  double rotate_deg = 0.0;
  double scale = 1.0;
  double translate_x = 0.0;
  double translate_y = 0.0;

  bool is_identity() const {
    return rotate_deg == 0.0 && scale == 1.0 && translate_x == 0.0 && translate_y == 0.0;
  }
};

RgbImage affine_bilinear(const RgbImage& in, const AffineParams& p);
AlphaMatte affine_bilinear(const AlphaMatte& in, const AffineParams& p);
Trimap affine_nearest(const Trimap& in, const AffineParams& p);

// hue_shift in fractions of a full circle; saturation/brightness are
// multiplicative factors. Output clamped to [0,1].
RgbImage jitter_colors(const RgbImage& in, double hue_shift, double sat_factor,
                       double val_factor);

}  // namespace i2gfp
