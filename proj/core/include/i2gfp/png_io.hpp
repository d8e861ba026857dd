#pragma once

#include <string>

#include "i2gfp/image.hpp"

namespace i2gfp {

// 8-bit PNG loaders. Values map v -> v/255. 16-bit inputs are reduced to
// 8-bit, palettes expanded; an alpha channel on RGB inputs is stripped.
RgbImage load_rgb_png(const std::string& path);

// Requires a single-channel (grayscale) PNG.
AlphaMatte load_alpha_png(const std::string& path);

// Single-channel PNG restricted to pixel values {0, 128, 255}.
Trimap load_trimap_png(const std::string& path);

void save_rgb_png(const std::string& path, const RgbImage& img);
void save_alpha_png(const std::string& path, const AlphaMatte& alpha);
void save_trimap_png(const std::string& path, const Trimap& trimap);

}  // namespace i2gfp
