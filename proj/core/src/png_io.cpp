#include "i2gfp/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

namespace i2gfp {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

// Decodes to 8-bit rows; channels is 1 (gray) or 3 (rgb).
void read_png_8bit(const std::string& path, int want_channels, int& height, int& width,
                   std::vector<uint8_t>& out) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path);

  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
    throw IoError("not a PNG file: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng init failed");
  }
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed to decode " + path);
  }

  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);

  if (want_channels == 3) {
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
      png_set_gray_to_rgb(png);
  } else if (want_channels == 1) {
    if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_GRAY_ALPHA) {
      png_destroy_read_struct(&png, &info, nullptr);
      throw IoError("expected single-channel PNG: " + path);
    }
  }

  png_read_update_info(png, info);
  height = static_cast<int>(png_get_image_height(png, info));
  width = static_cast<int>(png_get_image_width(png, info));
  const int channels = png_get_channels(png, info);
  if (channels != want_channels) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("unexpected channel count in " + path);
  }

  out.assign(static_cast<size_t>(height) * width * channels, 0);
  row_ptrs.resize(height);
  for (int y = 0; y < height; ++y)
    row_ptrs[y] = out.data() + static_cast<size_t>(y) * width * channels;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
}

void write_png_8bit(const std::string& path, int height, int width, int channels,
                    const std::vector<uint8_t>& bytes) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode " + path);
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_bytep> row_ptrs(height);
  for (int y = 0; y < height; ++y)
    row_ptrs[y] = const_cast<png_bytep>(bytes.data() + static_cast<size_t>(y) * width * channels);
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

uint8_t to_byte(float v) {
  float scaled = v * 255.f + 0.5f;
  if (scaled < 0.f) scaled = 0.f;
  if (scaled > 255.f) scaled = 255.f;
  return static_cast<uint8_t>(scaled);
}

}  // namespace

RgbImage load_rgb_png(const std::string& path) {
  int h = 0, w = 0;
  std::vector<uint8_t> bytes;
  read_png_8bit(path, 3, h, w, bytes);
  RgbImage img(h, w);
  for (size_t i = 0; i < bytes.size(); ++i) img.data[i] = bytes[i] / 255.f;
  return img;
}

AlphaMatte load_alpha_png(const std::string& path) {
  int h = 0, w = 0;
  std::vector<uint8_t> bytes;
  read_png_8bit(path, 1, h, w, bytes);
  AlphaMatte a(h, w);
  for (size_t i = 0; i < bytes.size(); ++i) a.data[i] = bytes[i] / 255.f;
  return a;
}

Trimap load_trimap_png(const std::string& path) {
  int h = 0, w = 0;
  std::vector<uint8_t> bytes;
  read_png_8bit(path, 1, h, w, bytes);
  Trimap t(h, w);
  for (size_t i = 0; i < bytes.size(); ++i) {
    try {
      t.labels[i] = trimap_from_byte(bytes[i]);
    } catch (const IoError& e) {
      throw IoError(std::string(e.what()) + " in " + path);
    }
  }
  return t;
}

void save_rgb_png(const std::string& path, const RgbImage& img) {
  std::vector<uint8_t> bytes(img.data.size());
  for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(img.data[i]);
  write_png_8bit(path, img.height, img.width, 3, bytes);
}

void save_alpha_png(const std::string& path, const AlphaMatte& alpha) {
  std::vector<uint8_t> bytes(alpha.data.size());
  for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(alpha.data[i]);
  write_png_8bit(path, alpha.height, alpha.width, 1, bytes);
}

void save_trimap_png(const std::string& path, const Trimap& trimap) {
  std::vector<uint8_t> bytes(trimap.labels.size());
  for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = trimap_to_byte(trimap.labels[i]);
  write_png_8bit(path, trimap.height, trimap.width, 1, bytes);
}

}  // namespace i2gfp
