#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "i2gfp/image.hpp"

namespace testutil {

// Unique scratch directory, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("i2gfp_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string str(const std::string& rel = "") const {
    return rel.empty() ? path.string() : (path / rel).string();
  }
};

inline i2gfp::AlphaMatte random_matte(int h, int w, uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<float> uni(0.f, 1.f);
  i2gfp::AlphaMatte a(h, w);
  for (auto& v : a.data) v = uni(eng);
  return a;
}

inline i2gfp::RgbImage random_rgb(int h, int w, uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<float> uni(0.f, 1.f);
  i2gfp::RgbImage img(h, w);
  for (auto& v : img.data) v = uni(eng);
  return img;
}

// True when fn() throws Ex whose message contains needle.
template <typename Ex, typename Fn>
bool throws_with(Fn&& fn, const std::string& needle) {
  try {
    fn();
  } catch (const Ex& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  } catch (...) {
    return false;
  }
  return false;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace testutil
