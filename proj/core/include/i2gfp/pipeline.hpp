#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "i2gfp/image.hpp"

namespace i2gfp {

struct DatasetSpec {
  std::string foreground_dir;
  std::string alpha_dir;
  std::string background_dir;
  std::string output_dir;
  int backgrounds_per_foreground = 1;
  uint64_t seed = 0;
  int trimap_radius_min = 1;
  int trimap_radius_max = 15;

  void validate() const;
};

struct ManifestEntry {
  std::string name;      // <fg stem>__<bg stem>
  std::string merged;    // paths relative to the dataset root
  std::string alpha;
  std::string fg;
  std::string bg;
  std::string trimap;
  uint64_t seed = 0;     // per-sample sub-seed used during synthesis

  std::string to_json_line() const;
  static ManifestEntry from_json_line(const std::string& line);
};

// Composites every foreground over backgrounds_per_foreground distinct
// backgrounds, writes fg/ alpha/ bg/ merged/ trimap/ under output_dir plus
// manifest.jsonl. Deterministic for a fixed spec.
std::vector<ManifestEntry> synthesize_dataset(const DatasetSpec& spec);

std::vector<ManifestEntry> load_manifest(const std::string& path);

struct AugmentationConfig {
  std::vector<int> crop_sizes{512, 640, 800};
  int train_size = 512;
  double flip_probability = 0.5;
  double hue_delta = 0.1;         // +- fraction of the hue circle
  double saturation_delta = 0.2;  // factor drawn from [1-d, 1+d]
  double brightness_delta = 0.2;
  double rotation_deg = 10.0;
  double translate_frac = 0.05;
  double scale_min = 0.9;
  double scale_max = 1.1;
  uint64_t seed = 0;

  void validate() const;
};

// Square crop with the window centered on a uniformly chosen Unknown pixel
// (clamped inside the frame); samples smaller than the crop are
// reflect-padded first. Throws Error("no transition region") when the
// trimap has no Unknown pixels.
MattingSample crop_unknown_centered(const MattingSample& sample, const AugmentationConfig& cfg,
                                    std::mt19937_64& rng);

// Flip -> color jitter (image only) -> joint affine -> resize to train_size.
// Trimaps resample nearest-neighbor throughout.
MattingSample augment(const MattingSample& sample, const AugmentationConfig& cfg,
                      std::mt19937_64& rng);

}  // namespace i2gfp
