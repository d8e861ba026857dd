#include "i2gfp/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "i2gfp/image_ops.hpp"
#include "i2gfp/png_io.hpp"
#include "i2gfp/rng.hpp"

namespace fs = std::filesystem;

namespace i2gfp {

void DatasetSpec::validate() const {
  if (backgrounds_per_foreground < 1)
    throw ConfigError("dataset: backgrounds_per_foreground must be >= 1");
  if (trimap_radius_min < 0 || trimap_radius_max < trimap_radius_min)
    throw ConfigError("dataset: invalid trimap radius range");
  for (const auto& [label, dir] : {std::pair{"foreground_dir", foreground_dir},
                                   {"alpha_dir", alpha_dir},
                                   {"background_dir", background_dir}}) {
    if (dir.empty() || !fs::is_directory(dir))
      throw ConfigError(std::string("dataset: ") + label + " is not a directory: " + dir);
  }
}

std::string ManifestEntry::to_json_line() const {
  nlohmann::json j{{"name", name}, {"merged", merged}, {"alpha", alpha}, {"fg", fg},
                   {"bg", bg},     {"trimap", trimap}, {"seed", seed}};
  return j.dump();
}

ManifestEntry ManifestEntry::from_json_line(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  ManifestEntry e;
  e.name = j.at("name").get<std::string>();
  e.merged = j.at("merged").get<std::string>();
  e.alpha = j.at("alpha").get<std::string>();
  e.fg = j.at("fg").get<std::string>();
  e.bg = j.at("bg").get<std::string>();
  e.trimap = j.at("trimap").get<std::string>();
  e.seed = j.at("seed").get<uint64_t>();
  return e;
}

namespace {

std::vector<std::pair<std::string, std::string>> list_pngs(const std::string& dir) {
  std::vector<std::pair<std::string, std::string>> out;  // stem -> path
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() != ".png") continue;
    out.emplace_back(entry.path().stem().string(), entry.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Scale up to cover the target, then center-crop. Keeps aspect ratio and
// stays deterministic without consuming randomness.
RgbImage fit_background(const RgbImage& bg, int h, int w) {
  const double scale = std::max(static_cast<double>(h) / bg.height,
                                static_cast<double>(w) / bg.width);
  RgbImage scaled = bg;
  if (scale > 1.0 || bg.height != h || bg.width != w) {
    const int sh = std::max(h, static_cast<int>(std::ceil(bg.height * scale)));
    const int sw = std::max(w, static_cast<int>(std::ceil(bg.width * scale)));
    scaled = resize_bilinear(bg, sh, sw);
  }
  const int y0 = (scaled.height - h) / 2;
  const int x0 = (scaled.width - w) / 2;
  return crop(scaled, y0, x0, h, w);
}

}  // namespace

std::vector<ManifestEntry> synthesize_dataset(const DatasetSpec& spec) {
  spec.validate();

  const auto fgs = list_pngs(spec.foreground_dir);
  const auto alphas = list_pngs(spec.alpha_dir);
  const auto bgs = list_pngs(spec.background_dir);
  if (fgs.empty()) throw ConfigError("dataset: no foreground PNGs in " + spec.foreground_dir);
  if (bgs.empty()) throw ConfigError("dataset: no background PNGs in " + spec.background_dir);
  if (static_cast<int>(bgs.size()) < spec.backgrounds_per_foreground)
    throw ConfigError("dataset: " + std::to_string(bgs.size()) + " backgrounds < " +
                      std::to_string(spec.backgrounds_per_foreground) + " per foreground");

  std::map<std::string, std::string> alpha_by_stem(alphas.begin(), alphas.end());

  const fs::path root(spec.output_dir);
  for (const char* sub : {"fg", "alpha", "bg", "merged", "trimap"})
    fs::create_directories(root / sub);

  std::vector<ManifestEntry> manifest;
  for (size_t fi = 0; fi < fgs.size(); ++fi) {
    const auto& [stem, fg_path] = fgs[fi];
    const auto alpha_it = alpha_by_stem.find(stem);
    if (alpha_it == alpha_by_stem.end())
      throw ConfigError("dataset: no alpha matte for foreground stem '" + stem + "'");

    const RgbImage fg = load_rgb_png(fg_path);
    const AlphaMatte alpha = load_alpha_png(alpha_it->second);
    if (alpha.height != fg.height || alpha.width != fg.width)
      throw ShapeError("dataset: foreground/alpha size mismatch for stem '" + stem + "'");

    save_rgb_png((root / "fg" / (stem + ".png")).string(), fg);
    save_alpha_png((root / "alpha" / (stem + ".png")).string(), alpha);

    // Distinct backgrounds per foreground, chosen by a seeded shuffle.
    std::mt19937_64 pick(sub_seed(spec.seed, fi));
    std::vector<size_t> order(bgs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), pick);

    for (int bi = 0; bi < spec.backgrounds_per_foreground; ++bi) {
      const auto& [bg_stem, bg_path] = bgs[order[static_cast<size_t>(bi)]];
      const RgbImage bg_raw = load_rgb_png(bg_path);
      const RgbImage bg = fit_background(bg_raw, fg.height, fg.width);
      const RgbImage merged = composite(fg, bg, alpha);

      const uint64_t sample_seed =
          sub_seed(spec.seed, fi * static_cast<uint64_t>(spec.backgrounds_per_foreground) +
                                  static_cast<uint64_t>(bi));
      std::mt19937_64 srng(sample_seed);
      const int radius = std::uniform_int_distribution<int>(spec.trimap_radius_min,
                                                            spec.trimap_radius_max)(srng);
      const Trimap trimap = generate_trimap(alpha, radius);

      ManifestEntry e;
      e.name = stem + "__" + bg_stem;
      e.merged = "merged/" + e.name + ".png";
      e.alpha = "alpha/" + stem + ".png";
      e.fg = "fg/" + stem + ".png";
      e.bg = "bg/" + e.name + ".png";
      e.trimap = "trimap/" + e.name + ".png";
      e.seed = sample_seed;

      save_rgb_png((root / e.merged).string(), merged);
      save_rgb_png((root / e.bg).string(), bg);
      save_trimap_png((root / e.trimap).string(), trimap);
      manifest.push_back(std::move(e));
    }
  }

  std::ofstream out(root / "manifest.jsonl", std::ios::binary);
  if (!out) throw IoError("dataset: cannot write manifest under " + spec.output_dir);
  for (const auto& e : manifest) out << e.to_json_line() << "\n";
  return manifest;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path);
  std::vector<ManifestEntry> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(ManifestEntry::from_json_line(line));
    } catch (const std::exception& e) {
      throw IoError("manifest " + path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void AugmentationConfig::validate() const {
  if (crop_sizes.empty()) throw ConfigError("augment: crop_sizes must be non-empty");
  for (int s : crop_sizes)
    if (s < 32) throw ConfigError("augment: crop sizes must be >= 32");
  if (train_size < 32) throw ConfigError("augment: train_size must be >= 32");
  if (flip_probability < 0.0 || flip_probability > 1.0)
    throw ConfigError("augment: flip_probability outside [0,1]");
  if (scale_min <= 0.0 || scale_max < scale_min) throw ConfigError("augment: bad scale range");
}

MattingSample crop_unknown_centered(const MattingSample& sample, const AugmentationConfig& cfg,
                                    std::mt19937_64& rng) {
  cfg.validate();
  check_same_size(sample);

  std::vector<size_t> unknown;
  for (size_t j = 0; j < sample.trimap.labels.size(); ++j)
    if (sample.trimap.labels[j] == TrimapLabel::Unknown) unknown.push_back(j);
  if (unknown.empty()) throw Error("no transition region");

  const size_t size_ix =
      std::uniform_int_distribution<size_t>(0, cfg.crop_sizes.size() - 1)(rng);
  const int crop_size = cfg.crop_sizes[size_ix];
  const size_t center_ix = std::uniform_int_distribution<size_t>(0, unknown.size() - 1)(rng);

  MattingSample s = sample;
  int h = s.image.height, w = s.image.width;
  int cy = static_cast<int>(unknown[center_ix] / static_cast<size_t>(w));
  int cx = static_cast<int>(unknown[center_ix] % static_cast<size_t>(w));

  if (h < crop_size || w < crop_size) {
    const int ph = std::max(h, crop_size), pw = std::max(w, crop_size);
    s.image = reflect_pad(s.image, ph, pw);
    s.trimap = reflect_pad(s.trimap, ph, pw);
    if (s.ground_truth) s.ground_truth = reflect_pad(*s.ground_truth, ph, pw);
    if (s.foreground) s.foreground = reflect_pad(*s.foreground, ph, pw);
    if (s.background) s.background = reflect_pad(*s.background, ph, pw);
    h = ph;
    w = pw;
  }

  const int y0 = std::clamp(cy - crop_size / 2, 0, h - crop_size);
  const int x0 = std::clamp(cx - crop_size / 2, 0, w - crop_size);

  MattingSample out;
  out.image = crop(s.image, y0, x0, crop_size, crop_size);
  out.trimap = crop(s.trimap, y0, x0, crop_size, crop_size);
  if (s.ground_truth) out.ground_truth = crop(*s.ground_truth, y0, x0, crop_size, crop_size);
  if (s.foreground) out.foreground = crop(*s.foreground, y0, x0, crop_size, crop_size);
  if (s.background) out.background = crop(*s.background, y0, x0, crop_size, crop_size);
  return out;
}

MattingSample augment(const MattingSample& sample, const AugmentationConfig& cfg,
                      std::mt19937_64& rng) {
  cfg.validate();
  check_same_size(sample);

  // All draws happen unconditionally and in a fixed order; identity
  // parameters then skip the resampling work.
  const bool flip = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.flip_probability;
  const double hue = std::uniform_real_distribution<double>(-cfg.hue_delta, cfg.hue_delta)(rng);
  const double sat =
      std::uniform_real_distribution<double>(1.0 - cfg.saturation_delta,
                                             1.0 + cfg.saturation_delta)(rng);
  const double val =
      std::uniform_real_distribution<double>(1.0 - cfg.brightness_delta,
                                             1.0 + cfg.brightness_delta)(rng);
  AffineParams affine;
  affine.rotate_deg =
      std::uniform_real_distribution<double>(-cfg.rotation_deg, cfg.rotation_deg)(rng);
  const double tmax = cfg.translate_frac * sample.image.width;
  affine.translate_x = std::uniform_real_distribution<double>(-tmax, tmax)(rng);
  affine.translate_y = std::uniform_real_distribution<double>(-tmax, tmax)(rng);
  affine.scale = std::uniform_real_distribution<double>(cfg.scale_min, cfg.scale_max)(rng);

  MattingSample out = sample;
  if (flip) {
    out.image = flip_horizontal(out.image);
    out.trimap = flip_horizontal(out.trimap);
    if (out.ground_truth) out.ground_truth = flip_horizontal(*out.ground_truth);
    if (out.foreground) out.foreground = flip_horizontal(*out.foreground);
    if (out.background) out.background = flip_horizontal(*out.background);
  }

  out.image = jitter_colors(out.image, hue, sat, val);

  if (!affine.is_identity()) {
    out.image = affine_bilinear(out.image, affine);
    out.trimap = affine_nearest(out.trimap, affine);
    if (out.ground_truth) out.ground_truth = affine_bilinear(*out.ground_truth, affine);
    if (out.foreground) out.foreground = affine_bilinear(*out.foreground, affine);
    if (out.background) out.background = affine_bilinear(*out.background, affine);
  }

  const int ts = cfg.train_size;
  out.image = resize_bilinear(out.image, ts, ts);
  out.trimap = resize_nearest(out.trimap, ts, ts);
  if (out.ground_truth) out.ground_truth = resize_bilinear(*out.ground_truth, ts, ts);
  if (out.foreground) out.foreground = resize_bilinear(*out.foreground, ts, ts);
  if (out.background) out.background = resize_bilinear(*out.background, ts, ts);
  return out;
}

}  // namespace i2gfp
