#include <doctest.h>

#include <random>
#include <set>

#include "i2gfp/image_ops.hpp"
#include "i2gfp/pipeline.hpp"
#include "i2gfp/png_io.hpp"
#include "test_support.hpp"

using namespace i2gfp;

namespace {

// fg/alpha/bg trees with soft-edged discs so every sample has a transition
// band.
struct ToyCorpus {
  testutil::TempDir dir{"corpus"};
  DatasetSpec spec;

  ToyCorpus(int n_fg, int n_bg, int size = 40) {
    namespace fs = std::filesystem;
    fs::create_directories(dir.path / "fg");
    fs::create_directories(dir.path / "alpha");
    fs::create_directories(dir.path / "bg");

    for (int i = 0; i < n_fg; ++i) {
      RgbImage fg = testutil::random_rgb(size, size, 100 + i);
      AlphaMatte a(size, size);
      const float cx = size / 2.f + i, cy = size / 2.f;
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
          const float d = std::hypot(x - cx, y - cy);
          a.at(y, x) = std::clamp((size / 4.f - d) / 4.f + 0.5f, 0.f, 1.f);
        }
      const std::string stem = "fg" + std::to_string(i);
      save_rgb_png(dir.str("fg/" + stem + ".png"), fg);
      save_alpha_png(dir.str("alpha/" + stem + ".png"), a);
    }
    for (int i = 0; i < n_bg; ++i) {
      save_rgb_png(dir.str("bg/bg" + std::to_string(i) + ".png"),
                   testutil::random_rgb(48, 56, 200 + i));
    }

    spec.foreground_dir = dir.str("fg");
    spec.alpha_dir = dir.str("alpha");
    spec.background_dir = dir.str("bg");
    spec.output_dir = dir.str("out");
    spec.seed = 7;
  }
};

MattingSample disc_sample(int size, uint64_t seed) {
  AlphaMatte a(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const float d = std::hypot(x - size / 2.f, y - size / 2.f);
      a.at(y, x) = std::clamp((size / 4.f - d) / 4.f + 0.5f, 0.f, 1.f);
    }
  MattingSample s;
  s.foreground = testutil::random_rgb(size, size, seed);
  s.background = testutil::random_rgb(size, size, seed + 1);
  s.ground_truth = a;
  s.image = composite(*s.foreground, *s.background, a);
  s.trimap = generate_trimap(a, 2);
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("synthesis writes fg x bg samples and a manifest") {
  ToyCorpus corpus(2, 4);
  corpus.spec.backgrounds_per_foreground = 3;
  const auto manifest = synthesize_dataset(corpus.spec);
  CHECK(manifest.size() == 6);

  const auto loaded = load_manifest(corpus.dir.str("out/manifest.jsonl"));
  REQUIRE(loaded.size() == 6);
  for (const auto& e : loaded) {
    const RgbImage merged = load_rgb_png(corpus.dir.str("out/" + e.merged));
    const AlphaMatte alpha = load_alpha_png(corpus.dir.str("out/" + e.alpha));
    const Trimap trimap = load_trimap_png(corpus.dir.str("out/" + e.trimap));
    CHECK(merged.height == alpha.height);
    CHECK(trimap.height == alpha.height);
    CHECK(unknown_mask(trimap).count() > 0);
  }
}

TEST_CASE("backgrounds are distinct per foreground") {
  ToyCorpus corpus(1, 5);
  corpus.spec.backgrounds_per_foreground = 5;
  const auto manifest = synthesize_dataset(corpus.spec);
  std::set<std::string> bgs;
  for (const auto& e : manifest) bgs.insert(e.bg);
  CHECK(bgs.size() == 5);
}

TEST_CASE("same seed twice gives byte-identical manifests") {
  ToyCorpus corpus(2, 3);
  corpus.spec.backgrounds_per_foreground = 2;

  corpus.spec.output_dir = corpus.dir.str("out_a");
  synthesize_dataset(corpus.spec);
  corpus.spec.output_dir = corpus.dir.str("out_b");
  synthesize_dataset(corpus.spec);

  const auto a = testutil::read_file(corpus.dir.str("out_a/manifest.jsonl"));
  const auto b = testutil::read_file(corpus.dir.str("out_b/manifest.jsonl"));
  REQUIRE(!a.empty());
  CHECK(a == b);
  CHECK(testutil::read_file(corpus.dir.str("out_a/merged/fg0__bg0.png")) ==
        testutil::read_file(corpus.dir.str("out_b/merged/fg0__bg0.png")));
}

TEST_CASE("missing alpha is reported with the stem") {
  ToyCorpus corpus(2, 2);
  std::filesystem::remove(corpus.dir.path / "alpha" / "fg1.png");
  CHECK(testutil::throws_with<ConfigError>([&] { synthesize_dataset(corpus.spec); }, "fg1"));
}

TEST_CASE("full-frame crop of an exact-size image is the identity") {
  MattingSample s = disc_sample(64, 5);
  AugmentationConfig cfg;
  cfg.crop_sizes = {64};
  cfg.train_size = 64;
  std::mt19937_64 rng(1);
  const MattingSample out = crop_unknown_centered(s, cfg, rng);
  CHECK(out.image.data == s.image.data);
  CHECK(out.trimap.labels == s.trimap.labels);
}

TEST_CASE("crop keeps the chosen unknown pixel inside the window") {
  // Single unknown pixel far from center; every valid window must hold it.
  AlphaMatte a(96, 96);
  a.at(70, 70) = 0.5f;
  MattingSample s;
  s.image = testutil::random_rgb(96, 96, 8);
  s.ground_truth = a;
  s.trimap = generate_trimap(a, 0);

  AugmentationConfig cfg;
  cfg.crop_sizes = {48};
  cfg.train_size = 48;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const MattingSample out = crop_unknown_centered(s, cfg, rng);
    size_t unknown = 0;
    for (const auto label : out.trimap.labels)
      if (label == TrimapLabel::Unknown) ++unknown;
    CHECK(unknown == 1);
  }
}

TEST_CASE("all-unknown trimap still yields an in-bounds window") {
  AlphaMatte a(128, 128);
  std::fill(a.data.begin(), a.data.end(), 0.5f);
  MattingSample s;
  s.image = testutil::random_rgb(128, 128, 9);
  s.ground_truth = a;
  s.trimap = generate_trimap(a, 0);

  AugmentationConfig cfg;
  cfg.crop_sizes = {64};
  cfg.train_size = 64;
  std::mt19937_64 rng(4);
  const MattingSample out = crop_unknown_centered(s, cfg, rng);
  CHECK(out.image.height == 64);
  CHECK(unknown_mask(out.trimap).count() == 64u * 64u);
}

TEST_CASE("crop without a transition region is rejected") {
  AlphaMatte a(40, 40);
  std::fill(a.data.begin(), a.data.end(), 1.f);
  MattingSample s;
  s.image = testutil::random_rgb(40, 40, 10);
  s.ground_truth = a;
  s.trimap = generate_trimap(a, 3);

  AugmentationConfig cfg;
  cfg.crop_sizes = {32};
  cfg.train_size = 32;
  std::mt19937_64 rng(5);
  CHECK(testutil::throws_with<Error>([&] { crop_unknown_centered(s, cfg, rng); },
                                     "no transition region"));
}

TEST_CASE("undersized samples are reflect-padded before cropping") {
  MattingSample s = disc_sample(40, 6);
  AugmentationConfig cfg;
  cfg.crop_sizes = {64};
  cfg.train_size = 64;
  std::mt19937_64 rng(6);
  const MattingSample out = crop_unknown_centered(s, cfg, rng);
  CHECK(out.image.height == 64);
  CHECK(out.image.width == 64);
}

TEST_CASE("identity augmentation is exact") {
  MattingSample s = disc_sample(64, 7);
  AugmentationConfig cfg;
  cfg.crop_sizes = {64};
  cfg.train_size = 64;
  cfg.flip_probability = 0.0;
  cfg.hue_delta = 0.0;
  cfg.saturation_delta = 0.0;
  cfg.brightness_delta = 0.0;
  cfg.rotation_deg = 0.0;
  cfg.translate_frac = 0.0;
  cfg.scale_min = cfg.scale_max = 1.0;

  std::mt19937_64 rng(7);
  const MattingSample out = augment(s, cfg, rng);
  CHECK(out.image.data == s.image.data);
  CHECK(out.trimap.labels == s.trimap.labels);
  CHECK(out.ground_truth->data == s.ground_truth->data);
}

TEST_CASE("horizontal flip is an involution") {
  const MattingSample s = disc_sample(48, 8);
  CHECK(flip_horizontal(flip_horizontal(s.image)).data == s.image.data);
  CHECK(flip_horizontal(flip_horizontal(s.trimap)).labels == s.trimap.labels);
}

TEST_CASE("resize preserves constant mattes") {
  AlphaMatte a(128, 128);
  std::fill(a.data.begin(), a.data.end(), 0.5f);
  const AlphaMatte small = resize_bilinear(a, 64, 64);
  for (const float v : small.data) CHECK(v == doctest::Approx(0.5f).epsilon(1e-6));
}

TEST_CASE("augmented members stay the same size") {
  MattingSample s = disc_sample(80, 9);
  AugmentationConfig cfg;
  cfg.crop_sizes = {48, 64};
  cfg.train_size = 48;
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 6; ++trial) {
    const MattingSample c = crop_unknown_centered(s, cfg, rng);
    const MattingSample out = augment(c, cfg, rng);
    CHECK(out.image.height == 48);
    CHECK(out.trimap.height == 48);
    CHECK(out.ground_truth->height == 48);
    CHECK(out.foreground->height == 48);
    CHECK(out.background->height == 48);
    for (const float v : out.ground_truth->data) {
      CHECK(v >= 0.f);
      CHECK(v <= 1.f);
    }
  }
}

TEST_CASE("label-preserving transforms commute with mask extraction") {
  const MattingSample s = disc_sample(32, 10);
  const Mask before = unknown_mask(s.trimap);

  // Flip.
  const Mask flipped_mask = unknown_mask(flip_horizontal(s.trimap));
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) CHECK(flipped_mask.at(y, x) == before.at(y, 31 - x));

  // Nearest resize: mask(resize(trimap)) == resize-as-labels of mask.
  const Trimap half = resize_nearest(s.trimap, 16, 16);
  const Mask half_mask = unknown_mask(half);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      const int sy = static_cast<int>((y + 0.5) * 2.0);
      const int sx = static_cast<int>((x + 0.5) * 2.0);
      CHECK(half_mask.at(y, x) == before.at(sy, sx));
    }
}

TEST_CASE("augmentation is deterministic for a fixed seed") {
  const MattingSample s = disc_sample(64, 11);
  AugmentationConfig cfg;
  cfg.crop_sizes = {48};
  cfg.train_size = 48;

  auto run = [&] {
    std::mt19937_64 rng(42);
    return augment(crop_unknown_centered(s, cfg, rng), cfg, rng);
  };
  const MattingSample a = run(), b = run();
  CHECK(a.image.data == b.image.data);
  CHECK(a.trimap.labels == b.trimap.labels);
  CHECK(a.ground_truth->data == b.ground_truth->data);
}

TEST_SUITE_END();
