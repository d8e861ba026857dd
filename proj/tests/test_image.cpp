#include <doctest.h>

#include <random>

#include "i2gfp/image.hpp"
#include "i2gfp/png_io.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace i2gfp;

TEST_SUITE_BEGIN("image");

TEST_CASE("composite is exact at alpha extremes") {
  const RgbImage fg = testutil::random_rgb(9, 7, 11);
  const RgbImage bg = testutil::random_rgb(9, 7, 12);

  AlphaMatte ones(9, 7);
  std::fill(ones.data.begin(), ones.data.end(), 1.f);
  CHECK(composite(fg, bg, ones).data == fg.data);

  AlphaMatte zeros(9, 7);
  CHECK(composite(fg, bg, zeros).data == bg.data);
}

TEST_CASE("composite midpoint blends linearly") {
  RgbImage fg(1, 1), bg(1, 1);
  fg.at(0, 0, 0) = 0.8f; fg.at(0, 0, 1) = 0.2f; fg.at(0, 0, 2) = 0.4f;
  bg.at(0, 0, 0) = 0.0f; bg.at(0, 0, 1) = 0.6f; bg.at(0, 0, 2) = 0.2f;
  AlphaMatte a(1, 1);
  a.at(0, 0) = 0.5f;
  const RgbImage c = composite(fg, bg, a);
  CHECK(c.at(0, 0, 0) == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(c.at(0, 0, 1) == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(c.at(0, 0, 2) == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("composite collapses when foreground equals background") {
  const RgbImage f = testutil::random_rgb(6, 6, 3);
  const AlphaMatte a = testutil::random_matte(6, 6, 4);
  CHECK(composite(f, f, a).data == f.data);
}

TEST_CASE("composite rejects mismatched shapes, naming both") {
  const RgbImage fg = testutil::random_rgb(4, 4, 1);
  const RgbImage bg = testutil::random_rgb(4, 5, 2);
  const AlphaMatte a = testutil::random_matte(4, 4, 3);
  CHECK(testutil::throws_with<ShapeError>([&] { composite(fg, bg, a); }, "4x4"));
  CHECK(testutil::throws_with<ShapeError>([&] { composite(fg, bg, a); }, "4x5"));
}

TEST_CASE("trimap from binary alpha has no unknown pixels") {
  AlphaMatte a(5, 5);
  for (size_t j = 0; j < a.data.size(); ++j) a.data[j] = (j % 3 == 0) ? 1.f : 0.f;
  const Trimap t = generate_trimap(a, 0);
  for (const auto label : t.labels) CHECK(label != TrimapLabel::Unknown);
}

TEST_CASE("single fractional pixel dilates to a 3x3 block") {
  AlphaMatte a(5, 5);
  a.at(2, 2) = 0.5f;
  const Trimap t = generate_trimap(a, 1);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) {
      const bool inside = std::abs(y - 2) <= 1 && std::abs(x - 2) <= 1;
      CHECK(t.at(y, x) == (inside ? TrimapLabel::Unknown : TrimapLabel::Background));
    }
}

TEST_CASE("constant-1 alpha is all foreground") {
  AlphaMatte a(4, 6);
  std::fill(a.data.begin(), a.data.end(), 1.f);
  const Trimap t = generate_trimap(a, 3);
  for (const auto label : t.labels) CHECK(label == TrimapLabel::Foreground);
}

TEST_CASE("trimap dilation matches the brute-force oracle") {
  std::mt19937_64 eng(77);
  std::uniform_real_distribution<float> uni(0.f, 1.f);
  for (int trial = 0; trial < 20; ++trial) {
    AlphaMatte a(11, 13);
    for (auto& v : a.data) {
      const float r = uni(eng);
      v = r < 0.4f ? 0.f : (r > 0.8f ? 1.f : r);
    }
    const int radius = trial % 4;
    std::vector<uint8_t> seed(a.data.size());
    for (size_t j = 0; j < seed.size(); ++j) seed[j] = (a.data[j] > 0.f && a.data[j] < 1.f);
    const auto expect = oracle::dilate(seed, 11, 13, radius);

    const Trimap t = generate_trimap(a, radius);
    for (size_t j = 0; j < seed.size(); ++j) {
      CHECK((t.labels[j] == TrimapLabel::Unknown) == (expect[j] != 0));
      if (!expect[j])
        CHECK(t.labels[j] ==
              (a.data[j] == 1.f ? TrimapLabel::Foreground : TrimapLabel::Background));
    }
  }
}

TEST_CASE("unknown region grows monotonically with radius") {
  const AlphaMatte a = testutil::random_matte(16, 16, 5);
  for (int r = 0; r < 5; ++r) {
    const Mask small = unknown_mask(generate_trimap(a, r));
    const Mask big = unknown_mask(generate_trimap(a, r + 1));
    for (size_t j = 0; j < small.data.size(); ++j)
      if (small.data[j]) CHECK(big.data[j]);
  }
}

TEST_CASE("unknown_mask marks exactly the unknown label") {
  std::mt19937_64 eng(9);
  Trimap t(4, 4);
  for (auto& label : t.labels)
    label = static_cast<TrimapLabel>(std::uniform_int_distribution<int>(0, 2)(eng));
  const Mask m = unknown_mask(t);
  for (size_t j = 0; j < m.data.size(); ++j)
    CHECK((m.data[j] != 0) == (t.labels[j] == TrimapLabel::Unknown));

  Trimap fgonly(3, 3);
  std::fill(fgonly.labels.begin(), fgonly.labels.end(), TrimapLabel::Foreground);
  CHECK(unknown_mask(fgonly).count() == 0);
}

TEST_CASE("trimap byte encoding is {0,128,255} and rejects the rest") {
  CHECK(trimap_from_byte(0) == TrimapLabel::Background);
  CHECK(trimap_from_byte(128) == TrimapLabel::Unknown);
  CHECK(trimap_from_byte(255) == TrimapLabel::Foreground);
  CHECK_THROWS_AS(trimap_from_byte(127), IoError);
  for (const auto label :
       {TrimapLabel::Background, TrimapLabel::Unknown, TrimapLabel::Foreground})
    CHECK(trimap_from_byte(trimap_to_byte(label)) == label);
}

TEST_CASE("png round trips preserve bytes and labels") {
  testutil::TempDir tmp("png");

  RgbImage img(5, 8);
  std::mt19937_64 eng(21);
  for (auto& v : img.data) v = std::uniform_int_distribution<int>(0, 255)(eng) / 255.f;
  save_rgb_png(tmp.str("img.png"), img);
  const RgbImage back = load_rgb_png(tmp.str("img.png"));
  REQUIRE(back.height == 5);
  REQUIRE(back.width == 8);
  CHECK(back.data == img.data);

  AlphaMatte a(6, 4);
  for (auto& v : a.data) v = std::uniform_int_distribution<int>(0, 255)(eng) / 255.f;
  save_alpha_png(tmp.str("a.png"), a);
  CHECK(load_alpha_png(tmp.str("a.png")).data == a.data);

  Trimap t(7, 3);
  for (auto& label : t.labels)
    label = static_cast<TrimapLabel>(std::uniform_int_distribution<int>(0, 2)(eng));
  save_trimap_png(tmp.str("t.png"), t);
  CHECK(load_trimap_png(tmp.str("t.png")).labels == t.labels);
}

TEST_CASE("trimap loader rejects stray gray values") {
  testutil::TempDir tmp("badtri");
  AlphaMatte a(2, 2);
  a.data = {0.f, 0.5f, 77.f / 255.f, 1.f};
  save_alpha_png(tmp.str("bad.png"), a);
  CHECK(testutil::throws_with<IoError>([&] { load_trimap_png(tmp.str("bad.png")); }, "77"));
}

TEST_CASE("missing file raises IoError") {
  CHECK_THROWS_AS(load_rgb_png("/nonexistent/nope.png"), IoError);
}

TEST_SUITE_END();
