#include "i2gfp/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace i2gfp {

namespace {

constexpr std::array<int, 5> kConvsPerBlock{2, 2, 3, 3, 3};

}  // namespace

int ModelConfig::stage_channels(int stage) const {
  return base_channels[static_cast<size_t>(stage - 1)] / width_divisor;
}

int ModelConfig::decoder_channels(int stage) const {
  return std::max(stage_channels(stage) / 2, shrink_channels);
}

int ModelConfig::head_channels() const {
  return std::max(stage_channels(1) / 2, shrink_channels);
}

std::pair<int, int> ModelConfig::gfp_kernels() const {
  const int k1 = gfp_kernel1 > 0 ? gfp_kernel1 : input_size / 2 - 1;
  const int k2 = gfp_kernel2 > 0 ? gfp_kernel2 : input_size / 4 - 1;
  return {k1, k2};
}

int ModelConfig::head_input_channels() const {
  return stage_channels(1) + decoder_channels(2) + (use_gfp ? gfp_channels : 0);
}

void ModelConfig::validate() const {
  if (input_size < 8 || input_size % 4 != 0)
    throw ConfigError("model: input_size must be a multiple of 4, got " +
                      std::to_string(input_size));
  if (width_divisor < 1) throw ConfigError("model: width_divisor must be >= 1");
  for (int c : base_channels) {
    if (c % width_divisor != 0)
      throw ConfigError("model: width_divisor " + std::to_string(width_divisor) +
                        " does not divide channel width " + std::to_string(c));
  }
  if (shrink_channels < 1) throw ConfigError("model: shrink_channels must be >= 1");
  if (gfp_channels < 1) throw ConfigError("model: gfp_channels must be >= 1");
  const auto [k1, k2] = gfp_kernels();
  if (k1 < 3 || k1 % 2 == 0 || k2 < 3 || k2 % 2 == 0)
    throw ConfigError("model: gfp kernels must be odd and >= 3, got " + std::to_string(k1) +
                      "/" + std::to_string(k2));
}

namespace {

// Single architecture walk shared by the parameter registry and the shape
// manifest so the two can never drift apart.
void walk_shapes(const ModelConfig& cfg,
                 const std::function<void(const std::string&, std::vector<int>)>& visit) {
  auto conv = [&](const std::string& path, int co, int ci, int kh, int kw) {
    visit(path + "/weight", {co, ci, kh, kw});
    visit(path + "/bias", {co});
  };

  int in_ch = 4;
  for (int b = 1; b <= 5; ++b) {
    const int out_ch = cfg.stage_channels(b);
    for (int j = 1; j <= kConvsPerBlock[static_cast<size_t>(b - 1)]; ++j) {
      conv("encoder/block" + std::to_string(b) + "/conv" + std::to_string(j), out_ch, in_ch, 3, 3);
      in_ch = out_ch;
    }
  }

  if (cfg.use_ic) {
    for (int j = 2; j <= 5; ++j)
      conv("decoder/shrink" + std::to_string(j), cfg.shrink_channels, cfg.stage_channels(j), 1, 1);
  }
  conv("decoder/stage5", cfg.decoder_channels(5), cfg.stage_channels(5), 3, 3);
  for (int i = 4; i >= 2; --i) {
    const int up_ch = cfg.decoder_channels(i + 1);
    const int cat_ch = cfg.use_ic ? (6 - i) * cfg.shrink_channels + up_ch
                                  : cfg.stage_channels(i) + up_ch;
    conv("decoder/stage" + std::to_string(i), cfg.decoder_channels(i), cat_ch, 3, 3);
  }

  if (cfg.use_gfp) {
    const auto [k1, k2] = cfg.gfp_kernels();
    const int gc = cfg.gfp_channels;
    conv("gfp/down1", gc, 3, 3, 3);
    conv("gfp/down2", gc, gc, 3, 3);
    const int ks[2] = {k1, k2};
    for (int i = 1; i <= 2; ++i) {
      const std::string base = "gfp/gc" + std::to_string(i);
      const int k = ks[i - 1];
      conv(base + "/row_col/conv1", gc, gc, 1, k);
      conv(base + "/row_col/conv2", gc, gc, k, 1);
      conv(base + "/col_row/conv1", gc, gc, k, 1);
      conv(base + "/col_row/conv2", gc, gc, 1, k);
    }
  }

  const int hc = cfg.head_channels();
  conv("head/conv1", hc, cfg.head_input_channels(), 3, 3);
  conv("head/conv2", hc, hc, 3, 3);
  conv("head/proj", 1, hc, 1, 1);
}

}  // namespace

template <typename T>
I2GFPNetT<T>::I2GFPNetT(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  walk_shapes(cfg_, [this](const std::string& name, std::vector<int> dims) {
    params_.add(name, std::move(dims));
  });
}

template <typename T>
void I2GFPNetT<T>::init(uint64_t seed) {
  std::mt19937_64 eng(seed);
  for (auto& [name, p] : params_) {
    if (name.ends_with("/bias")) {
      p.value.set_zero();
      continue;
    }
    const auto& d = p.value.dims;  // {co, ci, kh, kw}
    const int fan_in = d[1] * d[2] * d[3];
    const bool projection = (d[2] == 1 && d[3] == 1);
    const double stddev = projection ? 0.01 : std::sqrt(2.0 / fan_in);
    std::normal_distribution<double> dist(0.0, stddev);
    for (auto& v : p.value.data) v = static_cast<T>(dist(eng));
  }
  params_.zero_grads();
}

template <typename T>
int I2GFPNetT<T>::conv_block(GraphT<T>& g, int x, const std::string& path, int stride, int pad_y,
                             int pad_x, bool relu_after) {
  ParamT<T>* w = params_.find(path + "/weight");
  ParamT<T>* b = params_.find(path + "/bias");
  if (!w || !b) throw Error("missing parameter " + path);
  const int wn = g.param(*w);
  const int bn = g.param(*b);
  int y = g.conv2d(x, wn, bn, stride, stride, pad_y, pad_x);
  return relu_after ? g.relu(y) : y;
}

template <typename T>
std::array<int, 5> I2GFPNetT<T>::encode(GraphT<T>& g, int input) {
  const auto& v = g.value(input);
  if (v.dims[0] != 4 || v.dims[1] != cfg_.input_size || v.dims[2] != cfg_.input_size)
    throw ShapeError("encode: input " + v.shape_str() + " vs configured size " +
                     std::to_string(cfg_.input_size));

  std::array<int, 5> features{};
  int x = input;
  for (int b = 1; b <= 5; ++b) {
    for (int j = 1; j <= kConvsPerBlock[static_cast<size_t>(b - 1)]; ++j)
      x = conv_block(g, x, "encoder/block" + std::to_string(b) + "/conv" + std::to_string(j), 1, 1,
                     1, true);
    features[static_cast<size_t>(b - 1)] = x;
    if (b <= 2) x = g.maxpool2(x);  // stride-2 pooling only after blocks 1 and 2
  }
  return features;
}

template <typename T>
int I2GFPNetT<T>::decode(GraphT<T>& g, const std::array<int, 5>& enc, ForwardTrace* trace) {
  auto enc_of = [&](int stage) { return enc[static_cast<size_t>(stage - 1)]; };

  // Shared 1x1 shrink per encoder stage; consumers resize to their own grid.
  std::array<int, 6> shrunk{-1, -1, -1, -1, -1, -1};
  if (cfg_.use_ic) {
    for (int j = 2; j <= 5; ++j)
      shrunk[static_cast<size_t>(j)] =
          conv_block(g, enc_of(j), "decoder/shrink" + std::to_string(j), 1, 0, 0, false);
  }

  int dec = conv_block(g, enc_of(5), "decoder/stage5", 1, 1, 1, true);  // F_D^5
  if (trace) trace->dec5 = dec;

  for (int i = 4; i >= 2; --i) {
    // Crossing the stride boundary at stages 3->2 and 2->1 doubles the grid.
    int up = (i == 2) ? g.resize_bilinear(dec, cfg_.input_size / 2, cfg_.input_size / 2) : dec;
    const auto& updims = g.value(up);
    const int gh = updims.dims[1], gw = updims.dims[2];

    std::vector<int> cat_in;
    if (cfg_.use_ic) {
      for (int j = 5; j >= i; --j) cat_in.push_back(g.resize_bilinear(shrunk[static_cast<size_t>(j)], gh, gw));
    } else {
      cat_in.push_back(enc_of(i));
    }
    cat_in.push_back(up);
    const int cat = g.concat(cat_in);
    dec = conv_block(g, cat, "decoder/stage" + std::to_string(i), 1, 1, 1, true);
    if (trace) {
      if (i == 4) { trace->cat4 = cat; trace->dec4 = dec; }
      if (i == 3) { trace->cat3 = cat; trace->dec3 = dec; }
      if (i == 2) { trace->cat2 = cat; trace->dec2 = dec; }
    }
  }

  const int fu1 = g.resize_bilinear(dec, cfg_.input_size, cfg_.input_size);
  if (trace) trace->up1 = fu1;
  return fu1;
}

template <typename T>
int I2GFPNetT<T>::global_conv(GraphT<T>& g, int x, const std::string& path, int k) {
  const int pad = (k - 1) / 2;
  int a = conv_block(g, x, path + "/row_col/conv1", 1, 0, pad, false);
  a = conv_block(g, a, path + "/row_col/conv2", 1, pad, 0, false);
  int b = conv_block(g, x, path + "/col_row/conv1", 1, pad, 0, false);
  b = conv_block(g, b, path + "/col_row/conv2", 1, 0, pad, false);
  return g.relu(g.add(a, b));
}

template <typename T>
int I2GFPNetT<T>::gfp_forward(GraphT<T>& g, int rgb) {
  if (!cfg_.use_gfp) throw Error("gfp_forward called with use_gfp=false");
  const auto [k1, k2] = cfg_.gfp_kernels();
  int x = conv_block(g, rgb, "gfp/down1", 2, 1, 1, true);
  x = conv_block(g, x, "gfp/down2", 2, 1, 1, true);
  x = global_conv(g, x, "gfp/gc1", k1);
  x = global_conv(g, x, "gfp/gc2", k2);
  return x;
}

template <typename T>
int I2GFPNetT<T>::forward(GraphT<T>& g, int rgb, int trimap_plane, ForwardTrace* trace) {
  const int input = g.concat({rgb, trimap_plane});
  const auto enc = encode(g, input);
  if (trace) trace->enc = enc;

  const int fu1 = decode(g, enc, trace);

  std::vector<int> head_in{enc[0], fu1};
  if (cfg_.use_gfp) {
    int gf = gfp_forward(g, rgb);
    gf = g.resize_bilinear(gf, cfg_.input_size, cfg_.input_size);
    head_in.push_back(gf);
    if (trace) trace->gfp = gf;
  }
  const int cat = g.concat(head_in);
  if (trace) trace->head_cat = cat;

  int x = conv_block(g, cat, "head/conv1", 1, 1, 1, true);
  x = conv_block(g, x, "head/conv2", 1, 1, 1, true);
  x = conv_block(g, x, "head/proj", 1, 0, 0, false);
  const int out = g.sigmoid(x);
  if (trace) trace->out = out;
  return out;
}

template <typename T>
TensorT<T> I2GFPNetT<T>::predict(const TensorT<T>& rgb, const TensorT<T>& trimap_plane) {
  GraphT<T> g(false);
  const int out = forward(g, g.leaf(rgb), g.leaf(trimap_plane));
  return g.value(out);
}

template <typename T>
std::vector<std::pair<std::string, std::vector<int>>> I2GFPNetT<T>::shape_manifest(
    const ModelConfig& cfg) {
  cfg.validate();
  std::vector<std::pair<std::string, std::vector<int>>> out;
  walk_shapes(cfg, [&out](const std::string& name, std::vector<int> dims) {
    out.emplace_back(name, std::move(dims));
  });
  return out;
}

template class I2GFPNetT<float>;
template class I2GFPNetT<double>;

Tensor rgb_to_tensor(const RgbImage& img) {
  Tensor t(3, img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) t.at(c, y, x) = img.at(y, x, c);
  return t;
}

Tensor alpha_to_tensor(const AlphaMatte& a) {
  Tensor t(1, a.height, a.width);
  std::copy(a.data.begin(), a.data.end(), t.data.begin());
  return t;
}

Tensor trimap_to_plane(const Trimap& tm) {
  Tensor t(1, tm.height, tm.width);
  for (size_t i = 0; i < tm.labels.size(); ++i) {
    switch (tm.labels[i]) {
      case TrimapLabel::Background: t.data[i] = 0.f; break;
      case TrimapLabel::Unknown: t.data[i] = 0.5f; break;
      case TrimapLabel::Foreground: t.data[i] = 1.f; break;
    }
  }
  return t;
}

Tensor mask_to_tensor(const Mask& m) {
  Tensor t(1, m.height, m.width);
  for (size_t i = 0; i < m.data.size(); ++i) t.data[i] = m.data[i] ? 1.f : 0.f;
  return t;
}

AlphaMatte tensor_to_alpha(const Tensor& t) {
  AlphaMatte a(t.dims[1], t.dims[2]);
  for (size_t i = 0; i < a.data.size(); ++i) a.data[i] = std::clamp(t.data[i], 0.f, 1.f);
  return a;
}

}  // namespace i2gfp
