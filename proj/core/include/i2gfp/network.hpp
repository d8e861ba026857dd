#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "i2gfp/autograd.hpp"
#include "i2gfp/image.hpp"
#include "i2gfp/tensor.hpp"

namespace i2gfp {

// Architecture hyperparameters. Paper-scale defaults; width_divisor and
// input_size shrink the model to something a CPU can train.
struct ModelConfig {
  int input_size = 512;
  std::array<int, 5> base_channels{64, 128, 256, 512, 512};
  int width_divisor = 1;
  int shrink_channels = 16;
  bool use_ic = true;
  bool use_gfp = true;
  int gfp_kernel1 = 0;  // 0 derives input_size/2 - 1
  int gfp_kernel2 = 0;  // 0 derives input_size/4 - 1
  int gfp_channels = 32;
  uint64_t seed = 0;

  int stage_channels(int stage) const;    // encoder width at stage 1..5
  int decoder_channels(int stage) const;  // max(stage_channels/2, shrink_channels)
  int head_channels() const;
  std::pair<int, int> gfp_kernels() const;
  int head_input_channels() const;

  void validate() const;  // throws ConfigError

  bool operator==(const ModelConfig&) const = default;
};

// Node ids of interest from one forward pass; -1 where a branch is off.
struct ForwardTrace {
  std::array<int, 5> enc{-1, -1, -1, -1, -1};  // F_E^1..F_E^5
  int dec5 = -1, dec4 = -1, dec3 = -1, dec2 = -1;
  int cat4 = -1, cat3 = -1, cat2 = -1, head_cat = -1;
  int up1 = -1;  // F_U^1
  int gfp = -1;
  int out = -1;
};

// Stride-4 VGG-16 encoder, intensively connected decoder, optional global
// foreground perception branch, sigmoid head.
template <typename T>
class I2GFPNetT {
 public:
  explicit I2GFPNetT(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  ParamSetT<T>& params() { return params_; }
  const ParamSetT<T>& params() const { return params_; }

  // Zero-mean Gaussian weights (fan-in scaled; std 0.01 for 1x1
  // projections), zero biases. Deterministic for a given seed.
  void init(uint64_t seed);

  // input is a {4,S,S} node: RGB planes plus the trimap plane {0,0.5,1}.
  std::array<int, 5> encode(GraphT<T>& g, int input);
  // Returns F_U^1 at full resolution.
  int decode(GraphT<T>& g, const std::array<int, 5>& enc, ForwardTrace* trace = nullptr);
  // RGB {3,S,S} -> {gfp_channels, S/4, S/4}.
  int gfp_forward(GraphT<T>& g, int rgb);
  int forward(GraphT<T>& g, int rgb, int trimap_plane, ForwardTrace* trace = nullptr);

  // Inference convenience: no tape, returns the predicted matte.
  TensorT<T> predict(const TensorT<T>& rgb, const TensorT<T>& trimap_plane);

  // Layer path -> tensor shape, in registration order. Pure function of the
  // config; the parameter registry is built from the same walk.
  static std::vector<std::pair<std::string, std::vector<int>>> shape_manifest(
      const ModelConfig& cfg);

 private:
  int conv_block(GraphT<T>& g, int x, const std::string& path, int stride, int pad_y, int pad_x,
                 bool relu_after);
  int global_conv(GraphT<T>& g, int x, const std::string& path, int k);

  ModelConfig cfg_;
  ParamSetT<T> params_;
};

using I2GFPNet = I2GFPNetT<float>;
using I2GFPNetD = I2GFPNetT<double>;

Tensor rgb_to_tensor(const RgbImage& img);
Tensor alpha_to_tensor(const AlphaMatte& a);
Tensor trimap_to_plane(const Trimap& t);  // {0, 0.5, 1}
Tensor mask_to_tensor(const Mask& m);
AlphaMatte tensor_to_alpha(const Tensor& t);

}  // namespace i2gfp
