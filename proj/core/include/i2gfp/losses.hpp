#pragma once

#include <optional>
#include <vector>

#include "i2gfp/autograd.hpp"
#include "i2gfp/image.hpp"
#include "i2gfp/tensor.hpp"

namespace i2gfp {

// The four training terms and their unit-weight sum. total is accumulated
// left to right from the four doubles, so total == l1+comp+grad+lap holds
// exactly for the same order.
struct LossBreakdown {
  double l1 = 0.0;
  double comp = 0.0;
  double grad = 0.0;
  double lap = 0.0;
  double total = 0.0;
  bool comp_skipped = false;  // sample carried no fg/bg pair
  bool empty_mask = false;

  static LossBreakdown from_parts(double l1, double comp, double grad, double lap);
};

// Node ids of the loss terms inside a graph; backward() from total drives
// a training step.
struct LossNodes {
  int l1 = -1, comp = -1, grad = -1, lap = -1, total = -1;
  bool comp_skipped = false;
  bool empty_mask = false;
};

// Ground-truth side of the loss; all tensors are constants on the tape.
template <typename T>
struct LossTarget {
  TensorT<T> gt;    // {1,h,w}
  TensorT<T> mask;  // {1,h,w}, 0/1
  std::optional<TensorT<T>> fg;         // {3,h,w}
  std::optional<TensorT<T>> bg;         // {3,h,w}
  std::optional<TensorT<T>> composite;  // {3,h,w} observed image
};

template <typename T>
LossNodes build_total_loss(GraphT<T>& g, int pred, const LossTarget<T>& target);

template <typename T>
LossBreakdown read_losses(const GraphT<T>& g, const LossNodes& n);

// Standalone forms (no network in the loop); pred enters as a constant.
double l1_loss(const AlphaMatte& pred, const AlphaMatte& gt, const Mask& mask);
double composition_loss(const AlphaMatte& pred, const RgbImage& fg, const RgbImage& bg,
                        const RgbImage& composite_gt, const Mask& mask);
double gradient_loss(const AlphaMatte& pred, const AlphaMatte& gt, const Mask& mask);
double laplacian_loss(const AlphaMatte& pred, const AlphaMatte& gt);
LossBreakdown total_loss(const MattingSample& sample, const AlphaMatte& pred);

// 5 band-pass levels plus the residual low-pass; level s sits at
// input/2^(s-1). Inputs with dims not divisible by 32 are reflect-padded.
template <typename T>
struct LaplacianPyramidT {
  std::vector<TensorT<T>> bands;
  TensorT<T> residual;
  int source_h = 0, source_w = 0;  // pre-padding extent; collapse crops back
};
using LaplacianPyramid = LaplacianPyramidT<float>;

constexpr int kPyramidLevels = 5;
std::vector<double> laplacian_level_weights();  // {1,2,4,8,16}

template <typename T>
LaplacianPyramidT<T> build_pyramid(const TensorT<T>& x);

// Upsample-and-add from the residual; exact inverse of build_pyramid.
template <typename T>
TensorT<T> collapse_pyramid(const LaplacianPyramidT<T>& pyr);

}  // namespace i2gfp
