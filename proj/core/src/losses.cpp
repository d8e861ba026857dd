#include "i2gfp/losses.hpp"

#include <cmath>

#include "i2gfp/network.hpp"

namespace i2gfp {

LossBreakdown LossBreakdown::from_parts(double l1, double comp, double grad, double lap) {
  LossBreakdown b;
  b.l1 = l1;
  b.comp = comp;
  b.grad = grad;
  b.lap = lap;
  b.total = l1 + comp + grad + lap;
  return b;
}

std::vector<double> laplacian_level_weights() {
  std::vector<double> w(kPyramidLevels);
  for (int s = 0; s < kPyramidLevels; ++s) w[static_cast<size_t>(s)] = std::ldexp(1.0, s);
  return w;
}

namespace {

int round_up(int v, int mult) { return (v + mult - 1) / mult * mult; }

template <typename T>
struct PyrNodes {
  std::vector<int> bands;
  int residual = -1;
};

// Gaussian/Laplacian pyramid: 5x5 binomial blur with replicate borders,
// stride-2 subsample; upsample is zero-stuffing followed by the 4x-gain
// blur. Band s = G_s - up(G_{s+1}), so collapse is exact by construction.
template <typename T>
PyrNodes<T> pyramid_graph(GraphT<T>& g, int x) {
  const auto& v = g.value(x);
  const int h = v.dims[1], w = v.dims[2];
  const int hp = round_up(h, 1 << kPyramidLevels), wp = round_up(w, 1 << kPyramidLevels);
  if (hp != h || wp != w) x = g.reflect_pad_br(x, hp - h, wp - w);

  std::vector<int> gauss{x};
  for (int s = 0; s < kPyramidLevels; ++s) {
    const int rp = g.replicate_pad(gauss.back(), 2, 2);
    gauss.push_back(g.conv2d_fixed(rp, binomial5_kernel<T>(), 2, 2, 0, 0));
  }

  PyrNodes<T> out;
  for (int s = 0; s < kPyramidLevels; ++s) {
    const int up =
        g.conv2d_fixed(g.zero_stuff2(gauss[static_cast<size_t>(s + 1)]), binomial5_kernel<T>(T(4)),
                       1, 1, 2, 2);
    out.bands.push_back(g.sub(gauss[static_cast<size_t>(s)], up));
  }
  out.residual = gauss[static_cast<size_t>(kPyramidLevels)];
  return out;
}

template <typename T>
int laplacian_loss_graph(GraphT<T>& g, int pred, int gt) {
  auto pp = pyramid_graph(g, pred);
  auto pg = pyramid_graph(g, gt);
  std::vector<int> terms;
  std::vector<T> weights;
  for (int s = 0; s < kPyramidLevels; ++s) {
    const int d = g.sub(pp.bands[static_cast<size_t>(s)], pg.bands[static_cast<size_t>(s)]);
    terms.push_back(g.abs_mean(d, static_cast<double>(g.value(d).size())));
    weights.push_back(static_cast<T>(std::ldexp(1.0, s)));
  }
  return g.weighted_sum(terms, weights);
}

}  // namespace

template <typename T>
LossNodes build_total_loss(GraphT<T>& g, int pred, const LossTarget<T>& target) {
  const auto& pv = g.value(pred);
  if (!pv.same_shape(target.gt))
    throw ShapeError("loss: pred " + pv.shape_str() + " vs gt " + target.gt.shape_str());
  if (!target.mask.same_shape(target.gt))
    throw ShapeError("loss: mask " + target.mask.shape_str() + " vs gt " + target.gt.shape_str());

  double count = 0.0;
  for (const T m : target.mask.data) count += static_cast<double>(m);

  LossNodes out;
  const int gt = g.leaf(target.gt);

  if (count == 0.0) {
    out.empty_mask = true;
    out.l1 = g.scalar_const(T(0));
    out.grad = g.scalar_const(T(0));
  } else {
    out.l1 = g.masked_abs_mean(g.sub(pred, gt), target.mask, count);
    const int rx = g.sub(g.diff_x(pred), g.diff_x(gt));
    const int ry = g.sub(g.diff_y(pred), g.diff_y(gt));
    const int gx = g.masked_abs_mean(rx, target.mask, count);
    const int gy = g.masked_abs_mean(ry, target.mask, count);
    out.grad = g.weighted_sum({gx, gy}, {T(1), T(1)});
  }

  if (target.fg && target.bg && target.composite && count > 0.0) {
    // C - B - alpha*(F - B); only alpha is live on the tape.
    TensorT<T> fmb(target.fg->dims);
    TensorT<T> cmb(target.fg->dims);
    for (size_t i = 0; i < fmb.data.size(); ++i) {
      fmb.data[i] = target.fg->data[i] - target.bg->data[i];
      cmb.data[i] = target.composite->data[i] - target.bg->data[i];
    }
    const int prod = g.mul_broadcast(pred, g.leaf(std::move(fmb)));
    const int resid = g.sub(g.leaf(std::move(cmb)), prod);
    out.comp = g.masked_abs_mean(resid, target.mask, 3.0 * count);
  } else {
    out.comp = g.scalar_const(T(0));
    out.comp_skipped = !(target.fg && target.bg && target.composite);
  }

  out.lap = laplacian_loss_graph(g, pred, gt);
  out.total = g.weighted_sum({out.l1, out.comp, out.grad, out.lap}, {T(1), T(1), T(1), T(1)});
  return out;
}

template <typename T>
LossBreakdown read_losses(const GraphT<T>& g, const LossNodes& n) {
  LossBreakdown b = LossBreakdown::from_parts(
      static_cast<double>(g.scalar(n.l1)), static_cast<double>(g.scalar(n.comp)),
      static_cast<double>(g.scalar(n.grad)), static_cast<double>(g.scalar(n.lap)));
  b.comp_skipped = n.comp_skipped;
  b.empty_mask = n.empty_mask;
  return b;
}

template LossNodes build_total_loss<float>(GraphT<float>&, int, const LossTarget<float>&);
template LossNodes build_total_loss<double>(GraphT<double>&, int, const LossTarget<double>&);
template LossBreakdown read_losses<float>(const GraphT<float>&, const LossNodes&);
template LossBreakdown read_losses<double>(const GraphT<double>&, const LossNodes&);

namespace {

double masked_abs_mean_value(const Tensor& x, const Tensor& mask, double norm) {
  GraphT<float> g(false);
  const int n = g.masked_abs_mean(g.leaf(x), mask, norm);
  return static_cast<double>(g.scalar(n));
}

}  // namespace

double l1_loss(const AlphaMatte& pred, const AlphaMatte& gt, const Mask& mask) {
  if (pred.height != gt.height || pred.width != gt.width)
    throw ShapeError("l1_loss: dimension mismatch");
  const double count = static_cast<double>(mask.count());
  if (count == 0.0) return 0.0;
  GraphT<float> g(false);
  const int r = g.sub(g.leaf(alpha_to_tensor(pred)), g.leaf(alpha_to_tensor(gt)));
  return masked_abs_mean_value(g.value(r), mask_to_tensor(mask), count);
}

double composition_loss(const AlphaMatte& pred, const RgbImage& fg, const RgbImage& bg,
                        const RgbImage& composite_gt, const Mask& mask) {
  const double count = static_cast<double>(mask.count());
  if (count == 0.0) return 0.0;
  const Tensor f = rgb_to_tensor(fg), b = rgb_to_tensor(bg), c = rgb_to_tensor(composite_gt);
  Tensor fmb(f.dims), cmb(f.dims);
  for (size_t i = 0; i < fmb.data.size(); ++i) {
    fmb.data[i] = f.data[i] - b.data[i];
    cmb.data[i] = c.data[i] - b.data[i];
  }
  GraphT<float> g(false);
  const int prod = g.mul_broadcast(g.leaf(alpha_to_tensor(pred)), g.leaf(std::move(fmb)));
  const int resid = g.sub(g.leaf(std::move(cmb)), prod);
  return static_cast<double>(g.scalar(g.masked_abs_mean(resid, mask_to_tensor(mask), 3.0 * count)));
}

double gradient_loss(const AlphaMatte& pred, const AlphaMatte& gt, const Mask& mask) {
  const double count = static_cast<double>(mask.count());
  if (count == 0.0) return 0.0;
  GraphT<float> g(false);
  const int p = g.leaf(alpha_to_tensor(pred));
  const int t = g.leaf(alpha_to_tensor(gt));
  const Tensor m = mask_to_tensor(mask);
  const int gx = g.masked_abs_mean(g.sub(g.diff_x(p), g.diff_x(t)), m, count);
  const int gy = g.masked_abs_mean(g.sub(g.diff_y(p), g.diff_y(t)), m, count);
  return static_cast<double>(g.scalar(g.weighted_sum({gx, gy}, {1.f, 1.f})));
}

double laplacian_loss(const AlphaMatte& pred, const AlphaMatte& gt) {
  GraphT<float> g(false);
  const int n = laplacian_loss_graph(g, g.leaf(alpha_to_tensor(pred)), g.leaf(alpha_to_tensor(gt)));
  return static_cast<double>(g.scalar(n));
}

LossBreakdown total_loss(const MattingSample& sample, const AlphaMatte& pred) {
  if (!sample.ground_truth) throw Error("total_loss: sample has no ground-truth matte");
  check_same_size(sample);

  GraphT<float> g(false);
  LossTarget<float> target;
  target.gt = alpha_to_tensor(*sample.ground_truth);
  target.mask = mask_to_tensor(unknown_mask(sample.trimap));
  if (sample.foreground && sample.background) {
    target.fg = rgb_to_tensor(*sample.foreground);
    target.bg = rgb_to_tensor(*sample.background);
    target.composite = rgb_to_tensor(sample.image);
  }
  const LossNodes n = build_total_loss(g, g.leaf(alpha_to_tensor(pred)), target);
  return read_losses(g, n);
}

template <typename T>
LaplacianPyramidT<T> build_pyramid(const TensorT<T>& x) {
  GraphT<T> g(false);
  auto nodes = pyramid_graph(g, g.leaf(x));
  LaplacianPyramidT<T> pyr;
  for (int id : nodes.bands) pyr.bands.push_back(g.value(id));
  pyr.residual = g.value(nodes.residual);
  pyr.source_h = x.dims[1];
  pyr.source_w = x.dims[2];
  return pyr;
}

template <typename T>
TensorT<T> collapse_pyramid(const LaplacianPyramidT<T>& pyr) {
  TensorT<T> acc = pyr.residual;
  for (int s = static_cast<int>(pyr.bands.size()) - 1; s >= 0; --s) {
    GraphT<T> g(false);
    const int up = g.conv2d_fixed(g.zero_stuff2(g.leaf(acc)), binomial5_kernel<T>(T(4)), 1, 1, 2, 2);
    acc = g.value(up);
    const auto& band = pyr.bands[static_cast<size_t>(s)];
    for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += band.data[i];
  }
  if (acc.dims[1] == pyr.source_h && acc.dims[2] == pyr.source_w) return acc;
  TensorT<T> out(acc.dims[0], pyr.source_h, pyr.source_w);
  for (int c = 0; c < acc.dims[0]; ++c)
    for (int y = 0; y < pyr.source_h; ++y)
      for (int x2 = 0; x2 < pyr.source_w; ++x2) out.at(c, y, x2) = acc.at(c, y, x2);
  return out;
}

template LaplacianPyramidT<float> build_pyramid<float>(const TensorT<float>&);
template LaplacianPyramidT<double> build_pyramid<double>(const TensorT<double>&);
template TensorT<float> collapse_pyramid<float>(const LaplacianPyramidT<float>&);
template TensorT<double> collapse_pyramid<double>(const LaplacianPyramidT<double>&);

}  // namespace i2gfp
