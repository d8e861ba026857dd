// Brute-force reference implementations the tests check the library
// against. Everything here is written the slow, obvious way and must stay
// independent of the code paths under test (no im2col, no separable passes,
// no BFS labeling).
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "i2gfp/image.hpp"
#include "i2gfp/tensor.hpp"

namespace oracle {

enum class Border { Zero, Replicate };

// Direct dense 2-D cross-correlation, one output channel at a time.
template <typename T>
i2gfp::TensorT<T> dense_conv2d(const i2gfp::TensorT<T>& x, const i2gfp::TensorT<T>& kernel,
                               int stride, int pad, Border border) {
  const int ci = x.dims[0], h = x.dims[1], w = x.dims[2];
  const int co = kernel.dims[0], kh = kernel.dims[2], kw = kernel.dims[3];
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (w + 2 * pad - kw) / stride + 1;
  i2gfp::TensorT<T> out(co, oh, ow);
  for (int o = 0; o < co; ++o) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (int c = 0; c < ci; ++c) {
          for (int ky = 0; ky < kh; ++ky) {
            for (int kx = 0; kx < kw; ++kx) {
              int iy = oy * stride - pad + ky;
              int ix = ox * stride - pad + kx;
              double xv = 0.0;
              if (border == Border::Replicate) {
                iy = std::clamp(iy, 0, h - 1);
                ix = std::clamp(ix, 0, w - 1);
                xv = x.at(c, iy, ix);
              } else if (iy >= 0 && iy < h && ix >= 0 && ix < w) {
                xv = x.at(c, iy, ix);
              }
              const size_t kidx =
                  ((static_cast<size_t>(o) * ci + c) * kh + ky) * kw + kx;
              acc += static_cast<double>(kernel.data[kidx]) * xv;
            }
          }
        }
        out.at(o, oy, ox) = static_cast<T>(acc);
      }
    }
  }
  return out;
}

// Square dilation by direct window scan.
inline std::vector<uint8_t> dilate(const std::vector<uint8_t>& in, int h, int w, int radius) {
  std::vector<uint8_t> out(in.size(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      uint8_t v = 0;
      for (int dy = -radius; dy <= radius && !v; ++dy)
        for (int dx = -radius; dx <= radius && !v; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy >= 0 && yy < h && xx >= 0 && xx < w && in[static_cast<size_t>(yy) * w + xx])
            v = 1;
        }
      out[static_cast<size_t>(y) * w + x] = v;
    }
  return out;
}

// Recursive flood fill (explicit stack), counting component sizes; ties on
// size resolve to the component whose seed comes first in raster order.
inline std::vector<uint8_t> largest_component_flood(const std::vector<uint8_t>& bin, int h,
                                                    int w) {
  std::vector<uint8_t> seen(bin.size(), 0);
  std::vector<uint8_t> best;
  size_t best_size = 0;
  for (int seed = 0; seed < h * w; ++seed) {
    if (!bin[static_cast<size_t>(seed)] || seen[static_cast<size_t>(seed)]) continue;
    std::vector<uint8_t> comp(bin.size(), 0);
    size_t size = 0;
    std::vector<int> stack{seed};
    seen[static_cast<size_t>(seed)] = 1;
    while (!stack.empty()) {
      const int j = stack.back();
      stack.pop_back();
      comp[static_cast<size_t>(j)] = 1;
      ++size;
      const int y = j / w, x = j % w;
      const int nb[4] = {y > 0 ? j - w : -1, y + 1 < h ? j + w : -1, x > 0 ? j - 1 : -1,
                         x + 1 < w ? j + 1 : -1};
      for (int k : nb) {
        if (k < 0 || !bin[static_cast<size_t>(k)] || seen[static_cast<size_t>(k)]) continue;
        seen[static_cast<size_t>(k)] = 1;
        stack.push_back(k);
      }
    }
    if (size > best_size) {
      best_size = size;
      best = comp;
    }
  }
  if (best.empty()) best.assign(bin.size(), 0);
  return best;
}

// Connectivity metric recomputed from its definition.
inline double conn_ref(const i2gfp::AlphaMatte& pred, const i2gfp::AlphaMatte& gt,
                       const i2gfp::Mask& mask) {
  const int h = pred.height, w = pred.width;
  const size_t n = pred.data.size();
  std::vector<double> lm(n, -1.0);
  for (int i = 1; i <= 10; ++i) {
    const double t = i * 0.1;
    std::vector<uint8_t> bin(n);
    for (size_t j = 0; j < n; ++j)
      bin[j] = (double(pred.data[j]) >= t && double(gt.data[j]) >= t) ? 1 : 0;
    const auto omega = largest_component_flood(bin, h, w);
    for (size_t j = 0; j < n; ++j)
      if (lm[j] < 0.0 && !omega[j]) lm[j] = (i - 1) * 0.1;
  }
  for (auto& v : lm)
    if (v < 0.0) v = 1.0;
  double acc = 0.0;
  for (size_t j = 0; j < n; ++j) {
    if (!mask.data[j]) continue;
    const double dp = double(pred.data[j]) - lm[j];
    const double dg = double(gt.data[j]) - lm[j];
    acc += std::abs((1.0 - (dp >= 0.15 ? dp : 0.0)) - (1.0 - (dg >= 0.15 ? dg : 0.0)));
  }
  return acc / 1000.0;
}

// Gradient metric against dense 2-D convolution with the same taps.
inline double grad_ref(const i2gfp::AlphaMatte& pred, const i2gfp::AlphaMatte& gt,
                       const i2gfp::Mask& mask, double sigma = 1.4) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  const int n = 2 * radius + 1;
  std::vector<double> g(static_cast<size_t>(n)), dg(static_cast<size_t>(n));
  for (int i = -radius; i <= radius; ++i) {
    g[static_cast<size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    dg[static_cast<size_t>(i + radius)] = -i * std::exp(-(i * i) / (2.0 * sigma * sigma));
  }
  // 2-D kernels, L2-normalized as a whole.
  i2gfp::TensorT<double> hx(std::vector<int>{1, 1, n, n});
  i2gfp::TensorT<double> hy(std::vector<int>{1, 1, n, n});
  double norm = 0.0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double v = g[static_cast<size_t>(y)] * dg[static_cast<size_t>(x)];
      hx.data[static_cast<size_t>(y) * n + x] = v;
      hy.data[static_cast<size_t>(x) * n + y] = v;
      norm += v * v;
    }
  norm = std::sqrt(norm);
  for (auto& v : hx.data) v /= norm;
  for (auto& v : hy.data) v /= norm;

  auto magnitude = [&](const i2gfp::AlphaMatte& a) {
    i2gfp::TensorT<double> t(1, a.height, a.width);
    for (size_t j = 0; j < a.data.size(); ++j) t.data[j] = a.data[j];
    const auto gx = dense_conv2d(t, hx, 1, radius, Border::Replicate);
    const auto gy = dense_conv2d(t, hy, 1, radius, Border::Replicate);
    std::vector<double> mag(a.data.size());
    for (size_t j = 0; j < mag.size(); ++j)
      mag[j] = std::sqrt(gx.data[j] * gx.data[j] + gy.data[j] * gy.data[j]);
    return mag;
  };

  const auto mp = magnitude(pred);
  const auto mg = magnitude(gt);
  double acc = 0.0;
  for (size_t j = 0; j < mp.size(); ++j) {
    if (!mask.data[j]) continue;
    const double d = mp[j] - mg[j];
    acc += d * d;
  }
  return acc / 1000.0;
}

}  // namespace oracle
