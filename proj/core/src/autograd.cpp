#include "i2gfp/autograd.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>

namespace i2gfp {

namespace {

template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

struct ConvDims {
  int ci, h, w, co, kh, kw, sy, sx, py, px, oh, ow;
};

template <typename T>
ConvDims conv_dims(const TensorT<T>& x, const std::vector<int>& wd, int sy, int sx, int py,
                   int px) {
  ConvDims d;
  d.ci = x.dims[0];
  d.h = x.dims[1];
  d.w = x.dims[2];
  d.co = wd[0];
  d.kh = wd[2];
  d.kw = wd[3];
  d.sy = sy;
  d.sx = sx;
  d.py = py;
  d.px = px;
  if (wd[1] != d.ci)
    throw ShapeError("conv2d: input channels " + std::to_string(d.ci) + " vs kernel " +
                     std::to_string(wd[1]));
  d.oh = (d.h + 2 * py - d.kh) / sy + 1;
  d.ow = (d.w + 2 * px - d.kw) / sx + 1;
  if (d.oh <= 0 || d.ow <= 0) throw ShapeError("conv2d: empty output");
  return d;
}

// col layout: rows = ci*kh*kw, cols = oh*ow, row-major.
template <typename T>
void im2col(const TensorT<T>& x, const ConvDims& d, std::vector<T>& col) {
  col.assign(static_cast<size_t>(d.ci) * d.kh * d.kw * d.oh * d.ow, T(0));
  const size_t ncols = static_cast<size_t>(d.oh) * d.ow;
  const T* src = x.data.data();
  for (int c = 0; c < d.ci; ++c) {
    for (int ky = 0; ky < d.kh; ++ky) {
      for (int kx = 0; kx < d.kw; ++kx) {
        T* dst = col.data() + ((static_cast<size_t>(c) * d.kh + ky) * d.kw + kx) * ncols;
        for (int oy = 0; oy < d.oh; ++oy) {
          const int iy = oy * d.sy - d.py + ky;
          if (iy < 0 || iy >= d.h) {
            dst += d.ow;
            continue;
          }
          const T* row = src + (static_cast<size_t>(c) * d.h + iy) * d.w;
          for (int ox = 0; ox < d.ow; ++ox, ++dst) {
            const int ix = ox * d.sx - d.px + kx;
            if (ix >= 0 && ix < d.w) *dst = row[ix];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const std::vector<T>& col, const ConvDims& d, TensorT<T>& dx) {
  const size_t ncols = static_cast<size_t>(d.oh) * d.ow;
  T* dst_base = dx.data.data();
  for (int c = 0; c < d.ci; ++c) {
    for (int ky = 0; ky < d.kh; ++ky) {
      for (int kx = 0; kx < d.kw; ++kx) {
        const T* src = col.data() + ((static_cast<size_t>(c) * d.kh + ky) * d.kw + kx) * ncols;
        for (int oy = 0; oy < d.oh; ++oy) {
          const int iy = oy * d.sy - d.py + ky;
          if (iy < 0 || iy >= d.h) {
            src += d.ow;
            continue;
          }
          T* row = dst_base + (static_cast<size_t>(c) * d.h + iy) * d.w;
          for (int ox = 0; ox < d.ow; ++ox, ++src) {
            const int ix = ox * d.sx - d.px + kx;
            if (ix >= 0 && ix < d.w) row[ix] += *src;
          }
        }
      }
    }
  }
}

struct BilinearTap {
  int i0, i1;
  double w1;
};

BilinearTap tensor_tap(int dst, int in_size, double scale) {
  double src = (dst + 0.5) * scale - 0.5;
  double fl = std::floor(src);
  BilinearTap t;
  int i = static_cast<int>(fl);
  t.i0 = i < 0 ? 0 : (i > in_size - 1 ? in_size - 1 : i);
  int j = i + 1;
  t.i1 = j < 0 ? 0 : (j > in_size - 1 ? in_size - 1 : j);
  t.w1 = src - fl;
  if (src <= 0.0) t.w1 = 0.0;
  return t;
}

}  // namespace

template <typename T>
typename GraphT<T>::Tn& GraphT<T>::ensure_grad(int id) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (n.grad.empty()) n.grad = Tn(n.value.dims);
  return n.grad;
}

template <typename T>
void GraphT<T>::accumulate(int id, const Tn& g) {
  Tn& dst = ensure_grad(id);
  for (size_t i = 0; i < g.data.size(); ++i) dst.data[i] += g.data[i];
}

template <typename T>
int GraphT<T>::leaf(Tn value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

template <typename T>
int GraphT<T>::param(ParamT<T>& p) {
  Node n;
  n.value = p.value;
  n.needs_grad = training_;
  n.external = training_ ? &p : nullptr;
  return push(std::move(n));
}

template <typename T>
int GraphT<T>::conv2d(int x, int w, int b, int stride_y, int stride_x, int pad_y, int pad_x) {
  const Tn& xv = value(x);
  const Tn& wv = value(w);
  ConvDims d = conv_dims(xv, wv.dims, stride_y, stride_x, pad_y, pad_x);

  auto col = std::make_shared<std::vector<T>>();
  im2col(xv, d, *col);
  const int krows = d.ci * d.kh * d.kw;
  const size_t ncols = static_cast<size_t>(d.oh) * d.ow;

  Node n;
  n.value = Tn(d.co, d.oh, d.ow);
  {
    ConstMatMap<T> wm(wv.data.data(), d.co, krows);
    ConstMatMap<T> cm(col->data(), krows, static_cast<Eigen::Index>(ncols));
    MatMap<T> om(n.value.data.data(), d.co, static_cast<Eigen::Index>(ncols));
    om.noalias() = wm * cm;
    if (b >= 0) {
      const Tn& bv = value(b);
      for (int co = 0; co < d.co; ++co) om.row(co).array() += bv.data[static_cast<size_t>(co)];
    }
  }

  n.needs_grad = training_ && (wants_grad(x) || wants_grad(w) || (b >= 0 && wants_grad(b)));
  if (!n.needs_grad) return push(std::move(n));

  const int id = static_cast<int>(nodes_.size());
  const bool weight_needs = wants_grad(w);
  if (!weight_needs) col.reset();  // only dW consumes the col buffer

  n.back = [x, w, b, d, krows, ncols, id, col](GraphT& g) {
    const Tn& gy = g.grad_of(id);
    ConstMatMap<T> gym(gy.data.data(), d.co, static_cast<Eigen::Index>(ncols));
    if (g.wants_grad(w) && col) {
      Tn& dw = g.ensure_grad(w);
      MatMap<T> dwm(dw.data.data(), d.co, krows);
      ConstMatMap<T> cm(col->data(), krows, static_cast<Eigen::Index>(ncols));
      dwm.noalias() += gym * cm.transpose();
    }
    if (b >= 0 && g.wants_grad(b)) {
      Tn& db = g.ensure_grad(b);
      for (int co = 0; co < d.co; ++co) db.data[static_cast<size_t>(co)] += gym.row(co).sum();
    }
    if (g.wants_grad(x)) {
      const Tn& wv2 = g.value(w);
      ConstMatMap<T> wm(wv2.data.data(), d.co, krows);
      std::vector<T> dcol(static_cast<size_t>(krows) * ncols);
      MatMap<T> dcm(dcol.data(), krows, static_cast<Eigen::Index>(ncols));
      dcm.noalias() = wm.transpose() * gym;
      col2im_add(dcol, d, g.ensure_grad(x));
    }
  };
  return push(std::move(n));
}

template <typename T>
int GraphT<T>::conv2d_fixed(int x, Tn kernel, int stride_y, int stride_x, int pad_y, int pad_x) {
  const int k = leaf(std::move(kernel));
  return conv2d(x, k, -1, stride_y, stride_x, pad_y, pad_x);
}

template <typename T>
int GraphT<T>::relu(int x) {
  const Tn& xv = value(x);
  Node n;
  n.value = Tn(xv.dims);
  for (size_t i = 0; i < xv.data.size(); ++i) n.value.data[i] = xv.data[i] > T(0) ? xv.data[i] : T(0);
  n.needs_grad = training_ && wants_grad(x);
  if (!n.needs_grad) return push(std::move(n));
  const int id = static_cast<int>(nodes_.size());
  n.back = [x, id](GraphT& g) {
    const Tn& gy = g.grad_of(id);
    const Tn& xv2 = g.value(x);
    Tn& dx = g.ensure_grad(x);
    for (size_t i = 0; i < gy.data.size(); ++i)
      if (xv2.data[i] > T(0)) dx.data[i] += gy.data[i];
  };
  return push(std::move(n));
}

template <typename T>
int GraphT<T>::sigmoid(int x) {
  const Tn& xv = value(x);
  Node n;
  n.value = Tn(xv.dims);
  for (size_t i = 0; i < xv.data.size(); ++i)
    n.value.data[i] = T(1) / (T(1) + std::exp(-xv.data[i]));
  n.needs_grad = training_ && wants_grad(x);
  if (!n.needs_grad) return push(std::move(n));
  const int id = static_cast<int>(nodes_.size());
  n.back = [x, id](GraphT& g) {
    const Tn& gy = g.grad_of(id);
    const Tn& yv = g.value(id);
    Tn& dx = g.ensure_grad(x);
    for (size_t i = 0; i < gy.data.size(); ++i) {
      const T y = yv.data[i];
      dx.data[i] += gy.data[i] * y * (T(1) - y);
    }
  };
  return push(std::move(n));
}

template <typename T>
int GraphT<T>::maxpool2(int x) {
  const Tn& xv = value(x);
  const int c = xv.dims[0], h = xv.dims[1], w = xv.dims[2];
  if (h % 2 != 0 || w % 2 != 0) throw ShapeError("maxpool2: odd spatial dims " + xv.shape_str());
  const int oh = h / 2, ow = w / 2;

  Node n;
  n.value = Tn(c, oh, ow);
  auto argmax = training_ && wants_grad(x)
                    ? std::make_shared<std::vector<int>>(static_cast<size_t>(c) * oh * ow)
                    : nullptr;
  for (int ci = 0; ci < c; ++ci) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        int best = ((ci * h) + oy * 2) * w + ox * 2;
        T bv = xv.data[static_cast<size_t>(best)];
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const int idx = ((ci * h) + oy * 2 + dy) * w + ox * 2 + dx;
            if (xv.data[static_cast<size_t>(idx)] > bv) {
              bv = xv.data[static_cast<size_t>(idx)];
              best = idx;
            }
          }
        }
        n.value.data[(static_cast<size_t>(ci) * oh + oy) * ow + ox] = bv;
        if (argmax) (*argmax)[(static_cast<size_t>(ci) * oh + oy) * ow + ox] = best;
      }
    }
  }
  n.needs_grad = training_ && wants_grad(x);
  if (!n.needs_grad) return push(std::move(n));
  const int id = static_cast<int>(nodes_.size());
  n.back = [x, id, argmax](GraphT& g) {
    const Tn& gy = g.grad_of(id);
    Tn& dx = g.ensure_grad(x);
    for (size_t i = 0; i < gy.data.size(); ++i)
      dx.data[static_cast<size_t>((*argmax)[i])] += gy.data[i];
  };
  return push(std::move(n));
}

template <typename T>
int GraphT<T>::resize_bilinear(int x, int oh, int ow) {
  const Tn& xv = value(x);
  const int c = xv.dims[0], h = xv.dims[1], w = xv.dims[2];
  if (oh == h && ow == w) return x;

  const double sy = static_cast<double>(h) / oh;
  const double sx = static_cast<double>(w) / ow;
  std::vector<BilinearTap> ty(static_cast<size_t>(oh)), tx(static_cast<size_t>(ow));
  for (int y = 0; y < oh; ++y) ty[static_cast<size_t>(y)] = tensor_tap(y, h, sy);
  for (int xo = 0; xo < ow; ++xo) tx[static_cast<size_t>(xo)] = tensor_tap(xo, w, sx);

  Node n;
  n.value = Tn(c, oh, ow);
  for (int ci = 0; ci < c; ++ci) {
    for (int y = 0; y < oh; ++y) {
      const auto& a = ty[static_cast<size_t>(y)];
      for (int xo = 0; xo < ow; ++xo) {
        const auto& b = tx[static_cast<size_t>(xo)];
        const double top = (1.0 - b.w1) * xv.at(ci, a.i0, b.i0) + b.w1 * xv.at(ci, a.i0, b.i1);
        const double bot = (1.0 - b.w1) * xv.at(ci, a.i1, b.i0) + b.w1 * xv.at(ci, a.i1, b.i1);
        n.value.at(ci, y, xo) = static_cast<T>((1.0 - a.w1) * top + a.w1 * bot);
      }
    }
  }
  n.needs_grad = training_ && wants_grad(x);
  if (!n.needs_grad) return push(std::move(n));
  const int id = static_cast<int>(nodes_.size());
  auto typ = std::make_shared<std::vector<BilinearTap>>(std::move(ty));
  auto txp = std::make_shared<std::vector<BilinearTap>>(std::move(tx));
  n.back = [x, id, c, oh, ow, typ, txp](GraphT& g) {
    const Tn& gy = g.grad_of(id);
    Tn& dx = g.ensure_grad(x);
    for (int ci = 0; ci < c; ++ci) {
      for (int y = 0; y < oh; ++y) {
        const auto& a = (*typ)[static_cast<size_t>(y)];
        for (int xo = 0; xo < ow; ++xo) {
          const auto& b = (*txp)[static_cast<size_t>(xo)];
          const T gv = gy.at(ci, y, xo);
          dx.at(ci, a.i0, b.i0) += static_cast<T>((1.0 - a.w1) * (1.0 - b.w1)) * gv;
          dx.at(ci, a.i0, b.i1) += static_cast<T>((1.0 - a.w1) * b.w1) * gv;
          dx.at(ci, a.i1, b.i0) += static_cast<T>(a.w1 * (1.0 - b.w1)) * gv;
          dx.at(ci, a.i1, b.i1) += static_cast<T>(a.w1 * b.w1) * gv;
        }
      }
    }
  };
  return push(std::move(n));
}

template <typename T>
int GraphT<T>::concat(const std::vector<int>& xs) {
  if (xs.empty()) throw ShapeError("concat: no inputs");
  const int h = value(xs[0]).dims[1], w = value(xs[0]).dims[2];
  int ctot = 0;
  for (int xid : xs) {
    const Tn& v = value(xid);
    if (v.dims[1] != h || v.dims[2] != w)
      throw ShapeError("concat: spatial mismatch " + v.shape_str());
    ctot += v.dims[0];
  }
  Node n;
  n.value = Tn(ctot, h, w);
  size_t off = 0;
  bool needs = false;
  for (int xid : xs) {
    const Tn& v = value(xid);
    std::copy(v.data.begin(), v.data.end(), n.value.data.begin() + static_cast<long>(off));
    off += v.data.size();
    needs = needs || wants_grad(xid);
  }
  n.needs_grad = training_ && needs;
  if (!n.needs_grad) return push(std::move(n));
  const int id = static_cast<int>(nodes_.size());
  auto parts = std::make_shared<std::vector<int>>(xs);
  n.back = [id, parts](GraphT& g) {
    const Tn& gy = g.grad_of(id);
    size_t off2 = 0;
    for (int xid : *parts) {
      const size_t len = g.value(xid).size();
      if (g.wants_grad(xid)) {
        Tn& dx = g.ensure_grad(xid);
        for (size_t i = 0; i < len; ++i) dx.data[i] += gy.data[off2 + i];
      }
      off2 += len;
    }
  };
  return push(std::move(n));
}

template <typename T>
int GraphT<T>::add(int a, int b) {
  const Tn& av = value(a);
  const Tn& bv = value(b);
  if (!av.same_shape(bv)) throw ShapeError("add: " + av.shape_str() + " vs " + bv.shape_str());
  Node n;
  n.value = Tn(av.dims);
  for (size_t i = 0; i < av.data.size(); ++i) n.value.data[i] = av.data[i] + bv.data[i];
  n.needs_grad = training_ && (wants_grad(a) || wants_grad(b));
  if (!n.needs_grad) return push(std::move(n));
  const int id = static_cast<int>(nodes_.size());
  n.back = [a, b, id](GraphT& g) {
    const Tn& gy = g.grad_of(id);
    if (g.wants_grad(a)) g.accumulate(a, gy);
    if (g.wants_grad(b)) g.accumulate(b, gy);
  };
  return push(std::move(n));
}

template <typename T>
int GraphT<T>::sub(int a, int b) {
  const Tn& av = value(a);
  const Tn& bv = value(b);
  if (!av.same_shape(bv)) throw ShapeError("sub: " + av.shape_str() + " vs " + bv.shape_str());
  Node n;
  n.value = Tn(av.dims);
  for (size_t i = 0; i < av.data.size(); ++i) n.value.data[i] = av.data[i] - bv.data[i];
  n.needs_grad = training_ && (wants_grad(a) || wants_grad(b));
  if (!n.needs_grad) return push(std::move(n));
  const int id = static_cast<int>(nodes_.size());
  n.back = [a, b, id](GraphT& g) {
    const Tn& gy = g.grad_of(id);
    if (g.wants_grad(a)) g.accumulate(a, gy);
    if (g.wants_grad(b)) {
      Tn& db = g.ensure_grad(b);
      for (size_t i = 0; i < gy.data.size(); ++i) db.data[i] -= gy.data[i];
    }
  };
  return push(std::move(n));
}

template <typename T>
int GraphT<T>::mul_broadcast(int a, int x) {
  const Tn& av = value(a);
  const Tn& xv = value(x);
  if (av.dims[0] != 1 || av.dims[1] != xv.dims[1] || av.dims[2] != xv.dims[2])
    throw ShapeError("mul_broadcast: " + av.shape_str() + " vs " + xv.shape_str());
  const int c = xv.dims[0];
  const size_t hw = static_cast<size_t>(xv.dims[1]) * xv.dims[2];
  Node n;
  n.value = Tn(xv.dims);
  for (int ci = 0; ci < c; ++ci)
    for (size_t j = 0; j < hw; ++j)
      n.value.data[static_cast<size_t>(ci) * hw + j] =
          av.data[j] * xv.data[static_cast<size_t>(ci) * hw + j];
  n.needs_grad = training_ && (wants_grad(a) || wants_grad(x));
  if (!n.needs_grad) return push(std::move(n));
  const int id = static_cast<int>(nodes_.size());
  n.back = [a, x, id, c, hw](GraphT& g) {
    const Tn& gy = g.grad_of(id);
    const Tn& av2 = g.value(a);
    const Tn& xv2 = g.value(x);
    if (g.wants_grad(a)) {
      Tn& da = g.ensure_grad(a);
      for (int ci = 0; ci < c; ++ci)
        for (size_t j = 0; j < hw; ++j)
          da.data[j] += gy.data[static_cast<size_t>(ci) * hw + j] *
                        xv2.data[static_cast<size_t>(ci) * hw + j];
    }
    if (g.wants_grad(x)) {
      Tn& dx = g.ensure_grad(x);
      for (int ci = 0; ci < c; ++ci)
        for (size_t j = 0; j < hw; ++j)
          dx.data[static_cast<size_t>(ci) * hw + j] +=
              gy.data[static_cast<size_t>(ci) * hw + j] * av2.data[j];
    }
  };
  return push(std::move(n));
}

template <typename T>
int GraphT<T>::zero_stuff2(int x) {
  const Tn& xv = value(x);
  const int c = xv.dims[0], h = xv.dims[1], w = xv.dims[2];
  Node n;
  n.value = Tn(c, 2 * h, 2 * w);
  for (int ci = 0; ci < c; ++ci)
    for (int y = 0; y < h; ++y)
      for (int xo = 0; xo < w; ++xo) n.value.at(ci, 2 * y, 2 * xo) = xv.at(ci, y, xo);
  n.needs_grad = training_ && wants_grad(x);
  if (!n.needs_grad) return push(std::move(n));
  const int id = static_cast<int>(nodes_.size());
  n.back = [x, id, c, h, w](GraphT& g) {
    const Tn& gy = g.grad_of(id);
    Tn& dx = g.ensure_grad(x);
    for (int ci = 0; ci < c; ++ci)
      for (int y = 0; y < h; ++y)
        for (int xo = 0; xo < w; ++xo) dx.at(ci, y, xo) += gy.at(ci, 2 * y, 2 * xo);
  };
  return push(std::move(n));
}

template <typename T>
int GraphT<T>::replicate_pad(int x, int py, int px) {
  const Tn& xv = value(x);
  const int c = xv.dims[0], h = xv.dims[1], w = xv.dims[2];
  const int oh = h + 2 * py, ow = w + 2 * px;
  auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
  Node n;
  n.value = Tn(c, oh, ow);
  for (int ci = 0; ci < c; ++ci)
    for (int y = 0; y < oh; ++y) {
      const int iy = clampi(y - py, h - 1);
      for (int xo = 0; xo < ow; ++xo) n.value.at(ci, y, xo) = xv.at(ci, iy, clampi(xo - px, w - 1));
    }
  n.needs_grad = training_ && wants_grad(x);
  if (!n.needs_grad) return push(std::move(n));
  const int id = static_cast<int>(nodes_.size());
  n.back = [x, id, c, h, w, py, px, oh, ow, clampi](GraphT& g) {
    const Tn& gy = g.grad_of(id);
    Tn& dx = g.ensure_grad(x);
    for (int ci = 0; ci < c; ++ci)
      for (int y = 0; y < oh; ++y) {
        const int iy = clampi(y - py, h - 1);
        for (int xo = 0; xo < ow; ++xo) dx.at(ci, iy, clampi(xo - px, w - 1)) += gy.at(ci, y, xo);
      }
  };
  return push(std::move(n));
}

namespace {

inline int mirror_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i %= period;
  if (i < 0) i += period;
  return (i < n) ? i : period - i;
}

}  // namespace

template <typename T>
int GraphT<T>::reflect_pad_br(int x, int pb, int pr) {
  const Tn& xv = value(x);
  const int c = xv.dims[0], h = xv.dims[1], w = xv.dims[2];
  const int oh = h + pb, ow = w + pr;
  Node n;
  n.value = Tn(c, oh, ow);
  for (int ci = 0; ci < c; ++ci)
    for (int y = 0; y < oh; ++y) {
      const int iy = mirror_index(y, h);
      for (int xo = 0; xo < ow; ++xo) n.value.at(ci, y, xo) = xv.at(ci, iy, mirror_index(xo, w));
    }
  n.needs_grad = training_ && wants_grad(x);
  if (!n.needs_grad) return push(std::move(n));
  const int id = static_cast<int>(nodes_.size());
  n.back = [x, id, c, h, w, oh, ow](GraphT& g) {
    const Tn& gy = g.grad_of(id);
    Tn& dx = g.ensure_grad(x);
    for (int ci = 0; ci < c; ++ci)
      for (int y = 0; y < oh; ++y) {
        const int iy = mirror_index(y, h);
        for (int xo = 0; xo < ow; ++xo) dx.at(ci, iy, mirror_index(xo, w)) += gy.at(ci, y, xo);
      }
  };
  return push(std::move(n));
}

template <typename T>
int GraphT<T>::diff_x(int x) {
  const Tn& xv = value(x);
  const int c = xv.dims[0], h = xv.dims[1], w = xv.dims[2];
  Node n;
  n.value = Tn(xv.dims);
  for (int ci = 0; ci < c; ++ci)
    for (int y = 0; y < h; ++y)
      for (int xo = 0; xo + 1 < w; ++xo)
        n.value.at(ci, y, xo) = xv.at(ci, y, xo + 1) - xv.at(ci, y, xo);
  n.needs_grad = training_ && wants_grad(x);
  if (!n.needs_grad) return push(std::move(n));
  const int id = static_cast<int>(nodes_.size());
  n.back = [x, id, c, h, w](GraphT& g) {
    const Tn& gy = g.grad_of(id);
    Tn& dx = g.ensure_grad(x);
    for (int ci = 0; ci < c; ++ci)
      for (int y = 0; y < h; ++y)
        for (int xo = 0; xo + 1 < w; ++xo) {
          const T gv = gy.at(ci, y, xo);
          dx.at(ci, y, xo + 1) += gv;
          dx.at(ci, y, xo) -= gv;
        }
  };
  return push(std::move(n));
}

template <typename T>
int GraphT<T>::diff_y(int x) {
  const Tn& xv = value(x);
  const int c = xv.dims[0], h = xv.dims[1], w = xv.dims[2];
  Node n;
  n.value = Tn(xv.dims);
  for (int ci = 0; ci < c; ++ci)
    for (int y = 0; y + 1 < h; ++y)
      for (int xo = 0; xo < w; ++xo)
        n.value.at(ci, y, xo) = xv.at(ci, y + 1, xo) - xv.at(ci, y, xo);
  n.needs_grad = training_ && wants_grad(x);
  if (!n.needs_grad) return push(std::move(n));
  const int id = static_cast<int>(nodes_.size());
  n.back = [x, id, c, h, w](GraphT& g) {
    const Tn& gy = g.grad_of(id);
    Tn& dx = g.ensure_grad(x);
    for (int ci = 0; ci < c; ++ci)
      for (int y = 0; y + 1 < h; ++y)
        for (int xo = 0; xo < w; ++xo) {
          const T gv = gy.at(ci, y, xo);
          dx.at(ci, y + 1, xo) += gv;
          dx.at(ci, y, xo) -= gv;
        }
  };
  return push(std::move(n));
}

template <typename T>
int GraphT<T>::masked_abs_mean(int x, const Tn& mask, double norm) {
  const Tn& xv = value(x);
  const bool has_mask = !mask.empty();
  const size_t hw = static_cast<size_t>(xv.dims[1]) * xv.dims[2];
  if (has_mask && mask.data.size() != hw)
    throw ShapeError("masked_abs_mean: mask " + mask.shape_str() + " vs " + xv.shape_str());

  double acc = 0.0;
  for (size_t i = 0; i < xv.data.size(); ++i) {
    const double m = has_mask ? static_cast<double>(mask.data[i % hw]) : 1.0;
    acc += m * std::abs(static_cast<double>(xv.data[i]));
  }
  Node n;
  n.value = Tn(std::vector<int>{1});
  n.value.data[0] = static_cast<T>(acc / norm);
  n.needs_grad = training_ && wants_grad(x);
  if (!n.needs_grad) return push(std::move(n));
  const int id = static_cast<int>(nodes_.size());
  auto mk = std::make_shared<Tn>(mask);
  n.back = [x, id, mk, norm, hw, has_mask](GraphT& g) {
    const T gout = g.grad_of(id).data[0];
    const Tn& xv2 = g.value(x);
    Tn& dx = g.ensure_grad(x);
    const double eps2 = kAbsEps * kAbsEps;
    for (size_t i = 0; i < xv2.data.size(); ++i) {
      const double m = has_mask ? static_cast<double>(mk->data[i % hw]) : 1.0;
      if (m == 0.0) continue;
      const double r = static_cast<double>(xv2.data[i]);
      const double dsmooth = r / std::sqrt(r * r + eps2);
      dx.data[i] += static_cast<T>(gout * m * dsmooth / norm);
    }
  };
  return push(std::move(n));
}

template <typename T>
int GraphT<T>::abs_mean(int x, double norm) {
  return masked_abs_mean(x, Tn(), norm);
}

template <typename T>
int GraphT<T>::scalar_const(T v) {
  Tn t(std::vector<int>{1});
  t.data[0] = v;
  return leaf(std::move(t));
}

template <typename T>
int GraphT<T>::weighted_sum(const std::vector<int>& xs, const std::vector<T>& weights) {
  if (xs.size() != weights.size()) throw ShapeError("weighted_sum: size mismatch");
  Node n;
  n.value = Tn(std::vector<int>{1});
  T acc = T(0);
  bool needs = false;
  for (size_t i = 0; i < xs.size(); ++i) {
    acc += weights[i] * scalar(xs[i]);
    needs = needs || wants_grad(xs[i]);
  }
  n.value.data[0] = acc;
  n.needs_grad = training_ && needs;
  if (!n.needs_grad) return push(std::move(n));
  const int id = static_cast<int>(nodes_.size());
  auto parts = std::make_shared<std::vector<int>>(xs);
  auto ws = std::make_shared<std::vector<T>>(weights);
  n.back = [id, parts, ws](GraphT& g) {
    const T gout = g.grad_of(id).data[0];
    for (size_t i = 0; i < parts->size(); ++i) {
      if (!g.wants_grad((*parts)[i])) continue;
      g.ensure_grad((*parts)[i]).data[0] += gout * (*ws)[i];
    }
  };
  return push(std::move(n));
}

template <typename T>
void GraphT<T>::backward(int root, T seed) {
  if (!training_) throw Error("backward() on an inference graph");
  Tn& g = ensure_grad(root);
  if (g.size() != 1) throw ShapeError("backward root must be scalar");
  g.data[0] += seed;
  for (int i = root; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (!n.needs_grad || n.grad.empty() || !n.back) continue;
    n.back(*this);
  }
  for (auto& n : nodes_) {
    if (n.external && !n.grad.empty()) {
      for (size_t i = 0; i < n.grad.data.size(); ++i) n.external->grad.data[i] += n.grad.data[i];
    }
  }
}

template <typename T>
TensorT<T> binomial5_kernel(T gain) {
  const T taps[5] = {T(1) / 16, T(4) / 16, T(6) / 16, T(4) / 16, T(1) / 16};
  TensorT<T> k({1, 1, 5, 5});
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) k.data[static_cast<size_t>(y) * 5 + x] = gain * taps[y] * taps[x];
  return k;
}

template class GraphT<float>;
template class GraphT<double>;
template TensorT<float> binomial5_kernel<float>(float);
template TensorT<double> binomial5_kernel<double>(double);

}  // namespace i2gfp
