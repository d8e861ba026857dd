#pragma once

#include <functional>
#include <vector>

#include "i2gfp/tensor.hpp"

namespace i2gfp {

// Reverse-mode tape over TensorT ops. One graph per forward pass; ops append
// nodes and the recorded order doubles as the topological order for
// backward(). Single-threaded by design so gradient accumulation order is
// fixed and runs are bit-reproducible.
//
// Instantiated for float (training/inference) and double (the
// finite-difference gradient audit, where float rounding would drown the
// comparison).
template <typename T>
class GraphT {
 public:
  using Tn = TensorT<T>;

  // When training is false no backward closures or caches are kept;
  // values are identical either way.
  explicit GraphT(bool training = true) : training_(training) {}

  GraphT(const GraphT&) = delete;
  GraphT& operator=(const GraphT&) = delete;

  int leaf(Tn value);             // constant; no gradient
  int param(ParamT<T>& p);        // learnable leaf; grads flush into p.grad

  // b < 0 means no bias.
  int conv2d(int x, int w, int b, int stride_y, int stride_x, int pad_y, int pad_x);
  // Convolution with a constant kernel {co,ci,kh,kw}; gradient flows to x only.
  int conv2d_fixed(int x, Tn kernel, int stride_y, int stride_x, int pad_y, int pad_x);

  int relu(int x);
  int sigmoid(int x);
  int maxpool2(int x);  // 2x2, stride 2; requires even spatial dims
  int resize_bilinear(int x, int oh, int ow);
  int concat(const std::vector<int>& xs);
  int add(int a, int b);
  int sub(int a, int b);
  // out[c] = a[0] * x[c] with a shaped {1,h,w}.
  int mul_broadcast(int a, int x);
  int zero_stuff2(int x);                     // {c,h,w} -> {c,2h,2w}, zeros between samples
  int replicate_pad(int x, int py, int px);
  int reflect_pad_br(int x, int pb, int pr);  // mirror-pad bottom/right, edge not repeated
  int diff_x(int x);  // forward difference, replicate boundary (last column 0)
  int diff_y(int x);

  // Scalar reductions. Forward uses the exact absolute value; the backward
  // derivative is r/sqrt(r^2+eps^2) with eps=1e-6 so |.| kinks carry
  // subgradient 0. mask is {1,h,w} (broadcast over channels) or empty for
  // the whole domain.
  int masked_abs_mean(int x, const Tn& mask, double norm);
  int abs_mean(int x, double norm);

  int scalar_const(T v);
  // Weighted sum of scalar nodes.
  int weighted_sum(const std::vector<int>& xs, const std::vector<T>& weights);

  void backward(int root, T seed = T(1));

  const Tn& value(int id) const { return nodes_[static_cast<size_t>(id)].value; }
  const Tn& grad_of(int id) const { return nodes_[static_cast<size_t>(id)].grad; }
  T scalar(int id) const { return nodes_[static_cast<size_t>(id)].value.data[0]; }
  size_t node_count() const { return nodes_.size(); }

  static constexpr double kAbsEps = 1e-6;

 private:
  struct Node {
    Tn value;
    Tn grad;
    bool needs_grad = false;
    ParamT<T>* external = nullptr;
    std::function<void(GraphT&)> back;
  };

  int push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }
  bool wants_grad(int id) const { return nodes_[static_cast<size_t>(id)].needs_grad; }
  Tn& ensure_grad(int id);
  void accumulate(int id, const Tn& g);

  std::vector<Node> nodes_;
  bool training_;
};

using Graph = GraphT<float>;
using GraphD = GraphT<double>;

// 5-tap binomial kernel (1,4,6,4,1)/16 as a {c,c,5,5}-shaped depthwise-style
// dense kernel is wasteful; pyramids run per channel on {1,h,w} maps, so the
// kernel is {1,1,5,5}.
template <typename T>
TensorT<T> binomial5_kernel(T gain = T(1));

}  // namespace i2gfp
