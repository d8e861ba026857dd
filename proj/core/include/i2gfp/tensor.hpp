#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "i2gfp/error.hpp"

namespace i2gfp {

// Dense row-major tensor. Activations are {c,h,w}, conv weights
// {out,in,kh,kw}, biases {out}, scalars {1}.
template <typename T>
struct TensorT {
  std::vector<int> dims;
  std::vector<T> data;

  TensorT() = default;
  explicit TensorT(std::vector<int> d) : dims(std::move(d)), data(count(dims), T(0)) {}
  TensorT(int c, int h, int w) : TensorT(std::vector<int>{c, h, w}) {}

  static size_t count(const std::vector<int>& d) {
    size_t n = 1;
    for (int v : d) n *= static_cast<size_t>(v);
    return n;
  }

  size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  int dim(int i) const { return dims[static_cast<size_t>(i)]; }
  int rank() const { return static_cast<int>(dims.size()); }

  // {c,h,w} accessors for activation tensors.
  int c() const { return dims[0]; }
  int h() const { return dims[1]; }
  int w() const { return dims[2]; }
  T& at(int ci, int y, int x) { return data[(static_cast<size_t>(ci) * dims[1] + y) * dims[2] + x]; }
  T at(int ci, int y, int x) const {
    return data[(static_cast<size_t>(ci) * dims[1] + y) * dims[2] + x];
  }

  void set_zero() { std::fill(data.begin(), data.end(), T(0)); }

  bool same_shape(const TensorT& o) const { return dims == o.dims; }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < dims.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(dims[i]);
    }
    return s + "]";
  }
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

template <typename To, typename From>
TensorT<To> tensor_cast(const TensorT<From>& in) {
  TensorT<To> out(in.dims);
  for (size_t i = 0; i < in.data.size(); ++i) out.data[i] = static_cast<To>(in.data[i]);
  return out;
}

// Learnable tensor plus its gradient accumulator.
template <typename T>
struct ParamT {
  TensorT<T> value;
  TensorT<T> grad;

  explicit ParamT(std::vector<int> d = {}) : value(std::move(d)), grad(value.dims) {}
  void zero_grad() { grad.set_zero(); }
};

// Insertion-ordered parameter registry keyed by layer path.
template <typename T>
class ParamSetT {
 public:
  ParamT<T>& add(const std::string& name, std::vector<int> dims) {
    if (index_.count(name)) throw Error("duplicate parameter " + name);
    items_.emplace_back(name, ParamT<T>(std::move(dims)));
    index_[name] = items_.size() - 1;
    return items_.back().second;
  }

  ParamT<T>* find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &items_[it->second].second;
  }
  const ParamT<T>* find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &items_[it->second].second;
  }

  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  size_t size() const { return items_.size(); }

  size_t scalar_count() const {
    size_t n = 0;
    for (const auto& [name, p] : items_) n += p.value.size();
    return n;
  }

  void zero_grads() {
    for (auto& [name, p] : items_) p.zero_grad();
  }

 private:
  std::vector<std::pair<std::string, ParamT<T>>> items_;
  std::unordered_map<std::string, size_t> index_;
};

}  // namespace i2gfp
