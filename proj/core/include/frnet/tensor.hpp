#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "frnet/error.hpp"

namespace frnet {

enum class DType { Float32, Float64 };

std::string_view dtype_name(DType dtype);

template <typename T>
constexpr DType dtype_of() {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>,
                "tensors hold float or double");
  return std::is_same_v<T, float> ? DType::Float32 : DType::Float64;
}

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

class Tensor;

namespace detail {

using Storage = std::variant<std::vector<float>, std::vector<double>>;

struct Node;

struct TensorImpl {
  Shape shape;
  DType dtype = DType::Float32;
  Storage values;
  Storage grad;
  bool has_grad = false;
  bool requires_grad = false;
  std::shared_ptr<Node> node;  // null for leaves
};

}  // namespace detail

// Dense row-major tensor (NCHW for images). A Tensor is a shared handle:
// copies alias the same buffer and graph node, `clone()` makes a deep copy.
//
// Tensors that require grad and were produced by an operation while grad
// mode was enabled carry a node of the reverse-mode graph; `backward()` on
// a scalar result accumulates d(loss)/d(leaf) into every reachable leaf.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl);

  static Tensor zeros(Shape shape, DType dtype = DType::Float32);
  static Tensor full(Shape shape, double value, DType dtype = DType::Float32);
  static Tensor from_data(Shape shape, std::vector<float> values);
  static Tensor from_data(Shape shape, std::vector<double> values);

  bool defined() const noexcept { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::int64_t dim(std::size_t axis) const;
  std::int64_t numel() const;
  DType dtype() const;

  template <typename T>
  std::span<T> data();
  template <typename T>
  std::span<const T> data() const;

  // Element access converted to double, for tests and reporting.
  double value(std::int64_t flat_index) const;
  double item() const;
  std::vector<double> to_vector() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on);
  bool is_leaf() const;
  bool has_grad() const;
  template <typename T>
  std::span<const T> grad() const;
  // Copy of the gradient buffer (zeros when no gradient was accumulated).
  Tensor grad_tensor() const;
  void zero_grad();

  // Reverse-mode sweep from this scalar. Gradients of leaves accumulate
  // across calls; intermediate gradients are recomputed on every call.
  void backward() const;

  Tensor clone() const;  // deep copy of values, detached from the graph
  Tensor detach() const { return clone(); }
  Tensor to(DType dtype) const;

  // In-place mutation shared by every handle to this tensor.
  void convert_(DType dtype);
  void copy_values_from(const Tensor& other);

  detail::TensorImpl* impl() const noexcept { return impl_.get(); }
  const std::shared_ptr<detail::TensorImpl>& impl_ptr() const noexcept {
    return impl_;
  }

 private:
  void require_defined() const;

  std::shared_ptr<detail::TensorImpl> impl_;
};

template <typename T>
std::span<T> Tensor::data() {
  require_defined();
  if (impl_->dtype != dtype_of<T>()) {
    throw ContractError("tensor dtype is " +
                        std::string(dtype_name(impl_->dtype)) +
                        ", requested " +
                        std::string(dtype_name(dtype_of<T>())));
  }
  return std::get<std::vector<T>>(impl_->values);
}

template <typename T>
std::span<const T> Tensor::data() const {
  return const_cast<Tensor*>(this)->data<T>();
}

template <typename T>
std::span<const T> Tensor::grad() const {
  require_defined();
  if (!impl_->has_grad) return {};
  return std::get<std::vector<T>>(impl_->grad);
}

using NamedTensor = std::pair<std::string, Tensor>;

// Calls `fn(T{})` with T = float or double according to `dtype`.
template <typename F>
decltype(auto) dispatch(DType dtype, F&& fn) {
  if (dtype == DType::Float64) return fn(double{});
  return fn(float{});
}

}  // namespace frnet
