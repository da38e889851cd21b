#include "frnet/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "frnet/autograd.hpp"

namespace frnet {

namespace {

thread_local bool g_grad_enabled = true;

detail::Storage make_storage(DType dtype, std::size_t n, double value) {
  if (dtype == DType::Float64) return std::vector<double>(n, value);
  return std::vector<float>(n, static_cast<float>(value));
}

void validate_shape(const Shape& shape) {
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] < 0) {
      throw ConfigError("negative extent " + std::to_string(shape[i]) +
                        " at axis " + std::to_string(i));
    }
  }
}

}  // namespace

std::string_view dtype_name(DType dtype) {
  return dtype == DType::Float64 ? "float64" : "float32";
}

std::int64_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::int64_t{1},
                         std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

bool grad_enabled() noexcept { return g_grad_enabled; }

NoGradGuard::NoGradGuard() noexcept : previous_(g_grad_enabled) {
  g_grad_enabled = false;
}

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor::Tensor(std::shared_ptr<detail::TensorImpl> impl)
    : impl_(std::move(impl)) {}

Tensor Tensor::zeros(Shape shape, DType dtype) {
  return full(std::move(shape), 0.0, dtype);
}

Tensor Tensor::full(Shape shape, double value, DType dtype) {
  validate_shape(shape);
  auto impl = std::make_shared<detail::TensorImpl>();
  const auto n = static_cast<std::size_t>(shape_numel(shape));
  impl->shape = std::move(shape);
  impl->dtype = dtype;
  impl->values = make_storage(dtype, n, value);
  return Tensor(std::move(impl));
}

namespace {

template <typename T>
Tensor from_vector(Shape shape, std::vector<T> values) {
  validate_shape(shape);
  if (static_cast<std::int64_t>(values.size()) != shape_numel(shape)) {
    throw DimensionError("from_data: buffer holds " +
                             std::to_string(values.size()) +
                             " values but shape " + shape_to_string(shape) +
                             " needs " + std::to_string(shape_numel(shape)),
                         "numel");
  }
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = std::move(shape);
  impl->dtype = dtype_of<T>();
  impl->values = std::move(values);
  return Tensor(std::move(impl));
}

}  // namespace

Tensor Tensor::from_data(Shape shape, std::vector<float> values) {
  return from_vector(std::move(shape), std::move(values));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> values) {
  return from_vector(std::move(shape), std::move(values));
}

void Tensor::require_defined() const {
  if (!impl_) throw ContractError("operation on an undefined tensor");
}

const Shape& Tensor::shape() const {
  require_defined();
  return impl_->shape;
}

std::int64_t Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) +
                             " out of range for rank " +
                             std::to_string(s.size()),
                         "rank");
  }
  return s[axis];
}

std::int64_t Tensor::numel() const { return shape_numel(shape()); }

DType Tensor::dtype() const {
  require_defined();
  return impl_->dtype;
}

double Tensor::value(std::int64_t flat_index) const {
  require_defined();
  return std::visit(
      [&](const auto& v) -> double {
        return static_cast<double>(v.at(static_cast<std::size_t>(flat_index)));
      },
      impl_->values);
}

double Tensor::item() const {
  if (numel() != 1) {
    throw ContractError("item() on tensor of shape " +
                        shape_to_string(shape()));
  }
  return value(0);
}

std::vector<double> Tensor::to_vector() const {
  require_defined();
  return std::visit(
      [](const auto& v) { return std::vector<double>(v.begin(), v.end()); },
      impl_->values);
}

bool Tensor::requires_grad() const {
  require_defined();
  return impl_->requires_grad;
}

Tensor& Tensor::set_requires_grad(bool on) {
  require_defined();
  if (!on && impl_->node) {
    throw ContractError("cannot clear requires_grad on a non-leaf tensor");
  }
  impl_->requires_grad = on;
  return *this;
}

bool Tensor::is_leaf() const {
  require_defined();
  return impl_->node == nullptr;
}

bool Tensor::has_grad() const {
  require_defined();
  return impl_->has_grad;
}

Tensor Tensor::grad_tensor() const {
  require_defined();
  if (!impl_->has_grad) return zeros(impl_->shape, impl_->dtype);
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = impl_->shape;
  impl->dtype = impl_->dtype;
  impl->values = impl_->grad;
  return Tensor(std::move(impl));
}

void Tensor::zero_grad() {
  require_defined();
  if (!impl_->has_grad) return;
  std::visit([](auto& g) { std::fill(g.begin(), g.end(), 0); }, impl_->grad);
}

Tensor Tensor::clone() const {
  require_defined();
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = impl_->shape;
  impl->dtype = impl_->dtype;
  impl->values = impl_->values;
  return Tensor(std::move(impl));
}

namespace {

detail::Storage convert_storage(const detail::Storage& src, DType dtype) {
  return std::visit(
      [&](const auto& v) -> detail::Storage {
        if (dtype == DType::Float64) {
          return std::vector<double>(v.begin(), v.end());
        }
        std::vector<float> out(v.size());
        std::transform(v.begin(), v.end(), out.begin(),
                       [](auto x) { return static_cast<float>(x); });
        return out;
      },
      src);
}

}  // namespace

Tensor Tensor::to(DType dtype) const {
  require_defined();
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = impl_->shape;
  impl->dtype = dtype;
  impl->values = convert_storage(impl_->values, dtype);
  return Tensor(std::move(impl));
}

void Tensor::convert_(DType dtype) {
  require_defined();
  if (impl_->dtype == dtype) return;
  if (impl_->node) throw ContractError("convert_ on a non-leaf tensor");
  impl_->values = convert_storage(impl_->values, dtype);
  if (impl_->has_grad) impl_->grad = convert_storage(impl_->grad, dtype);
  impl_->dtype = dtype;
}

void Tensor::copy_values_from(const Tensor& other) {
  require_defined();
  if (other.shape() != impl_->shape) {
    throw DimensionError("copy_values_from: shape " +
                             shape_to_string(other.shape()) + " vs " +
                             shape_to_string(impl_->shape),
                         "shape");
  }
  impl_->values = convert_storage(other.impl()->values, impl_->dtype);
}

namespace autograd {

bool attach(Tensor& out, std::vector<Tensor> inputs, std::string op,
            BackwardFn backward) {
  if (!grad_enabled()) return false;
  const bool any = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) {
    return t.defined() && t.requires_grad();
  });
  if (!any) return false;
  auto node = std::make_shared<detail::Node>();
  node->op = std::move(op);
  node->inputs = std::move(inputs);
  node->backward = std::move(backward);
  out.impl()->node = std::move(node);
  out.impl()->requires_grad = true;
  return true;
}

}  // namespace autograd

void Tensor::backward() const {
  require_defined();
  if (numel() != 1) {
    throw ContractError("backward() requires a scalar loss, got shape " +
                        shape_to_string(shape()));
  }
  if (!impl_->requires_grad) {
    throw ContractError("backward() on a tensor that does not require grad");
  }

  // Post-order DFS gives a topological order with inputs before consumers.
  std::vector<std::shared_ptr<detail::TensorImpl>> order;
  std::unordered_set<const detail::TensorImpl*> seen;
  std::vector<std::pair<std::shared_ptr<detail::TensorImpl>, std::size_t>>
      stack;
  stack.emplace_back(impl_, 0);
  seen.insert(impl_.get());
  while (!stack.empty()) {
    auto& [impl, next] = stack.back();
    const auto* node = impl->node.get();
    if (node && next < node->inputs.size()) {
      const auto& in = node->inputs[next++];
      if (in.defined() && in.requires_grad() &&
          seen.insert(in.impl()).second) {
        stack.emplace_back(in.impl_ptr(), 0);
      }
      continue;
    }
    order.push_back(impl);
    stack.pop_back();
  }

  for (auto& t : order) {
    if (t->node) t->has_grad = false;
  }
  dispatch(impl_->dtype, [&](auto tag) {
    using T = decltype(tag);
    autograd::grad_buffer<T>(*this)[0] += T(1);
  });

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto& t = *it;
    if (!t->node || !t->has_grad) continue;
    t->node->backward(Tensor(t));
    // Intermediate gradients are only needed while propagating.
    t->has_grad = false;
    t->grad = detail::Storage{};
  }
}

}  // namespace frnet
