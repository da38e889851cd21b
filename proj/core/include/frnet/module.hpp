#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "frnet/tensor.hpp"

namespace frnet {

// A node of the parameter tree. Parameters and buffers are registered under
// a local name; the qualified path ("blocks.3.dw.weight") is unique in the
// tree. Registry order is depth-first in registration order and defines the
// checkpoint layout.
class Module {
 public:
  Module() = default;
  virtual ~Module() = default;
  Module(const Module&) = delete;
  Module& operator=(const Module&) = delete;

  virtual Tensor forward(const Tensor& x);
  Tensor operator()(const Tensor& x) { return forward(x); }

  std::vector<NamedTensor> named_parameters() const;
  std::vector<NamedTensor> named_buffers() const;
  std::vector<Tensor> parameters() const;

  void train(bool on = true);
  void eval() { train(false); }
  bool is_training() const noexcept { return training_; }

  // Converts every parameter and buffer in place.
  void to(DType dtype);
  void zero_grad();

 protected:
  Tensor register_parameter(std::string name, Tensor value);
  Tensor register_buffer(std::string name, Tensor value);

  template <typename M>
  M& register_module(std::string name, std::unique_ptr<M> child) {
    M& ref = *child;
    add_child(std::move(name), std::move(child));
    return ref;
  }

 private:
  void add_child(std::string name, std::unique_ptr<Module> child);
  void check_unique(const std::string& name) const;
  void collect(const std::string& prefix, bool buffers,
               std::vector<NamedTensor>& out) const;

  std::vector<NamedTensor> params_;
  std::vector<NamedTensor> buffers_;
  std::vector<std::pair<std::string, std::unique_ptr<Module>>> children_;
  bool training_ = true;
};

// Sum of element counts over all parameters (buffers excluded).
std::int64_t param_count(const Module& module);

}  // namespace frnet
