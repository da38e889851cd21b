#include "frnet/module.hpp"

namespace frnet {

Tensor Module::forward(const Tensor&) {
  throw ContractError("module has no single-input forward");
}

void Module::check_unique(const std::string& name) const {
  if (name.empty() || name.find('.') != std::string::npos) {
    throw ConfigError("invalid registry name '" + name + "'");
  }
  auto clash = [&](const auto& list) {
    for (const auto& entry : list) {
      if (entry.first == name) return true;
    }
    return false;
  };
  if (clash(params_) || clash(buffers_) || clash(children_)) {
    throw ConfigError("duplicate registry name '" + name + "'");
  }
}

Tensor Module::register_parameter(std::string name, Tensor value) {
  check_unique(name);
  value.set_requires_grad(true);
  params_.emplace_back(std::move(name), value);
  return value;
}

Tensor Module::register_buffer(std::string name, Tensor value) {
  check_unique(name);
  buffers_.emplace_back(std::move(name), value);
  return value;
}

void Module::add_child(std::string name, std::unique_ptr<Module> child) {
  check_unique(name);
  child->train(training_);
  children_.emplace_back(std::move(name), std::move(child));
}

void Module::collect(const std::string& prefix, bool buffers,
                     std::vector<NamedTensor>& out) const {
  for (const auto& [name, t] : buffers ? buffers_ : params_) {
    out.emplace_back(prefix + name, t);
  }
  for (const auto& [name, child] : children_) {
    child->collect(prefix + name + ".", buffers, out);
  }
}

std::vector<NamedTensor> Module::named_parameters() const {
  std::vector<NamedTensor> out;
  collect("", false, out);
  return out;
}

std::vector<NamedTensor> Module::named_buffers() const {
  std::vector<NamedTensor> out;
  collect("", true, out);
  return out;
}

std::vector<Tensor> Module::parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

void Module::train(bool on) {
  training_ = on;
  for (auto& [name, child] : children_) child->train(on);
}

void Module::to(DType dtype) {
  for (auto& [name, t] : named_parameters()) t.convert_(dtype);
  for (auto& [name, t] : named_buffers()) t.convert_(dtype);
}

void Module::zero_grad() {
  for (auto& t : parameters()) t.zero_grad();
}

std::int64_t param_count(const Module& module) {
  std::int64_t total = 0;
  for (const auto& [name, t] : module.named_parameters()) total += t.numel();
  return total;
}

}  // namespace frnet
