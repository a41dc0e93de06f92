#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "lvad/common.hpp"

namespace lvad {

// A named differentiable value with a gradient slot of the same shape.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;
  bool trainable = true;
  // AdamW decoupled decay applies only where this is set: weight matrices
  // and the positional table, never biases, norm scale/shift, or curvature.
  bool weight_decay = false;

  void zero_grad() { grad.setZero(); }
};

// Ordered registry of parameters. Order is creation order and is the
// serialization order, which keeps checkpoints byte-stable.
class ParamStore {
 public:
  Parameter& add(const std::string& name, Mat init, bool trainable, bool decay) {
    require(by_name_.find(name) == by_name_.end(), Errc::invalid_argument,
            "duplicate parameter name: " + name);
    auto p = std::make_unique<Parameter>();
    p->name = name;
    p->grad = Mat::Zero(init.rows(), init.cols());
    p->value = std::move(init);
    p->trainable = trainable;
    p->weight_decay = decay;
    items_.push_back(std::move(p));
    by_name_[name] = items_.back().get();
    return *items_.back();
  }

  Parameter* find(const std::string& name) {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second;
  }
  const Parameter* find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second;
  }

  size_t count() const { return items_.size(); }
  Parameter& at(size_t i) { return *items_[i]; }
  const Parameter& at(size_t i) const { return *items_[i]; }

  void zero_grads() {
    for (auto& p : items_) p->zero_grad();
  }

  uint64_t trainable_scalars() const {
    uint64_t n = 0;
    for (const auto& p : items_)
      if (p->trainable) n += uint64_t(p->value.size());
    return n;
  }

 private:
  std::vector<std::unique_ptr<Parameter>> items_;
  std::unordered_map<std::string, Parameter*> by_name_;
};

}  // namespace lvad
