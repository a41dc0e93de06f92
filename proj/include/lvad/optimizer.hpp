#pragma once

#include <functional>
#include <vector>

#include "lvad/params.hpp"

namespace lvad {

struct AdamWConfig {
  double base_lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;
  uint64_t horizon = 1;  // total steps of the cosine schedule
};

// AdamW with decoupled weight decay and cosine annealing from base_lr to 0.
class AdamW {
 public:
  AdamW(ParamStore& params, AdamWConfig cfg);

  // Learning rate used by the update at `step` (0-based).
  double lr_at(uint64_t step) const;

  // Applies one update from the gradients currently in the store.
  void step();

  uint64_t step_count() const { return step_; }
  const AdamWConfig& config() const { return cfg_; }

  // Serialized state access (see checkpoint.cpp).
  std::vector<Mat>& first_moments() { return m_; }
  std::vector<Mat>& second_moments() { return v_; }
  const std::vector<Mat>& first_moments() const { return m_; }
  const std::vector<Mat>& second_moments() const { return v_; }
  void set_step_count(uint64_t s) { step_ = s; }

 private:
  ParamStore& params_;
  AdamWConfig cfg_;
  uint64_t step_ = 0;
  std::vector<Mat> m_, v_;
};

// Report from comparing reverse-mode gradients against central differences.
struct FiniteDiffEntry {
  std::string name;
  double max_rel_err = 0.0;
  double max_abs_grad = 0.0;
};

struct FiniteDiffReport {
  std::vector<FiniteDiffEntry> per_parameter;
  double max_rel_err = 0.0;
  std::string to_text() const;
};

// Central-difference verification of the gradients left in `params` by a
// prior backward pass. `fn` must re-evaluate the scalar objective from the
// current parameter values deterministically. Relative error uses a
// max(|analytic|, |fd|, 1e-12) denominator.
FiniteDiffReport finite_diff_check(const std::function<double()>& fn, ParamStore& params,
                                   double step);

}  // namespace lvad
