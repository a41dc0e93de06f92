#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lvad/common.hpp"

namespace lvad {

// Rank-based AUROC with midrank tie handling: the probability that a random
// positive outranks a random negative. Throws DegenerateLabels unless both
// classes are present.
double auroc(std::span<const double> scores, std::span<const uint8_t> labels);

struct CategoryResult {
  std::string name;
  double auroc_raw = 0;
  double auroc_smoothed = 0;
  uint64_t frames = 0;
  uint64_t positives = 0;
};

struct EvalReport {
  double auroc_raw = 0;
  double auroc_smoothed = 0;
  uint64_t frames = 0;
  uint64_t positives = 0;
  std::vector<CategoryResult> categories;
  std::vector<std::string> warnings;

  std::string to_table() const;  // human-readable
  std::string to_csv() const;    // machine-readable
};

}  // namespace lvad
