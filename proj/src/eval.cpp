#include "lvad/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace lvad {

double auroc(std::span<const double> scores, std::span<const uint8_t> labels) {
  require(scores.size() == labels.size(), Errc::invalid_dimension,
          "auroc: scores and labels differ in length");
  size_t pos = 0;
  for (uint8_t l : labels) pos += l ? 1 : 0;
  const size_t neg = labels.size() - pos;
  require(pos > 0 && neg > 0, Errc::degenerate_labels,
          "auroc: both classes must be present (positives=" + std::to_string(pos) +
              ", negatives=" + std::to_string(neg) + ")");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Midranks over tied blocks; sum the positive ranks.
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * double(i + 1 + j + 1);
    for (size_t k = i; k <= j; ++k)
      if (labels[order[k]]) pos_rank_sum += midrank;
    i = j + 1;
  }
  const double u = pos_rank_sum - double(pos) * double(pos + 1) / 2.0;
  return u / (double(pos) * double(neg));
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  char line[160];
  os << "scope                 frames  positives  auroc_raw  auroc_smoothed\n";
  std::snprintf(line, sizeof line, "%-20s %7llu %10llu %10.4f %15.4f\n", "total",
                (unsigned long long)frames, (unsigned long long)positives, auroc_raw,
                auroc_smoothed);
  os << line;
  for (const auto& c : categories) {
    std::snprintf(line, sizeof line, "%-20s %7llu %10llu %10.4f %15.4f\n", c.name.c_str(),
                  (unsigned long long)c.frames, (unsigned long long)c.positives, c.auroc_raw,
                  c.auroc_smoothed);
    os << line;
  }
  for (const auto& w : warnings) os << "warning: " << w << "\n";
  return os.str();
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  char line[256];
  os << "scope,frames,positives,auroc_raw,auroc_smoothed\n";
  std::snprintf(line, sizeof line, "total,%llu,%llu,%.17g,%.17g\n", (unsigned long long)frames,
                (unsigned long long)positives, auroc_raw, auroc_smoothed);
  os << line;
  for (const auto& c : categories) {
    std::snprintf(line, sizeof line, "%s,%llu,%llu,%.17g,%.17g\n", c.name.c_str(),
                  (unsigned long long)c.frames, (unsigned long long)c.positives, c.auroc_raw,
                  c.auroc_smoothed);
    os << line;
  }
  return os.str();
}

}  // namespace lvad
