#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "lvad/config.hpp"
#include "lvad/eval.hpp"
#include "lvad/rng.hpp"

using namespace lvad;

namespace {

// Exhaustive positive/negative pair enumeration with half-credit ties.
double auroc_bruteforce(const std::vector<double>& scores, const std::vector<uint8_t>& labels) {
  double wins = 0;
  uint64_t pairs = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / double(pairs);
}

}  // namespace

TEST_CASE("auroc examples") {
  std::vector<double> s1{0.9, 0.8, 0.2, 0.1};
  std::vector<uint8_t> l1{1, 1, 0, 0};
  CHECK(auroc(s1, l1) == doctest::Approx(1.0));

  std::vector<double> s2{0.5, 0.5, 0.5, 0.5};
  std::vector<uint8_t> l2{1, 0, 1, 0};
  CHECK(auroc(s2, l2) == doctest::Approx(0.5));

  std::vector<double> s3{0.1, 0.9, 0.5, 0.7};
  std::vector<uint8_t> l3{0, 1, 0, 1};
  CHECK(auroc(s3, l3) == doctest::Approx(1.0));
  CHECK(auroc_bruteforce(s3, l3) == doctest::Approx(1.0));
}

TEST_CASE("auroc equals exhaustive pair enumeration on random instances") {
  Rng rng(2718);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + int(rng.uniform_index(150));
    std::vector<double> scores(size_t(n));
    std::vector<uint8_t> labels(size_t(n));
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      // Quantized scores force plenty of ties.
      scores[size_t(i)] = std::floor(rng.uniform(0, 8)) / 8.0;
      labels[size_t(i)] = uint8_t(rng.uniform01() < 0.4 ? 1 : 0);
      (labels[size_t(i)] ? has_pos : has_neg) = true;
    }
    if (!has_pos) labels[0] = 1;
    if (!has_neg) labels[size_t(n - 1)] = 0;
    CHECK(std::abs(auroc(scores, labels) - auroc_bruteforce(scores, labels)) < 1e-12);
  }
}

TEST_CASE("auroc invariances") {
  Rng rng(31415);
  const int n = 200;
  std::vector<double> scores(n);
  std::vector<uint8_t> labels(n);
  for (int i = 0; i < n; ++i) {
    scores[size_t(i)] = rng.normal();
    labels[size_t(i)] = uint8_t(i % 3 == 0);
  }

  SUBCASE("invariant under strictly increasing transforms") {
    std::vector<double> warped(n);
    for (int i = 0; i < n; ++i) warped[size_t(i)] = std::exp(2.0 * scores[size_t(i)]) + 5.0;
    CHECK(auroc(scores, labels) == doctest::Approx(auroc(warped, labels)).epsilon(1e-12));
  }

  SUBCASE("negating scores complements the value") {
    std::vector<double> neg(n);
    for (int i = 0; i < n; ++i) neg[size_t(i)] = -scores[size_t(i)];
    CHECK(auroc(scores, labels) + auroc(neg, labels) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("auroc rejects single-class inputs") {
  std::vector<double> s{0.1, 0.2};
  std::vector<uint8_t> ones{1, 1}, zeros{0, 0};
  CHECK_THROWS_WITH_AS(auroc(s, ones), doctest::Contains("DegenerateLabels"), Error);
  CHECK_THROWS_WITH_AS(auroc(s, zeros), doctest::Contains("DegenerateLabels"), Error);
}

TEST_CASE("config parsing") {
  SUBCASE("defaults parse and validate") {
    ExperimentConfig cfg = parse_config_text(default_config_text());
    CHECK(cfg.model.space == Space::hyperbolic);
    CHECK(cfg.model.loss == LossKind::lorentzian);
    CHECK(cfg.model.channels == 256);
    CHECK(cfg.model.heads == 8);
    CHECK(cfg.train.window == 10);
    CHECK(cfg.foreground_mask.size() == 6);
    CHECK(cfg.foreground_mask[0].first == "K");
  }

  SUBCASE("text is preserved verbatim") {
    const std::string text = default_config_text();
    CHECK(parse_config_text(text).text == text);
  }

  SUBCASE("heads must divide channels + 1") {
    std::string text =
        "[model]\nchannels = 16\nheads = 4\nlayers = 1\nframes = 2\npoints = 8\n"
        "[train]\n[data]\ntrain_frames = 4\ntest_frames = 16\n";
    CHECK_THROWS_WITH_AS(parse_config_text(text), doctest::Contains("InvalidConfig"), Error);
  }

  SUBCASE("unknown keys are refused outside the passthrough section") {
    CHECK_THROWS_WITH_AS(parse_config_text("[model]\nbogus = 1\n"),
                         doctest::Contains("InvalidConfig"), Error);
    ExperimentConfig ok = parse_config_text(default_config_text() + "\n[foreground_mask]\nzzz = 9\n");
    CHECK(ok.foreground_mask.back().first == "zzz");
  }

  SUBCASE("euclidean ablation flags flip cleanly") {
    std::string text = default_config_text();
    auto flip = [&](const std::string& from, const std::string& to) {
      const auto at = text.find(from);
      REQUIRE(at != std::string::npos);
      text = text.substr(0, at) + to + text.substr(at + from.size());
    };
    flip("space = hyperbolic", "space = euclidean");
    flip("loss = lorentzian", "loss = mse");
    ExperimentConfig cfg = parse_config_text(text);
    CHECK(cfg.model.space == Space::euclidean);
    CHECK(cfg.model.loss == LossKind::mse);
  }
}

TEST_CASE("report rendering") {
  EvalReport r;
  r.auroc_raw = 0.75;
  r.auroc_smoothed = 0.8125;
  r.frames = 2000;
  r.positives = 600;
  CategoryResult c;
  c.name = "teleport";
  c.auroc_raw = 0.9;
  c.auroc_smoothed = 0.95;
  c.frames = 500;
  c.positives = 150;
  r.categories.push_back(c);
  const std::string csv = r.to_csv();
  CHECK(csv.find("scope,frames,positives,auroc_raw,auroc_smoothed\n") == 0);
  CHECK(csv.find("total,2000,600,0.75,0.8125") != std::string::npos);
  CHECK(csv.find("teleport,500,150,0.9") != std::string::npos);
  CHECK(r.to_table().find("teleport") != std::string::npos);
}
