#pragma once

#include <optional>
#include <vector>

#include "lvad/config.hpp"
#include "lvad/params.hpp"
#include "lvad/rng.hpp"
#include "lvad/tape.hpp"

namespace lvad {

// The full spatio-temporal model: per-point encoder, manifold embedding,
// positional encoding, stacked attention layers, decoder head and loss.
//
// In hyperbolic space every token lives on a Lorentz hyperboloid whose
// curvature is a trainable parameter (kappa = -exp(theta), one theta for the
// embedding space and one per layer). In Euclidean space the same pipeline
// runs with flat-space substitutes: zero time components, plain addition
// residuals, attention logits from negative squared distances, and plain
// weighted-sum aggregation.
class Model {
 public:
  Model(ModelConfig cfg, uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  struct Batch {
    Mat inputs;                   // (count * T * N) x 3 window input frames
    Mat targets;                  // (count * N) x 3 target frames (prediction mode)
    std::vector<uint8_t> labels;  // per-window target labels (classification mode)
    int count = 0;
  };

  struct Forward {
    Var tokens;  // (count * T) x (D+1) transformer output
    Var pred;    // count x (D+1) prediction tokens, or count x 1 logits
    Var scores;  // count x 1 raw anomaly scores
    Var loss;    // 1 x 1 when requested
  };

  // Builds the graph for one batch on `t`. `dropout_rng` is only consulted
  // when training with a positive dropout rate.
  Forward forward(Tape& t, const Batch& batch, bool training, Rng* dropout_rng, bool want_loss);

  // Forward-only raw scores for a batch of windows.
  std::vector<double> score_windows(const Batch& batch);

  // Current curvature of the embedding space (and of layer `i` below).
  double embed_curvature() const;
  double layer_curvature(int layer) const;

  std::string param_breakdown() const;

 private:
  struct CurvVars {
    Var neg_k;      // 1x1, -kappa = exp(theta)
    Var neg_inv_k;  // 1x1, -1/kappa = exp(-theta)
    Var theta;
  };

  CurvVars curv_vars(Tape& t, const std::string& name);
  Var spatial(Tape& t, Var x) const;
  Var flip_time(Tape& t, Var x) const;                 // negates column 0
  Var lift(Tape& t, Var s, std::optional<Var> neg_inv_k);  // time recompute / zero pad
  Var project(Tape& t, Var v, Var neg_k);              // Lorentzian normalization
  Var embed_rows(Tape& t, Var features, const CurvVars& k0);
  Var hrc_wrap(Tape& t, Var refined_spatial, std::optional<Var> neg_inv_k);
  Var layer_norm_spatial(Tape& t, Var x, Parameter& scale, Parameter& shift);
  Var apply_dropout(Tape& t, Var x, bool training, Rng* rng, std::optional<Var> neg_inv_k);
  Var linear(Tape& t, Var x, const std::string& w, const std::string& b);

  ModelConfig cfg_;
  ParamStore params_;
};

}  // namespace lvad
