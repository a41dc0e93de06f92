#include "lvad/model.hpp"

#include <cmath>
#include <sstream>

#include "lvad/frame_encoder.hpp"
#include "lvad/geometry.hpp"
#include "lvad/transformer.hpp"

namespace lvad {

namespace {

Mat uniform_init(int rows, int cols, double bound, Rng& rng) {
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

Model::Model(ModelConfig cfg, uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng = Rng::derive(seed, "init");
  const bool hyp = cfg_.space == Space::hyperbolic;
  const int d = cfg_.channels;
  const int ambient = cfg_.ambient();
  const int head_spatial = cfg_.head_dim() - 1;

  init_encoder_params(params_, cfg_.encoder_widths(), 3, rng);

  if (hyp) params_.add("embed.curv", Mat::Zero(1, 1), true, false);
  params_.add("pos.table", uniform_init(cfg_.frames, d, 1.0 / std::sqrt(double(d)), rng), true,
              true);

  const double wb = 1.0 / std::sqrt(double(d));
  for (int l = 0; l < cfg_.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    if (hyp) params_.add(p + "curv", Mat::Zero(1, 1), true, false);
    for (int h = 0; h < cfg_.heads; ++h) {
      const std::string hp = p + "h" + std::to_string(h) + ".";
      params_.add(hp + "wq", uniform_init(d, head_spatial, wb, rng), true, true);
      params_.add(hp + "wk", uniform_init(d, head_spatial, wb, rng), true, true);
      params_.add(hp + "wv", uniform_init(d, head_spatial, wb, rng), true, true);
      params_.add(hp + "bias", Mat::Zero(1, 1), true, false);
    }
    params_.add(p + "ln1.scale", Mat::Ones(1, d), true, false);
    params_.add(p + "ln1.shift", Mat::Zero(1, d), true, false);
    const int hidden = 2 * ambient - 1;
    params_.add(p + "ffn.w0", uniform_init(d, hidden, wb, rng), true, true);
    params_.add(p + "ffn.w1", uniform_init(hidden, d, 1.0 / std::sqrt(double(hidden)), rng), true,
                true);
    params_.add(p + "ln2.scale", Mat::Ones(1, d), true, false);
    params_.add(p + "ln2.shift", Mat::Zero(1, d), true, false);
  }

  const int dec_hidden = cfg_.decoder_width();
  const int out = cfg_.mode == TaskMode::prediction ? d : 1;
  params_.add("dec.w0", uniform_init(d, dec_hidden, wb, rng), true, true);
  params_.add("dec.b0", uniform_init(1, dec_hidden, wb, rng), true, false);
  const double db = 1.0 / std::sqrt(double(dec_hidden));
  params_.add("dec.w1", uniform_init(dec_hidden, out, db, rng), true, true);
  params_.add("dec.b1", uniform_init(1, out, db, rng), true, false);
}

double Model::embed_curvature() const {
  const Parameter* p = params_.find("embed.curv");
  return p ? -std::exp(p->value(0, 0)) : -1.0;
}

double Model::layer_curvature(int layer) const {
  const Parameter* p = params_.find("layer" + std::to_string(layer) + ".curv");
  return p ? -std::exp(p->value(0, 0)) : -1.0;
}

Model::CurvVars Model::curv_vars(Tape& t, const std::string& name) {
  Parameter* p = params_.find(name);
  require(p != nullptr, Errc::invalid_argument, "missing curvature parameter " + name);
  CurvVars cv;
  cv.theta = t.parameter(*p);
  cv.neg_k = t.exp(cv.theta);
  cv.neg_inv_k = t.exp(t.neg(cv.theta));
  return cv;
}

Var Model::spatial(Tape& t, Var x) const { return t.slice_cols(x, 1, cfg_.channels); }

Var Model::flip_time(Tape& t, Var x) const {
  Eigen::RowVectorXd f = Eigen::RowVectorXd::Ones(t.val(x).cols());
  f(0) = -1.0;
  return t.col_scale_const(x, std::move(f));
}

// Attaches the time component to a spatial block: sqrt(||s||^2 - 1/kappa) in
// hyperbolic space, zero in Euclidean space.
Var Model::lift(Tape& t, Var s, std::optional<Var> neg_inv_k) {
  const int rows = int(t.val(s).rows());
  if (!neg_inv_k) return t.concat_cols({t.constant(Mat::Zero(rows, 1)), s});
  Var time = t.sqrt(t.add(t.row_dot(s, s), t.broadcast_scalar(*neg_inv_k, rows, 1)));
  return t.concat_cols({time, s});
}

// v / sqrt(kappa <v,v>_L) row-wise; exact hyperboloid membership.
Var Model::project(Tape& t, Var v, Var neg_k) {
  const int rows = int(t.val(v).rows());
  Var inner = t.row_dot(flip_time(t, v), v);  // <v,v>_L, strictly negative here
  Var arg = t.mul(t.broadcast_scalar(neg_k, rows, 1), t.neg(inner));
  return t.row_scale(v, t.rsqrt(arg));
}

// Exponential map at the origin applied to [0, f] rows.
Var Model::embed_rows(Tape& t, Var features, const CurvVars& k0) {
  const int rows = int(t.val(features).rows());
  Var sq = t.row_dot(features, features);
  Var alpha = t.sqrt(t.mul(t.broadcast_scalar(k0.neg_k, rows, 1), sq));
  Var time = t.mul(t.cosh(alpha),
                   t.broadcast_scalar(t.exp(t.scale(k0.theta, -0.5)), rows, 1));
  Var sp = t.row_scale(features, t.sinhc(alpha));
  return t.concat_cols({time, sp});
}

Var Model::hrc_wrap(Tape& t, Var refined_spatial, std::optional<Var> neg_inv_k) {
  return lift(t, refined_spatial, neg_inv_k);
}

Var Model::layer_norm_spatial(Tape& t, Var x, Parameter& scale, Parameter& shift) {
  const int rows = int(t.val(x).rows());
  const int d = int(t.val(x).cols());
  Var mu = t.scale(t.row_sum(x), 1.0 / d);
  Var centered = t.sub(x, t.broadcast_col(mu, d));
  Var variance = t.scale(t.row_dot(centered, centered), 1.0 / d);
  Var inv = t.rsqrt(t.add_scalar(variance, kLayerNormEps));
  Var normed = t.row_scale(centered, inv);
  return t.add(t.mul(normed, t.broadcast_row(t.parameter(scale), rows)),
               t.broadcast_row(t.parameter(shift), rows));
}

Var Model::apply_dropout(Tape& t, Var x, bool training, Rng* rng,
                         std::optional<Var> neg_inv_k) {
  if (!training || cfg_.dropout <= 0.0) return x;
  require(rng != nullptr, Errc::invalid_argument, "training dropout requires a random source");
  Var sp = spatial(t, x);
  const double keep = 1.0 - cfg_.dropout;
  Mat mask(t.val(sp).rows(), t.val(sp).cols());
  for (Eigen::Index j = 0; j < mask.cols(); ++j)
    for (Eigen::Index i = 0; i < mask.rows(); ++i)
      mask(i, j) = rng->uniform01() < keep ? 1.0 / keep : 0.0;
  return hrc_wrap(t, t.dropout(sp, std::move(mask)), neg_inv_k);
}

Var Model::linear(Tape& t, Var x, const std::string& w, const std::string& b) {
  Parameter* pw = params_.find(w);
  Parameter* pb = params_.find(b);
  require(pw && pb, Errc::invalid_argument, "missing parameter " + w + " or " + b);
  return t.add(t.matmul(x, t.parameter(*pw)),
               t.broadcast_row(t.parameter(*pb), int(t.val(x).rows())));
}

Model::Forward Model::forward(Tape& t, const Batch& batch, bool training, Rng* dropout_rng,
                              bool want_loss) {
  const bool hyp = cfg_.space == Space::hyperbolic;
  const bool prediction = cfg_.mode == TaskMode::prediction;
  const int B = batch.count;
  const int T = cfg_.frames;
  const int N = cfg_.points;
  const int d = cfg_.channels;
  require(B >= 1, Errc::invalid_argument, "forward: empty batch");
  require(batch.inputs.rows() == Eigen::Index(B) * T * N && batch.inputs.cols() == 3,
          Errc::invalid_dimension, "forward: inputs must be (count*T*N) x 3");
  const bool need_targets = prediction && want_loss;
  if (prediction && batch.targets.size() > 0)
    require(batch.targets.rows() == Eigen::Index(B) * N && batch.targets.cols() == 3,
            Errc::invalid_dimension, "forward: targets must be (count*N) x 3");
  if (need_targets)
    require(batch.targets.size() > 0, Errc::invalid_argument,
            "forward: prediction loss requires target frames");
  if (!prediction && want_loss)
    require(int(batch.labels.size()) == B, Errc::invalid_argument,
            "forward: classification loss requires one label per window");

  // Encode all frames in one stack: window frames first, then target frames.
  const bool with_targets = prediction && batch.targets.size() > 0;
  Mat stacked;
  if (with_targets) {
    stacked.resize(batch.inputs.rows() + batch.targets.rows(), 3);
    stacked << batch.inputs, batch.targets;
  } else {
    stacked = batch.inputs;
  }
  Var features =
      build_encoder(t, t.constant(std::move(stacked)), cfg_.encoder_widths(), params_, N);
  Var in_features = t.slice_rows(features, 0, B * T);

  std::optional<CurvVars> k0;
  if (hyp) k0 = curv_vars(t, "embed.curv");

  Var tokens = hyp ? embed_rows(t, in_features, *k0) : lift(t, in_features, std::nullopt);

  // Positional encoding: lift the learnable table and combine via the
  // addition-then-normalize rule (plain addition in Euclidean space).
  if (cfg_.positional && cfg_.epsilon > 0.0) {
    Var table = t.parameter(*params_.find("pos.table"));
    Var lifted = hyp ? lift(t, table, k0->neg_inv_k) : lift(t, table, std::nullopt);
    std::vector<Var> copies(size_t(B), lifted);
    Var tiled = B == 1 ? lifted : t.concat_rows(copies);
    Var mixed = t.add(tokens, t.scale(tiled, cfg_.epsilon));
    tokens = hyp ? project(t, mixed, k0->neg_k) : mixed;
  }

  const double inv_sqrt_dh = 1.0 / std::sqrt(double(cfg_.head_dim()));
  std::optional<CurvVars> klayer;
  Var last_theta = hyp ? k0->theta : Var{};

  for (int l = 0; l < cfg_.layers; ++l) {
    const std::string lp = "layer" + std::to_string(l) + ".";
    std::optional<Var> neg_inv_k;
    if (hyp) {
      klayer = curv_vars(t, lp + "curv");
      neg_inv_k = klayer->neg_inv_k;
      last_theta = klayer->theta;
    }

    Var sp_tokens = spatial(t, tokens);
    std::vector<Var> q_all(size_t(cfg_.heads)), k_all(size_t(cfg_.heads)),
        v_all(size_t(cfg_.heads));
    std::vector<double> head_bias(size_t(cfg_.heads));
    for (int h = 0; h < cfg_.heads; ++h) {
      const std::string hp = lp + "h" + std::to_string(h) + ".";
      q_all[h] = lift(t, t.matmul(sp_tokens, t.parameter(*params_.find(hp + "wq"))), neg_inv_k);
      k_all[h] = lift(t, t.matmul(sp_tokens, t.parameter(*params_.find(hp + "wk"))), neg_inv_k);
      v_all[h] = lift(t, t.matmul(sp_tokens, t.parameter(*params_.find(hp + "wv"))), neg_inv_k);
    }

    std::vector<Var> window_outputs;
    window_outputs.reserve(size_t(B));
    for (int w = 0; w < B; ++w) {
      std::vector<Var> head_outputs;
      head_outputs.reserve(size_t(cfg_.heads));
      for (int h = 0; h < cfg_.heads; ++h) {
        const std::string hp = lp + "h" + std::to_string(h) + ".";
        Var q = t.slice_rows(q_all[h], w * T, T);
        Var k = t.slice_rows(k_all[h], w * T, T);
        Var v = t.slice_rows(v_all[h], w * T, T);
        Var bias = t.broadcast_scalar(t.parameter(*params_.find(hp + "bias")), T, T);
        Var logits;
        if (hyp) {
          Var gram = t.matmul_nt(flip_time(t, q), k);
          logits = t.add(t.add_scalar(t.scale(gram, 2.0 * inv_sqrt_dh), 2.0 * inv_sqrt_dh), bias);
        } else {
          Var gram = t.matmul_nt(q, k);
          Var sq_q = t.broadcast_col(t.row_dot(q, q), T);
          Var sq_k = t.transpose(t.broadcast_col(t.row_dot(k, k), T));
          Var dist2 = t.add(t.sub(sq_q, t.scale(gram, 2.0)), sq_k);
          logits = t.add(t.scale(dist2, -inv_sqrt_dh), bias);
        }
        Var attn = t.softmax_rows(logits);
        Var agg = t.matmul(attn, v);
        head_outputs.push_back(hyp ? project(t, agg, klayer->neg_k) : agg);
      }
      Var conc = cfg_.heads == 1 ? head_outputs[0] : t.concat_cols(head_outputs);
      // Concatenated heads are re-attached to the manifold by recomputing the
      // time component from the concatenation's spatial entries.
      Var fixed = cfg_.heads == 1 ? conc : lift(t, t.slice_cols(conc, 1, d), neg_inv_k);
      window_outputs.push_back(fixed);
    }
    Var attn_out = B == 1 ? window_outputs[0] : t.concat_rows(window_outputs);
    attn_out = apply_dropout(t, attn_out, training, dropout_rng, neg_inv_k);

    Var res1 = t.add(tokens, attn_out);
    if (hyp) res1 = project(t, res1, klayer->neg_k);
    Var n1 = hrc_wrap(
        t,
        layer_norm_spatial(t, spatial(t, res1), *params_.find(lp + "ln1.scale"),
                           *params_.find(lp + "ln1.shift")),
        neg_inv_k);

    Var h1 = lift(t, t.matmul(spatial(t, n1), t.parameter(*params_.find(lp + "ffn.w0"))),
                  neg_inv_k);
    Var h1r = hrc_wrap(t, t.relu(spatial(t, h1)), neg_inv_k);
    Var h2 = lift(t, t.matmul(spatial(t, h1r), t.parameter(*params_.find(lp + "ffn.w1"))),
                  neg_inv_k);
    h2 = apply_dropout(t, h2, training, dropout_rng, neg_inv_k);

    Var res2 = t.add(n1, h2);
    if (hyp) res2 = project(t, res2, klayer->neg_k);
    tokens = hrc_wrap(
        t,
        layer_norm_spatial(t, spatial(t, res2), *params_.find(lp + "ln2.scale"),
                           *params_.find(lp + "ln2.shift")),
        neg_inv_k);
  }

  Forward out;
  out.tokens = tokens;

  // Temporal aggregation: uniform Lorentzian midpoint over the window.
  Var mid = t.segment_mean_rows(tokens, T);
  if (hyp) {
    Var neg_k_last = cfg_.layers > 0 ? klayer->neg_k : k0->neg_k;
    mid = project(t, mid, neg_k_last);
  }
  Var z = t.relu(linear(t, spatial(t, mid), "dec.w0", "dec.b0"));
  Var head = linear(t, z, "dec.w1", "dec.b1");

  if (prediction) {
    Var pred_spatial = head;
    if (hyp) {
      // Cross-curvature scale sqrt(kappa_last / kappa_embed).
      Var ratio_sqrt = t.exp(t.scale(t.sub(last_theta, k0->theta), 0.5));
      pred_spatial = t.mul(head, t.broadcast_scalar(ratio_sqrt, B, d));
      out.pred = lift(t, pred_spatial, k0->neg_inv_k);
    } else {
      out.pred = lift(t, pred_spatial, std::nullopt);
    }

    if (with_targets) {
      Var tgt_features = t.slice_rows(features, B * T, B);
      if (cfg_.loss == LossKind::lorentzian) {
        Var pred_pt, tgt_pt, beta;
        if (hyp) {
          tgt_pt = embed_rows(t, tgt_features, *k0);
          pred_pt = out.pred;
          Var inner = t.row_dot(flip_time(t, pred_pt), tgt_pt);
          beta = t.mul(t.broadcast_scalar(k0->neg_k, B, 1), t.neg(inner));
        } else {
          // Flat features are attached to a fixed unit hyperboloid by the
          // time-recompute lift; exp/log maps stay out of the Euclidean path.
          Var one = t.constant(Mat::Ones(1, 1));
          pred_pt = lift(t, head, one);
          tgt_pt = lift(t, tgt_features, one);
          beta = t.neg(t.row_dot(flip_time(t, pred_pt), tgt_pt));
        }
        out.scores = t.arcosh(beta);
      } else {
        Var tgt_sp = hyp ? spatial(t, embed_rows(t, tgt_features, *k0)) : tgt_features;
        Var diff = t.sub(hyp ? spatial(t, out.pred) : head, tgt_sp);
        out.scores = t.scale(t.row_dot(diff, diff), 1.0 / d);
      }
      if (want_loss) out.loss = t.mean_all(out.scores);
    }
  } else {
    out.pred = head;  // logits
    out.scores = t.logistic(head);
    if (want_loss) {
      Mat anchors(B, 1);
      for (int i = 0; i < B; ++i) anchors(i, 0) = batch.labels[size_t(i)] ? 2.0 : 0.0;
      Var delta = t.sub(head, t.constant(std::move(anchors)));
      if (cfg_.loss == LossKind::lorentzian) {
        // Lorentzian distance between the logit embedded on the unit
        // one-dimensional hyperboloid and the label anchor: arcosh(cosh(u-a)).
        out.loss = t.mean_all(t.arcosh(t.cosh(delta)));
      } else {
        out.loss = t.mean_all(t.mul(delta, delta));
      }
    }
  }
  return out;
}

std::vector<double> Model::score_windows(const Batch& batch) {
  Tape t;
  const bool needs_scores_from_targets = cfg_.mode == TaskMode::prediction;
  Forward f = forward(t, batch, false, nullptr,
                      /*want_loss=*/needs_scores_from_targets);
  require(f.scores.valid(), Errc::invalid_argument, "score_windows: no scores produced");
  const Mat& s = t.val(f.scores);
  std::vector<double> out(size_t(s.rows()));
  for (Eigen::Index i = 0; i < s.rows(); ++i) out[size_t(i)] = s(i, 0);
  return out;
}

std::string Model::param_breakdown() const {
  struct Group {
    const char* label;
    uint64_t count = 0;
  };
  Group groups[] = {{"encoder", 0}, {"positional", 0}, {"attention", 0},
                    {"layer-norm", 0}, {"feed-forward", 0}, {"decoder", 0}, {"curvature", 0}};
  for (size_t i = 0; i < params_.count(); ++i) {
    const Parameter& p = params_.at(i);
    if (!p.trainable) continue;
    const uint64_t n = uint64_t(p.value.size());
    if (p.name.rfind("enc.", 0) == 0) groups[0].count += n;
    else if (p.name.rfind("pos.", 0) == 0) groups[1].count += n;
    else if (p.name.find(".h") != std::string::npos) groups[2].count += n;
    else if (p.name.find(".ln") != std::string::npos) groups[3].count += n;
    else if (p.name.find(".ffn") != std::string::npos) groups[4].count += n;
    else if (p.name.rfind("dec.", 0) == 0) groups[5].count += n;
    else if (p.name.find("curv") != std::string::npos) groups[6].count += n;
  }
  std::ostringstream os;
  uint64_t total = 0;
  for (const auto& g : groups) {
    os << g.label << ": " << g.count << "\n";
    total += g.count;
  }
  os << "total trainable: " << total << "\n";
  return os.str();
}

}  // namespace lvad
