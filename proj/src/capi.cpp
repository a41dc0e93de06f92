#include "lvad.h"

#include <cstring>
#include <string>

#include "lvad/anomaly.hpp"
#include "lvad/config.hpp"
#include "lvad/data.hpp"
#include "lvad/eval.hpp"
#include "lvad/pipeline.hpp"

namespace {

thread_local std::string g_last_error;

lvad_status map_errc(lvad::Errc e) {
  using lvad::Errc;
  switch (e) {
    case Errc::ok: return LVAD_OK;
    case Errc::invalid_argument: return LVAD_E_INVALID_ARGUMENT;
    case Errc::invalid_dimension: return LVAD_E_INVALID_DIMENSION;
    case Errc::invalid_curvature: return LVAD_E_INVALID_CURVATURE;
    case Errc::invalid_tangent: return LVAD_E_INVALID_TANGENT;
    case Errc::not_on_manifold: return LVAD_E_NOT_ON_MANIFOLD;
    case Errc::numerical_domain: return LVAD_E_NUMERICAL_DOMAIN;
    case Errc::not_timelike: return LVAD_E_NOT_TIMELIKE;
    case Errc::invalid_frame: return LVAD_E_INVALID_FRAME;
    case Errc::invalid_window: return LVAD_E_INVALID_WINDOW;
    case Errc::invalid_config: return LVAD_E_INVALID_CONFIG;
    case Errc::non_finite_gradient: return LVAD_E_NON_FINITE_GRADIENT;
    case Errc::degenerate_labels: return LVAD_E_DEGENERATE_LABELS;
    case Errc::empty_frame: return LVAD_E_EMPTY_FRAME;
    case Errc::unsupported_version: return LVAD_E_UNSUPPORTED_VERSION;
    case Errc::corrupt_file: return LVAD_E_CORRUPT_FILE;
    case Errc::data_not_found: return LVAD_E_DATA_NOT_FOUND;
    case Errc::incompatible_checkpoint: return LVAD_E_INCOMPATIBLE_CHECKPOINT;
    case Errc::io_error: return LVAD_E_IO;
  }
  return LVAD_E_INTERNAL;
}

template <typename Fn>
lvad_status guarded(Fn&& fn) {
  try {
    fn();
    return LVAD_OK;
  } catch (const lvad::Error& e) {
    g_last_error = e.what();
    return map_errc(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LVAD_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return LVAD_E_INTERNAL;
  }
}

lvad_status need(bool cond, const char* what) {
  if (cond) return LVAD_OK;
  g_last_error = what;
  return LVAD_E_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct lvad_config_s {
  lvad::ExperimentConfig cfg;
};

extern "C" {

const char* lvad_status_name(lvad_status status) {
  switch (status) {
    case LVAD_OK: return "Ok";
    case LVAD_E_INVALID_ARGUMENT: return "InvalidArgument";
    case LVAD_E_INVALID_DIMENSION: return "InvalidDimension";
    case LVAD_E_INVALID_CURVATURE: return "InvalidCurvature";
    case LVAD_E_INVALID_TANGENT: return "InvalidTangent";
    case LVAD_E_NOT_ON_MANIFOLD: return "NotOnManifold";
    case LVAD_E_NUMERICAL_DOMAIN: return "NumericalDomain";
    case LVAD_E_NOT_TIMELIKE: return "NotTimelike";
    case LVAD_E_INVALID_FRAME: return "InvalidFrame";
    case LVAD_E_INVALID_WINDOW: return "InvalidWindow";
    case LVAD_E_INVALID_CONFIG: return "InvalidConfig";
    case LVAD_E_NON_FINITE_GRADIENT: return "NonFiniteGradient";
    case LVAD_E_DEGENERATE_LABELS: return "DegenerateLabels";
    case LVAD_E_EMPTY_FRAME: return "EmptyFrame";
    case LVAD_E_UNSUPPORTED_VERSION: return "UnsupportedVersion";
    case LVAD_E_CORRUPT_FILE: return "CorruptFile";
    case LVAD_E_DATA_NOT_FOUND: return "DataNotFound";
    case LVAD_E_INCOMPATIBLE_CHECKPOINT: return "IncompatibleCheckpoint";
    case LVAD_E_IO: return "IoError";
    case LVAD_E_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* lvad_last_error(void) { return g_last_error.c_str(); }

const char* lvad_version(void) { return "lvad 1.0.0"; }

lvad_status lvad_config_load(const char* path, lvad_config** out) {
  if (auto s = need(path && out, "path and out must be non-null")) return s;
  return guarded([&] { *out = new lvad_config_s{lvad::load_config(path)}; });
}

lvad_status lvad_config_parse(const char* text, lvad_config** out) {
  if (auto s = need(text && out, "text and out must be non-null")) return s;
  return guarded([&] { *out = new lvad_config_s{lvad::parse_config_text(text)}; });
}

lvad_status lvad_config_default(lvad_config** out) {
  if (auto s = need(out != nullptr, "out must be non-null")) return s;
  return guarded(
      [&] { *out = new lvad_config_s{lvad::parse_config_text(lvad::default_config_text())}; });
}

void lvad_config_free(lvad_config* cfg) { delete cfg; }

lvad_status lvad_config_set_seed(lvad_config* cfg, uint64_t seed) {
  if (auto s = need(cfg != nullptr, "cfg must be non-null")) return s;
  cfg->cfg.train.seed = seed;
  return LVAD_OK;
}

lvad_status lvad_config_report_params(const lvad_config* cfg, char** text) {
  if (auto s = need(cfg && text, "cfg and text must be non-null")) return s;
  return guarded([&] { *text = dup_string(lvad::report_params(cfg->cfg)); });
}

void lvad_string_free(char* text) { delete[] text; }

lvad_status lvad_gen_data(const lvad_config* cfg, const char* out_dir) {
  if (auto s = need(cfg && out_dir, "cfg and out_dir must be non-null")) return s;
  return guarded([&] { lvad::run_gen_data(cfg->cfg, out_dir); });
}

lvad_status lvad_train(const lvad_config* cfg, const char* data_dir, const char* checkpoint_out,
                       const char* log_out) {
  if (auto s = need(cfg && data_dir && checkpoint_out && log_out,
                    "cfg, data_dir, checkpoint_out and log_out must be non-null"))
    return s;
  return guarded([&] { lvad::run_training(cfg->cfg, data_dir, checkpoint_out, log_out); });
}

lvad_status lvad_score(const lvad_config* cfg, const char* checkpoint_path, const char* data_dir,
                       const char* split, const char* out_dir) {
  if (auto s = need(cfg && checkpoint_path && data_dir && split && out_dir,
                    "cfg, checkpoint_path, data_dir, split and out_dir must be non-null"))
    return s;
  return guarded([&] { lvad::run_scoring(cfg->cfg, checkpoint_path, data_dir, split, out_dir); });
}

lvad_status lvad_eval(const char* scores_dir, const char* data_dir, const char* report_out,
                      double* auroc_raw, double* auroc_smoothed) {
  if (auto s = need(scores_dir != nullptr, "scores_dir must be non-null")) return s;
  return guarded([&] {
    lvad::EvalReport report = lvad::run_eval(scores_dir, data_dir ? data_dir : "",
                                             report_out ? report_out : "");
    if (auroc_raw) *auroc_raw = report.auroc_raw;
    if (auroc_smoothed) *auroc_smoothed = report.auroc_smoothed;
  });
}

lvad_status lvad_check_grad(const lvad_config* cfg, double fd_step, char** report_text,
                            double* max_rel_err) {
  if (auto s = need(cfg != nullptr, "cfg must be non-null")) return s;
  return guarded([&] {
    lvad::FiniteDiffReport report = lvad::run_check_grad(cfg->cfg, fd_step);
    if (report_text) *report_text = dup_string(report.to_text());
    if (max_rel_err) *max_rel_err = report.max_rel_err;
  });
}

lvad_status lvad_auroc(const double* scores, const uint8_t* labels, size_t n, double* out) {
  if (auto s = need(scores && labels && out, "scores, labels and out must be non-null")) return s;
  return guarded([&] { *out = lvad::auroc({scores, n}, {labels, n}); });
}

lvad_status lvad_moving_average(const double* raw, size_t n, int window, double* out) {
  if (auto s = need(raw && out, "raw and out must be non-null")) return s;
  return guarded([&] {
    std::vector<double> in(raw, raw + n);
    std::vector<double> smoothed = lvad::moving_average(in, window);
    std::memcpy(out, smoothed.data(), n * sizeof(double));
  });
}

lvad_status lvad_ingest_depth(const char* depth_dir, const char* out_path) {
  if (auto s = need(depth_dir && out_path, "depth_dir and out_path must be non-null")) return s;
  return guarded([&] { lvad::write_sequence(lvad::ingest_depth_dir(depth_dir), out_path); });
}

}  // extern "C"
