#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace lvad {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Error identities surfaced by the library. Each maps 1:1 onto a C API
// status code (see lvad.h).
enum class Errc : int {
  ok = 0,
  invalid_argument,
  invalid_dimension,
  invalid_curvature,
  invalid_tangent,
  not_on_manifold,
  numerical_domain,
  not_timelike,
  invalid_frame,
  invalid_window,
  invalid_config,
  non_finite_gradient,
  degenerate_labels,
  empty_frame,
  unsupported_version,
  corrupt_file,
  data_not_found,
  incompatible_checkpoint,
  io_error,
};

const char* errc_name(Errc e);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace lvad
