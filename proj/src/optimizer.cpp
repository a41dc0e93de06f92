#include "lvad/optimizer.hpp"

#include <cmath>
#include <sstream>

namespace lvad {

AdamW::AdamW(ParamStore& params, AdamWConfig cfg) : params_(params), cfg_(cfg) {
  require(cfg_.horizon >= 1, Errc::invalid_argument, "AdamW: horizon must be >= 1");
  m_.reserve(params_.count());
  v_.reserve(params_.count());
  for (size_t i = 0; i < params_.count(); ++i) {
    const Mat& v = params_.at(i).value;
    m_.push_back(Mat::Zero(v.rows(), v.cols()));
    v_.push_back(Mat::Zero(v.rows(), v.cols()));
  }
}

double AdamW::lr_at(uint64_t step) const {
  double frac = double(step) / double(cfg_.horizon);
  if (frac > 1.0) frac = 1.0;
  return cfg_.base_lr * 0.5 * (1.0 + std::cos(3.141592653589793238462643383279 * frac));
}

void AdamW::step() {
  const double lr = lr_at(step_);
  const double t = double(step_ + 1);
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t);
  for (size_t i = 0; i < params_.count(); ++i) {
    Parameter& p = params_.at(i);
    if (!p.trainable) continue;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * p.grad;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * p.grad.cwiseProduct(p.grad);
    Mat mhat = m_[i] / bc1;
    Mat vhat = v_[i] / bc2;
    p.value -= lr * mhat.cwiseQuotient((vhat.array().sqrt() + cfg_.eps).matrix());
    if (p.weight_decay && cfg_.weight_decay != 0.0) p.value -= lr * cfg_.weight_decay * p.value;
  }
  ++step_;
}

std::string FiniteDiffReport::to_text() const {
  std::ostringstream os;
  os.precision(6);
  os << std::scientific;
  for (const auto& e : per_parameter)
    os << e.name << "  max_rel_err=" << e.max_rel_err << "  max_abs_grad=" << e.max_abs_grad
       << "\n";
  os << "overall max_rel_err=" << max_rel_err << "\n";
  return os.str();
}

FiniteDiffReport finite_diff_check(const std::function<double()>& fn, ParamStore& params,
                                   double step) {
  require(step > 0.0, Errc::invalid_argument, "finite_diff_check: step must be positive");
  FiniteDiffReport report;
  for (size_t i = 0; i < params.count(); ++i) {
    Parameter& p = params.at(i);
    if (!p.trainable) continue;
    FiniteDiffEntry entry;
    entry.name = p.name;
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      const double saved = p.value(k);
      p.value(k) = saved + step;
      const double up = fn();
      p.value(k) = saved - step;
      const double down = fn();
      p.value(k) = saved;
      const double fd = (up - down) / (2.0 * step);
      const double a = p.grad(k);
      const double denom = std::max({std::abs(a), std::abs(fd), 1e-12});
      const double rel = std::abs(a - fd) / denom;
      entry.max_rel_err = std::max(entry.max_rel_err, rel);
      entry.max_abs_grad = std::max(entry.max_abs_grad, std::abs(a));
    }
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.per_parameter.push_back(std::move(entry));
  }
  return report;
}

}  // namespace lvad
