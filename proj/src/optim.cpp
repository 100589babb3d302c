#include "dass/optim.hpp"

#include <cmath>

namespace dass {

double OneCycleSchedule::lr_at(long step) const {
  const double start = peak / start_div;
  const double final_lr = peak / final_div;
  const double pos =
      std::clamp(static_cast<double>(step) / static_cast<double>(std::max(1L, total_steps - 1)),
                 0.0, 1.0);
  if (pos <= warmup_frac) {
    const double q = warmup_frac > 0 ? pos / warmup_frac : 1.0;
    return start + (peak - start) * 0.5 * (1.0 - std::cos(kPi * q));
  }
  const double q = (pos - warmup_frac) / (1.0 - warmup_frac);
  return final_lr + (peak - final_lr) * 0.5 * (1.0 + std::cos(kPi * q));
}

void Adam::step(const std::function<void(const ParamVisitor&)>& visit, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
  visit([&](Parameter& p) {
    if (!p.trainable) return;
    Mat g = p.grad;
    if (weight_decay != 0.0) g += weight_decay * p.value;
    Mat& m = m_[p.name];
    Mat& v = v_[p.name];
    if (m.size() == 0) {
      m = Mat::Zero(g.rows(), g.cols());
      v = Mat::Zero(g.rows(), g.cols());
    }
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
    const Mat m_hat = m / bc1;
    const Mat v_hat = v / bc2;
    p.value -= lr * (m_hat.array() / (v_hat.array().sqrt() + eps)).matrix();
  });
}

void Adam::restore(long t, std::map<std::string, Mat> m, std::map<std::string, Mat> v) {
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace dass
