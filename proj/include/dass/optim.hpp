#pragma once

#include <map>
#include <string>

#include "dass/nn.hpp"

namespace dass {

// One-cycle schedule: cosine ramp from peak/start_div up to peak over the
// warmup fraction, cosine anneal down to peak/final_div afterwards.
struct OneCycleSchedule {
  double peak = 0.002;
  double start_div = 10.0;
  double final_div = 100.0;
  double warmup_frac = 0.3;
  long total_steps = 1;

  double lr_at(long step) const;
};

// Adam with L2 weight decay folded into the gradient; beta1 plays the role
// of the configured momentum.
class Adam {
 public:
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  // Applies one update to every trainable parameter reached by the visitor.
  void step(const std::function<void(const ParamVisitor&)>& visit, double lr);

  long steps_taken() const { return t_; }

  // Checkpoint access: first/second moment tensors keyed by parameter name.
  const std::map<std::string, Mat>& first_moments() const { return m_; }
  const std::map<std::string, Mat>& second_moments() const { return v_; }
  void restore(long t, std::map<std::string, Mat> m, std::map<std::string, Mat> v);

 private:
  long t_ = 0;
  std::map<std::string, Mat> m_, v_;
};

}  // namespace dass
