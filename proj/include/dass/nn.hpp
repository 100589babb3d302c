#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dass/geom.hpp"
#include "dass/rng.hpp"

namespace dass {

// Rows are points (or grouped point samples), columns are channels. All math
// runs in double precision so analytic gradients can be checked against
// central finite differences.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;
  bool trainable = true;  // running BN statistics are state, not weights

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

using ParamVisitor = std::function<void(Parameter&)>;

// Shared per-point affine map (the 1D convolution of the paper's heads).
struct Linear {
  Parameter weight;  // out x in
  Parameter bias;    // 1 x out

  void init(const std::string& name, int in, int out, Rng& rng);
  Mat forward(const Mat& x, bool cache = true);
  Mat backward(const Mat& dy);
  void visit(const ParamVisitor& v);

 private:
  Mat input_;
};

// Feature-wise batch normalization over rows. Batch statistics in training,
// running averages at inference. update_running=false runs a training-mode
// forward without touching the running state (used by the SFF likelihood
// pass).
struct BatchNorm {
  Parameter gamma, beta;
  Parameter running_mean, running_var;
  double eps = 1e-5;
  double momentum = 0.1;

  void init(const std::string& name, int channels);
  Mat forward(const Mat& x, bool train, bool cache = true,
              bool update_running = true);
  Mat backward(const Mat& dy);
  void visit(const ParamVisitor& v);

 private:
  Mat xhat_;
  Eigen::RowVectorXd inv_std_;
};

struct Relu {
  Mat forward(const Mat& x, bool cache = true);
  Mat backward(const Mat& dy);

 private:
  Mat mask_;
};

// [Linear -> BatchNorm -> ReLU] stack; with_final_activation=false leaves the
// last layer as a bare affine map (logit heads).
struct Mlp {
  std::vector<Linear> linears;
  std::vector<BatchNorm> norms;
  std::vector<Relu> relus;
  bool with_final_activation = true;

  void init(const std::string& name, int in, const std::vector<int>& widths,
            Rng& rng, bool final_activation = true);
  Mat forward(const Mat& x, bool train, bool cache = true,
              bool update_running = true);
  Mat backward(const Mat& dy);
  void visit(const ParamVisitor& v);
  int out_dim() const;
};

// Channel-wise max over consecutive row groups of fixed size.
struct GroupMaxPool {
  Mat forward(const Mat& x, Eigen::Index group_size);
  Mat backward(const Mat& dy);

 private:
  Eigen::Index group_size_ = 0;
  Eigen::Index in_rows_ = 0;
  std::vector<Eigen::Index> argmax_;
};

Mat gather_rows(const Mat& x, const std::vector<Eigen::Index>& idx);
void scatter_add_rows(const Mat& dy, const std::vector<Eigen::Index>& idx, Mat* dx);

// Inverse-distance weighted interpolation from coarse rows onto fine rows.
struct Interpolator {
  // neighbors: fine_rows x k indices into the coarse rows; weights same shape.
  Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic> neighbors;
  Mat weights;

  Mat forward(const Mat& coarse) const;
  Mat backward(const Mat& dy, Eigen::Index coarse_rows) const;
};

Mat softmax_rows(const Mat& logits);

}  // namespace dass
