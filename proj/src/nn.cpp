#include "dass/nn.hpp"

#include <cmath>

#include "dass/errors.hpp"

namespace dass {

void Linear::init(const std::string& name, int in, int out, Rng& rng) {
  weight.name = name + ".weight";
  bias.name = name + ".bias";
  const double bound = std::sqrt(6.0 / in);
  std::uniform_real_distribution<double> u(-bound, bound);
  weight.value.resize(out, in);
  for (Eigen::Index r = 0; r < out; ++r)
    for (Eigen::Index c = 0; c < in; ++c) weight.value(r, c) = u(rng);
  bias.value = Mat::Zero(1, out);
  weight.zero_grad();
  bias.zero_grad();
}

Mat Linear::forward(const Mat& x, bool cache) {
  if (x.cols() != weight.value.cols())
    throw ConfigError("linear " + weight.name + ": input width " +
                      std::to_string(x.cols()) + " != expected " +
                      std::to_string(weight.value.cols()));
  if (cache) input_ = x;
  Mat y = x * weight.value.transpose();
  y.rowwise() += bias.value.row(0);
  return y;
}

Mat Linear::backward(const Mat& dy) {
  weight.grad.noalias() += dy.transpose() * input_;
  bias.grad.row(0) += dy.colwise().sum();
  return dy * weight.value;
}

void Linear::visit(const ParamVisitor& v) {
  v(weight);
  v(bias);
}

void BatchNorm::init(const std::string& name, int channels) {
  gamma.name = name + ".gamma";
  beta.name = name + ".beta";
  running_mean.name = name + ".running_mean";
  running_var.name = name + ".running_var";
  gamma.value = Mat::Ones(1, channels);
  beta.value = Mat::Zero(1, channels);
  running_mean.value = Mat::Zero(1, channels);
  running_var.value = Mat::Ones(1, channels);
  running_mean.trainable = false;
  running_var.trainable = false;
  gamma.zero_grad();
  beta.zero_grad();
  running_mean.zero_grad();
  running_var.zero_grad();
}

Mat BatchNorm::forward(const Mat& x, bool train, bool cache, bool update_running) {
  Eigen::RowVectorXd mean, var;
  if (train) {
    mean = x.colwise().mean();
    var = (x.rowwise() - mean).array().square().colwise().mean();
    if (update_running) {
      const double n = static_cast<double>(x.rows());
      const double unbias = n > 1 ? n / (n - 1) : 1.0;
      running_mean.value.row(0) =
          (1 - momentum) * running_mean.value.row(0) + momentum * mean;
      running_var.value.row(0) =
          (1 - momentum) * running_var.value.row(0) + momentum * (var * unbias);
    }
  } else {
    mean = running_mean.value.row(0);
    var = running_var.value.row(0);
  }
  const Eigen::RowVectorXd inv_std = (var.array() + eps).rsqrt();
  Mat xhat = (x.rowwise() - mean).array().rowwise() * inv_std.array();
  Mat y = xhat.array().rowwise() * gamma.value.row(0).array();
  y.rowwise() += beta.value.row(0);
  if (cache && train) {
    xhat_ = std::move(xhat);
    inv_std_ = inv_std;
  }
  return y;
}

Mat BatchNorm::backward(const Mat& dy) {
  gamma.grad.row(0) += (dy.array() * xhat_.array()).colwise().sum().matrix();
  beta.grad.row(0) += dy.colwise().sum();

  const Eigen::RowVectorXd mean_dy = dy.colwise().mean();
  const Eigen::RowVectorXd mean_dy_xhat =
      (dy.array() * xhat_.array()).colwise().mean();
  Mat dx = dy;
  dx.rowwise() -= mean_dy;
  dx -= (xhat_.array().rowwise() * mean_dy_xhat.array()).matrix();
  dx = dx.array().rowwise() * (gamma.value.row(0).array() * inv_std_.array());
  return dx;
}

void BatchNorm::visit(const ParamVisitor& v) {
  v(gamma);
  v(beta);
  v(running_mean);
  v(running_var);
}

Mat Relu::forward(const Mat& x, bool cache) {
  if (cache) mask_ = (x.array() > 0.0).cast<double>();
  return x.cwiseMax(0.0);
}

Mat Relu::backward(const Mat& dy) { return dy.array() * mask_.array(); }

void Mlp::init(const std::string& name, int in, const std::vector<int>& widths,
               Rng& rng, bool final_activation) {
  with_final_activation = final_activation;
  linears.resize(widths.size());
  norms.clear();
  relus.clear();
  int cur = in;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    linears[i].init(name + ".l" + std::to_string(i), cur, widths[i], rng);
    if (final_activation || i + 1 < widths.size()) {
      norms.emplace_back();
      norms.back().init(name + ".bn" + std::to_string(i), widths[i]);
      relus.emplace_back();
    }
    cur = widths[i];
  }
}

Mat Mlp::forward(const Mat& x, bool train, bool cache, bool update_running) {
  Mat h = x;
  for (std::size_t i = 0; i < linears.size(); ++i) {
    h = linears[i].forward(h, cache);
    if (i < norms.size()) {
      h = norms[i].forward(h, train, cache, update_running);
      h = relus[i].forward(h, cache);
    }
  }
  return h;
}

Mat Mlp::backward(const Mat& dy) {
  Mat d = dy;
  for (std::size_t i = linears.size(); i-- > 0;) {
    if (i < norms.size()) {
      d = relus[i].backward(d);
      d = norms[i].backward(d);
    }
    d = linears[i].backward(d);
  }
  return d;
}

void Mlp::visit(const ParamVisitor& v) {
  for (auto& l : linears) l.visit(v);
  for (auto& n : norms) n.visit(v);
}

int Mlp::out_dim() const {
  return static_cast<int>(linears.back().weight.value.rows());
}

Mat GroupMaxPool::forward(const Mat& x, Eigen::Index group_size) {
  group_size_ = group_size;
  in_rows_ = x.rows();
  const Eigen::Index groups = x.rows() / group_size;
  const Eigen::Index c = x.cols();
  Mat out(groups, c);
  argmax_.assign(static_cast<std::size_t>(groups * c), 0);
  for (Eigen::Index g = 0; g < groups; ++g) {
    const Eigen::Index base = g * group_size;
    for (Eigen::Index ch = 0; ch < c; ++ch) {
      Eigen::Index best = base;
      double best_val = x(base, ch);
      for (Eigen::Index r = base + 1; r < base + group_size; ++r)
        if (x(r, ch) > best_val) {
          best_val = x(r, ch);
          best = r;
        }
      out(g, ch) = best_val;
      argmax_[static_cast<std::size_t>(g * c + ch)] = best;
    }
  }
  return out;
}

Mat GroupMaxPool::backward(const Mat& dy) {
  Mat dx = Mat::Zero(in_rows_, dy.cols());
  for (Eigen::Index g = 0; g < dy.rows(); ++g)
    for (Eigen::Index ch = 0; ch < dy.cols(); ++ch)
      dx(argmax_[static_cast<std::size_t>(g * dy.cols() + ch)], ch) += dy(g, ch);
  return dx;
}

Mat gather_rows(const Mat& x, const std::vector<Eigen::Index>& idx) {
  Mat out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
  return out;
}

void scatter_add_rows(const Mat& dy, const std::vector<Eigen::Index>& idx, Mat* dx) {
  for (std::size_t i = 0; i < idx.size(); ++i)
    dx->row(idx[i]) += dy.row(static_cast<Eigen::Index>(i));
}

Mat Interpolator::forward(const Mat& coarse) const {
  Mat out = Mat::Zero(neighbors.rows(), coarse.cols());
  for (Eigen::Index f = 0; f < neighbors.rows(); ++f)
    for (Eigen::Index j = 0; j < neighbors.cols(); ++j)
      out.row(f) += weights(f, j) * coarse.row(neighbors(f, j));
  return out;
}

Mat Interpolator::backward(const Mat& dy, Eigen::Index coarse_rows) const {
  Mat dx = Mat::Zero(coarse_rows, dy.cols());
  for (Eigen::Index f = 0; f < neighbors.rows(); ++f)
    for (Eigen::Index j = 0; j < neighbors.cols(); ++j)
      dx.row(neighbors(f, j)) += weights(f, j) * dy.row(f);
  return dx;
}

Mat softmax_rows(const Mat& logits) {
  Mat out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - m).exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

}  // namespace dass
