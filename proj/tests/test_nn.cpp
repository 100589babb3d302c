#include <doctest.h>

#include <cmath>

#include "dass/losses.hpp"
#include "dass/nn.hpp"
#include "dass/optim.hpp"
#include "dass/rng.hpp"

using namespace dass;

namespace {

Mat random_mat(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

// Central finite differences of a scalar function w.r.t. every entry of the
// parameters touched by `visit`, compared against the analytic gradients
// accumulated by one forward/backward pass.
double max_rel_grad_error(const std::function<void(const ParamVisitor&)>& visit,
                          const std::function<double()>& loss_fn,
                          const std::function<void()>& backward_fn,
                          double step = 1e-5) {
  visit([](Parameter& p) { p.zero_grad(); });
  backward_fn();

  double worst = 0.0;
  visit([&](Parameter& p) {
    if (!p.trainable) return;
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      const double saved = p.value.data()[i];
      p.value.data()[i] = saved + step;
      const double up = loss_fn();
      p.value.data()[i] = saved - step;
      const double down = loss_fn();
      p.value.data()[i] = saved;
      const double fd = (up - down) / (2 * step);
      const double an = p.grad.data()[i];
      const double rel = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
      worst = std::max(worst, rel);
    }
  });
  return worst;
}

}  // namespace

TEST_CASE("linear layer gradients") {
  Rng rng = make_rng(1);
  Linear lin;
  lin.init("t", 5, 3, rng);
  const Mat x = random_mat(7, 5, rng);
  const Mat target = random_mat(7, 3, rng);

  const auto loss = [&] {
    const Mat y = lin.forward(x, false);
    return 0.5 * (y - target).squaredNorm();
  };
  const auto backward = [&] {
    const Mat y = lin.forward(x, true);
    lin.backward(y - target);
  };
  const double err = max_rel_grad_error(
      [&](const ParamVisitor& v) { lin.visit(v); }, loss, backward);
  CHECK(err < 1e-7);
}

TEST_CASE("batchnorm forward and gradients") {
  Rng rng = make_rng(2);
  BatchNorm bn;
  bn.init("t", 4);
  // Non-trivial gamma/beta.
  bn.gamma.value = random_mat(1, 4, rng).cwiseAbs() + Mat::Ones(1, 4);
  bn.beta.value = random_mat(1, 4, rng);
  const Mat x = random_mat(9, 4, rng, 2.0);
  const Mat target = random_mat(9, 4, rng);

  SUBCASE("train mode normalizes to batch statistics") {
    const Mat y = bn.forward(x, true, true, false);
    const Mat xhat = (y.rowwise() - bn.beta.value.row(0)).array().rowwise() /
                     bn.gamma.value.row(0).array();
    CHECK(xhat.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
    const Mat var = xhat.array().square().colwise().mean();
    CHECK((var.array() - 1.0).abs().maxCoeff() < 1e-4);  // eps-deflated
  }
  SUBCASE("eval mode uses running averages") {
    for (int i = 0; i < 400; ++i) bn.forward(x, true, false, true);
    const Mat y_eval = bn.forward(x, false, false, false);
    // Running stats converge to the batch mean and the unbiased variance.
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::RowVectorXd var_unbiased =
        (x.rowwise() - mean).array().square().colwise().sum() /
        static_cast<double>(x.rows() - 1);
    const Eigen::RowVectorXd inv = (var_unbiased.array() + bn.eps).rsqrt();
    Mat expect = (x.rowwise() - mean).array().rowwise() *
                 (inv.array() * bn.gamma.value.row(0).array());
    expect.rowwise() += bn.beta.value.row(0);
    CHECK((y_eval - expect).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("gradients match finite differences") {
    const auto loss = [&] {
      const Mat y = bn.forward(x, true, false, false);
      return 0.5 * (y - target).squaredNorm();
    };
    const auto backward = [&] {
      const Mat y = bn.forward(x, true, true, false);
      bn.backward(y - target);
    };
    const double err = max_rel_grad_error(
        [&](const ParamVisitor& v) { bn.visit(v); }, loss, backward);
    CHECK(err < 1e-6);
  }
  SUBCASE("input gradient matches finite differences") {
    Mat x_var = x;
    Mat d_analytic;
    {
      const Mat y = bn.forward(x_var, true, true, false);
      d_analytic = bn.backward(y - target);
    }
    const auto loss_of_x = [&] {
      const Mat y = bn.forward(x_var, true, false, false);
      return 0.5 * (y - target).squaredNorm();
    };
    double worst = 0;
    for (Eigen::Index i = 0; i < x_var.size(); ++i) {
      const double saved = x_var.data()[i];
      x_var.data()[i] = saved + 1e-5;
      const double up = loss_of_x();
      x_var.data()[i] = saved - 1e-5;
      const double down = loss_of_x();
      x_var.data()[i] = saved;
      const double fd = (up - down) / 2e-5;
      worst = std::max(worst, std::abs(fd - d_analytic.data()[i]));
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("mlp stack gradients") {
  Rng rng = make_rng(3);
  Mlp mlp;
  mlp.init("t", 4, {6, 5}, rng, /*final_activation=*/false);
  const Mat x = random_mat(11, 4, rng);
  const Mat target = random_mat(11, 5, rng);

  const auto loss = [&] {
    const Mat y = mlp.forward(x, true, false, false);
    return 0.5 * (y - target).squaredNorm();
  };
  const auto backward = [&] {
    const Mat y = mlp.forward(x, true, true, false);
    mlp.backward(y - target);
  };
  const double err = max_rel_grad_error(
      [&](const ParamVisitor& v) { mlp.visit(v); }, loss, backward);
  CHECK(err < 1e-6);
}

TEST_CASE("group max pool routes gradients to the argmax") {
  GroupMaxPool pool;
  Mat x(4, 2);
  x << 1, 9, 5, 2, 3, 7, 4, 8;
  const Mat y = pool.forward(x, 2);
  CHECK(y(0, 0) == 5);
  CHECK(y(0, 1) == 9);
  CHECK(y(1, 0) == 4);
  CHECK(y(1, 1) == 8);
  Mat dy(2, 2);
  dy << 1, 2, 3, 4;
  const Mat dx = pool.backward(dy);
  CHECK(dx(1, 0) == 1);
  CHECK(dx(0, 1) == 2);
  CHECK(dx(3, 0) == 3);
  CHECK(dx(3, 1) == 4);
  CHECK(dx.sum() == dy.sum());
}

TEST_CASE("interpolator conserves gradient mass") {
  Rng rng = make_rng(4);
  Interpolator interp;
  interp.neighbors.resize(5, 3);
  interp.weights.resize(5, 3);
  std::uniform_int_distribution<Eigen::Index> pick(0, 3);
  for (Eigen::Index f = 0; f < 5; ++f) {
    double sum = 0;
    for (int j = 0; j < 3; ++j) {
      interp.neighbors(f, j) = pick(rng);
      interp.weights(f, j) = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
      sum += interp.weights(f, j);
    }
    interp.weights.row(f) /= sum;
  }
  const Mat coarse = random_mat(4, 6, rng);
  const Mat y = interp.forward(coarse);
  CHECK(y.rows() == 5);
  const Mat dy = random_mat(5, 6, rng);
  const Mat dx = interp.backward(dy, 4);
  // Forward is linear; verify adjoint identity <dy, forward(c)> == <backward(dy), c>.
  const double lhs = (dy.array() * y.array()).sum();
  const double rhs = (dx.array() * coarse.array()).sum();
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("softmax rows sum to one") {
  Rng rng = make_rng(5);
  const Mat p = softmax_rows(random_mat(6, 7, rng, 3.0));
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(p.minCoeff() >= 0.0);
}

TEST_CASE("one-cycle schedule shape") {
  OneCycleSchedule sched;
  sched.peak = 0.002;
  sched.total_steps = 100;
  const double start = sched.lr_at(0);
  CHECK(start == doctest::Approx(0.0002));
  double peak_seen = 0;
  for (long s = 0; s < 100; ++s) peak_seen = std::max(peak_seen, sched.lr_at(s));
  CHECK(peak_seen == doctest::Approx(0.002).epsilon(1e-6));
  const double final_lr = sched.lr_at(99);
  CHECK(final_lr == doctest::Approx(0.00002).epsilon(1e-6));
  CHECK(final_lr < start);
  // Peak is reached at the warmup boundary.
  CHECK(sched.lr_at(30) > sched.lr_at(10));
  CHECK(sched.lr_at(30) > sched.lr_at(80));
}

TEST_CASE("adam decreases a quadratic") {
  Rng rng = make_rng(6);
  Linear lin;
  lin.init("t", 3, 1, rng);
  const Mat x = random_mat(20, 3, rng);
  const Mat target = x * Mat::Constant(3, 1, 0.7) + Mat::Constant(20, 1, 0.1);
  Adam opt;
  double first_loss = 0, last_loss = 0;
  for (int it = 0; it < 400; ++it) {
    lin.weight.zero_grad();
    lin.bias.zero_grad();
    const Mat y = lin.forward(x, true);
    const Mat err = y - target;
    const double loss = 0.5 * err.squaredNorm() / 20.0;
    lin.backward(err / 20.0);
    opt.step([&](const ParamVisitor& v) { lin.visit(v); }, 0.05);
    if (it == 0) first_loss = loss;
    last_loss = loss;
  }
  CHECK(last_loss < first_loss * 1e-3);
}

TEST_CASE("smooth L1 definition") {
  CHECK(smooth_l1(0.5) == doctest::Approx(0.125));
  CHECK(smooth_l1(0.0) == 0.0);
  CHECK(smooth_l1(2.0) == doctest::Approx(1.5));
  CHECK(smooth_l1(-2.0) == doctest::Approx(1.5));
  CHECK(smooth_l1_grad(0.5) == doctest::Approx(0.5));
  CHECK(smooth_l1_grad(-3.0) == doctest::Approx(-1.0));
}
