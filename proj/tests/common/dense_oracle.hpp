#pragma once

// From-scratch dense-linear-algebra reference for GP quantities. Everything
// here goes through an explicit matrix inverse rather than the library's
// Cholesky path, so it can serve as an independent check of that path.

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "bbo/gp.hpp"
#include "bbo/kernel.hpp"

namespace bbo_test {

struct DenseOracle {
  bbo::KernelSpec spec;
  bbo::KernelHyperparams hp;
  std::vector<bbo::GPInput> inputs;
  Eigen::VectorXd y;
  double mean_offset = 0.0;
  double extra_diag = 0.0;  // effective jitter, when comparing to a jittered fit

  Eigen::MatrixXd system_matrix() const {
    const Eigen::Index n = static_cast<Eigen::Index>(inputs.size());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        a(i, j) = bbo::kernel_eval(spec, hp, inputs[static_cast<std::size_t>(i)],
                                   inputs[static_cast<std::size_t>(j)]);
      }
    }
    a.diagonal().array() += hp.noise_var + extra_diag;
    return a;
  }

  Eigen::MatrixXd inverse() const {
    return system_matrix().fullPivLu().inverse();
  }

  std::pair<double, double> posterior_mean_var(const bbo::GPInput& q) const {
    const double self = bbo::kernel_eval(spec, hp, q, q);
    if (inputs.empty()) return {mean_offset, self};
    const Eigen::Index n = static_cast<Eigen::Index>(inputs.size());
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      k(i) = bbo::kernel_eval(spec, hp, inputs[static_cast<std::size_t>(i)], q);
    }
    const Eigen::MatrixXd inv = inverse();
    const double mean = mean_offset + k.dot(inv * (y.array() - mean_offset).matrix());
    const double var = self - k.dot(inv * k);
    return {mean, var};
  }

  // Component posterior of group j for additive kernels, conditioning on the
  // full additive Gram.
  std::pair<double, double> component_mean_var(int j, const bbo::Point& xj,
                                               const std::optional<bbo::Point>& fid) const {
    const int m = spec.num_groups();
    const double self = bbo::kernel_group_self(spec, hp, j, xj, fid);
    if (inputs.empty()) return {mean_offset / m, self};
    const Eigen::Index n = static_cast<Eigen::Index>(inputs.size());
    Eigen::VectorXd kj(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      kj(i) = bbo::kernel_eval_group(spec, hp, j, inputs[static_cast<std::size_t>(i)], xj, fid);
    }
    const Eigen::MatrixXd inv = inverse();
    const double mean = mean_offset / m + kj.dot(inv * (y.array() - mean_offset).matrix());
    const double var = self - kj.dot(inv * kj);
    return {mean, var};
  }

  double log_marginal_likelihood() const {
    const Eigen::Index n = static_cast<Eigen::Index>(inputs.size());
    const Eigen::MatrixXd a = system_matrix();
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    const Eigen::VectorXd r = (y.array() - mean_offset).matrix();
    const double quad = r.dot(lu.solve(r));
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      logdet += std::log(std::fabs(lu.matrixLU()(i, i)));
    }
    return -0.5 * quad - 0.5 * logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
  }

  static DenseOracle of(const bbo::GPModel& gp) {
    DenseOracle o;
    o.spec = gp.spec();
    o.hp = gp.hp();
    o.inputs = gp.inputs();
    o.y = gp.observations();
    o.mean_offset = gp.mean_offset();
    o.extra_diag = gp.jitter();
    return o;
  }
};

}  // namespace bbo_test
