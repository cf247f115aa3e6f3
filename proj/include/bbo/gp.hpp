#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bbo/kernel.hpp"
#include "bbo/rng.hpp"

namespace bbo {

struct Posterior {
  double mean = 0.0;
  double sigma = 0.0;
  double var_raw = 0.0;  // variance before clamping at zero
};

// Exact GP regression over mixed queries. Models are immutable once fitted;
// conditioning variants (hallucinate / extended) return new models that share
// nothing mutable with the original, so concurrent readers are safe.
class GPModel {
 public:
  GPModel() = default;

  // Fits the GP to (inputs, y) under a constant prior mean `mean_offset`.
  // Factorization failures escalate a diagonal jitter from 1e-9*tr(K)/n by
  // factors of 10 up to 1e-3*tr(K)/n before throwing SingularGram.
  static GPModel fit(KernelSpec spec, KernelHyperparams hp, std::vector<GPInput> inputs,
                     Eigen::VectorXd y, double mean_offset = 0.0);

  // Same, with the prior mean set to the average observation.
  static GPModel fit_centered(KernelSpec spec, KernelHyperparams hp,
                              std::vector<GPInput> inputs, Eigen::VectorXd y);

  int size() const { return static_cast<int>(inputs_.size()); }
  const KernelSpec& spec() const { return spec_; }
  const KernelHyperparams& hp() const { return hp_; }
  const std::vector<GPInput>& inputs() const { return inputs_; }
  const Eigen::VectorXd& observations() const { return y_; }
  double mean_offset() const { return mean_offset_; }
  double jitter() const { return jitter_; }
  // Lower-triangular factor L with L L^T = K + (eta^2 + jitter) I, and the
  // whitened residual L^{-1} (y - mean_offset).
  const Eigen::MatrixXd& factor() const { return chol_; }
  const Eigen::VectorXd& whitened() const { return white_; }

  Posterior posterior(const GPInput& q) const;

  // Posterior of the j-th additive component at group coordinates xj
  // (Gaussian with the full-data Gram in the conditioning term). fid is
  // required when the kernel is a product over a fidelity space.
  Posterior posterior_component(int j, const Point& xj,
                                const std::optional<FidelityPoint>& fid = std::nullopt) const;

  // Cross-covariance of the posterior at two queries.
  double posterior_cov(const GPInput& a, const GPInput& b) const;

  double log_marginal_likelihood() const;

  // One draw from the joint posterior at `points` (jittered eigendecomposition
  // of the posterior covariance; exactly reproduces observations where the
  // posterior is degenerate).
  Eigen::VectorXd joint_sample(const std::vector<GPInput>& points, Rng& rng) const;

  // Conditions on pending queries at their current posterior means. Keeps the
  // posterior mean everywhere and shrinks variance around the pending points.
  GPModel hallucinate(const std::vector<GPInput>& pending) const;

  // New model conditioned on extra (input, value) pairs via factor appends;
  // diag_add is added to the appended diagonal (noise variance for real
  // observations, a small jitter for noiseless path conditioning).
  GPModel extended(const std::vector<GPInput>& inputs, const Eigen::VectorXd& values,
                   double diag_add) const;

 private:
  KernelSpec spec_;
  KernelHyperparams hp_;
  std::vector<GPInput> inputs_;
  Eigen::VectorXd y_;
  double mean_offset_ = 0.0;
  double jitter_ = 0.0;

  Eigen::MatrixXd chol_;   // lower-triangular L with L L^T = K + eta^2 I
  Eigen::VectorXd white_;  // L^{-1} (y - mean_offset)

  Eigen::VectorXd cross_vector(const GPInput& q) const;
  void append_rows(const std::vector<GPInput>& inputs, const Eigen::VectorXd& values,
                   double diag_add);
};

// Consistent lazily-extended draw from a GP posterior: each queried point is
// sampled conditioned on the data and on every previously sampled point, so
// one object behaves as a single fixed sample path during an optimization
// call. Appends extend the Cholesky factor in place (amortized O(m^2) per
// new point).
class ThompsonSample {
 public:
  ThompsonSample(const GPModel& gp, Rng& rng);

  double value(const GPInput& q);

 private:
  void reserve(int capacity);

  KernelSpec spec_;
  KernelHyperparams hp_;
  double mean_offset_ = 0.0;
  Rng* rng_;
  std::vector<GPInput> pts_;
  Eigen::MatrixXd chol_;   // capacity-managed; active block is m_ x m_
  Eigen::VectorXd white_;
  int m_ = 0;
  std::vector<std::pair<GPInput, double>> seen_;
};

}  // namespace bbo
