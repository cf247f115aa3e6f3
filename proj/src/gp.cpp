#include "bbo/gp.hpp"

#include <algorithm>
#include <cmath>

namespace bbo {

namespace {
constexpr double kPathJitterScale = 1e-10;
}

GPModel GPModel::fit(KernelSpec spec, KernelHyperparams hp, std::vector<GPInput> inputs,
                     Eigen::VectorXd y, double mean_offset) {
  require(static_cast<std::size_t>(y.size()) == inputs.size(), ErrorCode::ArityMismatch,
          "observation count does not match input count");
  hp.validate();
  GPModel gp;
  gp.spec_ = std::move(spec);
  gp.hp_ = std::move(hp);
  gp.inputs_ = std::move(inputs);
  gp.y_ = std::move(y);
  gp.mean_offset_ = mean_offset;
  const int n = gp.size();
  if (n == 0) return gp;

  Eigen::MatrixXd k = gram_matrix(gp.spec_, gp.hp_, gp.inputs_);
  const double base_jitter = 1e-9 * k.trace() / n;
  double jitter = 0.0;
  while (true) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += gp.hp_.noise_var + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      gp.chol_ = llt.matrixL();
      gp.jitter_ = jitter;
      break;
    }
    if (jitter == 0.0) {
      jitter = base_jitter;
    } else if (jitter < 1e-3 * k.trace() / n) {
      jitter *= 10.0;
    } else {
      raise(ErrorCode::SingularGram, "factorization failed after jitter escalation");
    }
  }
  gp.white_ = gp.chol_.triangularView<Eigen::Lower>().solve(
      (gp.y_.array() - gp.mean_offset_).matrix());
  return gp;
}

GPModel GPModel::fit_centered(KernelSpec spec, KernelHyperparams hp,
                              std::vector<GPInput> inputs, Eigen::VectorXd y) {
  const double mean = y.size() > 0 ? y.mean() : 0.0;
  return fit(std::move(spec), std::move(hp), std::move(inputs), std::move(y), mean);
}

Eigen::VectorXd GPModel::cross_vector(const GPInput& q) const {
  Eigen::VectorXd k(size());
  for (int i = 0; i < size(); ++i) {
    k(i) = kernel_eval(spec_, hp_, inputs_[static_cast<std::size_t>(i)], q);
  }
  return k;
}

Posterior GPModel::posterior(const GPInput& q) const {
  Posterior post;
  const double self = kernel_eval(spec_, hp_, q, q);
  if (size() == 0) {
    post.mean = mean_offset_;
    post.var_raw = self;
    post.sigma = std::sqrt(std::max(0.0, self));
    return post;
  }
  const Eigen::VectorXd k = cross_vector(q);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  post.mean = mean_offset_ + v.dot(white_);
  post.var_raw = self - v.squaredNorm();
  post.sigma = std::sqrt(std::max(0.0, post.var_raw));
  return post;
}

Posterior GPModel::posterior_component(int j, const Point& xj,
                                       const std::optional<FidelityPoint>& fid) const {
  const int m = spec_.num_groups();
  Posterior post;
  const double self = kernel_group_self(spec_, hp_, j, xj, fid);
  if (size() == 0) {
    post.mean = mean_offset_ / m;
    post.var_raw = self;
    post.sigma = std::sqrt(std::max(0.0, self));
    return post;
  }
  Eigen::VectorXd kj(size());
  for (int i = 0; i < size(); ++i) {
    kj(i) = kernel_eval_group(spec_, hp_, j, inputs_[static_cast<std::size_t>(i)], xj, fid);
  }
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(kj);
  post.mean = mean_offset_ / m + v.dot(white_);
  post.var_raw = self - v.squaredNorm();
  post.sigma = std::sqrt(std::max(0.0, post.var_raw));
  return post;
}

double GPModel::posterior_cov(const GPInput& a, const GPInput& b) const {
  const double prior = kernel_eval(spec_, hp_, a, b);
  if (size() == 0) return prior;
  const Eigen::VectorXd va = chol_.triangularView<Eigen::Lower>().solve(cross_vector(a));
  const Eigen::VectorXd vb = chol_.triangularView<Eigen::Lower>().solve(cross_vector(b));
  return prior - va.dot(vb);
}

double GPModel::log_marginal_likelihood() const {
  require(size() >= 1, ErrorCode::EmptyData, "marginal likelihood of an empty model");
  const double quad = white_.squaredNorm();
  const double logdet = 2.0 * chol_.diagonal().array().log().sum();
  return -0.5 * quad - 0.5 * logdet - 0.5 * size() * std::log(2.0 * M_PI);
}

Eigen::VectorXd GPModel::joint_sample(const std::vector<GPInput>& points, Rng& rng) const {
  require(!points.empty(), ErrorCode::EmptyData, "joint_sample needs at least one point");
  const Eigen::Index m = static_cast<Eigen::Index>(points.size());
  Eigen::VectorXd mean(m);
  Eigen::MatrixXd cov(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    mean(i) = posterior(points[static_cast<std::size_t>(i)]).mean;
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double c = posterior_cov(points[static_cast<std::size_t>(i)],
                                     points[static_cast<std::size_t>(j)]);
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  require(mean.allFinite() && cov.allFinite(), ErrorCode::SingularCovariance,
          "posterior covariance is not finite");
  // Eigendecomposition with negative eigenvalues clamped to zero: degenerate
  // directions contribute exactly nothing, so observed values reproduce.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  require(eig.info() == Eigen::Success, ErrorCode::SingularCovariance,
          "eigendecomposition of the posterior covariance failed");
  Eigen::VectorXd noise(m);
  for (Eigen::Index i = 0; i < m; ++i) noise(i) = standard_normal(rng);
  const Eigen::VectorXd scale = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return mean + eig.eigenvectors() * scale.asDiagonal() * noise;
}

void GPModel::append_rows(const std::vector<GPInput>& inputs, const Eigen::VectorXd& values,
                          double diag_add) {
  const int n0 = size();
  const int add = static_cast<int>(inputs.size());
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(n0 + add, n0 + add);
  chol.topLeftCorner(n0, n0) = chol_;
  Eigen::VectorXd white(n0 + add);
  white.head(n0) = white_;

  inputs_.reserve(static_cast<std::size_t>(n0 + add));
  Eigen::VectorXd y(n0 + add);
  y.head(n0) = y_;
  const double floor = kPathJitterScale * std::max(hp_.scale, 1e-12);
  for (int t = 0; t < add; ++t) {
    const int mcur = n0 + t;
    const GPInput& q = inputs[static_cast<std::size_t>(t)];
    Eigen::VectorXd k(mcur);
    for (int i = 0; i < mcur; ++i) {
      k(i) = kernel_eval(spec_, hp_, inputs_[static_cast<std::size_t>(i)], q);
    }
    const double self = kernel_eval(spec_, hp_, q, q) + diag_add;
    Eigen::VectorXd w(mcur);
    if (mcur > 0) {
      w = chol.topLeftCorner(mcur, mcur).triangularView<Eigen::Lower>().solve(k);
      chol.row(mcur).head(mcur) = w.transpose();
    }
    const double s2 = self - (mcur > 0 ? w.squaredNorm() : 0.0);
    const double s = std::sqrt(std::max(s2, floor));
    chol(mcur, mcur) = s;
    const double resid = values(t) - mean_offset_ - (mcur > 0 ? w.dot(white.head(mcur)) : 0.0);
    white(mcur) = resid / s;
    inputs_.push_back(q);
    y(mcur) = values(t);
  }
  chol_ = std::move(chol);
  white_ = std::move(white);
  y_ = std::move(y);
}

GPModel GPModel::extended(const std::vector<GPInput>& inputs, const Eigen::VectorXd& values,
                          double diag_add) const {
  require(static_cast<std::size_t>(values.size()) == inputs.size(), ErrorCode::ArityMismatch,
          "extension value count does not match input count");
  GPModel out = *this;
  if (inputs.empty()) return out;
  if (out.size() == 0) {
    return fit(spec_, hp_, inputs, values, mean_offset_);
  }
  out.append_rows(inputs, values, diag_add);
  return out;
}

GPModel GPModel::hallucinate(const std::vector<GPInput>& pending) const {
  if (pending.empty()) return *this;
  Eigen::VectorXd means(static_cast<Eigen::Index>(pending.size()));
  for (std::size_t i = 0; i < pending.size(); ++i) {
    means(static_cast<Eigen::Index>(i)) = posterior(pending[i]).mean;
  }
  return extended(pending, means, hp_.noise_var);
}

ThompsonSample::ThompsonSample(const GPModel& gp, Rng& rng)
    : spec_(gp.spec()), hp_(gp.hp()), mean_offset_(gp.mean_offset()), rng_(&rng),
      pts_(gp.inputs()), m_(gp.size()) {
  const int cap = m_ + 64;
  chol_ = Eigen::MatrixXd::Zero(cap, cap);
  white_ = Eigen::VectorXd::Zero(cap);
  if (m_ > 0) {
    chol_.topLeftCorner(m_, m_) = gp.factor();
    white_.head(m_) = gp.whitened();
  }
}

void ThompsonSample::reserve(int capacity) {
  if (chol_.rows() >= capacity) return;
  const int cap = std::max<int>(capacity, static_cast<int>(chol_.rows()) * 2);
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(cap, cap);
  chol.topLeftCorner(m_, m_) = chol_.topLeftCorner(m_, m_);
  Eigen::VectorXd white = Eigen::VectorXd::Zero(cap);
  white.head(m_) = white_.head(m_);
  chol_ = std::move(chol);
  white_ = std::move(white);
}

double ThompsonSample::value(const GPInput& q) {
  for (const auto& [input, v] : seen_) {
    if (input == q) return v;
  }
  reserve(m_ + 1);
  const double self = kernel_eval(spec_, hp_, q, q);
  double mean = mean_offset_;
  double s2 = self;
  Eigen::VectorXd w;
  if (m_ > 0) {
    Eigen::VectorXd k(m_);
    for (int i = 0; i < m_; ++i) {
      k(i) = kernel_eval(spec_, hp_, pts_[static_cast<std::size_t>(i)], q);
    }
    w = chol_.topLeftCorner(m_, m_).triangularView<Eigen::Lower>().solve(k);
    mean += w.dot(white_.head(m_));
    s2 -= w.squaredNorm();
  }
  const double sigma = std::sqrt(std::max(0.0, s2));
  const double draw = mean + sigma * standard_normal(*rng_);
  // Condition the path on the drawn value (noiseless, tiny jitter floor).
  const double floor = kPathJitterScale * std::max(hp_.scale, 1e-12);
  const double s = std::sqrt(std::max(s2, floor));
  if (m_ > 0) chol_.row(m_).head(m_) = w.transpose();
  chol_(m_, m_) = s;
  white_(m_) = (draw - mean) / s;
  pts_.push_back(q);
  ++m_;
  seen_.emplace_back(q, draw);
  return draw;
}

}  // namespace bbo
