#include "mmdlab/distributions.hpp"

#include "mmdlab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace mmdlab {

GaussianDistSpec::GaussianDistSpec(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  const auto d = mean_.size();
  if (d == 0) throw ArgumentError("gaussian distribution needs dim >= 1");
  if (cov_.rows() != d || cov_.cols() != d) throw ArgumentError("covariance shape does not match mean");
  if (!mean_.allFinite() || !cov_.allFinite()) throw ArgumentError("gaussian parameters must be finite");
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ArgumentError("covariance is not symmetric");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_);
  const double tol = 1e-12 * std::max(1.0, cov_.cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -tol) throw ArgumentError("covariance is not positive semidefinite");
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  factor_ = eig.eigenvectors() * root.asDiagonal();
  // Exact zeros keep point masses exact.
  if (cov_.isZero(0.0)) factor_.setZero();
}

GaussianDistSpec GaussianDistSpec::standard(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return {Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d)};
}

GaussianDistSpec GaussianDistSpec::point_mass(Eigen::VectorXd at) {
  const auto d = at.size();
  return {std::move(at), Eigen::MatrixXd::Zero(d, d)};
}

GaussianDistSpec GaussianDistSpec::push_forward(const AffineForm& map) const {
  if (map.A.cols() != mean_.size()) throw ArgumentError("affine map input dim does not match distribution");
  Eigen::MatrixXd cov = map.A * cov_ * map.A.transpose();
  cov = 0.5 * (cov + cov.transpose());
  return {map.A * mean_ + map.c, std::move(cov)};
}

SampleMatrix GaussianDistSpec::draw(std::size_t n, Rng& rng) const {
  const auto d = mean_.size();
  std::normal_distribution<double> normal;
  RowMatrix out(static_cast<Eigen::Index>(n), d);
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (auto& v : z) v = normal(rng);
    out.row(i) = (mean_ + factor_ * z).transpose();
  }
  return SampleMatrix(std::move(out));
}

UniformBox::UniformBox(Eigen::VectorXd lo, Eigen::VectorXd hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() == 0 || lo_.size() != hi_.size()) throw ArgumentError("uniform box bounds must have equal nonzero length");
  if (!lo_.allFinite() || !hi_.allFinite()) throw ArgumentError("uniform box bounds must be finite");
  if ((hi_.array() < lo_.array()).any()) throw ArgumentError("uniform box needs lo <= hi");
}

SampleMatrix UniformBox::draw(std::size_t n, Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  RowMatrix out(static_cast<Eigen::Index>(n), lo_.size());
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index k = 0; k < out.cols(); ++k) out(i, k) = lo_[k] + (hi_[k] - lo_[k]) * unif(rng);
  return SampleMatrix(std::move(out));
}

std::size_t Distribution::dim() const noexcept {
  return std::visit([](const auto& law) { return law.dim(); }, law_);
}

SampleMatrix Distribution::draw(std::size_t n, Rng& rng) const {
  return std::visit([&](const auto& law) { return law.draw(n, rng); }, law_);
}

}  // namespace mmdlab
