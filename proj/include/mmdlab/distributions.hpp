#pragma once

#include "mmdlab/function_classes.hpp"
#include "mmdlab/rng.hpp"
#include "mmdlab/sample_matrix.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <variant>

namespace mmdlab {

/// N(mean, cov). Covariance must be symmetric (to 1e-12) and PSD; zero
/// covariance is a point mass.
class GaussianDistSpec {
 public:
  GaussianDistSpec(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  static GaussianDistSpec standard(std::size_t dim);
  static GaussianDistSpec point_mass(Eigen::VectorXd at);

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& cov() const noexcept { return cov_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }

  /// Law of A X + c.
  GaussianDistSpec push_forward(const AffineForm& map) const;

  SampleMatrix draw(std::size_t n, Rng& rng) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd factor_;  // factor_ * factor_^T == cov_
};

/// Uniform on the box [lo, hi] (coordinatewise).
class UniformBox {
 public:
  UniformBox(Eigen::VectorXd lo, Eigen::VectorXd hi);

  const Eigen::VectorXd& lo() const noexcept { return lo_; }
  const Eigen::VectorXd& hi() const noexcept { return hi_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(lo_.size()); }
  /// Euclidean diameter of the box.
  double diameter() const noexcept { return (hi_ - lo_).norm(); }

  SampleMatrix draw(std::size_t n, Rng& rng) const;

 private:
  Eigen::VectorXd lo_;
  Eigen::VectorXd hi_;
};

/// A data-generating distribution P (for X) or Q (for Y).
class Distribution {
 public:
  Distribution(GaussianDistSpec g) : law_(std::move(g)) {}  // NOLINT(google-explicit-constructor)
  Distribution(UniformBox u) : law_(std::move(u)) {}        // NOLINT(google-explicit-constructor)

  std::size_t dim() const noexcept;
  SampleMatrix draw(std::size_t n, Rng& rng) const;

  const GaussianDistSpec* gaussian() const noexcept { return std::get_if<GaussianDistSpec>(&law_); }

 private:
  std::variant<GaussianDistSpec, UniformBox> law_;
};

}  // namespace mmdlab
