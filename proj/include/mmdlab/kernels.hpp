#pragma once

#include "mmdlab/function_classes.hpp"
#include "mmdlab/sample_matrix.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>

namespace mmdlab {

/// Boundedness and Lipschitz constants of a kernel.
///   l   : k(u,.) - k(u',.) is l-Lipschitz for all u, u'
///   nu  : sup_u k(u,u) <= nu
///   b   : sup_{u,u'} ||u - u'|| <= b
/// At least one of nu, b is present.
class KernelConstants {
 public:
  KernelConstants(double l, std::optional<double> nu, std::optional<double> b);

  double l() const noexcept { return l_; }
  const std::optional<double>& nu() const noexcept { return nu_; }
  const std::optional<double>& b() const noexcept { return b_; }

  /// min{4 nu, l b} with an absent constant read as +inf.
  double min_term() const noexcept;

 private:
  double l_;
  std::optional<double> nu_;
  std::optional<double> b_;
};

/// A reproducing kernel k(u, u'). Immutable after construction.
class KernelSpec {
 public:
  /// exp(-||u-u'||^2 / sigma^2)
  struct Gaussian {
    double sigma;
  };
  /// exp(-||u-u'||_1 / sigma)
  struct Laplacian {
    double sigma;
  };
  /// profile(u - u') with user-certified constants of the profile:
  /// profile(0) <= nu_t and profile is l_t-Lipschitz.
  struct TranslationInvariant {
    std::function<double(std::span<const double>)> profile;
    std::optional<double> nu_t;
    std::optional<double> l_t;
    std::string name;
  };
  /// base(f(u), f(u')).
  struct Composite {
    std::shared_ptr<const KernelSpec> base;
    FunctionMap feature;
  };
  using Kind = std::variant<Gaussian, Laplacian, TranslationInvariant, Composite>;

  /// sigma may be negative; it enters only through sigma^2. `dim` pins the
  /// input dimension when set.
  static KernelSpec gaussian(double sigma, std::optional<std::size_t> dim = std::nullopt);
  static KernelSpec laplacian(double sigma, std::optional<std::size_t> dim = std::nullopt);
  static KernelSpec translation_invariant(std::function<double(std::span<const double>)> profile,
                                          std::optional<double> nu_t, std::optional<double> l_t,
                                          std::optional<std::size_t> dim = std::nullopt,
                                          std::string name = {});

  const Kind& kind() const noexcept { return kind_; }
  /// Required input dimension, if the kernel fixes one.
  std::optional<std::size_t> input_dim() const noexcept;

  double eval(std::span<const double> u, std::span<const double> v) const;

 private:
  KernelSpec(Kind kind, std::optional<std::size_t> dim) : kind_(std::move(kind)), dim_(dim) {}
  friend KernelSpec compose(const KernelSpec&, const FunctionMap&);

  Kind kind_;
  std::optional<std::size_t> dim_;
};

/// k o f.
KernelSpec compose(const KernelSpec& kernel, const FunctionMap& feature);

inline double eval(const KernelSpec& k, std::span<const double> u, std::span<const double> v) {
  return k.eval(u, v);
}

/// Constants on a `dim`-dimensional domain; `support_diameter` populates b.
KernelConstants certified_constants(const KernelSpec& kernel, std::size_t dim,
                                    std::optional<double> support_diameter = std::nullopt);

/// K_ij = k(X_i, X_j).
Eigen::MatrixXd gram_matrix(const KernelSpec& kernel, const SampleMatrix& X);

/// K_ij = k(X_i, Y_j).
Eigen::MatrixXd cross_gram(const KernelSpec& kernel, const SampleMatrix& X, const SampleMatrix& Y);

}  // namespace mmdlab
