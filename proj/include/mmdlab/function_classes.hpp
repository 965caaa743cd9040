#pragma once

#include "mmdlab/sample_matrix.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace mmdlab {

enum class Activation { relu, tanh };

/// x -> A x + c, the closed form every affine chain collapses to.
struct AffineForm {
  Eigen::MatrixXd A;
  Eigen::VectorXd c;
};

/// A deterministic map R^{d_in} -> R^{d_out}: a generator g or an adversarial
/// feature f.
class FunctionMap {
 public:
  struct Identity {
    std::size_t dim;
  };
  struct Affine {
    Eigen::MatrixXd A;
    Eigen::VectorXd c;
  };
  /// x -> W2 act(W1 x + b1) + b2, with `l_sigma` the declared Lipschitz
  /// constant of the activation.
  struct ShallowNet {
    Eigen::MatrixXd W1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd W2;
    Eigen::VectorXd b2;
    Activation activation;
    double l_sigma;
  };
  /// outer(inner(x)).
  struct Composed {
    std::shared_ptr<const FunctionMap> outer;
    std::shared_ptr<const FunctionMap> inner;
  };
  using Kind = std::variant<Identity, Affine, ShallowNet, Composed>;

  static FunctionMap identity(std::size_t dim);
  static FunctionMap affine(Eigen::MatrixXd A, Eigen::VectorXd c);
  /// `l_sigma` defaults to 1 for both relu and tanh.
  static FunctionMap shallow_net(Eigen::MatrixXd W1, Eigen::VectorXd b1, Eigen::MatrixXd W2,
                                 Eigen::VectorXd b2, Activation activation,
                                 std::optional<double> l_sigma = std::nullopt);
  /// outer o inner. Identity factors are dropped and affine-affine chains are
  /// folded into a single affine map.
  static FunctionMap compose(const FunctionMap& outer, const FunctionMap& inner);

  std::size_t input_dim() const noexcept;
  std::size_t output_dim() const noexcept;
  const Kind& kind() const noexcept { return kind_; }

  /// Writes f(x) into `out` (size output_dim()).
  void apply(std::span<const double> x, std::span<double> out) const;
  Eigen::VectorXd operator()(std::span<const double> x) const;

  /// Set when the map is affine (identity, affine, or a chain of those).
  std::optional<AffineForm> as_affine() const;

 private:
  explicit FunctionMap(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

/// Row i of the result is f(X_i).
SampleMatrix apply_map(const FunctionMap& f, const SampleMatrix& X);

/// Largest singular value by power iteration on A^T A (fixed start vector,
/// at most 1000 iterations, 1e-10 relative tolerance).
double spectral_norm(const Eigen::MatrixXd& A);

/// Certified Lipschitz constant w.r.t. the Euclidean norm.
double map_lipschitz_bound(const FunctionMap& f);

/// Nonempty ordered list of maps sharing input and output dimension.
class FiniteFunctionClass {
 public:
  FiniteFunctionClass(std::vector<FunctionMap> members, std::string label = {});

  /// The class {identity on R^dim}.
  static FiniteFunctionClass singleton_identity(std::size_t dim, std::string label = "identity");

  std::size_t size() const noexcept { return members_.size(); }
  const FunctionMap& operator[](std::size_t i) const { return members_.at(i); }
  const std::vector<FunctionMap>& members() const noexcept { return members_; }
  const std::string& label() const noexcept { return label_; }
  std::size_t input_dim() const noexcept { return members_.front().input_dim(); }
  std::size_t output_dim() const noexcept { return members_.front().output_dim(); }

  /// Largest member Lipschitz bound.
  double lipschitz_bound() const;

  /// g(X) for every member, in member order.
  std::vector<SampleMatrix> values_on(const SampleMatrix& X) const;

 private:
  std::vector<FunctionMap> members_;
  std::string label_;
};

enum class GridFamily {
  shift,           ///< x -> x + theta, theta in R^d
  scale,           ///< x -> theta .* x, theta in R^d
  location_scale,  ///< x -> theta[0:d] .* x + theta[d:2d], theta in R^{2d}
};

/// A parametric family evaluated on an explicit parameter grid (an eps-net of
/// the parameter set).
struct GridClassSpec {
  GridFamily family = GridFamily::shift;
  std::size_t dim = 1;
  std::vector<std::vector<double>> grid;
  /// Optional box [lo, hi] every parameter coordinate must lie in.
  std::optional<std::pair<double, double>> box;
  /// Declared net resolution. Metadata only.
  std::optional<double> epsilon;
  std::string label;
};

/// One member per grid point, in grid order.
FiniteFunctionClass materialize_grid(const GridClassSpec& spec);

/// {f o g}: |F|*|G| members, f-outer / g-inner (index f*|G| + g).
FiniteFunctionClass compose_classes(const FiniteFunctionClass& F, const FiniteFunctionClass& G);

/// Natural log of the sup-norm covering number bound for one-hidden-layer
/// networks with d0 inputs, d1 hidden units, weights bounded by B and
/// inputs bounded by Bx:
///   (16 B^2 (Bx+1) sqrt(d0) d1 / eps)^(d0 d1 + 2 d1 + 1) * l_sigma^(d0 d1 + d1) / d1!
double shallow_net_log_covering_bound(int d0, int d1, double B, double Bx, double l_sigma, double eps);

}  // namespace mmdlab
