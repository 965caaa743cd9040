#pragma once

#include "mmdlab/distributions.hpp"
#include "mmdlab/kernels.hpp"
#include "mmdlab/rng.hpp"
#include "mmdlab/sample_matrix.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>

namespace mmdlab {

enum class EstimatorKind { u_statistic, v_statistic, closed_form, monte_carlo };

std::string_view to_string(EstimatorKind kind) noexcept;

/// A squared-MMD value. v_statistic and closed_form values are >= 0; a
/// U-statistic may be negative.
struct MmdEstimate {
  double value = 0.0;
  EstimatorKind estimator = EstimatorKind::u_statistic;
  std::optional<double> std_error;
};

/// h(z_i, z_j) = k(x_i,x_j) + k(y_i,y_j) - k(x_i,y_j) - k(y_i,x_j).
double h_term(const KernelSpec& kernel, std::span<const double> xi, std::span<const double> yi,
              std::span<const double> xj, std::span<const double> yj);

/// Unbiased estimate (1/(n(n-1))) sum_{i != j} h(z_i, z_j). Needs X.n == Y.n >= 2.
MmdEstimate mmd_u_squared(const KernelSpec& kernel, const SampleMatrix& X, const SampleMatrix& Y);

/// Biased estimate (1/n^2) sum_{i,j} [k(X_i,X_j) + k(Y_i,Y_j) - 2 k(X_i,Y_j)].
MmdEstimate mmd_v_squared(const KernelSpec& kernel, const SampleMatrix& X, const SampleMatrix& Y);

/// The same estimators from precomputed Gram blocks (Kxy(i,j) = k(X_i, Y_j)).
double mmd_u_squared_from_grams(const Eigen::MatrixXd& Kxx, const Eigen::MatrixXd& Kyy, const Eigen::MatrixXd& Kxy);
double mmd_v_squared_from_grams(const Eigen::MatrixXd& Kxx, const Eigen::MatrixXd& Kyy, const Eigen::MatrixXd& Kxy);

/// Population squared MMD under the Gaussian kernel exp(-||u-u'||^2/sigma^2)
/// between two Gaussian laws, from
///   E exp(-||W||^2/s) = det(I + 2S/s)^{-1/2} exp(-m^T (sI + 2S)^{-1} m),  W ~ N(m, S), s = sigma^2.
MmdEstimate population_mmd_squared_gaussian_closed_form(double sigma, const GaussianDistSpec& P,
                                                        const GaussianDistSpec& Q);

using Sampler = std::function<SampleMatrix(std::size_t, Rng&)>;

Sampler make_sampler(Distribution dist);
/// Draws from `dist` and pushes the draws through `map`.
Sampler make_sampler(Distribution dist, FunctionMap map);

/// Large-sample oracle: m draws per side, paired into m/2 independent
/// (z, z') pairs; value is the mean of h over the pairs and std_error comes
/// from the h-term sample variance. Batches use substreams of `seed`, so the
/// value does not depend on `threads`.
MmdEstimate population_mmd_squared_monte_carlo(const KernelSpec& kernel, const Sampler& P, const Sampler& Q,
                                               std::size_t m, std::uint64_t seed, unsigned threads = 1);

}  // namespace mmdlab
