#pragma once

#include "mmdlab/function_classes.hpp"
#include "mmdlab/kernels.hpp"
#include "mmdlab/mmd.hpp"
#include "mmdlab/rng.hpp"
#include "mmdlab/sample_matrix.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

namespace mmdlab {

/// Monte-Carlo (or exact) estimate of a complexity measure.
struct ComplexityEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t inner_replicates = 0;
  std::size_t outer_replicates = 1;
  std::uint64_t seed = 0;
  /// True when the expectation was computed by full sign enumeration.
  bool exact = false;
  /// Variance components of `std_error^2` for nested (outer x inner) estimates.
  double between_variance = 0.0;
  double within_variance = 0.0;
};

/// Lipschitz-type seminorms of a multivariate statistic.
struct SeminormBounds {
  double m_lip = 0.0;
  double j_lip = 0.0;
  double m_bound = 0.0;
};

/// G_n(S) = E_Z sup_{s in S} |<Z, s>| / n with Z ~ N(0, I_{nd}); each class
/// member contributes s = vec(g(X)) (row-major). Replicate r draws its Z from
/// substream r of `seed`, so two calls with the same seed and shape see the
/// same Z stream.
ComplexityEstimate empirical_gaussian_complexity(std::span<const SampleMatrix> class_values, std::size_t replicates,
                                                 std::uint64_t seed, unsigned threads = 1);

enum class RademacherMode {
  automatic,  ///< exact enumeration when nd <= 20, sampling otherwise
  exact,
  sampled,
};

/// R_n(S) = E_rho sup_{s in S} |<rho, s>| / n with rho uniform on {-1,+1}^{nd}.
ComplexityEstimate empirical_rademacher_complexity(std::span<const SampleMatrix> class_values, std::size_t replicates,
                                                   std::uint64_t seed, RademacherMode mode = RademacherMode::automatic,
                                                   unsigned threads = 1);

/// E_rho sup_{f in F} |(2/(n(n-1))) sum_{i<j} rho_i rho_j (k o f)(X_i, X_j)|.
ComplexityEstimate empirical_rademacher_chaos(const KernelSpec& kernel, const FiniteFunctionClass& features,
                                              const SampleMatrix& X, std::size_t replicates, std::uint64_t seed,
                                              unsigned threads = 1);

/// E_X G_n(class(X)) with X an n-row draw from `sampler`: `outer` fresh
/// samples, each scored with `inner` Gaussian replicates. The inner Z stream
/// is shared across outer draws, so a point-mass sampler gives exactly zero
/// between-sample variance. std_error^2 = between + within, where between is
/// the variance of the per-sample means over `outer` and within is the mean
/// squared inner standard error.
ComplexityEstimate expected_complexity(const FiniteFunctionClass& cls, const Sampler& sampler, std::size_t n,
                                       std::size_t outer, std::size_t inner, std::uint64_t seed,
                                       unsigned threads = 1);

/// Seminorms of an order-m U-statistic with kernel seminorms (L, B) over n
/// points: (L m/n, L m^2/n, B m/n).
SeminormBounds u_statistic_seminorm_bounds(double L, double B, std::size_t m, std::size_t n);

/// Seminorms of the MMD kernel h: M_Lip(h) <= sqrt(2) l, M(h) <= 2 min{4 nu, l b}.
SeminormBounds mmd_kernel_seminorm_bounds(const KernelConstants& constants);

/// Draws a point of the kernel domain.
using PointSampler = std::function<Eigen::VectorXd(Rng&)>;

/// Running max over `trials` of |h(z1,z2) - h(z1',z2)| / ||z1 - z1'||, where
/// z = (x, y) has both halves drawn from `domain`.
double seminorm_probe(const KernelSpec& kernel, const PointSampler& domain, std::size_t trials, std::uint64_t seed);

}  // namespace mmdlab
