#pragma once

#include "mmdlab/distributions.hpp"
#include "mmdlab/function_classes.hpp"
#include "mmdlab/kernels.hpp"
#include "mmdlab/sample_matrix.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace mmdlab {

/// Order of the saddle-point problem over (f, g).
enum class Orientation {
  min_f_max_g,  ///< min over features, max over generators
  min_g_max_f,  ///< min over generators, max over features
};

std::string_view to_string(Orientation o) noexcept;
std::optional<Orientation> parse_orientation(std::string_view name) noexcept;

/// Outcome of an exhaustive fit over finite classes. per_member_values is
/// |F| x |G| (one row when there is no feature class); objective equals
/// per_member_values(f_index or 0, g_index).
struct FitResult {
  std::size_t g_index = 0;
  std::optional<std::size_t> f_index;
  double objective = 0.0;
  Eigen::MatrixXd per_member_values;
  std::optional<Orientation> orientation;
};

/// argmin_g of the U-statistic squared MMD between g(X) and Y. Ties go to
/// the lowest index.
FitResult min_mmd_fit(const KernelSpec& kernel, const FiniteFunctionClass& G, const SampleMatrix& X,
                      const SampleMatrix& Y);

/// Exhaustive saddle point of (f, g) -> U-statistic squared MMD of k o f
/// between g(X) and Y. Outer argmin, inner argmax, ties to the lowest index.
FitResult minimax_mmd_fit(const KernelSpec& kernel, const FiniteFunctionClass& F, const FiniteFunctionClass& G,
                          const SampleMatrix& X, const SampleMatrix& Y,
                          Orientation orientation = Orientation::min_f_max_g, unsigned threads = 1);

/// U-statistic squared MMD of k o f between g(X) and Y for every (f, g).
Eigen::MatrixXd empirical_value_matrix(const KernelSpec& kernel, const FiniteFunctionClass& F,
                                       const FiniteFunctionClass& G, const SampleMatrix& X, const SampleMatrix& Y,
                                       unsigned threads = 1);

/// Population squared MMD of k o f between g(X) and Y for every (f, g).
struct PopulationValues {
  Eigen::MatrixXd value;
  Eigen::MatrixXd std_error;
  bool closed_form = false;
};

/// Evaluates population values, X ~ P and Y ~ Q.
class PopulationOracle {
 public:
  /// `mc_samples` and `seed` configure the Monte-Carlo fallback.
  PopulationOracle(Distribution P, Distribution Q, std::size_t mc_samples = 1'000'000, std::uint64_t seed = 0,
                   unsigned threads = 1);

  /// True when every (f, g) pair has a closed form: Gaussian kernel, Gaussian
  /// P and Q, and affine f o g and f.
  bool closed_form_available(const KernelSpec& kernel, const FiniteFunctionClass& F,
                             const FiniteFunctionClass& G) const;

  PopulationValues evaluate(const KernelSpec& kernel, const FiniteFunctionClass& F,
                            const FiniteFunctionClass& G) const;

  const Distribution& P() const noexcept { return P_; }
  const Distribution& Q() const noexcept { return Q_; }

 private:
  Distribution P_;
  Distribution Q_;
  std::size_t mc_samples_;
  std::uint64_t seed_;
  unsigned threads_;
};

struct ExcessRisk {
  double value = 0.0;
  double std_error = 0.0;
};

/// Population value at the fitted pair minus the population saddle value
/// (inf over the outer class of the sup over the inner class). A fit without
/// f_index is scored against min_g of its single row.
ExcessRisk excess_risk(const FitResult& fit, const PopulationValues& population);

ExcessRisk excess_risk(const KernelSpec& kernel, const FiniteFunctionClass& F, const FiniteFunctionClass& G,
                       const FitResult& fit, const PopulationOracle& oracle);

}  // namespace mmdlab
