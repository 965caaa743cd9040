#pragma once

#include "mmdlab/kernels.hpp"

#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>

namespace mmdlab {

enum class BoundFormula {
  theorem1_expectation,
  theorem1_highprob,
  gretton,
  fukumizu,
  empirical_measure,
  corollary1,
  corollary2,
};

std::string_view to_string(BoundFormula f) noexcept;
std::optional<BoundFormula> parse_bound_formula(std::string_view name) noexcept;

/// Inputs shared by the bound calculators. Complexity fields carry E[G_n]
/// estimates; which ones are required depends on the formula.
struct BoundInputs {
  double l = 0.0;
  std::optional<double> nu;
  std::optional<double> b;
  std::size_t n = 0;
  double delta = 0.1;
  std::optional<double> gc_FG;
  std::optional<double> gc_F;
  std::optional<double> gc_G;
  std::optional<double> chaos;

  static BoundInputs from_constants(const KernelConstants& c, std::size_t n, double delta);

  /// min{4 nu, l b}; ConfigError when neither nu nor b is set.
  double min_term() const;
};

struct BoundReport {
  BoundFormula formula;
  BoundInputs inputs;
  double value = 0.0;
  /// Standard error of the complexity estimate feeding the leading term,
  /// propagated linearly through the formula.
  std::optional<double> complexity_std_error;
};

struct Theorem1Bounds {
  double expectation = 0.0;  ///< 32 sqrt(pi) l (gc_FG + gc_F)
  double highprob = 0.0;     ///< 16 sqrt(pi) l (gc_FG + gc_F) + 4 min{4nu, lb} sqrt(ln(2/delta)/n)
};

Theorem1Bounds theorem1_bounds(const BoundInputs& in);

/// 2 nu_sup sqrt(2 ln(2/delta) / floor(n/2)).
double gretton_deviation_bound(double nu_sup, std::size_t n, double delta);

/// C*(X, delta) = 2 sqrt(chaos) + 2 sqrt(nu/n) + sqrt(18 nu ln(2/delta) / n).
/// The two-sided uniform bound is C*(X) + C*(Y).
double fukumizu_cstar(double chaos, double nu, std::size_t n, double delta);

/// sqrt(2 nu / n) (1 + sqrt(ln(1/delta))), delta in (0, 1].
double empirical_measure_bound(double nu, std::size_t n, double delta);

/// Excess-risk bound of the minimum-distance estimator built on the
/// empirical-measure bound: twice its value.
double empirical_measure_excess_bound(double nu, std::size_t n, double delta);

enum class Corollary { corollary1, corollary2 };

/// corollary1: 32 sqrt(pi) l gc_G + 8 min{4nu, lb} sqrt(ln(2/delta)/n)
/// corollary2: 32 sqrt(pi) l (gc_F + gc_FG) + 8 min{4nu, lb} sqrt(ln(2/delta)/n)
double corollary_bounds(Corollary which, const BoundInputs& in);

/// Evaluates `formula` and packages the result. `complexity_std_error` is the
/// standard error of the summed complexity inputs, when known.
BoundReport evaluate_bound(BoundFormula formula, const BoundInputs& in,
                           std::optional<double> complexity_std_error = std::nullopt);

}  // namespace mmdlab
