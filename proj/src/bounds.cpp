#include "mmdlab/bounds.hpp"

#include "mmdlab/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace mmdlab {

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

void check_delta_open(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in (0, 1)");
}

double require(const std::optional<double>& v, const char* name) {
  if (!v) throw ConfigError(std::string("bound input '") + name + "' is required for this formula");
  if (!(*v >= 0.0)) throw ArgumentError(std::string("bound input '") + name + "' must be >= 0");
  return *v;
}

void check_common(const BoundInputs& in) {
  check_delta_open(in.delta);
  if (in.n < 2) throw ArgumentError("bounds need n >= 2");
  if (!(in.l >= 0.0)) throw ArgumentError("Lipschitz constant l must be >= 0");
}

double tail(const BoundInputs& in) { return std::sqrt(std::log(2.0 / in.delta) / static_cast<double>(in.n)); }

}  // namespace

std::string_view to_string(BoundFormula f) noexcept {
  switch (f) {
    case BoundFormula::theorem1_expectation:
      return "theorem1_expectation";
    case BoundFormula::theorem1_highprob:
      return "theorem1_highprob";
    case BoundFormula::gretton:
      return "gretton";
    case BoundFormula::fukumizu:
      return "fukumizu";
    case BoundFormula::empirical_measure:
      return "empirical_measure";
    case BoundFormula::corollary1:
      return "corollary1";
    case BoundFormula::corollary2:
      return "corollary2";
  }
  return "unknown";
}

std::optional<BoundFormula> parse_bound_formula(std::string_view name) noexcept {
  for (auto f : {BoundFormula::theorem1_expectation, BoundFormula::theorem1_highprob, BoundFormula::gretton,
                 BoundFormula::fukumizu, BoundFormula::empirical_measure, BoundFormula::corollary1,
                 BoundFormula::corollary2}) {
    if (to_string(f) == name) return f;
  }
  if (name == "theorem1") return BoundFormula::theorem1_highprob;
  if (name == "empirical-measure") return BoundFormula::empirical_measure;
  return std::nullopt;
}

BoundInputs BoundInputs::from_constants(const KernelConstants& c, std::size_t n, double delta) {
  BoundInputs in;
  in.l = c.l();
  in.nu = c.nu();
  in.b = c.b();
  in.n = n;
  in.delta = delta;
  return in;
}

double BoundInputs::min_term() const {
  if (!nu && !b) throw ConfigError("min{4 nu, l b} needs nu or b");
  const double inf = std::numeric_limits<double>::infinity();
  const double value = std::min(nu ? 4.0 * *nu : inf, b ? l * *b : inf);
  if (!std::isfinite(value)) throw ConfigError("min{4 nu, l b} is not finite");
  return value;
}

Theorem1Bounds theorem1_bounds(const BoundInputs& in) {
  check_common(in);
  const double gc = require(in.gc_FG, "gc_FG") + require(in.gc_F, "gc_F");
  const double min_term = in.min_term();
  return {32.0 * kSqrtPi * in.l * gc, 16.0 * kSqrtPi * in.l * gc + 4.0 * min_term * tail(in)};
}

double gretton_deviation_bound(double nu_sup, std::size_t n, double delta) {
  check_delta_open(delta);
  if (n < 2) throw ArgumentError("gretton bound needs n >= 2");
  if (!(nu_sup >= 0.0)) throw ArgumentError("kernel sup must be >= 0");
  const auto half = static_cast<double>(n / 2);
  return 2.0 * nu_sup * std::sqrt(2.0 * std::log(2.0 / delta) / half);
}

double fukumizu_cstar(double chaos, double nu, std::size_t n, double delta) {
  check_delta_open(delta);
  if (n < 1) throw ArgumentError("fukumizu constant needs n >= 1");
  if (!(chaos >= 0.0) || !(nu >= 0.0)) throw ArgumentError("chaos and nu must be >= 0");
  const auto nn = static_cast<double>(n);
  return 2.0 * std::sqrt(chaos) + 2.0 * std::sqrt(nu / nn) + std::sqrt(18.0 * nu * std::log(2.0 / delta) / nn);
}

double empirical_measure_bound(double nu, std::size_t n, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw ArgumentError("delta must lie in (0, 1]");
  if (n < 1) throw ArgumentError("empirical measure bound needs n >= 1");
  if (!(nu >= 0.0)) throw ArgumentError("nu must be >= 0");
  return std::sqrt(2.0 * nu / static_cast<double>(n)) * (1.0 + std::sqrt(std::log(1.0 / delta)));
}

double empirical_measure_excess_bound(double nu, std::size_t n, double delta) {
  return 2.0 * empirical_measure_bound(nu, n, delta);
}

double corollary_bounds(Corollary which, const BoundInputs& in) {
  check_common(in);
  const double gc = which == Corollary::corollary1 ? require(in.gc_G, "gc_G")
                                                   : require(in.gc_F, "gc_F") + require(in.gc_FG, "gc_FG");
  return 32.0 * kSqrtPi * in.l * gc + 8.0 * in.min_term() * tail(in);
}

BoundReport evaluate_bound(BoundFormula formula, const BoundInputs& in, std::optional<double> complexity_std_error) {
  BoundReport report{formula, in, 0.0, std::nullopt};
  const double lead16 = 16.0 * kSqrtPi * in.l;
  switch (formula) {
    case BoundFormula::theorem1_expectation:
      report.value = theorem1_bounds(in).expectation;
      if (complexity_std_error) report.complexity_std_error = 2.0 * lead16 * *complexity_std_error;
      break;
    case BoundFormula::theorem1_highprob:
      report.value = theorem1_bounds(in).highprob;
      if (complexity_std_error) report.complexity_std_error = lead16 * *complexity_std_error;
      break;
    case BoundFormula::gretton:
      report.value = gretton_deviation_bound(require(in.nu, "nu"), in.n, in.delta);
      break;
    case BoundFormula::fukumizu:
      report.value = fukumizu_cstar(require(in.chaos, "chaos"), require(in.nu, "nu"), in.n, in.delta);
      break;
    case BoundFormula::empirical_measure:
      report.value = empirical_measure_bound(require(in.nu, "nu"), in.n, in.delta);
      break;
    case BoundFormula::corollary1:
    case BoundFormula::corollary2:
      report.value = corollary_bounds(
          formula == BoundFormula::corollary1 ? Corollary::corollary1 : Corollary::corollary2, in);
      if (complexity_std_error) report.complexity_std_error = 2.0 * lead16 * *complexity_std_error;
      break;
  }
  return report;
}

}  // namespace mmdlab
