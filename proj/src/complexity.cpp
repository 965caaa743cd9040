#include "mmdlab/complexity.hpp"

#include "mmdlab/errors.hpp"
#include "mmdlab/parallel.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace mmdlab {

namespace {

constexpr std::size_t kExactEnumerationMaxDim = 20;

// One row per member: vec(g(X)).
Eigen::MatrixXd stack_values(std::span<const SampleMatrix> class_values, std::size_t& n_out) {
  if (class_values.empty()) throw ArgumentError("complexity of an empty class is undefined");
  const std::size_t n = class_values.front().rows();
  const std::size_t d = class_values.front().dim();
  Eigen::MatrixXd S(static_cast<Eigen::Index>(class_values.size()), static_cast<Eigen::Index>(n * d));
  for (std::size_t c = 0; c < class_values.size(); ++c) {
    if (class_values[c].rows() != n || class_values[c].dim() != d)
      throw ArgumentError("all class value matrices must have the same shape");
    S.row(static_cast<Eigen::Index>(c)) = class_values[c].flat().transpose();
  }
  n_out = n;
  return S;
}

ComplexityEstimate summarize(const std::vector<double>& stats, std::uint64_t seed) {
  const auto R = static_cast<double>(stats.size());
  double mean = 0.0;
  for (double s : stats) mean += s;
  mean /= R;
  double ss = 0.0;
  for (double s : stats) ss += (s - mean) * (s - mean);
  const double se = stats.size() > 1 ? std::sqrt(ss / (R - 1.0) / R) : 0.0;
  ComplexityEstimate est;
  est.mean = mean;
  est.std_error = se;
  est.inner_replicates = stats.size();
  est.outer_replicates = 1;
  est.seed = seed;
  est.within_variance = se * se;
  return est;
}

// sup_c |(S z)_c| / n
double sup_abs(const Eigen::MatrixXd& S, const Eigen::VectorXd& z, double n) {
  return (S * z).cwiseAbs().maxCoeff() / n;
}

}  // namespace

ComplexityEstimate empirical_gaussian_complexity(std::span<const SampleMatrix> class_values, std::size_t replicates,
                                                 std::uint64_t seed, unsigned threads) {
  if (replicates < 1) throw ArgumentError("need at least one replicate");
  std::size_t n = 0;
  const Eigen::MatrixXd S = stack_values(class_values, n);
  std::vector<double> stats(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    Rng rng = make_rng(derive_seed(seed, r));
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(S.cols());
    for (auto& v : z) v = normal(rng);
    stats[r] = sup_abs(S, z, static_cast<double>(n));
  });
  return summarize(stats, seed);
}

ComplexityEstimate empirical_rademacher_complexity(std::span<const SampleMatrix> class_values, std::size_t replicates,
                                                   std::uint64_t seed, RademacherMode mode, unsigned threads) {
  std::size_t n = 0;
  const Eigen::MatrixXd S = stack_values(class_values, n);
  const auto nd = static_cast<std::size_t>(S.cols());
  const bool exact = mode == RademacherMode::exact || (mode == RademacherMode::automatic && nd <= kExactEnumerationMaxDim);
  if (exact) {
    if (nd > kExactEnumerationMaxDim)
      throw ArgumentError("exact Rademacher enumeration is limited to nd <= 20");
    const std::uint64_t patterns = std::uint64_t{1} << nd;
    double total = 0.0;
    Eigen::VectorXd rho(S.cols());
    for (std::uint64_t p = 0; p < patterns; ++p) {
      for (std::size_t k = 0; k < nd; ++k) rho[static_cast<Eigen::Index>(k)] = ((p >> k) & 1U) ? 1.0 : -1.0;
      total += sup_abs(S, rho, static_cast<double>(n));
    }
    ComplexityEstimate est;
    est.mean = total / static_cast<double>(patterns);
    est.inner_replicates = static_cast<std::size_t>(patterns);
    est.seed = seed;
    est.exact = true;
    return est;
  }
  if (replicates < 1) throw ArgumentError("need at least one replicate");
  std::vector<double> stats(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    Rng rng = make_rng(derive_seed(seed, r));
    Eigen::VectorXd rho(S.cols());
    for (auto& v : rho) v = (rng() >> 63) ? 1.0 : -1.0;
    stats[r] = sup_abs(S, rho, static_cast<double>(n));
  });
  return summarize(stats, seed);
}

ComplexityEstimate empirical_rademacher_chaos(const KernelSpec& kernel, const FiniteFunctionClass& features,
                                              const SampleMatrix& X, std::size_t replicates, std::uint64_t seed,
                                              unsigned threads) {
  if (X.rows() < 2) throw ArgumentError("Rademacher chaos needs n >= 2");
  if (replicates < 1) throw ArgumentError("need at least one replicate");
  const auto n = static_cast<double>(X.rows());
  std::vector<Eigen::MatrixXd> grams;
  std::vector<double> traces;
  for (const auto& f : features.members()) {
    grams.push_back(gram_matrix(compose(kernel, f), X));
    traces.push_back(grams.back().trace());
  }
  std::vector<double> stats(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    Rng rng = make_rng(derive_seed(seed, r));
    Eigen::VectorXd rho(static_cast<Eigen::Index>(X.rows()));
    for (auto& v : rho) v = (rng() >> 63) ? 1.0 : -1.0;
    double best = 0.0;
    for (std::size_t c = 0; c < grams.size(); ++c) {
      // 2 sum_{i<j} rho_i rho_j K_ij = rho^T K rho - tr K
      const double off = rho.dot(grams[c] * rho) - traces[c];
      best = std::max(best, std::abs(off) / (n * (n - 1.0)));
    }
    stats[r] = best;
  });
  return summarize(stats, seed);
}

ComplexityEstimate expected_complexity(const FiniteFunctionClass& cls, const Sampler& sampler, std::size_t n,
                                       std::size_t outer, std::size_t inner, std::uint64_t seed, unsigned threads) {
  if (n < 1) throw ArgumentError("expected_complexity needs n >= 1");
  if (outer < 1 || inner < 1) throw ArgumentError("need at least one outer and one inner replicate");
  const std::uint64_t outer_seed = derive_seed(seed, 0);
  const std::uint64_t inner_seed = derive_seed(seed, 1);
  std::vector<ComplexityEstimate> per_sample(outer);
  parallel_for(outer, threads, [&](std::size_t o) {
    Rng rng = make_rng(derive_seed(outer_seed, o));
    const SampleMatrix X = sampler(n, rng);
    if (X.rows() != n) throw ArgumentError("sampler returned wrong row count");
    const auto values = cls.values_on(X);
    per_sample[o] = empirical_gaussian_complexity(values, inner, inner_seed, 1);
  });
  const auto O = static_cast<double>(outer);
  double mean = 0.0;
  double within = 0.0;
  for (const auto& e : per_sample) {
    mean += e.mean;
    within += e.std_error * e.std_error;
  }
  mean /= O;
  within /= O;
  double between = 0.0;
  if (outer > 1) {
    double ss = 0.0;
    for (const auto& e : per_sample) ss += (e.mean - mean) * (e.mean - mean);
    between = ss / (O - 1.0) / O;
  }
  ComplexityEstimate est;
  est.mean = mean;
  est.std_error = std::sqrt(between + within);
  est.inner_replicates = inner;
  est.outer_replicates = outer;
  est.seed = seed;
  est.between_variance = between;
  est.within_variance = within;
  return est;
}

SeminormBounds u_statistic_seminorm_bounds(double L, double B, std::size_t m, std::size_t n) {
  if (m < 1) throw ArgumentError("U-statistic order m must be >= 1");
  if (m > n) throw ArgumentError("U-statistic order m must not exceed n");
  if (!(L >= 0.0) || !(B >= 0.0)) throw ArgumentError("seminorm inputs must be >= 0");
  const double ratio = static_cast<double>(m) / static_cast<double>(n);
  return {L * ratio, L * static_cast<double>(m) * ratio, B * ratio};
}

SeminormBounds mmd_kernel_seminorm_bounds(const KernelConstants& constants) {
  const double min_term = constants.min_term();
  if (!std::isfinite(min_term)) throw ConfigError("min{4 nu, l b} is infinite; the bound would be vacuous");
  const double m_lip = std::sqrt(2.0) * constants.l();
  return {m_lip, m_lip, 2.0 * min_term};
}

double seminorm_probe(const KernelSpec& kernel, const PointSampler& domain, std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw ArgumentError("seminorm_probe needs trials >= 1");
  Rng rng = make_rng(seed);
  auto span_of = [](const Eigen::VectorXd& v) { return std::span<const double>(v.data(), static_cast<std::size_t>(v.size())); };
  double best = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const Eigen::VectorXd x2 = domain(rng);
    const Eigen::VectorXd y2 = domain(rng);
    Eigen::VectorXd x1, y1, x1p, y1p;
    double dist = 0.0;
    for (int attempt = 0;; ++attempt) {
      if (attempt == 100) throw ArgumentError("seminorm_probe: domain sampler keeps producing z1 == z1'");
      x1 = domain(rng);
      y1 = domain(rng);
      x1p = domain(rng);
      y1p = domain(rng);
      dist = std::sqrt((x1 - x1p).squaredNorm() + (y1 - y1p).squaredNorm());
      if (dist > 0.0) break;
    }
    const double h1 = h_term(kernel, span_of(x1), span_of(y1), span_of(x2), span_of(y2));
    const double h2 = h_term(kernel, span_of(x1p), span_of(y1p), span_of(x2), span_of(y2));
    best = std::max(best, std::abs(h1 - h2) / dist);
  }
  return best;
}

}  // namespace mmdlab
