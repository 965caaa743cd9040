#include "mmdlab/mmd.hpp"

#include "mmdlab/errors.hpp"
#include "mmdlab/parallel.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <vector>

namespace mmdlab {

std::string_view to_string(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::u_statistic:
      return "u_statistic";
    case EstimatorKind::v_statistic:
      return "v_statistic";
    case EstimatorKind::closed_form:
      return "closed_form";
    case EstimatorKind::monte_carlo:
      return "monte_carlo";
  }
  return "unknown";
}

double h_term(const KernelSpec& kernel, std::span<const double> xi, std::span<const double> yi,
              std::span<const double> xj, std::span<const double> yj) {
  if (xi.size() != yi.size() || xi.size() != xj.size() || xi.size() != yj.size())
    throw ArgumentError("h_term: all four points must share a dimension");
  return kernel.eval(xi, xj) + kernel.eval(yi, yj) - kernel.eval(xi, yj) - kernel.eval(yi, xj);
}

namespace {

void check_pair(const KernelSpec& kernel, const SampleMatrix& X, const SampleMatrix& Y, std::size_t min_n) {
  if (X.rows() != Y.rows())
    throw ArgumentError("X and Y must have the same number of rows (" + std::to_string(X.rows()) + " vs " +
                        std::to_string(Y.rows()) + ")");
  if (X.rows() < min_n) throw ArgumentError("need at least " + std::to_string(min_n) + " observations per sample");
  if (X.dim() != Y.dim()) throw ArgumentError("X and Y must have the same dimension");
  if (auto d = kernel.input_dim(); d && *d != X.dim()) throw ArgumentError("sample dimension does not match kernel");
}

}  // namespace

double mmd_u_squared_from_grams(const Eigen::MatrixXd& Kxx, const Eigen::MatrixXd& Kyy, const Eigen::MatrixXd& Kxy) {
  const auto n = Kxx.rows();
  if (n < 2) throw ArgumentError("U-statistic needs n >= 2");
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j) continue;
      total += Kxx(i, j) + Kyy(i, j) - Kxy(i, j) - Kxy(j, i);
    }
  }
  return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double mmd_v_squared_from_grams(const Eigen::MatrixXd& Kxx, const Eigen::MatrixXd& Kyy, const Eigen::MatrixXd& Kxy) {
  const auto n = static_cast<double>(Kxx.rows());
  const double value = (Kxx.sum() + Kyy.sum() - 2.0 * Kxy.sum()) / (n * n);
  return value < 0.0 ? 0.0 : value;
}

MmdEstimate mmd_u_squared(const KernelSpec& kernel, const SampleMatrix& X, const SampleMatrix& Y) {
  check_pair(kernel, X, Y, 2);
  const double value =
      mmd_u_squared_from_grams(gram_matrix(kernel, X), gram_matrix(kernel, Y), cross_gram(kernel, X, Y));
  return {value, EstimatorKind::u_statistic, std::nullopt};
}

MmdEstimate mmd_v_squared(const KernelSpec& kernel, const SampleMatrix& X, const SampleMatrix& Y) {
  check_pair(kernel, X, Y, 1);
  const double value =
      mmd_v_squared_from_grams(gram_matrix(kernel, X), gram_matrix(kernel, Y), cross_gram(kernel, X, Y));
  return {value, EstimatorKind::v_statistic, std::nullopt};
}

namespace {

// E exp(-||W||^2 / s) for W = A - B, A ~ a, B ~ b independent.
double gaussian_cross_term(double s, const GaussianDistSpec& a, const GaussianDistSpec& b) {
  const Eigen::VectorXd m = a.mean() - b.mean();
  const Eigen::MatrixXd S = a.cov() + b.cov();
  const auto d = m.size();
  const Eigen::MatrixXd M = s * Eigen::MatrixXd::Identity(d, d) + 2.0 * S;
  const Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw ConsistencyError("sI + 2S is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  double log_det_M = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) log_det_M += 2.0 * std::log(L(i, i));
  // det(I + 2S/s) = det(M) / s^d
  const double log_det = log_det_M - static_cast<double>(d) * std::log(s);
  const double quad = m.dot(llt.solve(m));
  return std::exp(-0.5 * log_det - quad);
}

}  // namespace

MmdEstimate population_mmd_squared_gaussian_closed_form(double sigma, const GaussianDistSpec& P,
                                                        const GaussianDistSpec& Q) {
  if (sigma == 0.0 || !std::isfinite(sigma)) throw ArgumentError("closed form needs a finite sigma != 0");
  if (P.dim() != Q.dim()) throw ArgumentError("P and Q must have the same dimension");
  const double s = sigma * sigma;
  double value = gaussian_cross_term(s, P, P) + gaussian_cross_term(s, Q, Q) - 2.0 * gaussian_cross_term(s, P, Q);
  if (value < -1e-12) throw ConsistencyError("closed-form population MMD is negative beyond rounding");
  if (value < 0.0) value = 0.0;
  return {value, EstimatorKind::closed_form, 0.0};
}

Sampler make_sampler(Distribution dist) {
  return [dist = std::move(dist)](std::size_t n, Rng& rng) { return dist.draw(n, rng); };
}

Sampler make_sampler(Distribution dist, FunctionMap map) {
  if (map.input_dim() != dist.dim()) throw ArgumentError("sampler map input dim does not match distribution");
  return [dist = std::move(dist), map = std::move(map)](std::size_t n, Rng& rng) {
    return apply_map(map, dist.draw(n, rng));
  };
}

namespace {

constexpr std::size_t kBatchPairs = 1 << 14;

// Strips composite layers so that batches are mapped once, not per kernel call.
const KernelSpec& innermost(const KernelSpec& kernel, std::vector<const FunctionMap*>& features) {
  const KernelSpec* k = &kernel;
  while (const auto* c = std::get_if<KernelSpec::Composite>(&k->kind())) {
    features.push_back(&c->feature);
    k = c->base.get();
  }
  return *k;
}

}  // namespace

MmdEstimate population_mmd_squared_monte_carlo(const KernelSpec& kernel, const Sampler& P, const Sampler& Q,
                                               std::size_t m, std::uint64_t seed, unsigned threads) {
  if (m < 2) throw ArgumentError("monte carlo oracle needs m >= 2");
  std::vector<const FunctionMap*> features;
  const KernelSpec& base = innermost(kernel, features);
  const std::size_t pairs = m / 2;
  const std::size_t batches = (pairs + kBatchPairs - 1) / kBatchPairs;
  struct Partial {
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  std::vector<Partial> partial(batches);
  parallel_for(batches, threads, [&](std::size_t b) {
    const std::size_t count = std::min(kBatchPairs, pairs - b * kBatchPairs);
    Rng rng = make_rng(derive_seed(seed, b));
    SampleMatrix xs = P(2 * count, rng);
    SampleMatrix ys = Q(2 * count, rng);
    if (xs.rows() != 2 * count || ys.rows() != 2 * count) throw ArgumentError("sampler returned wrong row count");
    if (xs.dim() != ys.dim()) throw ArgumentError("samplers disagree on dimension");
    for (const auto* f : features) {
      xs = apply_map(*f, xs);
      ys = apply_map(*f, ys);
    }
    Partial acc;
    for (std::size_t p = 0; p < count; ++p) {
      const double h = h_term(base, xs.row(2 * p), ys.row(2 * p), xs.row(2 * p + 1), ys.row(2 * p + 1));
      acc.sum += h;
      acc.sum_sq += h * h;
    }
    partial[b] = acc;
  });
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& p : partial) {
    sum += p.sum;
    sum_sq += p.sum_sq;
  }
  const auto np = static_cast<double>(pairs);
  const double mean = sum / np;
  const double var = pairs > 1 ? std::max(0.0, (sum_sq - np * mean * mean) / (np - 1.0)) : 0.0;
  return {mean, EstimatorKind::monte_carlo, std::sqrt(var / np)};
}

}  // namespace mmdlab
