#include "mmdlab/kernels.hpp"

#include "mmdlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mmdlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double squared_distance(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

double l1_distance(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) s += std::abs(a[k] - b[k]);
  return s;
}

void check_dims(const KernelSpec& k, std::size_t du, std::size_t dv) {
  if (du != dv) throw ArgumentError("kernel arguments have different dimensions");
  if (du == 0) throw ArgumentError("kernel arguments are empty");
  if (auto d = k.input_dim(); d && *d != du)
    throw ArgumentError("kernel expects dim " + std::to_string(*d) + ", got " + std::to_string(du));
}

// Fills K(i,j) = value(row_i(X), row_j(Y)); mirrors when `symmetric`.
template <typename PairFn>
Eigen::MatrixXd fill_gram(const SampleMatrix& X, const SampleMatrix& Y, bool symmetric, PairFn&& value) {
  const auto n = static_cast<Eigen::Index>(X.rows());
  const auto m = static_cast<Eigen::Index>(Y.rows());
  const std::size_t d = X.dim();
  const double* xs = X.data().data();
  const double* ys = Y.data().data();
  Eigen::MatrixXd K(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double* yj = ys + static_cast<std::size_t>(j) * d;
    const Eigen::Index start = symmetric ? j : 0;
    for (Eigen::Index i = start; i < n; ++i) K(i, j) = value(xs + static_cast<std::size_t>(i) * d, yj);
    if (symmetric)
      for (Eigen::Index i = start + 1; i < n; ++i) K(j, i) = K(i, j);
  }
  return K;
}

Eigen::MatrixXd gram_impl(const KernelSpec& kernel, const SampleMatrix& X, const SampleMatrix& Y,
                          bool symmetric) {
  const std::size_t d = X.dim();
  const auto& kind = kernel.kind();
  if (const auto* g = std::get_if<KernelSpec::Gaussian>(&kind)) {
    const double inv = 1.0 / (g->sigma * g->sigma);
    return fill_gram(X, Y, symmetric,
                     [&](const double* a, const double* b) { return std::exp(-inv * squared_distance(a, b, d)); });
  }
  if (const auto* l = std::get_if<KernelSpec::Laplacian>(&kind)) {
    const double inv = 1.0 / l->sigma;
    return fill_gram(X, Y, symmetric,
                     [&](const double* a, const double* b) { return std::exp(-inv * l1_distance(a, b, d)); });
  }
  if (const auto* t = std::get_if<KernelSpec::TranslationInvariant>(&kind)) {
    std::vector<double> diff(d);
    return fill_gram(X, Y, symmetric, [&](const double* a, const double* b) {
      for (std::size_t k = 0; k < d; ++k) diff[k] = a[k] - b[k];
      return t->profile(diff);
    });
  }
  const auto& c = std::get<KernelSpec::Composite>(kind);
  const SampleMatrix fx = apply_map(c.feature, X);
  if (symmetric) return gram_impl(*c.base, fx, fx, true);
  return gram_impl(*c.base, fx, apply_map(c.feature, Y), false);
}

}  // namespace

KernelConstants::KernelConstants(double l, std::optional<double> nu, std::optional<double> b)
    : l_(l), nu_(nu), b_(b) {
  if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("kernel Lipschitz constant l must be finite and >= 0");
  if (nu && !(*nu >= 0.0)) throw ConfigError("kernel bound nu must be >= 0");
  if (b && !(*b >= 0.0)) throw ConfigError("support diameter b must be >= 0");
  if (!nu && !b) throw ConfigError("kernel constants need nu or b (boundedness assumption)");
}

double KernelConstants::min_term() const noexcept {
  const double from_nu = nu_ ? 4.0 * *nu_ : kInf;
  const double from_b = b_ ? l_ * *b_ : kInf;
  return std::min(from_nu, from_b);
}

KernelSpec KernelSpec::gaussian(double sigma, std::optional<std::size_t> dim) {
  if (sigma == 0.0 || !std::isfinite(sigma)) throw ArgumentError("gaussian kernel needs a finite sigma != 0");
  return KernelSpec(Gaussian{std::abs(sigma)}, dim);
}

KernelSpec KernelSpec::laplacian(double sigma, std::optional<std::size_t> dim) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ArgumentError("laplacian kernel needs a finite sigma > 0");
  return KernelSpec(Laplacian{sigma}, dim);
}

KernelSpec KernelSpec::translation_invariant(std::function<double(std::span<const double>)> profile,
                                             std::optional<double> nu_t, std::optional<double> l_t,
                                             std::optional<std::size_t> dim, std::string name) {
  if (!profile) throw ArgumentError("translation-invariant kernel needs a profile");
  return KernelSpec(TranslationInvariant{std::move(profile), nu_t, l_t, std::move(name)}, dim);
}

std::optional<std::size_t> KernelSpec::input_dim() const noexcept {
  if (const auto* c = std::get_if<Composite>(&kind_)) return c->feature.input_dim();
  return dim_;
}

double KernelSpec::eval(std::span<const double> u, std::span<const double> v) const {
  check_dims(*this, u.size(), v.size());
  const std::size_t d = u.size();
  if (const auto* g = std::get_if<Gaussian>(&kind_))
    return std::exp(-squared_distance(u.data(), v.data(), d) / (g->sigma * g->sigma));
  if (const auto* l = std::get_if<Laplacian>(&kind_)) return std::exp(-l1_distance(u.data(), v.data(), d) / l->sigma);
  if (const auto* t = std::get_if<TranslationInvariant>(&kind_)) {
    std::vector<double> diff(d);
    for (std::size_t k = 0; k < d; ++k) diff[k] = u[k] - v[k];
    return t->profile(diff);
  }
  const auto& c = std::get<Composite>(kind_);
  const Eigen::VectorXd fu = c.feature(u);
  const Eigen::VectorXd fv = c.feature(v);
  return c.base->eval({fu.data(), static_cast<std::size_t>(fu.size())},
                      {fv.data(), static_cast<std::size_t>(fv.size())});
}

KernelSpec compose(const KernelSpec& kernel, const FunctionMap& feature) {
  if (auto d = kernel.input_dim(); d && *d != feature.output_dim())
    throw ArgumentError("compose: kernel expects dim " + std::to_string(*d) + ", feature maps into dim " +
                        std::to_string(feature.output_dim()));
  return KernelSpec(KernelSpec::Composite{std::make_shared<const KernelSpec>(kernel), feature},
                    feature.input_dim());
}

KernelConstants certified_constants(const KernelSpec& kernel, std::size_t dim,
                                    std::optional<double> support_diameter) {
  if (dim < 1) throw ArgumentError("certified_constants: dim must be >= 1");
  if (auto d = kernel.input_dim(); d && *d != dim)
    throw ArgumentError("certified_constants: kernel expects dim " + std::to_string(*d));
  if (support_diameter && !(*support_diameter >= 0.0))
    throw ArgumentError("support diameter must be >= 0");
  const auto& kind = kernel.kind();
  if (const auto* g = std::get_if<KernelSpec::Gaussian>(&kind))
    return {2.0 * std::sqrt(2.0) * std::exp(-0.5) / std::abs(g->sigma), 1.0, support_diameter};
  if (const auto* l = std::get_if<KernelSpec::Laplacian>(&kind))
    return {2.0 * std::sqrt(static_cast<double>(dim)) / l->sigma, 1.0, support_diameter};
  if (const auto* t = std::get_if<KernelSpec::TranslationInvariant>(&kind)) {
    if (!t->l_t || !t->nu_t)
      throw ConfigError("translation-invariant kernel needs user-certified l_t and nu_t");
    return {2.0 * *t->l_t, *t->nu_t, support_diameter};
  }
  const auto& c = std::get<KernelSpec::Composite>(kind);
  const KernelConstants base = certified_constants(*c.base, c.feature.output_dim());
  const double lf = map_lipschitz_bound(c.feature);
  std::optional<double> b = base.b();
  if (support_diameter) {
    const double mapped = lf * *support_diameter;
    b = b ? std::min(*b, mapped) : mapped;
  }
  return {base.l() * lf, base.nu(), b};
}

Eigen::MatrixXd gram_matrix(const KernelSpec& kernel, const SampleMatrix& X) {
  check_dims(kernel, X.dim(), X.dim());
  return gram_impl(kernel, X, X, true);
}

Eigen::MatrixXd cross_gram(const KernelSpec& kernel, const SampleMatrix& X, const SampleMatrix& Y) {
  check_dims(kernel, X.dim(), Y.dim());
  return gram_impl(kernel, X, Y, false);
}

}  // namespace mmdlab
