#include "mmdlab/function_classes.hpp"

#include "mmdlab/errors.hpp"
#include "mmdlab/rng.hpp"

#include <algorithm>
#include <cmath>

namespace mmdlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double activate(Activation a, double v) {
  switch (a) {
    case Activation::relu:
      return v > 0.0 ? v : 0.0;
    case Activation::tanh:
      return std::tanh(v);
  }
  return v;
}

}  // namespace

FunctionMap FunctionMap::identity(std::size_t dim) {
  if (dim == 0) throw ArgumentError("identity map needs dim >= 1");
  return FunctionMap(Identity{dim});
}

FunctionMap FunctionMap::affine(Eigen::MatrixXd A, Eigen::VectorXd c) {
  if (A.rows() == 0 || A.cols() == 0) throw ArgumentError("affine map needs a nonempty matrix");
  if (c.size() != A.rows()) throw ArgumentError("affine offset length must equal the matrix row count");
  if (!A.allFinite() || !c.allFinite()) throw ArgumentError("affine map has non-finite coefficients");
  return FunctionMap(Affine{std::move(A), std::move(c)});
}

FunctionMap FunctionMap::shallow_net(Eigen::MatrixXd W1, Eigen::VectorXd b1, Eigen::MatrixXd W2,
                                     Eigen::VectorXd b2, Activation activation,
                                     std::optional<double> l_sigma) {
  if (W1.rows() == 0 || W1.cols() == 0) throw ArgumentError("shallow net needs a nonempty W1");
  if (b1.size() != W1.rows()) throw ArgumentError("shallow net: b1 length must equal W1 rows");
  if (W2.cols() != W1.rows()) throw ArgumentError("shallow net: W2 columns must equal hidden width");
  if (W2.rows() == 0) throw ArgumentError("shallow net needs a nonempty W2");
  if (b2.size() != W2.rows()) throw ArgumentError("shallow net: b2 length must equal W2 rows");
  const double ls = l_sigma.value_or(1.0);
  if (!(ls > 0.0)) throw ArgumentError("activation Lipschitz constant must be positive");
  return FunctionMap(ShallowNet{std::move(W1), std::move(b1), std::move(W2), std::move(b2), activation, ls});
}

FunctionMap FunctionMap::compose(const FunctionMap& outer, const FunctionMap& inner) {
  if (outer.input_dim() != inner.output_dim())
    throw ArgumentError("compose: outer input dim " + std::to_string(outer.input_dim()) +
                        " != inner output dim " + std::to_string(inner.output_dim()));
  if (std::holds_alternative<Identity>(outer.kind_)) return inner;
  if (std::holds_alternative<Identity>(inner.kind_)) return outer;
  const auto* oa = std::get_if<Affine>(&outer.kind_);
  const auto* ia = std::get_if<Affine>(&inner.kind_);
  if (oa && ia) return affine(oa->A * ia->A, oa->A * ia->c + oa->c);
  return FunctionMap(Composed{std::make_shared<const FunctionMap>(outer), std::make_shared<const FunctionMap>(inner)});
}

std::size_t FunctionMap::input_dim() const noexcept {
  return std::visit(overloaded{
                        [](const Identity& m) { return m.dim; },
                        [](const Affine& m) { return static_cast<std::size_t>(m.A.cols()); },
                        [](const ShallowNet& m) { return static_cast<std::size_t>(m.W1.cols()); },
                        [](const Composed& m) { return m.inner->input_dim(); },
                    },
                    kind_);
}

std::size_t FunctionMap::output_dim() const noexcept {
  return std::visit(overloaded{
                        [](const Identity& m) { return m.dim; },
                        [](const Affine& m) { return static_cast<std::size_t>(m.A.rows()); },
                        [](const ShallowNet& m) { return static_cast<std::size_t>(m.W2.rows()); },
                        [](const Composed& m) { return m.outer->output_dim(); },
                    },
                    kind_);
}

void FunctionMap::apply(std::span<const double> x, std::span<double> out) const {
  if (x.size() != input_dim()) throw ArgumentError("map input has wrong dimension");
  if (out.size() != output_dim()) throw ArgumentError("map output buffer has wrong dimension");
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::Map<Eigen::VectorXd> ov(out.data(), static_cast<Eigen::Index>(out.size()));
  std::visit(overloaded{
                 [&](const Identity&) { ov = xv; },
                 [&](const Affine& m) { ov.noalias() = m.A * xv + m.c; },
                 [&](const ShallowNet& m) {
                   Eigen::VectorXd hidden = m.W1 * xv + m.b1;
                   for (auto& v : hidden) v = activate(m.activation, v);
                   ov.noalias() = m.W2 * hidden + m.b2;
                 },
                 [&](const Composed& m) {
                   Eigen::VectorXd mid(static_cast<Eigen::Index>(m.inner->output_dim()));
                   m.inner->apply(x, {mid.data(), static_cast<std::size_t>(mid.size())});
                   m.outer->apply({mid.data(), static_cast<std::size_t>(mid.size())}, out);
                 },
             },
             kind_);
}

Eigen::VectorXd FunctionMap::operator()(std::span<const double> x) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(output_dim()));
  apply(x, {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

std::optional<AffineForm> FunctionMap::as_affine() const {
  return std::visit(overloaded{
                        [](const Identity& m) -> std::optional<AffineForm> {
                          const auto d = static_cast<Eigen::Index>(m.dim);
                          return AffineForm{Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d)};
                        },
                        [](const Affine& m) -> std::optional<AffineForm> { return AffineForm{m.A, m.c}; },
                        [](const ShallowNet&) -> std::optional<AffineForm> { return std::nullopt; },
                        [](const Composed& m) -> std::optional<AffineForm> {
                          auto o = m.outer->as_affine();
                          auto i = m.inner->as_affine();
                          if (!o || !i) return std::nullopt;
                          return AffineForm{o->A * i->A, o->A * i->c + o->c};
                        },
                    },
                    kind_);
}

SampleMatrix apply_map(const FunctionMap& f, const SampleMatrix& X) {
  if (X.dim() != f.input_dim())
    throw ArgumentError("apply_map: sample dim " + std::to_string(X.dim()) + " != map input dim " +
                        std::to_string(f.input_dim()));
  const auto& kind = f.kind();
  if (std::holds_alternative<FunctionMap::Identity>(kind)) return X;
  if (const auto* a = std::get_if<FunctionMap::Affine>(&kind)) {
    RowMatrix out = X.data() * a->A.transpose();
    out.rowwise() += a->c.transpose();
    return SampleMatrix(std::move(out));
  }
  RowMatrix out(static_cast<Eigen::Index>(X.rows()), static_cast<Eigen::Index>(f.output_dim()));
  for (std::size_t i = 0; i < X.rows(); ++i)
    f.apply(X.row(i), {out.data() + i * f.output_dim(), f.output_dim()});
  return SampleMatrix(std::move(out));
}

double spectral_norm(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return 0.0;
  const Eigen::MatrixXd gram = A.transpose() * A;
  Rng rng(0x5eedULL);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Eigen::VectorXd v(gram.cols());
  for (auto& x : v) x = unif(rng);
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Eigen::VectorXd w = gram * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    const double next = std::sqrt(norm);
    const bool converged = std::abs(next - estimate) <= 1e-10 * next;
    estimate = next;
    if (converged) break;
  }
  return (A * v).norm();
}

double map_lipschitz_bound(const FunctionMap& f) {
  const auto& kind = f.kind();
  if (std::holds_alternative<FunctionMap::Identity>(kind)) return 1.0;
  if (const auto* a = std::get_if<FunctionMap::Affine>(&kind)) return spectral_norm(a->A);
  if (const auto* s = std::get_if<FunctionMap::ShallowNet>(&kind))
    return spectral_norm(s->W2) * s->l_sigma * spectral_norm(s->W1);
  const auto& c = std::get<FunctionMap::Composed>(kind);
  return map_lipschitz_bound(*c.outer) * map_lipschitz_bound(*c.inner);
}

FiniteFunctionClass::FiniteFunctionClass(std::vector<FunctionMap> members, std::string label)
    : members_(std::move(members)), label_(std::move(label)) {
  if (members_.empty()) throw ArgumentError("function class '" + label_ + "' is empty");
  for (const auto& m : members_) {
    if (m.input_dim() != members_.front().input_dim() || m.output_dim() != members_.front().output_dim())
      throw ArgumentError("function class '" + label_ + "': members disagree on dimensions");
  }
}

FiniteFunctionClass FiniteFunctionClass::singleton_identity(std::size_t dim, std::string label) {
  return FiniteFunctionClass({FunctionMap::identity(dim)}, std::move(label));
}

double FiniteFunctionClass::lipschitz_bound() const {
  double best = 0.0;
  for (const auto& m : members_) best = std::max(best, map_lipschitz_bound(m));
  return best;
}

std::vector<SampleMatrix> FiniteFunctionClass::values_on(const SampleMatrix& X) const {
  std::vector<SampleMatrix> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(apply_map(m, X));
  return out;
}

FiniteFunctionClass materialize_grid(const GridClassSpec& spec) {
  if (spec.grid.empty()) throw ConfigError("parameter grid is empty");
  if (spec.dim == 0) throw ConfigError("grid family dimension must be >= 1");
  const auto d = static_cast<Eigen::Index>(spec.dim);
  const std::size_t want = spec.family == GridFamily::location_scale ? 2 * spec.dim : spec.dim;
  std::vector<FunctionMap> members;
  members.reserve(spec.grid.size());
  for (std::size_t k = 0; k < spec.grid.size(); ++k) {
    const auto& theta = spec.grid[k];
    if (theta.size() != want)
      throw ConfigError("grid point " + std::to_string(k) + " has " + std::to_string(theta.size()) +
                        " parameters, expected " + std::to_string(want));
    for (double t : theta) {
      if (!std::isfinite(t)) throw ConfigError("grid point " + std::to_string(k) + " is not finite");
      if (spec.box && (t < spec.box->first || t > spec.box->second))
        throw ConfigError("grid point " + std::to_string(k) + " lies outside the declared box");
    }
    Eigen::Map<const Eigen::VectorXd> th(theta.data(), static_cast<Eigen::Index>(theta.size()));
    switch (spec.family) {
      case GridFamily::shift:
        members.push_back(FunctionMap::affine(Eigen::MatrixXd::Identity(d, d), th));
        break;
      case GridFamily::scale:
        members.push_back(FunctionMap::affine(th.asDiagonal().toDenseMatrix(), Eigen::VectorXd::Zero(d)));
        break;
      case GridFamily::location_scale:
        members.push_back(FunctionMap::affine(th.head(d).asDiagonal().toDenseMatrix(), th.tail(d)));
        break;
    }
  }
  return FiniteFunctionClass(std::move(members), spec.label);
}

FiniteFunctionClass compose_classes(const FiniteFunctionClass& F, const FiniteFunctionClass& G) {
  if (G.output_dim() != F.input_dim())
    throw ArgumentError("compose_classes: G output dim " + std::to_string(G.output_dim()) +
                        " != F input dim " + std::to_string(F.input_dim()));
  std::vector<FunctionMap> members;
  members.reserve(F.size() * G.size());
  for (const auto& f : F.members())
    for (const auto& g : G.members()) members.push_back(FunctionMap::compose(f, g));
  return FiniteFunctionClass(std::move(members), F.label() + "o" + G.label());
}

double shallow_net_log_covering_bound(int d0, int d1, double B, double Bx, double l_sigma, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("covering radius eps must be positive");
  if (d0 < 1 || d1 < 1) throw ArgumentError("network widths must be positive");
  if (!(B > 0.0) || !(Bx > 0.0) || !(l_sigma > 0.0))
    throw ArgumentError("weight bound, input bound and activation constant must be positive");
  const double exponent = static_cast<double>(d0) * d1 + 2.0 * d1 + 1.0;
  const double base = 16.0 * B * B * (Bx + 1.0) * std::sqrt(static_cast<double>(d0)) * d1 / eps;
  double log_factorial = 0.0;
  for (int i = 2; i <= d1; ++i) log_factorial += std::log(static_cast<double>(i));
  return exponent * std::log(base) + (static_cast<double>(d0) * d1 + d1) * std::log(l_sigma) - log_factorial;
}

}  // namespace mmdlab
