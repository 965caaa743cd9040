#include "mmdlab/estimators.hpp"

#include "mmdlab/errors.hpp"
#include "mmdlab/mmd.hpp"
#include "mmdlab/parallel.hpp"
#include "mmdlab/rng.hpp"

#include <cmath>
#include <vector>

namespace mmdlab {

std::string_view to_string(Orientation o) noexcept {
  return o == Orientation::min_f_max_g ? "min_f_max_g" : "min_g_max_f";
}

std::optional<Orientation> parse_orientation(std::string_view name) noexcept {
  if (name == "min_f_max_g") return Orientation::min_f_max_g;
  if (name == "min_g_max_f") return Orientation::min_g_max_f;
  return std::nullopt;
}

namespace {

void check_chain(const KernelSpec& kernel, const FiniteFunctionClass& F, const FiniteFunctionClass& G,
                 const SampleMatrix& X, const SampleMatrix& Y) {
  if (X.rows() != Y.rows() || X.rows() < 2) throw ArgumentError("fits need X.n == Y.n >= 2");
  if (G.input_dim() != X.dim()) throw ArgumentError("generator input dim does not match X");
  if (G.output_dim() != Y.dim()) throw ArgumentError("generator output dim does not match Y");
  if (F.input_dim() != Y.dim()) throw ArgumentError("feature input dim does not match Y");
  if (auto d = kernel.input_dim(); d && *d != F.output_dim())
    throw ArgumentError("kernel input dim does not match feature output dim");
}

}  // namespace

Eigen::MatrixXd empirical_value_matrix(const KernelSpec& kernel, const FiniteFunctionClass& F,
                                       const FiniteFunctionClass& G, const SampleMatrix& X, const SampleMatrix& Y,
                                       unsigned threads) {
  check_chain(kernel, F, G, X, Y);
  const std::vector<SampleMatrix> gx = G.values_on(X);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(F.size()), static_cast<Eigen::Index>(G.size()));
  parallel_for(F.size(), threads, [&](std::size_t fi) {
    const FunctionMap& f = F[fi];
    const SampleMatrix fy = apply_map(f, Y);
    const Eigen::MatrixXd Kyy = gram_matrix(kernel, fy);
    for (std::size_t gi = 0; gi < G.size(); ++gi) {
      const SampleMatrix fgx = apply_map(f, gx[gi]);
      values(static_cast<Eigen::Index>(fi), static_cast<Eigen::Index>(gi)) =
          mmd_u_squared_from_grams(gram_matrix(kernel, fgx), Kyy, cross_gram(kernel, fgx, fy));
    }
  });
  return values;
}

FitResult min_mmd_fit(const KernelSpec& kernel, const FiniteFunctionClass& G, const SampleMatrix& X,
                      const SampleMatrix& Y) {
  const auto F = FiniteFunctionClass::singleton_identity(Y.dim());
  FitResult fit;
  fit.per_member_values = empirical_value_matrix(kernel, F, G, X, Y);
  const auto row = fit.per_member_values.row(0);
  for (Eigen::Index g = 1; g < row.size(); ++g)
    if (row[g] < row[static_cast<Eigen::Index>(fit.g_index)]) fit.g_index = static_cast<std::size_t>(g);
  fit.objective = row[static_cast<Eigen::Index>(fit.g_index)];
  return fit;
}

namespace {

struct Saddle {
  Eigen::Index outer = 0;
  Eigen::Index inner = 0;
  double value = 0.0;
};

// min over rows of (max over columns), ties to the lowest index.
Saddle min_of_row_max(const Eigen::MatrixXd& M) {
  Saddle best{0, 0, std::numeric_limits<double>::infinity()};
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    Eigen::Index arg = 0;
    for (Eigen::Index c = 1; c < M.cols(); ++c)
      if (M(r, c) > M(r, arg)) arg = c;
    if (M(r, arg) < best.value) best = {r, arg, M(r, arg)};
  }
  return best;
}

}  // namespace

FitResult minimax_mmd_fit(const KernelSpec& kernel, const FiniteFunctionClass& F, const FiniteFunctionClass& G,
                          const SampleMatrix& X, const SampleMatrix& Y, Orientation orientation, unsigned threads) {
  FitResult fit;
  fit.per_member_values = empirical_value_matrix(kernel, F, G, X, Y, threads);
  fit.orientation = orientation;
  if (orientation == Orientation::min_f_max_g) {
    const Saddle s = min_of_row_max(fit.per_member_values);
    fit.f_index = static_cast<std::size_t>(s.outer);
    fit.g_index = static_cast<std::size_t>(s.inner);
    fit.objective = s.value;
  } else {
    const Saddle s = min_of_row_max(fit.per_member_values.transpose());
    fit.g_index = static_cast<std::size_t>(s.outer);
    fit.f_index = static_cast<std::size_t>(s.inner);
    fit.objective = s.value;
  }
  return fit;
}

PopulationOracle::PopulationOracle(Distribution P, Distribution Q, std::size_t mc_samples, std::uint64_t seed,
                                   unsigned threads)
    : P_(std::move(P)), Q_(std::move(Q)), mc_samples_(mc_samples), seed_(seed), threads_(threads) {
  if (mc_samples_ < 2) throw ArgumentError("oracle needs at least 2 Monte-Carlo samples");
}

bool PopulationOracle::closed_form_available(const KernelSpec& kernel, const FiniteFunctionClass& F,
                                             const FiniteFunctionClass& G) const {
  if (!std::holds_alternative<KernelSpec::Gaussian>(kernel.kind())) return false;
  if (!P_.gaussian() || !Q_.gaussian()) return false;
  for (const auto& f : F.members()) {
    if (!f.as_affine()) return false;
    for (const auto& g : G.members())
      if (!g.as_affine()) return false;
  }
  return true;
}

PopulationValues PopulationOracle::evaluate(const KernelSpec& kernel, const FiniteFunctionClass& F,
                                            const FiniteFunctionClass& G) const {
  if (G.input_dim() != P_.dim()) throw ArgumentError("generator input dim does not match P");
  if (G.output_dim() != Q_.dim() || F.input_dim() != Q_.dim()) throw ArgumentError("class dims do not match Q");
  const auto rows = static_cast<Eigen::Index>(F.size());
  const auto cols = static_cast<Eigen::Index>(G.size());
  PopulationValues out{Eigen::MatrixXd::Zero(rows, cols), Eigen::MatrixXd::Zero(rows, cols), false};
  if (closed_form_available(kernel, F, G)) {
    out.closed_form = true;
    const double sigma = std::get<KernelSpec::Gaussian>(kernel.kind()).sigma;
    for (Eigen::Index fi = 0; fi < rows; ++fi) {
      const FunctionMap& f = F[static_cast<std::size_t>(fi)];
      const GaussianDistSpec fq = Q_.gaussian()->push_forward(*f.as_affine());
      for (Eigen::Index gi = 0; gi < cols; ++gi) {
        const FunctionMap fg = FunctionMap::compose(f, G[static_cast<std::size_t>(gi)]);
        const GaussianDistSpec fgp = P_.gaussian()->push_forward(*fg.as_affine());
        out.value(fi, gi) = population_mmd_squared_gaussian_closed_form(sigma, fgp, fq).value;
      }
    }
    return out;
  }
  for (Eigen::Index fi = 0; fi < rows; ++fi) {
    const FunctionMap& f = F[static_cast<std::size_t>(fi)];
    const Sampler q = make_sampler(Q_, f);
    for (Eigen::Index gi = 0; gi < cols; ++gi) {
      const Sampler p = make_sampler(P_, FunctionMap::compose(f, G[static_cast<std::size_t>(gi)]));
      const auto cell = static_cast<std::uint64_t>(fi * cols + gi);
      const MmdEstimate est =
          population_mmd_squared_monte_carlo(kernel, p, q, mc_samples_, derive_seed(seed_, cell), threads_);
      out.value(fi, gi) = est.value;
      out.std_error(fi, gi) = est.std_error.value_or(0.0);
    }
  }
  return out;
}

ExcessRisk excess_risk(const FitResult& fit, const PopulationValues& population) {
  const Eigen::MatrixXd& V = population.value;
  const Eigen::MatrixXd& E = population.std_error;
  if (V.rows() != fit.per_member_values.rows() || V.cols() != fit.per_member_values.cols())
    throw ArgumentError("population values do not match the fit's class sizes");
  const auto fi = static_cast<Eigen::Index>(fit.f_index.value_or(0));
  const auto gi = static_cast<Eigen::Index>(fit.g_index);
  Saddle s;
  double se_star = 0.0;
  if (!fit.f_index) {
    Eigen::Index arg = 0;
    for (Eigen::Index g = 1; g < V.cols(); ++g)
      if (V(0, g) < V(0, arg)) arg = g;
    s = {0, arg, V(0, arg)};
    se_star = E(0, arg);
  } else if (fit.orientation.value_or(Orientation::min_f_max_g) == Orientation::min_f_max_g) {
    s = min_of_row_max(V);
    se_star = E(s.outer, s.inner);
  } else {
    s = min_of_row_max(V.transpose());
    se_star = E(s.inner, s.outer);
  }
  return {V(fi, gi) - s.value, std::sqrt(E(fi, gi) * E(fi, gi) + se_star * se_star)};
}

ExcessRisk excess_risk(const KernelSpec& kernel, const FiniteFunctionClass& F, const FiniteFunctionClass& G,
                       const FitResult& fit, const PopulationOracle& oracle) {
  return excess_risk(fit, oracle.evaluate(kernel, F, G));
}

}  // namespace mmdlab
