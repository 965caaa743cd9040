#include "mmdlab/experiments.hpp"

#include "mmdlab/complexity.hpp"
#include "mmdlab/errors.hpp"
#include "mmdlab/mmd.hpp"
#include "mmdlab/parallel.hpp"
#include "mmdlab/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace mmdlab {

namespace {

// Named substreams of the experiment seed, disjoint from the per-trial
// indices used for sub-seeds.
enum class Stream : std::uint64_t { complexity_fg = 1, complexity_f = 2, complexity_g = 3, oracle = 4, audit = 5 };

std::uint64_t stream_seed(std::uint64_t seed, Stream s) {
  return derive_seed(seed, (std::uint64_t{1} << 63) | static_cast<std::uint64_t>(s));
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Json make_echo(const ExperimentConfig& c) {
  Json echo = c.echo.is_object() ? c.echo : Json::object();
  echo["experiment"] = std::string(to_string(c.kind));
  echo["seed"] = c.seed;
  echo.erase("threads");
  return echo;
}

struct MeanSe {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return r;
  double ss = 0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  return r;
}

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

Json constants_json(const KernelConstants& k) {
  Json j{{"l", k.l()}, {"min_term", k.min_term()}};
  j["nu"] = k.nu() ? Json(*k.nu()) : Json();
  j["b"] = k.b() ? Json(*k.b()) : Json();
  return j;
}

Json complexity_json(const ComplexityEstimate& e) {
  return {{"mean", e.mean},
          {"std_error", e.std_error},
          {"outer", e.outer_replicates},
          {"inner", e.inner_replicates},
          {"between_variance", e.between_variance},
          {"within_variance", e.within_variance}};
}

Json coverage_summary(const std::vector<TrialRecord>& records) {
  std::size_t hits = 0;
  std::vector<double> devs;
  for (const auto& r : records) {
    if (r.covered.value_or(false)) ++hits;
    devs.push_back(r.deviation);
  }
  const double T = static_cast<double>(records.size());
  const double p = static_cast<double>(hits) / T;
  const MeanSe d = mean_se(devs);
  return {{"trials", records.size()},
          {"covered", hits},
          {"coverage", p},
          {"coverage_std_error", std::sqrt(p * (1 - p) / T)},
          {"mean_deviation", d.mean},
          {"deviation_std_error", d.std_error},
          {"max_deviation", devs.empty() ? 0.0 : *std::max_element(devs.begin(), devs.end())}};
}

struct Population {
  PopulationValues values;
  double max_std_error = 0.0;
};

Population population_values(const ExperimentConfig& c) {
  const PopulationOracle oracle(c.P, c.Q, c.oracle_samples, stream_seed(c.seed, Stream::oracle), c.threads);
  Population p{oracle.evaluate(c.kernel, c.F, c.G), 0.0};
  p.max_std_error = p.values.std_error.size() ? p.values.std_error.maxCoeff() : 0.0;
  return p;
}

Json oracle_json(const Population& p) {
  return {{"closed_form", p.values.closed_form}, {"max_std_error", p.max_std_error}};
}

// sup over (f, g) of |U-statistic - population value| on one fresh draw.
double sup_deviation(const ExperimentConfig& c, const Population& pop, std::size_t n, std::uint64_t sub_seed) {
  Rng rng = make_rng(sub_seed);
  const SampleMatrix X = c.P.draw(n, rng);
  const SampleMatrix Y = c.Q.draw(n, rng);
  const Eigen::MatrixXd values = empirical_value_matrix(c.kernel, c.F, c.G, X, Y);
  return (values - pop.values.value).cwiseAbs().maxCoeff();
}

ComplexityEstimate class_complexity(const ExperimentConfig& c, const FiniteFunctionClass& cls, const Distribution& d,
                                    std::size_t n, Stream s) {
  return expected_complexity(cls, make_sampler(d), n, c.complexity.outer, c.complexity.inner,
                             stream_seed(c.seed, s), c.threads);
}

void require_kind(const ExperimentConfig& c, ExperimentKind kind) {
  c.validate();
  if (c.kind != kind)
    throw ConfigError("experiment kind is '" + std::string(to_string(c.kind)) + "', expected '" +
                          std::string(to_string(kind)) + "'",
                      "$.experiment");
}

}  // namespace

std::optional<SlopeFit> log_log_slope(const std::vector<DecayPoint>& points) {
  if (points.size() < 2) return std::nullopt;
  for (const auto& p : points)
    if (!(p.mean_deviation > 0)) return std::nullopt;
  double xbar = 0, ybar = 0;
  for (const auto& p : points) {
    xbar += std::log(static_cast<double>(p.n));
    ybar += std::log(p.mean_deviation);
  }
  xbar /= static_cast<double>(points.size());
  ybar /= static_cast<double>(points.size());
  double sxx = 0, sxy = 0;
  for (const auto& p : points) {
    const double dx = std::log(static_cast<double>(p.n)) - xbar;
    sxx += dx * dx;
    sxy += dx * (std::log(p.mean_deviation) - ybar);
  }
  SlopeFit fit{sxy / sxx, 0.0};
  // Var ln(mean) ~ (se / mean)^2 per rung.
  double var = 0;
  for (const auto& p : points) {
    const double w = (std::log(static_cast<double>(p.n)) - xbar) / sxx;
    const double rel = p.std_error / p.mean_deviation;
    var += w * w * rel * rel;
  }
  fit.std_error = std::sqrt(var);
  return fit;
}

ExperimentReport run_coverage(const ExperimentConfig& c) {
  require_kind(c, ExperimentKind::coverage);
  const auto start = Clock::now();
  ExperimentReport report;
  report.kind = c.kind;
  report.config_echo = make_echo(c);

  const KernelConstants constants = certified_constants(c.kernel, c.F.output_dim(), c.support_diameter);
  Json bound_json;
  Json complexity = Json::object();
  double bound = 0.0;
  if (c.bound == BoundFormula::gretton) {
    if (!constants.nu()) throw ConfigError("the Hoeffding bound needs a kernel bound nu", "$.kernel");
    bound = gretton_deviation_bound(*constants.nu(), c.n, c.delta);
    bound_json = {{"formula", to_string(c.bound)}, {"value", bound}};
  } else {
    const ComplexityEstimate fg = class_complexity(c, compose_classes(c.F, c.G), c.P, c.n, Stream::complexity_fg);
    const ComplexityEstimate f = class_complexity(c, c.F, c.Q, c.n, Stream::complexity_f);
    BoundInputs in = BoundInputs::from_constants(constants, c.n, c.delta);
    in.gc_FG = fg.mean;
    in.gc_F = f.mean;
    const Theorem1Bounds t = theorem1_bounds(in);
    bound = t.highprob;
    const double se = 16 * std::sqrt(std::numbers::pi) * in.l * std::hypot(fg.std_error, f.std_error);
    bound_json = {{"formula", to_string(c.bound)},
                  {"value", bound},
                  {"expectation_bound", t.expectation},
                  {"complexity_std_error", se}};
    complexity = {{"gc_FG", complexity_json(fg)}, {"gc_F", complexity_json(f)}};
  }

  const Population pop = population_values(c);
  const double slack = 3 * pop.max_std_error;
  report.trials.resize(c.trials);
  parallel_for(c.trials, c.threads, [&](std::size_t t) {
    TrialRecord& r = report.trials[t];
    r.trial = t;
    r.sub_seed = derive_seed(c.seed, t);
    r.deviation = sup_deviation(c, pop, c.n, r.sub_seed);
    r.bound = bound;
    r.covered = r.deviation <= bound + slack;
  });

  report.summary = coverage_summary(report.trials);
  report.summary["bound"] = bound_json;
  report.summary["complexity"] = complexity;
  report.summary["constants"] = constants_json(constants);
  report.summary["oracle"] = oracle_json(pop);
  report.summary["delta"] = c.delta;
  report.summary["n"] = c.n;
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

ExperimentReport run_decay(const ExperimentConfig& c) {
  require_kind(c, ExperimentKind::decay);
  const auto start = Clock::now();
  ExperimentReport report;
  report.kind = c.kind;
  report.config_echo = make_echo(c);

  const Population pop = population_values(c);
  const std::size_t T = c.trials;
  report.trials.resize(c.n_ladder.size() * T);
  parallel_for(report.trials.size(), c.threads, [&](std::size_t idx) {
    TrialRecord& r = report.trials[idx];
    r.trial = idx;
    r.sub_seed = derive_seed(c.seed, idx);
    r.deviation = sup_deviation(c, pop, c.n_ladder[idx / T], r.sub_seed);
  });

  Json rungs = Json::array();
  for (std::size_t k = 0; k < c.n_ladder.size(); ++k) {
    std::vector<double> devs;
    for (std::size_t t = 0; t < T; ++t) devs.push_back(report.trials[k * T + t].deviation);
    const MeanSe m = mean_se(devs);
    report.decay.push_back({c.n_ladder[k], m.mean, m.std_error});
    rungs.push_back({{"n", c.n_ladder[k]}, {"mean_deviation", m.mean}, {"std_error", m.std_error}});
  }
  report.summary["ladder"] = rungs;
  report.summary["trials_per_n"] = T;
  report.summary["oracle"] = oracle_json(pop);
  if (const auto fit = log_log_slope(report.decay)) {
    report.summary["slope_defined"] = true;
    report.summary["slope"] = fit->slope;
    report.summary["slope_std_error"] = fit->std_error;
  } else {
    report.summary["slope_defined"] = false;
    report.summary["slope"] = nullptr;
    report.summary["slope_std_error"] = nullptr;
  }
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

ExperimentReport run_excess_risk_experiment(const ExperimentConfig& c, Corollary which) {
  require_kind(c, ExperimentKind::excess_risk);
  if (which == Corollary::corollary1 && c.F.size() != 1)
    throw ConfigError("the minimum-MMD estimator takes a single feature map", "$.F");
  const auto start = Clock::now();
  ExperimentReport report;
  report.kind = c.kind;
  report.config_echo = make_echo(c);
  report.config_echo["corollary"] = which == Corollary::corollary1 ? "corollary1" : "corollary2";

  const KernelConstants constants = certified_constants(c.kernel, c.F.output_dim(), c.support_diameter);
  BoundInputs in = BoundInputs::from_constants(constants, c.n, c.delta);
  Json complexity;
  double complexity_se = 0.0;
  const FiniteFunctionClass FG = compose_classes(c.F, c.G);
  if (which == Corollary::corollary1) {
    const ComplexityEstimate g = class_complexity(c, FG, c.P, c.n, Stream::complexity_g);
    in.gc_G = g.mean;
    complexity_se = g.std_error;
    complexity = {{"gc_G", complexity_json(g)}};
  } else {
    const ComplexityEstimate fg = class_complexity(c, FG, c.P, c.n, Stream::complexity_fg);
    const ComplexityEstimate f = class_complexity(c, c.F, c.Q, c.n, Stream::complexity_f);
    in.gc_FG = fg.mean;
    in.gc_F = f.mean;
    complexity_se = std::hypot(fg.std_error, f.std_error);
    complexity = {{"gc_FG", complexity_json(fg)}, {"gc_F", complexity_json(f)}};
  }
  const double bound = corollary_bounds(which, in);

  const Population pop = population_values(c);
  const KernelSpec kf = compose(c.kernel, c.F[0]);
  report.trials.resize(c.trials);
  parallel_for(c.trials, c.threads, [&](std::size_t t) {
    TrialRecord& r = report.trials[t];
    r.trial = t;
    r.sub_seed = derive_seed(c.seed, t);
    Rng rng = make_rng(r.sub_seed);
    const SampleMatrix X = c.P.draw(c.n, rng);
    const SampleMatrix Y = c.Q.draw(c.n, rng);
    FitResult fit;
    if (which == Corollary::corollary1) {
      fit = min_mmd_fit(kf, c.G, X, Y);
    } else {
      fit = minimax_mmd_fit(c.kernel, c.F, c.G, X, Y, c.orientation);
      r.f_index = fit.f_index;
    }
    r.g_index = fit.g_index;
    const ExcessRisk er = excess_risk(fit, pop.values);
    const auto fi = static_cast<Eigen::Index>(fit.f_index.value_or(0));
    r.deviation = std::abs(fit.objective - pop.values.value(fi, static_cast<Eigen::Index>(fit.g_index)));
    r.excess_risk = er.value;
    r.bound = bound;
    r.covered = er.value <= bound + 3 * er.std_error;
  });

  report.summary = coverage_summary(report.trials);
  std::vector<double> risks;
  std::vector<std::size_t> g_counts(c.G.size(), 0);
  for (const auto& r : report.trials) {
    risks.push_back(*r.excess_risk);
    ++g_counts[*r.g_index];
  }
  const MeanSe m = mean_se(risks);
  report.summary["mean_excess_risk"] = m.mean;
  report.summary["excess_risk_std_error"] = m.std_error;
  report.summary["median_excess_risk"] = median(risks);
  report.summary["g_index_counts"] = g_counts;
  report.summary["bound"] = {{"formula", which == Corollary::corollary1 ? "corollary1" : "corollary2"},
                             {"value", bound},
                             {"complexity_std_error", 32 * std::sqrt(std::numbers::pi) * in.l * complexity_se}};
  report.summary["complexity"] = complexity;
  report.summary["constants"] = constants_json(constants);
  report.summary["oracle"] = oracle_json(pop);
  report.summary["delta"] = c.delta;
  report.summary["n"] = c.n;
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

namespace {

std::string kernel_name(const KernelSpec& k) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, KernelSpec::Gaussian>) return "gaussian(sigma=" + Json(v.sigma).dump() + ")";
        else if constexpr (std::is_same_v<T, KernelSpec::Laplacian>)
          return "laplacian(sigma=" + Json(v.sigma).dump() + ")";
        else if constexpr (std::is_same_v<T, KernelSpec::TranslationInvariant>)
          return "translation_invariant(" + v.name + ")";
        else return "composite";
      },
      k.kind());
}

// Max over a fine grid of |k~(t + h) - k~(t)| / h for the 1-D Gaussian profile.
Json gaussian_gradient_peak(double sigma) {
  const double s = std::abs(sigma);
  const double h = 1e-6 * s;
  double best = 0, best_t = 0;
  for (int i = 0; i <= 300000; ++i) {
    const double t = 3.0 * s * i / 300000.0;
    const double slope = std::abs(std::exp(-(t + h) * (t + h) / (s * s)) - std::exp(-t * t / (s * s))) / h;
    if (slope > best) best = slope, best_t = t;
  }
  const double expected_t = s / std::sqrt(2.0);
  const double expected_value = std::sqrt(2.0) * std::exp(-0.5) / s;
  return {{"peak_t", best_t},
          {"peak_value", best},
          {"expected_t", expected_t},
          {"expected_value", expected_value},
          {"pass", std::abs(best_t - expected_t) <= 1e-3 * s && std::abs(best - expected_value) <= 1e-4 * expected_value}};
}

}  // namespace

ExperimentReport run_kernel_audit(const ExperimentConfig& c) {
  require_kind(c, ExperimentKind::kernel_audit);
  const auto start = Clock::now();
  ExperimentReport report;
  report.kind = c.kind;
  report.config_echo = make_echo(c);

  struct Cell {
    std::size_t kernel;
    std::size_t dim;
  };
  std::vector<Cell> cells;
  for (std::size_t k = 0; k < c.audit.kernels.size(); ++k)
    for (std::size_t d : c.audit.dims) cells.push_back({k, d});
  std::vector<Json> results(cells.size());
  const double a = c.audit.half_width;
  parallel_for(cells.size(), c.threads, [&](std::size_t idx) {
    const KernelSpec& kernel = c.audit.kernels[cells[idx].kernel];
    const std::size_t d = cells[idx].dim;
    const KernelConstants k = certified_constants(kernel, d);
    const std::uint64_t seed = derive_seed(stream_seed(c.seed, Stream::audit), idx);
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> box(-a, a);
    std::uniform_real_distribution<double> log_step(std::log(1e-4), std::log(1.0));
    std::normal_distribution<double> nd;
    auto point = [&] {
      std::vector<double> p(d);
      for (auto& x : p) x = box(rng);
      return p;
    };
    double lip = 0, single = 0, diag = 0;
    std::size_t lip_bad = 0, single_bad = 0, diag_bad = 0;
    for (std::size_t t = 0; t < c.audit.trials; ++t) {
      const auto u1 = point(), u2 = point(), w = point();
      // Second argument a small random step away, at scales from 1e-4 to 1.
      auto w2 = w;
      const double step = std::exp(log_step(rng));
      double dist = 0;
      for (auto& x : w2) {
        const double dx = step * nd(rng);
        x += dx;
        dist += dx * dx;
      }
      dist = std::sqrt(dist);
      if (dist == 0) continue;
      const double r = std::abs((kernel.eval(u1, w) - kernel.eval(u2, w)) - (kernel.eval(u1, w2) - kernel.eval(u2, w2))) / dist;
      const double s = std::abs(kernel.eval(u1, w) - kernel.eval(u1, w2)) / dist;
      const double kd = kernel.eval(w, w);
      lip = std::max(lip, r);
      single = std::max(single, s);
      diag = std::max(diag, kd);
      if (r > k.l() * (1 + 1e-9)) ++lip_bad;
      if (s > 0.5 * k.l() * (1 + 1e-9)) ++single_bad;
      if (k.nu() && kd > *k.nu() * (1 + 1e-12)) ++diag_bad;
    }
    const PointSampler domain = [d, a](Rng& g) {
      std::uniform_real_distribution<double> u(-a, a);
      Eigen::VectorXd p(static_cast<Eigen::Index>(d));
      for (auto& x : p) x = u(g);
      return p;
    };
    const double h_ratio = seminorm_probe(kernel, domain, c.audit.trials, derive_seed(seed, 1));
    const double h_bound = mmd_kernel_seminorm_bounds(k).m_lip;
    Json j{{"kernel", kernel_name(kernel)},
           {"dim", d},
           {"trials", c.audit.trials},
           {"certified", constants_json(k)},
           {"lipschitz_ratio_max", lip},
           {"lipschitz_violations", lip_bad},
           {"single_argument_ratio_max", single},
           {"single_argument_bound", 0.5 * k.l()},
           {"single_argument_violations", single_bad},
           {"diagonal_max", diag},
           {"diagonal_violations", diag_bad},
           {"h_lipschitz_ratio_max", h_ratio},
           {"h_lipschitz_bound", h_bound},
           {"h_violations", h_ratio > h_bound * (1 + 1e-9) ? 1 : 0}};
    j["pass"] = lip_bad == 0 && single_bad == 0 && diag_bad == 0 && h_ratio <= h_bound * (1 + 1e-9);
    results[idx] = std::move(j);
  });

  Json entries = Json::array();
  bool pass = true;
  for (auto& r : results) {
    pass = pass && r["pass"].get<bool>();
    entries.push_back(std::move(r));
  }
  Json peaks = Json::array();
  for (const auto& kernel : c.audit.kernels)
    if (const auto* g = std::get_if<KernelSpec::Gaussian>(&kernel.kind())) {
      Json p = gaussian_gradient_peak(g->sigma);
      p["kernel"] = kernel_name(kernel);
      pass = pass && p["pass"].get<bool>();
      peaks.push_back(std::move(p));
    }
  report.summary = {{"audits", entries}, {"gradient_peaks", peaks}, {"pass", pass}};
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::coverage: return run_coverage(c);
    case ExperimentKind::decay: return run_decay(c);
    case ExperimentKind::excess_risk: return run_excess_risk_experiment(c, c.corollary);
    case ExperimentKind::kernel_audit: return run_kernel_audit(c);
  }
  throw ConfigError("unknown experiment kind", "$.experiment");
}

}  // namespace mmdlab
