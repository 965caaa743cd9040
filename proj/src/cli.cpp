#include "mmdlab/cli.hpp"

#include "mmdlab/bounds.hpp"
#include "mmdlab/complexity.hpp"
#include "mmdlab/config.hpp"
#include "mmdlab/errors.hpp"
#include "mmdlab/estimators.hpp"
#include "mmdlab/experiments.hpp"
#include "mmdlab/mmd.hpp"
#include "mmdlab/report_io.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <cstdlib>
#include <iomanip>
#include <ostream>

namespace mmdlab {

namespace {

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned threads = 0;
  std::string out;
};

unsigned resolve_threads(std::optional<unsigned> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("MMDLAB_THREADS"); env && *env) {
    unsigned v = 0;
    const char* end = env + std::strlen(env);
    const auto [p, ec] = std::from_chars(env, end, v);
    if (ec != std::errc() || p != end) throw ConfigError("MMDLAB_THREADS must be a non-negative integer");
    return v;
  }
  return 0;
}

void emit(const Globals& g, const Json& j, std::ostream& out) {
  const std::string text = to_json_text(j);
  if (g.out.empty()) out << text;
  else write_atomic(g.out, text);
}

// Inline JSON when the argument starts with '{', otherwise a file name.
Json json_argument(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && arg[first] == '{') {
    try {
      return Json::parse(arg);
    } catch (const Json::parse_error& e) {
      throw ConfigError(std::string("malformed JSON: ") + e.what(), "$");
    }
  }
  return read_json_file(arg);
}

// {"csv": FILE} or {"distribution": {...}, "n": N}; relative paths resolve
// against the config file's directory.
SampleMatrix data_from_json(const Json& j, const std::string& path, const std::filesystem::path& base, Rng& rng) {
  if (!j.is_object()) throw ConfigError("expected an object", path);
  if (j.contains("csv")) {
    if (!j["csv"].is_string()) throw ConfigError("expected a file name", path + ".csv");
    std::filesystem::path file = j["csv"].get<std::string>();
    if (file.is_relative()) file = base / file;
    try {
      return read_csv_samples(file);
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what(), path + ".csv");
    }
  }
  if (!j.contains("distribution") || !j.contains("n"))
    throw ConfigError("expected 'csv' or 'distribution' with 'n'", path);
  if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1) throw ConfigError("expected n >= 1", path + ".n");
  return distribution_from_json(j["distribution"], path + ".distribution").draw(j["n"].get<std::size_t>(), rng);
}

const Json& require_key(const Json& j, const char* key) {
  if (!j.is_object()) throw ConfigError("expected an object", "$");
  if (!j.contains(key)) throw ConfigError("missing required key", std::string("$.") + key);
  return j[key];
}

std::size_t size_key(const Json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer() || j[key].get<long long>() < 1)
    throw ConfigError("expected a positive integer", std::string("$.") + key);
  return j[key].get<std::size_t>();
}

int cmd_mmd(const Globals& g, const std::string& which, const std::string& x, const std::string& y,
            const std::string& kernel_arg, std::ostream& out) {
  const KernelSpec kernel = kernel_from_json(json_argument(kernel_arg), "$");
  const SampleMatrix X = read_csv_samples(std::filesystem::path(x));
  const SampleMatrix Y = read_csv_samples(std::filesystem::path(y));
  const MmdEstimate e = which == "u" ? mmd_u_squared(kernel, X, Y) : mmd_v_squared(kernel, X, Y);
  emit(g, {{"estimator", to_string(e.estimator)}, {"value", e.value}, {"n", X.rows()}, {"dim", X.dim()}}, out);
  return exit_ok;
}

struct BoundFlags {
  std::optional<double> l, nu, b, delta, gc_fg, gc_f, gc_g, chaos, chaos_y, support_diameter;
  std::optional<std::size_t> n;
  std::string kernel;
  std::size_t dim = 1;
};

int cmd_bound(const Globals& g, const std::string& name, const BoundFlags& f, std::ostream& out) {
  const auto formula = parse_bound_formula(name);
  if (!formula) throw ConfigError("unknown bound '" + name + "'");
  if (!f.n) throw ConfigError("--n is required");
  BoundInputs in;
  if (!f.kernel.empty()) {
    const KernelConstants k = certified_constants(kernel_from_json(json_argument(f.kernel), "$"), f.dim,
                                                  f.support_diameter);
    in = BoundInputs::from_constants(k, *f.n, f.delta.value_or(0.1));
  } else {
    in.l = f.l.value_or(0.0);
    in.nu = f.nu;
    in.b = f.b;
    in.n = *f.n;
    in.delta = f.delta.value_or(0.1);
  }
  in.gc_FG = f.gc_fg;
  in.gc_F = f.gc_f;
  in.gc_G = f.gc_g;
  in.chaos = f.chaos;

  auto need = [](const auto& v, const char* flag) {
    if (!v) throw ConfigError(std::string(flag) + " is required for this bound");
    return *v;
  };
  Json j{{"formula", to_string(*formula)}, {"n", in.n}, {"delta", in.delta}};
  switch (*formula) {
    case BoundFormula::theorem1_expectation:
    case BoundFormula::theorem1_highprob: {
      if (f.kernel.empty()) need(f.l, "--l");
      const Theorem1Bounds t = theorem1_bounds(in);
      j["value"] = t.highprob;
      j["expectation_bound"] = t.expectation;
      break;
    }
    case BoundFormula::gretton:
      j["value"] = gretton_deviation_bound(need(in.nu, "--nu"), in.n, in.delta);
      break;
    case BoundFormula::fukumizu: {
      const double nu = need(in.nu, "--nu");
      const double cx = fukumizu_cstar(need(f.chaos, "--chaos"), nu, in.n, in.delta);
      j["cstar_x"] = cx;
      if (f.chaos_y) {
        const double cy = fukumizu_cstar(*f.chaos_y, nu, in.n, in.delta);
        j["cstar_y"] = cy;
        j["value"] = cx + cy;
      } else {
        j["value"] = cx;
      }
      break;
    }
    case BoundFormula::empirical_measure: {
      const double nu = need(in.nu, "--nu");
      j["value"] = empirical_measure_bound(nu, in.n, in.delta);
      j["excess_bound"] = empirical_measure_excess_bound(nu, in.n, in.delta);
      break;
    }
    case BoundFormula::corollary1:
    case BoundFormula::corollary2:
      if (f.kernel.empty()) need(f.l, "--l");
      j["value"] = corollary_bounds(
          *formula == BoundFormula::corollary1 ? Corollary::corollary1 : Corollary::corollary2, in);
      break;
  }
  emit(g, j, out);
  return exit_ok;
}

int cmd_complexity(const Globals& g, const std::string& which, const std::string& config_file, std::ostream& out) {
  const Json cfg = read_json_file(config_file);
  const std::filesystem::path base = std::filesystem::path(config_file).parent_path();
  Rng rng = make_rng(derive_seed(g.seed, 0));
  const SampleMatrix X = data_from_json(require_key(cfg, "data"), "$.data", base, rng);
  const FiniteFunctionClass cls =
      class_from_json(cfg.contains("class") ? cfg["class"] : Json(), "$.class", X.dim(), "class");
  const std::size_t replicates = size_key(cfg, "replicates", 1000);
  const std::uint64_t seed = derive_seed(g.seed, 1);
  ComplexityEstimate e;
  if (which == "chaos") {
    const KernelSpec k = kernel_from_json(require_key(cfg, "kernel"), "$.kernel");
    e = empirical_rademacher_chaos(k, cls, X, replicates, seed, g.threads);
  } else {
    const std::vector<SampleMatrix> values = cls.values_on(X);
    if (which == "gaussian") {
      e = empirical_gaussian_complexity(values, replicates, seed, g.threads);
    } else {
      RademacherMode mode = RademacherMode::automatic;
      if (cfg.contains("mode")) {
        const std::string m = cfg["mode"].is_string() ? cfg["mode"].get<std::string>() : "";
        if (m == "exact") mode = RademacherMode::exact;
        else if (m == "sampled") mode = RademacherMode::sampled;
        else if (m != "automatic") throw ConfigError("expected 'automatic', 'exact' or 'sampled'", "$.mode");
      }
      e = empirical_rademacher_complexity(values, replicates, seed, mode, g.threads);
    }
  }
  Json j = complexity_estimate_json(e);
  j["measure"] = which;
  j["n"] = X.rows();
  j["class_size"] = cls.size();
  emit(g, j, out);
  return exit_ok;
}

int cmd_fit(const Globals& g, const std::string& which, const std::string& config_file, std::ostream& out) {
  const Json cfg = read_json_file(config_file);
  const std::filesystem::path base = std::filesystem::path(config_file).parent_path();
  const KernelSpec kernel = kernel_from_json(require_key(cfg, "kernel"), "$.kernel");
  Rng rx = make_rng(derive_seed(g.seed, 0));
  Rng ry = make_rng(derive_seed(g.seed, 1));
  const SampleMatrix X = data_from_json(require_key(cfg, "X"), "$.X", base, rx);
  const SampleMatrix Y = data_from_json(require_key(cfg, "Y"), "$.Y", base, ry);
  const FiniteFunctionClass G = class_from_json(require_key(cfg, "G"), "$.G", X.dim(), "G");
  const FiniteFunctionClass F = class_from_json(cfg.contains("F") ? cfg["F"] : Json(), "$.F", Y.dim(), "F");
  Orientation orientation = Orientation::min_f_max_g;
  if (cfg.contains("orientation")) {
    const auto o = parse_orientation(cfg["orientation"].is_string() ? cfg["orientation"].get<std::string>() : "");
    if (!o) throw ConfigError("expected 'min_f_max_g' or 'min_g_max_f'", "$.orientation");
    orientation = *o;
  }
  FitResult fit;
  if (which == "minmmd") {
    if (F.size() != 1) throw ConfigError("minmmd takes a single feature map", "$.F");
    fit = min_mmd_fit(compose(kernel, F[0]), G, X, Y);
  } else {
    fit = minimax_mmd_fit(kernel, F, G, X, Y, orientation, g.threads);
  }
  Json j = fit_json(fit);
  // Population excess risk is available when both samples come from named laws.
  const Json& xd = cfg["X"];
  const Json& yd = cfg["Y"];
  if (xd.contains("distribution") && yd.contains("distribution")) {
    const std::size_t m = cfg.contains("oracle") && cfg["oracle"].contains("monte_carlo_m")
                              ? cfg["oracle"]["monte_carlo_m"].get<std::size_t>()
                              : 1'000'000;
    const PopulationOracle oracle(distribution_from_json(xd["distribution"], "$.X.distribution"),
                                  distribution_from_json(yd["distribution"], "$.Y.distribution"), m,
                                  derive_seed(g.seed, 2), g.threads);
    const ExcessRisk er = excess_risk(kernel, F, G, fit, oracle);
    j["excess_risk"] = {{"value", er.value}, {"std_error", er.std_error}};
  }
  emit(g, j, out);
  return exit_ok;
}

ExperimentConfig experiment_config(const Globals& g, const std::string& kind, const std::string& config_file) {
  Json cfg = config_file.empty() ? Json::object() : read_json_file(config_file);
  if (!cfg.is_object()) throw ConfigError("expected an object", "$");
  if (cfg.contains("experiment")) {
    const auto declared = cfg["experiment"].is_string() ? parse_experiment_kind(cfg["experiment"].get<std::string>())
                                                        : std::nullopt;
    if (declared != parse_experiment_kind(kind))
      throw ConfigError("config declares a different experiment than '" + kind + "'", "$.experiment");
  }
  cfg["experiment"] = kind;
  if (g.seed_given) cfg["seed"] = g.seed;
  if (kind == "kernel-audit" && !cfg.contains("kernel") && !(cfg.contains("audit") && cfg["audit"].contains("kernels")))
    cfg["audit"]["kernels"] = Json::array({{{"kind", "gaussian"}, {"sigma", 1.0}}, {{"kind", "laplacian"}, {"sigma", 1.0}}});
  ExperimentConfig c = experiment_config_from_json(cfg);
  c.threads = g.threads;
  return c;
}

int cmd_experiment(const Globals& g, const std::string& kind, const std::string& config_file, std::ostream& out,
                   std::ostream& err) {
  const ExperimentConfig c = experiment_config(g, kind, config_file);
  const ExperimentReport report = run_experiment(c);
  const std::string target = !g.out.empty() ? g.out : c.output.value_or("");
  if (target.empty()) {
    out << to_json_text(report_json(report));
  } else {
    for (const auto& p : write_report(report, target)) err << "wrote " << p.string() << "\n";
  }
  err << "wall-clock: " << std::fixed << std::setprecision(2) << report.wall_clock_seconds << " s\n";
  return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Maximum mean discrepancy estimators, bounds and experiments", "mmdlab"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::optional<unsigned> threads_flag;
  app.add_option("--seed", g.seed, "Seed for all randomness (default 0)");
  app.add_option("--threads", threads_flag, "Worker threads (default: MMDLAB_THREADS, else all cores)");
  app.add_option("--out", g.out, "Output file (default: standard output)");

  std::string estimator, x_file, y_file, kernel_arg;
  auto* mmd = app.add_subcommand("mmd", "Squared MMD of two samples");
  mmd->add_option("estimator", estimator, "u or v")->required()->check(CLI::IsMember({"u", "v"}));
  mmd->add_option("--x", x_file, "CSV sample X")->required()->check(CLI::ExistingFile);
  mmd->add_option("--y", y_file, "CSV sample Y")->required()->check(CLI::ExistingFile);
  mmd->add_option("--kernel", kernel_arg, "Kernel JSON (inline or file)")->required();

  std::string bound_name;
  BoundFlags bf;
  auto* bound = app.add_subcommand("bound", "Evaluate a deviation or excess-risk bound");
  bound
      ->add_option("formula", bound_name, "theorem1|gretton|fukumizu|empirical-measure|corollary1|corollary2")
      ->required()
      ->check(CLI::IsMember({"theorem1", "gretton", "fukumizu", "empirical-measure", "corollary1", "corollary2"}));
  auto* l_opt = bound->add_option("--l", bf.l, "Kernel Lipschitz constant l");
  auto* nu_opt = bound->add_option("--nu", bf.nu, "Kernel bound nu");
  bound->add_option("--b", bf.b, "Domain diameter b");
  bound->add_option("--n", bf.n, "Sample size")->required();
  bound->add_option("--delta", bf.delta, "Confidence level delta (default 0.1)");
  bound->add_option("--gc-fg", bf.gc_fg, "E G_n(F o G(X))");
  bound->add_option("--gc-f", bf.gc_f, "E G_n(F(Y))");
  bound->add_option("--gc-g", bf.gc_g, "E G_n(G(X))");
  bound->add_option("--chaos", bf.chaos, "Rademacher chaos on X");
  bound->add_option("--chaos-y", bf.chaos_y, "Rademacher chaos on Y (two-sided C*)");
  auto* bk = bound->add_option("--kernel", bf.kernel, "Kernel JSON; derives l and nu");
  bound->add_option("--dim", bf.dim, "Kernel input dimension for --kernel (default 1)");
  bound->add_option("--support-diameter", bf.support_diameter, "Support diameter for --kernel");
  bk->excludes(l_opt)->excludes(nu_opt);

  std::string complexity_kind, complexity_config;
  auto* complexity = app.add_subcommand("complexity", "Empirical complexity of a function class");
  complexity->add_option("measure", complexity_kind, "gaussian|rademacher|chaos")
      ->required()
      ->check(CLI::IsMember({"gaussian", "rademacher", "chaos"}));
  complexity->add_option("--config", complexity_config, "JSON config")->required()->check(CLI::ExistingFile);

  std::string fit_kind, fit_config;
  auto* fit = app.add_subcommand("fit", "Fit the minimum-MMD or minimax estimator");
  fit->add_option("estimator", fit_kind, "minmmd|minimax")->required()->check(CLI::IsMember({"minmmd", "minimax"}));
  fit->add_option("--config", fit_config, "JSON config")->required()->check(CLI::ExistingFile);

  std::string experiment_kind, experiment_config_file;
  auto* experiment = app.add_subcommand("experiment", "Monte-Carlo experiments");
  experiment->require_subcommand(1);
  auto* run = experiment->add_subcommand("run", "Run an experiment from a config file");
  run->add_option("kind", experiment_kind, "coverage|decay|excess-risk|kernel-audit")
      ->required()
      ->check(CLI::IsMember({"coverage", "decay", "excess-risk", "kernel-audit"}));
  run->add_option("--config", experiment_config_file, "JSON config")->required()->check(CLI::ExistingFile);

  std::string audit_config;
  auto* audit = app.add_subcommand("kernel-audit", "Probe certified kernel constants");
  audit->add_option("--config", audit_config, "JSON config (default: Gaussian and Laplacian, sigma 1)")
      ->check(CLI::ExistingFile);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return exit_usage;
  }

  try {
    g.seed_given = app.count("--seed") > 0;
    g.threads = resolve_threads(threads_flag);
    if (mmd->parsed()) return cmd_mmd(g, estimator, x_file, y_file, kernel_arg, out);
    if (bound->parsed()) return cmd_bound(g, bound_name, bf, out);
    if (complexity->parsed()) return cmd_complexity(g, complexity_kind, complexity_config, out);
    if (fit->parsed()) return cmd_fit(g, fit_kind, fit_config, out);
    if (run->parsed()) return cmd_experiment(g, experiment_kind, experiment_config_file, out, err);
    if (audit->parsed()) return cmd_experiment(g, "kernel-audit", audit_config, out, err);
    err << app.help();
    return exit_usage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_failure;
  }
}

}  // namespace mmdlab
