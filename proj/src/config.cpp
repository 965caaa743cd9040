#include "mmdlab/config.hpp"

#include "mmdlab/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace mmdlab {

namespace {

std::string child(const std::string& path, std::string_view key) { return path + "." + std::string(key); }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const Json& require(const Json& j, std::string_view key, const std::string& path) {
  if (!j.is_object()) throw ConfigError("expected an object", path);
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing required key", child(path, key));
  return *it;
}

const Json* optional_key(const Json& j, std::string_view key) {
  if (!j.is_object()) return nullptr;
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError("expected a number", path);
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError("expected a finite number", path);
  return v;
}

std::size_t count(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError("expected a non-negative integer", path);
  return j.get<std::size_t>();
}

std::string text(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError("expected a string", path);
  return j.get<std::string>();
}

Eigen::VectorXd vector(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a nonempty array of numbers", path);
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], index(path, i));
  return v;
}

Eigen::MatrixXd matrix(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a nonempty array of rows", path);
  std::size_t cols = 0;
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].empty()) throw ConfigError("expected a nonempty row", index(path, r));
    if (r == 0) cols = j[r].size();
    if (j[r].size() != cols) throw ConfigError("rows differ in length", index(path, r));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], index(index(path, r), c));
  return m;
}

// Library argument errors raised while building an object from a config
// node are reported against that node.
template <typename Fn>
auto at_path(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what(), path);
  }
}

std::function<double(std::span<const double>)> named_profile(const std::string& name, double scale,
                                                              const std::string& path) {
  if (!(scale > 0)) throw ConfigError("scale must be positive", child(path, "scale"));
  const double s2 = scale * scale;
  auto sq = [](std::span<const double> t) {
    double s = 0;
    for (double x : t) s += x * x;
    return s;
  };
  if (name == "gaussian") return [=](std::span<const double> t) { return std::exp(-sq(t) / s2); };
  if (name == "cauchy") return [=](std::span<const double> t) { return 1.0 / (1.0 + sq(t) / s2); };
  throw ConfigError("unknown profile '" + name + "'", child(path, "profile"));
}

}  // namespace

Json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string(), "$");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what(), "$");
  }
}

KernelSpec kernel_from_json(const Json& j, const std::string& path) {
  const std::string kind = text(require(j, "kind", path), child(path, "kind"));
  std::optional<std::size_t> dim;
  if (const Json* d = optional_key(j, "dim")) dim = count(*d, child(path, "dim"));
  return at_path(path, [&]() -> KernelSpec {
    if (kind == "gaussian") return KernelSpec::gaussian(number(require(j, "sigma", path), child(path, "sigma")), dim);
    if (kind == "laplacian")
      return KernelSpec::laplacian(number(require(j, "sigma", path), child(path, "sigma")), dim);
    if (kind == "translation_invariant") {
      const std::string profile = text(require(j, "profile", path), child(path, "profile"));
      const Json* s = optional_key(j, "scale");
      const double scale = s ? number(*s, child(path, "scale")) : 1.0;
      std::optional<double> nu_t, l_t;
      if (const Json* v = optional_key(j, "nu_t")) nu_t = number(*v, child(path, "nu_t"));
      if (const Json* v = optional_key(j, "l_t")) l_t = number(*v, child(path, "l_t"));
      return KernelSpec::translation_invariant(named_profile(profile, scale, path), nu_t, l_t, dim, profile);
    }
    if (kind == "composite") {
      const KernelSpec base = kernel_from_json(require(j, "base", path), child(path, "base"));
      const FunctionMap f = map_from_json(require(j, "feature", path), child(path, "feature"));
      return compose(base, f);
    }
    throw ConfigError("unknown kernel kind '" + kind + "'", child(path, "kind"));
  });
}

FunctionMap map_from_json(const Json& j, const std::string& path) {
  const std::string kind = text(require(j, "kind", path), child(path, "kind"));
  return at_path(path, [&]() -> FunctionMap {
    if (kind == "identity") return FunctionMap::identity(count(require(j, "dim", path), child(path, "dim")));
    if (kind == "affine") {
      Eigen::MatrixXd A = matrix(require(j, "A", path), child(path, "A"));
      const Json* c = optional_key(j, "c");
      Eigen::VectorXd cv = c ? vector(*c, child(path, "c")) : Eigen::VectorXd::Zero(A.rows());
      return FunctionMap::affine(std::move(A), std::move(cv));
    }
    if (kind == "shallow_net") {
      const std::string act = text(require(j, "activation", path), child(path, "activation"));
      if (act != "relu" && act != "tanh") throw ConfigError("unknown activation '" + act + "'", child(path, "activation"));
      std::optional<double> l_sigma;
      if (const Json* l = optional_key(j, "l_sigma")) l_sigma = number(*l, child(path, "l_sigma"));
      return FunctionMap::shallow_net(matrix(require(j, "W1", path), child(path, "W1")),
                                      vector(require(j, "b1", path), child(path, "b1")),
                                      matrix(require(j, "W2", path), child(path, "W2")),
                                      vector(require(j, "b2", path), child(path, "b2")),
                                      act == "relu" ? Activation::relu : Activation::tanh, l_sigma);
    }
    throw ConfigError("unknown map kind '" + kind + "'", child(path, "kind"));
  });
}

FiniteFunctionClass class_from_json(const Json& j, const std::string& path, std::size_t dim, std::string label) {
  if (j.is_null()) return FiniteFunctionClass::singleton_identity(dim, label);
  if (const Json* l = optional_key(j, "label")) label = text(*l, child(path, "label"));
  const Json* members = j.is_array() ? &j : optional_key(j, "members");
  const std::string members_path = j.is_array() ? path : child(path, "members");
  if (members) {
    if (!members->is_array() || members->empty()) throw ConfigError("expected a nonempty list of maps", members_path);
    std::vector<FunctionMap> maps;
    for (std::size_t i = 0; i < members->size(); ++i)
      maps.push_back(map_from_json((*members)[i], index(members_path, i)));
    return at_path(members_path, [&] { return FiniteFunctionClass(std::move(maps), label); });
  }
  if (!optional_key(j, "family")) throw ConfigError("expected a member list or a grid with a family", path);

  GridClassSpec spec;
  spec.label = label;
  const std::string family = text(require(j, "family", path), child(path, "family"));
  if (family == "shift") spec.family = GridFamily::shift;
  else if (family == "scale") spec.family = GridFamily::scale;
  else if (family == "location_scale") spec.family = GridFamily::location_scale;
  else throw ConfigError("unknown grid family '" + family + "'", child(path, "family"));
  spec.dim = dim;
  if (const Json* d = optional_key(j, "dim")) spec.dim = count(*d, child(path, "dim"));
  const std::string grid_path = child(path, "grid");
  const Json& grid = require(j, "grid", path);
  if (!grid.is_array()) throw ConfigError("expected an array of parameter vectors", grid_path);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // Scalars are accepted as one-parameter points.
    if (grid[i].is_number()) {
      spec.grid.push_back({number(grid[i], index(grid_path, i))});
    } else {
      const Eigen::VectorXd p = vector(grid[i], index(grid_path, i));
      spec.grid.emplace_back(p.data(), p.data() + p.size());
    }
  }
  if (const Json* b = optional_key(j, "box")) {
    const Eigen::VectorXd box = vector(*b, child(path, "box"));
    if (box.size() != 2 || box[0] > box[1]) throw ConfigError("expected [lo, hi] with lo <= hi", child(path, "box"));
    spec.box = std::make_pair(box[0], box[1]);
  }
  if (const Json* e = optional_key(j, "epsilon")) spec.epsilon = number(*e, child(path, "epsilon"));
  try {
    return materialize_grid(spec);
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), path);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what(), path);
  }
}

Distribution distribution_from_json(const Json& j, const std::string& path) {
  const std::string kind = text(require(j, "kind", path), child(path, "kind"));
  return at_path(path, [&]() -> Distribution {
    if (kind == "standard_normal") return GaussianDistSpec::standard(count(require(j, "dim", path), child(path, "dim")));
    if (kind == "gaussian") {
      Eigen::VectorXd mean = vector(require(j, "mean", path), child(path, "mean"));
      const Json* c = optional_key(j, "cov");
      Eigen::MatrixXd cov = c ? matrix(*c, child(path, "cov")) : Eigen::MatrixXd::Identity(mean.size(), mean.size());
      return GaussianDistSpec(std::move(mean), std::move(cov));
    }
    if (kind == "point_mass") return GaussianDistSpec::point_mass(vector(require(j, "at", path), child(path, "at")));
    if (kind == "uniform")
      return UniformBox(vector(require(j, "lo", path), child(path, "lo")),
                        vector(require(j, "hi", path), child(path, "hi")));
    throw ConfigError("unknown distribution kind '" + kind + "'", child(path, "kind"));
  });
}

std::string_view to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::coverage: return "coverage";
    case ExperimentKind::decay: return "decay";
    case ExperimentKind::excess_risk: return "excess-risk";
    case ExperimentKind::kernel_audit: return "kernel-audit";
  }
  return "coverage";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) noexcept {
  if (name == "coverage") return ExperimentKind::coverage;
  if (name == "decay") return ExperimentKind::decay;
  if (name == "excess-risk" || name == "excess_risk") return ExperimentKind::excess_risk;
  if (name == "kernel-audit" || name == "kernel_audit") return ExperimentKind::kernel_audit;
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1", "$.trials");
  if (!(delta > 0 && delta < 1)) throw ConfigError("delta must lie in (0, 1)", "$.delta");
  if (kind == ExperimentKind::kernel_audit) {
    if (audit.kernels.empty()) throw ConfigError("no kernels to audit", "$.audit.kernels");
    if (audit.trials < 1) throw ConfigError("trials must be >= 1", "$.audit.trials");
    return;
  }
  if (G.input_dim() != P.dim()) throw ConfigError("generator input dim does not match P", "$.G");
  if (G.output_dim() != Q.dim()) throw ConfigError("generator output dim does not match Q", "$.G");
  if (F.input_dim() != Q.dim()) throw ConfigError("feature input dim does not match Q", "$.F");
  if (auto d = kernel.input_dim(); d && *d != F.output_dim())
    throw ConfigError("kernel input dim does not match feature output dim", "$.kernel");
  if (kind == ExperimentKind::decay) {
    if (n_ladder.size() < 4) throw ConfigError("ladder needs at least 4 sample sizes", "$.n_ladder");
    for (std::size_t i = 0; i < n_ladder.size(); ++i) {
      if (n_ladder[i] < 2) throw ConfigError("sample sizes must be >= 2", index("$.n_ladder", i));
      if (i > 0 && n_ladder[i] <= n_ladder[i - 1])
        throw ConfigError("ladder must be strictly increasing", index("$.n_ladder", i));
    }
    if (n_ladder.back() < 8 * n_ladder.front()) throw ConfigError("ladder must span at least 8x", "$.n_ladder");
  } else if (n < 2) {
    throw ConfigError("n must be >= 2", "$.n");
  }
  if (oracle_samples < 2) throw ConfigError("oracle needs at least 2 samples", "$.oracle.monte_carlo_m");
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  const std::string root = "$";
  if (!j.is_object()) throw ConfigError("expected an object", root);
  ExperimentConfig c;
  c.echo = j;
  if (const Json* e = optional_key(j, "experiment")) {
    const auto kind = parse_experiment_kind(text(*e, "$.experiment"));
    if (!kind) throw ConfigError("unknown experiment '" + e->get<std::string>() + "'", "$.experiment");
    c.kind = *kind;
  }
  if (const Json* v = optional_key(j, "n")) c.n = count(*v, "$.n");
  if (const Json* v = optional_key(j, "n_ladder")) {
    if (!v->is_array()) throw ConfigError("expected an array", "$.n_ladder");
    for (std::size_t i = 0; i < v->size(); ++i) c.n_ladder.push_back(count((*v)[i], index("$.n_ladder", i)));
  }
  if (const Json* v = optional_key(j, "delta")) c.delta = number(*v, "$.delta");
  if (const Json* v = optional_key(j, "trials")) c.trials = count(*v, "$.trials");
  if (const Json* v = optional_key(j, "seed")) {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
      throw ConfigError("expected a non-negative integer", "$.seed");
    c.seed = v->get<std::uint64_t>();
  }
  if (const Json* v = optional_key(j, "bound")) {
    const auto f = parse_bound_formula(text(*v, "$.bound"));
    if (!f || (*f != BoundFormula::theorem1_highprob && *f != BoundFormula::gretton))
      throw ConfigError("coverage bound must be 'theorem1' or 'gretton'", "$.bound");
    c.bound = *f;
  }
  if (const Json* v = optional_key(j, "corollary")) {
    const std::string s = text(*v, "$.corollary");
    if (s == "corollary1") c.corollary = Corollary::corollary1;
    else if (s == "corollary2") c.corollary = Corollary::corollary2;
    else throw ConfigError("expected 'corollary1' or 'corollary2'", "$.corollary");
  }
  if (const Json* v = optional_key(j, "orientation")) {
    const auto o = parse_orientation(text(*v, "$.orientation"));
    if (!o) throw ConfigError("expected 'min_f_max_g' or 'min_g_max_f'", "$.orientation");
    c.orientation = *o;
  }
  if (const Json* v = optional_key(j, "complexity")) {
    if (const Json* o = optional_key(*v, "outer")) c.complexity.outer = count(*o, "$.complexity.outer");
    if (const Json* i = optional_key(*v, "inner")) c.complexity.inner = count(*i, "$.complexity.inner");
    if (c.complexity.outer < 2 || c.complexity.inner < 2)
      throw ConfigError("replicate counts must be >= 2", "$.complexity");
  }
  if (const Json* v = optional_key(j, "oracle"))
    if (const Json* m = optional_key(*v, "monte_carlo_m")) c.oracle_samples = count(*m, "$.oracle.monte_carlo_m");
  if (const Json* v = optional_key(j, "support_diameter")) c.support_diameter = number(*v, "$.support_diameter");
  if (const Json* v = optional_key(j, "output")) c.output = text(*v, "$.output");

  if (c.kind == ExperimentKind::kernel_audit) {
    const Json* a = optional_key(j, "audit");
    if (a) {
      if (const Json* ks = optional_key(*a, "kernels")) {
        if (!ks->is_array()) throw ConfigError("expected an array of kernels", "$.audit.kernels");
        for (std::size_t i = 0; i < ks->size(); ++i)
          c.audit.kernels.push_back(kernel_from_json((*ks)[i], index("$.audit.kernels", i)));
      }
      if (const Json* ds = optional_key(*a, "dims")) {
        if (!ds->is_array() || ds->empty()) throw ConfigError("expected a nonempty array", "$.audit.dims");
        c.audit.dims.clear();
        for (std::size_t i = 0; i < ds->size(); ++i) {
          c.audit.dims.push_back(count((*ds)[i], index("$.audit.dims", i)));
          if (c.audit.dims.back() == 0) throw ConfigError("dims must be >= 1", index("$.audit.dims", i));
        }
      }
      if (const Json* t = optional_key(*a, "trials")) c.audit.trials = count(*t, "$.audit.trials");
      if (const Json* h = optional_key(*a, "half_width")) c.audit.half_width = number(*h, "$.audit.half_width");
    }
    if (c.audit.kernels.empty()) {
      if (const Json* k = optional_key(j, "kernel")) c.audit.kernels.push_back(kernel_from_json(*k, "$.kernel"));
    }
    c.validate();
    return c;
  }

  c.kernel = kernel_from_json(require(j, "kernel", root), "$.kernel");
  c.P = distribution_from_json(require(j, "P", root), "$.P");
  c.Q = distribution_from_json(require(j, "Q", root), "$.Q");
  const Json* G = optional_key(j, "G");
  c.G = class_from_json(G ? *G : Json(), "$.G", c.P.dim(), "G");
  const Json* F = optional_key(j, "F");
  c.F = class_from_json(F ? *F : Json(), "$.F", c.Q.dim(), "F");
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& file) {
  return experiment_config_from_json(read_json_file(file));
}

}  // namespace mmdlab
