#pragma once

#include "mmdlab/bounds.hpp"
#include "mmdlab/distributions.hpp"
#include "mmdlab/estimators.hpp"
#include "mmdlab/function_classes.hpp"
#include "mmdlab/kernels.hpp"

#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmdlab {

using Json = nlohmann::json;

/// Parses a JSON file; unreadable or malformed input raises ConfigError.
Json read_json_file(const std::filesystem::path& file);

// Each parser reports failures as ConfigError carrying `path`, a JSONPath-like
// location such as "$.G.grid[3]".

/// {"kind": "gaussian"|"laplacian", "sigma": s, "dim"?: d}
/// {"kind": "translation_invariant", "profile": "gaussian"|"cauchy", "scale"?: s, "nu_t"?: v, "l_t"?: v}
/// {"kind": "composite", "base": kernel, "feature": map}
KernelSpec kernel_from_json(const Json& j, const std::string& path);

/// {"kind": "identity", "dim": d} | {"kind": "affine", "A": [[..]], "c"?: [..]}
/// | {"kind": "shallow_net", "W1", "b1", "W2", "b2", "activation": "relu"|"tanh", "l_sigma"?}
FunctionMap map_from_json(const Json& j, const std::string& path);

/// A list of maps, {"members": [...]}, or a grid {"family", "grid", "box"?, "epsilon"?, "dim"?}.
/// A null `j` gives the identity class on R^dim.
FiniteFunctionClass class_from_json(const Json& j, const std::string& path, std::size_t dim, std::string label);

/// {"kind": "gaussian", "mean": [..], "cov"?: [[..]]} | {"kind": "standard_normal", "dim": d}
/// | {"kind": "uniform", "lo": [..], "hi": [..]} | {"kind": "point_mass", "at": [..]}
Distribution distribution_from_json(const Json& j, const std::string& path);

enum class ExperimentKind { coverage, decay, excess_risk, kernel_audit };

std::string_view to_string(ExperimentKind kind) noexcept;
std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) noexcept;

struct ComplexityReplicates {
  std::size_t outer = 50;
  std::size_t inner = 200;
};

struct AuditSettings {
  std::vector<KernelSpec> kernels;
  std::vector<std::size_t> dims{1, 2, 5};
  std::size_t trials = 100'000;
  double half_width = 3.0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::coverage;
  KernelSpec kernel = KernelSpec::gaussian(1.0);
  FiniteFunctionClass F = FiniteFunctionClass::singleton_identity(1);
  FiniteFunctionClass G = FiniteFunctionClass::singleton_identity(1);
  Distribution P = GaussianDistSpec::standard(1);
  Distribution Q = GaussianDistSpec::standard(1);
  std::size_t n = 200;
  std::vector<std::size_t> n_ladder;
  double delta = 0.1;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  /// Coverage experiments compare against theorem1_highprob or gretton.
  BoundFormula bound = BoundFormula::theorem1_highprob;
  Corollary corollary = Corollary::corollary1;
  Orientation orientation = Orientation::min_f_max_g;
  ComplexityReplicates complexity;
  std::size_t oracle_samples = 1'000'000;
  std::optional<double> support_diameter;
  AuditSettings audit;
  std::optional<std::string> output;
  /// Worker threads. Not part of the echo: results do not depend on it.
  unsigned threads = 1;
  /// The source document, echoed into reports.
  Json echo = Json::object();

  /// Checks the cross-field invariants (trials >= 1, dims chain, ladder).
  void validate() const;
};

ExperimentConfig experiment_config_from_json(const Json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& file);

}  // namespace mmdlab
