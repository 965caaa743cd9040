#include "mmdlab/report_io.hpp"

#include <atomic>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace mmdlab {

namespace {

double round7(double x) {
  if (!std::isfinite(x)) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.7g", x);
  return std::strtod(buf, nullptr);
}

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.7g", x);
  return buf;
}

template <typename T>
std::string opt(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_same_v<T, double>) return format_real(*v);
  else if constexpr (std::is_same_v<T, bool>) return *v ? "true" : "false";
  else return std::to_string(*v);
}

}  // namespace

Json round_reals(const Json& j) {
  if (j.is_number_float()) {
    const double x = j.get<double>();
    // JSON has no encoding for non-finite reals.
    return std::isfinite(x) ? Json(round7(x)) : Json();
  }
  if (j.is_array()) {
    Json out = Json::array();
    for (const auto& e : j) out.push_back(round_reals(e));
    return out;
  }
  if (j.is_object()) {
    Json out = Json::object();
    for (const auto& [k, v] : j.items()) out[k] = round_reals(v);
    return out;
  }
  return j;
}

std::string to_json_text(const Json& j) { return round_reals(j).dump(2) + "\n"; }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string trials_csv(const std::vector<TrialRecord>& trials) {
  std::string out = "trial,sub_seed,deviation,bound,covered,excess_risk,g_index,f_index\n";
  for (const auto& t : trials) {
    const std::string fields[] = {std::to_string(t.trial), std::to_string(t.sub_seed), format_real(t.deviation),
                                  opt(t.bound),            opt(t.covered),            opt(t.excess_risk),
                                  opt(t.g_index),          opt(t.f_index)};
    for (std::size_t i = 0; i < std::size(fields); ++i) {
      if (i) out += ',';
      out += csv_field(fields[i]);
    }
    out += '\n';
  }
  return out;
}

std::string decay_csv(const std::vector<DecayPoint>& points) {
  std::string out = "n,mean_deviation,stderr\n";
  for (const auto& p : points)
    out += std::to_string(p.n) + "," + format_real(p.mean_deviation) + "," + format_real(p.std_error) + "\n";
  return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  static std::atomic<unsigned long> counter{0};
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string() + ": " + std::strerror(errno));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      const std::string reason = std::strerror(errno);
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("cannot write " + path.string() + ": " + reason);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw IoError("cannot write " + path.string() + ": " + ec.message());
  }
}

Json report_json(const ExperimentReport& report) {
  return {{"experiment", to_string(report.kind)},
          {"config", report.config_echo},
          {"summary", report.summary},
          {"trial_count", report.trials.size()}};
}

Json fit_json(const FitResult& fit) {
  Json values = Json::array();
  for (Eigen::Index r = 0; r < fit.per_member_values.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < fit.per_member_values.cols(); ++c) row.push_back(fit.per_member_values(r, c));
    values.push_back(std::move(row));
  }
  Json j{{"g_index", fit.g_index}, {"objective", fit.objective}, {"per_member_values", values}};
  j["f_index"] = fit.f_index ? Json(*fit.f_index) : Json();
  j["orientation"] = fit.orientation ? Json(std::string(to_string(*fit.orientation))) : Json();
  return j;
}

Json complexity_estimate_json(const ComplexityEstimate& e) {
  return {{"mean", e.mean},
          {"std_error", e.std_error},
          {"inner_replicates", e.inner_replicates},
          {"outer_replicates", e.outer_replicates},
          {"seed", e.seed},
          {"exact", e.exact},
          {"between_variance", e.between_variance},
          {"within_variance", e.within_variance}};
}

std::vector<std::filesystem::path> write_report(const ExperimentReport& report, const std::filesystem::path& path) {
  const std::filesystem::path dir = path.parent_path();
  const std::string stem = path.stem().string();
  auto sibling = [&](const std::string& suffix) { return dir / (stem + suffix); };
  std::vector<std::filesystem::path> written{sibling(".trials.csv")};
  write_atomic(written.back(), trials_csv(report.trials));
  if (report.kind == ExperimentKind::decay) {
    written.push_back(sibling(".decay.csv"));
    write_atomic(written.back(), decay_csv(report.decay));
  }
  write_atomic(path, to_json_text(report_json(report)));
  written.push_back(path);
  return written;
}

}  // namespace mmdlab
