#pragma once

#include "mmdlab/complexity.hpp"
#include "mmdlab/estimators.hpp"
#include "mmdlab/experiments.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mmdlab {

/// Raised when a report cannot be written; carries the OS error text.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Copy of `j` with every real rounded to 7 significant digits.
Json round_reals(const Json& j);

/// Pretty-printed JSON with reals at 7 significant digits, newline-terminated.
std::string to_json_text(const Json& j);

/// RFC 4180 field quoting.
std::string csv_field(std::string_view s);

/// Per-trial table; the header row is always present.
std::string trials_csv(const std::vector<TrialRecord>& trials);
/// n, mean_deviation, stderr.
std::string decay_csv(const std::vector<DecayPoint>& points);

/// Writes `content` to a temporary file beside `path` and renames it over
/// `path`, so readers never see a partial file. The parent directory must exist.
void write_atomic(const std::filesystem::path& path, std::string_view content);

Json report_json(const ExperimentReport& report);
Json fit_json(const FitResult& fit);
Json complexity_estimate_json(const ComplexityEstimate& e);

/// Writes `path` (summary JSON), `<stem>.trials.csv` and, for decay runs,
/// `<stem>.decay.csv`, all beside each other. Returns the files written.
std::vector<std::filesystem::path> write_report(const ExperimentReport& report, const std::filesystem::path& path);

}  // namespace mmdlab
