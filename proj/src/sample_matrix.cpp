#include "mmdlab/sample_matrix.hpp"

#include "mmdlab/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace mmdlab {

SampleMatrix::SampleMatrix(RowMatrix data) : data_(std::move(data)) {
  if (data_.rows() < 1) throw ArgumentError("sample matrix needs at least one row");
  if (data_.cols() < 1) throw ArgumentError("sample matrix needs at least one column");
  if (!data_.allFinite()) throw ArgumentError("sample matrix contains a non-finite entry");
}

SampleMatrix SampleMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ArgumentError("sample matrix needs at least one row");
  const auto d = rows.front().size();
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) throw ArgumentError("ragged sample rows");
    for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return SampleMatrix(std::move(m));
}

SampleMatrix SampleMatrix::concat(const SampleMatrix& a, const SampleMatrix& b) {
  if (a.dim() != b.dim()) throw ArgumentError("cannot concatenate samples of different dimension");
  RowMatrix m(a.data_.rows() + b.data_.rows(), a.data_.cols());
  m << a.data_, b.data_;
  return SampleMatrix(std::move(m));
}

namespace {

double parse_field(std::string_view field, std::size_t line_no) {
  while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front()))) field.remove_prefix(1);
  while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back()))) field.remove_suffix(1);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw ArgumentError("csv line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) + "'");
  return value;
}

}  // namespace

SampleMatrix read_csv_samples(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      row.push_back(parse_field(rest.substr(0, comma), line_no));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ArgumentError("csv line " + std::to_string(line_no) + ": expected " +
                          std::to_string(rows.front().size()) + " columns");
    rows.push_back(std::move(row));
  }
  return SampleMatrix::from_rows(rows);
}

SampleMatrix read_csv_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open sample file '" + path + "'");
  return read_csv_samples(in);
}

}  // namespace mmdlab
