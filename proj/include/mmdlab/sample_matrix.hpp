#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mmdlab {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n x d matrix of observations, one row per draw. Rows are contiguous.
class SampleMatrix {
 public:
  /// Throws ArgumentError when data has no rows, no columns, or a non-finite entry.
  explicit SampleMatrix(RowMatrix data);

  static SampleMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(data_.cols()); }

  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * dim(), dim()};
  }

  const RowMatrix& data() const noexcept { return data_; }

  /// Row-major flattening, i.e. vec(g(X)) in R^{nd}.
  Eigen::Map<const Eigen::VectorXd> flat() const noexcept {
    return {data_.data(), data_.size()};
  }

  /// Stacks the rows of `a` above the rows of `b`.
  static SampleMatrix concat(const SampleMatrix& a, const SampleMatrix& b);

 private:
  RowMatrix data_;
};

/// Reads a headerless CSV with one observation per line.
SampleMatrix read_csv_samples(std::istream& in);
SampleMatrix read_csv_samples(const std::string& path);

}  // namespace mmdlab
