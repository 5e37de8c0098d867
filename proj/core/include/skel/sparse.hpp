#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace skel {

struct Triplet {
  std::uint64_t row = 0;
  std::uint64_t col = 0;
  double value = 0.0;
};

/// Compressed sparse row matrix with a cached transpose for left products.
class SparseRowMatrix {
 public:
  SparseRowMatrix() = default;
  /// Triplets may come in any order; duplicates are summed.
  SparseRowMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_cols(std::size_t i) const {
    return {cols_idx_.data() + ptr_[i], ptr_[i + 1] - ptr_[i]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {values_.data() + ptr_[i], ptr_[i + 1] - ptr_[i]};
  }

  /// y = x^T A (pushes a mass vector forward).
  void left_multiply(std::span<const double> x, std::span<double> y) const;
  /// y = A x.
  void right_multiply(std::span<const double> x, std::span<double> y) const;
  /// Y = A X for a dense block.
  Eigen::MatrixXd right_multiply(const Eigen::MatrixXd& X) const;

  std::vector<double> row_sums() const;
  std::vector<Triplet> triplets() const;
  Eigen::MatrixXd to_dense() const;

  bool operator==(const SparseRowMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && ptr_ == o.ptr_ && cols_idx_ == o.cols_idx_ &&
           values_ == o.values_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> ptr_{0};
  std::vector<std::size_t> cols_idx_;
  std::vector<double> values_;
  // transpose, for gathers in left_multiply
  std::vector<std::size_t> t_ptr_{0};
  std::vector<std::size_t> t_rows_;
  std::vector<double> t_values_;
};

}  // namespace skel
