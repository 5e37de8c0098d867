#include "skel/sparse.hpp"

#include <algorithm>

#include "skel/error.hpp"
#include "skel/parallel.hpp"

namespace skel {

SparseRowMatrix::SparseRowMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> t)
    : rows_(rows), cols_(cols) {
  for (const auto& e : t)
    if (e.row >= rows || e.col >= cols)
      throw Error(ErrorKind::domain, "sparse entry outside the matrix shape");
  std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  ptr_.assign(rows + 1, 0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i > 0 && t[i].row == t[i - 1].row && t[i].col == t[i - 1].col) {
      values_.back() += t[i].value;
      continue;
    }
    cols_idx_.push_back(t[i].col);
    values_.push_back(t[i].value);
    ++ptr_[t[i].row + 1];
  }
  for (std::size_t i = 0; i < rows; ++i) ptr_[i + 1] += ptr_[i];

  t_ptr_.assign(cols + 1, 0);
  for (auto c : cols_idx_) ++t_ptr_[c + 1];
  for (std::size_t j = 0; j < cols; ++j) t_ptr_[j + 1] += t_ptr_[j];
  t_rows_.resize(values_.size());
  t_values_.resize(values_.size());
  std::vector<std::size_t> fill(t_ptr_.begin(), t_ptr_.end() - 1);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t p = ptr_[i]; p < ptr_[i + 1]; ++p) {
      const std::size_t dst = fill[cols_idx_[p]]++;
      t_rows_[dst] = i;
      t_values_[dst] = values_[p];
    }
}

void SparseRowMatrix::left_multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != rows_ || y.size() != cols_)
    throw Error(ErrorKind::domain, "left_multiply shape mismatch");
  parallel_for(cols_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      double s = 0.0;
      for (std::size_t p = t_ptr_[j]; p < t_ptr_[j + 1]; ++p) s += x[t_rows_[p]] * t_values_[p];
      y[j] = s;
    }
  });
}

void SparseRowMatrix::right_multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != cols_ || y.size() != rows_)
    throw Error(ErrorKind::domain, "right_multiply shape mismatch");
  parallel_for(rows_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double s = 0.0;
      for (std::size_t p = ptr_[i]; p < ptr_[i + 1]; ++p) s += values_[p] * x[cols_idx_[p]];
      y[i] = s;
    }
  });
}

Eigen::MatrixXd SparseRowMatrix::right_multiply(const Eigen::MatrixXd& X) const {
  if (static_cast<std::size_t>(X.rows()) != cols_)
    throw Error(ErrorKind::domain, "right_multiply shape mismatch");
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_), X.cols());
  parallel_for(rows_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t p = ptr_[i]; p < ptr_[i + 1]; ++p)
        Y.row(static_cast<Eigen::Index>(i)) +=
            values_[p] * X.row(static_cast<Eigen::Index>(cols_idx_[p]));
  });
  return Y;
}

std::vector<double> SparseRowMatrix::row_sums() const {
  std::vector<double> s(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t p = ptr_[i]; p < ptr_[i + 1]; ++p) s[i] += values_[p];
  return s;
}

std::vector<Triplet> SparseRowMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t p = ptr_[i]; p < ptr_[i + 1]; ++p) t.push_back({i, cols_idx_[p], values_[p]});
  return t;
}

Eigen::MatrixXd SparseRowMatrix::to_dense() const {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_),
                                            static_cast<Eigen::Index>(cols_));
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t p = ptr_[i]; p < ptr_[i + 1]; ++p)
      D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols_idx_[p])) = values_[p];
  return D;
}

}  // namespace skel
