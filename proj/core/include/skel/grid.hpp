#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace skel {

using Point = std::vector<double>;

/// Axis-aligned closed box [lo_1,hi_1] x ... x [lo_k,hi_k].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const noexcept { return lo.size(); }
  double width(std::size_t axis) const { return hi[axis] - lo[axis]; }
  double volume() const;
  /// Membership with an absolute slack of `tol` times each axis width.
  bool contains(std::span<const double> x, double tol = 0.0) const;

  static Box symmetric(std::span<const double> half_widths);
  static Box cube(std::size_t dim, double lo, double hi);
};

/// Uniform tensor grid of cells tiling a box; flat indices are row-major with the
/// last axis fastest.
class UniformGrid {
 public:
  UniformGrid() = default;
  UniformGrid(Box box, std::vector<std::size_t> resolution);
  UniformGrid(Box box, std::size_t per_axis);

  const Box& box() const noexcept { return box_; }
  std::size_t dim() const noexcept { return box_.dim(); }
  const std::vector<std::size_t>& resolution() const noexcept { return resolution_; }
  std::size_t cell_count() const noexcept { return cells_; }
  double cell_width(std::size_t axis) const { return widths_[axis]; }
  double cell_volume() const noexcept { return cell_volume_; }

  std::size_t flat_index(std::span<const std::size_t> multi) const;
  void multi_index(std::size_t flat, std::span<std::size_t> out) const;
  std::vector<std::size_t> multi_index(std::size_t flat) const;
  void cell_center(std::size_t flat, std::span<double> out) const;
  Point cell_center(std::size_t flat) const;
  void cell_lower_corner(std::size_t flat, std::span<double> out) const;
  /// Cell containing x; points on the upper faces go to the last cell of that axis.
  /// Returns cell_count() when x lies outside the box beyond `tol` relative slack.
  std::size_t locate(std::span<const double> x, double tol = 1e-12) const;

 private:
  Box box_;
  std::vector<std::size_t> resolution_;
  std::vector<double> widths_;
  std::vector<std::size_t> strides_;
  std::size_t cells_ = 0;
  double cell_volume_ = 0.0;
};

/// A self-map of a box, the common currency of the transfer-operator and
/// correlation code. The observed scalar state is coordinate 0.
struct BoxMap {
  std::string name;
  Box box;
  std::function<void(std::span<const double>, std::span<double>)> apply;
};

}  // namespace skel
