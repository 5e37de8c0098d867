#include "skel/grid.hpp"

#include <cmath>

#include "skel/error.hpp"

namespace skel {

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < dim(); ++i) v *= width(i);
  return v;
}

bool Box::contains(std::span<const double> x, double tol) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    const double slack = tol * width(i);
    if (!(x[i] >= lo[i] - slack && x[i] <= hi[i] + slack)) return false;
  }
  return true;
}

Box Box::symmetric(std::span<const double> half_widths) {
  Box b;
  for (double h : half_widths) {
    b.lo.push_back(-h);
    b.hi.push_back(h);
  }
  return b;
}

Box Box::cube(std::size_t dim, double lo, double hi) {
  return Box{std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
}

UniformGrid::UniformGrid(Box box, std::vector<std::size_t> resolution)
    : box_(std::move(box)), resolution_(std::move(resolution)) {
  if (box_.dim() == 0 || resolution_.size() != box_.dim())
    throw Error(ErrorKind::domain, "grid resolution must list one count per box axis");
  widths_.resize(dim());
  strides_.assign(dim(), 1);
  cells_ = 1;
  cell_volume_ = 1.0;
  for (std::size_t a = dim(); a-- > 0;) {
    if (resolution_[a] == 0) throw Error(ErrorKind::domain, "grid resolution must be positive");
    if (!(box_.hi[a] > box_.lo[a])) throw Error(ErrorKind::domain, "grid box has an empty axis");
    widths_[a] = box_.width(a) / static_cast<double>(resolution_[a]);
    strides_[a] = cells_;
    cells_ *= resolution_[a];
    cell_volume_ *= widths_[a];
  }
}

UniformGrid::UniformGrid(Box box, std::size_t per_axis)
    : UniformGrid(box, std::vector<std::size_t>(box.dim(), per_axis)) {}

std::size_t UniformGrid::flat_index(std::span<const std::size_t> multi) const {
  std::size_t f = 0;
  for (std::size_t a = 0; a < dim(); ++a) f += multi[a] * strides_[a];
  return f;
}

void UniformGrid::multi_index(std::size_t flat, std::span<std::size_t> out) const {
  for (std::size_t a = 0; a < dim(); ++a) {
    out[a] = flat / strides_[a];
    flat %= strides_[a];
  }
}

std::vector<std::size_t> UniformGrid::multi_index(std::size_t flat) const {
  std::vector<std::size_t> m(dim());
  multi_index(flat, m);
  return m;
}

void UniformGrid::cell_center(std::size_t flat, std::span<double> out) const {
  for (std::size_t a = 0; a < dim(); ++a) {
    const std::size_t i = flat / strides_[a];
    flat %= strides_[a];
    out[a] = box_.lo[a] + (static_cast<double>(i) + 0.5) * widths_[a];
  }
}

Point UniformGrid::cell_center(std::size_t flat) const {
  Point p(dim());
  cell_center(flat, p);
  return p;
}

void UniformGrid::cell_lower_corner(std::size_t flat, std::span<double> out) const {
  for (std::size_t a = 0; a < dim(); ++a) {
    const std::size_t i = flat / strides_[a];
    flat %= strides_[a];
    out[a] = box_.lo[a] + static_cast<double>(i) * widths_[a];
  }
}

std::size_t UniformGrid::locate(std::span<const double> x, double tol) const {
  std::size_t f = 0;
  for (std::size_t a = 0; a < dim(); ++a) {
    const double slack = tol * box_.width(a);
    if (!(x[a] >= box_.lo[a] - slack && x[a] <= box_.hi[a] + slack)) return cells_;
    const double t = std::floor((x[a] - box_.lo[a]) / widths_[a]);
    std::size_t i = t <= 0.0 ? 0 : static_cast<std::size_t>(t);
    if (i >= resolution_[a]) i = resolution_[a] - 1;
    f += i * strides_[a];
  }
  return f;
}

}  // namespace skel
