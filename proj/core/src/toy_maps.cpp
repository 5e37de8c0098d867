#include "skel/toy_maps.hpp"

#include <algorithm>
#include <cmath>

namespace skel {

namespace {

double double_mod(double x, double lo, double hi) {
  const double w = hi - lo;
  double y = 2.0 * (x - lo);
  y = std::fmod(y, w);
  if (y < 0.0) y += w;
  return lo + y;
}

ModelParams toy_params(double A, int k, double sigma) {
  ModelParams p;
  p.L = 1.0;
  p.k = k;
  p.A = A;
  p.sigma = sigma;
  p.M = 0.5;
  p.eps0 = 0.01;
  p.eps1 = 0.05;
  return p;
}

Branch whole_box(ScalarField phi, GradientField grad) {
  return Branch{{}, std::move(phi), std::move(grad)};
}

}  // namespace

BoxMap doubling_map() {
  return {"doubling", Box::cube(1, 0.0, 1.0), [](std::span<const double> x, std::span<double> y) {
            y[0] = double_mod(x[0], 0.0, 1.0);
          }};
}

BoxMap product_doubling(std::size_t dim) {
  return {"product-doubling", Box::cube(dim, -1.0, 1.0),
          [](std::span<const double> x, std::span<double> y) {
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = double_mod(x[i], -1.0, 1.0);
          }};
}

BoxMap identity_map(const Box& box) {
  return {"identity", box, [](std::span<const double> x, std::span<double> y) {
            std::copy(x.begin(), x.end(), y.begin());
          }};
}

BoxMap half_rotation() {
  return {"half-rotation", Box::cube(1, 0.0, 2.0),
          [](std::span<const double> x, std::span<double> y) {
            y[0] = x[0] < 1.0 ? x[0] + 1.0 : x[0] - 1.0;
          }};
}

BoxMap block_doubling() {
  return {"block-doubling", Box::cube(1, 0.0, 2.0),
          [](std::span<const double> x, std::span<double> y) {
            y[0] = x[0] < 1.0 ? double_mod(x[0], 0.0, 1.0) : double_mod(x[0], 1.0, 2.0);
          }};
}

BoxMap swap_doubling() {
  return {"swap-doubling", Box::cube(1, 0.0, 2.0),
          [](std::span<const double> x, std::span<double> y) {
            y[0] = x[0] < 1.0 ? 1.0 + double_mod(x[0], 0.0, 1.0) : double_mod(x[0] - 1.0, 0.0, 1.0);
          }};
}

UlamOperator two_cycle_operator() {
  return ulam_from_matrix(UniformGrid(Box::cube(1, 0.0, 2.0), 2),
                          SparseRowMatrix(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}}));
}

PiecewiseSystem linear_system(double A, int k, double sigma) {
  std::vector<Branch> b{whole_box([A](std::span<const double> x) { return A * x[0]; },
                                  [A](std::span<const double>, std::span<double> g) {
                                    std::fill(g.begin(), g.end(), 0.0);
                                    g[0] = A;
                                  })};
  return PiecewiseSystem(toy_params(A, k, sigma), std::move(b));
}

PiecewiseSystem contraction_system(double A, int k, double sigma) {
  std::vector<Branch> b{whole_box([](std::span<const double> x) { return 0.1 * x[0]; },
                                  [](std::span<const double>, std::span<double> g) {
                                    std::fill(g.begin(), g.end(), 0.0);
                                    g[0] = 0.1;
                                  })};
  return PiecewiseSystem(toy_params(A, k, sigma), std::move(b));
}

PiecewiseSystem square_system() {
  std::vector<Branch> b{whole_box([](std::span<const double> x) { return x[0] * x[0]; },
                                  [](std::span<const double> x, std::span<double> g) {
                                    g[0] = 2.0 * x[0];
                                    g[1] = 0.0;
                                  })};
  return PiecewiseSystem(toy_params(2.0, 2, 1.2), std::move(b));
}

PiecewiseSystem zero_system(int k) {
  std::vector<Branch> b{whole_box([](std::span<const double>) { return 0.0; },
                                  [](std::span<const double>, std::span<double> g) {
                                    std::fill(g.begin(), g.end(), 0.0);
                                  })};
  return PiecewiseSystem(toy_params(2.0, k, 1.2), std::move(b));
}

PiecewiseSystem crescent_system() {
  auto r2 = [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; };
  Branch b;
  b.constraints.push_back({[r2](std::span<const double> x) { return r2(x) - 0.81; },
                           [](std::span<const double> x, std::span<double> g) {
                             g[0] = 2.0 * x[0];
                             g[1] = 2.0 * x[1];
                           }});
  b.constraints.push_back({[r2](std::span<const double> x) { return 0.25 - r2(x); },
                           [](std::span<const double> x, std::span<double> g) {
                             g[0] = -2.0 * x[0];
                             g[1] = -2.0 * x[1];
                           }});
  b.constraints.push_back({[](std::span<const double> x) { return -x[1]; },
                           [](std::span<const double>, std::span<double> g) {
                             g[0] = 0.0;
                             g[1] = -1.0;
                           }});
  b.phi = [](std::span<const double> x) { return 0.5 * x[0]; };
  b.grad_phi = [](std::span<const double>, std::span<double> g) {
    g[0] = 0.5;
    g[1] = 0.0;
  };
  std::vector<Branch> branches{std::move(b)};
  return PiecewiseSystem(toy_params(2.0, 2, 1.2), std::move(branches));
}

}  // namespace skel
