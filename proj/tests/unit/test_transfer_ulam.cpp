#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "skel/components.hpp"
#include "skel/error.hpp"
#include "skel/example_family.hpp"
#include "skel/rng.hpp"
#include "skel/spectrum.hpp"
#include "skel/toy_maps.hpp"
#include "skel/ulam.hpp"

using namespace skel;

namespace {

GridFunction uniform_density(const UniformGrid& grid) {
  return GridFunction(grid, 1.0 / grid.box().volume());
}

PiecewiseSystem full_system() {
  const auto preset = find_preset("example-k2-full");
  REQUIRE(preset.has_value());
  const auto& m = preset->model;
  return make_example_system(build_example(m.A, m.M, m.L, m.k, preset->ell), m);
}

}  // namespace

TEST_SUITE("transfer_ulam") {

TEST_CASE("product doubling: stochastic rows and uniform density") {
  const auto op = build_ulam(product_doubling(2), {32, 32}, 100, 1);
  for (double s : op.P.row_sums()) CHECK(std::abs(s - 1.0) < 1e-12);
  const auto h = invariant_density(op);
  CHECK(std::abs(integral(h) - 1.0) < 1e-12);
  CHECK(l1_distance(h, uniform_density(op.grid)) <= 0.05);
  CHECK(fixed_point_residual(op, h) <= 1e-9);
}

TEST_CASE("same seed gives the same matrix") {
  const auto a = build_ulam(product_doubling(2), {16, 16}, 20, 9);
  const auto b = build_ulam(product_doubling(2), {16, 16}, 20, 9);
  const auto c = build_ulam(product_doubling(2), {16, 16}, 20, 10);
  CHECK(a.P == b.P);
  CHECK_FALSE(a.P == c.P);
}

TEST_CASE("build_ulam argument checks") {
  CHECK_THROWS_AS(build_ulam(doubling_map(), {4}, 100, 1), Error);
  CHECK_THROWS_AS(build_ulam(doubling_map(), {32}, 4, 1), Error);
  BoxMap escape{"escape", Box::cube(1, 0.0, 1.0),
                [](std::span<const double> x, std::span<double> y) { y[0] = 2.0 * x[0]; }};
  CHECK_THROWS_AS(build_ulam(escape, {16}, 16, 1), ModelConsistencyError);
}

TEST_CASE("two-cycle from the uniform start") {
  const auto op = two_cycle_operator();
  const auto h = invariant_density(op);
  CHECK(h.values[0] == doctest::Approx(h.values[1]));
  CHECK(std::abs(integral(h) - 1.0) < 1e-12);
}

TEST_CASE("power iteration reports non-convergence") {
  const auto op = build_ulam(doubling_map(), {60}, 100, 1);
  CHECK_THROWS_AS(invariant_density(op, {1e-300, 3}), ConvergenceError);
}

TEST_CASE("doubling spectrum") {
  // A non-dyadic grid: the dyadic 64-cell grid is nearly invariant under x -> 2x,
  // which makes its Ulam matrix almost nilpotent beyond the Perron root.
  for (std::size_t n : {60u, 100u}) {
    const auto op = build_ulam(doubling_map(), {n}, 100, 1);
    const auto s = leading_spectrum(op, 4);
    CHECK(std::abs(s.moduli[0] - 1.0) < 1e-12);
    CHECK(std::abs(s.q_hat() - 0.5) <= 0.05);
    const auto d = dense_spectrum(op, 4);
    CHECK(std::abs(d.q_hat() - s.q_hat()) <= 1e-6);
  }
  // On the dyadic grid both solvers agree that the gap collapses; the tiny
  // eigenvalues of a nearly nilpotent matrix are ill-conditioned, hence the loose match.
  const auto op64 = build_ulam(doubling_map(), {64}, 100, 1);
  const double q64 = leading_spectrum(op64, 4).q_hat();
  CHECK(std::abs(q64 - dense_spectrum(op64, 4).q_hat()) <= 1e-3);
  CHECK(q64 < 0.05);
}

TEST_CASE("identity map spectrum") {
  const auto op = build_ulam(identity_map(Box::cube(1, 0.0, 1.0)), {16}, 16, 1);
  const auto s = leading_spectrum(op, 5);
  for (double m : s.moduli) CHECK(std::abs(m - 1.0) < 1e-12);
  CHECK(s.unit_count == 5);
}

TEST_CASE("toy mixing map has a gap") {
  const auto op = build_ulam(product_doubling(2), {20, 20}, 50, 1);
  CHECK(leading_spectrum(op, 4).q_hat() < 1.0);
}

TEST_CASE("mixing components") {
  {
    const auto op = build_ulam(doubling_map(), {60}, 100, 1);
    const auto c = mixing_components(op, invariant_density(op), default_support_threshold(op));
    REQUIRE(c.classes.size() == 1);
    CHECK(c.classes[0].period == 1);
    CHECK(c.classes[0].mass == doctest::Approx(1.0));
  }
  {
    const auto op = build_ulam(block_doubling(), {60}, 100, 1);
    const auto c = mixing_components(op, invariant_density(op), default_support_threshold(op));
    CHECK(c.classes.size() == 2);
    CHECK(c.lcm_period() == 1);
  }
  {
    const auto op = two_cycle_operator();
    const auto c = mixing_components(op, invariant_density(op), default_support_threshold(op));
    REQUIRE(c.classes.size() == 1);
    CHECK(c.classes[0].period == 2);
    CHECK(c.cell_phase[0] != c.cell_phase[1]);
    CHECK(c.cyclic_count() == 2);
  }
  {
    const auto op = build_ulam(swap_doubling(), {60}, 100, 1);
    const auto c = mixing_components(op, invariant_density(op), default_support_threshold(op));
    REQUIRE(c.classes.size() == 1);
    CHECK(c.classes[0].period == 2);
  }
  {
    const auto op = two_cycle_operator();
    const GridFunction zero(op.grid, 0.0);
    CHECK_THROWS_AS(mixing_components(op, zero, 1e-3), Error);
  }
}

TEST_CASE("marginals of a uniform density") {
  const OmegaSpec omega{3, 1.0, 0.6};
  const UniformGrid grid(omega.box(), std::vector<std::size_t>{10, 12, 14});
  const auto h = uniform_density(grid);
  for (std::size_t j = 0; j < 3; ++j) {
    const auto m = marginal_density(h, j);
    CHECK(std::abs(integral(m) - 1.0) < 1e-12);
    for (double v : m.values) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.grid.box().lo[0] == -1.0);
    CHECK(m.grid.box().hi[0] == 1.0);
  }
}

TEST_CASE("full preset: density and marginals") {
  const auto sys = full_system();
  const auto a = build_ulam(sys, {32, 32}, 256, 1);
  const auto b = build_ulam(sys, {32, 32}, 256, 2);
  const auto ha = invariant_density(a);
  const auto hb = invariant_density(b);
  for (double v : ha.values) CHECK(v >= 0.0);
  CHECK(std::abs(integral(ha) - 1.0) < 1e-9);
  CHECK(l1_distance(ha, hb) <= 0.1);
  for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(integral(marginal_density(ha, j)) - 1.0) < 1e-6);
}

TEST_CASE("operator file round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "skel_unit_ulam";
  std::filesystem::create_directories(dir);
  const auto op = build_ulam(product_doubling(2), {12, 12}, 20, 3);
  save_ulam(op, dir / "op.bin");
  const auto back = load_ulam(dir / "op.bin");
  CHECK(back.P == op.P);
  CHECK(back.grid.resolution() == op.grid.resolution());
  CHECK(back.samples_per_cell == 20);
  CHECK(back.seed == 3);
  CHECK_THROWS_AS(load_ulam(dir / "missing.bin"), Error);
  std::filesystem::remove_all(dir);
}

}
