#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "skel/csv.hpp"
#include "skel/error.hpp"
#include "skel/osc_norms.hpp"
#include "skel/rng.hpp"

using namespace skel;

namespace {

const double kGamma = 1.0 / std::sqrt(2.0);

ModelParams small_model() {
  ModelParams p;
  p.A = 2.0;
  p.sigma = 1.2;
  p.eps0 = 0.1;
  return p;
}

// Random values on a coarse blocks x blocks partition of Omega, sampled on a fine grid.
GridFunction random_blocks(Rng& rng, const OmegaSpec& omega, std::size_t res, std::size_t blocks) {
  std::vector<double> coarse(blocks * blocks);
  for (auto& v : coarse) v = uniform(rng, -1.0, 1.0);
  GridFunction g(UniformGrid(omega.box(), res));
  std::vector<std::size_t> m(2);
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    g.grid.multi_index(i, m);
    g.values[i] = coarse[(m[0] * blocks / res) * blocks + m[1] * blocks / res];
  }
  return g;
}

}  // namespace

TEST_SUITE("osc_norms") {

TEST_CASE("osc") {
  const UniformGrid grid(Box::cube(2, -1.0, 1.0), 200);
  const double origin[] = {0.0, 0.0};

  const GridFunction c(grid, 3.0);
  CHECK(osc(c, origin, 0.1) == 0.0);

  const auto half = GridFunction::sample(grid, [](std::span<const double> x) { return x[0] < 0 ? 1.0 : 0.0; });
  CHECK(osc(half, origin, 0.1) == 1.0);

  const auto lin = GridFunction::sample(grid, [](std::span<const double> x) { return x[0]; });
  CHECK(std::abs(osc(lin, origin, 0.1) - 0.2) <= grid.cell_width(0) * (1.0 + 1e-9));

  const double far[] = {5.0, 5.0};
  CHECK_THROWS_AS(osc(lin, far, 0.001), Error);
}

TEST_CASE("seminorm of zero and of a square indicator") {
  const UniformGrid grid(Box::cube(2, -2.0, 2.0), 256);
  const GridFunction zero(grid, 0.0);
  CHECK(seminorm_alpha(zero, 1.0, 0.2) == 0.0);

  // Osc integral ~ perimeter * 2 eps, so the alpha = 1 profile tends to 8.
  const auto sq = GridFunction::sample(grid, [](std::span<const double> x) {
    return (x[0] > 0 && x[0] < 1 && x[1] > 0 && x[1] < 1) ? 1.0 : 0.0;
  });
  const double v = seminorm_alpha(sq, 1.0, 0.2);
  CHECK(std::abs(v - 8.0) <= 0.15 * 8.0);
}

TEST_CASE("seminorm is positively homogeneous") {
  Rng rng = make_rng(1, Stream::probe);
  const OmegaSpec omega{2, 1.0, kGamma};
  const auto g = random_blocks(rng, omega, 64, 4);
  for (double c : {2.0, 0.37, -3.0}) {
    const double a = seminorm_alpha(g, 1.0, 0.1);
    const double b = seminorm_alpha(g.scaled(c), 1.0, 0.1);
    CHECK(std::abs(b - std::abs(c) * a) <= 1e-12 * std::abs(c) * a);
    const auto na = norm_alpha_L(g, omega, 0.7, 0.1);
    const auto nb = norm_alpha_L(g.scaled(c), omega, 0.7, 0.1);
    CHECK(std::abs(nb.total - std::abs(c) * na.total) <= 1e-12 * std::abs(c) * na.total);
    const auto fa = norm_alpha(g, 0.7, 0.1);
    const auto fb = norm_alpha(g.scaled(c), 0.7, 0.1);
    CHECK(std::abs(fb.total - std::abs(c) * fa.total) <= 1e-12 * std::abs(c) * fa.total);
  }
}

TEST_CASE("seminorm argument checks") {
  const UniformGrid grid(Box::cube(1, 0.0, 1.0), 10);
  const GridFunction f(grid, 1.0);
  CHECK_THROWS_AS(seminorm(f, {1.0, 0.05, 32, OscMode::extend_by_zero}), Error);
  CHECK_THROWS_AS(seminorm(f, {1.0, 0.5, 3, OscMode::extend_by_zero}), Error);
  CHECK_THROWS_AS(seminorm(f, {1.5, 0.5, 32, OscMode::extend_by_zero}), Error);
}

TEST_CASE("K(Omega)") {
  CHECK(std::abs(K_omega(2, 1.0, kGamma) - 54.6274169979695) < 1e-10);
  CHECK(K_omega(1, 1.0, 0.5) == 8.0);
  CHECK(std::abs(K_omega(2, 1.0, 1e-9) - 32.000000032) < 1e-8);

  Rng rng = make_rng(2, Stream::probe);
  for (int t = 0; t < 50; ++t) {
    const int k = 2 + static_cast<int>(rng() % 6);
    const double L = uniform(rng, 0.5, 3.0);
    const double g = uniform(rng, 0.05, 0.95);
    double sum = 0.0;
    for (int i = 1; i <= k; ++i) sum += 2.0 * std::pow(g, i - 1) * L;
    const double first = std::pow(2.0, k + 2) * std::pow(sum, k - 1);
    const double second = std::pow(2.0, 2 * k + 1) * std::pow(L, k - 1) *
                          std::pow((1.0 - std::pow(g, k)) / (1.0 - g), k - 1);
    CHECK(std::abs(first - second) <= 1e-12 * first);
    CHECK(K_omega(k, L, g) == first);
  }
}

TEST_CASE("norm of the constant one on Omega") {
  const OmegaSpec omega{2, 1.0, kGamma};
  const GridFunction one(UniformGrid(omega.box(), 64), 1.0);
  const auto r = norm_alpha_L(one, omega, 1.0, 0.1);
  CHECK(r.seminorm == 0.0);
  const double vol = 2.0 * 2.0 * kGamma;
  CHECK(std::abs(r.total - (2.0 * K_omega(2, 1.0, kGamma) + vol)) < 1e-12 * r.total);
}

TEST_CASE("restriction inequalities on random piecewise-constant functions") {
  Rng rng = make_rng(3, Stream::probe);
  const OmegaSpec omega{2, 1.0, kGamma};
  const double alpha = 1.0, eps0 = 0.1;
  const double C = restriction_constant(omega, alpha, eps0);
  for (int t = 0; t < 20; ++t) {
    const auto g = random_blocks(rng, omega, 64, 2 + static_cast<std::size_t>(rng() % 6));
    const double on_omega = norm_alpha_L(g, omega, alpha, eps0).total;
    const double extended = norm_alpha(g, alpha, eps0).total;
    CHECK(extended <= on_omega);
    CHECK(on_omega <= C * extended);
  }
}

TEST_CASE("lift T_s") {
  const OmegaSpec omega{2, 1.0, kGamma};
  const auto F = [](double x) { return std::sin(3.0 * x) + x * x; };
  const auto t1 = lift_Ts(F, 1, omega, {40, 40});
  const auto t2 = lift_Ts(F, 2, omega, {40, 40});
  for (std::size_t i = 0; i < t1.values.size(); ++i) {
    const Point z = t1.grid.cell_center(i);
    CHECK(t1.values[i] == F(z[0]));
    CHECK(std::abs(t2.values[i] - F(z[1] / kGamma)) <= 1e-6);
  }
  const auto ones = lift_Ts([](double) { return 1.0; }, 2, omega, {8, 8});
  for (double v : ones.values) CHECK(v == 1.0);

  const auto Fg = GridFunction::sample(UniformGrid(Box::cube(1, -1.0, 1.0), 50),
                                       [&](std::span<const double> x) { return F(x[0]); });
  const auto t2g = lift_Ts(Fg, 2, omega, {30, 7});
  CHECK(t2g.grid.resolution()[1] == 50);
  for (std::size_t i = 0; i < t2g.values.size(); ++i) {
    const Point z = t2g.grid.cell_center(i);
    CHECK(std::abs(t2g.values[i] - F(z[1] / kGamma)) <= 1e-12);
  }
}

TEST_CASE("norm factor for constant H") {
  const GridFunction H(UniformGrid(Box::cube(1, -1.0, 1.0), 1024), 1.0);
  const auto f = correlation_norm_factor(H, small_model(), 1, 1.0);
  CHECK(std::abs(f.term_l1 - 2.82842712474619) < 1e-12);
  CHECK(f.term_osc == 0.0);
  CHECK(std::abs(f.term_sup - 27.31370849898476) < 1e-11);
  CHECK(std::abs(f.value - (f.term_l1 + f.term_sup)) < 1e-12);
}

TEST_CASE("norm factor for an interval indicator") {
  const UniformGrid grid(Box::cube(1, -1.0, 1.0), 1024);
  const auto H = GridFunction::sample(grid, [](std::span<const double> x) {
    return (x[0] >= -0.3 && x[0] < 0.2) ? 1.0 : 0.0;
  });
  const auto f = correlation_norm_factor(H, small_model(), 1, 1.0);
  CHECK(std::abs(H.l1() - 0.5) < 1e-12);
  CHECK(std::abs(f.h_seminorm - 4.0) <= 0.05 * 4.0);

  const auto f2 = correlation_norm_factor(H.scaled(2.0), small_model(), 1, 1.0);
  CHECK(f2.term_l1 == 2.0 * f.term_l1);
  CHECK(f2.term_sup == 2.0 * f.term_sup);
  CHECK(f2.term_osc == 2.0 * f.term_osc);
}

TEST_CASE("norm factor rejects H with unbounded oscillation") {
  const UniformGrid grid(Box::cube(1, -1.0, 1.0), 4096);
  // Alternating signs: oscillation at every scale down to one cell.
  GridFunction H(grid);
  for (std::size_t i = 0; i < H.values.size(); ++i) H.values[i] = (i % 2) ? 1.0 : -1.0;
  try {
    correlation_norm_factor(H, small_model(), 1, 1.0);
    FAIL("expected domain error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
}

TEST_CASE("grid csv round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "skel_unit_grid";
  std::filesystem::create_directories(dir);
  const OmegaSpec omega{2, 1.0, kGamma};
  Rng rng = make_rng(4, Stream::probe);
  GridFunction g(UniformGrid(omega.box(), std::vector<std::size_t>{5, 7}));
  for (auto& v : g.values) v = uniform(rng, -1e3, 1e3) / 7.0;
  write_grid_csv(g, dir / "g.csv");
  std::ifstream in(dir / "g.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "i1,i2,value");
  const auto back = read_grid_csv(dir / "g.csv", omega.box());
  CHECK(back.values == g.values);
  CHECK(back.grid.resolution() == g.grid.resolution());
  std::filesystem::remove_all(dir);
}

}
