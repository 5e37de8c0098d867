#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "skel/error.hpp"
#include "skel/example_family.hpp"
#include "skel/piecewise.hpp"
#include "skel/rng.hpp"
#include "skel/toy_maps.hpp"

using namespace skel;

namespace {

PiecewiseSystem small_system() {
  const auto preset = find_preset("example-k2-small");
  REQUIRE(preset.has_value());
  const auto& m = preset->model;
  return make_example_system(build_example(m.A, m.M, m.L, m.k, preset->ell), m);
}

// A = 4, k = 2 gives gamma = 1/2, so lifting and unlifting are exact in binary.
PiecewiseSystem dyadic_system() {
  ModelParams m;
  m.A = 4.0;
  m.sigma = 3.0;
  m.M = 1.0;
  m.eps0 = 0.1;
  m.eps1 = 0.05;
  return make_example_system(build_example(4.0, 1.0, 1.0, 2), m);
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::internal;
}

}  // namespace

TEST_SUITE("piecewise") {

TEST_CASE("locate_piece") {
  const auto sys = small_system();
  const double inner[] = {-0.99, 0.0};
  const auto loc = sys.locate_piece(inner);
  CHECK(loc.index == 0);
  CHECK_FALSE(loc.boundary);

  const double edge[] = {1.0, 0.3};
  CHECK(sys.locate_piece(edge).boundary);

  const double outside[] = {2.0, 0.0};
  CHECK(kind_of([&] { sys.locate_piece(outside); }) == ErrorKind::domain);
}

TEST_CASE("apply_T instantiates the conjugated formula") {
  const auto sys = small_system();
  const double g = sys.gamma();
  CHECK(g == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

  const auto ex = build_example(2.0, 1.0, 1.0, 2);
  Rng rng = make_rng(3, Stream::probe);
  for (int t = 0; t < 200; ++t) {
    const double z[] = {uniform(rng, -0.999, 0.999), uniform(rng, -0.999 * g, 0.999 * g)};
    const Point out = sys.apply_T(z);
    CHECK(out[0] == z[1] / g);
    const double x[] = {z[0], z[1] / g};
    CHECK(std::abs(out[1] - g * wrap_phi(ex, x).value) < 1e-12);
  }
}

TEST_CASE("apply_T at the origin against two-stage evaluation") {
  const auto sys = small_system();
  const double g = sys.gamma();
  const double z[] = {0.0, 0.0};
  const Point out = sys.apply_T(z);
  // psi(0) = alpha0 = 12.5, phi0 = sqrt(12.5), one wrap by 2 pieces of width 2.
  const double phi0 = std::sqrt(12.5);
  const double wrapped = phi0 - 4.0;
  CHECK(out[0] == 0.0);
  CHECK(std::abs(out[1] - g * wrapped) < 1e-12);
}

TEST_CASE("fixed point of the conjugated system") {
  ModelParams m;
  m.A = 2.0;
  m.sigma = 1.2;
  Branch b;
  b.phi = [](std::span<const double> x) { return 0.5 * (x[0] + x[1]); };
  b.grad_phi = [](std::span<const double>, std::span<double> out) {
    out[0] = 0.5;
    out[1] = 0.5;
  };
  const PiecewiseSystem sys(m, {b});
  const double c = 0.3;
  const double z[] = {c, sys.gamma() * c};
  const Point out = sys.apply_T(z);
  CHECK(std::abs(out[0] - z[0]) < 1e-12);
  CHECK(std::abs(out[1] - z[1]) < 1e-12);
}

TEST_CASE("lift") {
  const double g = 1.0 / std::sqrt(2.0);
  const double zero[] = {0.0, 0.0};
  CHECK(lift_X_to_Z(zero, g, 1.0) == Point{0.0, 0.0});
  const double ones[] = {1.0, 1.0};
  const Point z = lift_X_to_Z(ones, g, 1.0);
  CHECK(z[0] == 1.0);
  CHECK(z[1] == doctest::Approx(0.70711).epsilon(1e-5));

  const auto sys = small_system();
  Rng rng = make_rng(5, Stream::probe);
  for (int t = 0; t < 100; ++t) {
    const double x[] = {uniform(rng, -1, 1), uniform(rng, -1, 1)};
    double zz[2], back[2];
    sys.lift(x, zz);
    sys.unlift(zz, back);
    CHECK(std::abs(back[0] - x[0]) <= 1e-15);
    CHECK(std::abs(back[1] - x[1]) <= 1e-15);
  }
  const double bad[] = {0.0, 1.5};
  CHECK(kind_of([&] { lift_X_to_Z(bad, g, 1.0); }) == ErrorKind::domain);
}

TEST_CASE("simulate_X basics") {
  const auto sys = small_system();
  const double init[] = {0.25, -0.5};
  const auto t0 = simulate_X(sys, init, 0);
  CHECK(t0.values == std::vector<double>{0.25, -0.5});

  const auto zs = zero_system(2);
  const auto t = simulate_X(zs, init, 5);
  REQUIRE(t.values.size() == 7);
  CHECK(t.values[0] == 0.25);
  CHECK(t.values[1] == -0.5);
  for (std::size_t i = 2; i < 7; ++i) CHECK(t.values[i] == 0.0);
}

TEST_CASE("conjugacy, dual path with exact gamma") {
  const auto sys = dyadic_system();
  const double g = sys.gamma();
  CHECK(g == 0.5);
  Rng rng = make_rng(11, Stream::simulation);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const double init[] = {uniform(rng, -1, 1), uniform(rng, -1, 1)};
    const auto tr = simulate_X(sys, init, 1000);
    if (tr.boundary_hit) continue;
    Point z = lift_X_to_Z(init, g, 1.0);
    double err = 0.0;
    for (std::size_t n = 0; n < 1000; ++n) {
      err = std::max(err, std::abs(z[0] - tr.values[n]));
      err = std::max(err, std::abs(z[1] - g * tr.values[n + 1]));
      z = sys.apply_T(z);
    }
    CHECK(err <= 1e-9);
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("conjugacy, one-step agreement at irrational gamma") {
  const auto sys = small_system();
  const double g = sys.gamma();
  const double init[] = {0.1, -0.7};
  const auto tr = simulate_X(sys, init, 1000);
  double err = 0.0;
  for (std::size_t n = 0; n < 1000; ++n) {
    const double x[] = {tr.values[n], tr.values[n + 1]};
    const Point z = sys.apply_T(lift_X_to_Z(x, g, 1.0));
    err = std::max(err, std::abs(z[0] - tr.values[n + 1]));
    err = std::max(err, std::abs(z[1] - g * tr.values[n + 2]));
  }
  CHECK(err <= 1e-9);
}

TEST_CASE("B matrix") {
  const double g = 1.0 / std::sqrt(2.0);
  const double grad[] = {2.0, 0.5};
  const auto B = b_matrix_from_gradient(grad, g);
  CHECK(B(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(B(1, 1) == doctest::Approx(2.25).epsilon(1e-14));
  CHECK(B(0, 1) == doctest::Approx(0.70710678118654757).epsilon(1e-14));
  CHECK(B(0, 1) == B(1, 0));
  CHECK(std::abs(gershgorin_lower_bound(B) - 1.2928932188134525) < 1e-12);

  const double g3 = 0.6;
  const double axis[] = {3.0, 0.0, 0.0};
  const auto D = b_matrix_from_gradient(axis, g3);
  CHECK(D(0, 0) == doctest::Approx(std::pow(g3, 4) * 9.0));
  CHECK(D(1, 1) == doctest::Approx(1.0 / (g3 * g3)));
  CHECK(D(2, 2) == doctest::Approx(1.0 / (g3 * g3)));
  CHECK(D(0, 1) == 0.0);
  CHECK(D(1, 2) == 0.0);
  CHECK(D == D.transpose());

  CHECK(gershgorin_lower_bound(Eigen::MatrixXd::Identity(3, 3)) == 1.0);
}

TEST_CASE("Gershgorin bound never exceeds the smallest eigenvalue") {
  Rng rng = make_rng(13, Stream::audit);
  for (int t = 0; t < 100; ++t) {
    Eigen::MatrixXd M(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) M(i, j) = M(j, i) = uniform(rng, -2.0, 2.0);
    const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().minCoeff();
    CHECK(gershgorin_lower_bound(M) <= lo + 1e-12);
  }
}

TEST_CASE("expansion audit") {
  const auto small = small_system();
  const auto a = expansion_audit(small, 1.2, 2000, 2000, 1);
  CHECK(a.pass);
  CHECK(a.min_gershgorin >= 1.29289 - 1e-6);
  CHECK(a.min_stretch >= 1.2);

  const auto lin = linear_system(4.0, 2, 3.0);
  const auto b = expansion_audit(lin, 3.0, 500, 500, 1);
  CHECK(b.pass);
  CHECK(std::abs(b.min_gershgorin - 4.0) < 1e-12);

  const auto con = contraction_system(4.0, 2, 3.0);
  CHECK_FALSE(expansion_audit(con, 3.0, 500, 500, 1).pass);
}

TEST_CASE("injectivity probe") {
  const auto sys = small_system();
  for (std::size_t j = 0; j < sys.branch_count(); ++j) {
    const auto r = injectivity_probe(sys, j, 2000, 2);
    CHECK(r.violations == 0);
    CHECK(r.pairs > 0);
  }
  const auto sq = square_system();
  const auto r = injectivity_probe(sq, 0, 2000, 2);
  CHECK(r.violations > 0);
  CHECK_FALSE(r.witnesses.empty());
  for (const auto& w : r.witnesses) CHECK(w.u != w.v);
}

TEST_CASE("geometry probe") {
  const auto sys = small_system();
  for (std::size_t j = 0; j < sys.branch_count(); ++j) {
    const auto r = geometry_probe(sys, j, 1000, 3);
    CHECK(r.pairs > 0);
    CHECK(r.fraction() == 1.0);
  }
  CHECK(geometry_probe(linear_system(2.0, 2, 1.2), 0, 500, 3).fraction() == 1.0);
  const auto cr = geometry_probe(crescent_system(), 0, 2000, 3);
  CHECK(cr.pairs > 0);
  CHECK(cr.fraction() < 1.0);
  CHECK_FALSE(cr.witnesses.empty());
}

}
