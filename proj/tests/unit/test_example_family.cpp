#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "skel/error.hpp"
#include "skel/example_family.hpp"
#include "skel/rng.hpp"

using namespace skel;

TEST_SUITE("example_family") {

TEST_CASE("parameter generator, A = 2") {
  const auto p = build_example(2.0, 1.0, 1.0, 2);
  CHECK(p.a[0] == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(p.b1 == doctest::Approx(20.0).epsilon(1e-15));
  CHECK(p.alpha0 == doctest::Approx(12.5).epsilon(1e-15));
  CHECK(p.a[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(check_relations(p, 2.0, 1.0).pass());
}

TEST_CASE("parameter generator, A = 101") {
  const auto p = build_example(101.0, 1.0, 1.0, 2);
  CHECK(p.a[0] == doctest::Approx(20402.0).epsilon(1e-15));
  CHECK(p.b1 == doctest::Approx(40808.0).epsilon(1e-15));
  CHECK(std::abs(p.alpha0 - 20406.0001960592) < 1e-9);
  CHECK(std::abs(p.a[1] - 1.960592e-4) < 1e-10);
}

TEST_CASE("supplied tail violating the cross bound") {
  try {
    build_example(2.0, 1.0, 1.0, 2, 0.0, std::vector<double>{10.0});
    FAIL("expected construction error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::construction);
  }
}

TEST_CASE("relation checks") {
  auto p = build_example(2.0, 1.0, 1.0, 2);
  auto q = p;
  q.alpha0 += 1.0;
  const auto r = check_relations(q, 2.0, 1.0);
  CHECK_FALSE(r.pass());
  REQUIRE(r.entries.size() >= 1);
  CHECK(r.entries[0].name.find("rel0") != std::string::npos);
  CHECK(std::abs(std::abs(r.entries[0].residual) - 4.0 * p.a[0]) < 1e-9);

  auto s = p;
  s.b1 = 2.0 * s.a[0] * s.L - 1.0;
  CHECK_FALSE(check_relations(s, 2.0, 1.0).pass());
}

TEST_CASE("psi completed-square identity") {
  const auto p = build_example(2.0, 1.0, 1.0, 2);
  Rng rng = make_rng(1, Stream::example);
  for (int t = 0; t < 1000; ++t) {
    const double x[] = {uniform(rng, -1, 1), uniform(rng, -1, 1)};
    const double expanded = p.alpha0 + p.b1 * x[0] + p.a[0] * x[0] * x[0] + p.a[1] * x[1] * x[1];
    const double square =
        std::pow(2 * p.a[0] * x[0] + p.b1, 2) / (4 * p.a[0]) + p.a[1] * x[1] * x[1];
    CHECK(std::abs(eval_psi(p, x) - square) <= 1e-12);
    CHECK(std::abs(eval_psi(p, x) - expanded) <= 1e-12 * std::max(1.0, expanded));
  }
}

TEST_CASE("boundary equality at (-1, 1)") {
  const auto p = build_example(2.0, 1.0, 1.0, 2);
  const double x[] = {-1.0, 1.0};
  CHECK(eval_psi(p, x) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(eval_phi0(p, x) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(grad_phi0(p, x)[0] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("gradient matches finite differences") {
  for (double A : {2.0, 101.0}) {
    const auto p = build_example(A, 1.0, 1.0, 2);
    Rng rng = make_rng(2, Stream::example);
    for (int t = 0; t < 200; ++t) {
      Point x{uniform(rng, -0.99, 0.99), uniform(rng, -0.99, 0.99)};
      const Point g = grad_phi0(p, x);
      const double gmax = std::max(std::abs(g[0]), std::abs(g[1]));
      for (int i = 0; i < 2; ++i) {
        const double h = 1e-6;
        Point xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (eval_phi0(p, xp) - eval_phi0(p, xm)) / (2 * h);
        CHECK(std::abs(fd - g[i]) <= 1e-5 * gmax);
      }
    }
  }
}

TEST_CASE("wrap") {
  const auto a = wrap_value(0.0, 0.5, 1.0);
  CHECK(a.value == 0.5);
  CHECK(a.piece == 0);
  const auto b = wrap_value(0.0, 2.5, 1.0);
  CHECK(b.value == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(b.piece == 1);
  const auto c = wrap_value(0.0, 1.0, 1.0);
  CHECK(c.value == -1.0);
  CHECK(c.piece == 1);
}

TEST_CASE("piece indices for A = 101 stay bounded") {
  const auto p = build_example(101.0, 1.0, 1.0, 2);
  const auto range = psi_range(p);
  const long bound = static_cast<long>(std::ceil((p.ell + std::sqrt(range.max) + p.L) / (2 * p.L)));
  Rng rng = make_rng(3, Stream::example);
  long lo = 1 << 30, hi = -1;
  for (int t = 0; t < 100000; ++t) {
    const double x[] = {uniform(rng, -1, 1), uniform(rng, -1, 1)};
    const auto w = wrap_phi(p, x);
    lo = std::min(lo, w.piece);
    hi = std::max(hi, w.piece);
    CHECK_UNARY(w.value >= -1.0 && w.value < 1.0);
  }
  CHECK(lo >= 0);
  CHECK(hi <= bound);
}

TEST_CASE("psi range: corners against dense sampling") {
  for (double A : {2.0, 101.0}) {
    const auto p = build_example(A, 1.0, 1.0, 2);
    const auto r = psi_range(p);
    double lo = 1e300, hi = -1e300;
    const int n = 1000;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        const double x[] = {-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n};
        const double v = eval_psi(p, x);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    CHECK(std::abs(r.min - lo) <= 1e-6 * std::max(1.0, lo));
    CHECK(std::abs(r.max - hi) <= 1e-6 * std::max(1.0, hi));
  }
}

TEST_CASE("pieces") {
  const auto p = build_example(101.0, 1.0, 1.0, 2);
  const auto pieces = piece_decomposition(p);
  REQUIRE(pieces.size() >= 2);
  CHECK(pieces[0].q == 0);
  // psi = 1/2 = (L - ell)^2 / 2 on the x1 axis: only O_0 holds it.
  const double a1 = p.a[0];
  const double x[] = {(std::sqrt(2.0 * a1) - p.b1) / (2.0 * a1), 0.0};
  REQUIRE(eval_psi(p, x) == doctest::Approx(0.5));
  int members = 0;
  for (const auto& d : pieces)
    if (!d.empty && in_example_piece(p, d, x)) {
      ++members;
      CHECK(d.q == 0);
    }
  CHECK(members == 1);
  CHECK(crossing_number(p) == 3);
  CHECK(crossing_number(build_example(2.0, 1.0, 1.0, 3)) == 4);
}

TEST_CASE("derivative audit") {
  const auto p = build_example(2.0, 1.0, 1.0, 2);
  const auto a = derivative_bounds_audit(p, 2.0, 1.0, 10000, 4);
  CHECK(a.pass);
  CHECK(a.min_d1 >= 2.0 - 1e-9);
  CHECK(a.argmin_d1[0] <= -0.99);
  CHECK(a.max_product <= 1.0 + 1e-9);
  CHECK(a.closed_form_product == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a.max_gradient_error <= 1e-5);

  const auto full = build_example(101.0, 1.0, 1.0, 2);
  CHECK(derivative_bounds_audit(full, 101.0, 1.0, 10000, 4).pass);

  const auto flat = build_example(2.0, 1.0, 1.0, 2, 0.0, std::vector<double>{0.0});
  const auto f = derivative_bounds_audit(flat, 2.0, 1.0, 2000, 4);
  CHECK(f.max_product == 0.0);
  CHECK(f.product_pass);
}

TEST_CASE("presets") {
  const auto names = preset_names();
  CHECK(std::find(names.begin(), names.end(), "example-k2-small") != names.end());
  CHECK(std::find(names.begin(), names.end(), "example-k2-full") != names.end());
  const auto full = find_preset("example-k2-full");
  REQUIRE(full.has_value());
  CHECK(full->model.A == 101.0);
  CHECK(full->model.sigma == 100.0);
  CHECK(audit(full->model).pass());
  CHECK_FALSE(find_preset("nope").has_value());
}

}
