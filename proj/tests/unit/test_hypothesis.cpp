#include <doctest.h>

#include <cmath>
#include <numbers>

#include "skel/error.hpp"
#include "skel/hypothesis.hpp"
#include "skel/rng.hpp"

using namespace skel;

namespace {

ModelParams full_params() {
  ModelParams p;
  p.L = 1.0;
  p.k = 2;
  p.A = 101.0;
  p.sigma = 100.0;
  p.M = 1.0;
  p.alpha = 1.0;
  p.Y = 3;
  p.eps0 = 0.05;
  p.eps1 = 0.05;
  return p;
}

// Quadratic root exactly as printed, no rationalization.
double printed_M0(double A, double sigma, int k) {
  const double g = std::pow(A, -1.0 / k);
  const double a = (k - 2) * std::pow(g, 2 * k + 1);
  const double b = (k - 1) * std::pow(g, k - 1);
  const double c = 1.0 / (g * g) - sigma;
  if (a == 0.0) return c / b;
  return (-b + std::sqrt(b * b + 4 * a * c)) / (2 * a);
}

}  // namespace

TEST_SUITE("hypothesis") {

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi).epsilon(1e-15));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-15));
}

TEST_CASE("M0 frozen values") {
  CHECK(std::abs(compute_M0(2.0, 1.2, 3) - 0.293878821093113) < 1e-12);
  CHECK(std::abs(compute_M0(2.0, 1.2, 2) - 1.13137084989848) < 1e-12);
  CHECK(std::abs(compute_M0(2.0, 1.2, 2) - (2.0 - 1.2) * std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(compute_M0(101.0, 100.0, 2) - 10.0498756211209) < 1e-10);
  CHECK(std::abs(compute_M0(2.0, 1.2, 3) - printed_M0(2.0, 1.2, 3)) < 1e-9);
}

TEST_CASE("M0 needs A^(2/k) > sigma") {
  try {
    compute_M0(2.0, 2.0, 2);
    FAIL("expected admissibility error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::admissibility);
  }
}

TEST_CASE("M0 is the root of the Gershgorin chain") {
  Rng rng = make_rng(7, Stream::audit);
  for (int t = 0; t < 100; ++t) {
    const int k = 2 + static_cast<int>(rng() % 5);
    const double A = uniform(rng, 1.5, 50.0);
    const double cap = std::pow(A, 2.0 / k);
    const double sigma = uniform(rng, 1.0 + 1e-3, cap - 1e-3);
    const double m0 = compute_M0(A, sigma, k);
    CHECK(m0 > 0.0);
    CHECK(std::abs(gershgorin_floor(A, m0, k) - sigma) <= 1e-9 * std::max(1.0, sigma));
    CHECK(std::abs(m0 - printed_M0(A, sigma, k)) <= 1e-9 * std::max(1.0, m0));
  }
}

TEST_CASE("eta frozen values") {
  CHECK(std::abs(compute_eta(100.0, 1.0, 3, 2) - 0.948826363156775) < 1e-12);
  CHECK(std::abs(compute_eta(1.2, 1.0, 3, 2) - 80.9529784567736) < 1e-10);
  const double tiny = compute_eta(1e12, 1.0, 1, 2);
  CHECK(tiny > 3.5e-6);
  CHECK(tiny < 3.6e-6);
}

TEST_CASE("audit passes the full instance") {
  const auto r = audit(full_params());
  CHECK(r.pass());
  CHECK(r.entries.size() == 7);
  CHECK(r.failures().empty());
}

TEST_CASE("audit at sigma 1.2 fails on eta only") {
  auto p = full_params();
  p.sigma = 1.2;
  const auto r = audit(p);
  CHECK_FALSE(r.pass());
  REQUIRE(r.failures().size() == 1);
  CHECK(r.failures()[0] == "eta < 1");
}

TEST_CASE("audit with A = 1 fails on A > 1") {
  auto p = full_params();
  p.A = 1.0;
  const auto r = audit(p);
  REQUIRE(r.find("A > 1") != nullptr);
  CHECK_FALSE(r.find("A > 1")->pass);
}

TEST_CASE("eps0 = 0.1 exceeds gamma L at A = 101") {
  auto p = full_params();
  p.eps0 = 0.1;
  const auto r = audit(p);
  REQUIRE(r.failures().size() == 1);
  CHECK(r.failures()[0] == "eps0 < gamma^(k-1) L");
}

TEST_CASE("audit json lists every entry") {
  const auto j = to_json(audit(full_params()));
  CHECK(j.at("pass").get<bool>());
  CHECK(j.at("entries").size() == 7);
}

}
