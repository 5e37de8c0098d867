#include "skel/hypothesis.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "skel/csv.hpp"
#include "skel/error.hpp"

namespace skel {

double ModelParams::gamma() const { return std::pow(A, -1.0 / k); }
double ModelParams::s() const { return 1.0 / std::sqrt(sigma); }

double unit_ball_volume(int k) {
  if (k < 1) throw Error(ErrorKind::domain, "unit_ball_volume needs k >= 1, got " + std::to_string(k));
  const double half = 0.5 * k;
  return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

double compute_M0(double A, double sigma, int k) {
  if (k < 2) throw Error(ErrorKind::domain, "compute_M0 needs k >= 2");
  const double g = std::pow(A, -1.0 / k);
  const double c = 1.0 / (g * g) - sigma;
  if (!(c > 0.0))
    throw Error(ErrorKind::admissibility,
                "A^(2/k) = " + format_number(1.0 / (g * g)) + " does not exceed sigma = " +
                    format_number(sigma));
  const double a = (k - 2) * std::pow(g, 2 * k + 1);
  const double b = (k - 1) * std::pow(g, k - 1);
  // Rationalized root: no cancellation for small a, exact linear root at a = 0.
  return 2.0 * c / (b + std::sqrt(b * b + 4.0 * a * c));
}

double gershgorin_floor(double A, double M, int k) {
  const double g = std::pow(A, -1.0 / k);
  return 1.0 / (g * g) - M * (k - 1) * std::pow(g, k - 1) -
         M * M * (k - 2) * std::pow(g, 2 * k + 1);
}

double compute_eta(double sigma, double alpha, int Y, int k) {
  if (!(sigma > 1.0)) throw Error(ErrorKind::domain, "compute_eta needs sigma > 1");
  if (k < 2) throw Error(ErrorKind::domain, "compute_eta needs k >= 2");
  const double s = 1.0 / std::sqrt(sigma);
  return std::pow(s, alpha) +
         4.0 * s / (1.0 - s) * Y * unit_ball_volume(k - 1) / unit_ball_volume(k);
}

bool HypothesisReport::pass() const {
  for (const auto& e : entries)
    if (!e.pass) return false;
  return true;
}

const HypothesisEntry* HypothesisReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

std::vector<std::string> HypothesisReport::failures() const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (!e.pass) out.push_back(e.name);
  return out;
}

std::string HypothesisReport::table() const {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %22s %22s  %s\n", "condition", "value", "threshold",
                "result");
  os << line;
  for (const auto& e : entries) {
    std::snprintf(line, sizeof line, "%-24s %22.15g %22.15g  %s\n", e.name.c_str(), e.value,
                  e.threshold, e.pass ? "pass" : "FAIL");
    os << line;
  }
  os << "overall: " << (pass() ? "pass" : "FAIL") << '\n';
  return os.str();
}

HypothesisReport audit(const ModelParams& p) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  HypothesisReport r;
  auto add = [&](std::string name, double value, double threshold, bool pass) {
    r.entries.push_back({std::move(name), value, threshold, pass});
  };

  add("A > 1", p.A, 1.0, p.A > 1.0);
  add("sigma > 1", p.sigma, 1.0, p.sigma > 1.0);

  const double a_pow = (p.A > 0.0 && p.k > 0) ? std::pow(p.A, 2.0 / p.k) : nan;
  add("A^(2/k) > sigma", a_pow, p.sigma, a_pow > p.sigma);

  double m0 = nan;
  try {
    m0 = compute_M0(p.A, p.sigma, p.k);
  } catch (const Error&) {
  }
  add("0 < M < M0", p.M, m0, p.M > 0.0 && p.M < m0);

  const double s = p.sigma > 0.0 ? 1.0 / std::sqrt(p.sigma) : nan;
  add("s < 1", s, 1.0, s < 1.0);

  double eta = nan;
  try {
    eta = compute_eta(p.sigma, p.alpha, p.Y, p.k);
  } catch (const Error&) {
  }
  add("eta < 1", eta, 1.0, eta < 1.0);

  const double eps_cap = (p.A > 0.0 && p.k > 0) ? std::pow(p.gamma(), p.k - 1) * p.L : nan;
  add("eps0 < gamma^(k-1) L", p.eps0, eps_cap, p.eps0 > 0.0 && p.eps0 < eps_cap);
  return r;
}

nlohmann::json to_json(const ModelParams& p) {
  return {{"L", p.L},         {"k", p.k},         {"A", p.A},       {"sigma", p.sigma},
          {"M", p.M},         {"alpha", p.alpha}, {"Y", p.Y},       {"eps0", p.eps0},
          {"eps1", p.eps1},   {"gamma", p.gamma()}, {"s", p.s()}};
}

namespace {
nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}
}  // namespace

nlohmann::json to_json(const HypothesisReport& report) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.entries)
    entries.push_back({{"name", e.name},
                       {"value", number_or_null(e.value)},
                       {"threshold", number_or_null(e.threshold)},
                       {"pass", e.pass}});
  return {{"entries", entries}, {"pass", report.pass()}};
}

}  // namespace skel
