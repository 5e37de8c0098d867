#include "skel/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "skel/csv.hpp"
#include "skel/error.hpp"
#include "skel/rng.hpp"

namespace skel {

namespace {

constexpr double kBoxTol = 1e-12;
constexpr double kClosureTol = 1e-9;
constexpr std::size_t kMaxWitnesses = 8;

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

void random_in_box(const Box& box, Rng& rng, std::span<double> out) {
  for (std::size_t i = 0; i < box.dim(); ++i) out[i] = uniform(rng, box.lo[i], box.hi[i]);
}

/// Uniform point in the ball of given radius centred at the origin.
void random_in_ball(Rng& rng, double radius, std::span<double> out) {
  double n2 = 0.0;
  for (std::size_t i = 0; i < out.size(); i += 2) {
    const double u1 = uniform(rng, 0.0, 1.0);
    const double u2 = uniform(rng, 0.0, 1.0);
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    out[i] = r * std::cos(2.0 * std::numbers::pi * u2);
    if (i + 1 < out.size()) out[i + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
  }
  for (double v : out) n2 += v * v;
  const double n = std::sqrt(n2);
  const double scale =
      radius * std::pow(uniform(rng, 0.0, 1.0), 1.0 / static_cast<double>(out.size())) / n;
  for (double& v : out) v *= scale;
}

/// Rejection-samples up to n points per piece from the state box.
std::vector<std::vector<Point>> sample_pieces(const PiecewiseSystem& sys, std::size_t n,
                                              Rng& rng) {
  const std::size_t d = sys.branch_count();
  std::vector<std::vector<Point>> buckets(d);
  const std::size_t budget = std::max<std::size_t>(1000, 50 * n * d);
  std::size_t full = 0;
  Point x(static_cast<std::size_t>(sys.dim()));
  for (std::size_t draw = 0; draw < budget && full < d; ++draw) {
    random_in_box(sys.state_box(), rng, x);
    const PieceLocation loc = sys.locate_piece(x);
    if (loc.boundary) continue;
    auto& b = buckets[loc.index];
    if (b.size() < n) {
      b.push_back(x);
      if (b.size() == n) ++full;
    }
  }
  return buckets;
}

/// Up to n rejection samples from O_j within a fixed draw budget.
std::vector<Point> sample_piece(const PiecewiseSystem& sys, std::size_t j, std::size_t n,
                                Rng& rng) {
  std::vector<Point> pts;
  const std::size_t budget = std::max<std::size_t>(1000, 50 * n);
  Point x(static_cast<std::size_t>(sys.dim()));
  for (std::size_t t = 0; t < budget && pts.size() < n; ++t) {
    random_in_box(sys.state_box(), rng, x);
    if (sys.in_piece(j, x)) pts.push_back(x);
  }
  return pts;
}

/// Partner of x in O_j that differs only in the first coordinate; the search
/// window shrinks around x_1 so that thin pieces still yield partners.
std::optional<Point> first_axis_partner(const PiecewiseSystem& sys, std::size_t j,
                                        const Point& x, Rng& rng) {
  const double L = sys.params().L;
  double half = L;
  Point y = x;
  for (int t = 0; t < 200; ++t) {
    if (t > 0 && t % 10 == 0) half *= 0.5;
    y[0] = std::clamp(x[0] + uniform(rng, -half, half), -L, L);
    if (y[0] != x[0] && sys.in_piece(j, y)) return y;
  }
  return std::nullopt;
}

}  // namespace

PiecewiseSystem::PiecewiseSystem(ModelParams params, std::vector<Branch> branches, PieceHint hint)
    : params_(params), branches_(std::move(branches)), hint_(std::move(hint)) {
  if (params_.k < 1) throw Error(ErrorKind::domain, "recurrence order must be positive");
  if (!(params_.L > 0.0)) throw Error(ErrorKind::domain, "L must be positive");
  if (!(params_.A > 0.0)) throw Error(ErrorKind::domain, "A must be positive");
  if (branches_.empty()) throw Error(ErrorKind::domain, "a piecewise system needs a branch");
  for (const auto& b : branches_)
    if (!b.phi || !b.grad_phi) throw Error(ErrorKind::domain, "branch without map or gradient");
  gamma_ = params_.gamma();
  const auto k = static_cast<std::size_t>(params_.k);
  gamma_pow_.resize(k + 1);
  gamma_pow_[0] = 1.0;
  for (std::size_t i = 1; i <= k; ++i) gamma_pow_[i] = gamma_pow_[i - 1] * gamma_;
  std::vector<double> half(k);
  for (std::size_t i = 0; i < k; ++i) half[i] = gamma_pow_[i] * params_.L;
  omega_ = Box::symmetric(half);
  state_box_ = Box::cube(k, -params_.L, params_.L);
}

bool PiecewiseSystem::in_piece(std::size_t j, std::span<const double> x) const {
  const double L = params_.L;
  for (double xi : x)
    if (!(xi > -L && xi < L)) return false;
  for (const auto& c : branches_[j].constraints)
    if (!(c.value(x) < 0.0)) return false;
  return true;
}

bool PiecewiseSystem::in_enlarged_piece(std::size_t j, std::span<const double> x,
                                        double margin) const {
  const double L = params_.L;
  for (double xi : x)
    if (!(std::fabs(xi) <= L + margin)) return false;
  std::vector<double> g(x.size());
  for (const auto& c : branches_[j].constraints) {
    const double v = c.value(x);
    if (v < 0.0) continue;
    c.gradient(x, g);
    if (!(v <= margin * norm(g))) return false;
  }
  return true;
}

PieceLocation PiecewiseSystem::locate_piece(std::span<const double> x) const {
  if (!state_box_.contains(x, kBoxTol))
    throw Error(ErrorKind::domain, "point outside [-L, L]^k");
  if (hint_) {
    if (auto j = hint_(x); j && *j < branches_.size() && in_piece(*j, x)) return {*j, false};
  }
  for (std::size_t j = 0; j < branches_.size(); ++j)
    if (in_piece(j, x)) return {j, false};

  const double margin = kClosureTol * params_.L;
  for (std::size_t j = 0; j < branches_.size(); ++j)
    if (in_enlarged_piece(j, x, margin)) return {j, true};

  // Not within tolerance of any closure: nearest piece by worst constraint value.
  std::size_t best = 0;
  double best_violation = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < branches_.size(); ++j) {
    double worst = 0.0;
    for (const auto& c : branches_[j].constraints) worst = std::max(worst, c.value(x));
    if (worst < best_violation) {
      best_violation = worst;
      best = j;
    }
  }
  return {best, true};
}

void PiecewiseSystem::lift(std::span<const double> x, std::span<double> z) const {
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = gamma_pow_[i] * x[i];
}

void PiecewiseSystem::unlift(std::span<const double> z, std::span<double> x) const {
  for (std::size_t i = 0; i < z.size(); ++i) x[i] = z[i] / gamma_pow_[i];
}

void PiecewiseSystem::apply_branch(std::size_t j, std::span<const double> z,
                                   std::span<double> out) const {
  const std::size_t k = z.size();
  double xs[16];
  std::vector<double> heap;
  std::span<double> x;
  if (k <= 16) {
    x = std::span<double>(xs, k);
  } else {
    heap.resize(k);
    x = heap;
  }
  unlift(z, x);
  const double v = branches_[j].phi(x);
  for (std::size_t i = 0; i + 1 < k; ++i) out[i] = z[i + 1] / gamma_;
  out[k - 1] = gamma_pow_[k - 1] * v;
}

PieceLocation PiecewiseSystem::apply_T(std::span<const double> z, std::span<double> out) const {
  const std::size_t k = static_cast<std::size_t>(params_.k);
  if (z.size() != k || out.size() != k)
    throw Error(ErrorKind::domain, "apply_T expects points of dimension k");
  if (!omega_.contains(z, kBoxTol)) throw Error(ErrorKind::domain, "point outside Omega");
  double xs[16];
  std::vector<double> heap;
  std::span<double> x;
  if (k <= 16) {
    x = std::span<double>(xs, k);
  } else {
    heap.resize(k);
    x = heap;
  }
  unlift(z, x);
  const double L = params_.L;
  for (double& xi : x) xi = std::clamp(xi, -L, L);
  const PieceLocation loc = locate_piece(x);
  const double v = branches_[loc.index].phi(x);
  if (!(std::fabs(v) <= L * (1.0 + kBoxTol)))
    throw ModelConsistencyError("phi value " + format_number(v) + " leaves [-L, L] (piece " +
                                    std::to_string(loc.index) + ")",
                                0);
  for (std::size_t i = 0; i + 1 < k; ++i) out[i] = z[i + 1] / gamma_;
  out[k - 1] = gamma_pow_[k - 1] * v;
  return loc;
}

Point PiecewiseSystem::apply_T(std::span<const double> z) const {
  Point out(z.size());
  apply_T(z, out);
  return out;
}

BoxMap PiecewiseSystem::as_box_map(std::string name) const {
  auto self = std::make_shared<const PiecewiseSystem>(*this);
  return BoxMap{std::move(name), omega_,
                [self](std::span<const double> z, std::span<double> out) { self->apply_T(z, out); }};
}

Point lift_X_to_Z(std::span<const double> x, double gamma, double L) {
  Point z(x.size());
  double g = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(std::fabs(x[i]) <= L))
      throw Error(ErrorKind::domain, "initial value " + format_number(x[i]) + " outside [-L, L]");
    z[i] = g * x[i];
    g *= gamma;
  }
  return z;
}

Trajectory simulate_X(const PiecewiseSystem& sys, std::span<const double> init, std::size_t n,
                      bool record) {
  const auto k = static_cast<std::size_t>(sys.dim());
  const double L = sys.params().L;
  if (init.size() != k) throw Error(ErrorKind::domain, "simulate_X needs k initial values");
  for (double v : init)
    if (!(std::fabs(v) <= L)) throw Error(ErrorKind::domain, "initial value outside [-L, L]");

  Trajectory t;
  std::vector<double> window(init.begin(), init.end());
  if (record) {
    t.values.reserve(n + k);
    t.values.assign(init.begin(), init.end());
  }
  for (std::size_t m = 0; m < n; ++m) {
    const PieceLocation loc = sys.locate_piece(window);
    if (loc.boundary && !t.boundary_hit) {
      t.boundary_hit = true;
      t.first_boundary_step = m;
    }
    const double next = sys.phi(loc.index, window);
    if (!(std::fabs(next) <= L * (1.0 + kBoxTol)))
      throw ModelConsistencyError("X_" + std::to_string(m + k) + " = " + format_number(next) +
                                      " leaves [-L, L]",
                                  m + k);
    std::rotate(window.begin(), window.begin() + 1, window.end());
    window.back() = next;
    if (record) t.values.push_back(next);
  }
  if (!record) t.values = window;
  return t;
}

Eigen::MatrixXd b_matrix_from_gradient(std::span<const double> grad, double gamma) {
  const auto k = static_cast<int>(grad.size());
  Eigen::MatrixXd B(k, k);
  // 1-based exponents as in the coefficient formulas.
  for (int i = 1; i <= k; ++i) {
    for (int l = 1; l <= k; ++l) {
      const double gi = grad[static_cast<std::size_t>(i - 1)];
      const double gl = grad[static_cast<std::size_t>(l - 1)];
      double b;
      if (i != l) b = std::pow(gamma, 2 * k - i - l) * gi * gl;
      else if (i == 1) b = std::pow(gamma, 2 * k - 2) * gi * gi;
      else b = 1.0 / (gamma * gamma) + std::pow(gamma, 2 * (k - i)) * gi * gi;
      B(i - 1, l - 1) = b;
    }
  }
  return B;
}

Eigen::MatrixXd b_matrix(const PiecewiseSystem& sys, std::size_t j, std::span<const double> x) {
  std::vector<double> g(x.size());
  sys.grad_phi(j, x, g);
  return b_matrix_from_gradient(g, sys.gamma());
}

double gershgorin_lower_bound(const Eigen::MatrixXd& B) {
  if (B.rows() != B.cols() || B.rows() == 0)
    throw Error(ErrorKind::domain, "Gershgorin bound needs a non-empty square matrix");
  double lb = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < B.rows(); ++i) {
    double off = 0.0;
    for (Eigen::Index l = 0; l < B.cols(); ++l)
      if (l != i) off += std::fabs(B(i, l));
    lb = std::min(lb, B(i, i) - off);
  }
  return lb;
}

ExpansionAudit expansion_audit(const PiecewiseSystem& sys, double sigma, std::size_t n_points,
                               std::size_t n_pairs, std::uint64_t seed) {
  const auto& p = sys.params();
  const auto k = static_cast<std::size_t>(p.k);
  ExpansionAudit a;
  a.sigma = sigma;
  a.analytic_floor = gershgorin_floor(p.A, p.M, p.k);
  a.min_gershgorin = std::numeric_limits<double>::infinity();
  a.min_stretch = std::numeric_limits<double>::infinity();

  Rng rng = make_rng(seed, Stream::audit);
  const auto buckets = sample_pieces(sys, n_points, rng);
  const double radius = std::min(p.eps0, 0.5 * p.eps1);

  std::vector<double> grad(k), u(k), v(k), vx(k), tu(k), tv(k), step(k);
  for (std::size_t j = 0; j < sys.branch_count(); ++j) {
    BranchExpansion be;
    be.branch = j;
    be.min_gershgorin = std::numeric_limits<double>::infinity();
    be.min_stretch = std::numeric_limits<double>::infinity();
    const auto& pts = buckets[j];
    be.points = pts.size();
    if (pts.empty()) {
      a.warnings.push_back("piece " + std::to_string(j) + " received no samples");
      a.branches.push_back(be);
      continue;
    }
    if (pts.size() < n_points)
      a.warnings.push_back("piece " + std::to_string(j) + " sampled " +
                           std::to_string(pts.size()) + " of " + std::to_string(n_points) +
                           " points");
    for (const auto& x : pts) {
      sys.grad_phi(j, x, grad);
      const double lb = gershgorin_lower_bound(b_matrix_from_gradient(grad, sys.gamma()));
      be.min_gershgorin = std::min(be.min_gershgorin, lb);
      if (lb < a.min_gershgorin) {
        a.min_gershgorin = lb;
        a.argmin_gershgorin = x;
      }
    }

    Rng pair_rng = make_rng(seed, Stream::audit, j + 1);
    for (std::size_t i = 0; i < n_pairs; ++i) {
      const Point& x = pts[i % pts.size()];
      sys.lift(x, u);
      bool found = false;
      for (int attempt = 0; attempt < 20 && !found; ++attempt) {
        random_in_ball(pair_rng, radius, step);
        for (std::size_t c = 0; c < k; ++c) v[c] = u[c] + step[c];
        if (!sys.omega().contains(v)) continue;
        sys.unlift(v, vx);
        found = sys.in_piece(j, vx) && distance(u, v) > 0.0;
      }
      if (!found) continue;
      sys.apply_branch(j, u, tu);
      sys.apply_branch(j, v, tv);
      const double du = distance(u, v);
      const double ratio = std::pow(distance(tu, tv) / du, 2);
      be.min_stretch = std::min(be.min_stretch, ratio);
      ++be.pairs;
    }
    if (be.pairs == 0)
      a.warnings.push_back("piece " + std::to_string(j) + " produced no close pairs");
    a.min_stretch = std::min(a.min_stretch, be.min_stretch);
    a.sample_count += be.points;
    a.pair_count += be.pairs;
    a.branches.push_back(be);
  }
  a.gershgorin_pass = a.sample_count > 0 && a.min_gershgorin >= sigma;
  a.stretch_pass = a.pair_count > 0 && a.min_stretch >= sigma;
  a.pass = a.gershgorin_pass && a.stretch_pass;
  return a;
}

InjectivityReport injectivity_probe(const PiecewiseSystem& sys, std::size_t j, std::size_t n_pairs,
                                    std::uint64_t seed) {
  const auto k = static_cast<std::size_t>(sys.dim());
  const double inv_s = std::sqrt(sys.params().sigma);
  InjectivityReport r;
  r.branch = j;
  r.min_ratio = std::numeric_limits<double>::infinity();
  Rng rng = make_rng(seed, Stream::probe, 2 * j);
  std::vector<double> u(k), v(k), tu(k), tv(k);
  const auto pts = sample_piece(sys, j, n_pairs, rng);
  for (const auto& x : pts) {
    const auto y = first_axis_partner(sys, j, x, rng);
    if (!y) continue;
    sys.lift(x, u);
    sys.lift(*y, v);
    sys.apply_branch(j, u, tu);
    sys.apply_branch(j, v, tv);
    const double sep = distance(tu, tv);
    const double du = std::fabs(u[0] - v[0]);
    const double required = inv_s * du - 1e-9;
    ++r.pairs;
    r.min_ratio = std::min(r.min_ratio, sep / du);
    if (!(sep > 0.0) || sep < required) {
      ++r.violations;
      if (r.witnesses.size() < kMaxWitnesses) r.witnesses.push_back({x, *y, sep, required});
    }
  }
  return r;
}

GeometryReport geometry_probe(const PiecewiseSystem& sys, std::size_t j, std::size_t n_pairs,
                              std::uint64_t seed) {
  constexpr int kSegmentPoints = 64;
  GeometryReport r;
  r.branch = j;
  Rng rng = make_rng(seed, Stream::probe, 2 * j + 1);
  const double margin = sys.params().eps1;
  const auto pts = sample_piece(sys, j, n_pairs, rng);
  for (const auto& x : pts) {
    const auto y = first_axis_partner(sys, j, x, rng);
    if (!y) continue;
    ++r.pairs;
    Point w = x;
    bool ok = true;
    double exit_t = 0.0;
    for (int s = 1; s < kSegmentPoints && ok; ++s) {
      const double t = static_cast<double>(s) / kSegmentPoints;
      w[0] = (1.0 - t) * x[0] + t * (*y)[0];
      if (!sys.in_enlarged_piece(j, w, margin)) {
        ok = false;
        exit_t = t;
      }
    }
    if (ok) ++r.passing;
    else if (r.witnesses.size() < kMaxWitnesses) r.witnesses.push_back({x, *y, exit_t, margin});
  }
  return r;
}

namespace {
nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}
}  // namespace

nlohmann::json to_json(const ExpansionAudit& a) {
  nlohmann::json branches = nlohmann::json::array();
  for (const auto& b : a.branches)
    branches.push_back({{"branch", b.branch},
                        {"points", b.points},
                        {"pairs", b.pairs},
                        {"min_gershgorin", finite_or_null(b.min_gershgorin)},
                        {"min_stretch", finite_or_null(b.min_stretch)}});
  return {{"sigma", a.sigma},
          {"analytic_floor", a.analytic_floor},
          {"samples", a.sample_count},
          {"pairs", a.pair_count},
          {"min_gershgorin", finite_or_null(a.min_gershgorin)},
          {"argmin_gershgorin", a.argmin_gershgorin},
          {"min_stretch", finite_or_null(a.min_stretch)},
          {"gershgorin_pass", a.gershgorin_pass},
          {"stretch_pass", a.stretch_pass},
          {"pass", a.pass},
          {"branches", branches},
          {"warnings", a.warnings}};
}

nlohmann::json to_json(const InjectivityReport& r) {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& x : r.witnesses)
    w.push_back({{"u", x.u}, {"v", x.v}, {"separation", x.observed}, {"required", x.required}});
  return {{"branch", r.branch},       {"pairs", r.pairs},
          {"violations", r.violations}, {"min_ratio", finite_or_null(r.min_ratio)},
          {"pass", r.pass()},         {"witnesses", w}};
}

nlohmann::json to_json(const GeometryReport& r) {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& x : r.witnesses)
    w.push_back({{"u", x.u}, {"v", x.v}, {"exit_fraction", x.observed}});
  return {{"branch", r.branch},
          {"pairs", r.pairs},
          {"passing", r.passing},
          {"fraction", r.fraction()},
          {"witnesses", w}};
}

}  // namespace skel
