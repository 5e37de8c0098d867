#include "skel/example_family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "skel/csv.hpp"
#include "skel/error.hpp"
#include "skel/rng.hpp"

namespace skel {

namespace {

constexpr double kRelTol = 1e-9;
constexpr double kFdStep = 1e-6;

bool leq_rel(double lhs, double rhs) { return lhs <= rhs + kRelTol * std::max(1.0, std::fabs(rhs)); }

void check_point(const ExampleParams& p, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(p.k))
    throw Error(ErrorKind::domain, "point dimension does not match k");
}

}  // namespace

bool RelationReport::pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
}

std::string RelationReport::describe_failures() const {
  std::ostringstream os;
  for (const auto& e : entries)
    if (!e.pass)
      os << e.name << ": lhs=" << format_number(e.lhs) << " rhs=" << format_number(e.rhs) << "; ";
  return os.str();
}

RelationReport check_relations(const ExampleParams& p, double A, double M) {
  RelationReport r;
  const double a1 = p.a.at(0);
  const double L = p.L;

  const double lhs0 = 4.0 * p.alpha0 * a1;
  const double rhs0 = p.b1 * p.b1;
  r.entries.push_back({"rel0: 4 alpha0 a1 = b1^2", lhs0, rhs0, lhs0 - rhs0,
                       std::fabs(lhs0 - rhs0) <= kRelTol * std::max(1.0, rhs0)});

  const double lhs1 = p.b1 - 2.0 * a1 * L;
  double inner = lhs1 * lhs1 / (4.0 * a1);
  for (std::size_t i = 1; i < p.a.size(); ++i) inner += p.a[i] * L * L;
  const double rhs1 = 2.0 * A * std::sqrt(inner);
  r.entries.push_back({"rel1: b1 - 2 a1 L >= 2A sqrt(psi bound)", lhs1, rhs1, lhs1 - rhs1,
                       leq_rel(rhs1, lhs1)});
  r.entries.push_back({"rel1: b1 - 2 a1 L > 0", lhs1, 0.0, lhs1, lhs1 > 0.0});

  for (std::size_t i = 1; i < p.a.size(); ++i) {
    const double lhs = std::sqrt(a1) * std::sqrt(p.a[i]);
    r.entries.push_back({"rel2: sqrt(a1 a" + std::to_string(i + 1) + ") <= 2M", lhs, 2.0 * M,
                         lhs - 2.0 * M, leq_rel(lhs, 2.0 * M)});
  }
  return r;
}

ExampleParams build_example(double A, double M, double L, int k, double ell,
                            std::optional<std::vector<double>> a_tail) {
  if (!(A > 1.0)) throw Error(ErrorKind::domain, "A must exceed 1");
  if (!(M > 0.0)) throw Error(ErrorKind::domain, "M must be positive");
  if (!(L > 0.0)) throw Error(ErrorKind::domain, "L must be positive");
  if (k < 1) throw Error(ErrorKind::domain, "k must be positive");
  if (!(ell >= -L && ell < L)) throw Error(ErrorKind::domain, "ell must lie in [-L, L)");

  ExampleParams p;
  p.L = L;
  p.k = k;
  p.ell = ell;
  const double a1 = 2.0 * A * A;
  p.b1 = 4.0 * L * M * std::sqrt(static_cast<double>(k - 1)) + 2.0 * a1 * L;
  p.alpha0 = p.b1 * p.b1 / (4.0 * a1);
  p.a.assign(static_cast<std::size_t>(k), 4.0 * M * M / a1);
  p.a[0] = a1;
  if (a_tail) {
    if (a_tail->size() != static_cast<std::size_t>(k - 1))
      throw Error(ErrorKind::construction, "a_tail must hold k-1 coefficients");
    for (std::size_t i = 0; i < a_tail->size(); ++i) {
      if (!((*a_tail)[i] >= 0.0))
        throw Error(ErrorKind::construction, "a_tail coefficients must be nonnegative");
      p.a[i + 1] = (*a_tail)[i];
    }
  }
  const RelationReport rep = check_relations(p, A, M);
  if (!rep.pass())
    throw Error(ErrorKind::construction, "example relations violated: " + rep.describe_failures());
  return p;
}

double eval_psi(const ExampleParams& p, std::span<const double> x) {
  check_point(p, x);
  // Completed-square form; the expanded form cancels catastrophically near min psi.
  const double a1 = p.a[0];
  const double t = 2.0 * a1 * x[0] + p.b1;
  double v = t * t / (4.0 * a1) + (p.alpha0 - p.b1 * p.b1 / (4.0 * a1));
  for (std::size_t i = 1; i < x.size(); ++i) v += p.a[i] * x[i] * x[i];
  return v;
}

double eval_phi0(const ExampleParams& p, std::span<const double> x) {
  const double psi = eval_psi(p, x);
  if (!(psi > 0.0))
    throw Error(ErrorKind::invariant_violation,
                "psi = " + format_number(psi) + " is not positive");
  return std::sqrt(psi);
}

void grad_phi0(const ExampleParams& p, std::span<const double> x, std::span<double> out) {
  const double r = eval_phi0(p, x);
  out[0] = (2.0 * p.a[0] * x[0] + p.b1) / (2.0 * r);
  for (std::size_t i = 1; i < x.size(); ++i) out[i] = p.a[i] * x[i] / r;
}

Point grad_phi0(const ExampleParams& p, std::span<const double> x) {
  Point g(x.size());
  grad_phi0(p, x, g);
  return g;
}

Wrapped wrap_value(double ell, double phi0, double L) {
  const double u = ell + phi0;
  long q = static_cast<long>(std::floor((u + L) / (2.0 * L)));
  double v = u - 2.0 * static_cast<double>(q) * L;
  // Rounding in the subtraction can land exactly on +L.
  if (v >= L) {
    v -= 2.0 * L;
    ++q;
  }
  return {v, q};
}

Wrapped wrap_phi(const ExampleParams& p, std::span<const double> x) {
  return wrap_value(p.ell, eval_phi0(p, x), p.L);
}

PsiRange psi_range(const ExampleParams& p) {
  const double a1 = p.a[0];
  const double L = p.L;
  // psi = (2 a1 x1 + b1)^2 / (4 a1) + sum_{i>=2} a_i x_i^2
  const double lo1 = 2.0 * a1 * (-L) + p.b1;
  const double hi1 = 2.0 * a1 * L + p.b1;
  double sq_min = std::min(lo1 * lo1, hi1 * hi1);
  if (lo1 < 0.0 && hi1 > 0.0) sq_min = 0.0;
  const double sq_max = std::max(lo1 * lo1, hi1 * hi1);
  PsiRange r{sq_min / (4.0 * a1), sq_max / (4.0 * a1)};
  for (std::size_t i = 1; i < p.a.size(); ++i) {
    const double t = p.a[i] * L * L;
    r.min += std::min(0.0, t);
    r.max += std::max(0.0, t);
  }
  return r;
}

std::vector<PieceDescriptor> piece_decomposition(const ExampleParams& p) {
  const PsiRange range = psi_range(p);
  const double L = p.L;
  const double max_phi0 = std::sqrt(std::max(0.0, range.max));
  const long q_max = static_cast<long>(std::floor((p.ell + max_phi0 + L) / (2.0 * L)));
  std::vector<PieceDescriptor> out;
  for (long q = 0; q <= q_max; ++q) {
    PieceDescriptor d;
    d.q = q;
    const double lo = (2.0 * q - 1.0) * L - p.ell;
    const double hi = (2.0 * q + 1.0) * L - p.ell;
    d.lower = q == 0 ? -std::numeric_limits<double>::infinity() : lo * lo;
    d.upper = hi * hi;
    d.empty = !(d.lower < range.max && d.upper > range.min);
    out.push_back(d);
  }
  return out;
}

bool in_example_piece(const ExampleParams& p, const PieceDescriptor& d,
                      std::span<const double> x) {
  const double psi = eval_psi(p, x);
  return psi > d.lower && psi < d.upper;
}

DerivativeAudit derivative_bounds_audit(const ExampleParams& p, double A, double M,
                                        std::size_t n_samples, std::uint64_t seed) {
  const auto k = static_cast<std::size_t>(p.k);
  const double L = p.L;
  DerivativeAudit a;
  a.min_d1 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < k; ++i)
    a.closed_form_product = std::max(a.closed_form_product, std::sqrt(p.a[i] * p.a[0]) / 2.0);

  std::vector<double> x(k), g(k), xp(k), xm(k);
  auto visit = [&](bool fd) {
    grad_phi0(p, x, g);
    const double d1 = std::fabs(g[0]);
    if (d1 < a.min_d1) {
      a.min_d1 = d1;
      a.argmin_d1 = x;
    }
    for (std::size_t i = 1; i < k; ++i) {
      const double prod = std::fabs(g[0] * g[i]);
      if (prod > a.max_product || a.argmax_product.empty()) {
        a.max_product = std::max(a.max_product, prod);
        a.argmax_product = x;
      }
    }
    if (fd) {
      double gmax = 0.0, err = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        xp = x;
        xm = x;
        xp[i] += kFdStep;
        xm[i] -= kFdStep;
        const double d = (eval_phi0(p, xp) - eval_phi0(p, xm)) / (2.0 * kFdStep);
        err = std::max(err, std::fabs(d - g[i]));
        gmax = std::max(gmax, std::fabs(g[i]));
      }
      a.max_gradient_error = std::max(a.max_gradient_error, err / gmax);
    }
    ++a.samples;
  };

  for (std::size_t c = 0; c < (std::size_t{1} << k); ++c) {
    for (std::size_t i = 0; i < k; ++i) x[i] = (c >> i) & 1 ? L : -L;
    visit(false);
  }
  Rng rng = make_rng(seed, Stream::example);
  for (std::size_t n = 0; n < n_samples; ++n) {
    for (std::size_t i = 0; i < k; ++i) x[i] = uniform(rng, -L, L);
    visit(true);
  }
  a.d1_pass = a.min_d1 >= A - 1e-9;
  a.product_pass = a.max_product <= M + 1e-9;
  a.closed_form_pass = a.closed_form_product <= M + 1e-9;
  a.gradient_pass = a.max_gradient_error <= 1e-5;
  a.pass = a.d1_pass && a.product_pass && a.closed_form_pass && a.gradient_pass;
  return a;
}

PiecewiseSystem make_example_system(const ExampleParams& p, const ModelParams& model) {
  if (model.k != p.k || model.L != p.L)
    throw Error(ErrorKind::construction, "model and example disagree on k or L");
  std::vector<Branch> branches;
  std::vector<long> q_of_branch;
  for (const auto& d : piece_decomposition(p)) {
    if (d.empty) continue;
    const double shift = p.ell - 2.0 * static_cast<double>(d.q) * p.L;
    Branch b;
    b.phi = [p, shift](std::span<const double> x) { return shift + eval_phi0(p, x); };
    b.grad_phi = [p](std::span<const double> x, std::span<double> out) { grad_phi0(p, x, out); };
    auto grad_psi = [p](std::span<const double> x, std::span<double> out, double sign) {
      out[0] = sign * (2.0 * p.a[0] * x[0] + p.b1);
      for (std::size_t i = 1; i < x.size(); ++i) out[i] = sign * 2.0 * p.a[i] * x[i];
    };
    const double upper = d.upper;
    b.constraints.push_back(
        {[p, upper](std::span<const double> x) { return eval_psi(p, x) - upper; },
         [grad_psi](std::span<const double> x, std::span<double> out) { grad_psi(x, out, 1.0); }});
    if (d.q > 0) {
      const double lower = d.lower;
      b.constraints.push_back(
          {[p, lower](std::span<const double> x) { return lower - eval_psi(p, x); },
           [grad_psi](std::span<const double> x, std::span<double> out) {
             grad_psi(x, out, -1.0);
           }});
    }
    branches.push_back(std::move(b));
    q_of_branch.push_back(d.q);
  }
  PieceHint hint = [p, q_of_branch](std::span<const double> x) -> std::optional<std::size_t> {
    const double psi = eval_psi(p, x);
    if (!(psi > 0.0)) return std::nullopt;
    const long q = wrap_value(p.ell, std::sqrt(psi), p.L).piece;
    auto it = std::find(q_of_branch.begin(), q_of_branch.end(), q);
    if (it == q_of_branch.end()) return std::nullopt;
    return static_cast<std::size_t>(it - q_of_branch.begin());
  };
  return PiecewiseSystem(model, std::move(branches), std::move(hint));
}

std::optional<Preset> find_preset(const std::string& name) {
  ModelParams m;
  m.L = 1.0;
  m.k = 2;
  m.M = 1.0;
  m.alpha = 1.0;
  m.Y = 3;
  m.eps1 = 0.05;
  if (name == "example-k2-small") {
    m.A = 2.0;
    m.sigma = 1.2;
    m.eps0 = 0.1;
    return Preset{name, m, 0.0};
  }
  if (name == "example-k2-full") {
    m.A = 101.0;
    m.sigma = 100.0;
    m.eps0 = 0.05;
    return Preset{name, m, 0.0};
  }
  return std::nullopt;
}

std::vector<std::string> preset_names() { return {"example-k2-small", "example-k2-full"}; }

nlohmann::json to_json(const ExampleParams& p) {
  return {{"L", p.L}, {"k", p.k}, {"ell", p.ell}, {"alpha0", p.alpha0}, {"a", p.a}, {"b1", p.b1}};
}

nlohmann::json to_json(const RelationReport& r) {
  nlohmann::json e = nlohmann::json::array();
  for (const auto& x : r.entries)
    e.push_back({{"name", x.name},
                 {"lhs", x.lhs},
                 {"rhs", x.rhs},
                 {"residual", x.residual},
                 {"pass", x.pass}});
  return {{"pass", r.pass()}, {"relations", e}};
}

nlohmann::json to_json(const DerivativeAudit& a) {
  return {{"samples", a.samples},
          {"min_d1", a.min_d1},
          {"argmin_d1", a.argmin_d1},
          {"max_product", a.max_product},
          {"argmax_product", a.argmax_product},
          {"closed_form_product", a.closed_form_product},
          {"max_gradient_error", a.max_gradient_error},
          {"d1_pass", a.d1_pass},
          {"product_pass", a.product_pass},
          {"closed_form_pass", a.closed_form_pass},
          {"gradient_pass", a.gradient_pass},
          {"pass", a.pass}};
}

nlohmann::json to_json(const std::vector<PieceDescriptor>& pieces) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& d : pieces)
    out.push_back({{"q", d.q},
                   {"lower", std::isfinite(d.lower) ? nlohmann::json(d.lower) : nlohmann::json()},
                   {"upper", d.upper},
                   {"empty", d.empty}});
  return out;
}

}  // namespace skel
