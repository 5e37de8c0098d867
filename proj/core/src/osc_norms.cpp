#include "skel/osc_norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "skel/csv.hpp"
#include "skel/error.hpp"
#include "skel/parallel.hpp"

namespace skel {

GridFunction::GridFunction(UniformGrid g, double fill)
    : grid(std::move(g)), values(grid.cell_count(), fill) {}

GridFunction::GridFunction(UniformGrid g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.cell_count())
    throw Error(ErrorKind::domain, "grid function needs one value per cell");
}

GridFunction GridFunction::sample(UniformGrid g,
                                  const std::function<double(std::span<const double>)>& f) {
  GridFunction out(std::move(g));
  Point c(out.grid.dim());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.grid.cell_center(i, c);
    out.values[i] = f(c);
  }
  return out;
}

double GridFunction::evaluate(std::span<const double> x) const {
  const std::size_t i = grid.locate(x, 0.0);
  return i < values.size() ? values[i] : 0.0;
}

double GridFunction::l1() const {
  double s = 0.0;
  for (double v : values) s += std::fabs(v);
  return s * grid.cell_volume();
}

double GridFunction::sup() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::fabs(v));
  return s;
}

GridFunction GridFunction::scaled(double c) const {
  GridFunction out = *this;
  for (double& v : out.values) v *= c;
  return out;
}

double osc(const GridFunction& f, std::span<const double> center, double radius) {
  const std::size_t k = f.grid.dim();
  if (center.size() != k) throw Error(ErrorKind::domain, "ball centre has the wrong dimension");
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  const double r2 = radius * radius * (1.0 + 1e-12);
  Point c(k);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    f.grid.cell_center(i, c);
    double d2 = 0.0;
    for (std::size_t a = 0; a < k; ++a) d2 += (c[a] - center[a]) * (c[a] - center[a]);
    if (d2 > r2) continue;
    hi = std::max(hi, f.values[i]);
    lo = std::min(lo, f.values[i]);
  }
  if (hi < lo) throw Error(ErrorKind::domain, "ball contains no grid cell centre");
  return hi - lo;
}

namespace {

/// Sliding max and min of half-width r along one row (van Herk / Gil-Werman),
/// with windows clipped to the row.
void sliding_extrema(std::span<const double> row, std::size_t r, std::span<double> out_max,
                     std::span<double> out_min, std::vector<double>& buf_g,
                     std::vector<double>& buf_h) {
  const std::size_t n = row.size();
  if (r == 0) {
    std::copy(row.begin(), row.end(), out_max.begin());
    std::copy(row.begin(), row.end(), out_min.begin());
    return;
  }
  const std::size_t w = 2 * r + 1;
  const std::size_t len = n + 2 * r;
  buf_g.resize(len);
  buf_h.resize(len);
  const double ninf = -std::numeric_limits<double>::infinity();
  auto at = [&](std::size_t i, double sentinel) {
    return (i < r || i >= r + n) ? sentinel : row[i - r];
  };
  for (int pass = 0; pass < 2; ++pass) {
    const bool is_max = pass == 0;
    const double sentinel = is_max ? ninf : -ninf;
    auto pick = [is_max](double a, double b) { return is_max ? std::max(a, b) : std::min(a, b); };
    for (std::size_t i = 0; i < len; ++i)
      buf_g[i] = (i % w == 0) ? at(i, sentinel) : pick(buf_g[i - 1], at(i, sentinel));
    for (std::size_t i = len; i-- > 0;)
      buf_h[i] = (i + 1 == len || (i + 1) % w == 0) ? at(i, sentinel)
                                                    : pick(buf_h[i + 1], at(i, sentinel));
    auto out = is_max ? out_max : out_min;
    for (std::size_t j = 0; j < n; ++j) out[j] = pick(buf_h[j], buf_g[j + w - 1]);
  }
}

struct Working {
  std::vector<std::size_t> dims;
  std::vector<double> widths;
  std::vector<double> values;
  double cell_volume = 0.0;
};

Working make_working(const GridFunction& f, OscMode mode, double eps_max) {
  const std::size_t k = f.grid.dim();
  Working w;
  w.dims.resize(k);
  w.widths.resize(k);
  std::vector<std::size_t> pad(k, 0);
  for (std::size_t a = 0; a < k; ++a) {
    w.widths[a] = f.grid.cell_width(a);
    if (mode == OscMode::extend_by_zero)
      pad[a] = static_cast<std::size_t>(std::floor(eps_max / w.widths[a])) + 1;
    w.dims[a] = f.grid.resolution()[a] + 2 * pad[a];
  }
  w.cell_volume = f.grid.cell_volume();
  if (mode == OscMode::restrict) {
    w.values = f.values;
    return w;
  }
  std::size_t total = 1;
  for (auto d : w.dims) total *= d;
  w.values.assign(total, 0.0);
  std::vector<std::size_t> m(k);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    f.grid.multi_index(i, m);
    std::size_t flat = 0;
    for (std::size_t a = 0; a < k; ++a) flat = flat * w.dims[a] + m[a] + pad[a];
    w.values[flat] = f.values[i];
  }
  return w;
}

/// Integral of Osc over balls of radius eps for every cell of the working grid.
double osc_integral(const Working& w, double eps) {
  const std::size_t k = w.dims.size();
  const std::size_t n_last = w.dims[k - 1];
  const double h_last = w.widths[k - 1];
  std::size_t n_rows = 1;
  for (std::size_t a = 0; a + 1 < k; ++a) n_rows *= w.dims[a];

  // Offsets over the leading axes grouped by the remaining half-width along the last axis.
  std::map<std::size_t, std::vector<std::vector<long>>> groups;
  const double e2 = eps * eps * (1.0 + 1e-12);
  std::vector<long> radius(k > 1 ? k - 1 : 0);
  for (std::size_t a = 0; a + 1 < k; ++a)
    radius[a] = static_cast<long>(std::floor(eps / w.widths[a] * (1.0 + 1e-12)));
  std::vector<long> off(radius.size());
  for (std::size_t a = 0; a < off.size(); ++a) off[a] = -radius[a];
  while (true) {
    double q = 0.0;
    for (std::size_t a = 0; a < off.size(); ++a)
      q += (static_cast<double>(off[a]) * w.widths[a]) * (static_cast<double>(off[a]) * w.widths[a]);
    if (q <= e2) {
      const double rem = std::sqrt(std::max(0.0, e2 - q));
      groups[static_cast<std::size_t>(std::floor(rem / h_last + 1e-9))].push_back(off);
    }
    std::size_t a = 0;
    for (; a < off.size(); ++a) {
      if (off[a] < radius[a]) {
        ++off[a];
        break;
      }
      off[a] = -radius[a];
    }
    if (a == off.size()) break;
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> res_max(w.values.size(), -inf), res_min(w.values.size(), inf);
  std::vector<double> row_max(w.values.size()), row_min(w.values.size());

  for (const auto& [r, offsets] : groups) {
    parallel_for(n_rows, [&](std::size_t begin, std::size_t end) {
      std::vector<double> g, h;
      for (std::size_t row = begin; row < end; ++row) {
        const std::size_t base = row * n_last;
        sliding_extrema(std::span<const double>(w.values).subspan(base, n_last), r,
                        std::span<double>(row_max).subspan(base, n_last),
                        std::span<double>(row_min).subspan(base, n_last), g, h);
      }
    });
    parallel_for(n_rows, [&](std::size_t begin, std::size_t end) {
      std::vector<long> m(k > 1 ? k - 1 : 0);
      for (std::size_t row = begin; row < end; ++row) {
        std::size_t rem = row;
        for (std::size_t a = m.size(); a-- > 0;) {
          m[a] = static_cast<long>(rem % w.dims[a]);
          rem /= w.dims[a];
        }
        for (const auto& o : offsets) {
          std::size_t nb = 0;
          bool inside = true;
          for (std::size_t a = 0; a < m.size(); ++a) {
            const long v = m[a] + o[a];
            if (v < 0 || v >= static_cast<long>(w.dims[a])) {
              inside = false;
              break;
            }
            nb = nb * w.dims[a] + static_cast<std::size_t>(v);
          }
          if (!inside) continue;
          const double* src_max = row_max.data() + nb * n_last;
          const double* src_min = row_min.data() + nb * n_last;
          double* dst_max = res_max.data() + row * n_last;
          double* dst_min = res_min.data() + row * n_last;
          for (std::size_t j = 0; j < n_last; ++j) {
            dst_max[j] = std::max(dst_max[j], src_max[j]);
            dst_min[j] = std::min(dst_min[j], src_min[j]);
          }
        }
      }
    });
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < res_max.size(); ++i) sum += res_max[i] - res_min[i];
  return sum * w.cell_volume;
}

}  // namespace

SeminormResult seminorm(const GridFunction& f, const SeminormOptions& opt) {
  if (opt.n_eps < 4) throw Error(ErrorKind::domain, "the eps grid needs at least 4 points");
  if (!(opt.alpha > 0.0 && opt.alpha <= 1.0))
    throw Error(ErrorKind::domain, "alpha must lie in (0, 1]");
  double h = 0.0;
  for (std::size_t a = 0; a < f.grid.dim(); ++a) h = std::max(h, f.grid.cell_width(a));
  if (!(opt.eps_max > h))
    throw Error(ErrorKind::domain, "eps range must exceed one cell width (" + format_number(h) + ")");
  for (double v : f.values)
    if (!std::isfinite(v)) throw Error(ErrorKind::domain, "grid function has non-finite values");

  SeminormResult out;
  const Working w = make_working(f, opt.mode, opt.eps_max);
  const double ratio = std::log(opt.eps_max / h);
  for (std::size_t i = 0; i < opt.n_eps; ++i) {
    const double eps = h * std::exp(ratio * static_cast<double>(i) / (opt.n_eps - 1));
    const double val = std::pow(eps, -opt.alpha) * osc_integral(w, eps);
    out.eps.push_back(eps);
    out.profile.push_back(val);
    if (i == 0 || val > out.value) {
      out.value = val;
      out.argmax_eps = eps;
    }
  }
  return out;
}

double seminorm_alpha(const GridFunction& f, double alpha, double eps1, std::size_t n_eps) {
  return seminorm(f, {alpha, eps1, n_eps, OscMode::extend_by_zero}).value;
}

double K_omega(int k, double L, double gamma) {
  if (k < 1) throw Error(ErrorKind::domain, "k must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorKind::domain, "gamma must lie in (0, 1)");
  double sum = 0.0;
  for (int i = 1; i <= k; ++i) sum += 2.0 * std::pow(gamma, i - 1) * L;
  const double first = std::pow(2.0, k + 2) * std::pow(sum, k - 1);
  const double second = std::pow(2.0, 2 * k + 1) * std::pow(L, k - 1) *
                        std::pow((1.0 - std::pow(gamma, k)) / (1.0 - gamma), k - 1);
  if (std::fabs(first - second) > 1e-9 * std::max(1.0, std::fabs(first)))
    throw Error(ErrorKind::internal, "K(Omega) forms disagree: " + format_number(first) + " vs " +
                                         format_number(second));
  return first;
}

Box OmegaSpec::box() const {
  std::vector<double> half(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) half[static_cast<std::size_t>(i)] = std::pow(gamma, i) * L;
  return Box::symmetric(half);
}

AlphaNorm norm_alpha(const GridFunction& f, double alpha, double eps1, std::size_t n_eps) {
  AlphaNorm n;
  n.l1 = f.l1();
  n.seminorm = seminorm_alpha(f, alpha, eps1, n_eps);
  n.total = n.l1 + n.seminorm;
  return n;
}

NormReport norm_alpha_L(const GridFunction& g, const OmegaSpec& omega, double alpha, double eps0,
                        std::size_t n_eps) {
  NormReport r;
  const SeminormResult s = seminorm(g, {alpha, eps0, n_eps, OscMode::restrict});
  r.seminorm = s.value;
  r.eps = s.eps;
  r.l1 = g.l1();
  r.sup = g.sup();
  r.K = K_omega(omega.k, omega.L, omega.gamma);
  r.boundary_term = 2.0 * r.K * std::pow(eps0, 1.0 - alpha) * r.sup;
  r.total = r.seminorm + r.boundary_term + r.l1;
  return r;
}

double restriction_constant(const OmegaSpec& omega, double alpha, double eps0) {
  const double K = K_omega(omega.k, omega.L, omega.gamma);
  return 1.0 + 2.0 * K * std::max(1.0, std::pow(eps0, alpha)) /
                   (unit_ball_volume(omega.k) * std::pow(eps0, omega.k - 1 + alpha));
}

GridFunction lift_Ts(const std::function<double(double)>& F, int s, const OmegaSpec& omega,
                     std::vector<std::size_t> resolution) {
  if (s < 1 || s > omega.k) throw Error(ErrorKind::domain, "lift coordinate out of range");
  const double scale = std::pow(omega.gamma, 1 - s);
  const auto axis = static_cast<std::size_t>(s - 1);
  return GridFunction::sample(UniformGrid(omega.box(), std::move(resolution)),
                              [&](std::span<const double> z) { return F(z[axis] * scale); });
}

GridFunction lift_Ts(const GridFunction& F, int s, const OmegaSpec& omega,
                     std::vector<std::size_t> resolution) {
  if (s < 1 || s > omega.k) throw Error(ErrorKind::domain, "lift coordinate out of range");
  if (F.grid.dim() != 1) throw Error(ErrorKind::domain, "lift expects a function on [-L, L]");
  const auto axis = static_cast<std::size_t>(s - 1);
  resolution.at(axis) = F.grid.resolution()[0];
  GridFunction out(UniformGrid(omega.box(), std::move(resolution)));
  std::vector<std::size_t> m(out.grid.dim());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.grid.multi_index(i, m);
    out.values[i] = F.values[m[axis]];
  }
  return out;
}

NormFactor correlation_norm_factor(const GridFunction& H, const ModelParams& p, int r, double TsF_l1_mu,
                            std::size_t n_eps) {
  if (H.grid.dim() != 1) throw Error(ErrorKind::domain, "H must be a function on [-L, L]");
  if (r < 1 || r > p.k) throw Error(ErrorKind::domain, "r must lie in 1..k");
  const int k = p.k;
  const double L = p.L;
  const double g = p.gamma();
  const double delta_max = p.eps0 * std::pow(g, 1 - r);
  const SeminormResult s = seminorm(H, {p.alpha, delta_max, n_eps, OscMode::restrict});

  // Growth check over the smallest quarter of the delta grid.
  const std::size_t m = std::max<std::size_t>(3, s.eps.size() / 4);
  bool positive = true;
  for (std::size_t i = 0; i < m; ++i) positive = positive && s.profile[i] > 0.0;
  if (positive) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double x = std::log(s.eps[i]), y = std::log(s.profile[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    if (slope < -0.25 && s.argmax_eps == s.eps.front())
      throw Error(ErrorKind::domain, "oscillation seminorm of H grows without bound as delta -> 0 "
                                     "(log-slope " + format_number(slope) + ")");
  }

  NormFactor f;
  f.h_seminorm = s.value;
  f.TsF_l1_mu = TsF_l1_mu;
  const double tri = k * (k - 1) / 2.0;
  const double base = std::pow(2.0 * L, k - 1);
  f.term_l1 = base * std::pow(g, tri) * H.l1();
  f.term_osc = base * std::pow(g, tri - p.alpha * (r - 1)) * s.value;
  f.term_sup = std::pow(2.0, 2 * k) * std::pow(L, k - 1) *
               std::pow((1.0 - std::pow(g, k)) / (1.0 - g), k - 1) *
               std::pow(p.eps0, 1.0 - p.alpha) * H.sup();
  f.value = (f.term_l1 + f.term_osc + f.term_sup) * TsF_l1_mu;
  return f;
}

void write_grid_csv(const GridFunction& f, const std::filesystem::path& path) {
  CsvTable t;
  const std::size_t k = f.grid.dim();
  for (std::size_t a = 0; a < k; ++a) t.header.push_back("i" + std::to_string(a + 1));
  t.header.push_back("value");
  std::vector<std::size_t> m(k);
  t.rows.reserve(f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    f.grid.multi_index(i, m);
    std::vector<double> row(m.begin(), m.end());
    row.push_back(f.values[i]);
    t.rows.push_back(std::move(row));
  }
  write_csv(t, path);
}

GridFunction read_grid_csv(const std::filesystem::path& path, const Box& box) {
  const CsvTable t = read_csv(path);
  const std::size_t k = box.dim();
  if (t.header.size() != k + 1)
    throw Error(ErrorKind::parse, path.string() + ": expected " + std::to_string(k + 1) + " columns");
  std::vector<std::size_t> res(k, 0);
  for (const auto& row : t.rows)
    for (std::size_t a = 0; a < k; ++a) {
      if (!(row[a] >= 0.0) || row[a] != std::floor(row[a]))
        throw Error(ErrorKind::parse, path.string() + ": cell indices must be nonnegative integers");
      res[a] = std::max(res[a], static_cast<std::size_t>(row[a]) + 1);
    }
  GridFunction f(UniformGrid(box, res), std::numeric_limits<double>::quiet_NaN());
  if (t.rows.size() != f.values.size())
    throw Error(ErrorKind::parse, path.string() + ": grid is incomplete");
  std::vector<std::size_t> m(k);
  for (const auto& row : t.rows) {
    for (std::size_t a = 0; a < k; ++a) m[a] = static_cast<std::size_t>(row[a]);
    f.values[f.grid.flat_index(m)] = row[k];
  }
  for (double v : f.values)
    if (std::isnan(v)) throw Error(ErrorKind::parse, path.string() + ": duplicate cell rows");
  return f;
}

nlohmann::json to_json(const NormReport& r) {
  return {{"l1", r.l1},       {"seminorm", r.seminorm},           {"sup", r.sup},
          {"K_omega", r.K},   {"boundary_term", r.boundary_term}, {"total", r.total}};
}

nlohmann::json to_json(const NormFactor& f) {
  return {{"term_l1", f.term_l1},       {"term_osc", f.term_osc}, {"term_sup", f.term_sup},
          {"h_seminorm", f.h_seminorm}, {"TsF_l1_mu", f.TsF_l1_mu}, {"value", f.value}};
}

}  // namespace skel
