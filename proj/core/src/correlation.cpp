#include "skel/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "skel/csv.hpp"
#include "skel/error.hpp"
#include "skel/expression.hpp"
#include "skel/parallel.hpp"

namespace skel {

Observable parse_observable(const std::string& text) {
  if (text == "identity") return [](double x) { return x; };
  if (text == "square") return [](double x) { return x * x; };
  if (text == "abs") return [](double x) { return std::fabs(x); };
  if (text.rfind("indicator:", 0) == 0) {
    const std::string rest = text.substr(10);
    const auto colon = rest.find(':');
    if (colon == std::string::npos)
      throw Error(ErrorKind::parse, "indicator observable needs the form indicator:a:b");
    char* end = nullptr;
    const double a = std::strtod(rest.c_str(), &end);
    if (end != rest.c_str() + colon) throw Error(ErrorKind::parse, "bad indicator bound in " + text);
    const std::string bs = rest.substr(colon + 1);
    const double b = std::strtod(bs.c_str(), &end);
    if (bs.empty() || *end != '\0') throw Error(ErrorKind::parse, "bad indicator bound in " + text);
    if (!(a < b)) throw Error(ErrorKind::parse, "indicator interval is empty in " + text);
    return [a, b](double x) { return x >= a && x < b ? 1.0 : 0.0; };
  }
  if (text.rfind("expr:", 0) == 0) {
    const Expression e = Expression::parse(text.substr(5), 1);
    return [e](double x) { return e.evaluate(std::span<const double>(&x, 1)); };
  }
  throw Error(ErrorKind::parse, "unknown observable '" + text + "'");
}

DensitySampler::DensitySampler(const DensityField& h) : grid_(h.grid) {
  cumulative_.resize(h.values.size());
  double s = 0.0;
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    if (h.values[i] < 0.0) throw Error(ErrorKind::domain, "density has negative cells");
    s += h.values[i];
    cumulative_[i] = s;
  }
  if (!(s > 0.0)) throw Error(ErrorKind::degenerate_input, "density has no mass");
}

std::size_t DensitySampler::sample(Rng& rng, std::span<double> out) const {
  const double u = uniform(rng, 0.0, cumulative_.back());
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  const auto cell = static_cast<std::size_t>(it - cumulative_.begin());
  grid_.cell_lower_corner(cell, out);
  for (std::size_t a = 0; a < out.size(); ++a) out[a] += grid_.cell_width(a) * uniform(rng, 0.0, 1.0);
  return cell;
}

namespace {

constexpr std::size_t kBlock = 4096;

struct FirstPass {
  std::vector<double> count;   // [group]
  std::vector<double> sum_H;   // [group]
  std::vector<double> sum_F;   // [group * lags + n]
  std::vector<double> all_F;   // [n]
  std::vector<double> all_F2;  // [n]
  double h_min = std::numeric_limits<double>::infinity();
  double h_max = -std::numeric_limits<double>::infinity();
  double f_min = std::numeric_limits<double>::infinity();
  double f_max = -std::numeric_limits<double>::infinity();
};

struct SecondPass {
  std::vector<double> sum_c;
  std::vector<double> sum_c2;
};

}  // namespace

CorrelationCurve covariance_curve(const BoxMap& map, const Observable& F, const Observable& H,
                                  const DensityField& h_star, const CorrelationOptions& opt,
                                  const Components* components) {
  const std::size_t k = map.box.dim();
  if (opt.r < 1 || opt.s < 1) throw Error(ErrorKind::domain, "r and s must be at least 1");
  if (opt.ensemble < 2) throw Error(ErrorKind::domain, "ensemble needs at least 2 trajectories");
  if (h_star.grid.dim() != k) throw Error(ErrorKind::domain, "density does not match the map");

  const std::size_t lags = opt.n_max + 1;
  const std::size_t s_off = static_cast<std::size_t>(opt.s - 1);
  const std::size_t r_off = static_cast<std::size_t>(opt.r - 1);
  const std::size_t length = std::max(opt.n_max + s_off, r_off) + 1;

  CorrelationCurve c;
  c.ensemble = opt.ensemble;
  c.seed = opt.seed;

  // Cell -> group of the initial state.
  std::vector<std::size_t> group_of(h_star.values.size(), 0);
  std::size_t groups = 1;
  if (components && (components->classes.size() > 1 || components->lcm_period() > 1)) {
    std::vector<std::size_t> offset;
    std::size_t total = 0;
    for (const auto& cls : components->classes) {
      offset.push_back(total);
      total += cls.period;
    }
    for (std::size_t i = 0; i < group_of.size(); ++i)
      group_of[i] = components->cell_class[i] < 0
                        ? total
                        : offset[static_cast<std::size_t>(components->cell_class[i])] +
                              static_cast<std::size_t>(components->cell_phase[i]);
    groups = total + 1;
    c.lag_step = components->lcm_period();
  }
  c.groups = groups;

  const DensitySampler sampler(h_star);
  const std::size_t n_blocks = (opt.ensemble + kBlock - 1) / kBlock;

  auto run_block = [&](std::size_t b, auto&& visit) {
    Rng rng = make_rng(opt.seed, Stream::correlation, b);
    const std::size_t begin = b * kBlock;
    const std::size_t end = std::min(opt.ensemble, begin + kBlock);
    std::vector<double> z(k), next(k), x(length);
    for (std::size_t t = begin; t < end; ++t) {
      const std::size_t cell = sampler.sample(rng, z);
      for (std::size_t m = 0; m < length; ++m) {
        x[m] = z[0];
        if (m + 1 < length) {
          map.apply(z, next);
          z.swap(next);
        }
      }
      visit(group_of[cell], x);
    }
  };

  std::vector<FirstPass> first(n_blocks);
  parallel_for(n_blocks, [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      FirstPass& fp = first[b];
      fp.count.assign(groups, 0.0);
      fp.sum_H.assign(groups, 0.0);
      fp.sum_F.assign(groups * lags, 0.0);
      fp.all_F.assign(lags, 0.0);
      fp.all_F2.assign(lags, 0.0);
      run_block(b, [&](std::size_t g, const std::vector<double>& x) {
        const double hv = H(x[r_off]);
        fp.count[g] += 1.0;
        fp.sum_H[g] += hv;
        fp.h_min = std::min(fp.h_min, hv);
        fp.h_max = std::max(fp.h_max, hv);
        for (std::size_t n = 0; n < lags; ++n) {
          const double fv = F(x[n + s_off]);
          fp.sum_F[g * lags + n] += fv;
          fp.all_F[n] += fv;
          fp.all_F2[n] += fv * fv;
          fp.f_min = std::min(fp.f_min, fv);
          fp.f_max = std::max(fp.f_max, fv);
        }
      });
    }
  });

  FirstPass tot;
  tot.count.assign(groups, 0.0);
  tot.sum_H.assign(groups, 0.0);
  tot.sum_F.assign(groups * lags, 0.0);
  tot.all_F.assign(lags, 0.0);
  tot.all_F2.assign(lags, 0.0);
  for (const auto& fp : first) {
    for (std::size_t g = 0; g < groups; ++g) {
      tot.count[g] += fp.count[g];
      tot.sum_H[g] += fp.sum_H[g];
    }
    for (std::size_t i = 0; i < tot.sum_F.size(); ++i) tot.sum_F[i] += fp.sum_F[i];
    for (std::size_t n = 0; n < lags; ++n) {
      tot.all_F[n] += fp.all_F[n];
      tot.all_F2[n] += fp.all_F2[n];
    }
    tot.h_min = std::min(tot.h_min, fp.h_min);
    tot.h_max = std::max(tot.h_max, fp.h_max);
    tot.f_min = std::min(tot.f_min, fp.f_min);
    tot.f_max = std::max(tot.f_max, fp.f_max);
  }
  const double N = static_cast<double>(opt.ensemble);
  std::vector<double> mean_H(groups, 0.0), mean_F(groups * lags, 0.0);
  for (std::size_t g = 0; g < groups; ++g) {
    if (tot.count[g] == 0.0) continue;
    mean_H[g] = tot.sum_H[g] / tot.count[g];
    for (std::size_t n = 0; n < lags; ++n)
      mean_F[g * lags + n] = tot.sum_F[g * lags + n] / tot.count[g];
  }

  for (std::size_t n = 0; n < lags; ++n) {
    c.lags.push_back(n);
    c.eligible.push_back(n % c.lag_step == 0 ? 1 : 0);
    const double m = tot.all_F[n] / N;
    c.mean_F.push_back(m);
    c.mean_F_se.push_back(std::sqrt(std::max(0.0, tot.all_F2[n] / N - m * m) / N));
  }

  if (tot.h_min == tot.h_max || tot.f_min == tot.f_max) {
    c.degenerate = true;
    c.warnings.push_back(tot.h_min == tot.h_max ? "H is constant on the ensemble"
                                                : "F is constant on the ensemble");
    c.cov.assign(lags, 0.0);
    c.stderr_.assign(lags, 0.0);
    return c;
  }

  std::vector<SecondPass> second(n_blocks);
  parallel_for(n_blocks, [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      SecondPass& sp = second[b];
      sp.sum_c.assign(lags, 0.0);
      sp.sum_c2.assign(lags, 0.0);
      run_block(b, [&](std::size_t g, const std::vector<double>& x) {
        const double hc = H(x[r_off]) - mean_H[g];
        for (std::size_t n = 0; n < lags; ++n) {
          const double v = (F(x[n + s_off]) - mean_F[g * lags + n]) * hc;
          sp.sum_c[n] += v;
          sp.sum_c2[n] += v * v;
        }
      });
    }
  });
  std::vector<double> sum_c(lags, 0.0), sum_c2(lags, 0.0);
  for (const auto& sp : second)
    for (std::size_t n = 0; n < lags; ++n) {
      sum_c[n] += sp.sum_c[n];
      sum_c2[n] += sp.sum_c2[n];
    }
  for (std::size_t n = 0; n < lags; ++n) {
    const double cov = sum_c[n] / N;
    c.cov.push_back(cov);
    c.stderr_.push_back(std::sqrt(std::max(0.0, sum_c2[n] / N - cov * cov) / N));
  }
  return c;
}

DecayFit fit_decay(const CorrelationCurve& curve) {
  DecayFit f;
  // Usable window: eligible lags from the start until the first one lost in noise.
  std::vector<double> xs, ys, ws;
  for (std::size_t i = 0; i < curve.lags.size(); ++i) {
    if (!curve.eligible[i]) continue;
    const double a = std::fabs(curve.cov[i]);
    const double se = curve.stderr_[i];
    if (!(se > 0.0) || !(a > 3.0 * se)) break;
    f.window.push_back(curve.lags[i]);
    xs.push_back(static_cast<double>(curve.lags[i]));
    ys.push_back(std::log(a));
    ws.push_back((a / se) * (a / se));  // 1 / var(log|cov|), delta method
  }
  if (xs.size() < 4)
    throw Error(ErrorKind::insufficient_signal,
                "only " + std::to_string(xs.size()) +
                    " leading lags exceed three standard errors; at least 4 are needed");
  double sw = 0, mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sw += ws[i];
    mx += ws[i] * xs[i];
    my += ws[i] * ys[i];
  }
  mx /= sw;
  my /= sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += ws[i] * (xs[i] - mx) * (xs[i] - mx);
    sxy += ws[i] * (xs[i] - mx) * (ys[i] - my);
    syy += ws[i] * (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (intercept + slope * xs[i]);
    ss_res += ws[i] * e * e;
  }
  f.C_hat = std::exp(intercept);
  f.rho_hat = std::exp(slope);
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  f.monotone = true;
  for (std::size_t i = 1; i < ys.size(); ++i) f.monotone = f.monotone && ys[i] <= ys[i - 1];
  return f;
}

BoundComparison bound_compare(const CorrelationCurve& curve, const DecayFit& fit,
                              double norm_factor, double q_hat) {
  BoundComparison b;
  b.rho_hat = fit.rho_hat;
  b.q_hat = q_hat;
  b.discrepancy = std::fabs(fit.rho_hat - q_hat);
  b.norm_factor = norm_factor;
  if (!(q_hat > 0.0)) {
    b.C_min = std::numeric_limits<double>::quiet_NaN();
    return b;
  }
  for (std::size_t n : fit.window) {
    const auto it = std::find(curve.lags.begin(), curve.lags.end(), n);
    const double a = std::fabs(curve.cov[static_cast<std::size_t>(it - curve.lags.begin())]);
    b.C_min = std::max(b.C_min, a / std::pow(q_hat, static_cast<double>(n)));
  }
  return b;
}

GridFunction empirical_density(std::span<const double> values, double lo, double hi,
                               std::size_t bins) {
  GridFunction g(UniformGrid(Box{{lo}, {hi}}, std::vector<std::size_t>{bins}));
  if (values.empty()) return g;
  const double w = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    auto i = static_cast<long>(std::floor((v - lo) / w));
    i = std::clamp<long>(i, 0, static_cast<long>(bins) - 1);
    g.values[static_cast<std::size_t>(i)] += 1.0;
  }
  for (double& v : g.values) v /= static_cast<double>(values.size()) * w;
  return g;
}

void write_curve_csv(const CorrelationCurve& c, const std::filesystem::path& path) {
  CsvTable t;
  t.header = {"lag", "cov", "stderr"};
  for (std::size_t i = 0; i < c.lags.size(); ++i)
    t.rows.push_back({static_cast<double>(c.lags[i]), c.cov[i], c.stderr_[i]});
  write_csv(t, path);
}

nlohmann::json to_json(const CorrelationCurve& c) {
  return {{"lags", c.lags},         {"cov", c.cov},        {"stderr", c.stderr_},
          {"ensemble", c.ensemble}, {"seed", c.seed},      {"lag_step", c.lag_step},
          {"groups", c.groups},     {"degenerate", c.degenerate}, {"warnings", c.warnings}};
}

nlohmann::json to_json(const DecayFit& f) {
  return {{"C_hat", f.C_hat}, {"rho_hat", f.rho_hat}, {"r2", f.r2},
          {"window", f.window}, {"monotone", f.monotone}};
}

nlohmann::json to_json(const BoundComparison& b) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  return {{"rho_hat", b.rho_hat},
          {"q_hat", b.q_hat},
          {"discrepancy", b.discrepancy},
          {"C_min", num(b.C_min)},
          {"norm_factor", num(b.norm_factor)}};
}

}  // namespace skel
