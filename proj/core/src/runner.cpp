#include "skel/runner.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

#include "skel/components.hpp"
#include "skel/correlation.hpp"
#include "skel/csv.hpp"
#include "skel/error.hpp"
#include "skel/example_family.hpp"
#include "skel/hypothesis.hpp"
#include "skel/osc_norms.hpp"
#include "skel/piecewise.hpp"
#include "skel/spectrum.hpp"
#include "skel/ulam.hpp"

namespace skel {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) : path_(dir / ".skel.lock") {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create output directory " + dir.string());
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) {
      if (errno == EEXIST)
        throw Error(ErrorKind::io, "output directory " + dir.string() +
                                       " is in use (remove " + path_.string() + " if stale)");
      throw Error(ErrorKind::io, "cannot create lock file " + path_.string());
    }
    std::fclose(f);
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

void write_json(const json& j, const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw Error(ErrorKind::io, "failed writing " + path.string());
}

struct Context {
  const ExperimentConfig& cfg;
  fs::path out;
  std::ostream& log;
};

json hypotheses_section(Context& ctx, bool& pass) {
  const HypothesisReport rep = audit(ctx.cfg.model);
  pass = rep.pass();
  ctx.log << rep.table();
  return to_json(rep);
}

json expansion_section(Context& ctx, const PiecewiseSystem& sys, bool& pass) {
  const auto& a = ctx.cfg.audit;
  const ExpansionAudit ex = expansion_audit(sys, ctx.cfg.model.sigma, a.points, a.pairs, a.seed);
  json probes = json::array();
  bool probes_pass = true;
  for (std::size_t j = 0; j < sys.branch_count(); ++j) {
    const InjectivityReport inj = injectivity_probe(sys, j, a.probe_pairs, a.seed);
    const GeometryReport geo = geometry_probe(sys, j, a.probe_pairs, a.seed);
    // pieces too thin to sample produce no pairs; that is not a violation
    probes_pass = probes_pass && inj.violations == 0;
    probes.push_back({{"injectivity", to_json(inj)}, {"geometry", to_json(geo)}});
  }
  pass = ex.pass && probes_pass;
  ctx.log << "expansion: min Gershgorin bound " << format_number(ex.min_gershgorin)
          << ", min squared stretch " << format_number(ex.min_stretch) << ", sigma "
          << format_number(ex.sigma) << (ex.pass ? " (pass)" : " (FAIL)") << '\n';
  json j = to_json(ex);
  j["probes"] = probes;
  j["probes_pass"] = probes_pass;
  j["overall_pass"] = pass;
  return j;
}

json example_section(Context& ctx, bool& pass) {
  const ModelParams& m = ctx.cfg.model;
  const ExampleParams p =
      build_example(m.A, m.M, m.L, m.k, ctx.cfg.system.ell, ctx.cfg.system.a_tail);
  const RelationReport rel = check_relations(p, m.A, m.M);
  const DerivativeAudit da = derivative_bounds_audit(p, m.A, m.M, ctx.cfg.audit.points,
                                                     ctx.cfg.audit.seed);
  const PsiRange range = psi_range(p);
  pass = rel.pass() && da.pass;
  ctx.log << "example: a1=" << format_number(p.a[0]) << " b1=" << format_number(p.b1)
          << " alpha0=" << format_number(p.alpha0) << (pass ? " (pass)" : " (FAIL)") << '\n';
  return {{"params", to_json(p)},
          {"relations", to_json(rel)},
          {"derivatives", to_json(da)},
          {"psi_range", {range.min, range.max}},
          {"pieces", to_json(piece_decomposition(p))},
          {"crossing_number", crossing_number(p)},
          {"pass", pass}};
}

struct UlamBundle {
  UlamOperator op;
  DensityField h;
  Spectrum spectrum;
  Components components;
};

UlamBundle compute_ulam(Context& ctx, const PiecewiseSystem& sys) {
  const auto& u = ctx.cfg.ulam;
  UlamBundle b;
  b.op = build_ulam(sys, u.resolution, u.samples_per_cell, u.seed);
  b.h = invariant_density(b.op, {u.tol, u.max_iter});
  SpectrumOptions so;
  so.unit_threshold = u.unit_threshold;
  b.spectrum = leading_spectrum(b.op, u.spectrum_count, so);
  b.components = mixing_components(b.op, b.h,
                                   u.support_threshold.value_or(default_support_threshold(b.op)));
  return b;
}

json ulam_section(Context& ctx, const UlamBundle& b) {
  save_ulam(b.op, ctx.out / "operator.bin");
  write_grid_csv(b.h, ctx.out / "density.csv");
  write_spectrum_csv(b.spectrum, ctx.out / "spectrum.csv");
  write_components_csv(b.components, b.op.grid, ctx.out / "components.csv");
  ctx.log << "ulam: " << b.op.grid.cell_count() << " cells, nnz " << b.op.P.nnz() << ", q_hat "
          << format_number(b.spectrum.q_hat()) << ", classes " << b.components.classes.size()
          << '\n';
  return {{"cells", b.op.grid.cell_count()},
          {"nnz", b.op.P.nnz()},
          {"density_integral", integral(b.h)},
          {"fixed_point_residual", fixed_point_residual(b.op, b.h)},
          {"spectrum", to_json(b.spectrum)},
          {"components", to_json(b.components)}};
}

json marginals_section(Context& ctx, const UlamBundle& b) {
  json arr = json::array();
  for (std::size_t j = 0; j < b.h.grid.dim(); ++j) {
    const GridFunction m = marginal_density(b.h, j);
    write_marginal_csv(m, ctx.out / ("marginal_" + std::to_string(j + 1) + ".csv"));
    double lo = 0.0;
    for (double v : m.values) lo = std::min(lo, v);
    arr.push_back({{"coordinate", j + 1}, {"integral", integral(m)}, {"min", lo}});
  }
  ctx.log << "marginals: " << arr.size() << " written\n";
  return arr;
}

json correlation_section(Context& ctx, const PiecewiseSystem& sys, const UlamBundle& b) {
  const auto& c = ctx.cfg.correlation;
  const Observable F = parse_observable(c.F);
  const Observable H = parse_observable(c.H);
  CorrelationOptions opt;
  opt.r = c.r;
  opt.s = c.s;
  opt.n_max = c.n_max;
  opt.ensemble = c.ensemble;
  opt.seed = c.seed;
  const CorrelationCurve curve =
      covariance_curve(sys.as_box_map(), F, H, b.h, opt, &b.components);
  write_curve_csv(curve, ctx.out / "correlation.csv");
  json j = {{"curve", to_json(curve)}, {"q_hat", b.spectrum.q_hat()}};

  // explicit norm factor of the bound
  const double L = ctx.cfg.model.L;
  const GridFunction marginal = marginal_density(b.h, static_cast<std::size_t>(c.s - 1));
  double tsf = 0.0;
  Point u(1);
  for (std::size_t i = 0; i < marginal.values.size(); ++i) {
    marginal.grid.cell_center(i, u);
    tsf += std::fabs(F(u[0])) * marginal.values[i] * marginal.grid.cell_volume();
  }
  double factor = std::numeric_limits<double>::quiet_NaN();
  try {
    const GridFunction Hg = GridFunction::sample(
        UniformGrid(Box{{-L}, {L}}, std::vector<std::size_t>{c.h_resolution}),
        [&](std::span<const double> x) { return H(x[0]); });
    const NormFactor nf = correlation_norm_factor(Hg, ctx.cfg.model, c.r, tsf, c.n_eps);
    factor = nf.value;
    j["norm_factor"] = to_json(nf);
  } catch (const Error& e) {
    j["norm_factor_error"] = e.what();
  }

  try {
    const DecayFit fit = fit_decay(curve);
    j["fit"] = to_json(fit);
    j["bound"] = to_json(bound_compare(curve, fit, factor, b.spectrum.q_hat()));
    ctx.log << "correlation: rho_hat " << format_number(fit.rho_hat) << ", R^2 "
            << format_number(fit.r2) << " over " << fit.window.size() << " lags\n";
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::insufficient_signal) throw;
    j["fit_error"] = e.what();
    ctx.log << "correlation: " << e.what() << '\n';
  }
  return j;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{
      "check", "audit-expansion", "build-example", "ulam", "marginals", "correlate", "report"};
  return names;
}

int run_command(const std::string& command, const ExperimentConfig& cfg,
                const RunOptions& options) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end())
    throw Error(ErrorKind::validation, "unknown command '" + command + "'");
  const fs::path out = options.out.empty() ? cfg.output : options.out;
  std::ostream& log = options.log ? *options.log : std::cout;
  OutputLock lock(out);
  Context ctx{cfg, out, log};
  const bool is_example = !cfg.system.preset.empty() || cfg.system.example;

  if (command == "check") {
    bool pass = false;
    write_json(hypotheses_section(ctx, pass), out / "hypotheses.json");
    return pass ? 0 : 2;
  }
  if (command == "build-example") {
    if (!is_example)
      throw Error(ErrorKind::validation, "build-example needs a preset or the example family");
    bool pass = false;
    write_json(example_section(ctx, pass), out / "example.json");
    return pass ? 0 : 2;
  }

  const PiecewiseSystem sys = make_system(cfg);
  if (command == "audit-expansion") {
    bool pass = false;
    write_json(expansion_section(ctx, sys, pass), out / "expansion.json");
    return pass ? 0 : 2;
  }

  const UlamBundle bundle = compute_ulam(ctx, sys);
  if (command == "ulam") {
    write_json(ulam_section(ctx, bundle), out / "ulam.json");
    return 0;
  }
  if (command == "marginals") {
    write_json({{"marginals", marginals_section(ctx, bundle)}}, out / "marginals.json");
    return 0;
  }
  if (command == "correlate") {
    write_json(correlation_section(ctx, sys, bundle), out / "correlation.json");
    return 0;
  }

  // report
  bool hyp_pass = false, exp_pass = false, ex_pass = true;
  json report;
  report["config"] = to_json(cfg);
  report["hypotheses"] = hypotheses_section(ctx, hyp_pass);
  if (is_example) report["example"] = example_section(ctx, ex_pass);
  report["expansion"] = expansion_section(ctx, sys, exp_pass);
  const json ulam = ulam_section(ctx, bundle);
  report["spectrum"] = ulam.at("spectrum");
  report["ulam"] = ulam;
  report["marginals"] = marginals_section(ctx, bundle);
  report["correlation"] = correlation_section(ctx, sys, bundle);
  report["summary"] = {{"hypotheses_pass", hyp_pass},
                       {"expansion_pass", exp_pass},
                       {"example_pass", ex_pass}};
  write_json(report, out / "report.json");
  return 0;
}

}  // namespace skel
