#include "skel/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "skel/error.hpp"
#include "skel/example_family.hpp"
#include "skel/expression.hpp"
#include "skel/rng.hpp"

namespace skel {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& key, const std::string& what) {
  throw Error(ErrorKind::validation, key + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) invalid(where.empty() ? "config" : where, "must be a JSON object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key))
      invalid(where.empty() ? key : where + "." + key,
              "unknown key '" + key + "'" + (where.empty() ? "" : " in " + where));
}

std::string path_of(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

double get_number(const json& obj, const std::string& where, const std::string& key, double def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number()) invalid(path_of(where, key), "must be a number");
  return v.get<double>();
}

std::int64_t get_int(const json& obj, const std::string& where, const std::string& key,
                     std::int64_t def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) invalid(path_of(where, key), "must be an integer");
  return v.get<std::int64_t>();
}

std::size_t get_count(const json& obj, const std::string& where, const std::string& key,
                      std::size_t def, std::size_t min) {
  const std::int64_t v = get_int(obj, where, key, static_cast<std::int64_t>(def));
  if (v < static_cast<std::int64_t>(min))
    invalid(path_of(where, key), "must be at least " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

std::uint64_t get_seed(const json& obj, const std::string& where, const std::string& key,
                       std::uint64_t def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    invalid(path_of(where, key), "must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const json& obj, const std::string& where, const std::string& key,
                       const std::string& def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_string()) invalid(path_of(where, key), "must be a string");
  return v.get<std::string>();
}

void read_model(const json& m, ModelParams& p) {
  reject_unknown(m, "model", {"L", "k", "A", "sigma", "M", "alpha", "Y", "eps0", "eps1"});
  p.L = get_number(m, "model", "L", p.L);
  p.k = static_cast<int>(get_int(m, "model", "k", p.k));
  p.A = get_number(m, "model", "A", p.A);
  p.sigma = get_number(m, "model", "sigma", p.sigma);
  p.M = get_number(m, "model", "M", p.M);
  p.alpha = get_number(m, "model", "alpha", p.alpha);
  p.Y = static_cast<int>(get_int(m, "model", "Y", p.Y));
  p.eps0 = get_number(m, "model", "eps0", p.eps0);
  p.eps1 = get_number(m, "model", "eps1", p.eps1);
}

void validate_model(const ModelParams& p) {
  if (!(p.L > 0.0)) invalid("model.L", "L must be positive");
  if (p.k < 2 || p.k > 16) invalid("model.k", "k must lie in 2..16");
  if (!(p.A > 0.0)) invalid("model.A", "A must be positive");
  if (!(p.sigma > 1.0)) invalid("model.sigma", "sigma must exceed 1");
  if (!(p.M > 0.0)) invalid("model.M", "M must be positive");
  if (!(p.alpha > 0.0 && p.alpha <= 1.0)) invalid("model.alpha", "alpha must lie in (0, 1]");
  if (p.Y < 1) invalid("model.Y", "Y must be at least 1");
  if (!(p.eps0 > 0.0)) invalid("model.eps0", "eps0 must be positive");
  if (!(p.eps1 > 0.0)) invalid("model.eps1", "eps1 must be positive");
}

}  // namespace

ExperimentConfig parse_config_json(const json& j) {
  reject_unknown(j, "", {"model", "system", "audit", "ulam", "correlation", "seed", "output"});
  ExperimentConfig cfg;
  cfg.seed = get_seed(j, "", "seed", kDefaultSeed);
  cfg.output = get_string(j, "", "output", cfg.output.string());

  if (!j.contains("system")) invalid("system", "missing (name a preset, the example family or branches)");
  const json& s = j.at("system");
  reject_unknown(s, "system", {"preset", "example", "ell", "a_tail", "branches"});
  cfg.system.preset = get_string(s, "system", "preset", "");
  cfg.system.ell = get_number(s, "system", "ell", 0.0);
  if (s.contains("example")) {
    if (!s.at("example").is_boolean()) invalid("system.example", "must be true or false");
    cfg.system.example = s.at("example").get<bool>();
  }
  if (s.contains("a_tail")) {
    if (!s.at("a_tail").is_array()) invalid("system.a_tail", "must be an array of numbers");
    std::vector<double> t;
    for (const auto& v : s.at("a_tail")) {
      if (!v.is_number()) invalid("system.a_tail", "must be an array of numbers");
      t.push_back(v.get<double>());
    }
    cfg.system.a_tail = t;
  }
  if (s.contains("branches")) {
    if (!s.at("branches").is_array() || s.at("branches").empty())
      invalid("system.branches", "must be a nonempty array");
    std::size_t i = 0;
    for (const auto& b : s.at("branches")) {
      const std::string where = "system.branches[" + std::to_string(i++) + "]";
      reject_unknown(b, where, {"phi", "constraints"});
      ExpressionBranch eb;
      eb.phi = get_string(b, where, "phi", "");
      if (eb.phi.empty()) invalid(where + ".phi", "missing");
      if (b.contains("constraints")) {
        if (!b.at("constraints").is_array()) invalid(where + ".constraints", "must be an array");
        for (const auto& c : b.at("constraints")) {
          if (!c.is_string()) invalid(where + ".constraints", "entries must be strings");
          eb.constraints.push_back(c.get<std::string>());
        }
      }
      cfg.system.branches.push_back(std::move(eb));
    }
  }
  const int kinds = (!cfg.system.preset.empty()) + cfg.system.example + !cfg.system.branches.empty();
  if (kinds != 1)
    invalid("system", "declare exactly one of preset, example or branches");

  if (!cfg.system.preset.empty()) {
    const auto preset = find_preset(cfg.system.preset);
    if (!preset) {
      std::string names;
      for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
      invalid("system.preset", "unknown preset '" + cfg.system.preset + "' (known: " + names + ")");
    }
    cfg.model = preset->model;
    if (!s.contains("ell")) cfg.system.ell = preset->ell;
  } else if (!j.contains("model")) {
    invalid("model", "missing (required unless a preset is named)");
  }
  if (j.contains("model")) read_model(j.at("model"), cfg.model);
  validate_model(cfg.model);
  if (!(cfg.system.ell >= -cfg.model.L && cfg.system.ell < cfg.model.L))
    invalid("system.ell", "ell must lie in [-L, L)");

  const json empty = json::object();
  const json& a = j.contains("audit") ? j.at("audit") : empty;
  reject_unknown(a, "audit", {"points", "pairs", "probe_pairs", "seed"});
  cfg.audit.points = get_count(a, "audit", "points", cfg.audit.points, 1);
  cfg.audit.pairs = get_count(a, "audit", "pairs", cfg.audit.pairs, 1);
  cfg.audit.probe_pairs = get_count(a, "audit", "probe_pairs", cfg.audit.probe_pairs, 1);
  cfg.audit.seed = get_seed(a, "audit", "seed", cfg.seed);

  const json& u = j.contains("ulam") ? j.at("ulam") : empty;
  reject_unknown(u, "ulam", {"resolution", "samples_per_cell", "spectrum_count", "unit_threshold",
                             "support_threshold", "tol", "max_iter", "seed"});
  const auto k = static_cast<std::size_t>(cfg.model.k);
  cfg.ulam.resolution.assign(k, 64);
  if (u.contains("resolution")) {
    const json& r = u.at("resolution");
    if (r.is_number_integer()) {
      cfg.ulam.resolution.assign(k, get_count(u, "ulam", "resolution", 64, 8));
    } else if (r.is_array() && r.size() == k) {
      for (std::size_t i = 0; i < k; ++i) {
        if (!r[i].is_number_integer() || r[i].get<std::int64_t>() < 8)
          invalid("ulam.resolution", "entries must be integers >= 8");
        cfg.ulam.resolution[i] = r[i].get<std::size_t>();
      }
    } else {
      invalid("ulam.resolution", "must be an integer or an array of k integers");
    }
  }
  cfg.ulam.samples_per_cell = get_count(u, "ulam", "samples_per_cell", cfg.ulam.samples_per_cell, 16);
  cfg.ulam.spectrum_count = get_count(u, "ulam", "spectrum_count", cfg.ulam.spectrum_count, 2);
  cfg.ulam.unit_threshold = get_number(u, "ulam", "unit_threshold", cfg.ulam.unit_threshold);
  if (!(cfg.ulam.unit_threshold > 0.0 && cfg.ulam.unit_threshold <= 1.0))
    invalid("ulam.unit_threshold", "must lie in (0, 1]");
  if (u.contains("support_threshold")) {
    const double t = get_number(u, "ulam", "support_threshold", 0.0);
    if (!(t >= 0.0)) invalid("ulam.support_threshold", "must be nonnegative");
    cfg.ulam.support_threshold = t;
  }
  cfg.ulam.tol = get_number(u, "ulam", "tol", cfg.ulam.tol);
  if (!(cfg.ulam.tol > 0.0)) invalid("ulam.tol", "must be positive");
  cfg.ulam.max_iter = get_count(u, "ulam", "max_iter", cfg.ulam.max_iter, 1);
  cfg.ulam.seed = get_seed(u, "ulam", "seed", cfg.seed);

  const json& c = j.contains("correlation") ? j.at("correlation") : empty;
  reject_unknown(c, "correlation",
                 {"F", "H", "r", "s", "n_max", "ensemble", "h_resolution", "n_eps", "seed"});
  cfg.correlation.F = get_string(c, "correlation", "F", cfg.correlation.F);
  cfg.correlation.H = get_string(c, "correlation", "H", cfg.correlation.H);
  cfg.correlation.r = static_cast<int>(get_int(c, "correlation", "r", cfg.correlation.r));
  cfg.correlation.s = static_cast<int>(get_int(c, "correlation", "s", cfg.correlation.s));
  if (cfg.correlation.r < 1 || cfg.correlation.r > cfg.model.k)
    invalid("correlation.r", "must lie in 1..k");
  if (cfg.correlation.s < 1 || cfg.correlation.s > cfg.model.k)
    invalid("correlation.s", "must lie in 1..k");
  cfg.correlation.n_max = get_count(c, "correlation", "n_max", cfg.correlation.n_max, 1);
  cfg.correlation.ensemble = get_count(c, "correlation", "ensemble", cfg.correlation.ensemble, 2);
  cfg.correlation.h_resolution =
      get_count(c, "correlation", "h_resolution", cfg.correlation.h_resolution, 16);
  cfg.correlation.n_eps = get_count(c, "correlation", "n_eps", cfg.correlation.n_eps, 4);
  cfg.correlation.seed = get_seed(c, "correlation", "seed", cfg.seed);
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(line) + ":" +
                                      std::to_string(col) + ": malformed JSON");
  }
  try {
    return parse_config_json(j);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::validation) throw;
    throw Error(ErrorKind::validation, path.string() + ": " + e.detail());
  }
}

void override_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.seed = cfg.audit.seed = cfg.ulam.seed = cfg.correlation.seed = seed;
}

PiecewiseSystem make_system(const ExperimentConfig& cfg) {
  const ModelParams& m = cfg.model;
  if (!cfg.system.preset.empty() || cfg.system.example) {
    const ExampleParams p = build_example(m.A, m.M, m.L, m.k, cfg.system.ell, cfg.system.a_tail);
    return make_example_system(p, m);
  }
  std::vector<Branch> branches;
  for (std::size_t i = 0; i < cfg.system.branches.size(); ++i) {
    const auto& eb = cfg.system.branches[i];
    const Expression phi = Expression::parse(eb.phi, m.k);
    std::vector<Expression> dphi;
    for (int v = 0; v < m.k; ++v) dphi.push_back(phi.derivative(v));
    Branch b;
    b.phi = [phi](std::span<const double> x) { return phi.evaluate(x); };
    b.grad_phi = [dphi](std::span<const double> x, std::span<double> out) {
      for (std::size_t v = 0; v < dphi.size(); ++v) out[v] = dphi[v].evaluate(x);
    };
    for (const auto& text : eb.constraints) {
      const Expression g = Expression::parse(text, m.k);
      std::vector<Expression> dg;
      for (int v = 0; v < m.k; ++v) dg.push_back(g.derivative(v));
      b.constraints.push_back(
          {[g](std::span<const double> x) { return g.evaluate(x); },
           [dg](std::span<const double> x, std::span<double> out) {
             for (std::size_t v = 0; v < dg.size(); ++v) out[v] = dg[v].evaluate(x);
           }});
    }
    branches.push_back(std::move(b));
  }
  return PiecewiseSystem(m, std::move(branches));
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  json system;
  if (!cfg.system.preset.empty()) system["preset"] = cfg.system.preset;
  if (cfg.system.example) system["example"] = true;
  system["ell"] = cfg.system.ell;
  if (cfg.system.a_tail) system["a_tail"] = *cfg.system.a_tail;
  if (!cfg.system.branches.empty()) {
    json br = json::array();
    for (const auto& b : cfg.system.branches)
      br.push_back({{"phi", b.phi}, {"constraints", b.constraints}});
    system["branches"] = br;
  }
  json ulam = {{"resolution", cfg.ulam.resolution},
               {"samples_per_cell", cfg.ulam.samples_per_cell},
               {"spectrum_count", cfg.ulam.spectrum_count},
               {"unit_threshold", cfg.ulam.unit_threshold},
               {"tol", cfg.ulam.tol},
               {"max_iter", cfg.ulam.max_iter},
               {"seed", cfg.ulam.seed}};
  if (cfg.ulam.support_threshold) ulam["support_threshold"] = *cfg.ulam.support_threshold;
  return {{"model", to_json(cfg.model)},
          {"system", system},
          {"audit",
           {{"points", cfg.audit.points},
            {"pairs", cfg.audit.pairs},
            {"probe_pairs", cfg.audit.probe_pairs},
            {"seed", cfg.audit.seed}}},
          {"ulam", ulam},
          {"correlation",
           {{"F", cfg.correlation.F},
            {"H", cfg.correlation.H},
            {"r", cfg.correlation.r},
            {"s", cfg.correlation.s},
            {"n_max", cfg.correlation.n_max},
            {"ensemble", cfg.correlation.ensemble},
            {"h_resolution", cfg.correlation.h_resolution},
            {"n_eps", cfg.correlation.n_eps},
            {"seed", cfg.correlation.seed}}},
          {"seed", cfg.seed},
          {"output", cfg.output.string()}};
}

}  // namespace skel
