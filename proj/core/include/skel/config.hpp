#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skel/hypothesis.hpp"
#include "skel/piecewise.hpp"

namespace skel {

/// Branch declared in the config: phi and the constraints g < 0 as expressions in x1..xk.
struct ExpressionBranch {
  std::string phi;
  std::vector<std::string> constraints;
};

struct SystemConfig {
  std::string preset;                      ///< empty unless a named preset is used
  bool example = false;                    ///< built-in quadratic-root family
  double ell = 0.0;
  std::optional<std::vector<double>> a_tail;
  std::vector<ExpressionBranch> branches;  ///< used when neither preset nor example
};

struct AuditConfig {
  std::size_t points = 10000;
  std::size_t pairs = 10000;
  std::size_t probe_pairs = 10000;
  std::uint64_t seed = 0;
};

struct UlamConfig {
  std::vector<std::size_t> resolution;  ///< one entry per axis
  std::size_t samples_per_cell = 100;
  std::size_t spectrum_count = 6;
  double unit_threshold = 0.999;
  std::optional<double> support_threshold;
  double tol = 1e-10;
  std::size_t max_iter = 100000;
  std::uint64_t seed = 0;
};

struct CorrelationConfig {
  std::string F = "identity";
  std::string H = "identity";
  int r = 1;
  int s = 1;
  std::size_t n_max = 20;
  std::size_t ensemble = 100000;
  std::size_t h_resolution = 1024;
  std::size_t n_eps = 32;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  ModelParams model;
  SystemConfig system;
  AuditConfig audit;
  UlamConfig ulam;
  CorrelationConfig correlation;
  std::uint64_t seed = 0;
  std::filesystem::path output = "skel-out";
};

/// Reads and validates a JSON config. Malformed JSON raises ErrorKind::parse with
/// line and column; constraint violations and unknown keys raise ErrorKind::validation
/// naming the key.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_json(const nlohmann::json& j);

/// Replaces every seed with `seed` (the --seed flag).
void override_seed(ExperimentConfig& cfg, std::uint64_t seed);

/// The configured system: preset or example family, or expression branches.
PiecewiseSystem make_system(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace skel
