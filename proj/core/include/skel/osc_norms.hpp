#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "skel/grid.hpp"
#include "skel/hypothesis.hpp"

namespace skel {

/// Piecewise-constant function on a uniform grid (one value per cell).
struct GridFunction {
  UniformGrid grid;
  std::vector<double> values;

  GridFunction() = default;
  explicit GridFunction(UniformGrid g, double fill = 0.0);
  GridFunction(UniformGrid g, std::vector<double> v);

  /// Samples f at every cell centre.
  static GridFunction sample(UniformGrid g, const std::function<double(std::span<const double>)>& f);

  /// Value of the cell containing x; 0 outside the grid box.
  double evaluate(std::span<const double> x) const;
  double l1() const;
  double sup() const;  ///< max |value|
  GridFunction scaled(double c) const;
};

/// max - min of the cells whose centres lie in the closed ball B_radius(center).
/// Throws ErrorKind::domain when no centre falls in the ball.
double osc(const GridFunction& f, std::span<const double> center, double radius);

enum class OscMode {
  extend_by_zero,  ///< f is 0 outside its box, integral over R^k
  restrict,        ///< balls intersected with the box, integral over the box
};

struct SeminormOptions {
  double alpha = 1.0;
  double eps_max = 0.1;
  std::size_t n_eps = 32;
  OscMode mode = OscMode::extend_by_zero;
};

struct SeminormResult {
  double value = 0.0;
  double argmax_eps = 0.0;
  std::vector<double> eps;      ///< log-spaced from one cell width to eps_max
  std::vector<double> profile;  ///< eps^-alpha * integral of Osc over B_eps
};

/// sup over the eps grid of eps^-alpha * (midpoint sum of Osc(f, B_eps(x)) dx).
SeminormResult seminorm(const GridFunction& f, const SeminormOptions& opt);

/// |f|_alpha with f extended by zero; eps ranges up to eps1.
double seminorm_alpha(const GridFunction& f, double alpha, double eps1, std::size_t n_eps = 32);

/// 2^(k+2) (sum_i 2 g^(i-1) L)^(k-1); cross-checked against the closed form
/// 2^(2k+1) L^(k-1) ((1-g^k)/(1-g))^(k-1). Throws ErrorKind::internal if they disagree.
double K_omega(int k, double L, double gamma);

struct OmegaSpec {
  int k = 2;
  double L = 1.0;
  double gamma = 0.5;

  Box box() const;
  static OmegaSpec from(const ModelParams& p) { return {p.k, p.L, p.gamma()}; }
};

struct AlphaNorm {
  double l1 = 0.0;
  double seminorm = 0.0;
  double total = 0.0;
};

/// ||f||_alpha = ||f||_L1 + |f|_alpha (extension by zero).
AlphaNorm norm_alpha(const GridFunction& f, double alpha, double eps1, std::size_t n_eps = 32);

struct NormReport {
  double l1 = 0.0;
  double seminorm = 0.0;  ///< N(g, alpha, L)
  double sup = 0.0;
  double K = 0.0;
  double boundary_term = 0.0;  ///< 2 K eps0^(1-alpha) ||g||_inf
  double total = 0.0;
  std::vector<double> eps;
};

/// ||g||_{alpha,L} = N(g,alpha,L) + 2K eps0^(1-alpha) ||g||_inf + ||g||_L1 for g on Omega.
NormReport norm_alpha_L(const GridFunction& g, const OmegaSpec& omega, double alpha, double eps0,
                        std::size_t n_eps = 32);

/// Constant C of norm_alpha_L(g) <= C norm_alpha(f) for f the zero extension of g:
/// 1 + 2K max(1, eps0^alpha) / (V_k eps0^(k-1+alpha)).
double restriction_constant(const OmegaSpec& omega, double alpha, double eps0);

/// T_s F(z) = F(z_s g^(1-s)) sampled on a grid over Omega.
GridFunction lift_Ts(const std::function<double(double)>& F, int s, const OmegaSpec& omega,
                     std::vector<std::size_t> resolution);
/// Same for a grid function F on [-L, L]; axis s reuses F's resolution so centres align.
GridFunction lift_Ts(const GridFunction& F, int s, const OmegaSpec& omega,
                     std::vector<std::size_t> resolution);

struct NormFactor {
  double term_l1 = 0.0;
  double term_osc = 0.0;
  double term_sup = 0.0;
  double h_seminorm = 0.0;  ///< sup_delta delta^-alpha int Osc(H, ]x-delta, x+delta[)
  double TsF_l1_mu = 0.0;
  double value = 0.0;  ///< (term_l1 + term_osc + term_sup) * TsF_l1_mu
};

/// Explicit factor of the correlation bound, without the abstract constant C.
/// H is a grid function on [-L, L]. Throws ErrorKind::domain when the seminorm
/// of H keeps growing as delta shrinks (H outside the test class).
NormFactor correlation_norm_factor(const GridFunction& H, const ModelParams& params, int r,
                            double TsF_l1_mu, std::size_t n_eps = 32);

void write_grid_csv(const GridFunction& f, const std::filesystem::path& path);
GridFunction read_grid_csv(const std::filesystem::path& path, const Box& box);

nlohmann::json to_json(const NormReport& r);
nlohmann::json to_json(const NormFactor& f);

}  // namespace skel
