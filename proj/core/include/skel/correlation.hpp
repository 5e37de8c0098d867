#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skel/components.hpp"
#include "skel/grid.hpp"
#include "skel/rng.hpp"
#include "skel/ulam.hpp"

namespace skel {

using Observable = std::function<double(double)>;

/// "identity", "square", "abs", "indicator:a:b" (1 on [a, b)) or "expr:<expression in x>".
Observable parse_observable(const std::string& text);

/// Draws points from a cell density: a cell with probability proportional to
/// its mass, then a uniform position inside it.
class DensitySampler {
 public:
  explicit DensitySampler(const DensityField& h);
  std::size_t sample(Rng& rng, std::span<double> out) const;

 private:
  UniformGrid grid_;
  std::vector<double> cumulative_;
};

struct CorrelationOptions {
  int r = 1;
  int s = 1;
  std::size_t n_max = 20;
  std::size_t ensemble = 100000;
  std::uint64_t seed = kDefaultSeed;
};

/// Cov(F(X_{n+s-1}), H(X_{r-1})) for n = 0..n_max over independent trajectories
/// started from h*, X_m being coordinate 0 of the m-th iterate.
struct CorrelationCurve {
  std::vector<std::size_t> lags;
  std::vector<double> cov;
  std::vector<double> stderr_;
  std::vector<char> eligible;  ///< lag is a multiple of the cyclic period
  std::vector<double> mean_F;  ///< mean of F(X_{n+s-1})
  std::vector<double> mean_F_se;
  std::size_t ensemble = 0;
  std::uint64_t seed = 0;
  std::size_t lag_step = 1;
  std::size_t groups = 1;
  bool degenerate = false;
  std::vector<std::string> warnings;
};

/// With `components` describing several classes or a period above 1, products
/// are centred per cyclic sub-class W_{j,l} of the initial cell and only lags that
/// are multiples of the period lcm are marked eligible.
CorrelationCurve covariance_curve(const BoxMap& map, const Observable& F, const Observable& H,
                                  const DensityField& h_star, const CorrelationOptions& opt,
                                  const Components* components = nullptr);

struct DecayFit {
  double C_hat = 0.0;
  double rho_hat = 0.0;
  double r2 = 0.0;
  std::vector<std::size_t> window;  ///< lags used
  bool monotone = false;            ///< |cov| non-increasing over the window
};

/// Weighted least squares on (n, log|cov_n|), weights (cov/se)^2, over the usable
/// window: eligible lags from the first one up to the first with |cov| <= 3 se.
/// Throws ErrorKind::insufficient_signal when the window has fewer than 4 lags.
DecayFit fit_decay(const CorrelationCurve& curve);

struct BoundComparison {
  double rho_hat = 0.0;
  double q_hat = 0.0;
  double discrepancy = 0.0;  ///< |rho_hat - q_hat|
  double C_min = 0.0;        ///< smallest C with |cov_n| <= C q_hat^n on the window
  double norm_factor = 0.0;
};

BoundComparison bound_compare(const CorrelationCurve& curve, const DecayFit& fit,
                              double norm_factor, double q_hat);

/// Histogram density of samples on [lo, hi].
GridFunction empirical_density(std::span<const double> values, double lo, double hi,
                               std::size_t bins);

void write_curve_csv(const CorrelationCurve& c, const std::filesystem::path& path);
nlohmann::json to_json(const CorrelationCurve& c);
nlohmann::json to_json(const DecayFit& f);
nlohmann::json to_json(const BoundComparison& b);

}  // namespace skel
