#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "skel/ulam.hpp"

namespace skel {

struct ComponentClass {
  std::vector<std::size_t> cells;  ///< ascending
  std::size_t period = 1;
  double mass = 0.0;  ///< invariant mass carried by the class
};

/// Recurrent classes of the support graph and their cyclic sub-classes
/// W_{j,l}: cell c of class j sits in W_{j, phase[c]}.
struct Components {
  std::vector<ComponentClass> classes;
  std::vector<long> cell_class;  ///< -1 outside every recurrent class
  std::vector<long> cell_phase;  ///< -1 outside every recurrent class

  std::size_t lcm_period() const;
  /// Sum over classes of the period: the expected count of unit-modulus eigenvalues.
  std::size_t cyclic_count() const;
};

/// Default support threshold 1e-3 / cell count on cell masses.
double default_support_threshold(const UlamOperator& op);

/// Support graph on cells with invariant mass above the threshold; closed
/// strongly connected classes with their periods (gcd of cycle lengths).
/// Throws ErrorKind::degenerate_input for an empty support.
Components mixing_components(const UlamOperator& op, const DensityField& h,
                             double support_threshold);

void write_components_csv(const Components& c, const UniformGrid& grid,
                          const std::filesystem::path& path);
nlohmann::json to_json(const Components& c);

}  // namespace skel
