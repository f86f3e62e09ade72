#ifndef POROFRAC_SCENARIO_HPP
#define POROFRAC_SCENARIO_HPP

#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "porofrac/bayes.hpp"
#include "porofrac/klfield.hpp"
#include "porofrac/model.hpp"
#include "porofrac/solver.hpp"

namespace porofrac {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotchSpec {
  Eigen::Vector2d p0, p1;  // endpoints [m]
  bool inject = true;
};

/// A layer-band value that is either a literal or a reference to a
/// named inversion parameter ("$name" in the config).
struct ValueOrRef {
  double value = 0.0;
  std::string ref;

  bool is_ref() const { return !ref.empty(); }
  double resolve(const std::map<std::string, double>& params) const;
};

struct BandSpec {
  double to_m = 0.0;  // upper band edge along the layer axis [m]
  double phi_a = 0.0, phi_g = 0.0;  // fiber angles [rad]
  ValueOrRef beta_a, beta_g;        // dimensionless
  ValueOrRef chi_a, chi_g;          // [Pa]
};

struct OutputOptions {
  bool write_vtk = false;
  int vtk_every = 1;
};

/// Full description of one runnable problem, in SI after parsing.
/// Config files carry GPa for moduli (as in the material tables);
/// conversion happens once at load.
struct Scenario {
  std::string name;
  std::string description;
  double Lx = 0.0, Ly = 0.0;
  int nx = 0, ny = 0;
  std::vector<NotchSpec> notches;
  double injection_rate = 0.0;  // f_bar [m^2/s]
  MaterialParams material;
  RegionSpec::Axis layer_axis = RegionSpec::Axis::Y;
  std::vector<BandSpec> bands;
  std::string beta_field_csv;  // optional per-element beta_a override
  TimeStepping time;
  OutputOptions output;
  std::uint64_t seed = 1;
  PriorSpec priors;                     // SI scale
  std::vector<std::string> prior_units; // header labels per prior
  std::optional<KLConfig> kl;

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

Scenario parse_scenario(const nlohmann::ordered_json& j);
Scenario load_scenario(const std::string& path);

/// SI values for named inversion parameters; everything not present
/// keeps its configured value.
using ParamOverrides = std::map<std::string, double>;

/// Discretize a scenario: mesh, regions, boundary conditions (clamped
/// outer boundary, zero boundary pressure, notch phase-field pins,
/// volumetric injection spread over the elements overlapping the
/// injected notches).
FemModel build_model(const Scenario& sc, const ParamOverrides& overrides = {},
                     bool force_aniso_path = false);

/// Material-parameter names accepted in overrides and priors.
bool is_material_param(const std::string& name);
MaterialParams apply_material_overrides(const MaterialParams& base,
                                        const ParamOverrides& overrides);

}  // namespace porofrac

#endif
