#ifndef POROFRAC_OUTPUT_HPP
#define POROFRAC_OUTPUT_HPP

#include <json.hpp>
#include <string>
#include <vector>

#include "porofrac/bayes.hpp"
#include "porofrac/model.hpp"
#include "porofrac/solver.hpp"

namespace porofrac {

/// Canonical number formatting for all emitted files: round-trip
/// precision, negative zero normalized away so equivalent runs stay
/// byte-identical.
std::string format_double(double v);

void write_pressure_csv(const std::string& path, const PressureCurve& curve);

struct Observation {
  std::vector<double> times;
  std::vector<double> values;
};

Observation read_observation(const std::string& path);

void write_run_summary(const std::string& path, const ForwardResult& result,
                       const std::string& scenario_name, double dt,
                       double wall_seconds, bool include_timing);

/// Legacy ASCII VTK with nodal displacement/pressure/phase-field and
/// the cell-averaged history field.
void write_vtk(const std::string& path, const Mesh& mesh,
               const FieldState& state);

void write_cell_field_vtk(const std::string& path, const Mesh& mesh,
                          const Eigen::VectorXd& values,
                          const std::string& field_name);

void write_cell_field_csv(const std::string& path, const Mesh& mesh,
                          const Eigen::VectorXd& values,
                          const std::string& value_header);

Eigen::VectorXd read_cell_field_csv(const std::string& path, int n_elems);

void write_chain_csv(const std::string& path,
                     const std::vector<std::string>& names,
                     const std::vector<std::string>& units,
                     const ChainResult& chain);

void write_posterior_summary(const std::string& path,
                             const std::vector<std::string>& names,
                             const std::vector<std::string>& units,
                             const PriorSpec& priors, const ChainResult& chain);

/// Histogram-ready binned counts, one block of rows per parameter.
void write_chain_histograms(const std::string& path,
                            const std::vector<std::string>& names,
                            const ChainResult& chain, int bins = 30);

}  // namespace porofrac

#endif
