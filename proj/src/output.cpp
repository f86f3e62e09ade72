#include "porofrac/output.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace porofrac {

std::string format_double(double v) {
  if (v == 0.0) {
    v = 0.0;  // collapse -0
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write file: " + path);
  }
  return out;
}

const char* flag_name(SampleFlag f) {
  switch (f) {
    case SampleFlag::FirstStage:
      return "first-stage";
    case SampleFlag::SecondStage:
      return "second-stage";
    case SampleFlag::Rejected:
      return "rejected";
  }
  return "unknown";
}

std::string header_label(const std::string& name, const std::string& unit) {
  if (unit == "-" || unit.empty()) {
    return name;
  }
  if (unit == "GPa") {
    return name + "_Pa";  // values are stored in SI
  }
  return name + "_" + unit;
}

}  // namespace

void write_pressure_csv(const std::string& path, const PressureCurve& curve) {
  auto out = open_out(path);
  out << "time_s,P_Pa\n";
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    out << format_double(curve.times[i]) << ","
        << format_double(curve.values[i]) << "\n";
  }
}

Observation read_observation(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open observation file: " + path);
  }
  Observation obs;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty observation file: " + path);
  }
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream ss(line);
    std::string t, p;
    if (!std::getline(ss, t, ',') || !std::getline(ss, p, ',')) {
      throw std::runtime_error("malformed observation row: " + line);
    }
    obs.times.push_back(std::stod(t));
    obs.values.push_back(std::stod(p));
  }
  return obs;
}

void write_run_summary(const std::string& path, const ForwardResult& result,
                       const std::string& scenario_name, double dt,
                       double wall_seconds, bool include_timing) {
  nlohmann::ordered_json j;
  j["scenario"] = scenario_name;
  j["termination"] = termination_name(result.curve.reason);
  j["steps_completed"] = result.steps_completed;
  j["dt_s"] = dt;
  j["newton_iterations_total"] = result.newton_total;
  j["staggered_passes_total"] = result.stagger_total;
  if (!result.failure_detail.empty()) {
    j["failure_detail"] = result.failure_detail;
  }
  if (!result.curve.values.empty()) {
    double pmax = result.curve.values.front();
    for (double v : result.curve.values) {
      pmax = std::max(pmax, v);
    }
    j["peak_pressure_Pa"] = pmax;
  }
  if (include_timing) {
    j["wall_s"] = wall_seconds;
  }
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

void write_vtk(const std::string& path, const Mesh& mesh,
               const FieldState& state) {
  auto out = open_out(path);
  out << "# vtk DataFile Version 3.0\n";
  out << "porofrac fields\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_nodes() << " double\n";
  for (const auto& n : mesh.nodes) {
    out << format_double(n.x()) << " " << format_double(n.y()) << " 0\n";
  }
  out << "CELLS " << mesh.n_elems() << " " << 5 * mesh.n_elems() << "\n";
  for (const auto& e : mesh.elems) {
    out << "4 " << e[0] << " " << e[1] << " " << e[2] << " " << e[3] << "\n";
  }
  out << "CELL_TYPES " << mesh.n_elems() << "\n";
  for (int e = 0; e < mesh.n_elems(); ++e) {
    out << "9\n";
  }
  out << "POINT_DATA " << mesh.n_nodes() << "\n";
  out << "VECTORS displacement_m double\n";
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    out << format_double(state.u[2 * n]) << " "
        << format_double(state.u[2 * n + 1]) << " 0\n";
  }
  out << "SCALARS pressure_Pa double 1\nLOOKUP_TABLE default\n";
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    out << format_double(state.p[n]) << "\n";
  }
  out << "SCALARS phase_field double 1\nLOOKUP_TABLE default\n";
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    out << format_double(state.d[n]) << "\n";
  }
  out << "CELL_DATA " << mesh.n_elems() << "\n";
  out << "SCALARS history_avg double 1\nLOOKUP_TABLE default\n";
  for (int e = 0; e < mesh.n_elems(); ++e) {
    out << format_double(state.H.row(e).mean()) << "\n";
  }
}

void write_cell_field_vtk(const std::string& path, const Mesh& mesh,
                          const Eigen::VectorXd& values,
                          const std::string& field_name) {
  auto out = open_out(path);
  out << "# vtk DataFile Version 3.0\n";
  out << "porofrac cell field\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_nodes() << " double\n";
  for (const auto& n : mesh.nodes) {
    out << format_double(n.x()) << " " << format_double(n.y()) << " 0\n";
  }
  out << "CELLS " << mesh.n_elems() << " " << 5 * mesh.n_elems() << "\n";
  for (const auto& e : mesh.elems) {
    out << "4 " << e[0] << " " << e[1] << " " << e[2] << " " << e[3] << "\n";
  }
  out << "CELL_TYPES " << mesh.n_elems() << "\n";
  for (int e = 0; e < mesh.n_elems(); ++e) {
    out << "9\n";
  }
  out << "CELL_DATA " << mesh.n_elems() << "\n";
  out << "SCALARS " << field_name << " double 1\nLOOKUP_TABLE default\n";
  for (int e = 0; e < mesh.n_elems(); ++e) {
    out << format_double(values[e]) << "\n";
  }
}

void write_cell_field_csv(const std::string& path, const Mesh& mesh,
                          const Eigen::VectorXd& values,
                          const std::string& value_header) {
  auto out = open_out(path);
  out << "element,x_m,y_m," << value_header << "\n";
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const Eigen::Vector2d c = mesh.centroid(e);
    out << e << "," << format_double(c.x()) << "," << format_double(c.y())
        << "," << format_double(values[e]) << "\n";
  }
}

Eigen::VectorXd read_cell_field_csv(const std::string& path, int n_elems) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open field file: " + path);
  }
  std::string line;
  std::getline(in, line);  // header
  Eigen::VectorXd values = Eigen::VectorXd::Zero(n_elems);
  int count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> cols;
    while (std::getline(ss, cell, ',')) {
      cols.push_back(cell);
    }
    if (cols.size() < 4) {
      throw std::runtime_error("malformed field row: " + line);
    }
    const int e = std::stoi(cols[0]);
    if (e < 0 || e >= n_elems) {
      throw std::runtime_error("field element index out of range: " + line);
    }
    values[e] = std::stod(cols[3]);
    ++count;
  }
  if (count != n_elems) {
    throw std::runtime_error("field file has " + std::to_string(count) +
                             " elements, mesh has " + std::to_string(n_elems));
  }
  return values;
}

void write_chain_csv(const std::string& path,
                     const std::vector<std::string>& names,
                     const std::vector<std::string>& units,
                     const ChainResult& chain) {
  auto out = open_out(path);
  out << "sample";
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << "," << header_label(names[i], i < units.size() ? units[i] : "-");
  }
  out << ",log_posterior,stage\n";
  for (int k = 0; k < chain.samples.rows(); ++k) {
    out << k + 1;
    for (int c = 0; c < chain.samples.cols(); ++c) {
      out << "," << format_double(chain.samples(k, c));
    }
    out << "," << format_double(chain.log_posterior[k]) << ","
        << flag_name(chain.flags[k]) << "\n";
  }
}

void write_posterior_summary(const std::string& path,
                             const std::vector<std::string>& names,
                             const std::vector<std::string>& units,
                             const PriorSpec& priors,
                             const ChainResult& chain) {
  nlohmann::ordered_json j;
  const int n = static_cast<int>(chain.samples.rows());
  j["samples"] = n;
  j["accepted_first_stage"] = chain.accepted_first;
  j["accepted_second_stage"] = chain.accepted_second;
  j["acceptance_rate"] = chain.acceptance_rate();
  j["forward_evaluations"] = chain.forward_evals;
  nlohmann::ordered_json params = nlohmann::ordered_json::array();
  const bool have_samples = n > 0;
  const Eigen::VectorXd mean =
      have_samples ? chain.posterior_mean() : Eigen::VectorXd();
  const Eigen::VectorXd sd =
      have_samples ? chain.posterior_sd() : Eigen::VectorXd();
  for (std::size_t i = 0; i < names.size(); ++i) {
    nlohmann::ordered_json p;
    p["name"] = header_label(names[i], i < units.size() ? units[i] : "-");
    const Prior& pr = priors.priors[i];
    p["prior_mean"] = pr.mean();
    p["prior_sd"] = std::sqrt(pr.variance());
    if (have_samples) {
      p["posterior_mean"] = mean[static_cast<int>(i)];
      p["posterior_sd"] = sd[static_cast<int>(i)];
    }
    params.push_back(p);
  }
  j["parameters"] = params;
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

void write_chain_histograms(const std::string& path,
                            const std::vector<std::string>& names,
                            const ChainResult& chain, int bins) {
  auto out = open_out(path);
  out << "parameter,bin_lo,bin_hi,count\n";
  if (chain.samples.rows() == 0) {
    return;
  }
  for (int c = 0; c < chain.samples.cols(); ++c) {
    const double lo = chain.samples.col(c).minCoeff();
    const double hi = chain.samples.col(c).maxCoeff();
    const double width = hi > lo ? (hi - lo) / bins : 1.0;
    std::vector<int> counts(bins, 0);
    for (int k = 0; k < chain.samples.rows(); ++k) {
      int b = static_cast<int>((chain.samples(k, c) - lo) / width);
      b = std::min(std::max(b, 0), bins - 1);
      ++counts[b];
    }
    for (int b = 0; b < bins; ++b) {
      out << names[c] << "," << format_double(lo + b * width) << ","
          << format_double(lo + (b + 1) * width) << "," << counts[b] << "\n";
    }
  }
}

}  // namespace porofrac
