#include "porofrac/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace porofrac {

using nlohmann::ordered_json;

namespace {

const ordered_json& need(const ordered_json& j, const std::string& key,
                         const std::string& where) {
  if (!j.contains(key)) {
    throw ScenarioError("missing field '" + key + "' in " + where);
  }
  return j.at(key);
}

double need_num(const ordered_json& j, const std::string& key,
                const std::string& where) {
  const auto& v = need(j, key, where);
  if (!v.is_number()) {
    throw ScenarioError("field '" + key + "' in " + where +
                        " must be a number");
  }
  return v.get<double>();
}

ValueOrRef parse_value_or_ref(const ordered_json& v, const std::string& key,
                              const std::string& where) {
  ValueOrRef out;
  if (v.is_number()) {
    out.value = v.get<double>();
  } else if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.empty() || s[0] != '$') {
      throw ScenarioError("field '" + key + "' in " + where +
                          " must be a number or a \"$param\" reference");
    }
    out.ref = s.substr(1);
  } else {
    throw ScenarioError("field '" + key + "' in " + where +
                        " must be a number or a \"$param\" reference");
  }
  return out;
}

ordered_json dump_value_or_ref(const ValueOrRef& v) {
  if (v.is_ref()) {
    return "$" + v.ref;
  }
  return v.value;
}

constexpr double kGPa = 1e9;
constexpr double kDeg = M_PI / 180.0;

// Liang-Barsky clipping; overlap counts only when the clipped piece
// has positive length (grazing a corner or an endpoint touching an
// element edge does not make the element part of the notch).
bool segment_intersects_rect(const Eigen::Vector2d& a,
                             const Eigen::Vector2d& b, double x0, double x1,
                             double y0, double y1) {
  double t0 = 0.0, t1 = 1.0;
  const double dx = b.x() - a.x();
  const double dy = b.y() - a.y();
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x() - x0, x1 - a.x(), a.y() - y0, y1 - a.y()};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) {
        return false;
      }
    } else {
      const double r = q[i] / p[i];
      if (p[i] < 0.0) {
        t0 = std::max(t0, r);
      } else {
        t1 = std::min(t1, r);
      }
    }
  }
  return t1 - t0 > 1e-12;
}

double point_segment_distance(const Eigen::Vector2d& p,
                              const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) {
    return (p - a).norm();
  }
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

double ValueOrRef::resolve(const std::map<std::string, double>& params) const {
  if (!is_ref()) {
    return value;
  }
  const auto it = params.find(ref);
  if (it == params.end()) {
    throw ScenarioError("unresolved parameter reference '$" + ref + "'");
  }
  return it->second;
}

bool is_material_param(const std::string& name) {
  static const std::set<std::string> names = {"mu", "K",   "M",
                                              "B",  "G_c", "eta_F"};
  return names.count(name) > 0;
}

MaterialParams apply_material_overrides(const MaterialParams& base,
                                        const ParamOverrides& overrides) {
  MaterialParams mp = base;
  for (const auto& [name, value] : overrides) {
    if (name == "mu") {
      mp.mu = value;
    } else if (name == "K") {
      mp.K_bulk = value;
    } else if (name == "M") {
      mp.M_biot = value;
    } else if (name == "B") {
      mp.B_biot = value;
    } else if (name == "G_c") {
      mp.G_c = value;
    } else if (name == "eta_F") {
      mp.eta_F = value;
    }
    // non-material names are layer-band references, resolved elsewhere
  }
  return mp;
}

void Scenario::validate() const {
  if (Lx <= 0.0 || Ly <= 0.0 || nx < 1 || ny < 1) {
    throw ScenarioError("domain dimensions and resolution must be positive");
  }
  material.validate();
  const double h = std::min(Lx / nx, Ly / ny);
  if (material.l < 2.0 * h) {
    throw ScenarioError(
        "length scale l = " + std::to_string(material.l) +
        " m violates the l >= 2h resolution rule (h = " + std::to_string(h) +
        " m); refine the mesh or enlarge l");
  }
  if (notches.empty()) {
    throw ScenarioError("scenario needs at least one notch");
  }
  bool any_inject = false;
  for (const auto& n : notches) {
    for (const Eigen::Vector2d& p : {n.p0, n.p1}) {
      if (p.x() < 0.0 || p.x() > Lx || p.y() < 0.0 || p.y() > Ly) {
        throw ScenarioError("notch endpoint outside the domain");
      }
    }
    any_inject = any_inject || n.inject;
  }
  if (!any_inject) {
    throw ScenarioError("no injection notch defined");
  }
  if (injection_rate <= 0.0) {
    throw ScenarioError("injection rate must be positive");
  }
  if (bands.empty()) {
    throw ScenarioError("at least one layer band is required");
  }
  const double extent = layer_axis == RegionSpec::Axis::X ? Lx : Ly;
  double prev = 0.0;
  for (const auto& b : bands) {
    if (b.to_m <= prev) {
      throw ScenarioError("layer band edges must be strictly increasing");
    }
    prev = b.to_m;
  }
  if (std::abs(prev - extent) > 1e-9 * extent) {
    throw ScenarioError("last layer band must end at the domain edge");
  }
  if (time.dt <= 0.0 || time.T_end < 0.0 || time.tol_newton <= 0.0 ||
      time.tol_stag <= 0.0 || time.max_newton < 1 || time.max_stag < 1) {
    throw ScenarioError("invalid time-stepping block");
  }
}

Scenario parse_scenario(const ordered_json& j) {
  Scenario sc;
  sc.name = need(j, "name", "scenario").get<std::string>();
  sc.description = j.value("description", "");

  const auto& dom = need(j, "domain", "scenario");
  sc.Lx = need_num(dom, "Lx_m", "domain");
  sc.Ly = need_num(dom, "Ly_m", "domain");
  sc.nx = static_cast<int>(need_num(dom, "nx", "domain"));
  sc.ny = static_cast<int>(need_num(dom, "ny", "domain"));

  for (const auto& n : need(j, "notches", "scenario")) {
    NotchSpec ns;
    ns.p0 = {need_num(n, "x0_m", "notch"), need_num(n, "y0_m", "notch")};
    ns.p1 = {need_num(n, "x1_m", "notch"), need_num(n, "y1_m", "notch")};
    ns.inject = n.value("inject", true);
    sc.notches.push_back(ns);
  }
  sc.injection_rate = need_num(j, "injection_rate_m2_s", "scenario");

  const auto& mat = need(j, "material", "scenario");
  sc.material.mu = need_num(mat, "mu_GPa", "material") * kGPa;
  sc.material.K_bulk = need_num(mat, "K_GPa", "material") * kGPa;
  sc.material.M_biot = need_num(mat, "M_GPa", "material") * kGPa;
  sc.material.B_biot = need_num(mat, "B", "material");
  sc.material.K_D = need_num(mat, "K_D_m2", "material");
  sc.material.zeta_perm = need_num(mat, "zeta", "material");
  sc.material.eta_F = need_num(mat, "eta_F_Pa_s", "material");
  sc.material.G_c = need_num(mat, "G_c_GPa", "material") * kGPa;
  sc.material.eta_visc = need_num(mat, "eta_visc_Pa_s", "material");
  sc.material.kappa = need_num(mat, "kappa", "material");
  sc.material.l = need_num(mat, "l_m", "material");

  const auto& layers = need(j, "layers", "scenario");
  const std::string axis = need(layers, "axis", "layers").get<std::string>();
  if (axis == "x") {
    sc.layer_axis = RegionSpec::Axis::X;
  } else if (axis == "y") {
    sc.layer_axis = RegionSpec::Axis::Y;
  } else {
    throw ScenarioError("layers.axis must be \"x\" or \"y\"");
  }
  for (const auto& b : need(layers, "bands", "layers")) {
    BandSpec bs;
    bs.to_m = need_num(b, "to_m", "band");
    bs.phi_a = need_num(b, "phi_a_deg", "band") * kDeg;
    bs.phi_g = need_num(b, "phi_g_deg", "band") * kDeg;
    bs.beta_a = parse_value_or_ref(need(b, "beta_a", "band"), "beta_a", "band");
    bs.beta_g = parse_value_or_ref(need(b, "beta_g", "band"), "beta_g", "band");
    bs.chi_a = parse_value_or_ref(need(b, "chi_a_Pa", "band"), "chi_a_Pa",
                                  "band");
    bs.chi_g = parse_value_or_ref(need(b, "chi_g_Pa", "band"), "chi_g_Pa",
                                  "band");
    sc.bands.push_back(bs);
  }
  sc.beta_field_csv = j.value("beta_a_field_csv", "");

  const auto& t = need(j, "time", "scenario");
  sc.time.dt = need_num(t, "dt_s", "time");
  sc.time.T_end = need_num(t, "T_end_s", "time");
  sc.time.tol_newton = t.value("tol_newton", 1e-8);
  sc.time.max_newton = t.value("max_newton", 25);
  sc.time.tol_stag = t.value("tol_stag", 1e-5);
  sc.time.max_stag = t.value("max_stag", 50);

  if (j.contains("output")) {
    sc.output.write_vtk = j.at("output").value("write_vtk", false);
    sc.output.vtk_every = j.at("output").value("vtk_every", 1);
  }
  sc.seed = j.value("seed", 1ULL);

  if (j.contains("priors")) {
    for (const auto& p : j.at("priors")) {
      const std::string name = need(p, "name", "prior").get<std::string>();
      const std::string type = need(p, "type", "prior").get<std::string>();
      const std::string unit = p.value("unit", "-");
      double scale = 1.0;
      if (unit == "GPa") {
        scale = kGPa;
      } else if (unit != "-" && unit != "Pa_s" && unit != "Pa") {
        throw ScenarioError("unsupported prior unit '" + unit + "'");
      }
      Prior pr;
      if (type == "normal") {
        pr.type = Prior::Type::Normal;
        pr.a = need_num(p, "mean", "prior") * scale;
        pr.b = need_num(p, "sd", "prior") * scale;
        if (pr.b <= 0.0) {
          throw ScenarioError("prior sd must be positive for '" + name + "'");
        }
      } else if (type == "uniform") {
        pr.type = Prior::Type::Uniform;
        pr.a = need_num(p, "lo", "prior") * scale;
        pr.b = need_num(p, "hi", "prior") * scale;
        if (pr.b <= pr.a) {
          throw ScenarioError("prior needs lo < hi for '" + name + "'");
        }
      } else {
        throw ScenarioError("prior type must be normal or uniform");
      }
      pr.positive = p.value("positive", false);
      if (p.contains("upper")) {
        pr.upper = need_num(p, "upper", "prior") * scale;
      }
      sc.priors.names.push_back(name);
      sc.priors.priors.push_back(pr);
      sc.prior_units.push_back(unit);
    }
  }

  if (j.contains("kl")) {
    const auto& k = j.at("kl");
    KLConfig kc;
    kc.mean = need_num(k, "mean", "kl");
    kc.sigma = need_num(k, "sigma", "kl");
    kc.zeta1 = need_num(k, "zeta1", "kl");
    kc.zeta2 = need_num(k, "zeta2", "kl");
    kc.phi = need_num(k, "phi", "kl");
    sc.kl = kc;
  }

  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ScenarioError("cannot open scenario file: " + path);
  }
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ScenarioError("scenario JSON parse error in " + path + ": " +
                        e.what());
  }
  return parse_scenario(j);
}

ordered_json Scenario::to_json() const {
  ordered_json j;
  j["name"] = name;
  if (!description.empty()) {
    j["description"] = description;
  }
  j["domain"] = {{"Lx_m", Lx}, {"Ly_m", Ly}, {"nx", nx}, {"ny", ny}};
  j["notches"] = ordered_json::array();
  for (const auto& n : notches) {
    j["notches"].push_back({{"x0_m", n.p0.x()},
                            {"y0_m", n.p0.y()},
                            {"x1_m", n.p1.x()},
                            {"y1_m", n.p1.y()},
                            {"inject", n.inject}});
  }
  j["injection_rate_m2_s"] = injection_rate;
  j["material"] = {{"mu_GPa", material.mu / kGPa},
                   {"K_GPa", material.K_bulk / kGPa},
                   {"M_GPa", material.M_biot / kGPa},
                   {"B", material.B_biot},
                   {"K_D_m2", material.K_D},
                   {"zeta", material.zeta_perm},
                   {"eta_F_Pa_s", material.eta_F},
                   {"G_c_GPa", material.G_c / kGPa},
                   {"eta_visc_Pa_s", material.eta_visc},
                   {"kappa", material.kappa},
                   {"l_m", material.l}};
  j["layers"]["axis"] = layer_axis == RegionSpec::Axis::X ? "x" : "y";
  j["layers"]["bands"] = ordered_json::array();
  for (const auto& b : bands) {
    j["layers"]["bands"].push_back({{"to_m", b.to_m},
                                    {"phi_a_deg", b.phi_a / kDeg},
                                    {"phi_g_deg", b.phi_g / kDeg},
                                    {"beta_a", dump_value_or_ref(b.beta_a)},
                                    {"beta_g", dump_value_or_ref(b.beta_g)},
                                    {"chi_a_Pa", dump_value_or_ref(b.chi_a)},
                                    {"chi_g_Pa", dump_value_or_ref(b.chi_g)}});
  }
  if (!beta_field_csv.empty()) {
    j["beta_a_field_csv"] = beta_field_csv;
  }
  j["time"] = {{"dt_s", time.dt},
               {"T_end_s", time.T_end},
               {"tol_newton", time.tol_newton},
               {"max_newton", time.max_newton},
               {"tol_stag", time.tol_stag},
               {"max_stag", time.max_stag}};
  j["output"] = {{"write_vtk", output.write_vtk},
                 {"vtk_every", output.vtk_every}};
  j["seed"] = seed;
  if (priors.size() > 0) {
    j["priors"] = ordered_json::array();
    for (int i = 0; i < priors.size(); ++i) {
      const Prior& p = priors.priors[i];
      const double scale = prior_units[i] == "GPa" ? kGPa : 1.0;
      ordered_json pj;
      pj["name"] = priors.names[i];
      if (p.type == Prior::Type::Normal) {
        pj["type"] = "normal";
        pj["mean"] = p.a / scale;
        pj["sd"] = p.b / scale;
      } else {
        pj["type"] = "uniform";
        pj["lo"] = p.a / scale;
        pj["hi"] = p.b / scale;
      }
      pj["unit"] = prior_units[i];
      pj["positive"] = p.positive;
      if (std::isfinite(p.upper)) {
        pj["upper"] = p.upper / scale;
      }
      j["priors"].push_back(pj);
    }
  }
  if (kl) {
    j["kl"] = {{"mean", kl->mean},
               {"sigma", kl->sigma},
               {"zeta1", kl->zeta1},
               {"zeta2", kl->zeta2},
               {"phi", kl->phi}};
  }
  return j;
}

FemModel build_model(const Scenario& sc, const ParamOverrides& overrides,
                     bool force_aniso_path) {
  RegionSpec regions;
  regions.axis = sc.layer_axis;
  for (std::size_t i = 0; i + 1 < sc.bands.size(); ++i) {
    regions.cuts.push_back(sc.bands[i].to_m);
  }
  Mesh mesh = build_structured_mesh(sc.Lx, sc.Ly, sc.nx, sc.ny, regions);

  const MaterialParams mp = apply_material_overrides(sc.material, overrides);

  std::map<std::string, double> refs;
  for (const auto& [k, v] : overrides) {
    refs[k] = v;
  }
  std::vector<FiberFrame> frames;
  frames.reserve(sc.bands.size());
  for (const auto& b : sc.bands) {
    frames.push_back(FiberFrame::from_angles(
        b.phi_a, b.phi_g, b.beta_a.resolve(refs), b.beta_g.resolve(refs),
        b.chi_a.resolve(refs), b.chi_g.resolve(refs)));
  }

  BoundaryConditions bc;
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    if (mesh.on_boundary(n)) {
      bc.fixed_u_nodes.push_back(n);
      bc.fixed_p_nodes.push_back(n);
    }
  }

  const double half_h = 0.5 * mesh.h_min;
  std::set<int> notch_nodes;
  std::set<int> notch_elems;
  std::set<int> injection_elems;
  for (const auto& notch : sc.notches) {
    for (int n = 0; n < mesh.n_nodes(); ++n) {
      if (point_segment_distance(mesh.nodes[n], notch.p0, notch.p1) <=
          half_h) {
        notch_nodes.insert(n);
      }
    }
    for (int e = 0; e < mesh.n_elems(); ++e) {
      const int i = e % mesh.nx;
      const int jrow = e / mesh.nx;
      const double x0 = i * mesh.hx, x1 = (i + 1) * mesh.hx;
      const double y0 = jrow * mesh.hy, y1 = (jrow + 1) * mesh.hy;
      if (segment_intersects_rect(notch.p0, notch.p1, x0, x1, y0, y1)) {
        notch_elems.insert(e);
        if (notch.inject) {
          injection_elems.insert(e);
        }
      }
    }
  }
  bc.notch_d_nodes.assign(notch_nodes.begin(), notch_nodes.end());
  bc.notch_elems.assign(notch_elems.begin(), notch_elems.end());
  bc.injection_elems.assign(injection_elems.begin(), injection_elems.end());
  if (!bc.injection_elems.empty()) {
    const double area =
        static_cast<double>(bc.injection_elems.size()) * mesh.hx * mesh.hy;
    bc.r_F = sc.injection_rate / area;
  }

  FemModel model(std::move(mesh), mp, std::move(frames), std::move(bc),
                 force_aniso_path);
  return model;
}

}  // namespace porofrac
