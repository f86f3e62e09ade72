#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "porofrac/bayes.hpp"
#include "porofrac/output.hpp"
#include "porofrac/scenario.hpp"
#include "porofrac/solver.hpp"

namespace fs = std::filesystem;
using namespace porofrac;

namespace {

std::string resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) {
    return flag_value;
  }
  if (const char* env = std::getenv("POROFRAC_OUT_DIR")) {
    return env;
  }
  return ".";
}

void configure_threads() {
  if (const char* env = std::getenv("POROFRAC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) {
      Eigen::setNbThreads(n);
    }
  }
}

std::string snapshot_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fields_%05d.vtk", step);
  return buf;
}

FemModel make_model(const Scenario& sc, const ParamOverrides& overrides,
                    bool force_aniso) {
  FemModel model = build_model(sc, overrides, force_aniso);
  if (!sc.beta_field_csv.empty()) {
    model.set_beta_a_field(
        read_cell_field_csv(sc.beta_field_csv, model.mesh().n_elems()));
  }
  return model;
}

int run_forward(const std::string& config, const std::string& out_flag,
                bool force_aniso, bool timing) {
  const Scenario sc = load_scenario(config);
  const fs::path out_dir = resolve_out_dir(out_flag);
  fs::create_directories(out_dir);

  const FemModel model = make_model(sc, {}, force_aniso);
  FieldState state = model.initial_state();

  StepCallback on_step;
  if (sc.output.write_vtk) {
    on_step = [&](int step, double, const FieldState& s) {
      if (step % sc.output.vtk_every == 0) {
        write_vtk((out_dir / snapshot_name(step)).string(), model.mesh(), s);
      }
    };
  }

  const auto t0 = std::chrono::steady_clock::now();
  const ForwardResult result = time_march(model, state, sc.time, on_step);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  write_pressure_csv((out_dir / "pressure.csv").string(), result.curve);
  write_run_summary((out_dir / "summary.json").string(), result, sc.name,
                    sc.time.dt, wall, timing);
  std::cout << "forward: " << result.steps_completed << " steps, termination "
            << termination_name(result.curve.reason) << ", " << wall
            << " s\n";
  return result.curve.reason == Termination::Diverged ? 1 : 0;
}

/// Bind a sampled parameter vector to named overrides and run the
/// forward model; failures map to -inf log-likelihood (rejection).
class ForwardLikelihood {
 public:
  ForwardLikelihood(const Scenario& sc, Observation obs, double sigma)
      : sc_(sc), obs_(std::move(obs)), sigma_(sigma) {}

  double operator()(const std::vector<std::string>& names,
                    const Eigen::VectorXd& theta) const {
    ParamOverrides ov;
    for (std::size_t i = 0; i < names.size(); ++i) {
      ov[names[i]] = theta[static_cast<int>(i)];
    }
    try {
      const FemModel model = make_model(sc_, ov, false);
      FieldState state = model.initial_state();
      const ForwardResult result = time_march(model, state, sc_.time);
      if (result.curve.reason == Termination::Diverged) {
        return -std::numeric_limits<double>::infinity();
      }
      return log_likelihood_curve(result.curve.values, obs_.values, sigma_);
    } catch (const std::exception&) {
      return -std::numeric_limits<double>::infinity();
    }
  }

 private:
  const Scenario& sc_;
  Observation obs_;
  double sigma_;
};

ChainResult empty_chain(int n_params) {
  ChainResult c;
  c.samples.resize(0, n_params);
  c.log_posterior.resize(0);
  return c;
}

void write_chain_outputs(const fs::path& dir, const std::string& stem,
                         const std::vector<std::string>& names,
                         const std::vector<std::string>& units,
                         const PriorSpec& priors, const ChainResult& chain) {
  write_chain_csv((dir / (stem + "_chain.csv")).string(), names, units, chain);
  write_posterior_summary((dir / (stem + "_summary.json")).string(), names,
                          units, priors, chain);
  write_chain_histograms((dir / (stem + "_hist.csv")).string(), names, chain);
}

int run_invert(const std::string& config, const std::string& obs_path,
               int n_samples, std::uint64_t seed, bool seed_given,
               bool two_stage, bool log_space, double sigma, double gamma_dr,
               const std::string& out_flag) {
  const Scenario sc = load_scenario(config);
  if (sc.priors.size() == 0) {
    throw ScenarioError("scenario has no priors block; nothing to invert");
  }
  const Observation obs = read_observation(obs_path);
  if (obs.values.empty()) {
    throw ScenarioError("observation file has no rows");
  }
  for (std::size_t i = 0; i < obs.times.size(); ++i) {
    const double expected = (static_cast<double>(i) + 1.0) * sc.time.dt;
    if (std::abs(obs.times[i] - expected) > 1e-9 * std::max(1.0, expected)) {
      throw ScenarioError(
          "observation time grid does not match the scenario dt");
    }
  }
  const fs::path out_dir = resolve_out_dir(out_flag);
  fs::create_directories(out_dir);

  const ForwardLikelihood fwd(sc, obs, sigma);

  DramOptions opts;
  opts.n_samples = n_samples;
  opts.seed = seed_given ? seed : sc.seed;
  opts.log_space = log_space;
  opts.gamma_dr = gamma_dr;

  if (!two_stage) {
    ChainResult chain =
        n_samples == 0
            ? empty_chain(sc.priors.size())
            : dram_sample(sc.priors,
                          [&](const Eigen::VectorXd& th) {
                            return fwd(sc.priors.names, th);
                          },
                          opts);
    write_chain_outputs(out_dir, "posterior", sc.priors.names, sc.prior_units,
                        sc.priors, chain);
    std::cout << "invert: " << chain.samples.rows() << " samples, acceptance "
              << chain.acceptance_rate() << ", forward evals "
              << chain.forward_evals << "\n";
    return 0;
  }

  // Split priors into penalty parameters (stage I) and material
  // parameters (stage II).
  PriorSpec pen, mat;
  std::vector<std::string> pen_units, mat_units;
  for (int i = 0; i < sc.priors.size(); ++i) {
    if (is_material_param(sc.priors.names[i])) {
      mat.names.push_back(sc.priors.names[i]);
      mat.priors.push_back(sc.priors.priors[i]);
      mat_units.push_back(sc.prior_units[i]);
    } else {
      pen.names.push_back(sc.priors.names[i]);
      pen.priors.push_back(sc.priors.priors[i]);
      pen_units.push_back(sc.prior_units[i]);
    }
  }
  if (pen.size() == 0 || mat.size() == 0) {
    throw ScenarioError(
        "--two-stage needs both penalty and material priors in the config");
  }
  // Stage I holds the material parameters at their configured values.
  auto material_value = [&](const std::string& name) {
    if (name == "mu") return sc.material.mu;
    if (name == "K") return sc.material.K_bulk;
    if (name == "M") return sc.material.M_biot;
    if (name == "B") return sc.material.B_biot;
    if (name == "G_c") return sc.material.G_c;
    return sc.material.eta_F;
  };
  Eigen::VectorXd mat_truth(mat.size());
  for (int i = 0; i < mat.size(); ++i) {
    mat_truth[i] = material_value(mat.names[i]);
  }
  std::vector<std::string> all_names = pen.names;
  for (const auto& n : mat.names) {
    all_names.push_back(n);
  }
  auto loglik = [&](const Eigen::VectorXd& penalties,
                    const Eigen::VectorXd& materials) {
    Eigen::VectorXd theta(pen.size() + mat.size());
    theta.head(pen.size()) = penalties;
    theta.tail(mat.size()) = materials;
    return fwd(all_names, theta);
  };

  DramOptions opts2 = opts;
  opts2.seed = substream_seed(opts.seed, 1000);
  const TwoStageResult res = two_stage_estimation(
      pen, mat, loglik, mat_truth, opts, opts2);

  write_chain_outputs(out_dir, "stage1", pen.names, pen_units, pen,
                      res.penalty_chain);
  write_chain_outputs(out_dir, "stage2", mat.names, mat_units, mat,
                      res.material_chain);
  std::cout << "invert (two-stage): stage1 acceptance "
            << res.penalty_chain.acceptance_rate() << ", stage2 acceptance "
            << res.material_chain.acceptance_rate() << "\n";
  return 0;
}

int run_klfield(const std::string& config, std::uint64_t seed, bool seed_given,
                const std::string& out_flag) {
  const Scenario sc = load_scenario(config);
  if (!sc.kl) {
    throw ScenarioError("scenario has no kl block");
  }
  const fs::path out_dir = resolve_out_dir(out_flag);
  fs::create_directories(out_dir);

  RegionSpec regions;
  regions.axis = sc.layer_axis;
  for (std::size_t i = 0; i + 1 < sc.bands.size(); ++i) {
    regions.cuts.push_back(sc.bands[i].to_m);
  }
  const Mesh mesh = build_structured_mesh(sc.Lx, sc.Ly, sc.nx, sc.ny, regions);
  const KLField field = kl_solve(*sc.kl, mesh);

  RngStream rng(substream_seed(seed_given ? seed : sc.seed, 7));
  Eigen::VectorXd xi(field.n_kl);
  for (int i = 0; i < field.n_kl; ++i) {
    xi[i] = rng.normal();
  }
  const Eigen::VectorXd values = kl_realize(field, xi);

  write_cell_field_csv((out_dir / "field.csv").string(), mesh, values,
                       "beta_a");
  write_cell_field_vtk((out_dir / "field.vtk").string(), mesh, values,
                       "beta_a");
  nlohmann::ordered_json j;
  j["modes_retained"] = field.n_kl;
  j["retained_variance_fraction"] = field.retained_fraction();
  j["total_variance"] = field.total_variance;
  std::ofstream(out_dir / "klfield_summary.json") << j.dump(2) << "\n";
  std::cout << "klfield: " << field.n_kl << " modes, retained fraction "
            << field.retained_fraction() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_threads();
  CLI::App app{
      "2D hydraulic phase-field fracture simulator with DRAM Bayesian "
      "inversion"};
  app.require_subcommand(1);

  std::string config, out_dir, obs_path;
  bool force_aniso = false, timing = false, two_stage = false,
       log_space = false;
  int n_samples = 1000;
  std::uint64_t seed = 1;
  double sigma = 1e-3, gamma_dr = 0.2;

  auto* fwd = app.add_subcommand("forward", "run one forward simulation");
  fwd->add_option("config", config, "scenario JSON")->required();
  fwd->add_option("--out-dir", out_dir, "output directory");
  fwd->add_flag("--force-aniso-path", force_aniso,
                "evaluate the anisotropic terms even when all penalties "
                "are zero");
  fwd->add_flag("--timing", timing, "include wall time in the summary file");

  auto* inv = app.add_subcommand("invert", "DRAM parameter estimation");
  inv->add_option("config", config, "scenario JSON")->required();
  auto* obs_opt =
      inv->add_option("--obs", obs_path, "reference pressure curve CSV")
          ->required();
  inv->add_option("--samples", n_samples, "chain length");
  auto* seed_opt = inv->add_option("--seed", seed, "chain seed");
  inv->add_flag("--two-stage", two_stage,
                "penalties first, then material parameters");
  inv->add_flag("--log-space", log_space, "sample log-parameters");
  inv->add_option("--sigma", sigma, "likelihood fidelity parameter");
  inv->add_option("--gamma-dr", gamma_dr, "second-stage proposal scale");
  inv->add_option("--out-dir", out_dir, "output directory");

  auto* kl = app.add_subcommand("klfield", "realize a penalty random field");
  kl->add_option("config", config, "scenario JSON")->required();
  auto* kseed_opt = kl->add_option("--seed", seed, "realization seed");
  kl->add_option("--out-dir", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fwd->parsed()) {
      return run_forward(config, out_dir, force_aniso, timing);
    }
    if (inv->parsed()) {
      (void)obs_opt;
      return run_invert(config, obs_path, n_samples, seed,
                        seed_opt->count() > 0, two_stage, log_space, sigma,
                        gamma_dr, out_dir);
    }
    if (kl->parsed()) {
      return run_klfield(config, seed, kseed_opt->count() > 0, out_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
