#ifndef POROFRAC_BAYES_HPP
#define POROFRAC_BAYES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace porofrac {

/// Deterministic random stream: explicit Box-Muller on top of a
/// 64-bit generator, so draws are reproducible independently of the
/// standard library's distribution internals.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}
  double uniform();          // [0, 1)
  double normal();           // standard normal
  std::uint64_t next_u64();

 private:
  std::uint64_t state_;
};

/// Derive independent substream seeds from a master seed.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t salt);

struct Prior {
  enum class Type { Normal, Uniform };
  Type type = Type::Normal;
  double a = 0.0;  // mean or lower bound
  double b = 1.0;  // sd or upper bound
  bool positive = false;
  double upper = std::numeric_limits<double>::infinity();  // hard bound

  bool in_support(double x) const;
  double log_density(double x) const;  // -inf outside support
  double mean() const;
  double variance() const;
  double sample(RngStream& rng) const;  // rejection against support
};

struct PriorSpec {
  std::vector<std::string> names;
  std::vector<Prior> priors;

  int size() const { return static_cast<int>(priors.size()); }
  double log_density(const Eigen::VectorXd& theta) const;
  bool in_support(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd sample(RngStream& rng) const;
};

/// Gaussian likelihood of a model pressure curve against a reference,
/// both normalized by the reference maximum:
///   log L = -(n/2) log(2 pi sigma^2) - zeta/(2 sigma),
/// zeta summed over the n reference entries; model entries missing
/// after an early termination count as zeros.
double log_likelihood_curve(const std::vector<double>& model,
                            const std::vector<double>& reference,
                            double sigma_fidelity);

/// Incremental form of the sample-covariance estimator
///   Cov = (1/k) ( sum_i theta_i theta_i^T - (k+1) mean mean^T ).
class RunningCovariance {
 public:
  void add(const Eigen::VectorXd& theta);
  int count() const { return count_; }
  Eigen::VectorXd mean() const;
  Eigen::MatrixXd value() const;  // requires count >= 2

 private:
  int count_ = 0;
  Eigen::VectorXd s1_;
  Eigen::MatrixXd s2_;
};

/// The same estimator evaluated directly from the full sample set
/// (rows = samples); the independent oracle for the incremental form.
Eigen::MatrixXd covariance_batch(const Eigen::MatrixXd& samples);

enum class SampleFlag : int { FirstStage = 0, SecondStage = 1, Rejected = 2 };

/// lambda_1 = min(1, pi(theta*)/pi(theta)) for the symmetric Gaussian
/// proposal, in log posterior terms; zero when the proposal has zero
/// posterior density.
double dram_first_stage_ratio(double lp_star, double lp_current);

struct DramOptions {
  int n_samples = 1000;
  std::uint64_t seed = 1;
  double gamma_dr = 0.2;     // second-stage proposal scale
  bool adapt = true;
  bool delayed = true;
  int adapt_start = 200;     // samples before adaptation kicks in
  double cov_reg = 1e-10;    // added to the diagonal before Cholesky
  bool log_space = false;    // sample log-parameters instead
};

struct ChainResult {
  Eigen::MatrixXd samples;        // n_samples x n_params (original scale)
  Eigen::VectorXd log_posterior;  // per sample
  std::vector<SampleFlag> flags;
  Eigen::VectorXd theta0;
  int accepted_first = 0;
  int accepted_second = 0;
  int forward_evals = 0;

  double acceptance_rate() const {
    const int n = static_cast<int>(flags.size());
    return n == 0 ? 0.0
                  : static_cast<double>(accepted_first + accepted_second) / n;
  }
  Eigen::VectorXd posterior_mean() const;
  Eigen::VectorXd posterior_sd() const;
};

/// Log-likelihood of a parameter vector (original scale); -inf marks a
/// failed forward run and leads to rejection.
using LogLikelihoodFn = std::function<double(const Eigen::VectorXd&)>;

/// Delayed-rejection adaptive Metropolis. The first-stage proposal is
/// a Gaussian random walk with covariance adapted from the chain
/// history after `adapt_start` samples; a rejected proposal triggers a
/// single second-stage attempt with the covariance scaled by
/// gamma_dr^2. Disabling both switches reduces the sampler to plain
/// Metropolis-Hastings on the identical random stream.
ChainResult dram_sample(const PriorSpec& priors,
                        const LogLikelihoodFn& log_likelihood,
                        const DramOptions& opts);

struct TwoStageResult {
  ChainResult penalty_chain;
  ChainResult material_chain;
  Eigen::VectorXd penalty_means;
};

/// Sequential estimation for anisotropic scenarios: first invert the
/// penalty parameters with the material parameters held at their
/// configured values, then invert the material parameters with the
/// penalties fixed at the stage-one posterior means.
TwoStageResult two_stage_estimation(
    const PriorSpec& penalty_priors, const PriorSpec& material_priors,
    const std::function<double(const Eigen::VectorXd& penalties,
                               const Eigen::VectorXd& materials)>& loglik,
    const Eigen::VectorXd& material_truth, const DramOptions& opts_stage1,
    const DramOptions& opts_stage2);

}  // namespace porofrac

#endif
