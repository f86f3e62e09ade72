#include "porofrac/bayes.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace porofrac {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t RngStream::next_u64() { return splitmix64(state_); }

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  // Box-Muller, cosine branch only: deterministic one-call-two-draws.
  const double u1 =
      (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
  const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.141592653589793238462643 * u2);
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t salt) {
  std::uint64_t s = master ^ (0xd1b54a32d192ed03ULL * (salt + 1));
  return splitmix64(s);
}

bool Prior::in_support(double x) const {
  if (positive && x <= 0.0) {
    return false;
  }
  if (x > upper) {
    return false;
  }
  if (type == Type::Uniform && (x < a || x > b)) {
    return false;
  }
  return true;
}

double Prior::log_density(double x) const {
  if (!in_support(x)) {
    return kNegInf;
  }
  if (type == Type::Normal) {
    const double z = (x - a) / b;
    return -0.5 * z * z - std::log(b * std::sqrt(2.0 * M_PI));
  }
  return -std::log(b - a);
}

double Prior::mean() const {
  return type == Type::Normal ? a : 0.5 * (a + b);
}

double Prior::variance() const {
  return type == Type::Normal ? b * b : (b - a) * (b - a) / 12.0;
}

double Prior::sample(RngStream& rng) const {
  for (int tries = 0; tries < 1000; ++tries) {
    const double x = type == Type::Normal ? a + b * rng.normal()
                                          : a + (b - a) * rng.uniform();
    if (in_support(x)) {
      return x;
    }
  }
  throw std::runtime_error("prior sampling failed: support too small");
}

double PriorSpec::log_density(const Eigen::VectorXd& theta) const {
  double lp = 0.0;
  for (int i = 0; i < size(); ++i) {
    lp += priors[i].log_density(theta[i]);
  }
  return lp;
}

bool PriorSpec::in_support(const Eigen::VectorXd& theta) const {
  for (int i = 0; i < size(); ++i) {
    if (!priors[i].in_support(theta[i])) {
      return false;
    }
  }
  return true;
}

Eigen::VectorXd PriorSpec::sample(RngStream& rng) const {
  Eigen::VectorXd theta(size());
  for (int i = 0; i < size(); ++i) {
    theta[i] = priors[i].sample(rng);
  }
  return theta;
}

double log_likelihood_curve(const std::vector<double>& model,
                            const std::vector<double>& reference,
                            double sigma_fidelity) {
  const std::size_t n = reference.size();
  double scale = 0.0;
  for (double r : reference) {
    scale = std::max(scale, std::abs(r));
  }
  if (scale == 0.0) {
    scale = 1.0;
  }
  double zeta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = i < model.size() ? model[i] / scale : 0.0;
    const double diff = reference[i] / scale - m;
    zeta += diff * diff;
  }
  const double s2 = sigma_fidelity * sigma_fidelity;
  return -0.5 * static_cast<double>(n) * std::log(2.0 * M_PI * s2) -
         zeta / (2.0 * sigma_fidelity);
}

void RunningCovariance::add(const Eigen::VectorXd& theta) {
  if (count_ == 0) {
    s1_ = Eigen::VectorXd::Zero(theta.size());
    s2_ = Eigen::MatrixXd::Zero(theta.size(), theta.size());
  }
  s1_ += theta;
  s2_ += theta * theta.transpose();
  ++count_;
}

Eigen::VectorXd RunningCovariance::mean() const { return s1_ / count_; }

Eigen::MatrixXd RunningCovariance::value() const {
  if (count_ < 2) {
    throw std::logic_error("covariance needs at least two samples");
  }
  const int k = count_ - 1;
  const Eigen::VectorXd m = mean();
  return (s2_ - static_cast<double>(count_) * m * m.transpose()) / k;
}

Eigen::MatrixXd covariance_batch(const Eigen::MatrixXd& samples) {
  const int n = static_cast<int>(samples.rows());
  if (n < 2) {
    throw std::logic_error("covariance needs at least two samples");
  }
  const int k = n - 1;
  const Eigen::VectorXd m = samples.colwise().mean();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(samples.cols(), samples.cols());
  for (int i = 0; i < n; ++i) {
    acc += samples.row(i).transpose() * samples.row(i);
  }
  return (acc - static_cast<double>(n) * m * m.transpose()) / k;
}

double dram_first_stage_ratio(double lp_star, double lp_current) {
  if (!std::isfinite(lp_star)) {
    return 0.0;
  }
  return std::min(1.0, std::exp(lp_star - lp_current));
}

Eigen::VectorXd ChainResult::posterior_mean() const {
  return samples.colwise().mean();
}

Eigen::VectorXd ChainResult::posterior_sd() const {
  const Eigen::VectorXd m = posterior_mean();
  Eigen::VectorXd sd = Eigen::VectorXd::Zero(samples.cols());
  for (int i = 0; i < samples.rows(); ++i) {
    const Eigen::VectorXd dv = samples.row(i).transpose() - m;
    sd += dv.cwiseProduct(dv);
  }
  const int denom = std::max<int>(1, static_cast<int>(samples.rows()) - 1);
  return (sd / denom).cwiseSqrt();
}

namespace {

/// Parameter-space adapter: identity, or componentwise log transform
/// with the matching prior-density Jacobian.
struct SamplingSpace {
  bool log_space = false;

  Eigen::VectorXd to_sampling(const Eigen::VectorXd& theta) const {
    return log_space ? theta.array().log().matrix() : theta;
  }
  Eigen::VectorXd to_physical(const Eigen::VectorXd& x) const {
    return log_space ? x.array().exp().matrix() : x;
  }
  /// log prior density in the sampling space (includes the Jacobian).
  double log_prior(const PriorSpec& priors, const Eigen::VectorXd& x) const {
    if (!log_space) {
      return priors.log_density(x);
    }
    const Eigen::VectorXd theta = to_physical(x);
    const double lp = priors.log_density(theta);
    return std::isfinite(lp) ? lp + x.sum() : lp;
  }
  double initial_variance(const Prior& p) const {
    if (!log_space) {
      return p.variance();
    }
    // lognormal moment matching around the prior mean
    const double mu = std::max(p.mean(), 1e-12);
    return std::log(1.0 + p.variance() / (mu * mu));
  }
};

double quadratic_form(const Eigen::LLT<Eigen::MatrixXd>& llt,
                      const Eigen::VectorXd& dv) {
  const Eigen::VectorXd y = llt.matrixL().solve(dv);
  return y.squaredNorm();
}

}  // namespace

ChainResult dram_sample(const PriorSpec& priors,
                        const LogLikelihoodFn& log_likelihood,
                        const DramOptions& opts) {
  const int nr = priors.size();
  if (nr == 0) {
    throw std::invalid_argument("empty prior specification");
  }
  SamplingSpace space{opts.log_space};
  RngStream rng_init(substream_seed(opts.seed, 0));
  RngStream rng_prop(substream_seed(opts.seed, 1));
  RngStream rng_acc(substream_seed(opts.seed, 2));
  RngStream rng_dr(substream_seed(opts.seed, 3));

  ChainResult chain;
  chain.samples.resize(opts.n_samples, nr);
  chain.log_posterior.resize(opts.n_samples);
  chain.flags.reserve(opts.n_samples);

  // theta^0 ~ prior
  Eigen::VectorXd theta = priors.sample(rng_init);
  chain.theta0 = theta;
  Eigen::VectorXd x = space.to_sampling(theta);
  double lp_prior = space.log_prior(priors, x);
  double lp_like = log_likelihood(theta);
  ++chain.forward_evals;
  double lp = lp_prior + lp_like;

  Eigen::MatrixXd V0 = Eigen::MatrixXd::Zero(nr, nr);
  for (int i = 0; i < nr; ++i) {
    V0(i, i) = space.initial_variance(priors.priors[i]);
  }
  Eigen::LLT<Eigen::MatrixXd> prop_llt(
      (V0 + opts.cov_reg * Eigen::MatrixXd::Identity(nr, nr)).eval());
  if (prop_llt.info() != Eigen::Success) {
    throw std::runtime_error("initial proposal covariance not positive");
  }

  RunningCovariance cov;
  cov.add(x);

  auto posterior_at = [&](const Eigen::VectorXd& xc,
                          double& lp_out) -> Eigen::VectorXd {
    const double lpr = space.log_prior(priors, xc);
    if (!std::isfinite(lpr)) {
      lp_out = kNegInf;
      return space.to_physical(xc);
    }
    const Eigen::VectorXd th = space.to_physical(xc);
    const double ll = log_likelihood(th);
    ++chain.forward_evals;
    lp_out = std::isfinite(ll) ? lpr + ll : kNegInf;
    return th;
  };

  for (int k = 0; k < opts.n_samples; ++k) {
    Eigen::VectorXd z(nr);
    for (int i = 0; i < nr; ++i) {
      z[i] = rng_prop.normal();
    }
    const Eigen::VectorXd step = prop_llt.matrixL() * z;
    const Eigen::VectorXd x_star = x + step;

    double lp_star;
    const Eigen::VectorXd theta_star = posterior_at(x_star, lp_star);

    // Symmetric Gaussian proposal: the phi ratio of the first stage
    // cancels and lambda_1 reduces to the posterior ratio. A proposal
    // outside the support has zero density and zero ratio.
    const double lambda1 = dram_first_stage_ratio(lp_star, lp);
    const double rv1 = rng_acc.uniform();
    SampleFlag flag = SampleFlag::Rejected;
    if (rv1 < lambda1) {
      x = x_star;
      theta = theta_star;
      lp = lp_star;
      flag = SampleFlag::FirstStage;
      ++chain.accepted_first;
    } else if (opts.delayed) {
      Eigen::VectorXd z2(nr);
      for (int i = 0; i < nr; ++i) {
        z2[i] = rng_dr.normal();
      }
      const Eigen::VectorXd step2 = prop_llt.matrixL() * z2;
      const Eigen::VectorXd x_dr = x + opts.gamma_dr * step2;
      double lp_dr;
      const Eigen::VectorXd theta_dr = posterior_at(x_dr, lp_dr);

      if (std::isfinite(lp_dr)) {
        // lambda_2 per the delayed-rejection formula; the first-stage
        // proposal densities around theta** and theta^{k-1} do not
        // cancel and are evaluated explicitly.
        const double lambda1_from_dr = dram_first_stage_ratio(lp_star, lp_dr);
        const double log_phi_num =
            -0.5 * quadratic_form(prop_llt, x_star - x_dr);
        const double log_phi_den = -0.5 * quadratic_form(prop_llt, step);
        double log_num = lp_dr + log_phi_num;
        double log_den = lp + log_phi_den;
        const double one_minus_l1_num = 1.0 - lambda1_from_dr;
        const double one_minus_l1_den = 1.0 - lambda1;
        if (one_minus_l1_num <= 0.0) {
          log_num = kNegInf;
        } else {
          log_num += std::log(one_minus_l1_num);
        }
        log_den += std::log(one_minus_l1_den);
        const double lambda2 = std::min(1.0, std::exp(log_num - log_den));
        const double rv2 = rng_dr.uniform();
        if (rv2 < lambda2) {
          x = x_dr;
          theta = theta_dr;
          lp = lp_dr;
          flag = SampleFlag::SecondStage;
          ++chain.accepted_second;
        }
      } else {
        rng_dr.uniform();  // keep the stream aligned on failed proposals
      }
    }

    chain.samples.row(k) = theta.transpose();
    chain.log_posterior[k] = lp;
    chain.flags.push_back(flag);

    cov.add(x);
    if (opts.adapt && k + 1 >= opts.adapt_start) {
      const Eigen::MatrixXd V =
          cov.value() + opts.cov_reg * Eigen::MatrixXd::Identity(nr, nr);
      Eigen::LLT<Eigen::MatrixXd> llt(V);
      if (llt.info() == Eigen::Success) {
        prop_llt = llt;
      }
      // a failed factorization keeps the previous proposal
    }
  }
  return chain;
}

TwoStageResult two_stage_estimation(
    const PriorSpec& penalty_priors, const PriorSpec& material_priors,
    const std::function<double(const Eigen::VectorXd&,
                               const Eigen::VectorXd&)>& loglik,
    const Eigen::VectorXd& material_truth, const DramOptions& opts_stage1,
    const DramOptions& opts_stage2) {
  TwoStageResult out;
  out.penalty_chain = dram_sample(
      penalty_priors,
      [&](const Eigen::VectorXd& pen) { return loglik(pen, material_truth); },
      opts_stage1);
  out.penalty_means = out.penalty_chain.posterior_mean();
  out.material_chain = dram_sample(
      material_priors,
      [&](const Eigen::VectorXd& mat) {
        return loglik(out.penalty_means, mat);
      },
      opts_stage2);
  return out;
}

}  // namespace porofrac
