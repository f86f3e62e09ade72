#include "porofrac/klfield.hpp"

#include <gtest/gtest.h>

#include "porofrac/bayes.hpp"

using namespace porofrac;

namespace {

KLConfig example_kernel() {
  KLConfig kc;
  kc.mean = 55.0;
  kc.sigma = 5.0;
  kc.zeta1 = 0.1;
  kc.zeta2 = 0.1;
  kc.phi = 0.95;
  return kc;
}

}  // namespace

TEST(KLField, ZeroDrawsGiveMeanField) {
  const Mesh mesh = build_structured_mesh(80.0, 80.0, 8, 8);
  const KLField field = kl_solve(example_kernel(), mesh);
  const Eigen::VectorXd xi = Eigen::VectorXd::Zero(field.n_kl);
  const Eigen::VectorXd out = kl_realize(field, xi);
  for (int e = 0; e < out.size(); ++e) {
    EXPECT_DOUBLE_EQ(out[e], 55.0);
  }
}

TEST(KLField, EigenvaluesSortedNonnegativeAndTruncationMinimal) {
  const Mesh mesh = build_structured_mesh(80.0, 80.0, 12, 12);
  const KLConfig kc = example_kernel();
  const KLField field = kl_solve(kc, mesh);
  ASSERT_GT(field.n_kl, 0);
  for (int i = 0; i < field.eigenvalues.size(); ++i) {
    EXPECT_GE(field.eigenvalues[i], 0.0);
    if (i > 0) {
      EXPECT_LE(field.eigenvalues[i], field.eigenvalues[i - 1]);
    }
  }
  EXPECT_GE(field.retained_fraction(), kc.phi);
  if (field.n_kl > 1) {
    const double without_last =
        field.eigenvalues.head(field.n_kl - 1).sum() / field.total_variance;
    EXPECT_LT(without_last, kc.phi);
  }
}

TEST(KLField, DiscreteVarianceIsKernelDiagonal) {
  // the full (untruncated) decomposition reproduces Cov(x,x) = sigma^2
  const Mesh mesh = build_structured_mesh(80.0, 80.0, 10, 10);
  KLConfig kc = example_kernel();
  kc.phi = 1.0;
  const KLField field = kl_solve(kc, mesh);
  EXPECT_EQ(field.n_kl, field.eigenvalues.size());
  for (int e = 0; e < mesh.n_elems(); ++e) {
    EXPECT_NEAR(field.truncated_variance(e), kc.sigma * kc.sigma,
                1e-8 * kc.sigma * kc.sigma);
  }
}

TEST(KLField, MonteCarloVarianceFullExpansion) {
  const Mesh mesh = build_structured_mesh(80.0, 80.0, 8, 8);
  KLConfig kc = example_kernel();
  kc.phi = 1.0;
  const KLField field = kl_solve(kc, mesh);

  RngStream rng(substream_seed(99, 3));
  const int draws = 10000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(mesh.n_elems());
  Eigen::VectorXd sum2 = Eigen::VectorXd::Zero(mesh.n_elems());
  Eigen::VectorXd xi(field.n_kl);
  for (int k = 0; k < draws; ++k) {
    for (int i = 0; i < field.n_kl; ++i) {
      xi[i] = rng.normal();
    }
    const Eigen::VectorXd f = kl_realize(field, xi);
    sum += f;
    sum2 += f.cwiseProduct(f);
  }
  const double s2 = kc.sigma * kc.sigma;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const double mean = sum[e] / draws;
    const double var = sum2[e] / draws - mean * mean;
    EXPECT_NEAR(var, s2, 0.05 * s2);
    EXPECT_NEAR(mean, kc.mean, 0.05 * kc.mean);
  }
}

TEST(KLField, TruncatedVarianceBracket) {
  const Mesh mesh = build_structured_mesh(80.0, 80.0, 16, 16);
  const KLConfig kc = example_kernel();
  const KLField field = kl_solve(kc, mesh);
  const double s2 = kc.sigma * kc.sigma;
  // pointwise the truncation can only lose variance; on average it
  // keeps exactly the retained eigenvalue fraction
  double mean_var = 0.0;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const double v = field.truncated_variance(e);
    EXPECT_LE(v, s2 * (1.0 + 1e-9));
    mean_var += v;
  }
  mean_var /= mesh.n_elems();
  EXPECT_NEAR(mean_var, field.retained_fraction() * s2, 1e-8 * s2);
  EXPECT_GE(mean_var, kc.phi * s2 * (1.0 - 1e-9));
}

TEST(KLField, InvalidKernelThrows) {
  const Mesh mesh = build_structured_mesh(1.0, 1.0, 2, 2);
  KLConfig bad = example_kernel();
  bad.zeta1 = 0.0;
  EXPECT_THROW(kl_solve(bad, mesh), std::invalid_argument);
}

TEST(KLField, ZeroSigmaGivesConstantField) {
  const Mesh mesh = build_structured_mesh(1.0, 1.0, 4, 4);
  KLConfig kc = example_kernel();
  kc.sigma = 0.0;
  const KLField field = kl_solve(kc, mesh);
  EXPECT_EQ(field.n_kl, 0);
  const Eigen::VectorXd out = kl_realize(field, Eigen::VectorXd::Zero(0));
  for (int e = 0; e < out.size(); ++e) {
    EXPECT_DOUBLE_EQ(out[e], kc.mean);
  }
}
