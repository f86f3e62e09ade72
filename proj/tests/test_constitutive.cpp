#include "porofrac/constitutive.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace porofrac;

namespace {

MaterialParams table_params() {
  MaterialParams mp;
  mp.mu = 6.65e9;
  mp.K_bulk = 11e9;
  mp.M_biot = 12.5e9;
  mp.B_biot = 0.79;
  mp.K_D = 2e-14;
  mp.zeta_perm = 50.0;
  mp.eta_F = 1e-3;
  mp.G_c = 2.65e6;
  mp.eta_visc = 1e-14;
  mp.kappa = 1e-8;
  mp.l = 4.0;
  return mp;
}

SymTensor2 random_sym(std::mt19937& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

// States clear of the tension/compression branch switches, so the
// energy is differentiable and FD checks are valid.
bool branch_stable(const SymTensor2& eps, const FiberFrame& ff,
                   double margin) {
  const SpectralDecomp sd = spectral_decompose(eps);
  if (std::abs(sd.eig1) < margin || std::abs(sd.eig2) < margin ||
      sd.eig1 - sd.eig2 < margin || std::abs(eps.trace()) < margin) {
    return false;
  }
  const auto [i4, i6] = invariants_aniso(eps, ff.M_tensor, ff.G_tensor);
  return std::abs(i4) > margin && std::abs(i6) > margin;
}

double split_energy(const SymTensor2& eps, double d, const MaterialParams& mp,
                    const FiberFrame& ff) {
  const auto [ip, im] = psi_iso_split(eps, mp);
  const auto [ap, am] = psi_aniso_split(eps, ff);
  return degradation(d, mp.kappa) * (ip + ap) + im + am;
}

}  // namespace

TEST(Degradation, EndpointsAndMidpoint) {
  EXPECT_DOUBLE_EQ(degradation(1.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(degradation(0.0, 1e-8), 1e-8);
  EXPECT_DOUBLE_EQ(degradation(0.5, 0.0), 0.25);
}

TEST(PsiIsoSplit, ZeroAndBiaxial) {
  const MaterialParams mp = table_params();
  auto [p0, m0] = psi_iso_split({0, 0, 0}, mp);
  EXPECT_DOUBLE_EQ(p0, 0.0);
  EXPECT_DOUBLE_EQ(m0, 0.0);

  // equal biaxial tension: I1 = 2e, I2 = 2e^2, the mu terms cancel
  const double e = 1e-3;
  auto [pp, pm] = psi_iso_split({e, e, 0}, mp);
  EXPECT_NEAR(pp, 2.0 * mp.K_bulk * e * e, 1e-6 * pp);
  EXPECT_DOUBLE_EQ(pm, 0.0);

  auto [cp, cm] = psi_iso_split({-e, -e, 0}, mp);
  EXPECT_DOUBLE_EQ(cp, 0.0);
  EXPECT_GT(cm, 0.0);
}

TEST(PsiAnisoSplit, SignRouting) {
  FiberFrame ff = FiberFrame::isotropic();
  auto [z1, z2] = psi_aniso_split({1, 2, 3}, ff);
  EXPECT_DOUBLE_EQ(z1, 0.0);
  EXPECT_DOUBLE_EQ(z2, 0.0);

  ff = FiberFrame::from_angles(0, 0, 0, 0, 10.0, 0.0);
  // a = (1,0): I4 = eps_xx
  auto [tp, tm] = psi_aniso_split({3, 0, 0}, ff);
  EXPECT_DOUBLE_EQ(tp, 45.0);
  EXPECT_DOUBLE_EQ(tm, 0.0);

  std::tie(tp, tm) = psi_aniso_split({-3, 0, 0}, ff);
  EXPECT_DOUBLE_EQ(tp, 0.0);
  EXPECT_DOUBLE_EQ(tm, 45.0);
}

TEST(EffectiveStress, ZeroStrainAndBiaxial) {
  MaterialParams mp = table_params();
  const FiberFrame ff = FiberFrame::isotropic();
  const SymTensor2 s0 = effective_stress({0, 0, 0}, 1.0, mp, ff, false);
  EXPECT_DOUBLE_EQ(s0.norm(), 0.0);

  mp.kappa = 0.0;  // exact biaxial identity needs kappa-free degradation
  const double e = 2e-3;
  const SymTensor2 s = effective_stress({e, e, 0}, 1.0, mp, ff, false);
  EXPECT_NEAR(s.xx, 2.0 * mp.K_bulk * e, 1e-9 * std::abs(s.xx));
  EXPECT_NEAR(s.yy, 2.0 * mp.K_bulk * e, 1e-9 * std::abs(s.yy));
  EXPECT_NEAR(s.xy, 0.0, 1e-9);
}

TEST(EffectiveStress, AnisoPathWithZeroPenaltiesMatchesIso) {
  const MaterialParams mp = table_params();
  const FiberFrame ff = FiberFrame::from_angles(0.6, -0.4, 0, 0, 0, 0);
  std::mt19937 rng(3);
  for (int i = 0; i < 200; ++i) {
    const SymTensor2 eps = random_sym(rng, 1e-2);
    const SymTensor2 a = effective_stress(eps, 0.7, mp, ff, true);
    const SymTensor2 b = effective_stress(eps, 0.7, mp, ff, false);
    EXPECT_DOUBLE_EQ(a.xx, b.xx);
    EXPECT_DOUBLE_EQ(a.yy, b.yy);
    EXPECT_DOUBLE_EQ(a.xy, b.xy);
  }
}

TEST(TotalStress, PressureContribution) {
  const MaterialParams mp = table_params();
  const FiberFrame ff = FiberFrame::isotropic();
  const SymTensor2 s = total_stress({0, 0, 0}, 1.0, 1.0, mp, ff, false);
  EXPECT_DOUBLE_EQ(s.xx, -0.79);
  EXPECT_DOUBLE_EQ(s.yy, -0.79);
  EXPECT_DOUBLE_EQ(s.xy, 0.0);

  MaterialParams mp1 = mp;
  mp1.B_biot = 1.0;
  const double p0 = 3.7e5;
  const SymTensor2 s1 = total_stress({0, 0, 0}, p0, 1.0, mp1, ff, false);
  EXPECT_DOUBLE_EQ(s1.xx, -p0);
}

TEST(StressSplit, CompletenessProperty) {
  // sigma+ + sigma- equals the unsplit stress for any strain
  const MaterialParams mp = table_params();
  std::mt19937 rng(5);
  for (int i = 0; i < 10000; ++i) {
    const SymTensor2 eps = random_sym(rng, 5e-3);
    const auto [ep, em] = split_strain(eps);
    const double i1 = eps.trace();
    const SymTensor2 id = SymTensor2::identity();
    const SymTensor2 sp = mp.K_bulk * macaulay_plus(i1) * id -
                          mp.mu * (macaulay_plus(i1) * id - 2.0 * ep);
    const SymTensor2 sm = mp.K_bulk * macaulay_minus(i1) * id -
                          mp.mu * (macaulay_minus(i1) * id - 2.0 * em);
    const SymTensor2 unsplit =
        mp.K_bulk * i1 * id - mp.mu * (i1 * id - 2.0 * eps);
    const double scale = std::max(unsplit.norm(), 1.0);
    EXPECT_LT((sp + sm - unsplit).norm() / scale, 1e-12);
  }
}

TEST(EffectiveStress, MatchesEnergyDerivativeProperty) {
  const MaterialParams mp = table_params();
  const FiberFrame ff =
      FiberFrame::from_angles(0.5, -0.9, 0, 0, 8e9, 3e9);
  std::mt19937 rng(9);
  const double h = 1e-7;
  int tested = 0;
  while (tested < 300) {
    const SymTensor2 eps = random_sym(rng, 5e-3);
    if (!branch_stable(eps, ff, 2e-4)) {
      continue;
    }
    ++tested;
    const double d = 0.3 + 0.6 * (tested % 7) / 7.0;
    const SymTensor2 sig = effective_stress(eps, d, mp, ff, true);
    for (int b = 0; b < 3; ++b) {
      SymTensor2 ep = eps, em = eps;
      (b == 0 ? ep.xx : b == 1 ? ep.yy : ep.xy) += h;
      (b == 0 ? em.xx : b == 1 ? em.yy : em.xy) -= h;
      const double fd =
          (split_energy(ep, d, mp, ff) - split_energy(em, d, mp, ff)) /
          (2 * h);
      // the off-diagonal perturbation hits both symmetric entries
      const double analytic = b == 0 ? sig.xx : b == 1 ? sig.yy : 2 * sig.xy;
      EXPECT_NEAR(fd, analytic, 1e-5 * std::max(1.0, std::abs(analytic)));
    }
  }
}

TEST(ElasticityTensor, AllTensionClosedForm) {
  MaterialParams mp = table_params();
  mp.kappa = 0.0;
  const FiberFrame ff = FiberFrame::isotropic();
  const Tensor4Sym C = elasticity_tensor({3e-3, 2e-3, 2e-4}, 1.0, mp, ff,
                                         false);
  const Eigen::Matrix3d expected =
      mp.K_bulk * Tensor4Sym::trace_projector().v -
      mp.mu * (Tensor4Sym::trace_projector().v -
               2.0 * Tensor4Sym::identity_sym().v);
  EXPECT_LT((C.v - expected).norm() / expected.norm(), 1e-14);
}

TEST(ElasticityTensor, MatchesStressDerivativeProperty) {
  const MaterialParams mp = table_params();
  const FiberFrame ff = FiberFrame::from_angles(0.5, -0.9, 0, 0, 8e9, 3e9);
  std::mt19937 rng(21);
  const double h = 1e-7;
  int tested = 0;
  while (tested < 200) {
    const SymTensor2 eps = random_sym(rng, 5e-3);
    if (!branch_stable(eps, ff, 2e-4)) {
      continue;
    }
    ++tested;
    const double d = 0.2 + 0.7 * (tested % 5) / 5.0;
    const Tensor4Sym C = elasticity_tensor(eps, d, mp, ff, true);
    const Eigen::Matrix3d J = [&] {
      Eigen::Matrix3d j = C.v;
      j.col(2) *= 2.0;  // strain Jacobian from raw Voigt components
      return j;
    }();
    Eigen::Matrix3d Jfd;
    for (int b = 0; b < 3; ++b) {
      SymTensor2 ep = eps, em = eps;
      (b == 0 ? ep.xx : b == 1 ? ep.yy : ep.xy) += h;
      (b == 0 ? em.xx : b == 1 ? em.yy : em.xy) -= h;
      const SymTensor2 sp = effective_stress(ep, d, mp, ff, true);
      const SymTensor2 sm = effective_stress(em, d, mp, ff, true);
      Jfd(0, b) = (sp.xx - sm.xx) / (2 * h);
      Jfd(1, b) = (sp.yy - sm.yy) / (2 * h);
      Jfd(2, b) = (sp.xy - sm.xy) / (2 * h);
    }
    EXPECT_LT((J - Jfd).norm() / Jfd.norm(), 1e-5);
  }
}

TEST(CrackDrivingState, SignsAndOracle) {
  const MaterialParams mp = table_params();
  const FiberFrame ff = FiberFrame::isotropic();
  EXPECT_DOUBLE_EQ(crack_driving_state({0, 0, 0}, mp, ff, false), 0.0);
  EXPECT_DOUBLE_EQ(crack_driving_state({-1e-3, -2e-3, 0}, mp, ff, false), 0.0);

  const double e = 1e-3;
  const double expected = mp.l / mp.G_c * 2.0 * mp.K_bulk * e * e;
  EXPECT_NEAR(crack_driving_state({e, e, 0}, mp, ff, false), expected,
              1e-9 * expected);
}

TEST(CrackDrivingState, NonNegativeProperty) {
  const MaterialParams mp = table_params();
  const FiberFrame ff = FiberFrame::from_angles(0.7, -0.2, 5, 2, 1e9, 5e8);
  std::mt19937 rng(23);
  for (int i = 0; i < 5000; ++i) {
    const SymTensor2 eps = random_sym(rng, 1e-2);
    EXPECT_GE(crack_driving_state(eps, mp, ff, true), 0.0);
  }
}

TEST(UpdateHistory, RunningMaximum) {
  EXPECT_DOUBLE_EQ(update_history(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(update_history(5.0, 3.0), 5.0);
  EXPECT_DOUBLE_EQ(update_history(3.0, 5.0), 5.0);
}

TEST(CrackDensity, ClosedFormValues) {
  const FiberFrame ff = FiberFrame::isotropic();
  EXPECT_DOUBLE_EQ(crack_density(1.0, {0, 0}, ff, 2.0, false), 0.0);
  EXPECT_DOUBLE_EQ(crack_density(0.0, {0, 0}, ff, 2.0, false), 0.25);
  EXPECT_DOUBLE_EQ(crack_density(1.0, {1, 0}, ff, 2.0, false), 1.0);
}

TEST(CrackDensity, AnisotropicTerm) {
  const FiberFrame ff = FiberFrame::from_angles(0, 0, 3.0, 0, 0, 0);
  // grad d along a: extra beta_a (l/2) |grad d|^2
  EXPECT_DOUBLE_EQ(crack_density(1.0, {1, 0}, ff, 2.0, true), 4.0);
  // grad d normal to a: no anisotropic contribution
  EXPECT_DOUBLE_EQ(crack_density(1.0, {0, 1}, ff, 2.0, true), 1.0);
}

TEST(Permeability, DarcyFloorCases) {
  const MaterialParams mp = table_params();
  const SymTensor2 eps{1e-3, 2e-3, 0};
  const SymTensor2 k1 = permeability(eps, 1.0, {0, 1}, mp, 2.0);
  EXPECT_DOUBLE_EQ(k1.xx, mp.K_D);
  EXPECT_DOUBLE_EQ(k1.yy, mp.K_D);
  EXPECT_DOUBLE_EQ(k1.xy, 0.0);

  const SymTensor2 k2 = permeability(eps, 0.0, {0, 0}, mp, 2.0);
  EXPECT_DOUBLE_EQ(k2.xx, mp.K_D);
  EXPECT_DOUBLE_EQ(k2.yy, mp.K_D);
}

TEST(Permeability, OpenCrackHandValue) {
  const MaterialParams mp = table_params();
  const double e = 1e-3, h_e = 2.0;
  // crack normal along y, opening strain e
  const SymTensor2 K = permeability({0, e, 0}, 0.0, {0, 1}, mp, h_e);
  const double omega = e * h_e;
  const double bracket = omega * omega / (12.0 * mp.eta_F) - mp.K_D;
  ASSERT_GT(bracket, 0.0);
  EXPECT_NEAR(K.xx, mp.K_D + bracket, 1e-12 * K.xx);
  EXPECT_DOUBLE_EQ(K.yy, mp.K_D);
  EXPECT_DOUBLE_EQ(K.xy, 0.0);
}

TEST(Permeability, ClampsKeepPositiveSemidefinite) {
  const MaterialParams mp = table_params();
  std::mt19937 rng(31);
  for (int i = 0; i < 2000; ++i) {
    const SymTensor2 eps = random_sym(rng, 5e-3);
    std::uniform_real_distribution<double> u(0, 1);
    const Eigen::Vector2d gd{u(rng) - 0.5, u(rng) - 0.5};
    const SymTensor2 K = permeability(eps, u(rng), gd, mp, 2.0);
    // eigenvalues of the symmetric 2x2 must stay >= K_D up to the
    // cancellation noise of the dominant crack term
    const double mean = 0.5 * (K.xx + K.yy);
    const double rad = std::hypot(0.5 * (K.xx - K.yy), K.xy);
    EXPECT_GE(mean - rad, mp.K_D - 1e-12 * (mean + rad));
  }
}

TEST(PermeabilityLinearization, ZeroCases) {
  const MaterialParams mp = table_params();
  const SymTensor2 eps{1e-3, 2e-3, 1e-4};
  EXPECT_DOUBLE_EQ(
      permeability_linearization(eps, 1.0, {0, 1}, {1e5, 0}, mp, 2.0).norm(),
      0.0);
  EXPECT_DOUBLE_EQ(
      permeability_linearization(eps, 0.0, {0, 1}, {0, 0}, mp, 2.0).norm(),
      0.0);
}

TEST(PermeabilityLinearization, MatchesFluxDerivative) {
  const MaterialParams mp = table_params();
  const double h_e = 2.0;
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> u(-1, 1);
  const double h = 1e-9;
  int tested = 0;
  while (tested < 200) {
    SymTensor2 eps{5e-3 + 2e-3 * u(rng), 5e-3 + 2e-3 * u(rng),
                   1e-3 * u(rng)};
    const Eigen::Vector2d gd{u(rng), u(rng)};
    if (gd.norm() < 0.1) {
      continue;
    }
    const Eigen::Vector2d n = gd.normalized();
    const double omega = n.dot(eps.apply(n)) * h_e;
    // stay inside the smooth branch of both clamps
    if (omega <= 1e-4 || omega * omega / (12 * mp.eta_F) < 2.0 * mp.K_D) {
      continue;
    }
    ++tested;
    const double d = 0.3;
    const Eigen::Vector2d gp{1e5 * u(rng), 1e5 * u(rng)};
    const Eigen::Matrix<double, 2, 3> ck =
        permeability_linearization(eps, d, gd, gp, mp, h_e);

    auto flux = [&](const SymTensor2& e) -> Eigen::Vector2d {
      const SymTensor2 K = permeability(e, d, gd, mp, h_e);
      return {-(K.xx * gp.x() + K.xy * gp.y()),
              -(K.xy * gp.x() + K.yy * gp.y())};
    };
    Eigen::Matrix<double, 2, 3> fd, analytic;
    for (int b = 0; b < 3; ++b) {
      SymTensor2 ep = eps, em = eps;
      (b == 0 ? ep.xx : b == 1 ? ep.yy : ep.xy) += h;
      (b == 0 ? em.xx : b == 1 ? em.yy : em.xy) -= h;
      fd.col(b) = (flux(ep) - flux(em)) / (2 * h);
      // a tensorial off-diagonal perturbation drives both entries
      analytic.col(b) = (b == 2 ? 2.0 : 1.0) * ck.col(b);
    }
    EXPECT_LT((fd - analytic).norm() / analytic.norm(), 1e-5);
  }
}

TEST(PressureFromContent, LinearRelation) {
  MaterialParams mp = table_params();
  EXPECT_DOUBLE_EQ(pressure_from_content(0.0, 0.0, mp), 0.0);
  const double theta = 0.004;
  EXPECT_NEAR(pressure_from_content(theta, theta / mp.B_biot, mp), 0.0,
              1e-9 * mp.M_biot * theta);
  EXPECT_DOUBLE_EQ(pressure_from_content(0.01, 0.0, mp), 1.25e8);
}

TEST(FluidEnergy, PressureIsThetaDerivative) {
  const MaterialParams mp = table_params();
  const SymTensor2 eps{2e-3, -1e-3, 5e-4};
  const double theta = 0.003, h = 1e-8;
  const double fd = (fluid_energy(eps, theta + h, mp) -
                     fluid_energy(eps, theta - h, mp)) /
                    (2 * h);
  EXPECT_NEAR(fd, pressure_from_content(theta, eps.trace(), mp),
              1e-5 * std::abs(fd));
}
