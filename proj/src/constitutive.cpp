#include "porofrac/constitutive.hpp"

#include <cmath>
#include <string>

namespace porofrac {

namespace {

void require(bool ok, const char* what) {
  if (!ok) {
    throw std::invalid_argument(std::string("invalid material parameter: ") +
                                what);
  }
}

inline double heaviside_plus(double x) { return x > 0.0 ? 1.0 : 0.0; }

}  // namespace

void MaterialParams::validate() const {
  require(mu > 0.0, "mu > 0");
  require(K_bulk > 0.0, "K > 0");
  require(M_biot > 0.0, "M > 0");
  require(B_biot > 0.0 && B_biot <= 1.0, "0 < B <= 1");
  require(K_D > 0.0, "K_D > 0");
  require(zeta_perm >= 1.0, "zeta >= 1");
  require(eta_F > 0.0, "eta_F > 0");
  require(G_c > 0.0, "G_c > 0");
  require(eta_visc >= 0.0, "eta_visc >= 0");
  require(kappa > 0.0 && kappa < 1.0, "0 < kappa < 1");
  require(l > 0.0, "l > 0");
}

bool MaterialParams::is_valid() const {
  return mu > 0.0 && K_bulk > 0.0 && M_biot > 0.0 && B_biot > 0.0 &&
         B_biot <= 1.0 && K_D > 0.0 && zeta_perm >= 1.0 && eta_F > 0.0 &&
         G_c > 0.0 && eta_visc >= 0.0 && kappa > 0.0 && kappa < 1.0 && l > 0.0;
}

FiberFrame FiberFrame::from_angles(double phi_a, double phi_g, double beta_a,
                                   double beta_g, double chi_a,
                                   double chi_g) {
  FiberFrame ff;
  ff.phi_a = phi_a;
  ff.phi_g = phi_g;
  ff.M_tensor =
      SymTensor2::outer(Eigen::Vector2d(std::cos(phi_a), std::sin(phi_a)));
  ff.G_tensor =
      SymTensor2::outer(Eigen::Vector2d(std::cos(phi_g), std::sin(phi_g)));
  ff.beta_a = beta_a;
  ff.beta_g = beta_g;
  ff.chi_a = chi_a;
  ff.chi_g = chi_g;
  return ff;
}

std::pair<double, double> psi_iso_split(const SymTensor2& eps,
                                        const MaterialParams& mp) {
  const auto [plus, minus] = split_strain(eps);
  const double i1 = eps.trace();
  const double i1p = macaulay_plus(i1);
  const double i1m = macaulay_minus(i1);
  const double i2p = invariants_iso(plus).second;
  const double i2m = invariants_iso(minus).second;
  // delta = 2 (plane problem)
  const double psi_p =
      0.5 * mp.K_bulk * i1p * i1p - mp.mu * (0.5 * i1p * i1p - i2p);
  const double psi_m =
      0.5 * mp.K_bulk * i1m * i1m - mp.mu * (0.5 * i1m * i1m - i2m);
  return {psi_p, psi_m};
}

std::pair<double, double> psi_aniso_split(const SymTensor2& eps,
                                          const FiberFrame& ff) {
  const auto [i4, i6] = invariants_aniso(eps, ff.M_tensor, ff.G_tensor);
  const double i4p = macaulay_plus(i4);
  const double i4m = macaulay_minus(i4);
  const double i6p = macaulay_plus(i6);
  const double i6m = macaulay_minus(i6);
  const double psi_p = 0.5 * ff.chi_a * i4p * i4p + 0.5 * ff.chi_g * i6p * i6p;
  const double psi_m = 0.5 * ff.chi_a * i4m * i4m + 0.5 * ff.chi_g * i6m * i6m;
  return {psi_p, psi_m};
}

namespace {

// sigma_iso_pm = K I1_pm I - mu((2/delta) I1_pm I - 2 eps_pm), delta = 2
inline SymTensor2 stress_iso_branch(double i1_pm, const SymTensor2& eps_pm,
                                    const MaterialParams& mp) {
  const SymTensor2 id = SymTensor2::identity();
  return mp.K_bulk * i1_pm * id - mp.mu * (i1_pm * id - 2.0 * eps_pm);
}

}  // namespace

SymTensor2 effective_stress(const SymTensor2& eps, double d,
                            const MaterialParams& mp, const FiberFrame& ff,
                            bool aniso_path) {
  const auto [eps_p, eps_m] = split_strain(eps);
  const double i1 = eps.trace();
  SymTensor2 s_plus = stress_iso_branch(macaulay_plus(i1), eps_p, mp);
  SymTensor2 s_minus = stress_iso_branch(macaulay_minus(i1), eps_m, mp);
  if (aniso_path) {
    const auto [i4, i6] = invariants_aniso(eps, ff.M_tensor, ff.G_tensor);
    s_plus += ff.chi_a * macaulay_plus(i4) * ff.M_tensor +
              ff.chi_g * macaulay_plus(i6) * ff.G_tensor;
    s_minus += ff.chi_a * macaulay_minus(i4) * ff.M_tensor +
               ff.chi_g * macaulay_minus(i6) * ff.G_tensor;
  }
  return degradation(d, mp.kappa) * s_plus + s_minus;
}

SymTensor2 total_stress(const SymTensor2& eps, double p, double d,
                        const MaterialParams& mp, const FiberFrame& ff,
                        bool aniso_path) {
  SymTensor2 s = effective_stress(eps, d, mp, ff, aniso_path);
  s.xx -= mp.B_biot * p;
  s.yy -= mp.B_biot * p;
  return s;
}

Tensor4Sym elasticity_tensor(const SymTensor2& eps, double d,
                             const MaterialParams& mp, const FiberFrame& ff,
                             bool aniso_path) {
  const auto [proj_p, proj_m] = strain_projectors(eps);
  const double i1 = eps.trace();
  const double hp = heaviside_plus(i1);
  const double hm = 1.0 - hp;
  const Tensor4Sym J = Tensor4Sym::trace_projector();

  Tensor4Sym c_plus = (mp.K_bulk - mp.mu) * hp * J + 2.0 * mp.mu * proj_p;
  Tensor4Sym c_minus = (mp.K_bulk - mp.mu) * hm * J + 2.0 * mp.mu * proj_m;
  if (aniso_path) {
    const auto [i4, i6] = invariants_aniso(eps, ff.M_tensor, ff.G_tensor);
    const Tensor4Sym mm = Tensor4Sym::outer(ff.M_tensor, ff.M_tensor);
    const Tensor4Sym gg = Tensor4Sym::outer(ff.G_tensor, ff.G_tensor);
    const double h4 = heaviside_plus(i4);
    const double h6 = heaviside_plus(i6);
    c_plus += h4 * ff.chi_a * mm + h6 * ff.chi_g * gg;
    c_minus += (1.0 - h4) * ff.chi_a * mm + (1.0 - h6) * ff.chi_g * gg;
  }
  return degradation(d, mp.kappa) * c_plus + c_minus;
}

double crack_driving_state(const SymTensor2& eps, const MaterialParams& mp,
                           const FiberFrame& ff, bool aniso_path) {
  double psi = psi_iso_split(eps, mp).first;
  if (aniso_path) {
    psi += psi_aniso_split(eps, ff).first;
  }
  return mp.l / mp.G_c * psi;
}

double crack_density(double d, const Eigen::Vector2d& grad_d,
                     const FiberFrame& ff, double l, bool aniso_path) {
  const double one_md = 1.0 - d;
  double gamma = one_md * one_md / (2.0 * l) + 0.5 * l * grad_d.squaredNorm();
  if (aniso_path) {
    gamma += ff.beta_a * 0.5 * l * grad_d.dot(ff.M_tensor.apply(grad_d)) +
             ff.beta_g * 0.5 * l * grad_d.dot(ff.G_tensor.apply(grad_d));
  }
  return gamma;
}

SymTensor2 permeability(const SymTensor2& eps, double d,
                        const Eigen::Vector2d& grad_d,
                        const MaterialParams& mp, double h_e) {
  SymTensor2 K = mp.K_D * SymTensor2::identity();
  const double gnorm = grad_d.norm();
  if (gnorm < 1e-8 / mp.l) {
    return K;  // intact region: no oriented crack flow
  }
  const double trans = std::pow(1.0 - d, mp.zeta_perm);
  if (trans == 0.0) {
    return K;
  }
  const Eigen::Vector2d n = grad_d / gnorm;
  const double omega = std::max(0.0, n.dot(eps.apply(n)) * h_e);
  const double bracket =
      std::max(0.0, omega * omega / (12.0 * mp.eta_F) - mp.K_D);
  if (bracket == 0.0) {
    return K;
  }
  const SymTensor2 tangential =
      SymTensor2::identity() - SymTensor2::outer(n);
  return K + trans * bracket * tangential;
}

Eigen::Matrix<double, 2, 3> permeability_linearization(
    const SymTensor2& eps, double d, const Eigen::Vector2d& grad_d,
    const Eigen::Vector2d& p_grad, const MaterialParams& mp, double h_e) {
  Eigen::Matrix<double, 2, 3> ck = Eigen::Matrix<double, 2, 3>::Zero();
  const double gnorm = grad_d.norm();
  if (gnorm < 1e-8 / mp.l) {
    return ck;
  }
  const double trans = std::pow(1.0 - d, mp.zeta_perm);
  if (trans == 0.0) {
    return ck;
  }
  const Eigen::Vector2d n = grad_d / gnorm;
  const double omega = n.dot(eps.apply(n)) * h_e;
  // Both clamps of the permeability flatten the derivative to zero.
  if (omega <= 0.0 ||
      omega * omega / (12.0 * mp.eta_F) - mp.K_D <= 0.0) {
    return ck;
  }
  const SymTensor2 tangential =
      SymTensor2::identity() - SymTensor2::outer(n);
  const SymTensor2 nn = SymTensor2::outer(n);
  const double coef = -trans * omega * h_e / (6.0 * mp.eta_F);
  // C^K_ijk = coef [ (I - n(x)n) (x) (n(x)n) ]_{iljk} gradp_l
  //         = coef (tangential . gradp)_i (n(x)n)_{jk}
  const Eigen::Vector2d tp = tangential.apply(p_grad);
  const Eigen::Vector3d nn_voigt(nn.xx, nn.yy, nn.xy);
  ck = coef * tp * nn_voigt.transpose();
  return ck;
}

}  // namespace porofrac
