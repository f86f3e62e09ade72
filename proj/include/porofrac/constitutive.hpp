#ifndef POROFRAC_CONSTITUTIVE_HPP
#define POROFRAC_CONSTITUTIVE_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>

#include "porofrac/tensor.hpp"

namespace porofrac {

/// Physical parameter set, all SI (Pa, m, s). The elastic pair is
/// (mu, K) rather than (mu, lambda) so every entry is positive.
struct MaterialParams {
  double mu = 0.0;         // shear modulus [Pa]
  double K_bulk = 0.0;     // bulk modulus [Pa]
  double M_biot = 0.0;     // Biot modulus [Pa]
  double B_biot = 0.0;     // Biot coefficient [-]
  double K_D = 0.0;        // intrinsic permeability [m^2]
  double zeta_perm = 1.0;  // permeability transition exponent [-]
  double eta_F = 0.0;      // dynamic fluid viscosity [Pa s]
  double G_c = 0.0;        // Griffith energy release rate [Pa m]
  double eta_visc = 0.0;   // crack viscosity [Pa s]
  double kappa = 0.0;      // stabilization parameter [-]
  double l = 0.0;          // regularization length scale [m]

  void validate() const;
  bool is_valid() const;
};

/// Fiber directions and penalty-like parameters for one region.
/// beta = chi = 0 recovers the isotropic model exactly.
struct FiberFrame {
  double phi_a = 0.0;  // fiber angle of family a [rad]
  double phi_g = 0.0;  // fiber angle of family g [rad]
  SymTensor2 M_tensor = {1.0, 0.0, 0.0};  // a (x) a
  SymTensor2 G_tensor = {1.0, 0.0, 0.0};  // g (x) g
  double beta_a = 0.0;  // phase-field penalty [-]
  double beta_g = 0.0;
  double chi_a = 0.0;  // elastic penalty [Pa]
  double chi_g = 0.0;

  static FiberFrame from_angles(double phi_a, double phi_g, double beta_a,
                                double beta_g, double chi_a, double chi_g);
  static FiberFrame isotropic() { return from_angles(0, 0, 0, 0, 0, 0); }

  bool anisotropic() const {
    return beta_a != 0.0 || beta_g != 0.0 || chi_a != 0.0 || chi_g != 0.0;
  }
};

/// g(d) = (1-kappa) d^2 + kappa. In this model d=1 is intact and d=0
/// fully broken, so g degrades toward kappa as the crack develops.
inline double degradation(double d, double kappa) {
  return (1.0 - kappa) * d * d + kappa;
}

inline double degradation_deriv(double d, double kappa) {
  return 2.0 * (1.0 - kappa) * d;
}

/// Tension/compression parts of the isotropic strain energy,
/// psi_iso_pm = (K/2)(I1_pm)^2 - mu((I1_pm)^2/2 - I2_pm), evaluated on
/// the Macaulay-split invariants.
std::pair<double, double> psi_iso_split(const SymTensor2& eps,
                                        const MaterialParams& mp);

/// Tension/compression parts of the fiber energy,
/// psi_aniso_pm = chi_a/2 (I4_pm)^2 + chi_g/2 (I6_pm)^2.
std::pair<double, double> psi_aniso_split(const SymTensor2& eps,
                                          const FiberFrame& ff);

/// Effective (Terzaghi) stress: the tensile branch is degraded, the
/// compressive branch is not. `aniso_path` forces evaluation of the
/// fiber terms even when all penalties are zero.
SymTensor2 effective_stress(const SymTensor2& eps, double d,
                            const MaterialParams& mp, const FiberFrame& ff,
                            bool aniso_path);

/// sigma = sigma_eff - B p I.
SymTensor2 total_stress(const SymTensor2& eps, double p, double d,
                        const MaterialParams& mp, const FiberFrame& ff,
                        bool aniso_path);

/// Consistent tangent d sigma_eff / d eps in Voigt form.
Tensor4Sym elasticity_tensor(const SymTensor2& eps, double d,
                             const MaterialParams& mp, const FiberFrame& ff,
                             bool aniso_path);

/// Crack driving state D = (l/G_c)(psi_iso+ + psi_aniso+) >= 0.
double crack_driving_state(const SymTensor2& eps, const MaterialParams& mp,
                           const FiberFrame& ff, bool aniso_path);

/// History field update: running maximum enforcing irreversibility.
inline double update_history(double H_old, double D_new) {
  return D_new > H_old ? D_new : H_old;
}

/// Regularized crack surface density per unit volume.
double crack_density(double d, const Eigen::Vector2d& grad_d,
                     const FiberFrame& ff, double l, bool aniso_path);

/// Permeability tensor: Darcy floor plus a Poiseuille-type crack term
/// oriented by the phase-field gradient. The crack term is dropped
/// when |grad d| is below the gradient floor 1e-8/l; the aperture and
/// the Poiseuille bracket are clamped at zero to keep the tensor
/// positive semidefinite beyond the Darcy floor.
SymTensor2 permeability(const SymTensor2& eps, double d,
                        const Eigen::Vector2d& grad_d,
                        const MaterialParams& mp, double h_e);

/// d F / d eps with F = -K grad p, condensed to a 2x3 Voigt array
/// (row i, column = strain component). Zero whenever the crack term
/// of the permeability is inactive or clamped.
Eigen::Matrix<double, 2, 3> permeability_linearization(
    const SymTensor2& eps, double d, const Eigen::Vector2d& grad_d,
    const Eigen::Vector2d& p_grad, const MaterialParams& mp, double h_e);

/// p = theta M - M B tr(eps).
inline double pressure_from_content(double theta, double tr_eps,
                                    const MaterialParams& mp) {
  return theta * mp.M_biot - mp.M_biot * mp.B_biot * tr_eps;
}

/// W_fluid = (M/2)(B tr(eps) - theta)^2; only its pressure derivative
/// enters the solver, the value is exposed for testing.
inline double fluid_energy(const SymTensor2& eps, double theta,
                           const MaterialParams& mp) {
  const double q = mp.B_biot * eps.trace() - theta;
  return 0.5 * mp.M_biot * q * q;
}

}  // namespace porofrac

#endif
