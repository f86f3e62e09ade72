#ifndef POROFRAC_MODEL_HPP
#define POROFRAC_MODEL_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <vector>

#include "porofrac/constitutive.hpp"
#include "porofrac/mesh.hpp"

namespace porofrac {

/// Dirichlet sets, injection source, and (unused in the shipped
/// scenarios) outer-boundary Neumann data.
struct BoundaryConditions {
  std::vector<int> fixed_u_nodes;   // u = 0, both components
  std::vector<int> fixed_p_nodes;   // p = 0
  std::vector<int> notch_d_nodes;   // d = 0, persists for all time
  std::vector<int> notch_elems;     // quadrature points seeded with H
  std::vector<int> injection_elems;
  double r_F = 0.0;                        // volumetric source [1/s]
  Eigen::Vector2d traction = {0.0, 0.0};   // outer-boundary traction [Pa]
  double boundary_flux = 0.0;              // outer-boundary fluid flux
};

/// Nodal fields plus per-quadrature-point history. *_n are the
/// converged values of the previous time step.
struct FieldState {
  Eigen::VectorXd u;  // 2 per node
  Eigen::VectorXd p;  // 1 per node
  Eigen::VectorXd d;  // 1 per node
  Eigen::MatrixXd H;  // n_elems x 4

  Eigen::VectorXd u_n, p_n, d_n;

  static FieldState zero(int n_nodes, int n_elems);
  void commit() {
    u_n = u;
    p_n = p;
    d_n = d;
  }
};

/// Discretized problem: mesh, material data per region, constraints,
/// and the cached quadrature geometry (identical for every element of
/// the uniform grid). Owns the dof layout: the (u,p) block interleaves
/// (ux, uy, p) per node; the d system has one dof per node.
class FemModel {
 public:
  FemModel(Mesh mesh, MaterialParams mp, std::vector<FiberFrame> frames,
           BoundaryConditions bc, bool force_aniso_path = false);

  const Mesh& mesh() const { return mesh_; }
  const MaterialParams& material() const { return mp_; }
  const BoundaryConditions& bc() const { return bc_; }
  bool aniso_path() const { return aniso_path_; }
  double h_e() const { return mesh_.h_min; }

  /// Per-element penalty field (KL realization) overriding beta_a.
  void set_beta_a_field(Eigen::VectorXd field);
  const Eigen::VectorXd& beta_a_field() const { return beta_a_field_; }

  FiberFrame frame_for(int elem) const;

  int n_up_dofs() const { return 3 * mesh_.n_nodes(); }
  int n_d_dofs() const { return mesh_.n_nodes(); }
  bool up_fixed(int dof) const { return up_fixed_[dof] != 0; }
  bool d_fixed(int dof) const { return d_fixed_[dof] != 0; }

  /// Initial state: intact material (d = 1 except at the notch, where
  /// d = 0 and H is seeded large), zero displacement and pressure.
  FieldState initial_state() const;

  /// Optional `magnitudes` receives the per-dof sum of absolute
  /// integrand contributions, the scale of assembly roundoff noise.
  Eigen::VectorXd assemble_residual_up(
      const FieldState& s, double dt,
      Eigen::VectorXd* magnitudes = nullptr) const;
  Eigen::SparseMatrix<double> assemble_tangent_up(const FieldState& s,
                                                  double dt) const;

  /// Residual and tangent of the phase-field equation at fixed (u,p)
  /// and fixed history.
  std::pair<Eigen::VectorXd, Eigen::SparseMatrix<double>> assemble_d_system(
      const FieldState& s, double dt) const;

  struct ResidualNorms {
    double mech = 0.0;      // |E_u|
    double pressure = 0.0;  // |E_p|
    double magnitude = 0.0; // assembly magnitude scale (roundoff floor)
  };

  /// Separate norms of the mechanical and pressure residual blocks,
  /// used for the staggered convergence check, plus the magnitude
  /// scale of the assembly sums.
  ResidualNorms residual_norms_up(const FieldState& s, double dt) const;

  /// Crack driving state at every quadrature point of the current
  /// strain field, for history updates.
  void update_history(FieldState& s) const;

  double history_seed = 1e3;  // H at notch quadrature points

 private:
  Mesh mesh_;
  MaterialParams mp_;
  std::vector<FiberFrame> frames_;
  BoundaryConditions bc_;
  bool aniso_path_;
  Eigen::VectorXd beta_a_field_;  // empty unless set

  std::array<QuadPoint, 4> qp_;  // shared geometry (uniform grid)
  std::vector<signed char> up_fixed_;
  std::vector<signed char> d_fixed_;
  std::vector<signed char> elem_injected_;
  std::vector<signed char> notch_qp_;  // n_elems*4, H seeding mask

  SymTensor2 strain_at(const QuadPoint& qp, const Eigen::VectorXd& u,
                       const std::array<int, 4>& conn) const;
};

/// Row/column elimination with prescribed values moved to the
/// right-hand side; constrained rows become identity rows.
void apply_dirichlet(Eigen::SparseMatrix<double>& A, Eigen::VectorXd& b,
                     const std::vector<std::pair<int, double>>& constraints,
                     const Eigen::VectorXd& current);

}  // namespace porofrac

#endif
