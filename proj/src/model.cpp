#include "porofrac/model.hpp"

#include <cmath>
#include <stdexcept>

namespace porofrac {

FieldState FieldState::zero(int n_nodes, int n_elems) {
  FieldState s;
  s.u = Eigen::VectorXd::Zero(2 * n_nodes);
  s.p = Eigen::VectorXd::Zero(n_nodes);
  s.d = Eigen::VectorXd::Ones(n_nodes);
  s.H = Eigen::MatrixXd::Zero(n_elems, 4);
  s.commit();
  return s;
}

FemModel::FemModel(Mesh mesh, MaterialParams mp,
                   std::vector<FiberFrame> frames, BoundaryConditions bc,
                   bool force_aniso_path)
    : mesh_(std::move(mesh)),
      mp_(mp),
      frames_(std::move(frames)),
      bc_(std::move(bc)) {
  mp_.validate();
  if (frames_.empty()) {
    frames_.push_back(FiberFrame::isotropic());
  }
  bool any_aniso = false;
  for (const auto& f : frames_) {
    any_aniso = any_aniso || f.anisotropic();
  }
  aniso_path_ = force_aniso_path || any_aniso;

  qp_ = element_quadrature(mesh_, 0);

  up_fixed_.assign(3 * mesh_.n_nodes(), 0);
  for (int n : bc_.fixed_u_nodes) {
    up_fixed_[3 * n] = 1;
    up_fixed_[3 * n + 1] = 1;
  }
  for (int n : bc_.fixed_p_nodes) {
    up_fixed_[3 * n + 2] = 1;
  }
  d_fixed_.assign(mesh_.n_nodes(), 0);
  for (int n : bc_.notch_d_nodes) {
    d_fixed_[n] = 1;
  }
  elem_injected_.assign(mesh_.n_elems(), 0);
  for (int e : bc_.injection_elems) {
    elem_injected_[e] = 1;
  }
  notch_qp_.assign(mesh_.n_elems() * 4, 0);
  for (int e : bc_.notch_elems) {
    for (int q = 0; q < 4; ++q) {
      notch_qp_[4 * e + q] = 1;
    }
  }
}

void FemModel::set_beta_a_field(Eigen::VectorXd field) {
  if (field.size() != mesh_.n_elems()) {
    throw std::invalid_argument("penalty field size must match element count");
  }
  beta_a_field_ = std::move(field);
  aniso_path_ = true;
}

FiberFrame FemModel::frame_for(int elem) const {
  FiberFrame ff = frames_[mesh_.region[elem] % frames_.size()];
  if (beta_a_field_.size() > 0) {
    ff.beta_a = beta_a_field_[elem];
  }
  return ff;
}

FieldState FemModel::initial_state() const {
  FieldState s = FieldState::zero(mesh_.n_nodes(), mesh_.n_elems());
  for (int n : bc_.notch_d_nodes) {
    s.d[n] = 0.0;
  }
  for (int e = 0; e < mesh_.n_elems(); ++e) {
    for (int q = 0; q < 4; ++q) {
      if (notch_qp_[4 * e + q]) {
        s.H(e, q) = history_seed;
      }
    }
  }
  s.commit();
  return s;
}

SymTensor2 FemModel::strain_at(const QuadPoint& qp, const Eigen::VectorXd& u,
                               const std::array<int, 4>& conn) const {
  Eigen::Matrix<double, 8, 1> ue;
  for (int a = 0; a < 4; ++a) {
    ue(2 * a) = u[2 * conn[a]];
    ue(2 * a + 1) = u[2 * conn[a] + 1];
  }
  const Eigen::Vector3d e = qp.B_u * ue;  // engineering shear
  return {e(0), e(1), 0.5 * e(2)};
}

Eigen::VectorXd FemModel::assemble_residual_up(
    const FieldState& s, double dt, Eigen::VectorXd* magnitudes) const {
  const int nn = mesh_.n_nodes();
  Eigen::VectorXd R = Eigen::VectorXd::Zero(3 * nn);
  if (magnitudes) {
    *magnitudes = Eigen::VectorXd::Zero(3 * nn);
  }
  const double h_e = mesh_.h_min;

  for (int e = 0; e < mesh_.n_elems(); ++e) {
    const auto& conn = mesh_.elems[e];
    const FiberFrame ff = frame_for(e);
    const double r_src = elem_injected_[e] ? bc_.r_F : 0.0;

    Eigen::Matrix<double, 8, 1> Ru = Eigen::Matrix<double, 8, 1>::Zero();
    Eigen::Matrix<double, 4, 1> Rp = Eigen::Matrix<double, 4, 1>::Zero();
    Eigen::Matrix<double, 8, 1> Mu = Eigen::Matrix<double, 8, 1>::Zero();
    Eigen::Matrix<double, 4, 1> Mp = Eigen::Matrix<double, 4, 1>::Zero();

    Eigen::Matrix<double, 4, 1> pe, pe_n, de;
    for (int a = 0; a < 4; ++a) {
      pe(a) = s.p[conn[a]];
      pe_n(a) = s.p_n[conn[a]];
      de(a) = s.d[conn[a]];
    }

    for (const QuadPoint& qp : qp_) {
      const SymTensor2 eps = strain_at(qp, s.u, conn);
      const SymTensor2 eps_n = strain_at(qp, s.u_n, conn);
      double p_q = 0.0, pn_q = 0.0, d_q = 0.0;
      for (int a = 0; a < 4; ++a) {
        p_q += qp.N[a] * pe(a);
        pn_q += qp.N[a] * pe_n(a);
        d_q += qp.N[a] * de(a);
      }
      const Eigen::Vector2d grad_p = qp.B_grad * pe;
      const Eigen::Vector2d grad_d = qp.B_grad * de;

      const SymTensor2 sig =
          total_stress(eps, p_q, d_q, mp_, ff, aniso_path_);
      const Eigen::Vector3d sv(sig.xx, sig.yy, sig.xy);
      Ru += qp.B_u.transpose() * sv * qp.detJw;

      const double storage = (p_q - pn_q) / mp_.M_biot +
                             mp_.B_biot * (eps.trace() - eps_n.trace()) -
                             dt * r_src;
      const SymTensor2 Kp = permeability(eps, d_q, grad_d, mp_, h_e);
      const Eigen::Vector2d flux(Kp.xx * grad_p.x() + Kp.xy * grad_p.y(),
                                 Kp.xy * grad_p.x() + Kp.yy * grad_p.y());
      for (int a = 0; a < 4; ++a) {
        Rp(a) += qp.N[a] * storage * qp.detJw;
      }
      Rp += dt * qp.B_grad.transpose() * flux * qp.detJw;

      if (magnitudes) {
        Mu += qp.B_u.cwiseAbs().transpose() * sv.cwiseAbs() * qp.detJw;
        for (int a = 0; a < 4; ++a) {
          Mp(a) += qp.N[a] * std::abs(storage) * qp.detJw;
        }
        Mp += dt * qp.B_grad.cwiseAbs().transpose() * flux.cwiseAbs() *
              qp.detJw;
      }
    }

    for (int a = 0; a < 4; ++a) {
      const int n = conn[a];
      R[3 * n] += Ru(2 * a);
      R[3 * n + 1] += Ru(2 * a + 1);
      R[3 * n + 2] += Rp(a);
      if (magnitudes) {
        (*magnitudes)[3 * n] += Mu(2 * a);
        (*magnitudes)[3 * n + 1] += Mu(2 * a + 1);
        (*magnitudes)[3 * n + 2] += Mp(a);
      }
    }
  }

  // Outer-boundary Neumann contributions (zero in shipped scenarios).
  if (bc_.traction.squaredNorm() > 0.0 || bc_.boundary_flux != 0.0) {
    auto add_edge = [&](int n0, int n1, double len) {
      for (int n : {n0, n1}) {
        R[3 * n] -= 0.5 * len * bc_.traction.x();
        R[3 * n + 1] -= 0.5 * len * bc_.traction.y();
        R[3 * n + 2] += 0.5 * len * bc_.boundary_flux;
      }
    };
    for (int i = 0; i < mesh_.nx; ++i) {
      add_edge(mesh_.node_id(i, 0), mesh_.node_id(i + 1, 0), mesh_.hx);
      add_edge(mesh_.node_id(i, mesh_.ny), mesh_.node_id(i + 1, mesh_.ny),
               mesh_.hx);
    }
    for (int j = 0; j < mesh_.ny; ++j) {
      add_edge(mesh_.node_id(0, j), mesh_.node_id(0, j + 1), mesh_.hy);
      add_edge(mesh_.node_id(mesh_.nx, j), mesh_.node_id(mesh_.nx, j + 1),
               mesh_.hy);
    }
  }

  for (int i = 0; i < R.size(); ++i) {
    if (up_fixed_[i]) {
      R[i] = 0.0;
    }
  }
  if (!R.allFinite()) {
    throw std::runtime_error("non-finite (u,p) residual");
  }
  return R;
}

Eigen::SparseMatrix<double> FemModel::assemble_tangent_up(const FieldState& s,
                                                          double dt) const {
  const int nn = mesh_.n_nodes();
  const double h_e = mesh_.h_min;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(mesh_.n_elems()) * 144 + 3 * nn);

  auto push = [&](int gi, int gj, double v) {
    if (!up_fixed_[gi] && !up_fixed_[gj]) {
      trips.emplace_back(gi, gj, v);
    }
  };

  for (int e = 0; e < mesh_.n_elems(); ++e) {
    const auto& conn = mesh_.elems[e];
    const FiberFrame ff = frame_for(e);

    Eigen::Matrix<double, 8, 8> Kuu = Eigen::Matrix<double, 8, 8>::Zero();
    Eigen::Matrix<double, 8, 4> Kup = Eigen::Matrix<double, 8, 4>::Zero();
    Eigen::Matrix<double, 4, 8> Kpu = Eigen::Matrix<double, 4, 8>::Zero();
    Eigen::Matrix<double, 4, 4> Kpp = Eigen::Matrix<double, 4, 4>::Zero();

    Eigen::Matrix<double, 4, 1> pe, de;
    for (int a = 0; a < 4; ++a) {
      pe(a) = s.p[conn[a]];
      de(a) = s.d[conn[a]];
    }

    for (const QuadPoint& qp : qp_) {
      const SymTensor2 eps = strain_at(qp, s.u, conn);
      double d_q = 0.0;
      for (int a = 0; a < 4; ++a) {
        d_q += qp.N[a] * de(a);
      }
      const Eigen::Vector2d grad_p = qp.B_grad * pe;
      const Eigen::Vector2d grad_d = qp.B_grad * de;

      const Tensor4Sym C = elasticity_tensor(eps, d_q, mp_, ff, aniso_path_);
      Kuu += qp.B_u.transpose() * C.v * qp.B_u * qp.detJw;

      Eigen::Matrix<double, 4, 1> Nv;
      for (int a = 0; a < 4; ++a) {
        Nv(a) = qp.N[a];
      }
      const Eigen::Vector3d bvec(-mp_.B_biot, -mp_.B_biot, 0.0);
      Kup += (qp.B_u.transpose() * bvec) * Nv.transpose() * qp.detJw;

      const Eigen::Matrix<double, 1, 8> tr_row =
          mp_.B_biot * (qp.B_u.row(0) + qp.B_u.row(1));
      Kpu += Nv * tr_row * qp.detJw;
      const Eigen::Matrix<double, 2, 3> ck = permeability_linearization(
          eps, d_q, grad_d, grad_p, mp_, h_e);
      Kpu -= dt * qp.B_grad.transpose() * ck * qp.B_u * qp.detJw;

      const SymTensor2 Kp = permeability(eps, d_q, grad_d, mp_, h_e);
      Eigen::Matrix2d Kmat;
      Kmat << Kp.xx, Kp.xy, Kp.xy, Kp.yy;
      Kpp += (Nv * Nv.transpose()) / mp_.M_biot * qp.detJw;
      Kpp += dt * qp.B_grad.transpose() * Kmat * qp.B_grad * qp.detJw;
    }

    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        const int na = conn[a], nb = conn[b];
        for (int ca = 0; ca < 2; ++ca) {
          for (int cb = 0; cb < 2; ++cb) {
            push(3 * na + ca, 3 * nb + cb, Kuu(2 * a + ca, 2 * b + cb));
          }
          push(3 * na + ca, 3 * nb + 2, Kup(2 * a + ca, b));
          push(3 * nb + 2, 3 * na + ca, Kpu(b, 2 * a + ca));
        }
        push(3 * na + 2, 3 * nb + 2, Kpp(a, b));
      }
    }
  }

  for (int i = 0; i < 3 * nn; ++i) {
    if (up_fixed_[i]) {
      trips.emplace_back(i, i, 1.0);
    }
  }

  Eigen::SparseMatrix<double> A(3 * nn, 3 * nn);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

std::pair<Eigen::VectorXd, Eigen::SparseMatrix<double>>
FemModel::assemble_d_system(const FieldState& s, double dt) const {
  const int nn = mesh_.n_nodes();
  Eigen::VectorXd R = Eigen::VectorXd::Zero(nn);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(mesh_.n_elems()) * 16 + nn);

  const double l = mp_.l;
  const double eta = mp_.eta_visc;

  for (int e = 0; e < mesh_.n_elems(); ++e) {
    const auto& conn = mesh_.elems[e];
    const FiberFrame ff = frame_for(e);

    // diffusion operator l^2 (I + beta_a M + beta_g G)
    Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
    if (aniso_path_) {
      const SymTensor2& M = ff.M_tensor;
      const SymTensor2& G = ff.G_tensor;
      A(0, 0) += ff.beta_a * M.xx + ff.beta_g * G.xx;
      A(1, 1) += ff.beta_a * M.yy + ff.beta_g * G.yy;
      A(0, 1) += ff.beta_a * M.xy + ff.beta_g * G.xy;
      A(1, 0) = A(0, 1);
    }

    Eigen::Matrix<double, 4, 1> de, de_n;
    for (int a = 0; a < 4; ++a) {
      de(a) = s.d[conn[a]];
      de_n(a) = s.d_n[conn[a]];
    }

    Eigen::Matrix<double, 4, 1> Re = Eigen::Matrix<double, 4, 1>::Zero();
    Eigen::Matrix<double, 4, 4> Ke = Eigen::Matrix<double, 4, 4>::Zero();

    int qi = 0;
    for (const QuadPoint& qp : qp_) {
      double d_q = 0.0, dn_q = 0.0;
      Eigen::Matrix<double, 4, 1> Nv;
      for (int a = 0; a < 4; ++a) {
        Nv(a) = qp.N[a];
        d_q += qp.N[a] * de(a);
        dn_q += qp.N[a] * de_n(a);
      }
      const Eigen::Vector2d grad_d = qp.B_grad * de;
      const double H = s.H(e, qi++);

      const double bulk = dt * (degradation_deriv(d_q, mp_.kappa) * H +
                                (d_q - 1.0)) -
                          eta * (d_q - dn_q);
      Re += Nv * bulk * qp.detJw;
      Re += dt * l * l * qp.B_grad.transpose() * (A * grad_d) * qp.detJw;

      const double mass = dt * (2.0 * (1.0 - mp_.kappa) * H + 1.0) - eta;
      Ke += Nv * Nv.transpose() * mass * qp.detJw;
      Ke += dt * l * l * qp.B_grad.transpose() * A * qp.B_grad * qp.detJw;
    }

    for (int a = 0; a < 4; ++a) {
      if (!d_fixed_[conn[a]]) {
        R[conn[a]] += Re(a);
      }
      for (int b = 0; b < 4; ++b) {
        if (!d_fixed_[conn[a]] && !d_fixed_[conn[b]]) {
          trips.emplace_back(conn[a], conn[b], Ke(a, b));
        }
      }
    }
  }

  for (int i = 0; i < nn; ++i) {
    if (d_fixed_[i]) {
      trips.emplace_back(i, i, 1.0);
    }
  }
  if (!R.allFinite()) {
    throw std::runtime_error("non-finite phase-field residual");
  }
  Eigen::SparseMatrix<double> K(nn, nn);
  K.setFromTriplets(trips.begin(), trips.end());
  return {std::move(R), std::move(K)};
}

FemModel::ResidualNorms FemModel::residual_norms_up(const FieldState& s,
                                                    double dt) const {
  Eigen::VectorXd mag;
  const Eigen::VectorXd R = assemble_residual_up(s, dt, &mag);
  ResidualNorms out;
  double nu = 0.0, np = 0.0;
  for (int n = 0; n < mesh_.n_nodes(); ++n) {
    nu += R[3 * n] * R[3 * n] + R[3 * n + 1] * R[3 * n + 1];
    np += R[3 * n + 2] * R[3 * n + 2];
  }
  out.mech = std::sqrt(nu);
  out.pressure = std::sqrt(np);
  out.magnitude = mag.norm();
  return out;
}

void FemModel::update_history(FieldState& s) const {
  for (int e = 0; e < mesh_.n_elems(); ++e) {
    const auto& conn = mesh_.elems[e];
    const FiberFrame ff = frame_for(e);
    int qi = 0;
    for (const QuadPoint& qp : qp_) {
      const SymTensor2 eps = strain_at(qp, s.u, conn);
      const double D = crack_driving_state(eps, mp_, ff, aniso_path_);
      s.H(e, qi) = porofrac::update_history(s.H(e, qi), D);
      ++qi;
    }
  }
}

void apply_dirichlet(Eigen::SparseMatrix<double>& A, Eigen::VectorXd& b,
                     const std::vector<std::pair<int, double>>& constraints,
                     const Eigen::VectorXd& current) {
  std::vector<signed char> fixed(A.rows(), 0);
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(A.rows());
  for (const auto& [dof, value] : constraints) {
    if (fixed[dof] && delta[dof] != current[dof] - value) {
      throw std::invalid_argument("conflicting Dirichlet values on one dof");
    }
    fixed[dof] = 1;
    delta[dof] = current[dof] - value;  // Newton correction at the dof
  }
  // Move prescribed columns to the right-hand side, then blank rows
  // and columns, keeping an identity diagonal.
  for (int k = 0; k < A.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      const int i = static_cast<int>(it.row());
      const int j = static_cast<int>(it.col());
      if (!fixed[i] && fixed[j]) {
        b[i] -= it.value() * delta[j];
      }
      if (fixed[i] || fixed[j]) {
        it.valueRef() = (i == j) ? 1.0 : 0.0;
      }
    }
  }
  for (const auto& [dof, value] : constraints) {
    (void)value;
    b[dof] = delta[dof];
  }
  A.prune(0.0);
}

}  // namespace porofrac
