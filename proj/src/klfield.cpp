#include "porofrac/klfield.hpp"

#include <cmath>
#include <stdexcept>

namespace porofrac {

double KLField::truncated_variance(int e) const {
  double v = 0.0;
  for (int i = 0; i < n_kl; ++i) {
    const double m = modes(e, i);
    v += eigenvalues[i] * m * m;
  }
  return v;
}

KLField kl_solve(const KLConfig& config, const Mesh& mesh) {
  if (config.sigma < 0.0 || config.zeta1 <= 0.0 || config.zeta2 <= 0.0 ||
      config.phi <= 0.0 || config.phi > 1.0) {
    throw std::invalid_argument("invalid KL kernel parameters");
  }
  const int ne = mesh.n_elems();
  Eigen::MatrixXd C(ne, ne);
  std::vector<Eigen::Vector2d> pts(ne);
  for (int e = 0; e < ne; ++e) {
    const Eigen::Vector2d c = mesh.centroid(e);
    pts[e] = {c.x() / mesh.Lx, c.y() / mesh.Ly};
  }
  const double s2 = config.sigma * config.sigma;
  for (int i = 0; i < ne; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double dx = pts[i].x() - pts[j].x();
      const double dy = pts[i].y() - pts[j].y();
      const double v =
          s2 * std::exp(-dx * dx / config.zeta1 - dy * dy / config.zeta2);
      C(i, j) = v;
      C(j, i) = v;
    }
  }

  // Nystrom with uniform weights w = 1/ne on the normalized unit square:
  // eigenpairs of w*C, eigenvectors normalized so sum_e k_e^2 w = 1.
  const double w = 1.0 / ne;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("KL eigen-solve failed");
  }

  KLField field;
  field.config = config;
  // SelfAdjointEigenSolver sorts ascending; keep positive modes, descending.
  const int total = static_cast<int>(eig.eigenvalues().size());
  std::vector<int> keep;
  for (int i = total - 1; i >= 0; --i) {
    if (eig.eigenvalues()[i] * w > 0.0) {
      keep.push_back(i);
    }
  }
  const int np = static_cast<int>(keep.size());
  field.eigenvalues.resize(np);
  field.modes.resize(ne, np);
  for (int k = 0; k < np; ++k) {
    field.eigenvalues[k] = eig.eigenvalues()[keep[k]] * w;
    // eigvec has unit Euclidean norm: sum v^2 = 1 -> sum (v/sqrt(w))^2 w = 1
    field.modes.col(k) = eig.eigenvectors().col(keep[k]) / std::sqrt(w);
  }
  field.total_variance = field.eigenvalues.sum();

  double acc = 0.0;
  field.n_kl = np;
  for (int k = 0; k < np; ++k) {
    acc += field.eigenvalues[k];
    if (acc / field.total_variance >= config.phi) {
      field.n_kl = k + 1;
      break;
    }
  }
  return field;
}

Eigen::VectorXd kl_realize(const KLField& field, const Eigen::VectorXd& xi) {
  if (xi.size() < field.n_kl) {
    throw std::invalid_argument("not enough random draws for KL realization");
  }
  Eigen::VectorXd out =
      Eigen::VectorXd::Constant(field.modes.rows(), field.config.mean);
  for (int k = 0; k < field.n_kl; ++k) {
    out += std::sqrt(field.eigenvalues[k]) * xi[k] * field.modes.col(k);
  }
  return out;
}

}  // namespace porofrac
