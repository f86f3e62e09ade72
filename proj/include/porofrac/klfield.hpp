#ifndef POROFRAC_KLFIELD_HPP
#define POROFRAC_KLFIELD_HPP

#include <Eigen/Dense>

#include "porofrac/mesh.hpp"

namespace porofrac {

/// Gaussian covariance kernel on domain coordinates normalized to
/// [0,1]^2: Cov(x,y) = sigma^2 exp(-(x1-y1)^2/zeta1 - (x2-y2)^2/zeta2).
struct KLConfig {
  double mean = 0.0;
  double sigma = 1.0;   // kernel standard deviation
  double zeta1 = 0.1;   // correlation lengths (normalized coords)
  double zeta2 = 0.1;
  double phi = 0.95;    // variance fraction to retain
};

/// Truncated Karhunen-Loeve decomposition on element centroids
/// (Nystrom with uniform weights). Modes are stored per element and
/// normalized against the discrete quadrature measure.
struct KLField {
  KLConfig config;
  Eigen::VectorXd eigenvalues;  // all positive modes, descending
  Eigen::MatrixXd modes;        // n_elems x n_modes
  int n_kl = 0;                 // retained modes
  double total_variance = 0.0;  // sum of all positive eigenvalues

  double retained_fraction() const {
    if (total_variance <= 0.0) {
      return 1.0;  // degenerate (sigma = 0) field
    }
    return eigenvalues.head(n_kl).sum() / total_variance;
  }

  /// Pointwise variance of the truncated expansion at element e.
  double truncated_variance(int e) const;
};

KLField kl_solve(const KLConfig& config, const Mesh& mesh);

/// Field realization from i.i.d. standard normal draws xi (size >= n_kl).
Eigen::VectorXd kl_realize(const KLField& field, const Eigen::VectorXd& xi);

}  // namespace porofrac

#endif
