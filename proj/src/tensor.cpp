#include "porofrac/tensor.hpp"

#include <algorithm>

namespace porofrac {

std::pair<double, double> invariants_iso(const SymTensor2& eps) {
  const double i1 = eps.trace();
  // tr(eps^2) for a symmetric tensor
  const double i2 = eps.xx * eps.xx + eps.yy * eps.yy + 2.0 * eps.xy * eps.xy;
  return {i1, i2};
}

std::pair<double, double> invariants_aniso(const SymTensor2& eps,
                                           const SymTensor2& M,
                                           const SymTensor2& G) {
  return {eps.inner(M), eps.inner(G)};
}

SpectralDecomp spectral_decompose(const SymTensor2& eps) {
  SpectralDecomp sd;
  const double mean = 0.5 * (eps.xx + eps.yy);
  const double diff = 0.5 * (eps.xx - eps.yy);
  const double radius = std::hypot(diff, eps.xy);
  sd.eig1 = mean + radius;
  sd.eig2 = mean - radius;
  if (radius == 0.0) {
    // isotropic tensor: any orthonormal pair
    sd.n1 = Eigen::Vector2d::UnitX();
    sd.n2 = Eigen::Vector2d::UnitY();
    return sd;
  }
  // Eigenvector of the larger eigenvalue from the better-conditioned row.
  Eigen::Vector2d v1;
  if (diff >= 0.0) {
    v1 = {diff + radius, eps.xy};
  } else {
    v1 = {eps.xy, radius - diff};
  }
  const double len = v1.norm();
  if (len > 0.0) {
    sd.n1 = v1 / len;
  } else {
    sd.n1 = Eigen::Vector2d::UnitX();
  }
  sd.n2 = {-sd.n1.y(), sd.n1.x()};
  return sd;
}

std::pair<SymTensor2, SymTensor2> split_strain(const SymTensor2& eps) {
  const SpectralDecomp sd = spectral_decompose(eps);
  const SymTensor2 m1 = SymTensor2::outer(sd.n1);
  const SymTensor2 m2 = SymTensor2::outer(sd.n2);
  const SymTensor2 plus =
      macaulay_plus(sd.eig1) * m1 + macaulay_plus(sd.eig2) * m2;
  const SymTensor2 minus =
      macaulay_minus(sd.eig1) * m1 + macaulay_minus(sd.eig2) * m2;
  return {plus, minus};
}

std::pair<Tensor4Sym, Tensor4Sym> strain_projectors(const SymTensor2& eps) {
  const SpectralDecomp sd = spectral_decompose(eps);
  const double scale = std::max(1.0, eps.norm());
  double e1 = sd.eig1;
  const double e2 = sd.eig2;
  if (e1 - e2 < 1e-10 * scale) {
    e1 += 1e-10 * scale;
  }

  const SymTensor2 m1 = SymTensor2::outer(sd.n1);
  const SymTensor2 m2 = SymTensor2::outer(sd.n2);
  const Tensor4Sym m11 = Tensor4Sym::outer(m1, m1);
  const Tensor4Sym m22 = Tensor4Sym::outer(m2, m2);

  // Off-diagonal (eigenvector-rotation) block of I_sym in the spectral basis.
  Tensor4Sym mixed = Tensor4Sym::identity_sym();
  mixed.v -= m11.v + m22.v;

  const double h1p = e1 > 0.0 ? 1.0 : 0.0;
  const double h2p = e2 > 0.0 ? 1.0 : 0.0;
  const double sp = (macaulay_plus(e1) - macaulay_plus(e2)) / (e1 - e2);
  const double sm = (macaulay_minus(e1) - macaulay_minus(e2)) / (e1 - e2);

  const Tensor4Sym plus = h1p * m11 + h2p * m22 + sp * mixed;
  const Tensor4Sym minus =
      (1.0 - h1p) * m11 + (1.0 - h2p) * m22 + sm * mixed;
  return {plus, minus};
}

}  // namespace porofrac
