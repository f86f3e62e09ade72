#ifndef POROFRAC_TENSOR_HPP
#define POROFRAC_TENSOR_HPP

#include <Eigen/Dense>
#include <cmath>
#include <utility>

namespace porofrac {

/// Symmetric 2x2 tensor, xy stored once. Components are tensorial
/// (xy is the tensor component, not the engineering shear).
struct SymTensor2 {
  double xx = 0.0;
  double yy = 0.0;
  double xy = 0.0;

  static SymTensor2 identity() { return {1.0, 1.0, 0.0}; }

  /// a (x) a for a unit (or general) vector a.
  static SymTensor2 outer(const Eigen::Vector2d& a) {
    return {a.x() * a.x(), a.y() * a.y(), a.x() * a.y()};
  }

  double trace() const { return xx + yy; }

  /// Full double contraction A:B (xy counted twice).
  double inner(const SymTensor2& o) const {
    return xx * o.xx + yy * o.yy + 2.0 * xy * o.xy;
  }

  double norm() const { return std::sqrt(inner(*this)); }

  Eigen::Vector2d apply(const Eigen::Vector2d& v) const {
    return {xx * v.x() + xy * v.y(), xy * v.x() + yy * v.y()};
  }

  SymTensor2 operator+(const SymTensor2& o) const {
    return {xx + o.xx, yy + o.yy, xy + o.xy};
  }
  SymTensor2 operator-(const SymTensor2& o) const {
    return {xx - o.xx, yy - o.yy, xy - o.xy};
  }
  SymTensor2 operator*(double s) const { return {xx * s, yy * s, xy * s}; }
  SymTensor2& operator+=(const SymTensor2& o) {
    xx += o.xx;
    yy += o.yy;
    xy += o.xy;
    return *this;
  }
};

inline SymTensor2 operator*(double s, const SymTensor2& t) { return t * s; }

/// Fourth-order tensor with minor symmetries in 3x3 Voigt form
/// (ordering xx, yy, xy). Entries are the raw tensor components
/// C_{ab}; the single documented shear convention lives in
/// contract(): the xy column is doubled there because eps_xy appears
/// twice in the contraction. Used directly as the D-matrix against
/// engineering-shear B-matrices, where the factor 2 is carried by
/// gamma = 2 eps_xy instead.
struct Tensor4Sym {
  Eigen::Matrix3d v = Eigen::Matrix3d::Zero();

  /// Fourth-order symmetric identity (I_sym : eps = eps).
  static Tensor4Sym identity_sym() {
    Tensor4Sym t;
    t.v.diagonal() << 1.0, 1.0, 0.5;
    return t;
  }

  /// J = I (x) I, the trace projector (J : eps = tr(eps) I).
  static Tensor4Sym trace_projector() {
    Tensor4Sym t;
    t.v << 1, 1, 0, 1, 1, 0, 0, 0, 0;
    return t;
  }

  /// A (x) B for symmetric second-order tensors.
  static Tensor4Sym outer(const SymTensor2& a, const SymTensor2& b) {
    Tensor4Sym t;
    const Eigen::Vector3d va(a.xx, a.yy, a.xy);
    const Eigen::Vector3d vb(b.xx, b.yy, b.xy);
    t.v = va * vb.transpose();
    return t;
  }

  SymTensor2 contract(const SymTensor2& e) const {
    const Eigen::Vector3d ve(e.xx, e.yy, 2.0 * e.xy);
    const Eigen::Vector3d r = v * ve;
    return {r(0), r(1), r(2)};
  }

  Tensor4Sym operator+(const Tensor4Sym& o) const {
    Tensor4Sym t;
    t.v = v + o.v;
    return t;
  }
  Tensor4Sym operator*(double s) const {
    Tensor4Sym t;
    t.v = v * s;
    return t;
  }
  Tensor4Sym& operator+=(const Tensor4Sym& o) {
    v += o.v;
    return *this;
  }
};

inline Tensor4Sym operator*(double s, const Tensor4Sym& t) { return t * s; }

/// Closed-form eigendecomposition of a symmetric 2x2 tensor,
/// eigenvalues sorted descending.
struct SpectralDecomp {
  double eig1 = 0.0;  // >= eig2
  double eig2 = 0.0;
  Eigen::Vector2d n1 = Eigen::Vector2d::UnitX();
  Eigen::Vector2d n2 = Eigen::Vector2d::UnitY();
};

/// I1 = tr(eps), I2 = tr(eps^2).
std::pair<double, double> invariants_iso(const SymTensor2& eps);

/// I4 = tr(eps.M), I6 = tr(eps.G) for structural tensors M = a(x)a, G = g(x)g.
std::pair<double, double> invariants_aniso(const SymTensor2& eps,
                                           const SymTensor2& M,
                                           const SymTensor2& G);

inline double macaulay_plus(double x) { return (x + std::abs(x)) / 2.0; }
inline double macaulay_minus(double x) { return (x - std::abs(x)) / 2.0; }

SpectralDecomp spectral_decompose(const SymTensor2& eps);

/// Tension/compression split eps = eps+ + eps- via principal strains.
std::pair<SymTensor2, SymTensor2> split_strain(const SymTensor2& eps);

/// Fourth-order projectors P+- = d eps+- / d eps in Voigt form.
/// P+ + P- = I_sym. Near-degenerate eigenvalues are perturbed before
/// forming the eigenvalue-difference term (the split itself is not).
std::pair<Tensor4Sym, Tensor4Sym> strain_projectors(const SymTensor2& eps);

}  // namespace porofrac

#endif
