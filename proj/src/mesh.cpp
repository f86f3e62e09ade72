#include "porofrac/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace porofrac {

Eigen::Vector2d Mesh::centroid(int e) const {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (int n : elems[e]) {
    c += nodes[n];
  }
  return c / 4.0;
}

bool Mesh::on_boundary(int node) const {
  const int i = node % (nx + 1);
  const int j = node / (nx + 1);
  return i == 0 || i == nx || j == 0 || j == ny;
}

Mesh build_structured_mesh(double Lx, double Ly, int nx, int ny,
                           const RegionSpec& regions) {
  if (Lx <= 0.0 || Ly <= 0.0 || nx < 1 || ny < 1) {
    throw std::invalid_argument("mesh dimensions must be positive");
  }
  Mesh m;
  m.nx = nx;
  m.ny = ny;
  m.Lx = Lx;
  m.Ly = Ly;
  m.hx = Lx / nx;
  m.hy = Ly / ny;
  m.h_min = std::min(m.hx, m.hy);
  m.nodes.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      m.nodes.emplace_back(i * m.hx, j * m.hy);
    }
  }
  m.elems.reserve(nx * ny);
  m.region.reserve(nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      m.elems.push_back({m.node_id(i, j), m.node_id(i + 1, j),
                         m.node_id(i + 1, j + 1), m.node_id(i, j + 1)});
      const double c = regions.axis == RegionSpec::Axis::X
                           ? (i + 0.5) * m.hx
                           : (j + 0.5) * m.hy;
      int r = 0;
      for (double cut : regions.cuts) {
        if (c > cut) {
          ++r;
        }
      }
      m.region.push_back(r);
    }
  }
  return m;
}

void shape_functions(double xi, double eta, std::array<double, 4>& N,
                     std::array<Eigen::Vector2d, 4>& dN) {
  N[0] = 0.25 * (1 - xi) * (1 - eta);
  N[1] = 0.25 * (1 + xi) * (1 - eta);
  N[2] = 0.25 * (1 + xi) * (1 + eta);
  N[3] = 0.25 * (1 - xi) * (1 + eta);
  dN[0] = {-0.25 * (1 - eta), -0.25 * (1 - xi)};
  dN[1] = {0.25 * (1 - eta), -0.25 * (1 + xi)};
  dN[2] = {0.25 * (1 + eta), 0.25 * (1 + xi)};
  dN[3] = {-0.25 * (1 + eta), 0.25 * (1 - xi)};
}

std::array<QuadPoint, 4> element_quadrature(const Mesh& mesh, int e) {
  static const double g = 1.0 / std::sqrt(3.0);
  static const std::array<std::array<double, 2>, 4> pts = {
      {{-g, -g}, {g, -g}, {g, g}, {-g, g}}};

  std::array<QuadPoint, 4> qps;
  const auto& conn = mesh.elems[e];
  // Axis-aligned rectangle: the Jacobian is diagonal and constant.
  const double jx = 0.5 * mesh.hx;
  const double jy = 0.5 * mesh.hy;
  const double detJ = jx * jy;
  if (detJ <= 0.0) {
    throw std::runtime_error("singular element Jacobian");
  }
  for (int q = 0; q < 4; ++q) {
    QuadPoint& qp = qps[q];
    std::array<double, 4> N;
    std::array<Eigen::Vector2d, 4> dNref;
    shape_functions(pts[q][0], pts[q][1], N, dNref);
    qp.N = N;
    qp.detJw = detJ;  // 2x2 Gauss weights are 1
    qp.B_u.setZero();
    qp.B_grad.setZero();
    qp.coord = Eigen::Vector2d::Zero();
    for (int a = 0; a < 4; ++a) {
      const Eigen::Vector2d grad(dNref[a].x() / jx, dNref[a].y() / jy);
      qp.dN[a] = grad;
      qp.B_u(0, 2 * a) = grad.x();
      qp.B_u(1, 2 * a + 1) = grad.y();
      qp.B_u(2, 2 * a) = grad.y();
      qp.B_u(2, 2 * a + 1) = grad.x();
      qp.B_grad(0, a) = grad.x();
      qp.B_grad(1, a) = grad.y();
      qp.coord += N[a] * mesh.nodes[conn[a]];
    }
  }
  return qps;
}

}  // namespace porofrac
