#ifndef POROFRAC_MESH_HPP
#define POROFRAC_MESH_HPP

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <vector>

namespace porofrac {

/// Band decomposition of the domain into material regions, cut along
/// one axis (layered media). An empty cut list means one region.
struct RegionSpec {
  enum class Axis { X, Y };
  Axis axis = Axis::Y;
  std::vector<double> cuts;  // interior band boundaries [m], ascending
};

/// Structured uniform grid of bilinear quadrilaterals, nodes numbered
/// row-major, element nodes counterclockwise.
struct Mesh {
  int nx = 0, ny = 0;
  double Lx = 0.0, Ly = 0.0;
  double hx = 0.0, hy = 0.0;
  double h_min = 0.0;  // characteristic element length (min edge)
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 4>> elems;
  std::vector<int> region;

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_elems() const { return static_cast<int>(elems.size()); }
  int node_id(int i, int j) const { return j * (nx + 1) + i; }
  Eigen::Vector2d centroid(int e) const;
  bool on_boundary(int node) const;
};

Mesh build_structured_mesh(double Lx, double Ly, int nx, int ny,
                           const RegionSpec& regions = {});

/// Bilinear basis on the reference square [-1,1]^2.
void shape_functions(double xi, double eta, std::array<double, 4>& N,
                     std::array<Eigen::Vector2d, 4>& dN);

/// Everything element-local integration needs at one Gauss point.
/// B_u maps nodal displacements to engineering strain (xx, yy, gamma);
/// B_p/B_d map nodal scalars to physical gradients.
struct QuadPoint {
  std::array<double, 4> N;
  std::array<Eigen::Vector2d, 4> dN;  // physical gradients
  double detJw = 0.0;
  Eigen::Matrix<double, 3, 8> B_u;
  Eigen::Matrix<double, 2, 4> B_grad;  // shared by p and d fields
  Eigen::Vector2d coord;               // physical position
};

/// 2x2 Gauss rule on one element. For the uniform structured mesh the
/// geometric part is identical across elements; positions differ.
std::array<QuadPoint, 4> element_quadrature(const Mesh& mesh, int e);

}  // namespace porofrac

#endif
