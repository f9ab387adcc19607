#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "sentsim/common.hpp"

namespace sentsim::fem {

/// Coarsening knobs for the graded SENT mesh.
struct MeshParams {
  double band_h = 0.0;       // target element size inside the refined band (0 -> ell/5)
  double band_ymax = 0.0;    // refined rows up to this y (0 -> 2*ell)
  double band_xmargin = 0.5; // band starts at a0 - margin
  double growth = 1.3;       // geometric coarsening ratio outside the band
  double hmax = 0.7;         // size cap for coarse elements
  int quad_order = 2;        // 2 = reduced (default), 3 = full, for hourglass diagnostics
  std::size_t element_budget = 200000;

  static MeshParams paper();           // ~15k elements at Table-1 ell
  static MeshParams desk(double ell);  // band h = ell/5 exactly, aggressive coarsening
};

/// Quadrature-point cache entry: shape values, physical gradients, weight.
struct QPData {
  std::array<double, 8> N;
  std::array<double, 8> dNdx;
  std::array<double, 8> dNdy;
  double wdetJ;
  double x, y;  // physical coordinates
};

/// Immutable 8-node serendipity quadrilateral mesh of a rectangular domain,
/// with the SENT boundary sets. Safe to share across threads after build.
struct Mesh {
  std::vector<double> X, Y;                    // node coordinates (mm)
  std::vector<std::array<int, 8>> elems;       // connectivity, VTK quadratic-quad order
  std::vector<QPData> qp;                      // nqp per element, element-major
  int nqp = 4;

  // Boundary node sets (sorted, disjoint where the spec requires it).
  std::vector<int> crack_face;  // y=0, x < a0
  std::vector<int> ligament;    // y=0, x >= a0 (rect meshes: whole bottom edge)
  std::vector<int> top_edge;    // y = H
  std::vector<int> left_edge;   // x = 0
  std::vector<int> right_edge;  // x = W

  double W = 0, H = 0, a0 = 0;
  double band_h = 0, band_ymax = 0, band_xmin = 0;
  double band_max_edge = 0;  // largest element edge found in the band
  double min_detJ = 0;

  std::size_t n_nodes() const { return X.size(); }
  std::size_t n_elems() const { return elems.size(); }
  const QPData& qp_at(std::size_t e, int q) const { return qp[e * nqp + q]; }

  /// Exposed surface = outer boundary plus crack faces (bookkeeping set).
  std::vector<int> exposed_surface() const;

  /// Consistent nodal weights of an edge set for distributing edge tractions.
  std::vector<double> edge_lumped_lengths(const std::vector<int>& edge_nodes) const;

  void print_stats() const;
};

/// Q8 shape functions and parent-space derivatives at (xi, eta).
void shape_q8(double xi, double eta, std::array<double, 8>& N,
              std::array<double, 8>& dNdxi, std::array<double, 8>& dNdeta);

/// Half SENT specimen [0,W] x [0,half_height] with a geometric edge crack of
/// length a0 along y=0 and a graded refined band along the crack path.
Mesh build_sent_mesh(double W, double half_height, double a0, double ell,
                     const MeshParams& params = MeshParams::paper());

/// Uniform rectangle mesh (tests, bar and slab problems). Bottom edge lands in
/// `ligament`, crack_face stays empty.
Mesh build_rect_mesh(double W, double H, int nx, int ny, int quad_order = 2);

}  // namespace sentsim::fem
