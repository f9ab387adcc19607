#include <doctest.h>

#include <cmath>

#include "sentsim/mesh.hpp"

using namespace sentsim;
using namespace sentsim::fem;

TEST_CASE("sent mesh at the default settings matches the target resolution") {
  const Mesh m = build_sent_mesh(7.0, 12.7, 2.45, 0.085, MeshParams::paper());
  CHECK(m.n_elems() > 10000);
  CHECK(m.n_elems() < 22000);
  CHECK(m.band_max_edge <= 0.085 / 5.0 + 1e-9);
  CHECK(m.min_detJ > 0.0);
  CHECK(!m.crack_face.empty());
  CHECK(!m.ligament.empty());
  CHECK(!m.top_edge.empty());
}

TEST_CASE("degenerate crack lengths are rejected") {
  CHECK_THROWS_AS(build_sent_mesh(7.0, 12.7, 0.0, 0.085), GeometryError);
  CHECK_THROWS_AS(build_sent_mesh(7.0, 12.7, 7.0, 0.085), GeometryError);
  CHECK_THROWS_AS(build_sent_mesh(7.0, 12.7, 9.0, 0.085), GeometryError);
}

TEST_CASE("band edge scan holds for a coarser length scale") {
  const Mesh m = build_sent_mesh(7.0, 12.7, 2.1, 0.17, MeshParams::paper());
  CHECK(m.band_max_edge <= 0.17 / 5.0 + 1e-9);  // 0.034 mm
  // exhaustive re-scan, independent of the builder's bookkeeping
  double worst = 0.0;
  for (const auto& el : m.elems) {
    bool in_band = true;
    for (int a = 0; a < 4; ++a)
      if (m.X[el[a]] < m.band_xmin - 1e-9 || m.Y[el[a]] > m.band_ymax + 1e-9) in_band = false;
    if (!in_band) continue;
    for (int a = 0; a < 4; ++a) {
      const int b = el[(a + 1) % 4];
      worst = std::max(worst, std::hypot(m.X[el[a]] - m.X[b], m.Y[el[a]] - m.Y[b]));
    }
  }
  CHECK(worst <= 0.034 + 1e-9);
  CHECK(worst > 0.0);
}

TEST_CASE("crack face and ligament partition the bottom line at a0") {
  const Mesh m = build_sent_mesh(7.0, 12.7, 2.45, 0.17, MeshParams::desk(0.17));
  for (int n : m.crack_face) {
    CHECK(m.Y[n] == doctest::Approx(0.0));
    CHECK(m.X[n] < 2.45);
  }
  for (int n : m.ligament) {
    CHECK(m.Y[n] == doctest::Approx(0.0));
    CHECK(m.X[n] >= 2.45 - 1e-9);
  }
  // disjoint and jointly covering every bottom-line node
  std::size_t bottom = 0;
  for (std::size_t n = 0; n < m.n_nodes(); ++n)
    if (std::abs(m.Y[n]) < 1e-9) ++bottom;
  CHECK(bottom == m.crack_face.size() + m.ligament.size());
}

TEST_CASE("requesting an unreachable refinement fails loudly") {
  MeshParams p = MeshParams::paper();
  p.element_budget = 500;
  CHECK_THROWS_AS(build_sent_mesh(7.0, 12.7, 2.45, 0.085, p), ConfigError);
  MeshParams q = MeshParams::desk(0.085);
  q.band_h = 0.085;  // violates h <= ell/5
  CHECK_THROWS_AS(build_sent_mesh(7.0, 12.7, 2.45, 0.085, q), ConfigError);
}

TEST_CASE("rect mesh exposes the expected sets and positive Jacobians") {
  const Mesh m = build_rect_mesh(2.0, 1.0, 4, 2);
  CHECK(m.n_elems() == 8);
  CHECK(m.crack_face.empty());
  CHECK(m.ligament.size() == 9);   // bottom: 5 corners + 4 midside
  CHECK(m.top_edge.size() == 9);
  CHECK(m.left_edge.size() == 5);
  CHECK(m.min_detJ > 0.0);
  // 2x2 rule by default, 3x3 on request
  CHECK(m.nqp == 4);
  CHECK(build_rect_mesh(2.0, 1.0, 4, 2, 3).nqp == 9);
}
