#include "sentsim/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sentsim::fem {

MeshParams MeshParams::paper() {
  MeshParams p;
  p.band_h = 0.0;  // ell/5 less a safety factor, resolved in build
  p.band_ymax = 0.0;
  p.band_xmargin = 0.6;
  p.growth = 1.3;
  p.hmax = 0.7;
  return p;
}

MeshParams MeshParams::desk(double ell) {
  MeshParams p;
  p.band_h = ell / 5.0;
  p.band_ymax = ell;
  p.band_xmargin = 0.35;
  p.growth = 1.8;
  p.hmax = 2.0;
  return p;
}

void shape_q8(double xi, double eta, std::array<double, 8>& N,
              std::array<double, 8>& dNxi, std::array<double, 8>& dNeta) {
  static constexpr double cx[4] = {-1, 1, 1, -1};
  static constexpr double cy[4] = {-1, -1, 1, 1};
  for (int i = 0; i < 4; ++i) {
    const double a = 1 + xi * cx[i], b = 1 + eta * cy[i];
    N[i] = 0.25 * a * b * (xi * cx[i] + eta * cy[i] - 1);
    dNxi[i] = 0.25 * cx[i] * b * (2 * xi * cx[i] + eta * cy[i]);
    dNeta[i] = 0.25 * cy[i] * a * (xi * cx[i] + 2 * eta * cy[i]);
  }
  const double x2 = 1 - xi * xi, e2 = 1 - eta * eta;
  N[4] = 0.5 * x2 * (1 - eta);
  dNxi[4] = -xi * (1 - eta);
  dNeta[4] = -0.5 * x2;
  N[5] = 0.5 * (1 + xi) * e2;
  dNxi[5] = 0.5 * e2;
  dNeta[5] = -eta * (1 + xi);
  N[6] = 0.5 * x2 * (1 + eta);
  dNxi[6] = -xi * (1 + eta);
  dNeta[6] = 0.5 * x2;
  N[7] = 0.5 * (1 - xi) * e2;
  dNxi[7] = -0.5 * e2;
  dNeta[7] = -eta * (1 - xi);
}

namespace {

// Geometric coarsening away from the fine end; sizes rescaled to fit exactly.
std::vector<double> graded_sizes(double length, double h0, double growth, double hmax) {
  std::vector<double> sizes;
  double h = h0, sum = 0;
  while (sum < length) {
    sizes.push_back(h);
    sum += h;
    h = std::min(h * growth, hmax);
  }
  const double scale = length / sum;
  for (double& s : sizes) s *= scale;
  return sizes;
}

std::vector<double> uniform_ticks(double x0, double x1, double hmax_target) {
  const int n = std::max(1, static_cast<int>(std::ceil((x1 - x0) / hmax_target - 1e-12)));
  std::vector<double> t(n + 1);
  for (int i = 0; i <= n; ++i) t[i] = x0 + (x1 - x0) * i / n;
  return t;
}

struct Grid {
  std::vector<double> xt, yt;  // tick coordinates
};

Mesh from_tensor_grid(const Grid& g, int quad_order) {
  const int nx = static_cast<int>(g.xt.size()) - 1;
  const int ny = static_cast<int>(g.yt.size()) - 1;
  Mesh m;
  const int n_corner = (nx + 1) * (ny + 1);
  const int n_hmid = nx * (ny + 1);   // midside on horizontal edges
  const int n_vmid = (nx + 1) * ny;   // midside on vertical edges
  m.X.resize(n_corner + n_hmid + n_vmid);
  m.Y.resize(m.X.size());

  auto cid = [&](int i, int j) { return j * (nx + 1) + i; };
  auto hid = [&](int i, int j) { return n_corner + j * nx + i; };
  auto vid = [&](int i, int j) { return n_corner + n_hmid + j * (nx + 1) + i; };

  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      m.X[cid(i, j)] = g.xt[i];
      m.Y[cid(i, j)] = g.yt[j];
    }
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      m.X[hid(i, j)] = 0.5 * (g.xt[i] + g.xt[i + 1]);
      m.Y[hid(i, j)] = g.yt[j];
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      m.X[vid(i, j)] = g.xt[i];
      m.Y[vid(i, j)] = 0.5 * (g.yt[j] + g.yt[j + 1]);
    }

  m.elems.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      m.elems.push_back({cid(i, j), cid(i + 1, j), cid(i + 1, j + 1), cid(i, j + 1),
                         hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)});

  // Quadrature cache.
  std::vector<double> gp, gw;
  if (quad_order == 2) {
    const double a = 1.0 / std::sqrt(3.0);
    gp = {-a, a};
    gw = {1.0, 1.0};
  } else if (quad_order == 3) {
    const double a = std::sqrt(0.6);
    gp = {-a, 0.0, a};
    gw = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  } else {
    throw ConfigError("mesh: quad_order must be 2 or 3");
  }
  m.nqp = static_cast<int>(gp.size() * gp.size());
  m.qp.resize(m.elems.size() * m.nqp);
  m.min_detJ = 1e300;

  std::array<double, 8> N, dNxi, dNeta;
  for (std::size_t e = 0; e < m.elems.size(); ++e) {
    int q = 0;
    for (std::size_t jq = 0; jq < gp.size(); ++jq)
      for (std::size_t iq = 0; iq < gp.size(); ++iq, ++q) {
        shape_q8(gp[iq], gp[jq], N, dNxi, dNeta);
        double j11 = 0, j12 = 0, j21 = 0, j22 = 0, px = 0, py = 0;
        for (int a2 = 0; a2 < 8; ++a2) {
          const int n2 = m.elems[e][a2];
          j11 += dNxi[a2] * m.X[n2];
          j12 += dNxi[a2] * m.Y[n2];
          j21 += dNeta[a2] * m.X[n2];
          j22 += dNeta[a2] * m.Y[n2];
          px += N[a2] * m.X[n2];
          py += N[a2] * m.Y[n2];
        }
        const double det = j11 * j22 - j12 * j21;
        if (!(det > 0))
          throw GeometryError("mesh: non-positive Jacobian in element " + std::to_string(e));
        m.min_detJ = std::min(m.min_detJ, det);
        QPData& d = m.qp[e * m.nqp + q];
        d.N = N;
        d.wdetJ = gw[iq] * gw[jq] * det;
        d.x = px;
        d.y = py;
        const double inv = 1.0 / det;
        for (int a2 = 0; a2 < 8; ++a2) {
          d.dNdx[a2] = inv * (j22 * dNxi[a2] - j12 * dNeta[a2]);
          d.dNdy[a2] = inv * (-j21 * dNxi[a2] + j11 * dNeta[a2]);
        }
      }
  }
  return m;
}

void collect_boundary_sets(Mesh& m, double W, double H, double a0) {
  const double tol = 1e-9;
  for (std::size_t n = 0; n < m.n_nodes(); ++n) {
    const double x = m.X[n], y = m.Y[n];
    if (std::abs(y) < tol) {
      if (a0 > 0 && x < a0 - tol)
        m.crack_face.push_back(static_cast<int>(n));
      else
        m.ligament.push_back(static_cast<int>(n));
    }
    if (std::abs(y - H) < tol) m.top_edge.push_back(static_cast<int>(n));
    if (std::abs(x) < tol) m.left_edge.push_back(static_cast<int>(n));
    if (std::abs(x - W) < tol) m.right_edge.push_back(static_cast<int>(n));
  }
}

}  // namespace

std::vector<int> Mesh::exposed_surface() const {
  std::vector<int> s = crack_face;
  s.insert(s.end(), left_edge.begin(), left_edge.end());
  s.insert(s.end(), right_edge.begin(), right_edge.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

std::vector<double> Mesh::edge_lumped_lengths(const std::vector<int>& edge_nodes) const {
  // Consistent 1D quadratic loads: corner 1/6, midside 2/3 of each edge length.
  std::vector<char> on_edge(n_nodes(), 0);
  for (int n : edge_nodes) on_edge[n] = 1;
  std::vector<double> w(n_nodes(), 0.0);
  for (const auto& el : elems) {
    static constexpr int edges[4][3] = {{0, 1, 4}, {1, 2, 5}, {2, 3, 6}, {3, 0, 7}};
    for (const auto& ed : edges) {
      const int n0 = el[ed[0]], n1 = el[ed[1]], nm = el[ed[2]];
      if (on_edge[n0] && on_edge[n1] && on_edge[nm]) {
        const double len = std::hypot(X[n1] - X[n0], Y[n1] - Y[n0]);
        w[n0] += len / 6.0;
        w[n1] += len / 6.0;
        w[nm] += 2.0 * len / 3.0;
      }
    }
  }
  std::vector<double> out;
  out.reserve(edge_nodes.size());
  for (int n : edge_nodes) out.push_back(w[n]);
  return out;
}

Mesh build_sent_mesh(double W, double half_height, double a0, double ell,
                     const MeshParams& params) {
  if (!(W > 0) || !(half_height > 0)) throw GeometryError("build_sent_mesh: non-positive dimensions");
  if (!(a0 > 0)) throw GeometryError("build_sent_mesh: a0 must be positive (no pre-crack)");
  if (a0 >= W) throw GeometryError("build_sent_mesh: a0 >= W");
  if (!(ell > 0)) throw GeometryError("build_sent_mesh: ell must be positive");

  MeshParams p = params;
  if (p.band_h <= 0) p.band_h = ell / 5.0 * 0.85;
  if (p.band_ymax <= 0) p.band_ymax = 2.0 * ell;
  if (p.band_h > ell / 5.0 + 1e-12)
    throw ConfigError("build_sent_mesh: band_h exceeds ell/5 (mesh-independence rule)");

  const double xa = std::max(0.0, a0 - p.band_xmargin);

  Grid g;
  // x: coarse [0, xa] (fine end at xa), uniform band [xa, a0], [a0, W].
  if (xa > 1e-12) {
    auto sizes = graded_sizes(xa, p.band_h * p.growth, p.growth, p.hmax);
    g.xt.push_back(0.0);
    for (auto it = sizes.rbegin(); it != sizes.rend(); ++it)
      g.xt.push_back(g.xt.back() + *it);
    g.xt.back() = xa;
  } else {
    g.xt.push_back(0.0);
  }
  for (const auto& seg : {std::pair{xa, a0}, std::pair{a0, W}}) {
    auto t = uniform_ticks(seg.first, seg.second, p.band_h);
    g.xt.insert(g.xt.end(), t.begin() + 1, t.end());
  }

  // y: uniform band rows [0, band_ymax], graded to H.
  g.yt = uniform_ticks(0.0, p.band_ymax, p.band_h);
  {
    auto sizes = graded_sizes(half_height - p.band_ymax, p.band_h * p.growth, p.growth, p.hmax);
    for (double s : sizes) g.yt.push_back(g.yt.back() + s);
    g.yt.back() = half_height;
  }

  const std::size_t n_el = (g.xt.size() - 1) * (g.yt.size() - 1);
  if (n_el > params.element_budget)
    throw ConfigError("build_sent_mesh: " + std::to_string(n_el) +
                      " elements exceed the budget of " + std::to_string(params.element_budget));

  Mesh m = from_tensor_grid(g, p.quad_order);
  m.W = W;
  m.H = half_height;
  m.a0 = a0;
  m.band_h = p.band_h;
  m.band_ymax = p.band_ymax;
  m.band_xmin = xa;
  collect_boundary_sets(m, W, half_height, a0);

  // Exhaustive edge scan of the refined band.
  m.band_max_edge = 0;
  for (const auto& el : m.elems) {
    bool in_band = true;
    for (int a2 = 0; a2 < 4; ++a2)
      if (m.X[el[a2]] < xa - 1e-9 || m.Y[el[a2]] > p.band_ymax + 1e-9) in_band = false;
    if (!in_band) continue;
    for (int a2 = 0; a2 < 4; ++a2) {
      const int b = el[(a2 + 1) % 4];
      m.band_max_edge = std::max(
          m.band_max_edge, std::hypot(m.X[el[a2]] - m.X[b], m.Y[el[a2]] - m.Y[b]));
    }
  }
  if (m.band_max_edge > ell / 5.0 + 1e-9)
    throw ConfigError("build_sent_mesh: band edge " + std::to_string(m.band_max_edge) +
                      " exceeds ell/5");
  return m;
}

Mesh build_rect_mesh(double W, double H, int nx, int ny, int quad_order) {
  if (nx < 1 || ny < 1 || !(W > 0) || !(H > 0))
    throw GeometryError("build_rect_mesh: invalid dimensions");
  Grid g;
  g.xt = uniform_ticks(0.0, W, W / nx);
  g.yt = uniform_ticks(0.0, H, H / ny);
  Mesh m = from_tensor_grid(g, quad_order);
  m.W = W;
  m.H = H;
  m.a0 = 0.0;
  collect_boundary_sets(m, W, H, 0.0);
  return m;
}

void Mesh::print_stats() const {
  std::printf("mesh: %zu nodes, %zu elements, %d qp/elem\n", n_nodes(), n_elems(), nqp);
  std::printf("      domain %g x %g mm, a0 = %g mm\n", W, H, a0);
  if (band_h > 0)
    std::printf("      refined band: x >= %.3f, y <= %.3f, target h = %.4f, max edge = %.4f mm\n",
                band_xmin, band_ymax, band_h, band_max_edge);
  std::printf("      min detJ = %.3e\n", min_detJ);
  std::printf("      sets: crack_face %zu, ligament %zu, top %zu, left %zu, right %zu\n",
              crack_face.size(), ligament.size(), top_edge.size(), left_edge.size(),
              right_edge.size());
}

}  // namespace sentsim::fem
