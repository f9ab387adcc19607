#include "sentsim/vtk.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sentsim/diffusion.hpp"
#include "sentsim/units.hpp"

namespace sentsim::io {

namespace {

void write_header(std::FILE* f, const fem::Mesh& mesh, const std::string& title) {
  std::fprintf(f, "# vtk DataFile Version 3.0\n%s\nASCII\nDATASET UNSTRUCTURED_GRID\n",
               title.c_str());
  std::fprintf(f, "POINTS %zu double\n", mesh.n_nodes());
  for (std::size_t n = 0; n < mesh.n_nodes(); ++n)
    std::fprintf(f, "%.17g %.17g 0\n", mesh.X[n], mesh.Y[n]);
  std::fprintf(f, "CELLS %zu %zu\n", mesh.n_elems(), mesh.n_elems() * 9);
  for (const auto& el : mesh.elems) {
    std::fprintf(f, "8");
    for (int a = 0; a < 8; ++a) std::fprintf(f, " %d", el[a]);
    std::fprintf(f, "\n");
  }
  std::fprintf(f, "CELL_TYPES %zu\n", mesh.n_elems());
  for (std::size_t e = 0; e < mesh.n_elems(); ++e) std::fprintf(f, "23\n");
}

void point_scalar(std::FILE* f, const char* name, const double* v, std::size_t n) {
  std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n", name);
  for (std::size_t i = 0; i < n; ++i) std::fprintf(f, "%.17g\n", v[i]);
}

void cell_scalar(std::FILE* f, const char* name, const std::vector<double>& v) {
  std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n", name);
  for (double x : v) std::fprintf(f, "%.9g\n", x);
}

struct FileGuard {
  std::FILE* f = nullptr;
  std::string tmp;
  ~FileGuard() {
    if (f) {
      std::fclose(f);
      std::remove(tmp.c_str());
    }
  }
};

}  // namespace

void write_vtk_frame(const std::string& path, const fem::Mesh& mesh, const Eigen::VectorXd& u,
                     const Eigen::VectorXd& phi, const Eigen::VectorXd& conc_molmm3,
                     const std::vector<mech::QPState>& qps, const MaterialParams& m,
                     double time_s) {
  FileGuard g;
  g.tmp = path + ".tmp";
  g.f = std::fopen(g.tmp.c_str(), "w");
  if (!g.f) throw Error("write_vtk_frame: cannot open " + g.tmp);
  std::FILE* f = g.f;

  char title[128];
  std::snprintf(title, sizeof title, "sentsim frame t=%.6f s", time_s);
  write_header(f, mesh, title);

  std::fprintf(f, "POINT_DATA %zu\n", mesh.n_nodes());
  std::fprintf(f, "VECTORS displacement double\n");
  for (std::size_t n = 0; n < mesh.n_nodes(); ++n)
    std::fprintf(f, "%.17g %.17g 0\n", u[2 * n], u[2 * n + 1]);
  point_scalar(f, "phi", phi.data(), mesh.n_nodes());
  Eigen::VectorXd c_ppm(mesh.n_nodes());
  for (std::size_t n = 0; n < mesh.n_nodes(); ++n)
    c_ppm[n] = units::molmm3_to_wtppm(conc_molmm3[n]);
  point_scalar(f, "C_wtppm", c_ppm.data(), mesh.n_nodes());

  // cell averages over quadrature points
  std::vector<double> sh(mesh.n_elems()), ep(mesh.n_elems()), Hc(mesh.n_elems()),
      deff(mesh.n_elems());
  for (std::size_t e = 0; e < mesh.n_elems(); ++e) {
    double s = 0, p = 0, h = 0, d = 0;
    for (int q = 0; q < mesh.nqp; ++q) {
      const auto& st = qps[e * mesh.nqp + q];
      s += mech::hydrostatic_stress(st.sigma);
      p += st.eps_p_eq;
      h += st.He + m.beta * st.psi_p;
      const fem::QPData& qd = mesh.qp_at(e, q);
      double phiq = 0;
      for (int a = 0; a < 8; ++a) phiq += qd.N[a] * phi[mesh.elems[e][a]];
      d += diff::effective_diffusivity(phiq, m);
    }
    sh[e] = s / mesh.nqp;
    ep[e] = p / mesh.nqp;
    Hc[e] = h / mesh.nqp;
    deff[e] = d / mesh.nqp;
  }
  std::fprintf(f, "CELL_DATA %zu\n", mesh.n_elems());
  cell_scalar(f, "sigma_h", sh);
  cell_scalar(f, "eps_p_eq", ep);
  cell_scalar(f, "H", Hc);
  cell_scalar(f, "D_eff", deff);

  if (std::fclose(f) != 0) {
    g.f = nullptr;
    std::remove(g.tmp.c_str());
    throw Error("write_vtk_frame: write failed for " + path);
  }
  g.f = nullptr;
  std::filesystem::rename(g.tmp, path);
}

void write_vtk_mesh(const std::string& path, const fem::Mesh& mesh) {
  FileGuard g;
  g.tmp = path + ".tmp";
  g.f = std::fopen(g.tmp.c_str(), "w");
  if (!g.f) throw Error("write_vtk_mesh: cannot open " + g.tmp);
  write_header(g.f, mesh, "sentsim mesh");

  Eigen::VectorXd sets = Eigen::VectorXd::Zero(mesh.n_nodes());
  for (int n : mesh.left_edge) sets[n] = 1;
  for (int n : mesh.right_edge) sets[n] = 2;
  for (int n : mesh.top_edge) sets[n] = 3;
  for (int n : mesh.ligament) sets[n] = 4;
  for (int n : mesh.crack_face) sets[n] = 5;
  std::fprintf(g.f, "POINT_DATA %zu\n", mesh.n_nodes());
  point_scalar(g.f, "boundary_set", sets.data(), mesh.n_nodes());

  if (std::fclose(g.f) != 0) {
    g.f = nullptr;
    std::remove(g.tmp.c_str());
    throw Error("write_vtk_mesh: write failed for " + path);
  }
  g.f = nullptr;
  std::filesystem::rename(g.tmp, path);
}

std::vector<double> read_vtk_point_scalar(const std::string& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw Error("read_vtk_point_scalar: cannot open " + path);
  std::string line;
  std::size_t n_points = 0;
  const std::string want = "SCALARS " + name + " ";
  while (std::getline(in, line)) {
    if (line.rfind("POINT_DATA", 0) == 0) {
      std::istringstream ls(line.substr(10));
      ls >> n_points;
    }
    if (line.rfind(want, 0) == 0) {
      if (!n_points) throw Error("read_vtk_point_scalar: POINT_DATA header missing");
      std::getline(in, line);  // LOOKUP_TABLE
      std::vector<double> v(n_points);
      for (std::size_t i = 0; i < n_points; ++i)
        if (!(in >> v[i])) throw Error("read_vtk_point_scalar: truncated array " + name);
      return v;
    }
  }
  throw Error("read_vtk_point_scalar: array " + name + " not found in " + path);
}

}  // namespace sentsim::io
