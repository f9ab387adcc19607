#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sentsim/material.hpp"
#include "sentsim/mechanics.hpp"
#include "sentsim/mesh.hpp"

namespace sentsim::io {

/// Legacy ASCII unstructured-grid frame: nodal u, phi, C plus cell-averaged
/// sigma_h, eps_p, H and D_eff. Written atomically (tmp + rename) so partial
/// frames never survive a failure.
void write_vtk_frame(const std::string& path, const fem::Mesh& mesh, const Eigen::VectorXd& u,
                     const Eigen::VectorXd& phi, const Eigen::VectorXd& conc_molmm3,
                     const std::vector<mech::QPState>& qps, const MaterialParams& m,
                     double time_s);

/// Geometry-only export with the boundary sets as point data.
void write_vtk_mesh(const std::string& path, const fem::Mesh& mesh);

/// Reads one POINT_DATA scalar array back (round-trip checks).
std::vector<double> read_vtk_point_scalar(const std::string& path, const std::string& name);

}  // namespace sentsim::io
