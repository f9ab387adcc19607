#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "helpers.hpp"
#include "sentsim/config.hpp"
#include "sentsim/rundir.hpp"
#include "sentsim/units.hpp"
#include "sentsim/vtk.hpp"

using namespace sentsim;
using sentsim::test::TempDir;

namespace {

void write_schedule(const std::string& path) {
  diff::EnvSchedule s;
  s.t_hours = {0.0, 24.0, 360.0, 720.0};
  s.c_wtppm = {0.0, 7.0, 3.1, 3.0};
  s.to_file(path);
}

std::string minimal_config(TempDir& td, const std::string& extra = "") {
  write_schedule(td.file("env.txt"));
  const std::string cfg = R"({
    "environment": { "schedule_file": "env.txt" },
    "load": { "P": 8679.0 }
  )" + extra + "\n}";
  std::ofstream out(td.file("run.json"));
  out << cfg;
  out.close();
  return td.file("run.json");
}

}  // namespace

TEST_CASE("minimal config fills every default") {
  TempDir td("cfg1");
  const auto cfg = io::parse_config(minimal_config(td));
  CHECK(cfg.material.E == doctest::Approx(207000.0));
  CHECK(cfg.material.ell == doctest::Approx(0.085));
  CHECK(cfg.geometry.preset == "desk");
  CHECK(cfg.solver.stagger_tol == doctest::Approx(1e-4));
  CHECK(cfg.load.horizon_h == doctest::Approx(720.0));
  CHECK(cfg.output.dir == "out");
  const auto c = io::to_case(cfg, fem::AssemblyMode::serial);
  CHECK(c.P == doctest::Approx(8679.0));
  CHECK(c.schedule.peak() == doctest::Approx(7.0));
}

TEST_CASE("Table-1 values round-trip through the canonical echo") {
  TempDir td("cfg2");
  const std::string extra = R"(,
    "material": { "E": 207000.0, "nu": 0.3, "sigma_y": 800.0, "N": 0.04,
                  "Gc0": 40.0, "D0": 1.4e-4 })";
  const auto cfg = io::parse_config(minimal_config(td, extra));
  io::write_config_echo(cfg, td.file("echo.json"));

  std::ifstream in(td.file("echo.json"));
  nlohmann::json j;
  in >> j;
  CHECK(j["material"]["E"].get<double>() == 207000.0);
  CHECK(j["material"]["nu"].get<double>() == 0.3);
  CHECK(j["material"]["sigma_y"].get<double>() == 800.0);
  CHECK(j["material"]["N"].get<double>() == 0.04);
  CHECK(j["material"]["Gc0"].get<double>() == 40.0);
  CHECK(j["material"]["D0"].get<double>() == 1.4e-4);
  CHECK(j["metadata"].contains("wtppm_per_molmm3"));
  CHECK(j["material"]["energy_split"].get<std::string>() == "none");
}

TEST_CASE("invalid material values are rejected with the failed invariant") {
  TempDir td("cfg3");
  const std::string extra = R"(, "material": { "ell": -0.5 })";
  try {
    io::parse_config(minimal_config(td, extra));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("ell") != std::string::npos);
  }
}

TEST_CASE("unknown keys are fatal and named") {
  TempDir td("cfg4");
  const std::string extra = R"(, "material": { "youngs": 1.0 })";
  try {
    io::parse_config(minimal_config(td, extra));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("youngs") != std::string::npos);
    CHECK(msg.find("material") != std::string::npos);
  }
}

TEST_CASE("environment block is exclusive and checks files") {
  TempDir td("cfg5");
  write_schedule(td.file("env.txt"));
  std::ofstream out(td.file("bad.json"));
  out << R"({"environment": {"schedule_file": "env.txt", "constant_wtppm": 3.0},
             "load": {"P": 100.0}})";
  out.close();
  CHECK_THROWS_AS(io::parse_config(td.file("bad.json")), ConfigError);

  std::ofstream out2(td.file("bad2.json"));
  out2 << R"({"environment": {"schedule_file": "missing.txt"}, "load": {"P": 100.0}})";
  out2.close();
  CHECK_THROWS_AS(io::parse_config(td.file("bad2.json")), ConfigError);

  std::ofstream out3(td.file("bad3.json"));
  out3 << R"({"environment": {"schedule_file": "env.txt"}, "load": {"P": 100.0, "K": 25.0}})";
  out3.close();
  CHECK_THROWS_AS(io::parse_config(td.file("bad3.json")), ConfigError);
}

TEST_CASE("h2s percentage resolves through anchor schedules") {
  TempDir td("cfg6");
  diff::EnvSchedule lo, hi;
  lo.t_hours = {0, 24, 720};
  lo.c_wtppm = {0, 1.1, 0.6};
  hi.t_hours = {0, 24, 720};
  hi.c_wtppm = {0, 3.2, 1.5};
  lo.to_file(td.file("e3.txt"));
  hi.to_file(td.file("e10.txt"));
  std::ofstream out(td.file("run.json"));
  out << R"({"environment": {"h2s_pct": 7.0,
                "anchors": [{"percent": 3, "schedule": "e3.txt"},
                            {"percent": 10, "schedule": "e10.txt"}]},
             "load": {"K": 30.0}})";
  out.close();
  const auto cfg = io::parse_config(td.file("run.json"));
  const auto sched = io::resolve_environment(cfg.environment, cfg.base_dir);
  const double w = std::log10(7.0 / 3.0) / std::log10(10.0 / 3.0);
  CHECK(sched.eval_wtppm(units::hours_to_s(24.0)) ==
        doctest::Approx(1.1 + (3.2 - 1.1) * w).epsilon(0.01));
  const auto c = io::to_case(cfg, fem::AssemblyMode::serial);
  CHECK(c.P == doctest::Approx(harness::load_for_k(30.0, 7, 7, 2.45)).epsilon(1e-12));
}

TEST_CASE("vtk frame round-trips the phase field bit-exactly") {
  TempDir td("vtk");
  auto c = sentsim::test::tiny_case();
  const fem::Mesh mesh = fem::build_rect_mesh(2.0, 1.0, 4, 2);
  Eigen::VectorXd u = Eigen::VectorXd::Random(2 * mesh.n_nodes());
  Eigen::VectorXd phi(mesh.n_nodes()), conc(mesh.n_nodes());
  for (std::size_t n = 0; n < mesh.n_nodes(); ++n) {
    phi[n] = 0.5 + 0.5 * std::sin(1e4 * (n + 1.0));  // awkward digits on purpose
    conc[n] = units::wtppm_to_molmm3(3.0) * n / mesh.n_nodes();
  }
  std::vector<mech::QPState> qps(mesh.n_elems() * mesh.nqp);
  io::write_vtk_frame(td.file("f.vtk"), mesh, u, phi, conc, qps, c.material, 123.0);
  const auto r = io::read_vtk_point_scalar(td.file("f.vtk"), "phi");
  REQUIRE(r.size() == mesh.n_nodes());
  for (std::size_t n = 0; n < mesh.n_nodes(); ++n) CHECK(r[n] == phi[n]);

  io::write_vtk_mesh(td.file("m.vtk"), mesh);
  const auto sets = io::read_vtk_point_scalar(td.file("m.vtk"), "boundary_set");
  CHECK(sets.size() == mesh.n_nodes());
}

TEST_CASE("summary and campaign CSV headers are stable") {
  CHECK(std::string(io::kSummaryCsvHeader) ==
        "time_h,dt_s,passes,newton,crack_extent_mm,peak_C_wtppm,peak_sigma_h_MPa,reaction_N,"
        "phi_max");
  CHECK(std::string(io::kCampaignCsvHeader) == "P_N,a0_mm,K_MPa_sqrt_m,env,outcome,time_h");

  TempDir td("rd");
  io::RunDir rd(td.file("run"));
  rd.open_summary();
  couple::SimState s;
  s.time = 3600.0;
  s.dt = 10.0;
  s.phi = Eigen::VectorXd::Zero(3);
  rd.log_step(s);
  std::ifstream in(rd.file("summary.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header == io::kSummaryCsvHeader);
  std::string row;
  std::getline(in, row);
  CHECK(row.substr(0, 2) == "1,");  // 1 hour

  harness::TestRecord rec;
  rec.P = 8679;
  rec.K = 25.0;
  rec.outcome = couple::Outcome::failed;
  rec.time_h = 33.5;
  rd.write_result(rec);
  std::ifstream rj(rd.file("result.json"));
  nlohmann::json j;
  rj >> j;
  CHECK(j["outcome"] == "failed");
  CHECK(j["time_h"].get<double>() == doctest::Approx(33.5));
}

TEST_CASE("campaign manifest parsing") {
  TempDir td("man");
  write_schedule(td.file("env100.txt"));
  minimal_config(td);
  std::ofstream out(td.file("campaign.json"));
  out << R"({
    "config": "run.json",
    "environments": [
      {"name": "h2s_100", "environment": {"schedule_file": "env100.txt"}}
    ],
    "runs": [
      {"K": 20.0, "environment": "h2s_100"},
      {"P": 9000.0, "a0": 2.6, "environment": "h2s_100"}
    ]
  })";
  out.close();
  const auto man = io::parse_manifest(td.file("campaign.json"));
  CHECK(man.environments.size() == 1);
  REQUIRE(man.entries.size() == 2);
  CHECK(man.entries[0].K == doctest::Approx(20.0));
  CHECK(man.entries[1].a0 == doctest::Approx(2.6));

  std::ofstream bad(td.file("bad.json"));
  bad << R"({"config": "run.json", "runs": [{"K": 20.0, "P": 100.0}]})";
  bad.close();
  CHECK_THROWS_AS(io::parse_manifest(td.file("bad.json")), ConfigError);
}
