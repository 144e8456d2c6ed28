// File formats consumed by the plotting component: the per-run diagnostics
// CSV, the sweep CSV and the rate-scan CSV. Headers are fixed strings and
// every row carries exactly one field per header column.

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "couette_ks/diagnostics.hpp"
#include "couette_ks/harness.hpp"

using namespace couette;

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

TEST_SUITE("formats") {

TEST_CASE("diagnostics CSV header is fixed") {
  CHECK(diag_csv_header() ==
        "t,t_phys,mass,n_linf,n0_l2,n0_l4,nneq_l2,nneq_linf,omega_l2,omeganeq_l2,v10_linf,E_t,"
        "min_n,boundary_leak,dt");
}

TEST_CASE("diagnostics rows parse back to the record") {
  DiagRecord r;
  r.t = 1.5;
  r.t_phys = 1.5e-5;
  r.mass = 3.000000000000001;
  r.n_linf = 1.9;
  r.E_t = 0.25;
  r.min_n = -1e-12;
  r.dt = 0.01;
  const auto cells = split(diag_csv_row(r));
  REQUIRE(cells.size() == split(diag_csv_header()).size());
  CHECK(std::stod(cells[0]) == 1.5);
  CHECK(std::stod(cells[2]) == r.mass);  // mass keeps 16 significant digits
  CHECK(std::stod(cells[11]) == 0.25);
  CHECK(std::stod(cells[12]) == -1e-12);
  CHECK(std::stod(cells[14]) == 0.01);
}

TEST_CASE("sweep CSV header and rows") {
  CHECK(sweep_csv_header() == "A,M,verdict,t_exit,max_n_linf,rate_n_neq,rate_omega_neq,E_final");
  std::vector<SweepOutcome> rows(2);
  rows[0] = {1e5, 3.0, Verdict::GlobalLooking, "horizon", 20.0, 1.9, 0.1, 0.1, 2.0};
  rows[1] = {1.0, 3.0, Verdict::BlowUp, "linf-growth", 0.002, 40.0, NAN, NAN, 5.0};
  std::stringstream ss(sweep_csv(rows));
  std::string line;
  std::getline(ss, line);
  CHECK(line == sweep_csv_header());
  std::getline(ss, line);
  auto cells = split(line);
  REQUIRE(cells.size() == 8);
  CHECK(std::stod(cells[0]) == 1e5);
  CHECK(cells[2] == "global-looking");
  std::getline(ss, line);
  cells = split(line);
  CHECK(cells[2] == "blow-up");
  CHECK(cells[5] == "nan");
}

TEST_CASE("verdict strings") {
  CHECK(to_string(Verdict::GlobalLooking) == "global-looking");
  CHECK(to_string(Verdict::BlowUp) == "blow-up");
  CHECK(to_string(Verdict::BoundaryLeak) == "boundary-leak");
  CHECK(to_string(Verdict::Instability) == "instability");
  CHECK(to_string(Verdict::Inconclusive) == "inconclusive");
}

TEST_CASE("rate-scan CSV header") {
  RateScanResult r;
  r.rows.push_back({1e3, 0.1, 0.1, 0.1, 5.0, 20.0});
  std::stringstream ss(rate_scan_csv(r));
  std::string line;
  std::getline(ss, line);
  CHECK(line == "A,rate_n_neq,rate_omega_neq,exact_rate,t_lo,t_hi");
  std::getline(ss, line);
  CHECK(split(line).size() == 6);
}

}  // TEST_SUITE
