#include <doctest.h>

#include "lagshrink/lagshrink.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lagshrink_capi_test";
  fs::create_directories(dir);
  return dir / name;
}

const double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("status names, version and the thread-local error message") {
  CHECK(std::string(lsk_version()) == "0.1.0");
  CHECK(std::string(lsk_status_name(LSK_OK)) == "Ok");
  CHECK(std::string(lsk_status_name(LSK_E_NOT_CAUCHY)) == "NotCauchy");
  CHECK(std::string(lsk_status_name(LSK_E_INTERNAL)) == "Internal");
  CHECK(std::string(lsk_status_name(static_cast<lsk_status>(57))) == "Unknown");

  lsk_map* m = nullptr;
  CHECK(lsk_map_clifford(8, 8, nullptr) == LSK_E_INVALID_ARGUMENT);
  CHECK(std::string(lsk_last_error()).find("NULL") != std::string::npos);
  CHECK(lsk_map_clifford(8, 8, &m) == LSK_OK);
  CHECK(std::string(lsk_last_error()).empty());
  double a = 0.0;
  CHECK(lsk_area(nullptr, nullptr, &a) == LSK_E_INVALID_ARGUMENT);
  CHECK(lsk_area(m, nullptr, nullptr) == LSK_E_INVALID_ARGUMENT);
  lsk_map_free(m);

  CHECK(lsk_map_clifford(7, 8, &m) == LSK_E_INVALID_ARGUMENT);
  CHECK(lsk_map_circles(-1.0, 1.0, 16, 16, &m) == LSK_E_INVALID_ARGUMENT);
  CHECK(lsk_map_product(1, 3, 1, 1, 32, 32, &m) == LSK_E_SHOOTING_FAILED);

  lsk_map_free(nullptr);
  lsk_config_free(nullptr);
  lsk_flow_free(nullptr);
  lsk_piecewise_free(nullptr);
  lsk_census_free(nullptr);
}

TEST_CASE("configuration through the C interface") {
  lsk_config* cfg = nullptr;
  REQUIRE(lsk_config_new(&cfg) == LSK_OK);
  char buf[64];
  CHECK(lsk_config_get(cfg, "grid", buf, sizeof buf) == LSK_OK);
  CHECK(std::string(buf) == "64");
  CHECK(lsk_config_set(cfg, "grid", "32") == LSK_OK);
  CHECK(lsk_config_get(cfg, "grid", buf, sizeof buf) == LSK_OK);
  CHECK(std::string(buf) == "32");
  CHECK(lsk_config_set(cfg, "grid", "-4") == LSK_E_PARSE);
  CHECK(lsk_config_set(cfg, "no_such_key", "1") == LSK_E_PARSE);
  CHECK(lsk_config_get(cfg, "no_such_key", buf, sizeof buf) == LSK_E_INVALID_ARGUMENT);

  size_t needed = 0;
  CHECK(lsk_config_echo(cfg, nullptr, 0, &needed) == LSK_OK);
  REQUIRE(needed > 1);
  std::vector<char> full(needed);
  CHECK(lsk_config_echo(cfg, full.data(), full.size(), nullptr) == LSK_OK);
  CHECK(std::strlen(full.data()) + 1 == needed);
  CHECK(std::string(full.data()).find("grid = 32") != std::string::npos);
  char small[8];
  CHECK(lsk_config_echo(cfg, small, sizeof small, nullptr) == LSK_OK);
  CHECK(std::strlen(small) == 7);

  const fs::path p = scratch("run.cfg");
  std::ofstream(p) << "# comment\ngrid = 16\nbackend = spectral\n";
  lsk_config* loaded = nullptr;
  REQUIRE(lsk_config_load(p.c_str(), &loaded) == LSK_OK);
  CHECK(lsk_config_get(loaded, "backend", buf, sizeof buf) == LSK_OK);
  CHECK(std::string(buf) == "spectral");
  std::ofstream(p) << "grid 16\n";
  lsk_config* bad = nullptr;
  CHECK(lsk_config_load(p.c_str(), &bad) == LSK_E_PARSE);
  CHECK(std::string(lsk_last_error()).find(":1:") != std::string::npos);
  CHECK(bad == nullptr);
  CHECK(lsk_config_load(scratch("missing.cfg").c_str(), &bad) == LSK_E_IO);
  lsk_config_free(loaded);
  lsk_config_free(cfg);
}

TEST_CASE("maps: values, snapshots and functionals of the Clifford torus") {
  lsk_map* m = nullptr;
  REQUIRE(lsk_map_clifford(32, 32, &m) == LSK_OK);
  int nx = 0, ny = 0;
  double t1 = 0, t2 = 0, time = -1;
  CHECK(lsk_map_info(m, &nx, &ny, &t1, &t2, &time) == LSK_OK);
  CHECK(nx == 32);
  CHECK(ny == 32);
  CHECK(t1 == 0.0);
  CHECK(t2 == 1.0);
  CHECK(time == 0.0);
  std::vector<double> xyz(4 * 32 * 32);
  CHECK(lsk_map_values(m, xyz.data()) == LSK_OK);
  CHECK(std::hypot(xyz[0], xyz[1]) == doctest::Approx(std::sqrt(2.0)));

  lsk_map* copy = nullptr;
  REQUIRE(lsk_map_from_values(32, 32, xyz.data(), 0.0, 1.0, 0.0, &copy) == LSK_OK);
  const fs::path p = scratch("clifford.snap");
  CHECK(lsk_map_write(copy, p.c_str()) == LSK_OK);
  lsk_map* back = nullptr;
  REQUIRE(lsk_map_read(p.c_str(), &back) == LSK_OK);
  std::vector<double> xyz2(xyz.size());
  CHECK(lsk_map_values(back, xyz2.data()) == LSK_OK);
  CHECK(xyz2 == xyz);
  char hex[65];
  CHECK(lsk_sha256_file(p.c_str(), hex, sizeof hex) == LSK_OK);
  CHECK(std::strlen(hex) == 64);
  CHECK(lsk_sha256_file(p.c_str(), hex, 10) == LSK_E_INVALID_ARGUMENT);

  double a = 0, e = 0, w = 0, res = 0, tol = 0;
  CHECK(lsk_area(m, nullptr, &a) == LSK_OK);
  // Fourth-order differences at 32 points per period: relative error about 1e-4.
  CHECK(a == doctest::Approx(8 * kPi * kPi).epsilon(5e-4));
  CHECK(lsk_energy(m, nullptr, &e) == LSK_OK);
  CHECK(e == doctest::Approx(8 * kPi * kPi / std::exp(1.0)).epsilon(5e-4));
  CHECK(lsk_willmore(m, nullptr, &w) == LSK_OK);
  CHECK(w > 0.0);
  CHECK(lsk_shrinker_residual(m, nullptr, &res, &tol) == LSK_OK);
  CHECK(res <= tol);
  CHECK(lsk_symplectic_residual(m, nullptr, &res, &tol) == LSK_OK);
  CHECK(res <= tol);
  lsk_entropy_report er{};
  CHECK(lsk_entropy(m, nullptr, &er) == LSK_OK);
  CHECK(er.lambda == doctest::Approx(2 * kPi / std::exp(1.0)).epsilon(1e-4));
  CHECK(er.t0 == doctest::Approx(1.0).epsilon(1e-3));
  int m1 = 0, m2 = 0, emb = 0;
  double closest = 0;
  CHECK(lsk_maslov(m, nullptr, &m1, &m2) == LSK_OK);
  CHECK(m1 == 2);
  CHECK(m2 == 2);
  CHECK(lsk_embedded(m, nullptr, &emb, &closest) == LSK_OK);
  CHECK(emb == 1);

  lsk_map* f8 = nullptr;
  REQUIRE(lsk_map_figure_eight(32, 32, &f8) == LSK_OK);
  CHECK(lsk_embedded(f8, nullptr, &emb, &closest) == LSK_OK);
  CHECK(emb == 0);
  CHECK(lsk_maslov(f8, nullptr, &m1, &m2) == LSK_OK);
  CHECK(m1 == 0);
  CHECK(m2 == 2);

  lsk_map* c12 = nullptr;
  REQUIRE(lsk_map_circles(1.0, 2.0, 32, 64, &c12) == LSK_OK);
  CHECK(lsk_shrinker_residual(c12, nullptr, &res, &tol) == LSK_OK);
  CHECK(res > tol);
  lsk_map* cp = nullptr;
  CHECK(lsk_map_set_tau(c12, 0.0, -1.0) == LSK_E_INVALID_ARGUMENT);

  lsk_map_free(cp);
  lsk_map_free(c12);
  lsk_map_free(f8);
  lsk_map_free(back);
  lsk_map_free(copy);
  lsk_map_free(m);
}

TEST_CASE("variational layer through the C interface") {
  lsk_config* cfg = nullptr;
  REQUIRE(lsk_config_new(&cfg) == LSK_OK);
  REQUIRE(lsk_config_set(cfg, "backend", "spectral") == LSK_OK);
  lsk_map* seed = nullptr;
  REQUIRE(lsk_map_circles(1.3, 1.5, 16, 16, &seed) == LSK_OK);
  lsk_map* cp = nullptr;
  double g = 1;
  int it = 0;
  REQUIRE(lsk_critical_point(seed, cfg, &cp, &g, &it) == LSK_OK);
  CHECK(g < 1e-6);
  CHECK(it > 0);
  double a = 0;
  CHECK(lsk_area(cp, cfg, &a) == LSK_OK);
  CHECK(a == doctest::Approx(8 * kPi * kPi).epsilon(1e-8));

  size_t count = 0;
  CHECK(lsk_spectrum(cp, cfg, nullptr, 0, &count) == LSK_OK);
  REQUIRE(count > 12);
  std::vector<double> ev(count);
  CHECK(lsk_spectrum(cp, cfg, ev.data(), ev.size(), &count) == LSK_OK);
  for (std::size_t k = 1; k < ev.size(); ++k) CHECK(ev[k - 1] <= ev[k]);
  int kernel = 0;
  for (double v : ev) kernel += std::abs(v) < 1e-6 ? 1 : 0;
  CHECK(kernel == 12);
  lsk_map_free(cp);
  lsk_map_free(seed);
  lsk_config_free(cfg);
}

TEST_CASE("flow handle: samples, snapshots, report and model") {
  lsk_config* cfg = nullptr;
  REQUIRE(lsk_config_new(&cfg) == LSK_OK);
  REQUIRE(lsk_config_set(cfg, "grid", "16") == LSK_OK);
  lsk_map* m = nullptr;
  REQUIRE(lsk_map_clifford(16, 16, &m) == LSK_OK);
  lsk_flow* fl = nullptr;
  REQUIRE(lsk_flow_run(m, cfg, &fl) == LSK_OK);
  lsk_singularity_report rep{};
  CHECK(lsk_flow_report(fl, &rep) == LSK_OK);
  CHECK(rep.T0_est == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(rep.is_type1 == 1);
  CHECK(rep.rescale_converged == 1);
  char stop[32], note[256];
  CHECK(lsk_flow_notes(fl, stop, sizeof stop, note, sizeof note) == LSK_OK);
  CHECK(std::string(stop) == "curvature");
  const size_t n = lsk_flow_sample_count(fl);
  REQUIRE(n > 10);
  lsk_flow_sample s0{}, s1{};
  CHECK(lsk_flow_sample_at(fl, 0, &s0) == LSK_OK);
  CHECK(lsk_flow_sample_at(fl, n - 1, &s1) == LSK_OK);
  CHECK(s0.t == 0.0);
  CHECK(s1.area < s0.area);
  CHECK(lsk_flow_sample_at(fl, n, &s1) == LSK_E_INVALID_ARGUMENT);
  CHECK(lsk_flow_snapshot_count(fl) > 1);
  lsk_map* snap = nullptr;
  CHECK(lsk_flow_snapshot(fl, 0, &snap) == LSK_OK);
  lsk_map_free(snap);
  lsk_map* model = nullptr;
  REQUIRE(lsk_flow_model(fl, &model) == LSK_OK);
  double a = 0;
  CHECK(lsk_area(model, cfg, &a) == LSK_OK);
  CHECK(a == doctest::Approx(8 * kPi * kPi).epsilon(1e-2));
  lsk_map_free(model);
  lsk_flow_free(fl);

  lsk_map* c12 = nullptr;
  REQUIRE(lsk_map_circles(1.0, 2.0, 16, 32, &c12) == LSK_OK);
  REQUIRE(lsk_flow_run(c12, cfg, &fl) == LSK_OK);
  model = nullptr;
  CHECK(lsk_flow_model(fl, &model) == LSK_E_NOT_CAUCHY);
  CHECK(model == nullptr);
  CHECK(lsk_flow_sample_count(nullptr) == 0);
  lsk_flow_free(fl);
  lsk_map_free(c12);
  lsk_map_free(m);
  lsk_config_free(cfg);
}

TEST_CASE("census handle") {
  lsk_config* cfg = nullptr;
  REQUIRE(lsk_config_new(&cfg) == LSK_OK);
  lsk_map *a = nullptr, *b = nullptr;
  REQUIRE(lsk_map_perturbed_clifford(16, 0, 1e-2, 5, cfg, &a) == LSK_OK);
  REQUIRE(lsk_map_perturbed_clifford(16, 1, 1e-2, 5, cfg, &b) == LSK_OK);
  const lsk_map* seeds[] = {a, b};
  const char* labels[] = {"clifford", "perturbed"};
  lsk_census* c = nullptr;
  REQUIRE(lsk_census_run(seeds, labels, 2, 100.0, cfg, &c) == LSK_OK);
  REQUIRE(lsk_census_entry_count(c) == 2);
  lsk_census_entry e{};
  char notice[128];
  CHECK(lsk_census_entry_at(c, 1, &e, notice, sizeof notice) == LSK_OK);
  CHECK(e.accepted == 1);
  CHECK(std::string(notice) == "perturbed");
  REQUIRE(lsk_census_cluster_count(c) == 1);
  lsk_census_cluster cl{};
  CHECK(lsk_census_cluster_at(c, 0, &cl) == LSK_OK);
  CHECK(cl.members == 2);
  int members[2] = {-1, -1};
  CHECK(lsk_census_cluster_members(c, 0, members, 2) == LSK_OK);
  CHECK(members[0] + members[1] == 1);
  CHECK(lsk_census_cluster_at(c, 1, &cl) == LSK_E_INVALID_ARGUMENT);
  lsk_census_free(c);
  c = nullptr;
  CHECK(lsk_census_run(nullptr, nullptr, 2, 100.0, cfg, &c) == LSK_E_INVALID_ARGUMENT);
  REQUIRE(lsk_census_run(seeds, nullptr, 1, 100.0, cfg, &c) == LSK_OK);
  CHECK(lsk_census_entry_at(c, 0, &e, notice, sizeof notice) == LSK_OK);
  CHECK(std::string(notice) == "seed0");
  lsk_census_free(c);
  lsk_map_free(a);
  lsk_map_free(b);
  lsk_config_free(cfg);
}
