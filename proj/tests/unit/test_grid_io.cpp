#include <doctest.h>

#include "io.hpp"
#include "seeds.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace lagshrink;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("lagshrink_test_" + name)).string();
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("grid indexing wraps periodically") {
  const GridSpec g(8, 10);
  CHECK(g.index(0, 0) == 0);
  CHECK(g.index(3, 2) == 3 + 8 * 2);
  CHECK(g.index(-1, 0) == 7);
  CHECK(g.index(8, -1) == 8 * 9);
  CHECK(code_of([] { GridSpec(2, 8); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { ConformalStructure(0.0, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("both backends act on Fourier modes through their wavenumbers") {
  for (const Backend b : {Backend::FiniteDifference4, Backend::Spectral}) {
    const GridSpec g(32, 16);
    const Differentiator d(g, b);
    Scalar f(g.size()), fx(g.size()), fy(g.size());
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double x = i * g.hx(), y = j * g.hy();
        f[g.index(i, j)] = std::sin(2 * kPi * (x + 2 * y));
        fx[g.index(i, j)] = d.wavenumber_x(1) * std::cos(2 * kPi * (x + 2 * y));
        fy[g.index(i, j)] = d.wavenumber_y(2) * std::cos(2 * kPi * (x + 2 * y));
      }
    CHECK((d.d1(f) - fx).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((d.d2(f) - fy).cwiseAbs().maxCoeff() < 1e-10);
    if (b == Backend::Spectral) CHECK(d.wavenumber_y(2) == doctest::Approx(4 * kPi));
    // summation by parts: <d1 f, h> = -<f, d1 h>
    const Scalar h = fx.cwiseProduct(fy) + f;
    CHECK(std::abs(d.d1(f).dot(h) + f.dot(d.d1(h))) < 1e-9 * f.norm() * h.norm());
  }
}

TEST_CASE("FD4 derivative converges at fourth order") {
  double err[2];
  for (int r = 0; r < 2; ++r) {
    const GridSpec g = GridSpec::square(32 << r);
    Scalar f(g.size()), fx(g.size());
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double x = i * g.hx();
        f[g.index(i, j)] = std::exp(std::sin(2 * kPi * x));
        fx[g.index(i, j)] = 2 * kPi * std::cos(2 * kPi * x) * f[g.index(i, j)];
      }
    err[r] = (Differentiator(g).d1(f) - fx).cwiseAbs().maxCoeff();
  }
  CHECK(std::log2(err[0] / err[1]) > 3.8);
}

TEST_CASE("poisson solve inverts the grid laplacian") {
  const GridSpec g(16, 24);
  const Differentiator d(g);
  CounterRng rng(7, 1);
  const Scalar f = random_bandlimited(g, 3, rng);
  const Scalar lap = d.d1(d.d1(f)) + d.d2(d.d2(f));
  const Scalar back = d.solve_poisson(lap);
  CHECK((back - (f.array() - f.mean()).matrix()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("snapshot round trip is bit-faithful") {
  const GridSpec g(12, 8);
  CounterRng rng(3, 4);
  TorusMap u(g);
  for (int a = 0; a < 4; ++a) u.values().row(a) = random_bandlimited(g, 2, rng).transpose() * (a + 0.1 / 3.0);
  const std::string p = temp_path("roundtrip.snap");
  write_snapshot(p, u, ConformalStructure(0.125, 1.0 / 3.0), 0.7);
  const Snapshot s = read_snapshot(p);
  CHECK(s.map.grid() == g);
  CHECK((s.map.values() - u.values()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.tau.tau1 == 0.125);
  CHECK(s.tau.tau2 == 1.0 / 3.0);
  CHECK(s.time == 0.7);
  std::remove(p.c_str());
}

TEST_CASE("malformed snapshots are rejected with the offending line") {
  const std::string p = temp_path("bad.snap");
  {
    std::ofstream f(p);
    f << "TORUSMAP 8 8 0 1 0\n";
    for (int k = 0; k < 10; ++k) f << "1 2 3 4\n";
  }
  try {
    read_snapshot(p);
    FAIL("truncated file accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find(":12:") != std::string::npos);
  }
  {
    std::ofstream f(p);
    f << "TORUSMAP 8 8 0 -1 0\n";
  }
  CHECK(code_of([&] { read_snapshot(p); }) == ErrorCode::Parse);
  {
    std::ofstream f(p);
    f << "TORUSMAP 8 8 0 1 0\n";
    for (int k = 0; k < 64; ++k) f << (k == 5 ? "1 nan 3 4\n" : "1 2 3 4\n");
  }
  CHECK(code_of([&] { read_snapshot(p); }) == ErrorCode::Parse);
  CHECK(code_of([&] { read_snapshot(temp_path("does_not_exist.snap")); }) == ErrorCode::Io);
  std::remove(p.c_str());
}

TEST_CASE("config rejects unknown keys and non-positive tolerances") {
  RunConfig c;
  CHECK(c.get_int("grid") == 64);
  CHECK(c.get_string("backend") == "fd4");
  c.parse("# comment\ngrid = 32\nbackend = spectral\n");
  CHECK(c.get_int("grid") == 32);
  CHECK(code_of([&] { c.set("no_such_key", "1"); }) == ErrorCode::Parse);
  CHECK(code_of([&] { c.set("tol_crit", "0"); }) == ErrorCode::Parse);
  CHECK(code_of([&] { c.set("tol_crit", "-1e-3"); }) == ErrorCode::Parse);
  CHECK(code_of([&] { c.set("grid", "abc"); }) == ErrorCode::Parse);
  CHECK(code_of([&] { c.set("backend", "chebyshev"); }) != ErrorCode::Io);
  CHECK(code_of([&] { c.parse("grid 32\n"); }) == ErrorCode::Parse);
  const std::string echo = c.echo();
  CHECK(echo.find("grid = 32\n") != std::string::npos);
  RunConfig d;
  d.parse(echo);
  CHECK(d.echo() == echo);
}

TEST_CASE("counter RNG streams are deterministic and independent") {
  CounterRng a(42, 1), b(42, 1), c(42, 2);
  for (int k = 0; k < 100; ++k) {
    const auto x = a(), y = b(), z = c();
    CHECK(x == y);
    CHECK(x != z);
  }
  CounterRng n(1, 1);
  double m = 0, s = 0;
  const int N = 20000;
  for (int k = 0; k < N; ++k) {
    const double v = n.normal();
    m += v / N;
    s += v * v / N;
  }
  CHECK(std::abs(m) < 0.05);
  CHECK(std::abs(s - 1.0) < 0.05);
}

TEST_CASE("sha256 of a known file") {
  const std::string p = temp_path("abc.txt");
  {
    std::ofstream f(p, std::ios::binary);
    f << "abc";
  }
  CHECK(sha256_file(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  std::remove(p.c_str());
}
