#include "io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace lagshrink {

void write_snapshot(const std::string& path, const TorusMap& u, const ConformalStructure& tau, double time) {
  if (u.has_lift()) fail(ErrorCode::InvalidArgument, "snapshots store periodic maps only; this map has a linear lift");
  u.validate_finite();
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "w"), &std::fclose);
  if (!f) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  std::fprintf(f.get(), "TORUSMAP %d %d %.17g %.17g %.17g\n", u.grid().nx, u.grid().ny, tau.tau1, tau.tau2, time);
  const Field4& v = u.values();
  for (int k = 0; k < u.grid().size(); ++k)
    std::fprintf(f.get(), "%.17g %.17g %.17g %.17g\n", v(0, k), v(1, k), v(2, k), v(3, k));
  if (std::ferror(f.get())) fail(ErrorCode::Io, "write error on '" + path + "'");
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Parse, path + ":1: empty file");
  std::istringstream hs(line);
  std::string magic;
  int nx = 0, ny = 0;
  double t1 = 0, t2 = 0, time = 0;
  std::string extra;
  if (!(hs >> magic >> nx >> ny >> t1 >> t2 >> time) || magic != "TORUSMAP" || (hs >> extra))
    fail(ErrorCode::Parse, path + ":1: malformed header (expected 'TORUSMAP nx ny tau1 tau2 time')");
  if (!(t2 > 0.0)) fail(ErrorCode::Parse, path + ":1: tau2 must be positive");
  if (!std::isfinite(t1) || !std::isfinite(time)) fail(ErrorCode::Parse, path + ":1: non-finite header value");
  GridSpec grid;
  try {
    grid = GridSpec(nx, ny);
  } catch (const Error& e) {
    fail(ErrorCode::Parse, path + ":1: " + e.what());
  }
  Field4 values(4, grid.size());
  for (int k = 0; k < grid.size(); ++k) {
    const int lineno = k + 2;
    if (!std::getline(in, line)) {
      std::ostringstream os;
      os << path << ":" << lineno << ": expected " << grid.size() << " data lines, file ends after " << k;
      fail(ErrorCode::Parse, os.str());
    }
    std::istringstream ls(line);
    double a[4];
    if (!(ls >> a[0] >> a[1] >> a[2] >> a[3]) || (ls >> extra)) {
      std::ostringstream os;
      os << path << ":" << lineno << ": expected 4 numbers";
      fail(ErrorCode::Parse, os.str());
    }
    for (double x : a)
      if (!std::isfinite(x)) {
        std::ostringstream os;
        os << path << ":" << lineno << ": non-finite value";
        fail(ErrorCode::Parse, os.str());
      }
    values.col(k) << a[0], a[1], a[2], a[3];
  }
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos)
      fail(ErrorCode::Parse, path + ": more data lines than nx*ny");
  return {TorusMap(grid, std::move(values)), ConformalStructure(t1, t2), time};
}

// ---------------------------------------------------------------------------

namespace {

enum class KeyType { Double, Int, U64, Bool, String };

struct KeySpec {
  const char* name;
  KeyType type;
  const char* fallback;
  bool allow_zero;
};

const KeySpec kKeys[] = {
    {"grid", KeyType::Int, "64", false},
    {"backend", KeyType::String, "fd4", false},
    {"seed", KeyType::U64, "20240611", true},
    {"tol_shrink_factor", KeyType::Double, "10", false},
    {"tol_lag_factor", KeyType::Double, "50", false},
    {"tol_crit", KeyType::Double, "1e-6", false},
    {"entropy_lattice", KeyType::Int, "5", false},
    {"entropy_t_points", KeyType::Int, "17", false},
    {"entropy_refine_starts", KeyType::Int, "5", false},
    {"entropy_simplex_tol", KeyType::Double, "1e-6", false},
    {"newton_max_iter", KeyType::Int, "100", false},
    {"spectrum_n", KeyType::Int, "16", false},
    {"lojasiewicz_directions", KeyType::Int, "20", false},
    {"lojasiewicz_eps_count", KeyType::Int, "10", false},
    {"lojasiewicz_eps_min", KeyType::Double, "1e-4", false},
    {"lojasiewicz_eps_max", KeyType::Double, "1e-1", false},
    {"flow_sigma_cfl", KeyType::Double, "0.1", false},
    {"flow_t_max", KeyType::Double, "10", false},
    {"flow_maxA2_stop", KeyType::Double, "1e6", false},
    {"flow_dt_min", KeyType::Double, "1e-14", false},
    {"flow_snapshot_every", KeyType::Int, "0", true},
    {"flow_equidistribute", KeyType::Bool, "false", true},
    {"flow_type1_max", KeyType::Double, "100", false},
    {"rescale_ds", KeyType::Double, "0.5", false},
    {"rescale_tol", KeyType::Double, "1e-3", false},
    {"piecewise_lambda", KeyType::Double, "100", false},
    {"piecewise_delta", KeyType::Double, "0.1", false},
    {"piecewise_k_max", KeyType::Int, "16", false},
    {"piecewise_c_min", KeyType::Double, "1e-4", false},
    {"piecewise_k_exact", KeyType::Int, "8", false},
    {"census_perturbed", KeyType::Int, "20", true},
    {"census_amplitude", KeyType::Double, "1e-2", false},
};

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : kKeys)
    if (key == k.name) return &k;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, bool& out) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return out = true, true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return out = false, true;
  return false;
}

void validate(const KeySpec& k, const std::string& v) {
  const std::string where = "config key '" + std::string(k.name) + "'";
  std::size_t pos = 0;
  try {
    switch (k.type) {
      case KeyType::Double: {
        const double d = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument("");
        if (d < 0.0 || (d == 0.0 && !k.allow_zero)) fail(ErrorCode::Parse, where + " must be positive, got " + v);
        return;
      }
      case KeyType::Int: {
        const long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        if (i < 0 || (i == 0 && !k.allow_zero)) fail(ErrorCode::Parse, where + " must be positive, got " + v);
        return;
      }
      case KeyType::U64: {
        if (!v.empty() && v[0] == '-') throw std::invalid_argument("");
        std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return;
      }
      case KeyType::Bool: {
        bool b;
        if (!parse_bool(v, b)) throw std::invalid_argument("");
        return;
      }
      case KeyType::String:
        if (std::string(k.name) == "backend") parse_backend(v);
        return;
    }
  } catch (const std::invalid_argument&) {
    fail(ErrorCode::Parse, where + ": cannot parse '" + v + "'");
  } catch (const std::out_of_range&) {
    fail(ErrorCode::Parse, where + ": value out of range '" + v + "'");
  }
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& k : kKeys) values_[k.name] = k.fallback;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  RunConfig c;
  c.parse(ss.str(), path);
  return c;
}

void RunConfig::parse(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::Parse, origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      fail(e.code(), origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec* k = find_key(key);
  if (!k) fail(ErrorCode::Parse, "unknown config key '" + key + "'");
  validate(*k, value);
  values_[key] = value;
}

namespace {
const std::string& lookup(const std::map<std::string, std::string>& m, const std::string& key) {
  const auto it = m.find(key);
  if (it == m.end()) fail(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
  return it->second;
}
}  // namespace

double RunConfig::get_double(const std::string& key) const { return std::stod(lookup(values_, key)); }
int RunConfig::get_int(const std::string& key) const { return std::stoi(lookup(values_, key)); }
std::uint64_t RunConfig::get_u64(const std::string& key) const { return std::stoull(lookup(values_, key)); }
std::string RunConfig::get_string(const std::string& key) const { return lookup(values_, key); }
bool RunConfig::get_bool(const std::string& key) const {
  bool b = false;
  parse_bool(lookup(values_, key), b);
  return b;
}

std::string RunConfig::echo() const {
  std::ostringstream os;
  for (const auto& [k, v] : values_) os << k << " = " << v << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

CounterRng::result_type CounterRng::operator()() {
  return splitmix64(splitmix64(splitmix64(seed_) ^ stream_) ^ counter_++);
}

double CounterRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
  // Box-Muller; one draw per call keeps the stream position explicit.
  const double u1 = 1.0 - uniform(), u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

Scalar random_bandlimited(const GridSpec& grid, int band, CounterRng& rng) {
  Scalar f = Scalar::Zero(grid.size());
  for (int mx = -band; mx <= band; ++mx)
    for (int my = -band; my <= band; ++my) {
      if (mx == 0 && my == 0) continue;
      const double amp = rng.normal() / (1.0 + mx * mx + my * my);
      const double phase = 2.0 * kPi * rng.uniform();
      for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
          f[grid.index(i, j)] += amp * std::cos(2.0 * kPi * (mx * i * grid.hx() + my * j * grid.hy()) + phase);
    }
  const double m = f.cwiseAbs().maxCoeff();
  if (m > 0.0) f /= m;
  return f;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, void (*)(EVP_MD_CTX*)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

}  // namespace lagshrink
