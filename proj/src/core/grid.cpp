#include "grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <sstream>

namespace lagshrink {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::NotLagrangian: return "NotLagrangian";
    case ErrorCode::FrameDegenerate: return "FrameDegenerate";
    case ErrorCode::NonIntegerPeriod: return "NonIntegerPeriod";
    case ErrorCode::NotClosed: return "NotClosed";
    case ErrorCode::ProjectionDiverged: return "ProjectionDiverged";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::NotCritical: return "NotCritical";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::MemoryGuard: return "MemoryGuard";
    case ErrorCode::StepRejected: return "StepRejected";
    case ErrorCode::NoSingularity: return "NoSingularity";
    case ErrorCode::NotCauchy: return "NotCauchy";
    case ErrorCode::NoDecreaseFound: return "NoDecreaseFound";
    case ErrorCode::ShootingFailed: return "ShootingFailed";
    case ErrorCode::NotShrinker: return "NotShrinker";
  }
  return "Unknown";
}

GridSpec::GridSpec(int nx_, int ny_) : nx(nx_), ny(ny_) {
  if (nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0) {
    std::ostringstream os;
    os << "grid must be even and at least 8 in each direction, got " << nx << "x" << ny;
    fail(ErrorCode::InvalidArgument, os.str());
  }
}

ConformalStructure::ConformalStructure(double t1, double t2) : tau1(t1), tau2(t2) {
  if (!(t2 > 0.0) || !std::isfinite(t1) || !std::isfinite(t2))
    fail(ErrorCode::InvalidArgument, "tau2 must be positive (upper half-plane)");
}

Eigen::Matrix2d metric_g_tau(const ConformalStructure& tau) {
  if (!(tau.tau2 > 0.0)) fail(ErrorCode::InvalidArgument, "tau2 must be positive (upper half-plane)");
  Eigen::Matrix2d p;
  p << 1.0, tau.tau1, 0.0, tau.tau2;
  return p.transpose() * p;
}

// ---------------------------------------------------------------------------

TorusMap::TorusMap(GridSpec grid) : grid_(grid), values_(Field4::Zero(4, grid.size())) {}

TorusMap::TorusMap(GridSpec grid, Field4 values) : grid_(grid), values_(std::move(values)) {
  if (values_.cols() != grid_.size())
    fail(ErrorCode::InvalidArgument, "value count does not match grid");
}

TorusMap::TorusMap(GridSpec grid, Field4 values, const Lift& lift)
    : TorusMap(grid, std::move(values)) {
  lift_ = lift;
}

Vec4 TorusMap::position(int node) const {
  Vec4 p = values_.col(node);
  if (has_lift()) {
    const int i = node % grid_.nx;
    const int j = node / grid_.nx;
    p += lift_.col(0) * (i * grid_.hx()) + lift_.col(1) * (j * grid_.hy());
  }
  return p;
}

Field4 TorusMap::positions() const {
  if (!has_lift()) return values_;
  Field4 out(4, grid_.size());
  for (int k = 0; k < grid_.size(); ++k) out.col(k) = position(k);
  return out;
}

void TorusMap::validate_finite() const {
  if (!values_.allFinite() || !lift_.allFinite())
    fail(ErrorCode::InvalidArgument, "map contains non-finite values");
}

TorusMap TorusMap::translated(const Vec4& v) const {
  TorusMap out = *this;
  out.values_.colwise() += v;
  return out;
}

TorusMap TorusMap::scaled(double c) const {
  TorusMap out = *this;
  out.values_ *= c;
  out.lift_ *= c;
  return out;
}

TorusMap TorusMap::transformed(const Eigen::Matrix4d& r) const {
  TorusMap out = *this;
  out.values_ = r * values_;
  out.lift_ = r * lift_;
  return out;
}

// ---------------------------------------------------------------------------

const char* backend_name(Backend b) {
  return b == Backend::Spectral ? "spectral" : "fd4";
}

Backend parse_backend(const std::string& name) {
  if (name == "fd4") return Backend::FiniteDifference4;
  if (name == "spectral") return Backend::Spectral;
  fail(ErrorCode::InvalidArgument, "unknown derivative backend '" + name + "' (expected fd4 or spectral)");
}

namespace {

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {}
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  void* ptr;
};

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

int signed_frequency(int m, int n) { return m <= n / 2 ? m : m - n; }

}  // namespace

namespace detail {

struct FftPlan {
  int nx, ny;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  FftPlan(int nx_, int ny_) : nx(nx_), ny(ny_) {
    FftwBuffer real(sizeof(double) * nx * ny);
    FftwBuffer spec(sizeof(fftw_complex) * ny * (nx / 2 + 1));
    std::lock_guard<std::mutex> lock(fftw_mutex());
    forward = fftw_plan_dft_r2c_2d(ny, nx, static_cast<double*>(real.ptr),
                                   static_cast<fftw_complex*>(spec.ptr), FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_2d(ny, nx, static_cast<fftw_complex*>(spec.ptr),
                                    static_cast<double*>(real.ptr), FFTW_ESTIMATE);
  }
  ~FftPlan() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t spectrum_size() const { return static_cast<std::size_t>(ny) * (nx / 2 + 1); }

  // Applies a Fourier multiplier mult(mx, my) -> complex to f.
  template <typename Multiplier>
  Scalar apply(const Scalar& f, Multiplier mult) const {
    FftwBuffer real(sizeof(double) * nx * ny);
    FftwBuffer spec(sizeof(fftw_complex) * spectrum_size());
    auto* r = static_cast<double*>(real.ptr);
    auto* c = reinterpret_cast<std::complex<double>*>(spec.ptr);
    std::copy(f.data(), f.data() + f.size(), r);
    fftw_execute_dft_r2c(forward, r, reinterpret_cast<fftw_complex*>(c));
    const int half = nx / 2 + 1;
    for (int l = 0; l < ny; ++l) {
      const int my = signed_frequency(l, ny);
      for (int m = 0; m < half; ++m) c[l * half + m] *= mult(m, my);
    }
    fftw_execute_dft_c2r(backward, reinterpret_cast<fftw_complex*>(c), r);
    Scalar out(f.size());
    const double norm = 1.0 / (static_cast<double>(nx) * ny);
    for (int k = 0; k < f.size(); ++k) out[k] = r[k] * norm;
    return out;
  }
};

}  // namespace detail

namespace {

std::shared_ptr<const detail::FftPlan> cached_fft(int nx, int ny) {
  static std::mutex m;
  static std::map<std::pair<int, int>, std::shared_ptr<const detail::FftPlan>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto& slot = cache[{nx, ny}];
  if (!slot) slot = std::make_shared<const detail::FftPlan>(nx, ny);
  return slot;
}

}  // namespace

const detail::FftPlan& Differentiator::fft() const {
  if (!fft_) fft_ = cached_fft(grid_.nx, grid_.ny);
  return *fft_;
}

Differentiator::Differentiator(GridSpec grid, Backend backend)
    : grid_(grid), backend_(backend) {}

double Differentiator::wavenumber_x(int m) const {
  const int n = grid_.nx;
  if (2 * std::abs(m) == n) return 0.0;
  if (backend_ == Backend::Spectral) return 2.0 * kPi * m;
  const double th = 2.0 * kPi * m / n;
  return (8.0 * std::sin(th) - std::sin(2.0 * th)) / (6.0 * grid_.hx());
}

double Differentiator::wavenumber_y(int m) const {
  const int n = grid_.ny;
  if (2 * std::abs(m) == n) return 0.0;
  if (backend_ == Backend::Spectral) return 2.0 * kPi * m;
  const double th = 2.0 * kPi * m / n;
  return (8.0 * std::sin(th) - std::sin(2.0 * th)) / (6.0 * grid_.hy());
}

Scalar Differentiator::spectral_derivative(const Scalar& f, int axis) const {
  const std::complex<double> i(0.0, 1.0);
  if (axis == 0) return fft().apply(f, [&](int m, int) { return i * wavenumber_x(m); });
  return fft().apply(f, [&](int, int my) { return i * wavenumber_y(my); });
}

Scalar Differentiator::d1(const Scalar& f) const {
  if (backend_ == Backend::Spectral) return spectral_derivative(f, 0);
  const int nx = grid_.nx, ny = grid_.ny;
  const double c = 1.0 / (12.0 * grid_.hx());
  Scalar out(f.size());
  for (int j = 0; j < ny; ++j) {
    const double* row = f.data() + j * nx;
    double* o = out.data() + j * nx;
    for (int i = 0; i < nx; ++i) {
      const int ip1 = i + 1 < nx ? i + 1 : i + 1 - nx;
      const int ip2 = i + 2 < nx ? i + 2 : i + 2 - nx;
      const int im1 = i - 1 >= 0 ? i - 1 : i - 1 + nx;
      const int im2 = i - 2 >= 0 ? i - 2 : i - 2 + nx;
      o[i] = c * (-row[ip2] + 8.0 * row[ip1] - 8.0 * row[im1] + row[im2]);
    }
  }
  return out;
}

Scalar Differentiator::d2(const Scalar& f) const {
  if (backend_ == Backend::Spectral) return spectral_derivative(f, 1);
  const int nx = grid_.nx, ny = grid_.ny;
  const double c = 1.0 / (12.0 * grid_.hy());
  Scalar out(f.size());
  for (int j = 0; j < ny; ++j) {
    const int jp1 = (j + 1) % ny, jp2 = (j + 2) % ny;
    const int jm1 = (j - 1 + ny) % ny, jm2 = (j - 2 + ny) % ny;
    for (int i = 0; i < nx; ++i)
      out[i + nx * j] = c * (-f[i + nx * jp2] + 8.0 * f[i + nx * jp1] - 8.0 * f[i + nx * jm1] +
                             f[i + nx * jm2]);
  }
  return out;
}

Field4 Differentiator::d1(const Field4& f) const {
  Field4 out(4, f.cols());
  for (int r = 0; r < 4; ++r) out.row(r) = d1(Scalar(f.row(r).transpose())).transpose();
  return out;
}

Field4 Differentiator::d2(const Field4& f) const {
  Field4 out(4, f.cols());
  for (int r = 0; r < 4; ++r) out.row(r) = d2(Scalar(f.row(r).transpose())).transpose();
  return out;
}

Scalar Differentiator::solve_poisson(const Scalar& rhs) const {
  return fft().apply(rhs, [&](int m, int my) -> std::complex<double> {
    const double kx = wavenumber_x(m), ky = wavenumber_y(my);
    const double symbol = -(kx * kx + ky * ky);
    if (std::abs(symbol) < 1e-300) return 0.0;
    return 1.0 / symbol;
  });
}


}  // namespace lagshrink
