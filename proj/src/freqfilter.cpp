#include "otdet/freqfilter.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace otdet {

namespace {

// FFTW plan creation and destruction are not thread safe; execution is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  fftw_complex* data = nullptr;
  explicit FftwBuffer(std::size_t n) {
    data = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

struct PlanGuard {
  fftw_plan plan = nullptr;
  PlanGuard(int h, int w, fftw_complex* in, fftw_complex* out, int sign) {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_2d(h, w, in, out, sign, FFTW_ESTIMATE);
    if (!plan) throw std::runtime_error("fftw plan creation failed");
  }
  ~PlanGuard() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
  PlanGuard(const PlanGuard&) = delete;
  PlanGuard& operator=(const PlanGuard&) = delete;
};

// Signed frequency index: 0..n/2 then negative.
int signed_freq(int k, int n) { return k <= n / 2 ? k : k - n; }

}  // namespace

Spectrum fft2(const GrayImage& img) {
  std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  FftwBuffer in(n), out(n);
  for (std::size_t i = 0; i < n; ++i) {
    in.data[i][0] = img.data[i];
    in.data[i][1] = 0.0;
  }
  PlanGuard plan(img.height, img.width, in.data, out.data, FFTW_FORWARD);
  fftw_execute(plan.plan);
  Spectrum spec(img.width, img.height);
  for (std::size_t i = 0; i < n; ++i)
    spec.coeff[i] = {out.data[i][0], out.data[i][1]};
  return spec;
}

GrayImage ifft2_real(const Spectrum& spec) {
  if (spec.width < 1 || spec.height < 1)
    throw std::invalid_argument("ifft2_real: empty spectrum");
  std::size_t n = static_cast<std::size_t>(spec.width) * spec.height;
  FftwBuffer in(n), out(n);
  for (std::size_t i = 0; i < n; ++i) {
    in.data[i][0] = spec.coeff[i].real();
    in.data[i][1] = spec.coeff[i].imag();
  }
  PlanGuard plan(spec.height, spec.width, in.data, out.data, FFTW_BACKWARD);
  fftw_execute(plan.plan);
  GrayImage img(spec.width, spec.height);
  double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) img.data[i] = out.data[i][0] * scale;
  return img;
}

Spectrum ideal_lowpass(const Spectrum& spec, const FilterParams& p) {
  if (!(p.lowpass_radius > 0.0) || p.lowpass_radius > 1.0)
    throw std::invalid_argument("ideal_lowpass: radius must be in (0, 1]");
  Spectrum out = spec;
  double half_w = spec.width / 2.0;
  double half_h = spec.height / 2.0;
  double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  for (int r = 0; r < spec.height; ++r) {
    double fv = signed_freq(r, spec.height) / half_h;
    for (int c = 0; c < spec.width; ++c) {
      double fu = signed_freq(c, spec.width) / half_w;
      double radius = std::sqrt(fu * fu + fv * fv) * inv_sqrt2;
      if (radius > p.lowpass_radius) out.at(r, c) = 0.0;
    }
  }
  return out;
}

GrayImage log_filter(const Spectrum& spec, const FilterParams& p) {
  if (!(p.log_sigma > 0.0)) throw std::invalid_argument("log_filter: sigma must be > 0");
  Spectrum shaped = spec;
  double s2 = p.log_sigma * p.log_sigma;
  for (int r = 0; r < spec.height; ++r) {
    double v = 2.0 * std::numbers::pi * signed_freq(r, spec.height) / spec.height;
    for (int c = 0; c < spec.width; ++c) {
      double u = 2.0 * std::numbers::pi * signed_freq(c, spec.width) / spec.width;
      double w2 = u * u + v * v;
      shaped.at(r, c) *= -w2 * std::exp(-w2 * s2 / 2.0);
    }
  }
  return ifft2_real(shaped);
}

GrayImage fourier_log(const GrayImage& img, const FilterParams& p) {
  GrayImage response = log_filter(ideal_lowpass(fft2(img), p), p);
  double lo = std::abs(response.data[0]);
  double hi = lo;
  for (double& v : response.data) {
    v = std::abs(v);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double range = hi - lo;
  if (range <= 0.0) {
    for (double& v : response.data) v = 0.0;
  } else {
    for (double& v : response.data) v = (v - lo) / range * 255.0;
  }
  return response;
}

GrayImage spectrum_magnitude_image(const Spectrum& spec) {
  GrayImage img(spec.width, spec.height);
  double hi = 0.0;
  for (int r = 0; r < spec.height; ++r)
    for (int c = 0; c < spec.width; ++c) {
      // Shift so the DC term lands in the center.
      int sr = (r + spec.height / 2) % spec.height;
      int sc = (c + spec.width / 2) % spec.width;
      double v = std::log1p(std::abs(spec.at(r, c)));
      img.at(sr, sc) = v;
      hi = std::max(hi, v);
    }
  if (hi > 0.0)
    for (double& v : img.data) v = v / hi * 255.0;
  return img;
}

}  // namespace otdet
