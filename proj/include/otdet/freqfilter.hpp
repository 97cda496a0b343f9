#pragma once

#include <complex>
#include <vector>

#include "otdet/raster.hpp"

namespace otdet {

/// Full complex 2-D spectrum, row-major, DC term at index (0, 0).
struct Spectrum {
  int width = 0;
  int height = 0;
  std::vector<std::complex<double>> coeff;

  Spectrum() = default;
  Spectrum(int w, int h)
      : width(w), height(h), coeff(static_cast<std::size_t>(w) * h) {}
  std::complex<double>& at(int r, int c) {
    return coeff[static_cast<std::size_t>(r) * width + c];
  }
  const std::complex<double>& at(int r, int c) const {
    return coeff[static_cast<std::size_t>(r) * width + c];
  }
};

struct FilterParams {
  /// Cutoff as a fraction of the Nyquist radius, in (0, 1]. 1.0 keeps every
  /// coefficient.
  double lowpass_radius = 0.5;
  /// Gaussian scale of the Laplacian-of-Gaussian response, in pixels.
  double log_sigma = 2.0;
};

Spectrum fft2(const GrayImage& img);

/// Inverse transform, real part. Round trip fft2 -> ifft2_real reproduces the
/// input up to floating point error.
GrayImage ifft2_real(const Spectrum& spec);

/// Zeroes coefficients whose normalized frequency radius exceeds the cutoff.
Spectrum ideal_lowpass(const Spectrum& spec, const FilterParams& p);

/// Multiplies by the LoG frequency response
///   -(u^2 + v^2) * exp(-(u^2 + v^2) * sigma^2 / 2)
/// with (u, v) the centered angular frequencies, then inverts. Output values
/// are signed and unscaled.
GrayImage log_filter(const Spectrum& spec, const FilterParams& p);

/// Full chain: transform, low-pass, LoG, invert, take magnitudes and rescale
/// them to [0, 255] by the min-max rule. A constant response maps to all
/// zeros.
GrayImage fourier_log(const GrayImage& img, const FilterParams& p);

/// Log-magnitude rendering of a spectrum with the DC term centered, for
/// inspection dumps.
GrayImage spectrum_magnitude_image(const Spectrum& spec);

}  // namespace otdet
