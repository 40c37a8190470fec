#pragma once

#include <complex>
#include <string>
#include <vector>

#include "json.hpp"

namespace gmcycles {

using cplx = std::complex<double>;

// Truncated Fourier series of a real periodic signal. Only the half-spectrum
// is stored: c[k] for k = 0..kappa, with c(-k) = conj(c(k)) implied. c[0] is
// kept real on construction.
struct FourierSeries {
  double period = 1.0;
  std::vector<cplx> c;

  int kappa() const { return static_cast<int>(c.size()) - 1; }

  // Signed-index access; |k| beyond kappa gives 0.
  cplx coeff(int k) const {
    int a = k < 0 ? -k : k;
    if (a >= static_cast<int>(c.size())) return {0.0, 0.0};
    return k < 0 ? std::conj(c[a]) : c[a];
  }

  // c(0) + sum_k 2 Re(c(k) e^{2 pi i k t / T}); real by symmetry.
  double evaluate(double t) const;
};

// In-place iterative radix-2 FFT; forward uses e^{-2 pi i jk/n}. Inverse
// divides by n. Size must be a power of two.
void fft_radix2(std::vector<cplx>& a, bool inverse = false);

// Coefficients c(k) = (1/n) sum_j f_j e^{-2 pi i k j / n} for k = 0..kappa.
// n must be a power of two and kappa < n/2.
FourierSeries dft(const std::vector<double>& samples, double period, int kappa);

// Coefficient sequence of the pointwise product; widths add.
FourierSeries convolve(const FourierSeries& a, const FourierSeries& b);

// Differentiate a sampled periodic signal in the frequency domain and return
// the derivative samples on the same grid. The Nyquist bin is dropped.
std::vector<double> spectral_derivative(const std::vector<double>& samples,
                                        double period);

// The six coefficient sequences the periodic-orbit conditions involve, in
// the fixed order beta_s, beta_1, beta_2, beta_m, s_x, g_x.
struct ScaleElasticityCoeffs {
  FourierSeries beta_s, beta_1, beta_2, beta_m, s_x, g_x;
};

// Residuals of the three coefficient-space flow conditions, stored as
// half-spectra over k = 0..kappa_m.
struct ResidualSet {
  std::vector<cplx> c_s, c_1, c_2;

  double max_abs() const;
  // Squared norm counting both signs of k: |c(0)|^2 + 2 sum_{k>0} |c(k)|^2
  // summed over the three sequences.
  double norm2() const;
};

// Scratch buffers so repeated residual evaluation does not allocate.
struct ConvWorkspace {
  std::vector<cplx> d_s, t1, t2, inner;
};

// Full-width convolutions, then restriction to |k| <= kappa_m.
void algebraic_residuals_into(const ScaleElasticityCoeffs& f, int kappa_m,
                              ConvWorkspace& ws, ResidualSet& out);
ResidualSet algebraic_residuals(const ScaleElasticityCoeffs& f, int kappa_m);

// Flat layout used by the sampler: per function c(0), Re c(1), Im c(1), ...
// in the ScaleElasticityCoeffs field order; 6 (2 kappa_m + 1) reals total.
std::vector<double> pack(const ScaleElasticityCoeffs& f, int kappa_m);
ScaleElasticityCoeffs unpack(const std::vector<double>& x, int kappa_m,
                             double period = 1.0);
void unpack_into(const std::vector<double>& x, int kappa_m, double period,
                 ScaleElasticityCoeffs& out);

nlohmann::json fourier_to_json(const FourierSeries& f);
FourierSeries fourier_from_json(const nlohmann::json& j);

}  // namespace gmcycles
