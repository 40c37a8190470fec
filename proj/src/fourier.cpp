#include "gmcycles/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gmcycles {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

void check_period(double t) {
  if (!(std::isfinite(t) && t > 0.0))
    throw std::invalid_argument("period must be positive and finite");
}

// Convolution of conjugate-symmetric half-spectra: out[k] for k = 0..ka+kb,
// out(k) = sum_j a(j) b(k-j) with signed indices resolved by conjugation.
void conv_half(const cplx* a, int ka, const cplx* b, int kb, cplx* out) {
  auto at = [](const cplx* h, int k) {
    return k < 0 ? std::conj(h[-k]) : h[k];
  };
  for (int k = 0; k <= ka + kb; ++k) {
    cplx acc{0.0, 0.0};
    int jlo = std::max(-ka, k - kb);
    int jhi = std::min(ka, k + kb);
    for (int j = jlo; j <= jhi; ++j) acc += at(a, j) * at(b, k - j);
    out[k] = acc;
  }
}

}  // namespace

void fft_radix2(std::vector<cplx>& a, bool inverse) {
  std::size_t n = a.size();
  if (!power_of_two(n)) throw std::invalid_argument("fft size must be a power of two >= 2");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  std::vector<cplx> tw(n / 2);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = kTwoPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    std::size_t half = len / 2;
    for (std::size_t j = 0; j < half; ++j)
      tw[j] = std::polar(1.0, ang * static_cast<double>(j));
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < half; ++j) {
        cplx u = a[i + j];
        cplx v = a[i + j + half] * tw[j];
        a[i + j] = u + v;
        a[i + j + half] = u - v;
      }
    }
  }
  if (inverse) {
    double inv = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv;
  }
}

FourierSeries dft(const std::vector<double>& samples, double period, int kappa) {
  check_period(period);
  std::size_t n = samples.size();
  if (!power_of_two(n)) throw std::invalid_argument("dft needs a power-of-two sample count");
  if (kappa < 0 || 2 * static_cast<std::size_t>(kappa) >= n)
    throw std::invalid_argument("dft truncation must satisfy 0 <= kappa < n/2");

  std::vector<cplx> a(n);
  for (std::size_t j = 0; j < n; ++j) a[j] = {samples[j], 0.0};
  fft_radix2(a, false);

  FourierSeries f;
  f.period = period;
  f.c.resize(static_cast<std::size_t>(kappa) + 1);
  double inv = 1.0 / static_cast<double>(n);
  for (int k = 0; k <= kappa; ++k) f.c[k] = a[k] * inv;
  f.c[0] = {f.c[0].real(), 0.0};
  return f;
}

double FourierSeries::evaluate(double t) const {
  if (c.empty()) return 0.0;
  double w = kTwoPi * t / period;
  cplx rot = std::polar(1.0, w);
  cplx e = rot;
  double sum = c[0].real();
  for (std::size_t k = 1; k < c.size(); ++k) {
    sum += 2.0 * (c[k] * e).real();
    e *= rot;
  }
  return sum;
}

FourierSeries convolve(const FourierSeries& a, const FourierSeries& b) {
  if (std::abs(a.period - b.period) > 1e-12 * std::max(a.period, b.period))
    throw std::invalid_argument("convolve: period mismatch");
  if (a.c.empty() || b.c.empty())
    throw std::invalid_argument("convolve: empty coefficient sequence");
  FourierSeries out;
  out.period = a.period;
  out.c.resize(a.c.size() + b.c.size() - 1);
  conv_half(a.c.data(), a.kappa(), b.c.data(), b.kappa(), out.c.data());
  out.c[0] = {out.c[0].real(), 0.0};
  return out;
}

std::vector<double> spectral_derivative(const std::vector<double>& samples,
                                        double period) {
  check_period(period);
  std::size_t n = samples.size();
  if (!power_of_two(n))
    throw std::invalid_argument("spectral_derivative needs a power-of-two sample count");

  std::vector<cplx> a(n);
  for (std::size_t j = 0; j < n; ++j) a[j] = {samples[j], 0.0};
  fft_radix2(a, false);
  double w0 = kTwoPi / period;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == n / 2) {
      a[k] = {0.0, 0.0};  // Nyquist bin has no consistent derivative phase
      continue;
    }
    double m = k <= n / 2 ? static_cast<double>(k)
                          : static_cast<double>(k) - static_cast<double>(n);
    a[k] *= cplx{0.0, w0 * m};
  }
  fft_radix2(a, true);
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = a[j].real();
  return out;
}

double ResidualSet::max_abs() const {
  double m = 0.0;
  for (const auto* seq : {&c_s, &c_1, &c_2})
    for (const auto& z : *seq) m = std::max(m, std::abs(z));
  return m;
}

double ResidualSet::norm2() const {
  double total = 0.0;
  for (const auto* seq : {&c_s, &c_1, &c_2}) {
    if (seq->empty()) continue;
    total += std::norm((*seq)[0]);
    for (std::size_t k = 1; k < seq->size(); ++k) total += 2.0 * std::norm((*seq)[k]);
  }
  return total;
}

namespace {

// out(k) = sum over signed j of a(j) b(k-j), for k = 0..kout only. Inner
// widths are whatever the operands carry, so nothing is truncated early.
void conv_head(const std::vector<cplx>& a, const std::vector<cplx>& b, int kout,
               std::vector<cplx>& out) {
  int ka = static_cast<int>(a.size()) - 1;
  int kb = static_cast<int>(b.size()) - 1;
  auto at = [](const std::vector<cplx>& h, int k) {
    int idx = k < 0 ? -k : k;
    return k < 0 ? std::conj(h[idx]) : h[idx];
  };
  out.resize(kout + 1);
  for (int k = 0; k <= kout; ++k) {
    cplx acc{0.0, 0.0};
    int jlo = std::max(-ka, k - kb);
    int jhi = std::min(ka, k + kb);
    for (int j = jlo; j <= jhi; ++j) acc += at(a, j) * at(b, k - j);
    out[k] = acc;
  }
}

void check_same_period(const ScaleElasticityCoeffs& f) {
  const FourierSeries* all[] = {&f.beta_s, &f.beta_1, &f.beta_2,
                                &f.beta_m, &f.s_x,    &f.g_x};
  for (const auto* s : all) {
    if (s->c.empty()) throw std::invalid_argument("empty coefficient sequence");
    if (std::abs(s->period - f.beta_s.period) >
        1e-12 * std::max(s->period, f.beta_s.period))
      throw std::invalid_argument("coefficient sequences disagree on the period");
  }
}

void seq_sub(const std::vector<cplx>& a, const std::vector<cplx>& b,
             std::vector<cplx>& out) {
  std::size_t n = std::max(a.size(), b.size());
  out.assign(n, {0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    cplx va = k < a.size() ? a[k] : cplx{0.0, 0.0};
    cplx vb = k < b.size() ? b[k] : cplx{0.0, 0.0};
    out[k] = va - vb;
  }
}

}  // namespace

void algebraic_residuals_into(const ScaleElasticityCoeffs& f, int kappa_m,
                              ConvWorkspace& ws, ResidualSet& out) {
  if (kappa_m < 0) throw std::invalid_argument("kappa_m must be nonnegative");
  check_same_period(f);
  double w0 = kTwoPi / f.beta_s.period;

  auto coeff = [](const FourierSeries& s, int k) {
    return k < static_cast<int>(s.c.size()) ? s.c[k] : cplx{0.0, 0.0};
  };

  // d_s = beta_s - beta_1 shows up in every condition.
  seq_sub(f.beta_s.c, f.beta_1.c, ws.d_s);

  // c_s(k) = -i w k beta_s(k) + [beta_s * d_s * (s_x - 1)](k)
  ws.t1 = f.s_x.c;
  ws.t1[0] -= 1.0;
  ws.t2.resize(ws.d_s.size() + ws.t1.size() - 1);
  conv_half(ws.d_s.data(), static_cast<int>(ws.d_s.size()) - 1, ws.t1.data(),
            static_cast<int>(ws.t1.size()) - 1, ws.t2.data());
  conv_head(f.beta_s.c, ws.t2, kappa_m, out.c_s);
  for (int k = 0; k <= kappa_m; ++k)
    out.c_s[k] -= cplx{0.0, w0 * k} * coeff(f.beta_s, k);

  // inner = d_s * g_x + (beta_2 - beta_m) - d_s
  ws.t1.resize(ws.d_s.size() + f.g_x.c.size() - 1);
  conv_half(ws.d_s.data(), static_cast<int>(ws.d_s.size()) - 1, f.g_x.c.data(),
            f.g_x.kappa(), ws.t1.data());
  seq_sub(f.beta_2.c, f.beta_m.c, ws.t2);
  ws.inner.assign(std::max(ws.t1.size(), std::max(ws.t2.size(), ws.d_s.size())),
                  {0.0, 0.0});
  for (std::size_t k = 0; k < ws.inner.size(); ++k) {
    cplx v = k < ws.t1.size() ? ws.t1[k] : cplx{0.0, 0.0};
    if (k < ws.t2.size()) v += ws.t2[k];
    if (k < ws.d_s.size()) v -= ws.d_s[k];
    ws.inner[k] = v;
  }

  // c_1(k) = -i w k beta_1(k) + [beta_1 * inner](k)
  conv_head(f.beta_1.c, ws.inner, kappa_m, out.c_1);
  for (int k = 0; k <= kappa_m; ++k)
    out.c_1[k] -= cplx{0.0, w0 * k} * coeff(f.beta_1, k);

  // c_2(k) = -i w k beta_2(k) + [beta_2 * (d_s * g_x)](k); ws.t1 still holds
  // the inner product sequence.
  conv_head(f.beta_2.c, ws.t1, kappa_m, out.c_2);
  for (int k = 0; k <= kappa_m; ++k)
    out.c_2[k] -= cplx{0.0, w0 * k} * coeff(f.beta_2, k);
}

ResidualSet algebraic_residuals(const ScaleElasticityCoeffs& f, int kappa_m) {
  ConvWorkspace ws;
  ResidualSet out;
  algebraic_residuals_into(f, kappa_m, ws, out);
  return out;
}

std::vector<double> pack(const ScaleElasticityCoeffs& f, int kappa_m) {
  if (kappa_m < 0) throw std::invalid_argument("kappa_m must be nonnegative");
  const FourierSeries* all[] = {&f.beta_s, &f.beta_1, &f.beta_2,
                                &f.beta_m, &f.s_x,    &f.g_x};
  std::vector<double> x;
  x.reserve(6 * (2 * kappa_m + 1));
  for (const auto* s : all) {
    if (s->kappa() != kappa_m)
      throw std::invalid_argument("pack: series must be truncated at kappa_m");
    x.push_back(s->c[0].real());
    for (int k = 1; k <= kappa_m; ++k) {
      x.push_back(s->c[k].real());
      x.push_back(s->c[k].imag());
    }
  }
  return x;
}

void unpack_into(const std::vector<double>& x, int kappa_m, double period,
                 ScaleElasticityCoeffs& out) {
  if (kappa_m < 0) throw std::invalid_argument("kappa_m must be nonnegative");
  std::size_t stride = 2 * static_cast<std::size_t>(kappa_m) + 1;
  if (x.size() != 6 * stride)
    throw std::invalid_argument("unpack: expected 6 (2 kappa_m + 1) entries");
  check_period(period);

  FourierSeries* all[] = {&out.beta_s, &out.beta_1, &out.beta_2,
                          &out.beta_m, &out.s_x,    &out.g_x};
  std::size_t pos = 0;
  for (auto* s : all) {
    s->period = period;
    s->c.resize(static_cast<std::size_t>(kappa_m) + 1);
    s->c[0] = {x[pos++], 0.0};
    for (int k = 1; k <= kappa_m; ++k) {
      double re = x[pos++];
      double im = x[pos++];
      s->c[k] = {re, im};
    }
  }
}

ScaleElasticityCoeffs unpack(const std::vector<double>& x, int kappa_m,
                             double period) {
  ScaleElasticityCoeffs out;
  unpack_into(x, kappa_m, period, out);
  return out;
}

nlohmann::json fourier_to_json(const FourierSeries& f) {
  nlohmann::json j;
  j["T"] = f.period;
  j["kappa"] = f.kappa();
  std::vector<double> re, im;
  re.reserve(f.c.size());
  im.reserve(f.c.size());
  for (const auto& z : f.c) {
    re.push_back(z.real());
    im.push_back(z.imag());
  }
  j["re"] = re;
  j["im"] = im;
  return j;
}

FourierSeries fourier_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("T") || !j.contains("kappa") ||
      !j.contains("re") || !j.contains("im"))
    throw std::invalid_argument("fourier json: expected T, kappa, re, im");
  FourierSeries f;
  f.period = j["T"].get<double>();
  check_period(f.period);
  auto re = j["re"].get<std::vector<double>>();
  auto im = j["im"].get<std::vector<double>>();
  int kappa = j["kappa"].get<int>();
  if (re.size() != im.size() || static_cast<int>(re.size()) != kappa + 1)
    throw std::invalid_argument("fourier json: kappa inconsistent with re/im length");
  f.c.resize(re.size());
  for (std::size_t k = 0; k < re.size(); ++k) f.c[k] = {re[k], im[k]};
  return f;
}

}  // namespace gmcycles
