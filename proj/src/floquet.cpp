#include "gmcycles/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace gmcycles {

namespace {

// Mean of the product of two real signals from their half-spectra.
double product_mean(const FourierSeries& a, const FourierSeries& b) {
  if (std::abs(a.period - b.period) > 1e-12 * std::max(a.period, b.period))
    throw std::invalid_argument("c_constants: period mismatch");
  int kappa = std::min(a.kappa(), b.kappa());
  double acc = a.c[0].real() * b.c[0].real();
  for (int k = 1; k <= kappa; ++k)
    acc += 2.0 * (a.c[k].real() * b.c[k].real() + a.c[k].imag() * b.c[k].imag());
  return acc;
}

constexpr double kExpClamp = 700.0;  // exp(709._) is the double overflow edge

}  // namespace

std::pair<double, double> c_constants(const FourierSeries& beta_s,
                                      const FourierSeries& s_x,
                                      const FourierSeries& beta_1,
                                      const FourierSeries& g_x) {
  if (beta_s.c.empty() || s_x.c.empty() || beta_1.c.empty() || g_x.c.empty())
    throw std::invalid_argument("c_constants: empty coefficient sequence");
  double c1 = product_mean(beta_s, s_x) - beta_s.c[0].real();
  double c2 = product_mean(beta_1, g_x) - beta_1.c[0].real();
  return {c1, c2};
}

FloquetResult multiplier(double c1, double c2, double period) {
  if (!(std::isfinite(c1) && std::isfinite(c2)))
    throw std::invalid_argument("multiplier: C constants must be finite");
  if (!(std::isfinite(period) && period > 0.0))
    throw std::invalid_argument("multiplier: period must be positive");
  FloquetResult r;
  r.c1 = c1;
  r.c2 = c2;
  r.period = period;
  double z = period * (c1 - c2);
  r.saturated = std::abs(z) > kExpClamp;
  r.lambda = std::exp(std::clamp(z, -kExpClamp, kExpClamp));
  r.stable = r.lambda < 1.0;
  return r;
}

double general_multiplier(const GeneralizedFunctions& gf) {
  std::size_t n = gf.size();
  if (n == 0) throw std::invalid_argument("empty generalized functions");
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    acc += gf.beta_s[j] * (gf.s_x[j] - 1.0) - gf.beta_1[j] * (gf.g_x[j] - 1.0) +
           gf.beta_2[j] * (gf.g_y[j] - 1.0) - gf.beta_m[j] * (gf.m_y[j] - 1.0);
  }
  double z = acc * gf.period / static_cast<double>(n);
  return std::exp(std::clamp(z, -kExpClamp, kExpClamp));
}

std::vector<std::pair<double, double>> period_sensitivity(
    double c1, double c2, const std::vector<double>& periods) {
  std::vector<std::pair<double, double>> out;
  out.reserve(periods.size());
  for (double t : periods) out.emplace_back(t, multiplier(c1, c2, t).lambda);
  return out;
}

nlohmann::json floquet_to_json(const FloquetResult& r) {
  return {{"C1", r.c1}, {"C2", r.c2}, {"T", r.period},
          {"lambda", r.lambda}, {"stable", r.stable}};
}

FloquetResult floquet_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("C1") || !j.contains("C2") ||
      !j.contains("T") || !j.contains("lambda") || !j.contains("stable"))
    throw std::invalid_argument("floquet json: expected C1, C2, T, lambda, stable");
  FloquetResult r;
  r.c1 = j["C1"].get<double>();
  r.c2 = j["C2"].get<double>();
  r.period = j["T"].get<double>();
  r.lambda = j["lambda"].get<double>();
  r.stable = j["stable"].get<bool>();
  r.saturated = std::abs(r.period * (r.c1 - r.c2)) > kExpClamp;
  return r;
}

void write_floquet_json(const FloquetResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << floquet_to_json(r).dump(2) << "\n";
}

FloquetResult read_floquet_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return floquet_from_json(j);
}

}  // namespace gmcycles
