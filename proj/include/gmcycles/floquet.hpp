#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gmcycles/fourier.hpp"
#include "gmcycles/genfunc.hpp"

namespace gmcycles {

struct FloquetResult {
  double c1 = 0.0, c2 = 0.0;
  double period = 0.0;
  double lambda = 0.0;
  bool stable = false;    // strict lambda < 1
  bool saturated = false; // exponent clamped to keep exp() finite
};

// Mean of beta_s (s_x - 1) and of beta_1 (g_x - 1) straight from the
// coefficients: C = c0 terms plus twice the symmetric harmonic products,
// truncated at the shorter of the two spectra in each pair.
std::pair<double, double> c_constants(const FourierSeries& beta_s,
                                      const FourierSeries& s_x,
                                      const FourierSeries& beta_1,
                                      const FourierSeries& g_x);

// lambda = exp(T (C1 - C2)), valid when g_y and m_y are identically 1.
FloquetResult multiplier(double c1, double c2, double period);

// Nontrivial multiplier from the full four-term integrand on the grid; no
// structural assumptions on the elasticities.
double general_multiplier(const GeneralizedFunctions& gf);

// lambda as a function of the period at frozen C constants.
std::vector<std::pair<double, double>> period_sensitivity(
    double c1, double c2, const std::vector<double>& periods);

nlohmann::json floquet_to_json(const FloquetResult& r);
FloquetResult floquet_from_json(const nlohmann::json& j);
void write_floquet_json(const FloquetResult& r, const std::string& path);
FloquetResult read_floquet_json(const std::string& path);

}  // namespace gmcycles
