#pragma once

#include <string>
#include <variant>

#include "json.hpp"

#include "gmcycles/mat2.hpp"

namespace gmcycles {

struct State {
  double X = 0.0;
  double Y = 0.0;
};

// Growth menu, S(X). Rates are strictly positive; exponents may be any
// finite real (p = 0 gives a constant rate with elasticity 0).
struct LinearGrowth { double k1; };                 // S = k1 X
struct PowerGrowth { double k1, p; };               // S = k1 X^p
struct LogisticGrowth { double k1, k2; };           // S = k1 X - k2 X^2
struct AlleeGrowth { double k1, k2, k3; };          // S = k1 X (k2 - X)(X - k3), 0 < k2 < k3

using GrowthForm = std::variant<LinearGrowth, PowerGrowth, LogisticGrowth, AlleeGrowth>;

// Predation menu, G(X, Y). The power form covers products X^px Y^py and is
// what realize_power_law produces; Holling I is its px = py = 1 special case.
struct HollingI { double k1; };                     // G = k1 X Y
struct HollingII { double k1, k2; };                // G = k1 X Y / (k2 + X)
struct HollingIII { double k1, k2; };               // G = k1 X^2 Y / (k2 + X^2)
struct HollingIV { double k1, k2, k3; };            // G = k1 X^2 Y / (k2 + X + k3 X^2)
struct PowerPredation { double k1, px, py; };       // G = k1 X^px Y^py

using PredationForm =
    std::variant<HollingI, HollingII, HollingIII, HollingIV, PowerPredation>;

// Mortality menu, M(Y).
struct LinearMortality { double k; };               // M = k Y
struct PowerMortality { double k, q; };             // M = k Y^q

using MortalityForm = std::variant<LinearMortality, PowerMortality>;

struct ModelSpec {
  GrowthForm growth;
  PredationForm predation;
  MortalityForm mortality;
};

// Throws std::invalid_argument on nonpositive rates, non-finite values, or
// Allee parameters out of order.
void validate(const ModelSpec& model);

// Raw rate evaluations. No argument checking; negative or zero states give
// whatever the formulas give (possibly NaN for fractional powers).
double growth_value(const GrowthForm& f, double x);
double growth_deriv(const GrowthForm& f, double x);
double growth_deriv2(const GrowthForm& f, double x);
double predation_value(const PredationForm& f, double x, double y);
double predation_dx(const PredationForm& f, double x, double y);
double predation_dy(const PredationForm& f, double x, double y);
double mortality_value(const MortalityForm& f, double y);
double mortality_deriv(const MortalityForm& f, double y);

struct Field {
  double dX = 0.0;
  double dY = 0.0;
};

// Unchecked field and Jacobian, used by the integrators.
Field field_raw(const ModelSpec& model, double x, double y);
Mat2 jacobian_raw(const ModelSpec& model, double x, double y);

// Checked variants: state must be strictly positive and the result finite.
Field eval_field(const ModelSpec& model, const State& s);
Mat2 eval_jacobian(const ModelSpec& model, const State& s);

// Scale parameters and elasticities of a coexistence equilibrium.
struct EqGenParams {
  double beta_s, beta_1, beta_2, beta_m;  // per-capita rates, all positive
  double s_x, g_x, g_y, m_y;              // elasticities
};

// tol bounds the field residual relative to the flux magnitudes.
EqGenParams equilibrium_gen_params(const ModelSpec& model, const State& eq,
                                   double tol = 1e-8);

// Jacobian of the normalized system at the equilibrium the parameters
// describe: [[b1 (s_x - g_x), -b1 g_y], [b2 g_x, b2 (g_y - m_y)]].
Mat2 equilibrium_jacobian(const EqGenParams& p);

struct PowerLawTargets {
  double beta_1, beta_2;        // positive
  double s_x, g_x, g_y, m_y;    // finite
};

struct Realization {
  ModelSpec model;
  State equilibrium;
};

// Constructs the unique power-law model S = p_S X^s_x, G = X^g_x Y^g_y,
// M = p_M Y^m_y whose equilibrium carries the requested parameters.
// Throws std::domain_error when g_x + g_y = 1 (the log-linear system for the
// equilibrium is singular there) or when the solution overflows.
Realization realize_power_law(const PowerLawTargets& t);

struct Preset {
  ModelSpec model;
  State start;
};

// "rm" and "lv" are the two bundled parameter sets.
Preset preset(const std::string& name);

nlohmann::json model_to_json(const ModelSpec& model);
ModelSpec model_from_json(const nlohmann::json& j);
void write_model_json(const ModelSpec& model, const std::string& path);
ModelSpec read_model_json(const std::string& path);

}  // namespace gmcycles
