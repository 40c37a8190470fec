#pragma once

#include <string>
#include <vector>

#include "gmcycles/model.hpp"
#include "gmcycles/orbit.hpp"

namespace gmcycles {

// Scale functions and elasticities evaluated along one period, on the orbit
// grid. Scale functions are per-capita rates and stay positive.
struct GeneralizedFunctions {
  double period = 0.0;
  std::vector<double> beta_s, beta_1, beta_2, beta_m;
  std::vector<double> s_x, g_x, g_y, m_y;

  std::size_t size() const { return beta_s.size(); }
  double time_at(std::size_t j) const {
    return period * static_cast<double>(j) / static_cast<double>(size());
  }
};

GeneralizedFunctions compute_gen_functions(const ModelSpec& model,
                                           const PeriodicOrbit& orbit);

struct ScaleState {
  double beta_s, beta_1, beta_2, beta_m;
};

struct ElasticityState {
  double s_x, g_x, g_y, m_y;
};

// Autonomous part of the flow the scale functions obey along any orbit of
// the underlying system.
ScaleState moduli_rhs(const ScaleState& b, const ElasticityState& e);

struct ElasticityFunctions {
  double period = 0.0;
  std::vector<double> s_x, g_x, g_y, m_y;
};

ElasticityFunctions elasticities_of(const GeneralizedFunctions& gf);

struct ModuliFlow {
  std::vector<double> t;
  std::vector<double> beta_s, beta_1, beta_2, beta_m;
};

// Integrates the scale-function flow with the elasticities supplied as
// periodic drivers (full trigonometric interpolation of the samples).
// Throws if a scale function leaves the positive cone, naming the exit time.
ModuliFlow integrate_moduli_flow(const ElasticityFunctions& el,
                                 const ScaleState& beta0, double duration,
                                 double tol = 1e-10);

struct ModuliResiduals {
  double beta_s, beta_1, beta_2, beta_m;
  double max() const;
};

// Max-norm gap between the spectral time derivative of each scale function
// and the flow right-hand side, pointwise on the grid.
ModuliResiduals moduli_residual(const GeneralizedFunctions& gf);

// Residual of the closed s_x equation, which needs the second growth
// derivative: d s_x/dt = s_x (1 - s_x)(beta_s - beta_1) + gamma1' S''/beta_s.
double second_order_check(const ModelSpec& model, const PeriodicOrbit& orbit);

// The products beta_s (s_x - 1) and beta_1 (g_x - 1) as sampled from the
// generalized functions, next to the closed forms the menu entries admit.
struct SpecificTerms {
  std::vector<double> growth_term, growth_closed;
  std::vector<double> predation_term, predation_closed;
};

SpecificTerms specific_terms(const ModelSpec& model, const PeriodicOrbit& orbit);

void write_genfunc_csv(const GeneralizedFunctions& gf, const std::string& path);
GeneralizedFunctions read_genfunc_csv(const std::string& path);

}  // namespace gmcycles
