#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "gmcycles/mat2.hpp"
#include "gmcycles/model.hpp"

namespace gmcycles {

// One period of a limit cycle sampled on a uniform grid, t_j = j T / n.
// Sample 0 sits on the Poincare section the finder used; synthetic curves
// built directly from samples only need positivity and a power-of-two n.
struct PeriodicOrbit {
  double period = 0.0;
  std::vector<double> gamma1, gamma2;

  std::size_t size() const { return gamma1.size(); }
  double time_at(std::size_t j) const {
    return period * static_cast<double>(j) / static_cast<double>(size());
  }
};

PeriodicOrbit make_orbit(double period, std::vector<double> g1,
                         std::vector<double> g2);

struct CycleOptions {
  double burn_in = 200.0;
  double search_horizon = 600.0;  // hunting window after burn-in
  double tol = 1e-10;             // integrator tolerance
  double closure_tol = 1e-6;      // relative closure bound
  std::size_t n = 1024;           // grid size, power of two
};

// The hunt never saw the section: no cycle reachable from the start.
struct NoCycleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Crossings exist but the return map did not settle (not attracting, or the
// horizon was too short).
struct NotConvergedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

PeriodicOrbit find_limit_cycle(const ModelSpec& model, const State& start,
                               const CycleOptions& opt = {});

struct MonodromyResult {
  Mat2 m_t;                        // fundamental matrix after one period
  std::complex<double> trivial;    // eigenvalue closest to 1
  std::complex<double> nontrivial; // the other eigenvalue
  double trace_integral = 0.0;     // int_0^T tr DF dt on the orbit grid
  double trivial_deviation = 0.0;  // |trivial - 1|
  bool degenerate = false;         // complex pair, the trivial/nontrivial split is arbitrary
  bool warn = false;               // trivial multiplier off 1 by more than 1e-2
};

MonodromyResult monodromy(const ModelSpec& model, const PeriodicOrbit& orbit,
                          double tol = 1e-10);

// Relative gap |det M(T) - exp(int tr DF)| / exp(int tr DF).
double liouville_gap(const MonodromyResult& m);

void write_orbit_csv(const PeriodicOrbit& orbit, const std::string& path);
PeriodicOrbit read_orbit_csv(const std::string& path);
nlohmann::json orbit_to_json(const PeriodicOrbit& orbit);
PeriodicOrbit orbit_from_json(const nlohmann::json& j);
void write_orbit_json(const PeriodicOrbit& orbit, const std::string& path);
PeriodicOrbit read_orbit_json(const std::string& path);

}  // namespace gmcycles
