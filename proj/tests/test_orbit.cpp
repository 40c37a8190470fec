#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "gmcycles/fourier.hpp"
#include "gmcycles/integrate.hpp"
#include "gmcycles/model.hpp"
#include "gmcycles/orbit.hpp"
#include "oracles.hpp"

using namespace gmcycles;

namespace {

double dist(const State& a, double x, double y) {
  return std::hypot(a.X - x, a.Y - y);
}

// Logistic growth, Holling II predation, linear mortality with the
// coexistence point placed on the stable side of the Hopf threshold.
ModelSpec stable_focus_model() {
  return {LogisticGrowth{2.0, 0.5}, HollingII{1.0, 1.0}, LinearMortality{0.75}};
}

}  // namespace

TEST_CASE("integration basics") {
  SUBCASE("equilibrium starts stay put") {
    auto traj = integrate(preset("lv").model, {1.0, 1.0}, 10.0);
    for (const auto& p : traj) {
      CHECK(std::abs(p.y.X - 1.0) < 1e-9);
      CHECK(std::abs(p.y.Y - 1.0) < 1e-9);
    }
    auto rm = integrate(preset("rm").model, {1.0, 3.0}, 10.0);
    for (const auto& p : rm) {
      CHECK(std::abs(p.y.X - 1.0) < 1e-9);
      CHECK(std::abs(p.y.Y - 3.0) < 1e-9);
    }
  }

  SUBCASE("argument validation") {
    CHECK_THROWS_AS(integrate(preset("rm").model, {1.0, 1.0}, 10.0, 1e-2),
                    std::invalid_argument);
    CHECK_THROWS_AS(integrate(preset("rm").model, {1.0, 1.0}, 10.0, 1e-13),
                    std::invalid_argument);
    CHECK_THROWS_AS(integrate(preset("rm").model, {1.0, 1.0}, -1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(integrate(preset("rm").model, {-1.0, 1.0}, 1.0),
                    std::invalid_argument);
  }

  SUBCASE("tolerance refinement") {
    ModelSpec model = preset("rm").model;
    FieldRhs rhs{&model};
    std::vector<double> times{50.0};
    VecN<2> coarse{}, fine{};
    integrate_to_times(rhs, VecN<2>{0.5, 2.0}, 0.0, times, 1e-10,
                       [&](std::size_t, double, const VecN<2>& y) { coarse = y; });
    integrate_to_times(rhs, VecN<2>{0.5, 2.0}, 0.0, times, 1e-12,
                       [&](std::size_t, double, const VecN<2>& y) { fine = y; });
    CHECK(std::hypot(coarse[0] - fine[0], coarse[1] - fine[1]) < 1e-7);
  }

  SUBCASE("long integration approaches the attractor") {
    auto traj = integrate(preset("rm").model, {1.0, 1.0}, 100.0);
    const PeriodicOrbit& orbit = oracles::rm_orbit();
    const State& last = traj.back().y;
    double best = HUGE_VAL;
    for (std::size_t j = 0; j < orbit.size(); ++j)
      best = std::min(best, dist(last, orbit.gamma1[j], orbit.gamma2[j]));
    // The endpoint lands between grid samples, so the distance to the sample
    // set is bounded by the grid spacing, not by the integrator tolerance.
    CHECK(best < 2e-2);
  }
}

TEST_CASE("limit cycle extraction on the rm preset") {
  const PeriodicOrbit& orbit = oracles::rm_orbit();
  REQUIRE(orbit.size() == 1024);
  REQUIRE(orbit.period > 0.0);
  for (std::size_t j = 0; j < orbit.size(); ++j) {
    CHECK(orbit.gamma1[j] > 0.0);
    CHECK(orbit.gamma2[j] > 0.0);
  }

  SUBCASE("closure under re-integration") {
    ModelSpec model = preset("rm").model;
    FieldRhs rhs{&model};
    std::vector<double> times{orbit.period};
    VecN<2> end{};
    integrate_to_times(rhs, VecN<2>{orbit.gamma1[0], orbit.gamma2[0]}, 0.0,
                       times, 1e-10,
                       [&](std::size_t, double, const VecN<2>& y) { end = y; });
    double scale = std::hypot(orbit.gamma1[0], orbit.gamma2[0]);
    CHECK(std::hypot(end[0] - orbit.gamma1[0], end[1] - orbit.gamma2[0]) <
          1e-6 * scale);
  }

  SUBCASE("half the period does not close") {
    ModelSpec model = preset("rm").model;
    FieldRhs rhs{&model};
    std::vector<double> times{orbit.period / 2.0};
    VecN<2> end{};
    integrate_to_times(rhs, VecN<2>{orbit.gamma1[0], orbit.gamma2[0]}, 0.0,
                       times, 1e-10,
                       [&](std::size_t, double, const VecN<2>& y) { end = y; });
    double scale = std::hypot(orbit.gamma1[0], orbit.gamma2[0]);
    CHECK(std::hypot(end[0] - orbit.gamma1[0], end[1] - orbit.gamma2[0]) >
          100.0 * 1e-6 * scale);
  }

  SUBCASE("stable under burn-in doubling") {
    CycleOptions opt;
    opt.burn_in = 400.0;
    PeriodicOrbit again =
        find_limit_cycle(preset("rm").model, preset("rm").start, opt);
    CHECK(std::abs(again.period - orbit.period) < 1e-6 * orbit.period);
    double worst = 0.0;
    for (std::size_t j = 0; j < orbit.size(); ++j) {
      worst = std::max(worst, std::abs(again.gamma1[j] - orbit.gamma1[j]));
      worst = std::max(worst, std::abs(again.gamma2[j] - orbit.gamma2[j]));
    }
    CHECK(worst < 1e-6);
  }

  SUBCASE("grid refinement leaves the spectrum in place") {
    CycleOptions opt;
    opt.n = 2048;
    PeriodicOrbit fine =
        find_limit_cycle(preset("rm").model, preset("rm").start, opt);
    FourierSeries a = dft(orbit.gamma1, orbit.period, 8);
    FourierSeries b = dft(fine.gamma1, fine.period, 8);
    for (int k = 0; k <= 8; ++k)
      CHECK(std::abs(a.coeff(k) - b.coeff(k)) < 1e-8);
  }
}

TEST_CASE("limit cycle failure modes") {
  CHECK_THROWS_AS(find_limit_cycle(preset("rm").model, {1.0, 3.0}),
                  NoCycleError);

  // Below the Hopf threshold the coexistence point attracts; the hunt must
  // refuse to report a spurious cycle. Either failure flavor is correct.
  bool threw = false;
  try {
    find_limit_cycle(stable_focus_model(), {1.0, 1.0});
  } catch (const NoCycleError&) {
    threw = true;
  } catch (const NotConvergedError&) {
    threw = true;
  }
  CHECK(threw);
}

TEST_CASE("lotka-volterra neutral cycles") {
  const PeriodicOrbit& orbit = oracles::lv_orbit();

  SUBCASE("first integral is conserved along the orbit") {
    double v0 = oracles::lv_first_integral(orbit.gamma1[0], orbit.gamma2[0]);
    double worst = 0.0;
    for (std::size_t j = 0; j < orbit.size(); ++j)
      worst = std::max(worst,
                       std::abs(oracles::lv_first_integral(
                                    orbit.gamma1[j], orbit.gamma2[j]) -
                                v0));
    CHECK(worst < 1e-6);
  }

  SUBCASE("orbit passes through the requested start") {
    double v_start = oracles::lv_first_integral(1.2, 1.0);
    double v_orbit = oracles::lv_first_integral(orbit.gamma1[0], orbit.gamma2[0]);
    CHECK(std::abs(v_start - v_orbit) < 1e-6);
  }

  SUBCASE("averages match the equilibrium and the multiplier is neutral") {
    double mean1 = oracles::periodic_integral(orbit.gamma1, 1.0);
    double mean2 = oracles::periodic_integral(orbit.gamma2, 1.0);
    CHECK(std::abs(mean1 - 1.0) < 1e-6);
    CHECK(std::abs(mean2 - 1.0) < 1e-6);

    MonodromyResult m = monodromy(preset("lv").model, orbit);
    CHECK(std::abs(m.trace_integral) < 1e-5);
    CHECK(std::abs(std::abs(m.nontrivial) - 1.0) < 1e-4);
  }
}

TEST_CASE("monodromy of the rm cycle") {
  MonodromyResult m = monodromy(preset("rm").model, oracles::rm_orbit());
  CHECK(std::abs(m.nontrivial) < 1.0);
  CHECK(m.trivial_deviation < 1e-2);
  CHECK_FALSE(m.warn);
  CHECK(liouville_gap(m) < 1e-6);

  // The trace integral the result carries matches a plain trapezoid of
  // tr DF over the same grid.
  const PeriodicOrbit& orbit = oracles::rm_orbit();
  ModelSpec model = preset("rm").model;
  std::vector<double> tr(orbit.size());
  for (std::size_t j = 0; j < orbit.size(); ++j)
    tr[j] = jacobian_raw(model, orbit.gamma1[j], orbit.gamma2[j]).trace();
  double expected = oracles::periodic_integral(tr, orbit.period);
  CHECK(m.trace_integral == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("orbit construction guards") {
  CHECK_THROWS_AS(make_orbit(1.0, std::vector<double>(100, 1.0),
                             std::vector<double>(100, 1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_orbit(-1.0, std::vector<double>(64, 1.0),
                             std::vector<double>(64, 1.0)),
                  std::invalid_argument);
  std::vector<double> bad(64, 1.0);
  bad[3] = 0.0;
  CHECK_THROWS_AS(make_orbit(1.0, bad, std::vector<double>(64, 1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_orbit(1.0, std::vector<double>(64, 1.0),
                             std::vector<double>(32, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("orbit serialization round-trips") {
  const PeriodicOrbit& orbit = oracles::rm_orbit();
  std::string dir = "orbit_io_test";
  std::remove((dir + ".csv").c_str());

  write_orbit_csv(orbit, dir + ".csv");
  PeriodicOrbit csv = read_orbit_csv(dir + ".csv");
  CHECK(csv.period == orbit.period);
  REQUIRE(csv.size() == orbit.size());
  for (std::size_t j = 0; j < orbit.size(); ++j) {
    CHECK(csv.gamma1[j] == orbit.gamma1[j]);
    CHECK(csv.gamma2[j] == orbit.gamma2[j]);
  }

  PeriodicOrbit js = orbit_from_json(orbit_to_json(orbit));
  CHECK(js.period == orbit.period);
  REQUIRE(js.size() == orbit.size());
  for (std::size_t j = 0; j < orbit.size(); ++j) {
    CHECK(js.gamma1[j] == orbit.gamma1[j]);
    CHECK(js.gamma2[j] == orbit.gamma2[j]);
  }

  std::remove((dir + ".csv").c_str());
}
