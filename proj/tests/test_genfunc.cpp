#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"

#include "gmcycles/fourier.hpp"
#include "gmcycles/genfunc.hpp"
#include "gmcycles/model.hpp"
#include "gmcycles/orbit.hpp"
#include "oracles.hpp"

using namespace gmcycles;

TEST_CASE("scale and elasticity functions on synthetic curves") {
  PeriodicOrbit curve = oracles::synthetic_curve(1.0, 256, 1.0, 0.2, 1.0, 0.1);

  SUBCASE("linear growth contributes nothing") {
    ModelSpec m{LinearGrowth{1.3}, HollingI{1.0}, LinearMortality{1.0}};
    GeneralizedFunctions gf = compute_gen_functions(m, curve);
    for (std::size_t j = 0; j < gf.size(); ++j) {
      CHECK(gf.beta_s[j] == doctest::Approx(1.3).epsilon(1e-13));
      CHECK(gf.s_x[j] == doctest::Approx(1.0).epsilon(1e-13));
    }
  }

  SUBCASE("logistic growth term is linear in the prey") {
    ModelSpec m{LogisticGrowth{2.0, 0.5}, HollingI{1.0}, LinearMortality{1.0}};
    GeneralizedFunctions gf = compute_gen_functions(m, curve);
    for (std::size_t j = 0; j < gf.size(); ++j) {
      double term = gf.beta_s[j] * (gf.s_x[j] - 1.0);
      CHECK(term == doctest::Approx(-0.5 * curve.gamma1[j]).epsilon(1e-12));
    }
  }

  SUBCASE("growth leaving the positive region is reported with its time") {
    PeriodicOrbit wide = oracles::synthetic_curve(1.0, 256, 4.0, 1.0, 1.0, 0.1);
    ModelSpec m{LogisticGrowth{2.0, 0.5}, HollingI{1.0}, LinearMortality{1.0}};
    try {
      compute_gen_functions(m, wide);
      FAIL("expected a rejection");
    } catch (const std::domain_error& e) {
      CHECK(std::string(e.what()).find("t = ") != std::string::npos);
    }
  }
}

TEST_CASE("rm generalized functions") {
  const GeneralizedFunctions& gf = oracles::rm_genfuncs();

  SUBCASE("predation linear in the predator pins g_y and m_y at one") {
    for (std::size_t j = 0; j < gf.size(); ++j) {
      CHECK(std::abs(gf.g_y[j] - 1.0) < 1e-12);
      CHECK(std::abs(gf.m_y[j] - 1.0) < 1e-12);
    }
  }

  SUBCASE("scale functions stay positive") {
    for (std::size_t j = 0; j < gf.size(); ++j) {
      CHECK(gf.beta_s[j] > 0.0);
      CHECK(gf.beta_1[j] > 0.0);
      CHECK(gf.beta_2[j] > 0.0);
      CHECK(gf.beta_m[j] > 0.0);
    }
  }

  SUBCASE("multiplier integrand integrates to the jacobian trace integral") {
    ModelSpec model = preset("rm").model;
    const PeriodicOrbit& orbit = oracles::rm_orbit();
    std::vector<double> fm(gf.size()), tr(gf.size());
    for (std::size_t j = 0; j < gf.size(); ++j) {
      fm[j] = gf.beta_s[j] * (gf.s_x[j] - 1.0) -
              gf.beta_1[j] * (gf.g_x[j] - 1.0) +
              gf.beta_2[j] * (gf.g_y[j] - 1.0) -
              gf.beta_m[j] * (gf.m_y[j] - 1.0);
      tr[j] = jacobian_raw(model, orbit.gamma1[j], orbit.gamma2[j]).trace();
    }
    double a = oracles::periodic_integral(fm, gf.period);
    double b = oracles::periodic_integral(tr, gf.period);
    CHECK(std::abs(a - b) < 1e-6);
  }
}

TEST_CASE("moduli flow right-hand side") {
  SUBCASE("equilibrium conditions are fixed points") {
    ScaleState b{1.4, 1.4, 0.8, 0.8};
    ElasticityState e{2.3, 0.7, 1.9, 0.4};
    ScaleState d = moduli_rhs(b, e);
    CHECK(d.beta_s == 0.0);
    CHECK(d.beta_1 == 0.0);
    CHECK(d.beta_2 == 0.0);
    CHECK(d.beta_m == 0.0);
  }

  SUBCASE("unit prey elasticity freezes beta_s") {
    ScaleState b{1.7, 0.9, 1.1, 0.6};
    ElasticityState e{1.0, 0.8, 1.2, 1.5};
    CHECK(moduli_rhs(b, e).beta_s == 0.0);
  }

  SUBCASE("matches the spectral derivative of the rm series") {
    const GeneralizedFunctions& gf = oracles::rm_genfuncs();
    ScaleState b{gf.beta_s[0], gf.beta_1[0], gf.beta_2[0], gf.beta_m[0]};
    ElasticityState e{gf.s_x[0], gf.g_x[0], gf.g_y[0], gf.m_y[0]};
    ScaleState d = moduli_rhs(b, e);
    std::vector<double> ds = spectral_derivative(gf.beta_s, gf.period);
    std::vector<double> d1 = spectral_derivative(gf.beta_1, gf.period);
    std::vector<double> d2 = spectral_derivative(gf.beta_2, gf.period);
    std::vector<double> dm = spectral_derivative(gf.beta_m, gf.period);
    CHECK(std::abs(d.beta_s - ds[0]) < 1e-5);
    CHECK(std::abs(d.beta_1 - d1[0]) < 1e-5);
    CHECK(std::abs(d.beta_2 - d2[0]) < 1e-5);
    CHECK(std::abs(d.beta_m - dm[0]) < 1e-5);
  }
}

TEST_CASE("moduli flow integration") {
  const GeneralizedFunctions& gf = oracles::rm_genfuncs();

  SUBCASE("reproduces the scale functions over one period") {
    ScaleState beta0{gf.beta_s[0], gf.beta_1[0], gf.beta_2[0], gf.beta_m[0]};
    ModuliFlow flow =
        integrate_moduli_flow(elasticities_of(gf), beta0, gf.period);
    REQUIRE(flow.t.size() == flow.beta_s.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < flow.t.size(); ++i) {
      // The flow grid lines up with the orbit grid by construction.
      std::size_t j = i % gf.size();
      worst = std::max(worst, std::abs(flow.beta_s[i] - gf.beta_s[j]) /
                                  gf.beta_s[j]);
      worst = std::max(worst, std::abs(flow.beta_1[i] - gf.beta_1[j]) /
                                  gf.beta_1[j]);
      worst = std::max(worst, std::abs(flow.beta_2[i] - gf.beta_2[j]) /
                                  gf.beta_2[j]);
      worst = std::max(worst, std::abs(flow.beta_m[i] - gf.beta_m[j]) /
                                  gf.beta_m[j]);
    }
    CHECK(worst < 1e-5);
  }

  SUBCASE("perturbed start departs from the periodic solution") {
    ScaleState beta0{1.01 * gf.beta_s[0], gf.beta_1[0], gf.beta_2[0],
                     gf.beta_m[0]};
    ModuliFlow flow =
        integrate_moduli_flow(elasticities_of(gf), beta0, gf.period);
    auto gap_at = [&](std::size_t i) {
      std::size_t j = i % gf.size();
      return std::abs(flow.beta_s[i] - gf.beta_s[j]);
    };
    std::size_t quarter = flow.t.size() / 4, end = flow.t.size() - 1;
    CHECK(gap_at(end) > gap_at(quarter));
    CHECK(gap_at(end) > 1e-3);
  }

  SUBCASE("constant consistent data stays constant") {
    ElasticityFunctions el;
    el.period = 1.0;
    el.s_x.assign(64, 2.0);
    el.g_x.assign(64, 0.5);
    el.g_y.assign(64, 1.0);
    el.m_y.assign(64, 1.0);
    ModuliFlow flow = integrate_moduli_flow(el, {1.2, 1.2, 0.7, 0.7}, 3.0);
    for (std::size_t i = 0; i < flow.t.size(); ++i) {
      CHECK(flow.beta_s[i] == doctest::Approx(1.2).epsilon(1e-10));
      CHECK(flow.beta_m[i] == doctest::Approx(0.7).epsilon(1e-10));
    }
  }

  SUBCASE("deep contraction never leaves the positive cone") {
    ElasticityFunctions el;
    el.period = 1.0;
    // s_x far above 1 with beta_s well below beta_1 collapses beta_s by
    // many decades, and the induced drift in beta_2 then sends beta_1 to
    // zero as well.  Every right-hand side is proportional to its own
    // scale function, so the exact flow cannot cross zero; the integrator
    // has to respect that over the whole run.
    el.s_x.assign(64, 6.0);
    el.g_x.assign(64, 1.0);
    el.g_y.assign(64, 1.0);
    el.m_y.assign(64, 1.0);
    ModuliFlow flow = integrate_moduli_flow(el, {0.05, 2.0, 1.0, 1.0}, 120.0);
    double floor = 1e300;
    for (std::size_t i = 0; i < flow.t.size(); ++i) {
      floor = std::min(floor, flow.beta_s[i]);
      floor = std::min(floor, flow.beta_1[i]);
      floor = std::min(floor, flow.beta_2[i]);
      floor = std::min(floor, flow.beta_m[i]);
    }
    CHECK(floor > 0.0);
    // beta_1 really does collapse (tens of decades), it just stays positive.
    std::size_t e = flow.t.size() - 1;
    CHECK(flow.beta_1[e] < 1e-30);
    // m_y identically 1 freezes beta_m.
    CHECK(flow.beta_m[e] == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("bad inputs are rejected up front") {
    ElasticityFunctions el;
    el.period = 1.0;
    el.s_x.assign(8, 2.0);
    el.g_x.assign(8, 1.0);
    el.g_y.assign(8, 1.0);
    el.m_y.assign(8, 1.0);
    ScaleState ok{1.0, 1.0, 1.0, 1.0};
    CHECK_THROWS_AS(integrate_moduli_flow(el, {0.0, 1.0, 1.0, 1.0}, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(integrate_moduli_flow(el, {1.0, -0.3, 1.0, 1.0}, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(integrate_moduli_flow(el, ok, 0.0), std::invalid_argument);
    el.m_y.resize(7);
    CHECK_THROWS_AS(integrate_moduli_flow(el, ok, 1.0), std::invalid_argument);
  }
}

TEST_CASE("moduli residuals") {
  const GeneralizedFunctions& gf = oracles::rm_genfuncs();

  SUBCASE("rm data satisfies the flow") {
    CHECK(moduli_residual(gf).max() < 1e-4);
  }

  SUBCASE("constant equilibrium data is exact") {
    GeneralizedFunctions flat;
    flat.period = 1.0;
    flat.beta_s.assign(64, 1.4);
    flat.beta_1.assign(64, 1.4);
    flat.beta_2.assign(64, 0.8);
    flat.beta_m.assign(64, 0.8);
    flat.s_x.assign(64, 2.0);
    flat.g_x.assign(64, 0.6);
    flat.g_y.assign(64, 1.0);
    flat.m_y.assign(64, 1.0);
    CHECK(moduli_residual(flat).max() < 1e-12);
  }

  SUBCASE("a scaled series is flagged loudly") {
    GeneralizedFunctions off = gf;
    for (double& v : off.beta_1) v *= 1.1;
    CHECK(moduli_residual(off).max() > 1e-2);
  }
}

TEST_CASE("second-order elasticity identity") {
  SUBCASE("linear growth vanishes identically") {
    PeriodicOrbit curve = oracles::synthetic_curve();
    ModelSpec m{LinearGrowth{1.0}, HollingII{1.0, 1.0}, LinearMortality{0.5}};
    CHECK(second_order_check(m, curve) < 1e-12);
  }

  SUBCASE("power growth cancels on any curve") {
    PeriodicOrbit curve = oracles::synthetic_curve();
    ModelSpec m{PowerGrowth{1.0, 2.0}, HollingII{1.0, 1.0},
                LinearMortality{0.5}};
    CHECK(second_order_check(m, curve) < 1e-12);
  }

  SUBCASE("rm orbit satisfies the identity spectrally") {
    CHECK(second_order_check(preset("rm").model, oracles::rm_orbit()) < 1e-4);
  }
}

TEST_CASE("specific-form terms") {
  PeriodicOrbit curve = oracles::synthetic_curve(1.0, 256, 1.0, 0.1, 1.0, 0.05);

  auto check_agreement = [](const SpecificTerms& st, double tol) {
    REQUIRE(st.growth_term.size() == st.growth_closed.size());
    REQUIRE(st.predation_term.size() == st.predation_closed.size());
    for (std::size_t j = 0; j < st.growth_term.size(); ++j)
      CHECK(std::abs(st.growth_term[j] - st.growth_closed[j]) < tol);
    for (std::size_t j = 0; j < st.predation_term.size(); ++j)
      CHECK(std::abs(st.predation_term[j] - st.predation_closed[j]) < tol);
  };

  SUBCASE("holling I predation contributes nothing") {
    ModelSpec m{LinearGrowth{1.0}, HollingI{1.2}, LinearMortality{1.0}};
    SpecificTerms st = specific_terms(m, curve);
    for (double v : st.predation_term) CHECK(std::abs(v) < 1e-12);
    for (double v : st.predation_closed) CHECK(v == 0.0);
  }

  SUBCASE("menu forms agree with their closed expressions") {
    check_agreement(specific_terms({LogisticGrowth{2.0, 0.5},
                                    HollingII{1.0, 1.0}, LinearMortality{0.5}},
                                   curve),
                    1e-10);
    check_agreement(specific_terms({AlleeGrowth{1.0, 0.5, 2.0},
                                    HollingIII{1.0, 1.0}, LinearMortality{0.5}},
                                   curve),
                    1e-10);
    check_agreement(specific_terms({LogisticGrowth{2.0, 0.5},
                                    HollingIV{1.0, 1.0, 0.4},
                                    LinearMortality{0.5}},
                                   curve),
                    1e-10);
  }

  SUBCASE("rm orbit agrees too") {
    check_agreement(specific_terms(preset("rm").model, oracles::rm_orbit()),
                    1e-10);
  }
}

TEST_CASE("generalized function csv round-trip") {
  const GeneralizedFunctions& gf = oracles::rm_genfuncs();
  std::string path = "genfunc_io_test.csv";
  write_genfunc_csv(gf, path);
  GeneralizedFunctions back = read_genfunc_csv(path);
  CHECK(back.period == gf.period);
  REQUIRE(back.size() == gf.size());
  for (std::size_t j = 0; j < gf.size(); ++j) {
    CHECK(back.beta_s[j] == gf.beta_s[j]);
    CHECK(back.beta_m[j] == gf.beta_m[j]);
    CHECK(back.s_x[j] == gf.s_x[j]);
    CHECK(back.m_y[j] == gf.m_y[j]);
  }
  std::remove(path.c_str());
}
