#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "gmcycles/fourier.hpp"
#include "gmcycles/sampler.hpp"
#include "oracles.hpp"

using namespace gmcycles;

namespace {

std::vector<double> sampled(double period, std::size_t n,
                            double (*f)(double)) {
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j)
    out[j] = f(period * static_cast<double>(j) / static_cast<double>(n));
  return out;
}

FourierSeries random_series(SplitMix64& rng, int kappa, double period = 1.0) {
  FourierSeries f;
  f.period = period;
  f.c.resize(static_cast<std::size_t>(kappa) + 1);
  f.c[0] = rng.uniform(-1.0, 1.0);
  for (int k = 1; k <= kappa; ++k)
    f.c[static_cast<std::size_t>(k)] = {rng.uniform(-0.5, 0.5),
                                        rng.uniform(-0.5, 0.5)};
  return f;
}

}  // namespace

TEST_CASE("dft of elementary signals") {
  std::vector<double> sevens(64, 7.0);
  FourierSeries c = dft(sevens, 2.0, 8);
  CHECK(c.coeff(0).real() == doctest::Approx(7.0).epsilon(1e-14));
  CHECK(c.coeff(0).imag() == 0.0);
  for (int k = 1; k <= 8; ++k) CHECK(std::abs(c.coeff(k)) < 1e-13);

  auto cosine = sampled(1.0, 64, [](double t) { return std::cos(2.0 * M_PI * t); });
  FourierSeries d = dft(cosine, 1.0, 4);
  CHECK(std::abs(d.coeff(0)) < 1e-14);
  CHECK(d.coeff(1).real() == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(std::abs(d.coeff(1).imag()) < 1e-14);
  CHECK(std::abs(d.coeff(2)) < 1e-14);
}

TEST_CASE("dft matches the quadratic-time transform") {
  SplitMix64 rng(5);
  std::vector<double> samples(64);
  for (double& v : samples) v = rng.uniform(-2.0, 2.0);
  FourierSeries f = dft(samples, 1.0, 31);
  auto naive = oracles::naive_dft(samples, 31);
  for (int k = 0; k <= 31; ++k)
    CHECK(std::abs(f.coeff(k) - naive[static_cast<std::size_t>(k)]) < 1e-12);
}

TEST_CASE("dft argument checking") {
  std::vector<double> s(48, 1.0);
  CHECK_THROWS_AS(dft(s, 1.0, 4), std::invalid_argument);  // not a power of two
  std::vector<double> t(64, 1.0);
  CHECK_THROWS_AS(dft(t, 1.0, 32), std::invalid_argument);  // kappa >= n/2
  CHECK_THROWS_AS(dft(t, -1.0, 4), std::invalid_argument);
}

TEST_CASE("dft linearity and conjugate symmetry") {
  SplitMix64 rng(6);
  std::vector<double> a(128), b(128), mix(128);
  for (std::size_t j = 0; j < 128; ++j) {
    a[j] = rng.uniform(-1.0, 1.0);
    b[j] = rng.uniform(-1.0, 1.0);
    mix[j] = 1.7 * a[j] + b[j];
  }
  FourierSeries fa = dft(a, 1.0, 20), fb = dft(b, 1.0, 20),
                fm = dft(mix, 1.0, 20);
  for (int k = 0; k <= 20; ++k) {
    CHECK(std::abs(fm.coeff(k) - (1.7 * fa.coeff(k) + fb.coeff(k))) < 1e-12);
    CHECK(fa.coeff(-k) == std::conj(fa.coeff(k)));
  }
  CHECK(fa.coeff(0).imag() == 0.0);
}

TEST_CASE("evaluate inverts dft on band-limited signals") {
  SplitMix64 rng(7);
  FourierSeries f = random_series(rng, 5, 2.5);
  std::vector<double> samples(64);
  for (std::size_t j = 0; j < 64; ++j)
    samples[j] = f.evaluate(2.5 * static_cast<double>(j) / 64.0);
  FourierSeries back = dft(samples, 2.5, 5);
  for (int k = 0; k <= 5; ++k)
    CHECK(std::abs(back.coeff(k) - f.coeff(k)) < 1e-12);
  for (std::size_t j = 0; j < 64; ++j) {
    double t = 2.5 * static_cast<double>(j) / 64.0;
    CHECK(std::abs(back.evaluate(t) - samples[j]) < 1e-12);
  }
}

TEST_CASE("evaluate of elementary series") {
  FourierSeries constant{3.0, {cplx(4.2, 0.0)}};
  CHECK(constant.evaluate(0.0) == doctest::Approx(4.2));
  CHECK(constant.evaluate(1.234) == doctest::Approx(4.2));

  FourierSeries cosine{1.0, {cplx(0.0, 0.0), cplx(0.5, 0.0)}};
  for (double t : {0.0, 0.21, 0.5, 0.93})
    CHECK(cosine.evaluate(t) == doctest::Approx(std::cos(2.0 * M_PI * t)).epsilon(1e-13));
}

TEST_CASE("rm spectra decay like the coefficient plots") {
  const auto& gf = oracles::rm_genfuncs();
  FourierSeries g1 = dft(oracles::rm_orbit().gamma1, gf.period, 4);
  for (int k = 1; k < 4; ++k)
    CHECK(std::abs(g1.coeff(k)) > std::abs(g1.coeff(k + 1)));

  // Truncation at kappa = 16 leaves the grid reconstruction within the
  // geometric tail bound fitted from the spectrum itself.
  FourierSeries bs = dft(gf.beta_s, gf.period, 16);
  double bound = oracles::decay_tail_bound(bs, 2, 10);
  REQUIRE(bound < 1e-6);
  double worst = 0.0;
  for (std::size_t j = 0; j < gf.size(); ++j)
    worst = std::max(worst,
                     std::abs(bs.evaluate(gf.time_at(j)) - gf.beta_s[j]));
  CHECK(worst < 1e-6);
}

TEST_CASE("parseval partial sums") {
  SplitMix64 rng(8);
  std::vector<double> noise(64);
  for (double& v : noise) v = rng.uniform(-1.0, 1.0);
  double msq = 0.0;
  for (double v : noise) msq += v * v;
  msq /= 64.0;
  double prev = -1.0;
  for (int kappa : {0, 4, 8, 16, 31}) {
    FourierSeries f = dft(noise, 1.0, kappa);
    double p = std::norm(f.coeff(0));
    for (int k = 1; k <= kappa; ++k) p += 2.0 * std::norm(f.coeff(k));
    CHECK(p >= prev);
    CHECK(p <= msq + 1e-12);
    prev = p;
  }

  // Smooth signal: the tail above kappa = 31 is below rounding, so the
  // partial sum exhausts the mean square.
  auto smooth = sampled(1.0, 64, [](double t) {
    return std::exp(std::cos(2.0 * M_PI * t));
  });
  double smsq = 0.0;
  for (double v : smooth) smsq += v * v;
  smsq /= 64.0;
  FourierSeries f = dft(smooth, 1.0, 31);
  double p = std::norm(f.coeff(0));
  for (int k = 1; k <= 31; ++k) p += 2.0 * std::norm(f.coeff(k));
  CHECK(smsq - p == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("convolution identities") {
  SplitMix64 rng(9);

  SUBCASE("delta is the identity") {
    FourierSeries delta{1.0, {cplx(1.0, 0.0)}};
    FourierSeries f = random_series(rng, 4);
    FourierSeries conv = convolve(delta, f);
    for (int k = 0; k <= 4; ++k)
      CHECK(std::abs(conv.coeff(k) - f.coeff(k)) < 1e-15);
  }

  SUBCASE("two pure first harmonics by hand") {
    cplx alpha(0.3, 0.1), beta(-0.2, 0.4);
    FourierSeries a{1.0, {cplx(0.0, 0.0), alpha}};
    FourierSeries b{1.0, {cplx(0.0, 0.0), beta}};
    FourierSeries c = convolve(a, b);
    REQUIRE(c.kappa() == 2);
    CHECK(std::abs(c.coeff(0) - (std::conj(alpha) * beta +
                                 alpha * std::conj(beta))) < 1e-15);
    CHECK(std::abs(c.coeff(1)) < 1e-15);
    CHECK(std::abs(c.coeff(2) - alpha * beta) < 1e-15);
  }

  SUBCASE("convolution evaluates to the pointwise product") {
    FourierSeries a = random_series(rng, 4), b = random_series(rng, 4);
    FourierSeries c = convolve(a, b);
    for (int rep = 0; rep < 100; ++rep) {
      double t = rng.uniform(0.0, 1.0);
      CHECK(std::abs(c.evaluate(t) - a.evaluate(t) * b.evaluate(t)) < 1e-12);
    }
  }

  SUBCASE("commutative and associative at full width") {
    FourierSeries a = random_series(rng, 3), b = random_series(rng, 3),
                  c = random_series(rng, 3);
    FourierSeries ab = convolve(a, b), ba = convolve(b, a);
    for (int k = 0; k <= ab.kappa(); ++k)
      CHECK(std::abs(ab.coeff(k) - ba.coeff(k)) < 1e-15);
    FourierSeries abc = convolve(convolve(a, b), c);
    FourierSeries acb = convolve(a, convolve(b, c));
    REQUIRE(abc.kappa() == acb.kappa());
    for (int k = 0; k <= abc.kappa(); ++k)
      CHECK(std::abs(abc.coeff(k) - acb.coeff(k)) < 1e-12);
  }

  SUBCASE("period mismatch is rejected") {
    FourierSeries a = random_series(rng, 2, 1.0);
    FourierSeries b = random_series(rng, 2, 2.0);
    CHECK_THROWS_AS(convolve(a, b), std::invalid_argument);
  }
}

TEST_CASE("spectral derivative") {
  auto sine = sampled(2.0, 128, [](double t) { return std::sin(M_PI * t); });
  std::vector<double> ds = spectral_derivative(sine, 2.0);
  for (std::size_t j = 0; j < 128; ++j) {
    double t = 2.0 * static_cast<double>(j) / 128.0;
    CHECK(std::abs(ds[j] - M_PI * std::cos(M_PI * t)) < 1e-10);
  }

  std::vector<double> flat(64, 3.3);
  for (double v : spectral_derivative(flat, 1.0)) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("algebraic residuals") {
  SUBCASE("equilibrium constants solve the conditions exactly") {
    std::vector<double> x(30, 0.0);
    x[0] = 1.4;   // beta_s
    x[5] = 1.4;   // beta_1
    x[10] = 0.9;  // beta_2
    x[15] = 0.9;  // beta_m
    x[20] = 2.3;  // s_x
    x[25] = 0.7;  // g_x
    ResidualSet r = algebraic_residuals(unpack(x, 2), 2);
    CHECK(r.max_abs() == 0.0);
  }

  SUBCASE("rm coefficients at kappa 17 nearly solve them") {
    const auto& gf = oracles::rm_genfuncs();
    ScaleElasticityCoeffs f;
    f.beta_s = dft(gf.beta_s, gf.period, 17);
    f.beta_1 = dft(gf.beta_1, gf.period, 17);
    f.beta_2 = dft(gf.beta_2, gf.period, 17);
    f.beta_m = dft(gf.beta_m, gf.period, 17);
    f.s_x = dft(gf.s_x, gf.period, 17);
    f.g_x = dft(gf.g_x, gf.period, 17);
    ResidualSet r = algebraic_residuals(f, 17);
    CHECK(r.max_abs() < 1e-3);
  }

  SUBCASE("random coefficients are far from solving them") {
    SplitMix64 rng(10);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> x(30);
      for (double& v : x) v = rng.uniform(0.5, 1.5);
      ResidualSet r = algebraic_residuals(unpack(x, 2), 2);
      CHECK(r.max_abs() > 1e-2);
    }
  }

  SUBCASE("outer truncation only restricts the reported indices") {
    SplitMix64 rng(12);
    std::vector<double> x(30);
    for (double& v : x) v = rng.uniform(0.5, 1.5);
    ScaleElasticityCoeffs f = unpack(x, 2);
    ResidualSet narrow = algebraic_residuals(f, 2);
    ResidualSet wide = algebraic_residuals(f, 5);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(narrow.c_s[k] == wide.c_s[k]);
      CHECK(narrow.c_1[k] == wide.c_1[k]);
      CHECK(narrow.c_2[k] == wide.c_2[k]);
    }
  }
}

TEST_CASE("pack and unpack") {
  SUBCASE("dimension is six times 2 kappa + 1") {
    SplitMix64 rng(13);
    FourierSeries f = random_series(rng, 2);
    ScaleElasticityCoeffs c{f, f, f, f, f, f};
    CHECK(pack(c, 2).size() == 30);
  }

  SUBCASE("zero vector gives zero series") {
    ScaleElasticityCoeffs c = unpack(std::vector<double>(30, 0.0), 2);
    for (int k = 0; k <= 2; ++k) {
      CHECK(c.beta_s.coeff(k) == cplx(0.0, 0.0));
      CHECK(c.g_x.coeff(k) == cplx(0.0, 0.0));
    }
  }

  SUBCASE("round-trip is exact") {
    SplitMix64 rng(14);
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<double> x(30);
      for (double& v : x) v = rng.uniform(-2.0, 2.0);
      std::vector<double> back = pack(unpack(x, 2), 2);
      REQUIRE(back.size() == x.size());
      for (std::size_t i = 0; i < x.size(); ++i) CHECK(back[i] == x[i]);
    }
  }

  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(unpack(std::vector<double>(29, 0.0), 2),
                    std::invalid_argument);
    SplitMix64 rng(15);
    FourierSeries f = random_series(rng, 3);
    ScaleElasticityCoeffs c{f, f, f, f, f, f};
    CHECK_THROWS_AS(pack(c, 2), std::invalid_argument);
  }
}

TEST_CASE("fourier series json round-trip") {
  SplitMix64 rng(16);
  FourierSeries f = random_series(rng, 6, 3.7);
  FourierSeries back = fourier_from_json(fourier_to_json(f));
  CHECK(back.period == f.period);
  REQUIRE(back.kappa() == f.kappa());
  for (int k = 0; k <= 6; ++k) CHECK(back.coeff(k) == f.coeff(k));
}
