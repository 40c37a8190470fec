#pragma once

#include <array>
#include <complex>

namespace gmcycles {

// 2x2 real matrix, row-major: [[a, b], [c, d]].
struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  double trace() const { return a + d; }
  double det() const { return a * d - b * c; }
};

inline Mat2 operator*(const Mat2& l, const Mat2& r) {
  return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
          l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
}

// Eigenvalues ordered by distance from 1, closest first. For a complex pair
// the two are conjugates and the order is arbitrary.
std::array<std::complex<double>, 2> eigenvalues(const Mat2& m);

}  // namespace gmcycles
