#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace maser {

// Two-photon transition trigonometry on the |n>, |n+2> pair.
inline double pair_angle(int n, double phi) {
  return phi * std::sqrt(double(n + 1) * double(n + 2));
}
inline double sin_n(int n, double phi) { return std::sin(pair_angle(n, phi)); }
inline double cos_n(int n, double phi) { return std::cos(pair_angle(n, phi)); }

struct HardWall {
  std::int64_t m = 0;
  std::int64_t K = 0;
  int cos_sign = 1;  // (-1)^K
  double phi = 0.0;  // K pi / sqrt((m+1)(m+2))
};

struct WallSequence {
  std::vector<HardWall> walls;
  std::int64_t D = 0;  // (m1+1)(m1+2)
};

struct SoftWall {
  int m = 0;
  double strength = 0.0;  // sin^2_m(phi)
  double cos_value = 0.0;
};

double phi_for_wall(std::int64_t m, std::int64_t K);

// Walls sharing the coupling of the seed wall (m1, K1): positions obey
// the Pell recurrence on x = 2m+3, y = 2K/K1 with x^2 - D y^2 = 1.
// Throws OverflowError if a position exceeds the int64 range.
WallSequence wall_sequence(std::int64_t m1, std::int64_t K1, int count);

std::vector<SoftWall> soft_wall_scan(double phi, int n_max,
                                     double threshold = 1e-3);

struct RotationClass {
  enum Kind { RationalEven, RationalOdd, Irrational } kind = Irrational;
  std::int64_t p = 0;  // phi/pi = p/q in lowest terms when rational
  std::int64_t q = 1;
};

// Continued-fraction classification of phi/pi up to denominator 1/tol.
RotationClass rotation_classify(double phi, double tol = 1e-9);

}  // namespace maser
