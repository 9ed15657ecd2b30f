#include "maser/walls.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <limits>

#include "maser/errors.hpp"

namespace maser {

using boost::multiprecision::cpp_int;

double phi_for_wall(std::int64_t m, std::int64_t K) {
  return double(K) * M_PI / std::sqrt(double(m + 1) * double(m + 2));
}

WallSequence wall_sequence(std::int64_t m1, std::int64_t K1, int count) {
  if (m1 < 0) throw DegenerateError("wall_sequence: m1 must be >= 0");
  if (K1 == 0) throw DegenerateError("wall_sequence: K1 must be nonzero");
  if (count < 1) throw DegenerateError("wall_sequence: count must be >= 1");
  WallSequence seq;
  const cpp_int d = cpp_int(m1 + 1) * cpp_int(m1 + 2);
  seq.D = std::int64_t((m1 + 1) * (m1 + 2));
  const cpp_int x1 = 2 * cpp_int(m1) + 3;
  const cpp_int y1 = 2;
  cpp_int x = x1, y = y1;
  const cpp_int max64 = std::numeric_limits<std::int64_t>::max();
  for (int n = 0; n < count; ++n) {
    if (x * x - d * y * y != 1)
      throw NumericalError("wall_sequence: Pell identity violated");
    const cpp_int m = (x - 3) / 2;
    const cpp_int k = K1 * y / 2;
    if (m > max64 || k > max64 || -k > max64)
      throw OverflowError("wall_sequence: wall position exceeds int64 range");
    HardWall wall;
    wall.m = std::int64_t(m);
    wall.K = std::int64_t(k);
    wall.cos_sign = (wall.K % 2 == 0) ? 1 : -1;
    wall.phi = phi_for_wall(wall.m, wall.K);
    seq.walls.push_back(wall);
    const cpp_int xn = x1 * x + d * y1 * y;
    const cpp_int yn = x1 * y + y1 * x;
    x = xn;
    y = yn;
  }
  return seq;
}

std::vector<SoftWall> soft_wall_scan(double phi, int n_max, double threshold) {
  if (threshold <= 0.0 || threshold > 1.0)
    throw DegenerateError("soft_wall_scan: threshold must be in (0, 1]");
  std::vector<SoftWall> out;
  for (int n = 0; n <= n_max; ++n) {
    const double s = sin_n(n, phi);
    if (s * s < threshold)
      out.push_back({n, s * s, cos_n(n, phi)});
  }
  return out;
}

RotationClass rotation_classify(double phi, double tol) {
  if (tol <= 0.0) throw DegenerateError("rotation_classify: tol must be > 0");
  const double r = std::abs(phi) / M_PI;
  const double q_cap = std::min(1.0 / tol, 9e18);

  // Continued-fraction convergents p_k/q_k of r. Accept the first one
  // whose residual is both below tol and well inside the 1/q^2 band that
  // a generic irrational would occupy; a rational encoded in a double
  // reveals itself by an astronomically better-than-1/q^2 approximation.
  double x = r;
  std::int64_t p_prev = 1, q_prev = 0;
  std::int64_t p_cur = std::int64_t(std::floor(x)), q_cur = 1;
  for (int k = 0; k < 64; ++k) {
    const double residual = std::abs(r - double(p_cur) / double(q_cur));
    if (residual < tol && residual < 0.01 / (double(q_cur) * double(q_cur))) {
      RotationClass out;
      out.p = p_cur;
      out.q = q_cur;
      out.kind = (p_cur % 2 == 0) ? RotationClass::RationalEven
                                  : RotationClass::RationalOdd;
      return out;
    }
    const double frac = x - std::floor(x);
    if (frac < 1e-18) break;
    x = 1.0 / frac;
    if (x > 9e18) break;
    const std::int64_t a = std::int64_t(std::floor(x));
    if (double(a) * double(q_cur) + double(q_prev) > q_cap ||
        double(a) * double(p_cur) + double(p_prev) > 9e18)
      break;
    const std::int64_t p_next = a * p_cur + p_prev;
    const std::int64_t q_next = a * q_cur + q_prev;
    p_prev = p_cur;
    q_prev = q_cur;
    p_cur = p_next;
    q_cur = q_next;
  }
  return RotationClass{};
}

}  // namespace maser
