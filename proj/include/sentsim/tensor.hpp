#pragma once

#include <cmath>

namespace sentsim {

/// Symmetric second-order tensor under plane-strain kinematics.
/// Carries the out-of-plane normal component explicitly; xy is the
/// tensor component (engineering shear = 2*xy).
struct Sym2 {
  double xx = 0.0, yy = 0.0, zz = 0.0, xy = 0.0;

  double trace() const { return xx + yy + zz; }

  Sym2 dev() const {
    const double p = trace() / 3.0;
    return {xx - p, yy - p, zz - p, xy};
  }

  double ddot(const Sym2& o) const {
    return xx * o.xx + yy * o.yy + zz * o.zz + 2.0 * xy * o.xy;
  }

  double norm() const { return std::sqrt(ddot(*this)); }

  Sym2 operator+(const Sym2& o) const { return {xx + o.xx, yy + o.yy, zz + o.zz, xy + o.xy}; }
  Sym2 operator-(const Sym2& o) const { return {xx - o.xx, yy - o.yy, zz - o.zz, xy - o.xy}; }
  Sym2 operator*(double s) const { return {xx * s, yy * s, zz * s, xy * s}; }
  Sym2& operator+=(const Sym2& o) {
    xx += o.xx; yy += o.yy; zz += o.zz; xy += o.xy;
    return *this;
  }

  static Sym2 identity() { return {1.0, 1.0, 1.0, 0.0}; }

  bool finite() const {
    return std::isfinite(xx) && std::isfinite(yy) && std::isfinite(zz) && std::isfinite(xy);
  }
};

inline Sym2 operator*(double s, const Sym2& t) { return t * s; }

}  // namespace sentsim
