// Quaternions, octonions as Cayley-Dickson pairs, and associative 3-planes.
//
// Flat octonion order is (1, i, j, k, e, ie, je, ke).  Im O is identified with
// R^7 in the order (i, j, k, e, ie, je, ke): Im H is coordinates 0-2 and He is
// coordinates 3-6.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>

#include "jgeom/linalg.hpp"
#include "jgeom/rng.hpp"
#include "jgeom/subspace.hpp"

namespace jgeom {

struct Quaternion {
  double w = 0.0, x = 0.0, y = 0.0, z = 0.0;

  static constexpr Quaternion one() { return {1, 0, 0, 0}; }
  static constexpr Quaternion i() { return {0, 1, 0, 0}; }
  static constexpr Quaternion j() { return {0, 0, 1, 0}; }
  static constexpr Quaternion k() { return {0, 0, 0, 1}; }

  /// Pure imaginary quaternion from three components.
  static constexpr Quaternion imaginary(double x, double y, double z) { return {0, x, y, z}; }

  Quaternion conj() const { return {w, -x, -y, -z}; }
  double re() const { return w; }
  Quaternion im() const { return {0, x, y, z}; }
  double norm2() const { return w * w + x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }
  std::array<double, 4> to_array() const { return {w, x, y, z}; }

  friend Quaternion operator+(const Quaternion& p, const Quaternion& q) {
    return {p.w + q.w, p.x + q.x, p.y + q.y, p.z + q.z};
  }
  friend Quaternion operator-(const Quaternion& p, const Quaternion& q) {
    return {p.w - q.w, p.x - q.x, p.y - q.y, p.z - q.z};
  }
  friend Quaternion operator-(const Quaternion& p) { return {-p.w, -p.x, -p.y, -p.z}; }
  friend Quaternion operator*(double s, const Quaternion& q) {
    return {s * q.w, s * q.x, s * q.y, s * q.z};
  }
  friend Quaternion operator*(const Quaternion& p, const Quaternion& q) {
    return {p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
            p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
            p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
            p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w};
  }
  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

inline double dot(const Quaternion& p, const Quaternion& q) {
  return p.w * q.w + p.x * q.x + p.y * q.y + p.z * q.z;
}

/// exp of a pure imaginary quaternion: cos|b| + sin|b| b/|b|.
inline Quaternion exp_imaginary(const Quaternion& b) {
  const double t = std::sqrt(b.x * b.x + b.y * b.y + b.z * b.z);
  // sin(t)/t with a series near zero
  const double sinc = (t < 1e-8) ? 1.0 - t * t / 6.0 : std::sin(t) / t;
  return {std::cos(t), sinc * b.x, sinc * b.y, sinc * b.z};
}

/// The octonion a + b e.
struct Octonion {
  Quaternion a, b;

  static constexpr Octonion real(double r) { return {{r, 0, 0, 0}, {}}; }
  static constexpr Octonion e() { return {{}, Quaternion::one()}; }

  /// Canonical basis element n of (1, i, j, k, e, ie, je, ke).
  static Octonion basis(std::size_t n) {
    std::array<double, 8> f{};
    f.at(n) = 1.0;
    return from_array(f);
  }

  static Octonion from_array(const std::array<double, 8>& f) {
    return {{f[0], f[1], f[2], f[3]}, {f[4], f[5], f[6], f[7]}};
  }

  /// Imaginary octonion from an R^7 vector.
  static Octonion from_im(std::span<const double> v) {
    if (v.size() != 7) throw Error("dimension mismatch");
    return {{0, v[0], v[1], v[2]}, {v[3], v[4], v[5], v[6]}};
  }

  std::array<double, 8> to_array() const { return {a.w, a.x, a.y, a.z, b.w, b.x, b.y, b.z}; }

  /// Imaginary part as an R^7 vector.
  Vector to_im() const { return {a.x, a.y, a.z, b.w, b.x, b.y, b.z}; }

  Octonion conj() const { return {a.conj(), -b}; }
  double re() const { return a.w; }
  Octonion im() const { return {a.im(), b}; }
  double norm2() const { return a.norm2() + b.norm2(); }
  double norm() const { return std::sqrt(norm2()); }

  friend Octonion operator+(const Octonion& x, const Octonion& y) { return {x.a + y.a, x.b + y.b}; }
  friend Octonion operator-(const Octonion& x, const Octonion& y) { return {x.a - y.a, x.b - y.b}; }
  friend Octonion operator-(const Octonion& x) { return {-x.a, -x.b}; }
  friend Octonion operator*(double s, const Octonion& x) { return {s * x.a, s * x.b}; }
  friend bool operator==(const Octonion&, const Octonion&) = default;
};

/// (a + be)(c + de) = (ac - conj(d) b) + (da + b conj(c)) e
inline Octonion oct_mul(const Octonion& x, const Octonion& y) {
  return {x.a * y.a - y.b.conj() * x.b, y.b * x.a + x.b * y.a.conj()};
}

inline Octonion operator*(const Octonion& x, const Octonion& y) { return oct_mul(x, y); }

/// <x, y> = Re(x conj(y)).
inline double inner(const Octonion& x, const Octonion& y) { return (x * y.conj()).re(); }

inline Octonion conj(const Octonion& x) { return x.conj(); }
inline double re(const Octonion& x) { return x.re(); }
inline Octonion im(const Octonion& x) { return x.im(); }

/// Quaternion q viewed as the octonion q + 0e, or as qe.
inline Octonion in_h(const Quaternion& q) { return {q, {}}; }
inline Octonion in_he(const Quaternion& q) { return {{}, q}; }

inline Subspace im_h() { return Subspace::coordinate(7, {0, 1, 2}); }
inline Subspace h_e() { return Subspace::coordinate(7, {3, 4, 5, 6}); }

// ---------------------------------------------------------------------------
// Associative 3-planes

struct AssociativityTest {
  bool associative = false;
  double residual = 0.0;  // min(|z - xy|, |z + xy|)
};

inline AssociativityTest is_associative(const Subspace& p, double tol = 1e-8) {
  if (p.ambient_dim != 7 || p.dim() != 3) throw Error("is_associative: need a 3-plane in R^7");
  const Octonion x = Octonion::from_im(p.vectors()[0]);
  const Octonion y = Octonion::from_im(p.vectors()[1]);
  const Octonion z = Octonion::from_im(p.vectors()[2]);
  const Octonion xy = x * y;
  const double r = std::min((z - xy).norm(), (z + xy).norm());
  return {r < tol, r};
}

/// span{x, y, xy} for random orthonormal imaginary x, y.
inline Subspace random_associative(Rng& rng) {
  const Subspace xy = Subspace::span({rng.normal_vector(7), rng.normal_vector(7)});
  const Octonion x = Octonion::from_im(xy.vectors()[0]);
  const Octonion y = Octonion::from_im(xy.vectors()[1]);
  return Subspace::from_orthonormal(7, {x.to_im(), y.to_im(), (x * y).to_im()}, 1e-12);
}

inline Subspace random_associative(std::uint64_t seed) {
  Rng rng(seed);
  return random_associative(rng);
}

/// Angle data of an associative plane P relative to Im H in the normalized
/// form: x1 = cos t1 a1 + sin t1 a1 eps, x2 = cos t2 a2 + sin t2 a2 eps,
/// x3 = cos(t1+t2) a3 - sin(t1+t2) a3 eps, with a3 = a1 a2 and x3 = x1 x2.
struct AssociativeFrame {
  double theta1 = 0.0, theta2 = 0.0, theta3 = 0.0;  // theta3 = theta1 + theta2
  Octonion a1, a2, a3;
  Octonion epsilon;
  Octonion x1, x2, x3;
};

enum class AssociativeCase { I, II, III };

struct AssociativeAnalysis {
  AssociativeCase kind = AssociativeCase::III;
  JordanSpectrum spectrum;
  std::optional<AssociativeFrame> frame;  // only for case III
};

namespace detail {

struct AngleDirection {
  double theta;
  Octonion x, a, y;
};

inline AngleDirection split_direction(const Vector& v) {
  const Octonion x = Octonion::from_im(v);
  const Octonion p0{x.a, {}};
  const Octonion p0perp{{}, x.b};
  const double c = p0.norm(), s = p0perp.norm();
  return {std::atan2(s, c), x, (1.0 / c) * p0, (1.0 / s) * p0perp};
}

}  // namespace detail

inline AssociativeAnalysis associative_frame(const Subspace& p, double tol = 1e-8,
                                             double cluster_tol = kExactClusterTol) {
  const AssociativityTest t = is_associative(p, tol);
  if (!t.associative) throw Error("associative_frame: plane is not associative");

  AssociativeAnalysis out;
  out.spectrum = jordan_spectrum(p, im_h(), cluster_tol);
  for (const auto& c : out.spectrum.classes) {
    if (c.angle == 0.0 && c.multiplicity >= 2) {
      out.kind = AssociativeCase::I;
      return out;
    }
    if (c.angle == kHalfPi && c.multiplicity >= 2) {
      out.kind = AssociativeCase::II;
      return out;
    }
  }

  // Two orthogonal angle directions with interior angles, smallest first.
  std::vector<detail::AngleDirection> dirs;
  for (const auto& c : out.spectrum.classes) {
    if (!(c.angle > 0.0 && c.angle < kHalfPi)) continue;
    for (const auto& v : c.directions_in_P.vectors())
      if (dirs.size() < 2) dirs.push_back(detail::split_direction(v));
  }
  if (dirs.size() < 2) throw Error("associative_frame: fewer than two interior angles");

  auto d1 = dirs[0], d2 = dirs[1];
  Octonion eps = -(d1.a * d1.y);  // y1 = a1 eps
  const Octonion b = d2.y * eps.conj();
  AssociativeFrame f;
  if (inner(b, d2.a) > 0.0) {
    f.theta1 = d1.theta;
    f.theta2 = d2.theta;
    f.theta3 = d1.theta + d2.theta;
    f.a1 = d1.a;
    f.a2 = d2.a;
    f.a3 = d1.a * d2.a;
    f.epsilon = eps;
    f.x1 = d1.x;
    f.x2 = d2.x;
    f.x3 = d1.x * d2.x;
  } else {
    // b = -a2: order so theta1 >= theta2, then x3 = x1 x2 carries theta1 - theta2
    // and the cyclic relabeling with eps' = -eps restores the normal form.
    if (d1.theta < d2.theta) {
      std::swap(d1, d2);
      eps = -(d1.a * d1.y);
    }
    const Octonion a3 = d1.a * d2.a;
    const Octonion x3 = d1.x * d2.x;
    f.theta1 = d2.theta;
    f.theta2 = d1.theta - d2.theta;
    f.theta3 = d1.theta;
    f.a1 = d2.a;
    f.a2 = a3;
    f.a3 = d1.a;
    f.epsilon = -eps;
    f.x1 = d2.x;
    f.x2 = x3;
    f.x3 = d1.x;
  }
  out.frame = f;
  return out;
}

}  // namespace jgeom
