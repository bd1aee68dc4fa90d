// Jordan (principal) angles between subspaces, the anti-involution Phi,
// orthogonal complements and rigid alignment of plane pairs.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "jgeom/linalg.hpp"

namespace jgeom {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;
inline constexpr double kExactClusterTol = 1e-9;
inline constexpr double kFdClusterTol = 1e-4;

/// A linear subspace of R^ambient_dim held by an orthonormal basis.
/// The zero subspace is allowed (dim 0) so that empty angle spaces have a home.
struct Subspace {
  std::size_t ambient_dim = 0;
  OrthonormalBasis basis;

  std::size_t dim() const { return basis.dim(); }
  const std::vector<Vector>& vectors() const { return basis.columns; }

  static Subspace zero(std::size_t ambient_dim) { return {ambient_dim, {ambient_dim, {}}}; }

  /// Orthonormalized span of arbitrary vectors.
  static Subspace span(const std::vector<Vector>& vectors, double tol = kDefaultOrthoTol) {
    OrthonormalBasis b = orthonormalize(vectors, tol);
    return {b.ambient_dim, std::move(b)};
  }

  /// Wraps columns that are already orthonormal; rejects anything else.
  static Subspace from_orthonormal(std::size_t ambient_dim, std::vector<Vector> columns,
                                   double tol = 1e-8) {
    for (const auto& c : columns)
      if (c.size() != ambient_dim) throw Error("dimension mismatch");
    Subspace s{ambient_dim, {ambient_dim, std::move(columns)}};
    if (s.basis.orthonormality_defect() > tol) throw Error("basis is not orthonormal");
    if (s.dim() > ambient_dim) throw Error("subspace dimension exceeds ambient dimension");
    return s;
  }

  /// Span of the listed standard basis vectors.
  static Subspace coordinate(std::size_t ambient_dim, const std::vector<std::size_t>& axes) {
    std::vector<Vector> cols;
    for (std::size_t a : axes) cols.push_back(unit_vector(ambient_dim, a));
    return from_orthonormal(ambient_dim, std::move(cols));
  }

  Matrix projector() const {
    Matrix p(ambient_dim, ambient_dim);
    for (const auto& b : basis.columns)
      for (std::size_t i = 0; i < ambient_dim; ++i)
        for (std::size_t j = 0; j < ambient_dim; ++j) p(i, j) += b[i] * b[j];
    return p;
  }
};

/// Orthogonal projection of x onto S.
inline Vector project(const Subspace& s, std::span<const double> x) {
  if (x.size() != s.ambient_dim) throw Error("dimension mismatch");
  Vector r(x.size(), 0.0);
  for (const auto& b : s.vectors()) axpy(dot(b, x), b, r);
  return r;
}

/// Component of x orthogonal to S.
inline Vector reject(const Subspace& s, std::span<const double> x) {
  Vector r(x.begin(), x.end());
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : s.vectors()) axpy(-dot(b, r), b, r);
  return r;
}

/// Frobenius distance between the orthogonal projectors of two subspaces.
inline double projector_distance(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim != b.ambient_dim) throw Error("dimension mismatch");
  return (a.projector() - b.projector()).frobenius_norm();
}

inline Subspace orthogonal_complement(const Subspace& s) {
  const std::size_t d = s.ambient_dim;
  if (s.dim() >= d) throw Error("empty complement");
  const SymEigen eig = sym_eigen(Matrix::identity(d) - s.projector());
  std::vector<Vector> cols;
  for (std::size_t i = 0; i < d - s.dim(); ++i) {
    Vector c = reject(s, eig.vectors.columns[i]);
    detail::project_out(c, cols);
    const double n = norm(c);
    for (double& x : c) x /= n;
    cols.push_back(std::move(c));
  }
  return Subspace::from_orthonormal(d, std::move(cols), 1e-10);
}

// ---------------------------------------------------------------------------
// Jordan spectrum

/// One Jordan angle with its angle space in P and the matching space in Q0.
/// partners_in_Q is ordered so that partner i is the normalized projection of
/// direction i; it is empty for the right angle.
struct AngleClass {
  double angle = 0.0;
  std::size_t multiplicity = 0;
  Subspace directions_in_P;
  Subspace partners_in_Q;
};

struct JordanSpectrum {
  std::vector<AngleClass> classes;  // ascending by angle
  double cluster_tol = kExactClusterTol;

  /// All angles repeated by multiplicity, ascending.
  std::vector<double> expanded() const {
    std::vector<double> out;
    for (const auto& c : classes) out.insert(out.end(), c.multiplicity, c.angle);
    return out;
  }

  std::size_t total_multiplicity() const {
    std::size_t n = 0;
    for (const auto& c : classes) n += c.multiplicity;
    return n;
  }

  /// Class whose angle is within tol of the given value, if any.
  const AngleClass* find(double angle, double tol) const {
    for (const auto& c : classes)
      if (std::abs(c.angle - angle) <= tol) return &c;
    return nullptr;
  }
};

/// True when both spectra have equal multiplicities and angles within tol.
inline bool same_spectrum(const JordanSpectrum& a, const JordanSpectrum& b, double tol) {
  if (a.classes.size() != b.classes.size()) return false;
  for (std::size_t i = 0; i < a.classes.size(); ++i) {
    if (a.classes[i].multiplicity != b.classes[i].multiplicity) return false;
    if (std::abs(a.classes[i].angle - b.classes[i].angle) > tol) return false;
  }
  return true;
}

namespace detail {

inline Vector combine(const std::vector<Vector>& basis, std::span<const double> coeffs,
                      std::size_t dim) {
  Vector r(dim, 0.0);
  for (std::size_t i = 0; i < basis.size(); ++i) axpy(coeffs[i], basis[i], r);
  return r;
}

}  // namespace detail

/**
 * Jordan angles of P relative to Q0.
 *
 * Cosines are the singular values of A^T B.  Directions whose cosine exceeds
 * 0.99 are re-resolved from the sines, i.e. from the SVD of the component of
 * those directions orthogonal to Q0, which keeps small angles accurate.
 */
inline JordanSpectrum jordan_spectrum(const Subspace& p, const Subspace& q0,
                                      double cluster_tol = kExactClusterTol) {
  if (p.ambient_dim != q0.ambient_dim) throw Error("dimension mismatch");
  if (!(cluster_tol > 0)) throw Error("cluster_tol must be positive");
  const std::size_t d = p.ambient_dim, k = p.dim(), l = q0.dim();
  JordanSpectrum out;
  out.cluster_tol = cluster_tol;
  if (k == 0) return out;

  const auto& a = p.vectors();
  const auto& b = q0.vectors();
  Matrix m(k, l);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < l; ++j) m(i, j) = dot(a[i], b[j]);
  const Matrix mt = m.transpose();

  const SymEigen eig = sym_eigen(m * mt);
  std::vector<Vector> coeffs = eig.vectors.columns;
  std::vector<double> cosines;
  for (const auto& c : coeffs) cosines.push_back(std::min(1.0, norm(mt * c)));

  // Sine refinement of the near-zero angles.
  std::vector<std::size_t> high;
  for (std::size_t i = 0; i < k; ++i)
    if (cosines[i] > 0.99) high.push_back(i);
  std::vector<bool> refined(k, false);
  if (!high.empty()) {
    std::vector<Vector> w;
    for (std::size_t i : high) w.push_back(reject(q0, detail::combine(a, coeffs[i], d)));
    Matrix g(high.size(), high.size());
    for (std::size_t r = 0; r < high.size(); ++r)
      for (std::size_t s = 0; s < high.size(); ++s) g(r, s) = dot(w[r], w[s]);
    const SymEigen rot = sym_eigen(g);
    std::vector<Vector> rotated;
    for (const auto& rc : rot.vectors.columns) {
      Vector c(k, 0.0);
      for (std::size_t r = 0; r < high.size(); ++r) axpy(rc[r], coeffs[high[r]], c);
      rotated.push_back(std::move(c));
    }
    for (std::size_t r = 0; r < high.size(); ++r) {
      coeffs[high[r]] = std::move(rotated[r]);
      refined[high[r]] = true;
    }
  }

  struct Dir {
    double angle;
    Vector u;
  };
  std::vector<Dir> dirs;
  for (std::size_t i = 0; i < k; ++i) {
    Vector u = detail::combine(a, coeffs[i], d);
    u = (1.0 / norm(u)) * u;
    detail::fix_sign(u);
    double angle;
    if (refined[i]) {
      angle = std::atan2(norm(reject(q0, u)), norm(project(q0, u)));
    } else {
      angle = std::acos(std::clamp(cosines[i], 0.0, 1.0));
    }
    dirs.push_back({angle, std::move(u)});
  }
  std::stable_sort(dirs.begin(), dirs.end(),
                   [](const Dir& x, const Dir& y) { return x.angle < y.angle; });

  for (std::size_t i = 0; i < dirs.size();) {
    std::size_t j = i + 1;
    while (j < dirs.size() && dirs[j].angle - dirs[j - 1].angle <= cluster_tol) ++j;
    double mean = 0.0;
    std::vector<Vector> us;
    for (std::size_t t = i; t < j; ++t) {
      mean += dirs[t].angle;
      us.push_back(dirs[t].u);
    }
    mean /= static_cast<double>(j - i);
    if (mean <= cluster_tol) mean = 0.0;
    if (kHalfPi - mean <= cluster_tol) mean = kHalfPi;

    AngleClass cls;
    cls.angle = mean;
    cls.multiplicity = j - i;
    cls.directions_in_P = Subspace::span(us, 1e-6);
    if (cls.directions_in_P.dim() != cls.multiplicity)
      throw Error("jordan_spectrum: lost rank in angle space");
    cls.partners_in_Q = Subspace::zero(d);
    if (mean < kHalfPi) {
      std::vector<Vector> ws;
      for (const auto& u : cls.directions_in_P.vectors()) {
        Vector w = project(q0, u);
        ws.push_back((1.0 / norm(w)) * w);
      }
      cls.partners_in_Q = Subspace::span(ws, 1e-6);
    }
    out.classes.push_back(std::move(cls));
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Anti-involution

/// Phi_theta on R_theta = P_theta + (P^perp)_theta, stored both as an ambient
/// linear map (zero off the domain) and as a matrix in domain coordinates.
struct AntiInvolution {
  double theta = 0.0;
  Subspace domain;  // first the P_theta basis, then its image in P^perp
  Matrix matrix;
  Matrix ambient;

  Vector apply(std::span<const double> x) const { return ambient * x; }
};

namespace detail {

// Phi on the P side: (cos u - sec P0 u) / sin.
inline Vector phi_from_p(const Subspace& q0, double theta, const Vector& u) {
  const double c = std::cos(theta), s = std::sin(theta);
  Vector r = c * u;
  axpy(-1.0 / c, project(q0, u), r);
  return (1.0 / s) * r;
}

// Phi on the P^perp side: (cos v - sec P0^perp v) / sin.
inline Vector phi_from_perp(const Subspace& q0, double theta, const Vector& v) {
  const double c = std::cos(theta), s = std::sin(theta);
  Vector r = c * v;
  axpy(-1.0 / c, reject(q0, v), r);
  return (1.0 / s) * r;
}

}  // namespace detail

inline AntiInvolution anti_involution(const Subspace& p, const Subspace& q0,
                                      const AngleClass& cls) {
  if (p.ambient_dim != q0.ambient_dim) throw Error("dimension mismatch");
  const double theta = cls.angle;
  if (!(theta > 0.0 && theta < kHalfPi)) throw Error("Phi undefined; use zero map");
  const std::size_t d = p.ambient_dim;

  const auto& us = cls.directions_in_P.vectors();
  std::vector<Vector> images;
  for (const auto& u : us) images.push_back(detail::phi_from_p(q0, theta, u));
  const Subspace perp = Subspace::span(images, 1e-6);
  if (perp.dim() != us.size()) throw Error("anti_involution: degenerate angle space");

  AntiInvolution phi;
  phi.theta = theta;
  phi.ambient = Matrix(d, d);
  for (std::size_t i = 0; i < us.size(); ++i)
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) phi.ambient(r, c) += images[i][r] * us[i][c];
  for (const auto& v : perp.vectors()) {
    const Vector img = detail::phi_from_perp(q0, theta, v);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) phi.ambient(r, c) += img[r] * v[c];
  }

  std::vector<Vector> dom = us;
  dom.insert(dom.end(), perp.vectors().begin(), perp.vectors().end());
  phi.domain = Subspace::from_orthonormal(d, dom, 1e-8);
  const Matrix db = phi.domain.basis.as_matrix();
  phi.matrix = db.transpose() * phi.ambient * db;
  return phi;
}

// ---------------------------------------------------------------------------
// Alignment

namespace detail {

// Ordered orthonormal basis adapted to the pair (P, Q): per angle class the P
// directions followed by the unit vectors t with w = cos u + sin t, then
// Q directions orthogonal to P, then the joint complement.
inline std::vector<Vector> pair_basis(const Subspace& p, const Subspace& q,
                                      const JordanSpectrum& spec, double tol) {
  const std::size_t d = p.ambient_dim;
  std::vector<Vector> basis;
  for (const auto& cls : spec.classes) {
    const auto& us = cls.directions_in_P.vectors();
    basis.insert(basis.end(), us.begin(), us.end());
    if (cls.angle > 0.0 && cls.angle < kHalfPi) {
      const double c = std::cos(cls.angle), s = std::sin(cls.angle);
      for (const auto& u : us) {
        Vector w = project(q, u);
        w = (1.0 / norm(w)) * w;
        Vector t = w;
        axpy(-c, u, t);
        basis.push_back((1.0 / s) * t);
      }
    }
  }
  if (q.dim() > 0) {
    const JordanSpectrum back = jordan_spectrum(q, p, tol);
    if (!back.classes.empty() && back.classes.back().angle == kHalfPi) {
      const auto& extra = back.classes.back().directions_in_P.vectors();
      basis.insert(basis.end(), extra.begin(), extra.end());
    }
  }
  if (basis.size() < d) {
    const Subspace used = Subspace::span(basis, 1e-6);
    if (used.dim() < d) {
      const Subspace rest = orthogonal_complement(used);
      basis.insert(basis.end(), rest.vectors().begin(), rest.vectors().end());
    }
  }
  return basis;
}

}  // namespace detail

/// Orthogonal T with T(P1) = P2 and T(Q1) = Q2, or nothing when the Jordan
/// spectra of the two pairs differ.
inline std::optional<Matrix> align_pairs(const Subspace& p1, const Subspace& q1,
                                         const Subspace& p2, const Subspace& q2,
                                         double cluster_tol = kExactClusterTol) {
  const std::size_t d = p1.ambient_dim;
  if (q1.ambient_dim != d || p2.ambient_dim != d || q2.ambient_dim != d)
    throw Error("dimension mismatch");
  if (p1.dim() != p2.dim() || q1.dim() != q2.dim()) throw Error("dimension mismatch");
  const JordanSpectrum s1 = jordan_spectrum(p1, q1, cluster_tol);
  const JordanSpectrum s2 = jordan_spectrum(p2, q2, cluster_tol);
  if (!same_spectrum(s1, s2, cluster_tol)) return std::nullopt;

  const auto b1 = detail::pair_basis(p1, q1, s1, cluster_tol);
  const auto b2 = detail::pair_basis(p2, q2, s2, cluster_tol);
  if (b1.size() != d || b2.size() != d) throw Error("align_pairs: incomplete basis");
  Matrix t(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) t(r, c) += b2[i][r] * b1[i][c];
  return t;
}

/// Image of a subspace under a linear map (assumed orthogonal).
inline Subspace transform(const Matrix& t, const Subspace& s) {
  if (s.dim() == 0) return Subspace::zero(t.rows());
  std::vector<Vector> cols;
  for (const auto& v : s.vectors()) cols.push_back(t * v);
  return Subspace::span(cols);
}

}  // namespace jgeom
