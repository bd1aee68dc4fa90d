/**
 * @file geometry.hpp
 * @brief Extrinsic geometry of parametrized immersions by finite differences.
 *
 * Conventions: Q0 is the reference plane of the immersion.  Normal Jordan
 * angles are measured between N_pM and Q0, tangent Jordan angles between
 * T_pM and the complement of Q0.  Phi_theta is the zero map at 0 and pi/2.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jgeom/linalg.hpp"
#include "jgeom/octonion.hpp"
#include "jgeom/rng.hpp"
#include "jgeom/subspace.hpp"

namespace jgeom {

struct FDConfig {
  double step_first = 6e-6;
  double step_second = 1.2e-4;
  bool richardson = true;
  double scale = 1.0;

  void validate() const {
    if (!(step_first > 0 && step_second > 0 && scale > 0)) throw Error("FD steps must be positive");
  }
};

/// Orthonormal tangent and normal frames at a point.
struct Frames {
  std::vector<Vector> tangent;
  std::vector<Vector> normal;
};

class Immersion;

/// A sampled point: the chart it lives in and its parameter.
struct Sample {
  std::shared_ptr<const Immersion> chart;
  Vector param;
};

/**
 * A parametrized submanifold together with its reference plane Q0 and a
 * sampling rule.  Implementations must be pure: evaluate() may be called
 * concurrently.
 */
class Immersion : public std::enable_shared_from_this<Immersion> {
 public:
  virtual ~Immersion() = default;

  virtual std::string name() const = 0;
  virtual std::size_t param_dim() const = 0;
  virtual std::size_t ambient_dim() const = 0;
  virtual Vector evaluate(const Vector& u) const = 0;
  virtual Subspace reference_plane() const = 0;

  /// Draws a seeded sample point inside the sampling domain.
  virtual Sample sample(Rng& rng) const = 0;

  /// True when u and its margin-neighbourhood lie in the domain.
  virtual bool in_domain(const Vector& u, double margin) const {
    (void)margin;
    return u.size() == param_dim();
  }

  /// Jordan-aligned smooth frame fields, when the model has them.
  virtual std::optional<Frames> analytic_frame(const Vector& u) const {
    (void)u;
    return std::nullopt;
  }
  virtual bool has_analytic_frame() const { return false; }

  /// Exact second partials d2F/du_a du_c, when known in closed form.
  virtual std::optional<std::vector<std::vector<Vector>>> second_partials(const Vector&) const {
    return std::nullopt;
  }

  /// The analytic frame follows the Lawson-Osserman labels: e1 (arccos 2/3),
  /// e2, e3 (arccos sqrt6/6), e4 (0) and nu_a = Phi(e_a).
  virtual bool lo_labeled_frame() const { return false; }

  /// Whether the model is known to have constant Jordan angles.
  virtual bool constant_angles() const { return true; }
};

// ---------------------------------------------------------------------------
// Framed points

struct FramedPoint {
  Vector param;
  Vector point;
  Subspace tangent;
  Subspace normal;
  std::vector<Vector> tangent_frame;  // e_1..e_n
  std::vector<Vector> normal_frame;   // nu_1..nu_m
  Matrix jacobian;                    // ambient x param
  /// b[i][j] = B(e_i, e_j) as an ambient normal vector.
  std::vector<std::vector<Vector>> b;
  /// h[alpha](i, j) = <B(e_i, e_j), nu_alpha>
  std::vector<Matrix> h;
  bool analytic_frame = false;

  std::size_t n() const { return tangent_frame.size(); }
  std::size_t m() const { return normal_frame.size(); }

  /// Coordinates of a tangent vector in the tangent frame.
  Vector tangent_coords(const Vector& x) const {
    Vector c(n());
    for (std::size_t i = 0; i < n(); ++i) c[i] = dot(tangent_frame[i], x);
    return c;
  }

  /// Second fundamental form on arbitrary tangent vectors.
  Vector second_form(const Vector& x, const Vector& y) const {
    const Vector cx = tangent_coords(x), cy = tangent_coords(y);
    Vector r(point.size(), 0.0);
    for (std::size_t i = 0; i < n(); ++i)
      for (std::size_t j = 0; j < n(); ++j) axpy(cx[i] * cy[j], b[i][j], r);
    return r;
  }

  /// A^nu X = sum_j <B(X, e_j), nu> e_j
  Vector shape_operator(const Vector& nu, const Vector& x) const {
    const Vector cx = tangent_coords(x);
    Vector r(point.size(), 0.0);
    for (std::size_t j = 0; j < n(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n(); ++i) s += cx[i] * dot(b[i][j], nu);
      axpy(s, tangent_frame[j], r);
    }
    return r;
  }

  double h_asymmetry() const {
    double worst = 0.0;
    for (const auto& ha : h)
      for (std::size_t i = 0; i < n(); ++i)
        for (std::size_t j = 0; j < n(); ++j) worst = std::max(worst, std::abs(ha(i, j) - ha(j, i)));
    return worst;
  }
};

namespace detail {

inline Vector shifted(const Vector& u, std::size_t a, double da) {
  Vector v = u;
  v[a] += da;
  return v;
}

inline Vector shifted(const Vector& u, std::size_t a, double da, std::size_t b, double db) {
  Vector v = u;
  v[a] += da;
  v[b] += db;
  return v;
}

inline Vector second_partial(const Immersion& imm, const Vector& u, const Vector& f0,
                             std::size_t a, std::size_t b, double h) {
  if (a == b) {
    Vector r = imm.evaluate(shifted(u, a, h)) + imm.evaluate(shifted(u, a, -h));
    axpy(-2.0, f0, r);
    return (1.0 / (h * h)) * r;
  }
  Vector r = imm.evaluate(shifted(u, a, h, b, h)) - imm.evaluate(shifted(u, a, h, b, -h)) -
             imm.evaluate(shifted(u, a, -h, b, h)) + imm.evaluate(shifted(u, a, -h, b, -h));
  return (1.0 / (4.0 * h * h)) * r;
}

// Computes b and h for the given frames from the coordinate second partials.
inline void fill_second_form(FramedPoint& fp, const std::vector<std::vector<Vector>>& fn) {
  const std::size_t n = fp.tangent_frame.size();
  const std::size_t p = fp.jacobian.cols();
  // L = E^T J maps parameter coordinates to frame coordinates.
  Matrix l(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < p; ++a) l(i, a) = dot(fp.tangent_frame[i], fp.jacobian.column(a));
  const Matrix linv = inverse(l);
  fp.b.assign(n, std::vector<Vector>(n, Vector(fp.point.size(), 0.0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t a = 0; a < p; ++a)
        for (std::size_t c = 0; c < p; ++c) axpy(linv(a, i) * linv(c, j), fn[a][c], fp.b[i][j]);
  fp.h.assign(fp.normal_frame.size(), Matrix(n, n));
  for (std::size_t al = 0; al < fp.normal_frame.size(); ++al)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) fp.h[al](i, j) = dot(fp.b[i][j], fp.normal_frame[al]);
}

inline std::vector<Vector> spectrum_frame(const JordanSpectrum& s) {
  std::vector<Vector> out;
  for (const auto& c : s.classes)
    out.insert(out.end(), c.directions_in_P.vectors().begin(), c.directions_in_P.vectors().end());
  return out;
}

}  // namespace detail

/// Same point with different orthonormal frames; h is recomputed from B.
inline FramedPoint reframe(const FramedPoint& fp, std::vector<Vector> tangent_frame,
                           std::vector<Vector> normal_frame) {
  if (tangent_frame.size() != fp.n() || normal_frame.size() != fp.m())
    throw Error("reframe: frame sizes do not match");
  FramedPoint out = fp;
  out.tangent_frame = std::move(tangent_frame);
  out.normal_frame = std::move(normal_frame);
  out.analytic_frame = false;
  const std::size_t n = out.n();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.b[i][j] = fp.second_form(out.tangent_frame[i], out.tangent_frame[j]);
  out.h.assign(out.m(), Matrix(n, n));
  for (std::size_t al = 0; al < out.m(); ++al)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out.h[al](i, j) = dot(out.b[i][j], out.normal_frame[al]);
  return out;
}

/**
 * Tangent space, normal space, frames and second fundamental form at u.
 *
 * Frames come from the model when it ships an analytic frame, otherwise from
 * the Jordan spectra of T vs Q0^perp and N vs Q0 (ascending angles).
 */
inline FramedPoint frame_at(const Immersion& imm, const Vector& u, const FDConfig& fd,
                            const Subspace& q0) {
  fd.validate();
  const std::size_t p = imm.param_dim(), d = imm.ambient_dim();
  if (u.size() != p) throw Error("dimension mismatch");
  if (q0.ambient_dim != d) throw Error("dimension mismatch");
  const double h1 = fd.step_first * fd.scale;
  const double h2 = fd.step_second * fd.scale;
  if (!imm.in_domain(u, 2.0 * h2)) throw Error("parameter too close to the domain boundary");

  FramedPoint fp;
  fp.param = u;
  fp.point = imm.evaluate(u);
  fp.jacobian = Matrix(d, p);
  for (std::size_t a = 0; a < p; ++a) {
    const Vector da = (1.0 / (2.0 * h1)) *
                      (imm.evaluate(detail::shifted(u, a, h1)) - imm.evaluate(detail::shifted(u, a, -h1)));
    for (std::size_t r = 0; r < d; ++r) fp.jacobian(r, a) = da[r];
  }
  {
    const auto cols = fp.jacobian.columns();
    double jscale = 0.0;
    for (const auto& c : cols) jscale = std::max(jscale, norm(c));
    if (jscale == 0.0) throw Error("immersion singular");
    OrthonormalBasis tb{d, {}};
    try {
      tb = orthonormalize(cols, 1e-7);
    } catch (const Error&) {
      throw Error("immersion singular");
    }
    if (tb.dim() < p) throw Error("immersion singular");
    fp.tangent = {d, tb};
  }
  fp.normal = orthogonal_complement(fp.tangent);

  std::vector<std::vector<Vector>> fn(p, std::vector<Vector>(p));
  const auto exact = imm.second_partials(u);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t c = a; c < p; ++c) {
      if (exact) {
        fn[a][c] = fn[c][a] = project(fp.normal, (*exact)[a][c]);
        continue;
      }
      Vector f = detail::second_partial(imm, u, fp.point, a, c, h2);
      if (fd.richardson) {
        const Vector half = detail::second_partial(imm, u, fp.point, a, c, 0.5 * h2);
        f = (1.0 / 3.0) * (4.0 * half - f);
      }
      fn[a][c] = fn[c][a] = project(fp.normal, f);
    }

  if (auto af = imm.analytic_frame(u)) {
    if (af->tangent.size() != p || af->normal.size() != d - p)
      throw Error("analytic frame has wrong size");
    fp.tangent_frame = std::move(af->tangent);
    fp.normal_frame = std::move(af->normal);
    fp.analytic_frame = true;
  } else {
    fp.tangent_frame = detail::spectrum_frame(
        jordan_spectrum(fp.tangent, orthogonal_complement(q0), kFdClusterTol));
    fp.normal_frame = detail::spectrum_frame(jordan_spectrum(fp.normal, q0, kFdClusterTol));
  }
  detail::fill_second_form(fp, fn);
  return fp;
}

inline Vector mean_curvature(const FramedPoint& fp) {
  Vector hv(fp.point.size(), 0.0);
  for (std::size_t al = 0; al < fp.m(); ++al) {
    double tr = 0.0;
    for (std::size_t i = 0; i < fp.n(); ++i) tr += fp.h[al](i, i);
    axpy(tr, fp.normal_frame[al], hv);
  }
  return hv;
}

// ---------------------------------------------------------------------------
// v and w functions

/// w = product of cosines of the normal Jordan angles, with multiplicity.
inline double w_function(const Subspace& normal, const Subspace& q0) {
  const JordanSpectrum s = jordan_spectrum(normal, q0, kExactClusterTol);
  double w = 1.0;
  for (const auto& c : s.classes) w *= std::pow(std::cos(c.angle), static_cast<double>(c.multiplicity));
  return w;
}

/// v = product of secants of the normal Jordan angles, with multiplicity.
inline double v_function(const Subspace& normal, const Subspace& q0) {
  const JordanSpectrum s = jordan_spectrum(normal, q0, kExactClusterTol);
  double v = 1.0;
  for (const auto& c : s.classes) {
    if (kHalfPi - c.angle <= 1e-9) throw Error("v infinite");
    v /= std::pow(std::cos(c.angle), static_cast<double>(c.multiplicity));
  }
  return v;
}

inline double v_function(const FramedPoint& fp, const Subspace& q0) { return v_function(fp.normal, q0); }
inline double w_function(const FramedPoint& fp, const Subspace& q0) { return w_function(fp.normal, q0); }

/// sqrt(det(I + G^T G)) for the gradient matrix G(alpha, i) = d f^alpha / d x^i.
inline double v_from_jacobian(const Matrix& grad) {
  if (!all_finite(grad.entries())) throw Error("non-finite gradient");
  const Matrix g = Matrix::identity(grad.cols()) + grad.transpose() * grad;
  return std::sqrt(determinant(g));
}

// ---------------------------------------------------------------------------
// kappa and the anti-involution on frames

inline double kappa(double theta, double sigma) {
  const double den = std::cos(2.0 * theta) - std::cos(2.0 * sigma);
  if (std::abs(den) <= 1e-12) throw Error("kappa undefined");
  return std::sin(2.0 * theta) / den;
}

inline bool is_boundary_angle(double theta) { return theta == 0.0 || theta == kHalfPi; }

enum class Side { Tangent, Normal };

/// Phi_theta(x) for x in the theta angle space on the given side; zero at
/// boundary angles.
inline Vector phi(const Subspace& q0, double theta, const Vector& x, Side side) {
  if (is_boundary_angle(theta)) return Vector(x.size(), 0.0);
  return side == Side::Normal ? detail::phi_from_p(q0, theta, x) : detail::phi_from_perp(q0, theta, x);
}

struct FrameClass {
  double angle = 0.0;
  std::vector<std::size_t> members;  // indices into the frame
};

/// Partition of the tangent and normal frames into Jordan angle classes.
struct AngleLayout {
  std::vector<FrameClass> tangent;
  std::vector<FrameClass> normal;

  static const FrameClass* find(const std::vector<FrameClass>& cs, double angle, double tol) {
    for (const auto& c : cs)
      if (std::abs(c.angle - angle) <= tol) return &c;
    return nullptr;
  }
};

namespace detail {

inline std::vector<FrameClass> cluster_frame(const std::vector<double>& angles, double tol) {
  std::vector<std::size_t> order(angles.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return angles[a] < angles[b]; });
  std::vector<FrameClass> out;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && angles[order[j]] - angles[order[j - 1]] <= tol) ++j;
    FrameClass c;
    double mean = 0.0;
    for (std::size_t t = i; t < j; ++t) {
      c.members.push_back(order[t]);
      mean += angles[order[t]];
    }
    mean /= static_cast<double>(j - i);
    if (mean <= tol) mean = 0.0;
    if (kHalfPi - mean <= tol) mean = kHalfPi;
    c.angle = mean;
    std::sort(c.members.begin(), c.members.end());
    out.push_back(std::move(c));
    i = j;
  }
  return out;
}

}  // namespace detail

/// Classifies each frame vector by its own angle (tangent against Q0^perp,
/// normal against Q0) and clusters the angles.
inline AngleLayout classify(const FramedPoint& fp, const Subspace& q0, double tol = kFdClusterTol) {
  std::vector<double> ta, na;
  for (const auto& e : fp.tangent_frame)
    ta.push_back(std::atan2(norm(project(q0, e)), norm(reject(q0, e))));
  for (const auto& nu : fp.normal_frame)
    na.push_back(std::atan2(norm(reject(q0, nu)), norm(project(q0, nu))));
  return {detail::cluster_frame(ta, tol), detail::cluster_frame(na, tol)};
}

// ---------------------------------------------------------------------------
// R and U tensors

namespace detail {

inline Vector project_onto(const std::vector<Vector>& frame, const FrameClass& cls, const Vector& x) {
  Vector r(x.size(), 0.0);
  for (std::size_t idx : cls.members) axpy(dot(frame[idx], x), frame[idx], r);
  return r;
}

inline void require_in_class(const FramedPoint& fp, const FrameClass& cls, const Vector& v, double tol) {
  const Vector pv = project_onto(fp.tangent_frame, cls, v);
  if (norm(v - pv) > tol) throw Error("vector is not in the tangent angle space");
}

}  // namespace detail

/// R_{theta sigma}(v1,v2,v3,v4) with B^sigma the projection onto N_sigma.
inline double rt_tensor(const FramedPoint& fp, const AngleLayout& layout, double theta, double sigma,
                        const Vector& v1, const Vector& v2, const Vector& v3, const Vector& v4,
                        double tol = kFdClusterTol) {
  const FrameClass* tc = AngleLayout::find(layout.tangent, theta, tol);
  const FrameClass* nc = AngleLayout::find(layout.normal, sigma, tol);
  if (!tc) throw Error("rt_tensor: theta is not a tangent angle");
  if (!nc) throw Error("rt_tensor: sigma is not a normal angle");
  for (const Vector* v : {&v1, &v2, &v3, &v4}) detail::require_in_class(fp, *tc, *v, 1e-6);
  auto bs = [&](const Vector& x, const Vector& y) {
    return detail::project_onto(fp.normal_frame, *nc, fp.second_form(x, y));
  };
  return dot(bs(v1, v3), bs(v2, v4)) - dot(bs(v1, v4), bs(v2, v3));
}

/// U_{theta sigma}(v1,v2,v3,v4) with (.)_sigma the projection onto T_sigma.
inline double ut_tensor(const FramedPoint& fp, const AngleLayout& layout, const Subspace& q0,
                        double theta, double sigma, const Vector& v1, const Vector& v2,
                        const Vector& v3, const Vector& v4, double tol = kFdClusterTol) {
  const FrameClass* tc = AngleLayout::find(layout.tangent, theta, tol);
  const FrameClass* sc = AngleLayout::find(layout.tangent, sigma, tol);
  if (!tc || !sc) throw Error("ut_tensor: angle is not a tangent angle");
  for (const Vector* v : {&v1, &v2, &v3, &v4}) detail::require_in_class(fp, *tc, *v, 1e-6);
  const double th = tc->angle;
  auto a = [&](const Vector& phi_arg, const Vector& x) {
    const Vector nu = phi(q0, th, phi_arg, Side::Tangent);
    return detail::project_onto(fp.tangent_frame, *sc, fp.shape_operator(nu, x));
  };
  return dot(a(v3, v1), a(v4, v2)) - dot(a(v4, v1), a(v3, v2));
}

// ---------------------------------------------------------------------------
// Connection coefficients

struct Connection {
  std::vector<Matrix> gamma;      // gamma[i](j, k) = <nabla_{e_i} e_j, e_k>
  std::vector<Matrix> gamma_bar;  // gamma_bar[i](a, b) = <nabla_{e_i} nu_a, nu_b>
};

/// Differentiates the analytic frame fields along each e_i.
inline Connection connection_coeffs(const Immersion& imm, const FramedPoint& fp, const FDConfig& fd) {
  if (!imm.has_analytic_frame()) throw Error("no frame field");
  const std::size_t n = fp.n(), m = fp.m(), p = imm.param_dim();
  Matrix l(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < p; ++a) l(i, a) = dot(fp.tangent_frame[i], fp.jacobian.column(a));
  const Matrix linv = inverse(l);
  const double h = fd.step_second * fd.scale;

  auto frames_at = [&](const Vector& c, double t) {
    Vector u = fp.param;
    axpy(t, c, u);
    auto f = imm.analytic_frame(u);
    if (!f) throw Error("no frame field");
    return *f;
  };
  auto derivative = [&](const Vector& c, double step) {
    const Frames fpl = frames_at(c, step), fmi = frames_at(c, -step);
    Frames d;
    for (std::size_t j = 0; j < n; ++j) d.tangent.push_back((0.5 / step) * (fpl.tangent[j] - fmi.tangent[j]));
    for (std::size_t a = 0; a < m; ++a) d.normal.push_back((0.5 / step) * (fpl.normal[a] - fmi.normal[a]));
    return d;
  };

  Connection out;
  for (std::size_t i = 0; i < n; ++i) {
    const Vector c = linv.column(i);
    const double margin = 2.0 * h * std::max(1.0, norm(c));
    if (!imm.in_domain(fp.param, margin)) throw Error("parameter too close to the domain boundary");
    Frames d = derivative(c, h);
    if (fd.richardson) {
      const Frames dh = derivative(c, 0.5 * h);
      for (std::size_t j = 0; j < n; ++j) d.tangent[j] = (1.0 / 3.0) * (4.0 * dh.tangent[j] - d.tangent[j]);
      for (std::size_t a = 0; a < m; ++a) d.normal[a] = (1.0 / 3.0) * (4.0 * dh.normal[a] - d.normal[a]);
    }
    Matrix g(n, n), gb(m, m);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) g(j, k) = dot(d.tangent[j], fp.tangent_frame[k]);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) gb(a, b) = dot(d.normal[a], fp.normal_frame[b]);
    out.gamma.push_back(std::move(g));
    out.gamma_bar.push_back(std::move(gb));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coassociative frame

/// Reframes a 4-dimensional point in R^7 with the frame built from the
/// associative normal space: e4 = eps, e_a = -nu_a e4.
struct CoassociativePoint {
  FramedPoint fp;
  AssociativeFrame frame;
  double associativity_residual = 0.0;
};

inline CoassociativePoint coassociative_frame(const FramedPoint& fp) {
  if (fp.point.size() != 7 || fp.n() != 4) throw Error("coassociative_frame: need a 4-manifold in R^7");
  const AssociativityTest t = is_associative(fp.normal, 1e-6);
  if (!t.associative) throw Error("not coassociative here");
  const AssociativeAnalysis an = associative_frame(fp.normal, 1e-6, kFdClusterTol);
  AssociativeFrame f;
  if (an.frame) {
    f = *an.frame;
  } else {
    // Repeated boundary angle: any oriented basis x1, x2, x1 x2 of the angle
    // directions, and eps the part of e orthogonal to the normal space.
    const auto dirs = detail::spectrum_frame(an.spectrum);
    f.x1 = Octonion::from_im(dirs[0]);
    f.x2 = Octonion::from_im(dirs[1]);
    f.x3 = f.x1 * f.x2;
    Vector eps = reject(fp.normal, Octonion::e().to_im());
    if (norm(eps) < 1e-6) eps = fp.tangent.vectors().front();
    f.epsilon = Octonion::from_im((1.0 / norm(eps)) * eps);
    const auto angle = [&](const Octonion& x) { return std::atan2(norm(reject(im_h(), x.to_im())), norm(project(im_h(), x.to_im()))); };
    f.theta1 = angle(f.x1);
    f.theta2 = angle(f.x2);
    f.theta3 = angle(f.x3);
  }
  const Octonion e4 = f.epsilon;
  std::vector<Vector> normal = {f.x1.to_im(), f.x2.to_im(), f.x3.to_im()};
  std::vector<Vector> tangent;
  for (const Octonion* nu : {&f.x1, &f.x2, &f.x3}) tangent.push_back((-(*nu * e4)).to_im());
  tangent.push_back(e4.to_im());
  for (const auto& e : tangent)
    if (norm(reject(fp.tangent, e)) > 1e-6) throw Error("coassociative_frame: frame is not tangent");
  return {reframe(fp, std::move(tangent), std::move(normal)), f, t.residual};
}

// ---------------------------------------------------------------------------
// CJA detection

struct AngleMultiplicity {
  double angle = 0.0;
  std::size_t multiplicity = 0;
};

struct SampleSpectra {
  Vector param;
  std::vector<AngleMultiplicity> normal;
  std::vector<AngleMultiplicity> tangent;
};

struct CJAReport {
  std::vector<SampleSpectra> samples;
  bool is_cja = false;
  std::vector<AngleMultiplicity> reference_spectrum;  // normal, vs Q0
  std::vector<AngleMultiplicity> reference_tangent;   // tangent, vs Q0^perp
  double max_deviation = 0.0;
  std::size_t g_n = 0, g_t = 0, r = 0;
  double angle_tol = 1e-6;
};

namespace detail {

inline std::vector<AngleMultiplicity> summarize(const JordanSpectrum& s) {
  std::vector<AngleMultiplicity> out;
  for (const auto& c : s.classes) out.push_back({c.angle, c.multiplicity});
  return out;
}

inline std::vector<double> expand(const std::vector<AngleMultiplicity>& s) {
  std::vector<double> out;
  for (const auto& c : s) out.insert(out.end(), c.multiplicity, c.angle);
  return out;
}

inline std::vector<AngleMultiplicity> regroup(const std::vector<double>& angles, double tol) {
  std::vector<AngleMultiplicity> out;
  for (double a : angles) {
    if (!out.empty() && std::abs(a - out.back().angle) <= tol) {
      ++out.back().multiplicity;
    } else {
      out.push_back({a, 1});
    }
  }
  return out;
}

// Position-wise median of equal-length sorted angle lists.
inline std::vector<double> median_angles(const std::vector<std::vector<double>>& lists) {
  std::vector<double> out;
  if (lists.empty()) return out;
  for (std::size_t i = 0; i < lists.front().size(); ++i) {
    std::vector<double> col;
    for (const auto& l : lists) col.push_back(l[i]);
    std::sort(col.begin(), col.end());
    const std::size_t mid = col.size() / 2;
    out.push_back(col.size() % 2 ? col[mid] : 0.5 * (col[mid - 1] + col[mid]));
  }
  return out;
}

inline bool same_structure(const std::vector<AngleMultiplicity>& a, const std::vector<AngleMultiplicity>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].multiplicity != b[i].multiplicity) return false;
  return true;
}

}  // namespace detail

/// Samples the immersion and decides whether its normal Jordan spectrum
/// relative to Q0 is constant.
inline CJAReport cja_check(const Immersion& imm, const Subspace& q0, std::size_t samples,
                           std::uint64_t seed, double angle_tol = 1e-6, const FDConfig& fd = {}) {
  if (samples < 2) throw Error("cja_check: need at least two samples");
  if (!(angle_tol > 0)) throw Error("cja_check: angle_tol must be positive");
  Rng rng(seed);
  const Subspace q0perp = orthogonal_complement(q0);
  CJAReport rep;
  rep.angle_tol = angle_tol;
  std::vector<std::vector<double>> nlists, tlists;
  for (std::size_t s = 0; s < samples; ++s) {
    const Sample smp = imm.sample(rng);
    const FramedPoint fp = frame_at(*smp.chart, smp.param, fd, q0);
    SampleSpectra ss;
    ss.param = smp.param;
    ss.normal = detail::summarize(jordan_spectrum(fp.normal, q0, kFdClusterTol));
    ss.tangent = detail::summarize(jordan_spectrum(fp.tangent, q0perp, kFdClusterTol));
    nlists.push_back(detail::expand(ss.normal));
    tlists.push_back(detail::expand(ss.tangent));
    rep.samples.push_back(std::move(ss));
  }
  const std::vector<double> nref = detail::median_angles(nlists);
  const std::vector<double> tref = detail::median_angles(tlists);
  rep.reference_spectrum = detail::regroup(nref, kFdClusterTol);
  rep.reference_tangent = detail::regroup(tref, kFdClusterTol);

  bool structure_ok = true;
  for (std::size_t s = 0; s < samples; ++s) {
    structure_ok = structure_ok && detail::same_structure(rep.samples[s].normal, rep.reference_spectrum);
    for (std::size_t i = 0; i < nref.size(); ++i)
      rep.max_deviation = std::max(rep.max_deviation, std::abs(nlists[s][i] - nref[i]));
  }
  rep.is_cja = structure_ok && rep.max_deviation <= angle_tol;
  rep.g_n = rep.reference_spectrum.size();
  rep.g_t = rep.reference_tangent.size();
  for (const auto& c : rep.reference_spectrum)
    if (c.angle != 0.0) rep.r += c.multiplicity;
  return rep;
}

// ---------------------------------------------------------------------------
// Identity checks

enum class IdentityId { NullPhi, NullSame, NullBoundary, STangent, SNormal, Constraint, CoassocH, GammaLo };

inline constexpr IdentityId kAllIdentities[] = {
    IdentityId::NullPhi,    IdentityId::NullSame, IdentityId::NullBoundary, IdentityId::STangent,
    IdentityId::SNormal,    IdentityId::Constraint, IdentityId::CoassocH,   IdentityId::GammaLo};

inline std::string_view identity_name(IdentityId id) {
  switch (id) {
    case IdentityId::NullPhi: return "NULL_PHI";
    case IdentityId::NullSame: return "NULL_SAME";
    case IdentityId::NullBoundary: return "NULL_BOUNDARY";
    case IdentityId::STangent: return "S_TANGENT";
    case IdentityId::SNormal: return "S_NORMAL";
    case IdentityId::Constraint: return "CONSTRAINT";
    case IdentityId::CoassocH: return "COASSOC_H";
    case IdentityId::GammaLo: return "GAMMA_LO";
  }
  return "?";
}

inline std::optional<IdentityId> parse_identity(std::string_view s) {
  for (IdentityId id : kAllIdentities)
    if (identity_name(id) == s) return id;
  return std::nullopt;
}

/// Identities that only involve B use the tighter tolerance.
inline double default_tolerance(IdentityId id) {
  switch (id) {
    case IdentityId::NullPhi:
    case IdentityId::NullSame:
    case IdentityId::NullBoundary:
    case IdentityId::CoassocH: return 1e-5;
    default: return 1e-4;
  }
}

/// Raised when an identity does not apply to a model; reported as skipped.
class InapplicableIdentity : public Error {
 public:
  using Error::Error;
};

struct IdentityResidual {
  IdentityId id = IdentityId::NullPhi;
  Vector param;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::size_t terms = 0;  // number of scalar relations evaluated
};

namespace detail {

struct ResidualAccumulator {
  double worst = 0.0;
  std::size_t terms = 0;
  void add(double lhs, double rhs) {
    worst = std::max(worst, std::abs(lhs - rhs));
    ++terms;
  }
};

inline void require_cja(const Immersion& imm) {
  if (!imm.constant_angles()) throw InapplicableIdentity("model does not have constant Jordan angles");
}

inline bool interior(double t) { return t > 0.0 && t < kHalfPi; }

inline void null_phi(const FramedPoint& fp, const AngleLayout& lay, const Subspace& q0, ResidualAccumulator& acc) {
  const auto& e = fp.tangent_frame;
  for (const auto& tc : lay.tangent) {
    if (!interior(tc.angle)) continue;
    for (std::size_t u = 0; u < fp.n(); ++u)
      for (std::size_t v : tc.members)
        for (std::size_t w : tc.members) {
          const double lhs = dot(fp.b[u][v], phi(q0, tc.angle, e[w], Side::Tangent)) +
                             dot(fp.b[u][w], phi(q0, tc.angle, e[v], Side::Tangent));
          acc.add(lhs, 0.0);
        }
  }
}

inline void null_same(const FramedPoint& fp, const AngleLayout& lay, ResidualAccumulator& acc, bool boundary) {
  for (const auto& tc : lay.tangent) {
    if (boundary == interior(tc.angle)) continue;
    const FrameClass* nc = AngleLayout::find(lay.normal, tc.angle, kFdClusterTol);
    if (!nc) continue;
    for (std::size_t u = 0; u < fp.n(); ++u) {
      // interior angles need u in the class too
      if (!boundary && std::find(tc.members.begin(), tc.members.end(), u) == tc.members.end()) continue;
      for (std::size_t v : tc.members)
        for (std::size_t nu : nc->members) acc.add(fp.h[nu](u, v), 0.0);
    }
  }
}

inline void s_tangent(const FramedPoint& fp, const AngleLayout& lay, const Subspace& q0, const Connection& con,
                      ResidualAccumulator& acc) {
  const auto& e = fp.tangent_frame;
  for (const auto& tc : lay.tangent)
    for (const auto& sc : lay.tangent) {
      if (&tc == &sc) continue;
      const double th = tc.angle, sg = sc.angle;
      for (std::size_t j : tc.members)
        for (std::size_t k : sc.members)
          for (std::size_t i = 0; i < fp.n(); ++i) {
            const double rhs = kappa(sg, th) * dot(fp.b[i][j], phi(q0, sg, e[k], Side::Tangent)) -
                               kappa(th, sg) * dot(fp.b[i][k], phi(q0, th, e[j], Side::Tangent));
            acc.add(con.gamma[i](j, k), rhs);
          }
    }
}

inline void s_normal(const FramedPoint& fp, const AngleLayout& lay, const Subspace& q0, const Connection& con,
                     ResidualAccumulator& acc) {
  const auto& nu = fp.normal_frame;
  for (const auto& tc : lay.normal)
    for (const auto& sc : lay.normal) {
      if (&tc == &sc) continue;
      const double th = tc.angle, sg = sc.angle;
      for (std::size_t a : tc.members)
        for (std::size_t b : sc.members)
          for (std::size_t i = 0; i < fp.n(); ++i) {
            const Vector& ei = fp.tangent_frame[i];
            const double rhs = kappa(th, sg) * dot(fp.second_form(ei, phi(q0, th, nu[a], Side::Normal)), nu[b]) -
                               kappa(sg, th) * dot(fp.second_form(ei, phi(q0, sg, nu[b], Side::Normal)), nu[a]);
            acc.add(con.gamma_bar[i](a, b), rhs);
          }
    }
}

inline void constraint(const FramedPoint& fp, const AngleLayout& lay, const Subspace& q0, ResidualAccumulator& acc) {
  const auto& e = fp.tangent_frame;
  for (const auto& tc : lay.tangent) {
    if (!interior(tc.angle)) continue;
    for (std::size_t x = 0; x < tc.members.size(); ++x)
      for (std::size_t y = x + 1; y < tc.members.size(); ++y) {
        const Vector& v = e[tc.members[x]];
        const Vector& w = e[tc.members[y]];
        double lhs = 0.0, rhs = 0.0;
        for (const auto& nc : lay.normal)
          if (std::abs(nc.angle - tc.angle) > kFdClusterTol) lhs += kappa(tc.angle, nc.angle) * rt_tensor(fp, lay, tc.angle, nc.angle, v, w, v, w, 0.0);
        for (const auto& sc : lay.tangent)
          if (std::abs(sc.angle - tc.angle) > kFdClusterTol) rhs += kappa(tc.angle, sc.angle) * ut_tensor(fp, lay, q0, tc.angle, sc.angle, v, w, v, w, 0.0);
        acc.add(lhs, 3.0 * rhs);
      }
  }
}

inline void coassoc_h(const FramedPoint& cf, ResidualAccumulator& acc) {
  const auto& h = cf.h;  // h[alpha](i, j), zero-based
  for (std::size_t i = 0; i < 4; ++i) {
    acc.add(h[2](i, 0), h[0](i, 2) - h[1](i, 3));
    acc.add(h[2](i, 1), h[0](i, 3) + h[1](i, 2));
    acc.add(h[2](i, 2), -h[0](i, 0) - h[1](i, 1));
    acc.add(h[2](i, 3), -h[0](i, 1) + h[1](i, 0));
  }
}

inline void gamma_lo(const FramedPoint& fp, const Connection& con, ResidualAccumulator& acc) {
  const double t1 = std::acos(2.0 / 3.0);
  const double t = std::acos(std::sqrt(6.0) / 6.0);
  const auto& h = fp.h;
  for (std::size_t i = 0; i < 4; ++i) {
    const Matrix& g = con.gamma[i];
    acc.add(g(0, 3), -kappa(t1, 0.0) * h[0](i, 3));
    acc.add(g(0, 1), kappa(t, t1) * h[1](i, 0) - kappa(t1, t) * h[0](i, 1));
    acc.add(g(1, 3), -kappa(t, 0.0) * h[1](i, 3));
    acc.add(g(0, 2), kappa(t, t1) * h[2](i, 0) - kappa(t1, t) * h[0](i, 2));
    acc.add(g(2, 3), -kappa(t, 0.0) * h[2](i, 3));
  }
  acc.add(con.gamma_bar[1](0, 2), kappa(t, t1) * h[0](1, 2) - kappa(t1, t) * h[2](1, 0));
  acc.add(con.gamma_bar[1](0, 2), 0.0);
}

}  // namespace detail

/// Evaluates one identity over all admissible frame-index combinations at u.
inline IdentityResidual verify_identity(const Immersion& imm, IdentityId id, const Vector& u,
                                        const FDConfig& fd = {}) {
  const Subspace q0 = imm.reference_plane();
  switch (id) {
    case IdentityId::NullPhi:
    case IdentityId::NullSame:
    case IdentityId::NullBoundary:
    case IdentityId::Constraint:
      detail::require_cja(imm);
      break;
    case IdentityId::STangent:
    case IdentityId::SNormal:
      detail::require_cja(imm);
      if (!imm.has_analytic_frame()) throw InapplicableIdentity("model has no analytic frame field");
      break;
    case IdentityId::CoassocH:
      if (imm.param_dim() != 4 || imm.ambient_dim() != 7)
        throw InapplicableIdentity("needs a 4-dimensional submanifold of R^7");
      break;
    case IdentityId::GammaLo:
      if (!imm.lo_labeled_frame()) throw InapplicableIdentity("needs the Lawson-Osserman frame");
      break;
  }

  const FramedPoint fp = frame_at(imm, u, fd, q0);
  detail::ResidualAccumulator acc;
  switch (id) {
    case IdentityId::NullPhi:
      detail::null_phi(fp, classify(fp, q0), q0, acc);
      break;
    case IdentityId::NullSame:
      detail::null_same(fp, classify(fp, q0), acc, false);
      break;
    case IdentityId::NullBoundary:
      detail::null_same(fp, classify(fp, q0), acc, true);
      break;
    case IdentityId::STangent:
      detail::s_tangent(fp, classify(fp, q0), q0, connection_coeffs(imm, fp, fd), acc);
      break;
    case IdentityId::SNormal:
      detail::s_normal(fp, classify(fp, q0), q0, connection_coeffs(imm, fp, fd), acc);
      break;
    case IdentityId::Constraint:
      detail::constraint(fp, classify(fp, q0), q0, acc);
      break;
    case IdentityId::CoassocH:
      detail::coassoc_h(coassociative_frame(fp).fp, acc);
      break;
    case IdentityId::GammaLo:
      detail::gamma_lo(fp, connection_coeffs(imm, fp, fd), acc);
      break;
  }
  IdentityResidual r;
  r.id = id;
  r.param = u;
  r.residual = acc.worst;
  r.tolerance = default_tolerance(id);
  r.pass = r.residual <= r.tolerance;
  r.terms = acc.terms;
  return r;
}

}  // namespace jgeom
