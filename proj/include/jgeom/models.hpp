// Built-in immersions: affine graphs, circle, cylinder, catenoid x R, the
// Lawson-Osserman cone and its graph form, and a non-CJA quadratic graph.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "jgeom/geometry.hpp"
#include "jgeom/octonion.hpp"

namespace jgeom {

enum class ModelName { Affine, Circle, Cylinder, CatenoidCrossR, LoCone, LoGraph, QuadraticGraph };

inline constexpr ModelName kAllModels[] = {ModelName::Affine,        ModelName::Circle, ModelName::Cylinder,
                                           ModelName::CatenoidCrossR, ModelName::LoCone, ModelName::LoGraph,
                                           ModelName::QuadraticGraph};

inline std::string_view model_name(ModelName m) {
  switch (m) {
    case ModelName::Affine: return "affine";
    case ModelName::Circle: return "circle";
    case ModelName::Cylinder: return "cylinder";
    case ModelName::CatenoidCrossR: return "catenoid-cross-r";
    case ModelName::LoCone: return "lo-cone";
    case ModelName::LoGraph: return "lo-graph";
    case ModelName::QuadraticGraph: return "quadratic-graph";
  }
  return "?";
}

inline std::string_view model_summary(ModelName m) {
  switch (m) {
    case ModelName::Affine: return "graph of x -> Gx + c in R^(n+m); Q0 = target plane; params n, m, slope, offset";
    case ModelName::Circle: return "circle of given radius in the xy-plane of R^3; Q0 = xy-plane; param radius";
    case ModelName::Cylinder: return "circular cylinder in R^3; Q0 = z-axis; param radius";
    case ModelName::CatenoidCrossR: return "catenoid x R in R^3 x R^2; Q0 = R^2; param c (waist)";
    case ModelName::LoCone: return "Lawson-Osserman cone r[(sqrt5/2) q a q* + q* e] in Im O; Q0 = Im H; param a";
    case ModelName::LoGraph: return "graph of eta(x) = (sqrt5/(2|x|)) x* eps x over He; Q0 = Im H; param epsilon";
    case ModelName::QuadraticGraph: return "graph of (x, y) -> (x^2, 0, 0) in R^5; Q0 = target R^3; no constant angles";
  }
  return "";
}

/// Accepts both "lo-cone" and "lo_cone".
inline std::optional<ModelName> parse_model_name(std::string_view s) {
  std::string t(s);
  std::replace(t.begin(), t.end(), '_', '-');
  for (ModelName m : kAllModels)
    if (model_name(m) == t) return m;
  return std::nullopt;
}

struct ModelSpec {
  ModelName name = ModelName::LoCone;
  std::size_t n = 2, m = 2;             // affine
  Matrix slope = Matrix(2, 2);          // affine, m x n
  Vector offset = Vector(2, 0.0);       // affine
  double radius = 1.0;                  // circle, cylinder
  double waist = 1.0;                   // catenoid
  Quaternion axis = Quaternion::i();    // a (lo-cone) or epsilon (lo-graph)

  void validate() const {
    if (slope.rows() != m || slope.cols() != n || offset.size() != m) throw Error("invalid parameters: affine shape");
    if (n == 0 || m == 0) throw Error("invalid parameters: affine dimensions must be positive");
    if (!(radius > 0) || !(waist > 0) || !std::isfinite(radius) || !std::isfinite(waist))
      throw Error("invalid parameters: radius and waist must be positive");
    if (std::abs(axis.w) > 1e-12 || std::abs(axis.norm() - 1.0) > 1e-12)
      throw Error("invalid parameters: axis must be a unit imaginary quaternion");
  }
};

// ---------------------------------------------------------------------------
// Parameter parsing

namespace detail {

inline std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw Error("invalid parameters: not a number: " + item);
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size() || !std::isfinite(v)) throw Error("invalid parameters: not a number: " + item);
    out.push_back(v);
  }
  if (out.empty()) throw Error("invalid parameters: empty value");
  return out;
}

inline std::size_t parse_count(const std::string& s) {
  const auto v = parse_reals(s);
  if (v.size() != 1 || v[0] < 1 || v[0] != std::floor(v[0]) || v[0] > 16)
    throw Error("invalid parameters: expected a small positive integer");
  return static_cast<std::size_t>(v[0]);
}

}  // namespace detail

/// Quaternion literal: i, j, k (optionally signed) or w,x,y,z.
inline Quaternion parse_quaternion(const std::string& s) {
  std::string t = s;
  double sign = 1.0;
  if (!t.empty() && (t[0] == '-' || t[0] == '+') && t.size() == 2) {
    sign = t[0] == '-' ? -1.0 : 1.0;
    t = t.substr(1);
  }
  if (t == "i") return sign * Quaternion::i();
  if (t == "j") return sign * Quaternion::j();
  if (t == "k") return sign * Quaternion::k();
  const auto v = detail::parse_reals(s);
  if (v.size() != 4) throw Error("invalid parameters: quaternion needs i, j, k or four components");
  return {v[0], v[1], v[2], v[3]};
}

/// Builds a spec from `name=value` assignments.
inline ModelSpec parse_model_spec(ModelName name, const std::vector<std::string>& assignments) {
  ModelSpec spec;
  spec.name = name;
  std::map<std::string, std::string> kv;
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw Error("invalid parameters: expected name=value, got " + a);
    kv[a.substr(0, eq)] = a.substr(eq + 1);
  }
  auto allow = [&](std::initializer_list<std::string_view> keys) {
    for (const auto& [k, v] : kv)
      if (std::find(keys.begin(), keys.end(), k) == keys.end())
        throw Error("invalid parameters: unknown parameter '" + k + "' for " + std::string(model_name(name)));
  };
  switch (name) {
    case ModelName::Affine: {
      allow({"n", "m", "slope", "offset"});
      if (kv.count("n")) spec.n = detail::parse_count(kv["n"]);
      if (kv.count("m")) spec.m = detail::parse_count(kv["m"]);
      spec.slope = Matrix(spec.m, spec.n);
      spec.offset = Vector(spec.m, 0.0);
      if (kv.count("slope")) {
        const auto v = detail::parse_reals(kv["slope"]);
        if (v.size() != spec.m * spec.n) throw Error("invalid parameters: slope needs m*n entries");
        spec.slope = Matrix(spec.m, spec.n, v);
      }
      if (kv.count("offset")) {
        spec.offset = detail::parse_reals(kv["offset"]);
        if (spec.offset.size() != spec.m) throw Error("invalid parameters: offset needs m entries");
      }
      break;
    }
    case ModelName::Circle:
    case ModelName::Cylinder:
      allow({"radius"});
      if (kv.count("radius")) {
        const auto v = detail::parse_reals(kv["radius"]);
        if (v.size() != 1) throw Error("invalid parameters: radius is a scalar");
        spec.radius = v[0];
      }
      break;
    case ModelName::CatenoidCrossR:
      allow({"c"});
      if (kv.count("c")) {
        const auto v = detail::parse_reals(kv["c"]);
        if (v.size() != 1) throw Error("invalid parameters: c is a scalar");
        spec.waist = v[0];
      }
      break;
    case ModelName::LoCone:
      allow({"a"});
      if (kv.count("a")) spec.axis = parse_quaternion(kv["a"]);
      break;
    case ModelName::LoGraph:
      allow({"epsilon"});
      if (kv.count("epsilon")) spec.axis = parse_quaternion(kv["epsilon"]);
      break;
    case ModelName::QuadraticGraph:
      allow({});
      break;
  }
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// Lawson-Osserman cone

namespace detail {

inline void require_unit(const Quaternion& q, std::string_view what) {
  if (std::abs(q.norm() - 1.0) > 1e-12) throw Error(std::string(what) + " must be a unit quaternion");
}

inline void require_unit_imaginary(const Quaternion& a, std::string_view what) {
  if (std::abs(a.w) > 1e-12 || std::abs(a.norm() - 1.0) > 1e-12)
    throw Error(std::string(what) + " must be a unit imaginary quaternion");
}

inline Vector lo_point_unchecked(const Quaternion& q, double r, const Quaternion& a) {
  const Quaternion a1 = q * a * q.conj();
  const double c = r * std::sqrt(5.0) / 2.0;
  const Quaternion qb = q.conj();
  return {c * a1.x, c * a1.y, c * a1.z, r * qb.w, r * qb.x, r * qb.y, r * qb.z};
}

inline Frames lo_frame_unchecked(const Quaternion& q, const Quaternion& a) {
  const Quaternion a1 = (q * a * q.conj()).im();
  // a2: the part of j orthogonal to a1, or of k when j is nearly parallel
  Quaternion ref = Quaternion::j();
  Quaternion c = ref - dot(ref, a1) * a1;
  if (c.norm() < 1e-6) {
    ref = Quaternion::k();
    c = ref - dot(ref, a1) * a1;
  }
  const Quaternion a2 = (1.0 / c.norm()) * c;
  const Quaternion a3 = a1 * a2;
  const Octonion eps = in_he(q.conj());
  const Octonion o1 = in_h(a1), o2 = in_h(a2), o3 = in_h(a3);

  const double s5 = std::sqrt(5.0), s6 = std::sqrt(6.0), s30 = std::sqrt(30.0);
  const Octonion e1 = (s5 / 3.0) * o1 + (2.0 / 3.0) * eps;
  const Octonion e2 = -(s30 / 6.0) * o3 - (s6 / 6.0) * (o2 * eps);
  const Octonion e3 = (s30 / 6.0) * o2 - (s6 / 6.0) * (o3 * eps);
  const Octonion e4 = -(o1 * eps);

  Frames f;
  f.tangent = {e1.to_im(), e2.to_im(), e3.to_im(), e4.to_im()};
  const double t1 = std::acos(2.0 / 3.0), t = std::acos(s6 / 6.0);
  const Subspace q0 = im_h();
  f.normal = {detail::phi_from_perp(q0, t1, f.tangent[0]), detail::phi_from_perp(q0, t, f.tangent[1]),
              detail::phi_from_perp(q0, t, f.tangent[2])};
  return f;
}

}  // namespace detail

/// r[(sqrt5/2) q a q* + q* e] in Im O coordinates.
inline Vector lo_cone_point(const Quaternion& q, double r, const Quaternion& a) {
  detail::require_unit(q, "q");
  detail::require_unit_imaginary(a, "a");
  if (!(r > 0)) throw Error("r must be positive");
  return detail::lo_point_unchecked(q, r, a);
}

/// Tangent e1..e4 and normal nu_a = Phi(e_a) at the cone point (q, r).
inline Frames lo_cone_frame(const Quaternion& q, double r, const Quaternion& a) {
  detail::require_unit(q, "q");
  detail::require_unit_imaginary(a, "a");
  if (!(r > 0)) throw Error("r must be positive");
  return detail::lo_frame_unchecked(q, a);
}

/// eta(x) = (sqrt5/(2|x|)) x* eps x, an imaginary quaternion.
inline Quaternion eta(const Quaternion& x, const Quaternion& epsilon) {
  detail::require_unit_imaginary(epsilon, "epsilon");
  const double len = x.norm();
  if (len == 0.0) throw Error("cone vertex");
  return ((std::sqrt(5.0) / (2.0 * len)) * (x.conj() * epsilon * x)).im();
}

// ---------------------------------------------------------------------------
// Model implementations

namespace models {

class Affine final : public Immersion {
 public:
  explicit Affine(const ModelSpec& s) : g_(s.slope), c_(s.offset) {
    const std::size_t n = g_.cols(), m = g_.rows();
    std::vector<std::size_t> target;
    for (std::size_t k = 0; k < m; ++k) target.push_back(n + k);
    q0_ = Subspace::coordinate(n + m, target);
    std::vector<Vector> cols;
    for (std::size_t i = 0; i < n; ++i) {
      Vector v(n + m, 0.0);
      v[i] = 1.0;
      for (std::size_t k = 0; k < m; ++k) v[n + k] = g_(k, i);
      cols.push_back(std::move(v));
    }
    const Subspace t = Subspace::span(cols);
    frames_.tangent = detail::spectrum_frame(jordan_spectrum(t, orthogonal_complement(q0_)));
    frames_.normal = detail::spectrum_frame(jordan_spectrum(orthogonal_complement(t), q0_));
  }
  std::string name() const override { return "affine"; }
  std::size_t param_dim() const override { return g_.cols(); }
  std::size_t ambient_dim() const override { return g_.cols() + g_.rows(); }
  Vector evaluate(const Vector& u) const override {
    if (u.size() != param_dim()) throw Error("dimension mismatch");
    Vector p = u;
    const Vector y = g_ * std::span<const double>(u);
    for (std::size_t k = 0; k < y.size(); ++k) p.push_back(y[k] + c_[k]);
    return p;
  }
  Subspace reference_plane() const override { return q0_; }
  Sample sample(Rng& rng) const override {
    Vector u(param_dim());
    for (double& x : u) x = rng.uniform(-1.0, 1.0);
    return {shared_from_this(), u};
  }
  std::optional<Frames> analytic_frame(const Vector&) const override { return frames_; }
  bool has_analytic_frame() const override { return true; }
  std::optional<std::vector<std::vector<Vector>>> second_partials(const Vector&) const override {
    const std::size_t n = param_dim();
    return std::vector<std::vector<Vector>>(n, std::vector<Vector>(n, Vector(ambient_dim(), 0.0)));
  }

 private:
  Matrix g_;
  Vector c_;
  Subspace q0_;
  Frames frames_;
};

class Circle final : public Immersion {
 public:
  explicit Circle(double radius) : r_(radius) {}
  std::string name() const override { return "circle"; }
  std::size_t param_dim() const override { return 1; }
  std::size_t ambient_dim() const override { return 3; }
  Vector evaluate(const Vector& u) const override {
    if (u.size() != 1) throw Error("dimension mismatch");
    return {r_ * std::cos(u[0]), r_ * std::sin(u[0]), 0.0};
  }
  Subspace reference_plane() const override { return Subspace::coordinate(3, {0, 1}); }
  Sample sample(Rng& rng) const override {
    return {shared_from_this(), {rng.uniform(0.0, 2.0 * std::numbers::pi)}};
  }

 private:
  double r_;
};

class Cylinder final : public Immersion {
 public:
  explicit Cylinder(double radius) : r_(radius) {}
  std::string name() const override { return "cylinder"; }
  std::size_t param_dim() const override { return 2; }
  std::size_t ambient_dim() const override { return 3; }
  Vector evaluate(const Vector& u) const override {
    if (u.size() != 2) throw Error("dimension mismatch");
    return {r_ * std::cos(u[0]), r_ * std::sin(u[0]), u[1]};
  }
  Subspace reference_plane() const override { return Subspace::coordinate(3, {2}); }
  Sample sample(Rng& rng) const override {
    const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return {shared_from_this(), {t, rng.uniform(-1.0, 1.0)}};
  }

 private:
  double r_;
};

/// (c cosh(s/c) cos phi, c cosh(s/c) sin phi, s, t, 0)
class CatenoidCrossR final : public Immersion {
 public:
  explicit CatenoidCrossR(double waist) : c_(waist) {}
  std::string name() const override { return "catenoid-cross-r"; }
  std::size_t param_dim() const override { return 3; }
  std::size_t ambient_dim() const override { return 5; }
  Vector evaluate(const Vector& u) const override {
    if (u.size() != 3) throw Error("dimension mismatch");
    const double rho = c_ * std::cosh(u[0] / c_);
    return {rho * std::cos(u[1]), rho * std::sin(u[1]), u[0], u[2], 0.0};
  }
  Subspace reference_plane() const override { return Subspace::coordinate(5, {3, 4}); }
  Sample sample(Rng& rng) const override {
    const double s = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return {shared_from_this(), {s, phi, rng.uniform(-1.0, 1.0)}};
  }

 private:
  double c_;
};

/// Chart (b, r) -> F(exp(b) q0, r) of the cone, b in Im H with |b| < 1.
class LoCone final : public Immersion {
 public:
  LoCone(const Quaternion& a, const Quaternion& base) : a_(a), q0_(base) {
    detail::require_unit_imaginary(a, "a");
    detail::require_unit(base, "base point");
  }
  std::string name() const override { return "lo-cone"; }
  std::size_t param_dim() const override { return 4; }
  std::size_t ambient_dim() const override { return 7; }

  Quaternion q_at(const Vector& u) const { return exp_imaginary(Quaternion::imaginary(u[0], u[1], u[2])) * q0_; }

  Vector evaluate(const Vector& u) const override {
    if (u.size() != 4) throw Error("dimension mismatch");
    return detail::lo_point_unchecked(q_at(u), u[3], a_);
  }
  Subspace reference_plane() const override { return im_h(); }
  bool in_domain(const Vector& u, double margin) const override {
    if (u.size() != 4) return false;
    return std::hypot(u[0], u[1], u[2]) + margin < 1.0 && u[3] - margin > kMinRadius / 2.0;
  }
  /// Random point: the chart is re-centred at a uniform q and b = 0.
  Sample sample(Rng& rng) const override {
    const Vector qv = rng.unit_vector(4);
    const double r = rng.uniform(kMinRadius, 2.0);
    return {std::make_shared<LoCone>(a_, Quaternion{qv[0], qv[1], qv[2], qv[3]}), {0.0, 0.0, 0.0, r}};
  }
  std::optional<Frames> analytic_frame(const Vector& u) const override {
    return detail::lo_frame_unchecked(q_at(u), a_);
  }
  bool has_analytic_frame() const override { return true; }
  bool lo_labeled_frame() const override { return true; }

  static constexpr double kMinRadius = 0.1;

 private:
  Quaternion a_, q0_;
};

/// x in H (as He, coordinates 3-6) -> (eta(x), x).
class LoGraph final : public Immersion {
 public:
  explicit LoGraph(const Quaternion& epsilon) : eps_(epsilon) { detail::require_unit_imaginary(epsilon, "epsilon"); }
  std::string name() const override { return "lo-graph"; }
  std::size_t param_dim() const override { return 4; }
  std::size_t ambient_dim() const override { return 7; }
  Vector evaluate(const Vector& u) const override {
    if (u.size() != 4) throw Error("dimension mismatch");
    const Quaternion x{u[0], u[1], u[2], u[3]};
    const Quaternion y = eta(x, eps_);
    return {y.x, y.y, y.z, u[0], u[1], u[2], u[3]};
  }
  Subspace reference_plane() const override { return im_h(); }
  bool in_domain(const Vector& u, double margin) const override {
    return u.size() == 4 && norm(u) - margin > 0.0;
  }
  Sample sample(Rng& rng) const override {
    const Vector dir = rng.unit_vector(4);
    return {shared_from_this(), rng.uniform(0.5, 2.0) * dir};
  }
  /// Same point as the cone at r = |x|, q = conj(x)/|x|.
  std::optional<Frames> analytic_frame(const Vector& u) const override {
    const double r = norm(u);
    const Quaternion q = (1.0 / r) * Quaternion{u[0], u[1], u[2], u[3]}.conj();
    return detail::lo_frame_unchecked(q, eps_);
  }
  bool has_analytic_frame() const override { return true; }
  bool lo_labeled_frame() const override { return true; }

 private:
  Quaternion eps_;
};

/// (x, y) -> (x, y, x^2, 0, 0); the normal angle arctan(2|x|) varies.
class QuadraticGraph final : public Immersion {
 public:
  std::string name() const override { return "quadratic-graph"; }
  std::size_t param_dim() const override { return 2; }
  std::size_t ambient_dim() const override { return 5; }
  Vector evaluate(const Vector& u) const override {
    if (u.size() != 2) throw Error("dimension mismatch");
    return {u[0], u[1], u[0] * u[0], 0.0, 0.0};
  }
  Subspace reference_plane() const override { return Subspace::coordinate(5, {2, 3, 4}); }
  Sample sample(Rng& rng) const override {
    const double x = rng.uniform(-1.0, 1.0);
    return {shared_from_this(), {x, rng.uniform(-1.0, 1.0)}};
  }
  bool constant_angles() const override { return false; }
};

}  // namespace models

inline std::shared_ptr<const Immersion> build(const ModelSpec& spec) {
  spec.validate();
  switch (spec.name) {
    case ModelName::Affine: return std::make_shared<models::Affine>(spec);
    case ModelName::Circle: return std::make_shared<models::Circle>(spec.radius);
    case ModelName::Cylinder: return std::make_shared<models::Cylinder>(spec.radius);
    case ModelName::CatenoidCrossR: return std::make_shared<models::CatenoidCrossR>(spec.waist);
    case ModelName::LoCone: return std::make_shared<models::LoCone>(spec.axis, Quaternion::one());
    case ModelName::LoGraph: return std::make_shared<models::LoGraph>(spec.axis);
    case ModelName::QuadraticGraph: return std::make_shared<models::QuadraticGraph>();
  }
  throw Error("unknown model");
}

inline std::shared_ptr<const Immersion> build(ModelName name) {
  ModelSpec s;
  s.name = name;
  return build(s);
}

}  // namespace jgeom
