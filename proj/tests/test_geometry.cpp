#include <gtest/gtest.h>

#include <numbers>

#include "jgeom/geometry.hpp"
#include "jgeom/models.hpp"
#include "test_support.hpp"

using namespace jgeom;
using namespace jgeom::testing;

namespace {

const double kT1 = std::acos(2.0 / 3.0);
const double kT = std::acos(std::sqrt(6.0) / 6.0);

// The coordinate 4-plane He in R^7.
class HePlane final : public Immersion {
 public:
  std::string name() const override { return "he-plane"; }
  std::size_t param_dim() const override { return 4; }
  std::size_t ambient_dim() const override { return 7; }
  Vector evaluate(const Vector& u) const override { return {0, 0, 0, u[0], u[1], u[2], u[3]}; }
  Subspace reference_plane() const override { return im_h(); }
  Sample sample(Rng& rng) const override { return {shared_from_this(), rng.normal_vector(4)}; }
};

// u -> (u0, u0, 0): rank one.
class Degenerate final : public Immersion {
 public:
  std::string name() const override { return "degenerate"; }
  std::size_t param_dim() const override { return 2; }
  std::size_t ambient_dim() const override { return 3; }
  Vector evaluate(const Vector& u) const override { return {u[0], u[0], 0}; }
  Subspace reference_plane() const override { return Subspace::coordinate(3, {2}); }
  Sample sample(Rng&) const override { return {shared_from_this(), {0, 0}}; }
};

ModelSpec affine_spec(std::size_t n, std::size_t m, const std::vector<double>& slope) {
  ModelSpec s;
  s.name = ModelName::Affine;
  s.n = n;
  s.m = m;
  s.slope = Matrix(m, n, slope);
  s.offset = Vector(m, 0.0);
  return s;
}

FramedPoint frame_sample(const Immersion& imm, Rng& rng, FDConfig fd = {}) {
  const Sample s = imm.sample(rng);
  return frame_at(*s.chart, s.param, fd, imm.reference_plane());
}

// the LO cone chart centred at q = 1 with b = 0
const Vector kConeOrigin = {0, 0, 0, 1};

}  // namespace

TEST(FrameAt, AffineHasZeroSecondForm) {
  const auto imm = build(affine_spec(2, 2, {0.5, -0.3, 0.2, 1.1}));
  Rng rng(41);
  for (int t = 0; t < 10; ++t) {
    const auto fp = frame_sample(*imm, rng);
    for (const auto& h : fp.h) EXPECT_LT(h.frobenius_norm(), 1e-9);
  }
}

TEST(FrameAt, UnitCircleCurvature) {
  const auto imm = build(ModelName::Circle);
  Rng rng(42);
  for (int t = 0; t < 10; ++t) {
    const auto fp = frame_sample(*imm, rng);
    ASSERT_EQ(fp.m(), 2u);
    double big = 0, small = 0;
    for (const auto& h : fp.h) {
      big = std::max(big, std::abs(h(0, 0)));
      small = std::max(small, std::min(std::abs(h(0, 0)), 1.0));
    }
    EXPECT_NEAR(big, 1.0, 1e-6);
    EXPECT_NEAR(std::min(std::abs(fp.h[0](0, 0)), std::abs(fp.h[1](0, 0))), 0.0, 1e-6);
  }
}

TEST(FrameAt, FramesAreOrthonormalAndComplementary) {
  Rng rng(43);
  for (ModelName m : kAllModels) {
    const auto imm = build(m);
    for (int t = 0; t < 5; ++t) {
      const auto fp = frame_sample(*imm, rng);
      std::vector<Vector> all = fp.tangent_frame;
      all.insert(all.end(), fp.normal_frame.begin(), fp.normal_frame.end());
      EXPECT_LT((OrthonormalBasis{fp.point.size(), all}).orthonormality_defect(), 1e-9) << model_name(m);
      EXPECT_LT(projector_distance(Subspace::span(fp.tangent_frame), fp.tangent), 1e-8) << model_name(m);
      EXPECT_LT((fp.tangent.projector() + fp.normal.projector() - Matrix::identity(fp.point.size())).frobenius_norm(),
                1e-12);
    }
  }
}

TEST(FrameAt, Errors) {
  const Degenerate deg;
  EXPECT_THROW(
      {
        try {
          frame_at(deg, {0.1, 0.2}, {}, deg.reference_plane());
        } catch (const Error& e) {
          EXPECT_STREQ(e.what(), "immersion singular");
          throw;
        }
      },
      Error);
  const auto cone = build(ModelName::LoCone);
  EXPECT_THROW(frame_at(*cone, {0, 0, 0, 0.05}, {}, im_h()), Error);
  EXPECT_THROW(frame_at(*cone, {0.99999, 0, 0, 1}, {}, im_h()), Error);
  EXPECT_THROW(frame_at(*cone, {0, 0, 1}, {}, im_h()), Error);
}

TEST(FrameAt, SecondFormSymmetricEverywhere) {
  Rng rng(44);
  for (ModelName m : kAllModels) {
    const auto imm = build(m);
    for (int t = 0; t < 10; ++t) EXPECT_LT(frame_sample(*imm, rng).h_asymmetry(), 1e-6) << model_name(m);
  }
}

TEST(FrameAt, ConvergesUnderStepHalving) {
  for (ModelName m : kAllModels) {
    const auto imm = build(m);
    Rng rng(45);
    for (int t = 0; t < 5; ++t) {
      const Sample s = imm->sample(rng);
      FDConfig fine;
      fine.step_second /= 2;
      const auto a = frame_at(*s.chart, s.param, {}, imm->reference_plane());
      const auto b = frame_at(*s.chart, s.param, fine, imm->reference_plane());
      for (std::size_t al = 0; al < a.m(); ++al)
        EXPECT_LT(max_abs((a.h[al] - b.h[al]).entries()), 1e-5) << model_name(m);
    }
  }
}

TEST(FrameAt, WeingartenConsistency) {
  const auto imm = build(ModelName::LoCone);
  Rng rng(46);
  const auto fp = frame_sample(*imm, rng);
  for (std::size_t al = 0; al < fp.m(); ++al)
    for (std::size_t i = 0; i < fp.n(); ++i)
      for (std::size_t j = 0; j < fp.n(); ++j)
        EXPECT_NEAR(dot(fp.shape_operator(fp.normal_frame[al], fp.tangent_frame[i]), fp.tangent_frame[j]),
                    fp.h[al](i, j), 1e-12);
}

TEST(MeanCurvature, Examples) {
  Rng rng(47);
  const auto aff = build(affine_spec(2, 2, {0.5, -0.3, 0.2, 1.1}));
  EXPECT_LT(norm(mean_curvature(frame_sample(*aff, rng))), 1e-9);
  const auto circle = build(ModelName::Circle);
  for (int t = 0; t < 10; ++t) EXPECT_NEAR(norm(mean_curvature(frame_sample(*circle, rng))), 1.0, 1e-6);
  const auto graph = build(ModelName::LoGraph);
  for (int t = 0; t < 10; ++t) {
    const Vector x = rng.unit_vector(4);
    EXPECT_LT(norm(mean_curvature(frame_at(*graph, x, {}, im_h()))), 1e-5);
  }
}

TEST(VFunction, Examples) {
  Rng rng(48);
  const auto flat = build(affine_spec(2, 2, {0, 0, 0, 0}));
  EXPECT_NEAR(v_function(frame_sample(*flat, rng), flat->reference_plane()), 1.0, 1e-12);
  const auto diag = build(affine_spec(1, 1, {1}));
  EXPECT_NEAR(v_function(frame_sample(*diag, rng), diag->reference_plane()), std::sqrt(2.0), 1e-12);
  const auto cone = build(ModelName::LoCone);
  for (int t = 0; t < 100; ++t) {
    const auto fp = frame_sample(*cone, rng);
    const double v = v_function(fp, im_h()), w = w_function(fp, im_h());
    EXPECT_NEAR(v, 9.0, 1e-6);
    EXPECT_NEAR(v * w, 1.0, 1e-10);
  }
  const auto circle = build(ModelName::Circle);
  EXPECT_THROW(v_function(frame_sample(*circle, rng), circle->reference_plane()), Error);
}

TEST(VFromJacobian, Examples) {
  EXPECT_EQ(v_from_jacobian(Matrix(2, 3)), 1.0);
  EXPECT_NEAR(v_from_jacobian(Matrix(1, 2, {1, 0})), std::sqrt(2.0), 1e-15);
  Rng rng(49);
  for (int t = 0; t < 20; ++t) {
    const Matrix g = random_matrix(rng, 3, 2);
    const auto imm = build(affine_spec(2, 3, g.entries()));
    EXPECT_NEAR(v_function(frame_sample(*imm, rng), imm->reference_plane()), v_from_jacobian(g), 1e-8);
  }
  // eta graph: gradient of eta by central differences
  const auto graph = build(ModelName::LoGraph);
  for (int t = 0; t < 10; ++t) {
    const Sample s = graph->sample(rng);
    Matrix grad(3, 4);
    const double h = 1e-5;
    for (std::size_t a = 0; a < 4; ++a) {
      Vector up = s.param, dn = s.param;
      up[a] += h;
      dn[a] -= h;
      const Vector d = (0.5 / h) * (graph->evaluate(up) - graph->evaluate(dn));
      for (std::size_t r = 0; r < 3; ++r) grad(r, a) = d[r];
    }
    const double vf = v_function(frame_at(*graph, s.param, {}, im_h()), im_h());
    EXPECT_NEAR(vf, v_from_jacobian(grad), 1e-8);
  }
}

TEST(CjaCheck, LoCone) {
  const auto cone = build(ModelName::LoCone);
  const auto rep = cja_check(*cone, im_h(), 30, 1);
  EXPECT_TRUE(rep.is_cja);
  ASSERT_EQ(rep.reference_spectrum.size(), 2u);
  EXPECT_NEAR(rep.reference_spectrum[0].angle, kT1, 1e-8);
  EXPECT_EQ(rep.reference_spectrum[0].multiplicity, 1u);
  EXPECT_NEAR(rep.reference_spectrum[1].angle, kT, 1e-8);
  EXPECT_EQ(rep.reference_spectrum[1].multiplicity, 2u);
  EXPECT_EQ(rep.g_n, 2u);
  EXPECT_EQ(rep.g_t, 3u);
  EXPECT_EQ(rep.r, 3u);
}

TEST(CjaCheck, CatenoidCrossR) {
  const auto imm = build(ModelName::CatenoidCrossR);
  const auto rep = cja_check(*imm, imm->reference_plane(), 20, 2);
  EXPECT_TRUE(rep.is_cja);
  ASSERT_EQ(rep.reference_spectrum.size(), 2u);
  EXPECT_EQ(rep.reference_spectrum[0].angle, 0.0);
  EXPECT_EQ(rep.reference_spectrum[1].angle, kHalfPi);
}

TEST(CjaCheck, QuadraticGraphIsNotCja) {
  // the odd normal angle at (x, y) is arctan(2|x|)
  const auto imm = build(ModelName::QuadraticGraph);
  const Subspace q0 = imm->reference_plane();
  const auto a = jordan_spectrum(frame_at(*imm, {0.0, 0.3}, {}, q0).normal, q0).expanded();
  const auto b = jordan_spectrum(frame_at(*imm, {0.5, 0.3}, {}, q0).normal, q0).expanded();
  EXPECT_NEAR(b.back(), std::atan(1.0), 1e-9);
  EXPECT_GT(std::abs(a.back() - b.back()), 1e-6);
  const auto rep = cja_check(*imm, q0, 20, 3);
  EXPECT_FALSE(rep.is_cja);
  EXPECT_GT(rep.max_deviation, 1e-6);
}

TEST(CjaCheck, Deterministic) {
  const auto imm = build(ModelName::LoGraph);
  const auto a = cja_check(*imm, im_h(), 10, 77), b = cja_check(*imm, im_h(), 10, 77);
  EXPECT_EQ(a.max_deviation, b.max_deviation);
  EXPECT_EQ(a.samples.back().param, b.samples.back().param);
}

TEST(Kappa, Examples) {
  EXPECT_NEAR(kappa(std::numbers::pi / 4, 0), -1.0, 1e-15);
  EXPECT_NEAR(2 * kappa(kT1, 0) + kappa(kT1, kT), 0.0, 1e-12);
  EXPECT_EQ(kappa(0.0, 0.5), 0.0);
  EXPECT_THROW(kappa(0.3, 0.3), Error);
}

TEST(Tensors, RAndU) {
  const auto cone = build(ModelName::LoCone);
  const auto fp = frame_at(*cone, kConeOrigin, {}, im_h());
  const auto lay = classify(fp, im_h());
  const auto& e = fp.tangent_frame;
  // antisymmetric in the first pair
  EXPECT_NEAR(rt_tensor(fp, lay, kT, kT1, e[1], e[1], e[2], e[1]), 0.0, 1e-12);
  EXPECT_NEAR(ut_tensor(fp, lay, im_h(), kT, 0.0, e[1], e[1], e[2], e[2]), 0.0, 1e-12);
  // multiplicity-one class
  EXPECT_NEAR(rt_tensor(fp, lay, kT1, kT, e[0], e[0], e[0], e[0]), 0.0, 1e-12);
  // vectors outside the class are rejected
  EXPECT_THROW(rt_tensor(fp, lay, kT, kT1, e[0], e[1], e[0], e[1]), Error);
  // the constraint combination on the multiplicity-two class
  double lhs = 0.0, rhs = 0.0;
  for (double s : {kT1}) lhs += kappa(kT, s) * rt_tensor(fp, lay, kT, s, e[1], e[2], e[1], e[2]);
  for (double s : {0.0, kT1}) rhs += kappa(kT, s) * ut_tensor(fp, lay, im_h(), kT, s, e[1], e[2], e[1], e[2]);
  EXPECT_NEAR(lhs, 3 * rhs, 1e-4);
}

TEST(Connection, AffineConstantFrameIsFlat) {
  const auto imm = build(affine_spec(2, 2, {0.5, -0.3, 0.2, 1.1}));
  Rng rng(50);
  const Sample s = imm->sample(rng);
  const auto fp = frame_at(*imm, s.param, {}, imm->reference_plane());
  const auto con = connection_coeffs(*imm, fp, {});
  for (const auto& g : con.gamma) EXPECT_EQ(max_abs(g.entries()), 0.0);
  for (const auto& g : con.gamma_bar) EXPECT_EQ(max_abs(g.entries()), 0.0);
}

TEST(Connection, LoConeAntisymmetry) {
  const auto cone = build(ModelName::LoCone);
  Rng rng(51);
  for (int t = 0; t < 10; ++t) {
    const Sample s = cone->sample(rng);
    const auto fp = frame_at(*s.chart, s.param, {}, im_h());
    const auto con = connection_coeffs(*s.chart, fp, {});
    for (const auto& g : con.gamma) {
      EXPECT_LT(max_abs((g + g.transpose()).entries()), 1e-6);
      for (std::size_t j = 0; j < 4; ++j) EXPECT_LT(std::abs(g(j, j)), 1e-5);
    }
    for (const auto& g : con.gamma_bar) EXPECT_LT(max_abs((g + g.transpose()).entries()), 1e-6);
  }
}

TEST(Connection, NeedsFrameField) {
  const auto circle = build(ModelName::Circle);
  const auto fp = frame_at(*circle, {0.3}, {}, circle->reference_plane());
  EXPECT_THROW(connection_coeffs(*circle, fp, {}), Error);
}

TEST(CoassociativeFrame, MatchesAnalyticFramePerClass) {
  const auto cone = build(ModelName::LoCone);
  const auto fp = frame_at(*cone, kConeOrigin, {}, im_h());
  const auto cf = coassociative_frame(fp);
  // orthonormal, tangent, and Phi relations e4 = eps, Phi(e_a) = +-nu_a
  std::vector<Vector> all = cf.fp.tangent_frame;
  all.insert(all.end(), cf.fp.normal_frame.begin(), cf.fp.normal_frame.end());
  EXPECT_LT((OrthonormalBasis{7, all}).orthonormality_defect(), 1e-8);
  for (const auto& e : cf.fp.tangent_frame) EXPECT_LT(norm(reject(fp.tangent, e)), 1e-8);
  const auto lay_a = classify(fp, im_h());
  const auto lay_c = classify(cf.fp, im_h());
  ASSERT_EQ(lay_a.tangent.size(), lay_c.tangent.size());
  ASSERT_EQ(lay_a.normal.size(), lay_c.normal.size());
  auto span_of = [](const std::vector<Vector>& frame, const FrameClass& c) {
    std::vector<Vector> v;
    for (auto i : c.members) v.push_back(frame[i]);
    return Subspace::span(v);
  };
  for (std::size_t k = 0; k < lay_a.tangent.size(); ++k) {
    EXPECT_NEAR(lay_a.tangent[k].angle, lay_c.tangent[k].angle, 1e-8);
    EXPECT_LT(projector_distance(span_of(fp.tangent_frame, lay_a.tangent[k]),
                                 span_of(cf.fp.tangent_frame, lay_c.tangent[k])),
              1e-8);
  }
  for (std::size_t k = 0; k < lay_a.normal.size(); ++k)
    EXPECT_LT(projector_distance(span_of(fp.normal_frame, lay_a.normal[k]),
                                 span_of(cf.fp.normal_frame, lay_c.normal[k])),
              1e-8);
  // Phi(e_a) = nu_a for a = 1, 2 and Phi(e_3) = nu_3 since theta1 + theta2 > pi/2
  for (std::size_t a = 0; a < 3; ++a) {
    const Vector& e = cf.fp.tangent_frame[a];
    const double th = std::atan2(norm(project(im_h(), e)), norm(reject(im_h(), e)));
    const Vector img = phi(im_h(), th, e, Side::Tangent);
    EXPECT_LT(norm(img - cf.fp.normal_frame[a]), 1e-8) << "alpha " << a + 1;
  }
  EXPECT_GT(cf.frame.theta1 + cf.frame.theta2, kHalfPi);
}

TEST(CoassociativeFrame, HePlane) {
  const auto plane = std::make_shared<HePlane>();
  const auto fp = frame_at(*plane, {0.1, 0.2, 0.3, 0.4}, {}, im_h());
  const auto cf = coassociative_frame(fp);
  EXPECT_LT(norm(project(im_h(), cf.fp.tangent_frame[3])), 1e-12);
  for (const auto& nu : cf.fp.normal_frame) EXPECT_LT(norm(reject(im_h(), nu)), 1e-12);
}

TEST(CoassociativeFrame, EtaGraphEverywhere) {
  const auto graph = build(ModelName::LoGraph);
  Rng rng(52);
  for (int t = 0; t < 20; ++t) EXPECT_NO_THROW(coassociative_frame(frame_sample(*graph, rng)));
}

TEST(CoassociativeFrame, RejectsOtherShapes) {
  const auto circle = build(ModelName::Circle);
  EXPECT_THROW(coassociative_frame(frame_at(*circle, {0.3}, {}, circle->reference_plane())), Error);
}

TEST(VerifyIdentity, Examples) {
  const auto aff = build(affine_spec(2, 2, {0.5, -0.3, 0.2, 1.1}));
  EXPECT_EQ(verify_identity(*aff, IdentityId::NullPhi, {0.1, 0.2}).residual, 0.0);
  const auto cone = build(ModelName::LoCone);
  const auto co = verify_identity(*cone, IdentityId::CoassocH, kConeOrigin);
  EXPECT_TRUE(co.pass);
  EXPECT_LT(co.residual, 1e-5);
  EXPECT_EQ(co.terms, 16u);
  const auto cons = verify_identity(*cone, IdentityId::Constraint, kConeOrigin);
  EXPECT_LT(cons.residual, 1e-4);
  EXPECT_EQ(cons.terms, 1u);
  const auto circle = build(ModelName::Circle);
  const auto nb = verify_identity(*circle, IdentityId::NullBoundary, {0.4});
  EXPECT_LT(nb.residual, 1e-6);
  EXPECT_GT(nb.terms, 0u);
}

TEST(VerifyIdentity, Applicability) {
  const auto circle = build(ModelName::Circle);
  EXPECT_THROW(verify_identity(*circle, IdentityId::CoassocH, {0.4}), InapplicableIdentity);
  EXPECT_THROW(verify_identity(*circle, IdentityId::STangent, {0.4}), InapplicableIdentity);
  EXPECT_THROW(verify_identity(*circle, IdentityId::GammaLo, {0.4}), InapplicableIdentity);
  const auto quad = build(ModelName::QuadraticGraph);
  EXPECT_THROW(verify_identity(*quad, IdentityId::NullPhi, {0.4, 0.1}), InapplicableIdentity);
}

TEST(VerifyIdentity, AllPassOnLoModels) {
  for (ModelName m : {ModelName::LoCone, ModelName::LoGraph}) {
    const auto imm = build(m);
    Rng rng(53);
    for (int t = 0; t < 10; ++t) {
      const Sample s = imm->sample(rng);
      for (IdentityId id : kAllIdentities) {
        const auto r = verify_identity(*s.chart, id, s.param);
        EXPECT_TRUE(r.pass) << model_name(m) << " " << identity_name(id) << " " << r.residual;
      }
    }
  }
}

TEST(VerifyIdentity, NamesRoundTrip) {
  for (IdentityId id : kAllIdentities) EXPECT_EQ(parse_identity(identity_name(id)), id);
  EXPECT_FALSE(parse_identity("NOPE").has_value());
}
