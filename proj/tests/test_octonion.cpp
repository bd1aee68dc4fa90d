#include <gtest/gtest.h>

#include <array>

#include "jgeom/octonion.hpp"
#include "test_support.hpp"

using namespace jgeom;
using namespace jgeom::testing;

namespace {

Octonion random_octonion(Rng& rng) {
  std::array<double, 8> f{};
  for (double& x : f) x = rng.normal();
  return Octonion::from_array(f);
}

void expect_oct_near(const Octonion& a, const Octonion& b, double tol) {
  const auto fa = a.to_array(), fb = b.to_array();
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(fa[i], fb[i], tol) << "component " << i;
}

}  // namespace

TEST(Octonion, BasicProducts) {
  expect_oct_near(Octonion::e() * Octonion::e(), Octonion::real(-1), 0);
  expect_oct_near(in_h(Quaternion::i()) * in_h(Quaternion::j()), in_h(Quaternion::k()), 0);
  expect_oct_near(in_h(Quaternion::i()) * Octonion::e(), Octonion::basis(5), 0);
  Rng rng(31);
  const Octonion x = random_octonion(rng);
  expect_oct_near(Octonion::real(1) * x, x, 0);
  expect_oct_near(x * Octonion::real(1), x, 0);
}

TEST(Octonion, BasisTableMatchesFormula) {
  for (std::size_t a = 0; a < 8; ++a)
    for (std::size_t b = 0; b < 8; ++b) {
      const auto got = (Octonion::basis(a) * Octonion::basis(b)).to_array();
      std::array<double, 8> ea{}, eb{};
      ea[a] = 1;
      eb[b] = 1;
      EXPECT_EQ(got, formula_mul(ea, eb)) << a << "*" << b;
    }
}

TEST(Octonion, NormMultiplicative) {
  Rng rng(32);
  for (int t = 0; t < 10000; ++t) {
    const Octonion x = random_octonion(rng), y = random_octonion(rng);
    EXPECT_NEAR((x * y).norm(), x.norm() * y.norm(), 1e-12 * (1 + x.norm() * y.norm()));
  }
}

TEST(Octonion, Conjugation) {
  expect_oct_near(conj(Octonion::real(1)), Octonion::real(1), 0);
  expect_oct_near(conj(Octonion::e()), -Octonion::e(), 0);
  EXPECT_EQ(inner(in_h(Quaternion::i()), Octonion::basis(5)), 0.0);
  Rng rng(33);
  for (int t = 0; t < 100; ++t) {
    const Octonion x = random_octonion(rng);
    expect_oct_near(x * conj(x), Octonion::real(x.norm2()), 1e-12);
    EXPECT_NEAR(re(x) * re(x) + im(x).norm2(), x.norm2(), 1e-12);
  }
}

TEST(Octonion, AdjointIdentities) {
  Rng rng(34);
  for (int t = 0; t < 200; ++t) {
    const Octonion x = random_octonion(rng), y = random_octonion(rng), w = random_octonion(rng);
    EXPECT_NEAR(inner(x, y * w), inner(x * conj(w), y), 1e-12 * 50);
    EXPECT_NEAR(inner(x, w * y), inner(conj(w) * x, y), 1e-12 * 50);
  }
}

TEST(Octonion, SubalgebraMultiplicationRule) {
  // Cayley-Dickson over any quaternion subalgebra A = R + P and unit eps in A^perp
  Rng rng(35);
  for (int t = 0; t < 50; ++t) {
    const Subspace p = random_associative(rng);
    const Subspace pperp = orthogonal_complement(p);
    const Octonion eps = Octonion::from_im(pperp.vectors()[0]);
    auto in_a = [&] {
      Vector c = rng.normal_vector(3);
      Octonion z = Octonion::real(rng.normal());
      for (int k = 0; k < 3; ++k) z = z + c[k] * Octonion::from_im(p.vectors()[k]);
      return z;
    };
    const Octonion x = in_a(), y = in_a(), v = in_a(), w = in_a();
    const Octonion lhs = (x + y * eps) * (v + w * eps);
    const Octonion rhs = (x * v - conj(w) * y) + (w * x + y * conj(v)) * eps;
    expect_oct_near(lhs, rhs, 1e-11);
  }
}

TEST(Associative, ImHIsAssociative) {
  const auto r = is_associative(im_h());
  EXPECT_TRUE(r.associative);
  EXPECT_LT(r.residual, 1e-15);
}

TEST(Associative, IJEIsNot) {
  const auto r = is_associative(Subspace::coordinate(7, {0, 1, 3}));
  EXPECT_FALSE(r.associative);
  EXPECT_NEAR(r.residual, std::sqrt(2.0), 1e-15);
}

TEST(Associative, WrongDimensions) {
  EXPECT_THROW(is_associative(Subspace::coordinate(7, {0, 1})), Error);
  EXPECT_THROW(is_associative(Subspace::coordinate(6, {0, 1, 2})), Error);
}

TEST(Associative, RandomPlanes) {
  Rng rng(36);
  Subspace prev = random_associative(rng);
  for (int t = 0; t < 200; ++t) {
    const Subspace p = random_associative(rng);
    EXPECT_LT(is_associative(p, 1e-10).residual, 1e-10);
    EXPECT_GT(projector_distance(p, prev), 0.0);
    prev = p;
  }
  EXPECT_LT(projector_distance(random_associative(1), random_associative(1)), 1e-15);
}

TEST(Associative, ImHInputsReproduceImH) {
  const Octonion x = in_h(Quaternion::imaginary(0.6, 0.8, 0));
  const Octonion y = in_h(Quaternion::imaginary(0, 0, 1));
  const Subspace p = Subspace::span({x.to_im(), y.to_im(), (x * y).to_im()});
  EXPECT_LT(projector_distance(p, im_h()), 1e-15);
}

TEST(AssociativeFrame, CaseI) {
  const auto an = associative_frame(im_h());
  EXPECT_EQ(an.kind, AssociativeCase::I);
  ASSERT_EQ(an.spectrum.classes.size(), 1u);
  EXPECT_EQ(an.spectrum.classes[0].angle, 0.0);
  EXPECT_EQ(an.spectrum.classes[0].multiplicity, 3u);
  EXPECT_FALSE(an.frame.has_value());
}

TEST(AssociativeFrame, CaseII) {
  // ie, je and their product -conj(j) i = -k... up to sign
  const Octonion x = in_he(Quaternion::i()), y = in_he(Quaternion::j());
  const Subspace p = Subspace::span({x.to_im(), y.to_im(), (x * y).to_im()});
  const auto an = associative_frame(p);
  EXPECT_EQ(an.kind, AssociativeCase::II);
  ASSERT_EQ(an.spectrum.classes.size(), 2u);
  EXPECT_EQ(an.spectrum.classes[0].angle, 0.0);
  EXPECT_EQ(an.spectrum.classes[0].multiplicity, 1u);
  EXPECT_EQ(an.spectrum.classes[1].angle, kHalfPi);
  EXPECT_EQ(an.spectrum.classes[1].multiplicity, 2u);
}

TEST(AssociativeFrame, RejectsNonAssociative) {
  EXPECT_THROW(associative_frame(Subspace::coordinate(7, {0, 1, 3})), Error);
}

TEST(AssociativeFrame, SumRuleOverRandomPlanes) {
  Rng rng(37);
  for (int t = 0; t < 1000; ++t) {
    const Subspace p = random_associative(rng);
    const auto a = oracle_angles(p, im_h());
    const double d = std::min(std::abs(a[2] - a[0] - a[1]), std::abs(a[2] - (std::numbers::pi - a[0] - a[1])));
    EXPECT_LT(d, 1e-7);
  }
}

TEST(AssociativeFrame, CaseIIIFrameStructure) {
  Rng rng(38);
  for (int t = 0; t < 300; ++t) {
    const Subspace p = random_associative(rng);
    const auto an = associative_frame(p);
    ASSERT_EQ(an.kind, AssociativeCase::III);
    ASSERT_TRUE(an.frame.has_value());
    const auto& f = *an.frame;
    EXPECT_NEAR(f.theta3, f.theta1 + f.theta2, 1e-12);
    // a's orthonormal imaginary quaternions with a3 = a1 a2; eps unit in He
    for (const Octonion* a : {&f.a1, &f.a2, &f.a3}) {
      EXPECT_NEAR(a->norm(), 1.0, 1e-10);
      EXPECT_NEAR(a->b.norm() + std::abs(a->a.w), 0.0, 1e-10);
    }
    EXPECT_NEAR(inner(f.a1, f.a2), 0.0, 1e-10);
    expect_oct_near(f.a3, f.a1 * f.a2, 1e-10);
    EXPECT_NEAR(f.epsilon.norm(), 1.0, 1e-10);
    EXPECT_NEAR(f.epsilon.a.norm(), 0.0, 1e-10);
    // displayed normal form
    const double t1 = f.theta1, t2 = f.theta2, t3 = f.theta1 + f.theta2;
    expect_oct_near(f.x1, std::cos(t1) * f.a1 + std::sin(t1) * (f.a1 * f.epsilon), 1e-10);
    expect_oct_near(f.x2, std::cos(t2) * f.a2 + std::sin(t2) * (f.a2 * f.epsilon), 1e-10);
    expect_oct_near(f.x3, std::cos(t3) * f.a3 - std::sin(t3) * (f.a3 * f.epsilon), 1e-10);
    expect_oct_near(f.x3, f.x1 * f.x2, 1e-10);
    // the x's span P and obey the cyclic product table
    const Subspace span = Subspace::span({f.x1.to_im(), f.x2.to_im(), f.x3.to_im()});
    EXPECT_LT(projector_distance(span, p), 1e-9);
    expect_oct_near(f.x2 * f.x1, -f.x3, 1e-10);
    expect_oct_near(f.x2 * f.x3, f.x1, 1e-10);
    expect_oct_near(f.x3 * f.x2, -f.x1, 1e-10);
    expect_oct_near(f.x3 * f.x1, f.x2, 1e-10);
    expect_oct_near(f.x1 * f.x3, -f.x2, 1e-10);
  }
}
