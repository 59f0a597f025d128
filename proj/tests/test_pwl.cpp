#include <gtest/gtest.h>

#include <algorithm>

#include "test_support.hpp"

using namespace testing_support;

namespace {

AffineComponent comp(std::vector<Rational> a, Rational b = 0) { return {std::move(a), std::move(b)}; }

lp::Constraint ge(std::vector<Rational> a, Rational b = 0) { return {std::move(a), lp::Relation::ge, std::move(b)}; }

Point random_point(Rng& rng, std::size_t k, long lo, long hi, long den = 7) {
  Point x(k);
  for (auto& v : x) v = Q(std::uniform_int_distribution<long>(lo * den, hi * den)(rng), den);
  return x;
}

Point random_nonneg_point(Rng& rng, std::size_t k) {
  Point x = random_point(rng, k, 0, 6);
  std::bernoulli_distribution zero(0.25);
  for (auto& v : x)
    if (zero(rng)) v = 0;
  return x;
}

const char* const regional_fixtures[] = {"max.pwl", "min.pwl", "linear.pwl", "abs.pwl", "summin.pwl", "direct.pwl"};

}  // namespace

TEST(EvalMaxMin, Examples) {
  MaxMinForm mx{2, {comp({1, 0}), comp({0, 1})}, {{0}, {1}}};
  EXPECT_EQ(mx.eval({2, 3}), 3);
  MaxMinForm mn{2, {comp({1, 0}), comp({0, 1})}, {{0, 1}}};
  EXPECT_EQ(mn.eval({0, 0}), 0);
  PwlFunction s = load_pwl("summin_maxmin.pwl");
  EXPECT_EQ(s.eval({1, 2, 5, 3}), 4);
  EXPECT_THROW(mx.eval({1}), std::invalid_argument);
}

TEST(RegionalToMaxMin, MaxMinAbs) {
  auto mx = load_pwl("max.pwl").to_maxmin();
  EXPECT_EQ(mx.groups, (std::vector<std::vector<std::size_t>>{{0}, {1}}));
  auto cs = mx.components;
  std::sort(cs.begin(), cs.end());
  EXPECT_TRUE(cs == (std::vector<AffineComponent>{comp({0, 1}), comp({1, 0})}));
  auto mn = load_pwl("min.pwl").to_maxmin();
  EXPECT_EQ(mn.groups, (std::vector<std::vector<std::size_t>>{{0, 1}}));
  auto ab = load_pwl("abs.pwl").to_maxmin();
  EXPECT_EQ(ab.groups.size(), 2u);
  EXPECT_EQ(ab.eval({Q(-5, 2)}), Q(5, 2));
  EXPECT_EQ(ab.eval({Q(3)}), 3);
}

TEST(RegionalToMaxMin, Errors) {
  RegionalPwl jump{1, {{comp({1}), {ge({1})}}, {comp({1}, 1), {ge({-1})}}}, {}};
  EXPECT_THROW(regional_to_maxmin(jump), ContinuityViolation);
  RegionalPwl gap{1, {{comp({1}), {ge({1}, 1)}}}, {}};
  EXPECT_THROW(regional_to_maxmin(gap), CoverageGap);
}

TEST(DualRail, EncodeDecode) {
  auto e = dualrail_encode({Q(-3, 2), Q(0)});
  EXPECT_EQ(e[0].plus, 0);
  EXPECT_EQ(e[0].minus, Q(3, 2));
  EXPECT_EQ(e[1].plus, 0);
  EXPECT_EQ(e[1].minus, 0);
  EXPECT_EQ(dualrail_decode({{Q(5, 2), Q(1)}}), (Point{Q(3, 2)}));
}

TEST(PositiveContinuity, Examples) {
  EXPECT_TRUE(check_positive_continuous(*load_pwl("direct.pwl").regional));
  EXPECT_FALSE(check_positive_continuous(*load_pwl("discontinuous.pwl").regional));
  RegionalPwl zero{2, {{comp({0, 0}), {}}}, {ge({1, 0}), ge({0, 1})}};
  EXPECT_TRUE(check_positive_continuous(zero));
}

TEST(ParsePwl, FormatAndErrors) {
  PwlFunction f = parse_pwl("arity: 2\ncomponent g1 = 2/1 x1 - 3/1 x2 + 0/1\nmaxmin: {1}\n");
  EXPECT_EQ(f.eval({1, 1}), -1);
  EXPECT_EQ(to_string(f.maxmin->components[0]), "2 x1 - 3 x2");
  EXPECT_THROW(parse_pwl("component g = x1\n"), ParseError);
  EXPECT_THROW(parse_pwl("arity: 1\ncomponent g = x2\nmaxmin: {1}\n"), ParseError);
  EXPECT_THROW(parse_pwl("arity: 1\ncomponent g = x1\nmaxmin: {2}\n"), ParseError);
  EXPECT_THROW(parse_pwl("arity: 1\ncomponent g = x1\nregion h: x1 >= 0\n"), ParseError);
  try {
    parse_pwl("arity: 1\ncomponent g = x1\nregion g: x1 >> 0\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

// Properties.

TEST(PwlProperties, NormalizationAgreesWithRegions) {
  Rng rng(51);
  for (auto name : regional_fixtures) {
    PwlFunction f = load_pwl(name);
    MaxMinForm m = regional_to_maxmin(*f.regional);
    for (int t = 0; t < 200; ++t) {
      Point x = f.domain.empty() ? random_point(rng, f.arity, -6, 6) : random_nonneg_point(rng, f.arity);
      auto want = f.regional->eval(x);
      ASSERT_TRUE(want) << name;
      ASSERT_EQ(m.eval(x), *want) << name;
    }
  }
}

TEST(PwlProperties, ValueIsSomeComponent) {
  Rng rng(52);
  PwlFunction f = load_pwl("summin_maxmin.pwl");
  for (int t = 0; t < 200; ++t) {
    Point x = random_point(rng, 4, -5, 5);
    Rational v = f.eval(x);
    bool hit = false;
    for (const auto& g : f.maxmin->components) hit |= g.eval(x) == v;
    ASSERT_TRUE(hit);
  }
}

TEST(PwlProperties, SomeComponentSpansAnyTwoPoints) {
  Rng rng(53);
  for (auto name : {"max.pwl", "min.pwl", "abs.pwl", "summin.pwl"}) {
    PwlFunction f = load_pwl(name);
    MaxMinForm m = f.to_maxmin();
    for (int t = 0; t < 100; ++t) {
      Point a = random_point(rng, f.arity, -5, 5), b = random_point(rng, f.arity, -5, 5);
      Rational fa = m.eval(a), fb = m.eval(b);
      bool found = false;
      for (const auto& g : m.components) found |= g.eval(a) <= fa && g.eval(b) >= fb;
      ASSERT_TRUE(found) << name;
    }
  }
}

TEST(PwlProperties, DualRailShiftInvariance) {
  Rng rng(54);
  for (int t = 0; t < 200; ++t) {
    Point x = random_point(rng, 3, -5, 5);
    auto e = dualrail_encode(x);
    Rational shift = rand_q(rng, 40, 3);
    for (auto& d : e) {
      d.plus += shift;
      d.minus += shift;
    }
    ASSERT_EQ(dualrail_decode(e), x);
  }
}
