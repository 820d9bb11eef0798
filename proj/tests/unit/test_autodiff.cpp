#include <gtest/gtest.h>

#include <cmath>

#include "iphs/ad/parameters.hpp"
#include "iphs/ad/tape.hpp"
#include "iphs/ad/var.hpp"
#include "iphs/error.hpp"
#include "test_support.hpp"

using namespace iphs;
using ad::Var;

TEST(Primitives, SoftplusMatchesHighPrecision) {
  // mpmath, 50 digits
  EXPECT_EQ(ad::softplus(-800.0), 0.0);
  EXPECT_NEAR(ad::softplus(-40.0), 4.2483542552915889863e-18, 1e-32);
  EXPECT_NEAR(ad::softplus(-1.0), 0.31326168751822283405, 1e-16);
  EXPECT_NEAR(ad::softplus(0.0), 0.69314718055994530942, 1e-16);
  EXPECT_NEAR(ad::softplus(1e-8), 0.69314718555994532192, 1e-16);
  EXPECT_NEAR(ad::softplus(0.5), 0.97407698418010668087, 1e-16);
  EXPECT_NEAR(ad::softplus(3.0), 3.0485873515737420588, 4e-16);
  EXPECT_DOUBLE_EQ(ad::softplus(40.0), 40.0);
  EXPECT_DOUBLE_EQ(ad::softplus(800.0), 800.0);
}

TEST(Primitives, LogCoshMatchesHighPrecision) {
  EXPECT_EQ(ad::log_cosh(0.0), 0.0);
  EXPECT_NEAR(ad::log_cosh(1e-4), 4.9999999916666671681e-9, 1e-20);
  EXPECT_NEAR(ad::log_cosh(0.5), 0.12011450695827752463, 1e-16);
  EXPECT_NEAR(ad::log_cosh(2.0), 1.3250027473578644309, 2e-16);
  EXPECT_NEAR(ad::log_cosh(20.0), 19.306852819440054695, 4e-15);
  EXPECT_NEAR(ad::log_cosh(100.0), 99.306852819440054691, 2e-14);
  EXPECT_NEAR(ad::log_cosh(500.0), 499.30685281944005469, 1e-13);
  EXPECT_NEAR(ad::log_cosh(-500.0), 499.30685281944005469, 1e-13);
}

TEST(Primitives, SigmoidIsStableAtExtremes) {
  EXPECT_NEAR(ad::sigmoid(3.0), 0.95257412682243321912, 2.3e-16);  // 2 ulp
  EXPECT_NEAR(ad::sigmoid(-40.0), 4.2483542552915889773e-18, 1e-32);
  EXPECT_EQ(ad::sigmoid(-1000.0), 0.0);
  EXPECT_EQ(ad::sigmoid(1000.0), 1.0);
}

TEST(Tape, ChainRuleOnProduct) {
  ad::Tape tape;
  const Var x = ad::make_leaf(tape, 3.0);
  const Var y = ad::make_leaf(tape, -2.0);
  const Var f = x * y + ad::exp(x) / y;
  const ad::NodeId leaves[] = {x.id(), y.id()};
  const auto g = tape.gradient(f.id(), leaves);
  EXPECT_NEAR(g[0], -2.0 + std::exp(3.0) / -2.0, 1e-12);
  EXPECT_NEAR(g[1], 3.0 - std::exp(3.0) / 4.0, 1e-12);
}

TEST(Tape, SharedSubexpressionAccumulates) {
  ad::Tape tape;
  const Var x = ad::make_leaf(tape, 1.5);
  const Var s = ad::tanh(x);
  const Var f = s * s + s;
  const ad::NodeId leaves[] = {x.id()};
  const double t = std::tanh(1.5);
  EXPECT_NEAR(tape.gradient(f.id(), leaves)[0], (2 * t + 1) * (1 - t * t), 1e-14);
}

TEST(Tape, ConstantsDoNotTouchTape) {
  ad::Tape tape;
  const Var x = ad::make_leaf(tape, 2.0);
  const std::size_t before = tape.size();
  const Var c = Var(4.0) * Var(0.5);
  EXPECT_TRUE(c.is_constant());
  EXPECT_EQ(tape.size(), before);
  const Var f = c * x + 1.0;
  const ad::NodeId leaves[] = {x.id()};
  EXPECT_DOUBLE_EQ(f.value(), 5.0);
  EXPECT_DOUBLE_EQ(tape.gradient(f.id(), leaves)[0], 2.0);
}

// Every differentiable primitive against central differences.
TEST(Tape, PrimitiveDerivativesMatchFiniteDifferences) {
  using Fn = Var (*)(const Var&);
  struct Case {
    const char* name;
    Fn f;
    double (*g)(double);
    double x;
  };
  const Case cases[] = {
      {"exp", [](const Var& a) { return ad::exp(a); }, [](double a) { return std::exp(a); }, 0.7},
      {"log", [](const Var& a) { return ad::log(a); }, [](double a) { return std::log(a); }, 2.3},
      {"tanh", [](const Var& a) { return ad::tanh(a); }, [](double a) { return std::tanh(a); }, -0.4},
      {"sigmoid", [](const Var& a) { return ad::sigmoid(a); }, [](double a) { return ad::sigmoid(a); }, 1.1},
      {"softplus", [](const Var& a) { return ad::softplus(a); }, [](double a) { return ad::softplus(a); }, -0.9},
      {"log_cosh", [](const Var& a) { return ad::log_cosh(a); }, [](double a) { return ad::log_cosh(a); }, 2.2},
      {"abs", [](const Var& a) { return ad::abs(a); }, [](double a) { return std::fabs(a); }, -1.3},
      {"sqrt", [](const Var& a) { return ad::sqrt(a); }, [](double a) { return std::sqrt(a); }, 3.1},
      {"pow", [](const Var& a) { return ad::pow(a, 2.5); }, [](double a) { return std::pow(a, 2.5); }, 1.7},
      {"recip", [](const Var& a) { return 1.0 / a; }, [](double a) { return 1.0 / a; }, 0.6},
      {"csub", [](const Var& a) { return 2.0 - a * 3.0; }, [](double a) { return 2.0 - a * 3.0; }, 0.6},
  };
  for (const auto& c : cases) {
    ad::Tape tape;
    const Var x = ad::make_leaf(tape, c.x);
    const Var y = c.f(x);
    const ad::NodeId leaves[] = {x.id()};
    const double eps = 1e-6;
    const double fd = (c.g(c.x + eps) - c.g(c.x - eps)) / (2 * eps);
    EXPECT_NEAR(tape.gradient(y.id(), leaves)[0], fd, 1e-7 * std::max(1.0, std::abs(fd))) << c.name;
    EXPECT_DOUBLE_EQ(y.value(), c.g(c.x)) << c.name;
  }
}

TEST(Tape, ReplayReproducesRecordedValuesBitExactly) {
  iphs::testing::Draw draw(7);
  ad::Tape tape;
  std::vector<Var> xs;
  std::vector<double> leaf_values;
  for (int i = 0; i < 5; ++i) {
    leaf_values.push_back(draw.uniform(0.5, 2.0));
    xs.push_back(ad::make_leaf(tape, leaf_values.back()));
  }
  Var acc = 0.0;
  for (int i = 0; i < 5; ++i) acc += ad::log_cosh(xs[i] * xs[(i + 1) % 5]) + ad::sigmoid(xs[i]) / xs[i];
  const auto replayed = tape.replay(leaf_values);
  for (ad::NodeId k = 0; k < tape.size(); ++k) EXPECT_EQ(replayed[k], tape.value(k));

  // New leaf values give the same result as re-recording.
  for (auto& v : leaf_values) v *= 1.1;
  const auto moved = tape.replay(leaf_values);
  ad::Tape fresh;
  std::vector<Var> ys;
  for (double v : leaf_values) ys.push_back(ad::make_leaf(fresh, v));
  Var acc2 = 0.0;
  for (int i = 0; i < 5; ++i) acc2 += ad::log_cosh(ys[i] * ys[(i + 1) % 5]) + ad::sigmoid(ys[i]) / ys[i];
  EXPECT_EQ(moved[acc.id()], acc2.value());
  EXPECT_EQ(tape.leaf_count(), 5u);
}

TEST(Tape, DomainErrorsNameTheNode) {
  ad::Tape tape;
  const Var x = ad::make_leaf(tape, 0.0);
  EXPECT_THROW(ad::log(x), NumericError);
  EXPECT_THROW((Var(1.0) / x), NumericError);
  const Var y = ad::make_leaf(tape, -1.0);
  try {
    (void)ad::log(y);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("node"), std::string::npos);
  }
}

TEST(Parameters, SegmentsAreDisjointAndCover) {
  ad::ParameterVector p;
  const double a[] = {1, 2, 3};
  const double b[] = {4};
  p.add_segment("a", a);
  p.add_segment("b", b);
  EXPECT_EQ(p.size(), 4u);
  EXPECT_EQ(p.segment_info("b").offset, 3u);
  EXPECT_EQ(p.gradient().size(), 4u);
  EXPECT_DOUBLE_EQ(p.segment("b")[0], 4.0);
  EXPECT_THROW(p.add_segment("a", b), Error);
  EXPECT_THROW(p.segment("missing"), Error);
  const double wrong[] = {1, 2};
  EXPECT_THROW(p.assign(wrong), DimensionError);
}

TEST(Parameters, FiniteDifferenceOracle) {
  const ad::ScalarFunction f = [](std::span<const double> t) { return t[0] * t[0] * t[1] + std::sin(t[1]); };
  const double theta[] = {1.5, -0.3};
  const auto g = ad::finite_diff_gradient(f, theta, 1e-6);
  EXPECT_NEAR(g[0], 2 * 1.5 * -0.3, 1e-8);
  EXPECT_NEAR(g[1], 1.5 * 1.5 + std::cos(-0.3), 1e-8);
  EXPECT_THROW(ad::finite_diff_gradient(f, theta, 0.0), Error);
  const ad::ScalarFunction bad = [](std::span<const double> t) { return t[0] > 1.5 ? NAN : 0.0; };
  EXPECT_THROW(ad::finite_diff_gradient(bad, theta, 1e-3), NumericError);
}
