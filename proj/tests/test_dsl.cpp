#include <gtest/gtest.h>

#include <gencann/dsl.hpp>

#include "support/random_spec.hpp"

#include <random>
#include <sstream>

using namespace gencann;
using namespace gencann::dsl;

namespace {

const char* kMinimal = R"(# smallest complete isotropic description
material { class: isotropic; }
features { invariants: [I1, I2]; }
network { layers: [16, 16]; }
training { learning_rate: 0.001; epochs: 100; }
)";

const char* kSkin = R"(
material {
  class: transversely_isotropic;
  incompressible: true;
}
features {
  use_stretches: true;
  invariants: [I1, I2, I4, I5];
  offsets: reference;
}
network {
  layers: [128, 128, 64, 32];
  activation: softplus;
  output: linear;
  initializer: glorot_uniform;
  seed: 7;
}
fiber {
  angle_init: uniform(0, 1.5707963267948966);
  trainable: true;
}
training {
  optimizer: adam(0.9, 0.999, 1e-8);
  learning_rate: 0.001;
  epochs: 3000;
  loss: mse;
  reference_penalty_weight: 1.0;
  l2_weight: 0;
}
)";

CannSpec parse_ok(std::string_view text) {
  auto r = parse(text);
  if (auto* e = std::get_if<ParseError>(&r)) ADD_FAILURE() << e->to_string();
  return std::get<CannSpec>(r);
}

ParseError parse_err(std::string_view text) {
  auto r = parse(text);
  EXPECT_TRUE(std::holds_alternative<ParseError>(r)) << "expected failure for:\n" << text;
  return std::holds_alternative<ParseError>(r) ? std::get<ParseError>(r) : ParseError{};
}

bool has_violation(const ValidationReport& r, const std::string& path) {
  for (const auto& v : r)
    if (v.path == path) return true;
  return false;
}

std::pair<int, int> line_col_bounds(const std::string& text, int line) {
  std::istringstream in(text);
  std::string l;
  int n = 0, len = 0;
  while (std::getline(in, l)) {
    ++n;
    if (n == line) len = int(l.size());
  }
  return {std::max(n, 1), len};
}

} // namespace

TEST(DslParse, MinimalIsotropicSpec) {
  const CannSpec s = parse_ok(kMinimal);
  EXPECT_EQ(s.material.material_class, MaterialClass::isotropic);
  EXPECT_EQ(s.features.invariants, (std::vector<Invariant>{Invariant::I1, Invariant::I2}));
  EXPECT_EQ(s.network.layers, (std::vector<int>{16, 16}));
  EXPECT_EQ(s.training.epochs, 100);
  EXPECT_FALSE(s.fiber.has_value());
  EXPECT_EQ(s.feature_width(), 2);
}

TEST(DslParse, SkinSpec) {
  const CannSpec s = parse_ok(kSkin);
  EXPECT_TRUE(s.transversely_isotropic());
  EXPECT_EQ(s.network.layers, (std::vector<int>{128, 128, 64, 32}));
  ASSERT_TRUE(s.fiber.has_value());
  EXPECT_FALSE(s.fiber->angle.has_value());
  EXPECT_EQ(s.feature_width(), 7);
  EXPECT_EQ(s.training.reference_penalty_weight, 1.0);
}

TEST(DslParse, FiberOnIsotropicIsValidationError) {
  const std::string text = std::string(kMinimal) + "fiber { angle_init: 0.5; }\n";
  const ParseError e = parse_err(text);
  EXPECT_EQ(e.kind, ParseError::Kind::validation);
  EXPECT_NE(e.message.find("fiber requires transversely_isotropic"), std::string::npos);
  EXPECT_EQ(e.line, 6);
}

TEST(DslParse, UnbalancedBraceReportsPosition) {
  const ParseError e = parse_err("material { class: isotropic;\nfeatures { invariants: [I1]; }\n");
  EXPECT_EQ(e.kind, ParseError::Kind::syntax);
  EXPECT_EQ(e.line, 2);
  EXPECT_EQ(e.column, 10); // '{' where a key was expected
}

TEST(DslParse, UnclosedBlockAtEnd) {
  const ParseError e = parse_err("material { class: isotropic;");
  EXPECT_EQ(e.kind, ParseError::Kind::syntax);
  EXPECT_EQ(e.line, 1);
  EXPECT_EQ(e.column, 28);
}

TEST(DslParse, LexErrors) {
  ParseError e = parse_err("material { class: isotropic$; }");
  EXPECT_EQ(e.kind, ParseError::Kind::lex);
  EXPECT_EQ(e.column, 28);
  e = parse_err("network {\n  layers: [1.2.3];\n}");
  EXPECT_EQ(e.kind, ParseError::Kind::lex);
  EXPECT_EQ(e.line, 2);
  EXPECT_EQ(e.column, 12);
  e = parse_err("x { a: \xff; }");
  EXPECT_EQ(e.kind, ParseError::Kind::lex);
  EXPECT_NE(e.message.find("0xff"), std::string::npos);
}

TEST(DslParse, UnknownKeysAndBlocksAreErrors) {
  ParseError e = parse_err(std::string(kMinimal) + "extras { a: 1; }");
  EXPECT_EQ(e.kind, ParseError::Kind::validation);
  EXPECT_NE(e.message.find("unknown block"), std::string::npos);
  e = parse_err("material { class: isotropic; colour: red; }\nfeatures { invariants: [I1]; }\n"
                "network { layers: [4]; }\ntraining { learning_rate: 0.1; epochs: 1; }");
  EXPECT_NE(e.message.find("unknown key 'colour'"), std::string::npos);
  EXPECT_EQ(e.line, 1);
  EXPECT_EQ(e.column, 30);
}

TEST(DslParse, MissingBlockAndKey) {
  ParseError e = parse_err("material { class: isotropic; }\nfeatures { invariants: [I1]; }\nnetwork { layers: [4]; }");
  EXPECT_NE(e.message.find("missing required block 'training'"), std::string::npos);
  e = parse_err("material { }\nfeatures { invariants: [I1]; }\nnetwork { layers: [4]; }\n"
                "training { learning_rate: 0.1; epochs: 1; }");
  EXPECT_NE(e.message.find("missing required key 'class'"), std::string::npos);
}

TEST(DslParse, TypeErrors) {
  const ParseError e = parse_err("material { class: isotropic; }\nfeatures { invariants: [I1]; }\n"
                                 "network { layers: [4.5]; }\ntraining { learning_rate: 0.1; epochs: 1; }");
  EXPECT_EQ(e.kind, ParseError::Kind::validation);
  EXPECT_EQ(e.line, 3);
  EXPECT_NE(e.message.find("integer"), std::string::npos);
}

TEST(DslParse, PlaceholderIsRejected) {
  const ParseError e = parse_err("material { class: isotropic; }\nfeatures { invariants: [I1]; }\n"
                                 "network { layers: choose; }\ntraining { learning_rate: 0.1; epochs: 1; }");
  EXPECT_NE(e.message.find("not chosen"), std::string::npos);
  EXPECT_EQ(e.line, 3);
  // the bare syntax is still well formed
  EXPECT_TRUE(std::holds_alternative<Document>(parse_syntax("network { layers: choose; }")));
}

TEST(DslParse, EmptyInput) {
  const ParseError e = parse_err("");
  EXPECT_EQ(e.line, 1);
  EXPECT_EQ(e.column, 1);
  parse_err("   # only a comment\n");
}

TEST(DslValidate, TransverselyIsotropicWithFiberIsValid) {
  CannSpec s = parse_ok(kMinimal);
  s.material.material_class = MaterialClass::transversely_isotropic;
  s.features.invariants = {Invariant::I1, Invariant::I4};
  s.fiber = FiberBlock{};
  EXPECT_TRUE(validate(s).empty());
}

TEST(DslValidate, ZeroEpochs) {
  CannSpec s = parse_ok(kMinimal);
  s.training.epochs = 0;
  const auto r = validate(s);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].path, "training.epochs");
}

TEST(DslValidate, EmptyFeatureVector) {
  CannSpec s = parse_ok(kMinimal);
  s.features.invariants.clear();
  const auto r = validate(s);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].message, "feature vector empty");
}

TEST(DslValidate, ReportsEveryViolation) {
  CannSpec s = parse_ok(kMinimal);
  s.training.epochs = 0;
  s.training.learning_rate = -1;
  s.features.invariants = {Invariant::I1, Invariant::I4};
  s.network.layers.clear();
  const auto r = validate(s);
  EXPECT_EQ(r.size(), 4u);
  EXPECT_TRUE(has_violation(r, "training.epochs"));
  EXPECT_TRUE(has_violation(r, "training.learning_rate"));
  EXPECT_TRUE(has_violation(r, "features.invariants"));
  EXPECT_TRUE(has_violation(r, "network.layers"));
  EXPECT_EQ(validate(s), r); // idempotent
}

TEST(DslValidate, TransverselyIsotropicNeedsFiber) {
  CannSpec s = parse_ok(kSkin);
  s.fiber.reset();
  EXPECT_TRUE(has_violation(validate(s), "fiber"));
  s = parse_ok(kSkin);
  s.fiber->angle = 2.0;
  EXPECT_TRUE(has_violation(validate(s), "fiber.angle_init"));
}

TEST(DslSerialize, RoundTripExamples) {
  for (const char* text : {kMinimal, kSkin}) {
    const CannSpec s = parse_ok(text);
    EXPECT_EQ(parse_ok(serialize(s)), s);
  }
}

TEST(DslSerialize, NumbersKeepFullPrecision) {
  CannSpec s = parse_ok(kSkin);
  s.training.learning_rate = 0.1 + 0.2;
  s.fiber->low = std::nextafter(0.3, 1.0);
  s.training.l2_weight = 1.2345678901234567e-9;
  const CannSpec back = parse_ok(serialize(s));
  EXPECT_EQ(back.training.learning_rate, s.training.learning_rate);
  EXPECT_EQ(back.fiber->low, s.fiber->low);
  EXPECT_EQ(back.training.l2_weight, s.training.l2_weight);
}

TEST(DslSerialize, ErrorPositionsStayInBounds) {
  std::mt19937_64 rng(99);
  const std::string base = kSkin;
  std::uniform_int_distribution<std::size_t> pos(0, base.size() - 1);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int k = 0; k < 500; ++k) {
    std::string t = base;
    for (int m = 0; m < 3; ++m) t[pos(rng)] = char(byte(rng));
    auto r = parse(t);
    if (auto* e = std::get_if<ParseError>(&r)) {
      const auto [lines, len] = line_col_bounds(t, e->line);
      EXPECT_GE(e->line, 1);
      EXPECT_LE(e->line, lines);
      EXPECT_GE(e->column, 1);
      EXPECT_LE(e->column, len + 1);
    }
  }
}

TEST(DslSerialize, RandomSpecsRoundTrip) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    const CannSpec s = gencann::testing::random_valid_spec(rng);
    ASSERT_TRUE(validate(s).empty()) << i;
    const std::string text = serialize(s);
    auto back = parse(text);
    ASSERT_TRUE(std::holds_alternative<CannSpec>(back)) << std::get<ParseError>(back).to_string() << "\n" << text;
    EXPECT_EQ(std::get<CannSpec>(back), s) << text;
    EXPECT_EQ(serialize(std::get<CannSpec>(back)), text);
  }
}

TEST(DslParse, SeedUsesFullUnsignedRange) {
  std::string text = kMinimal;
  text.replace(text.find("network { layers: [16, 16]; }"), 29,
               "network { layers: [16, 16]; seed: 18446744073709551615; }");
  auto r = parse(text);
  ASSERT_TRUE(std::holds_alternative<CannSpec>(r));
  EXPECT_EQ(std::get<CannSpec>(r).network.seed, 18446744073709551615ull);
  text.replace(text.find("18446744073709551615"), 20, "18446744073709551616");
  EXPECT_TRUE(std::holds_alternative<ParseError>(parse(text)));
}
