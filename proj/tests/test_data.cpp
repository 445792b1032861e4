#include <gtest/gtest.h>

#include <gencann/data.hpp>
#include <gencann/train.hpp>

#include "support/finite_difference.hpp"
#include "support/hand_models.hpp"

#include <random>
#include <sstream>

using namespace gencann;

namespace {

Dataset parse_text(const std::string& s, std::optional<std::string> schema = std::nullopt) {
  std::istringstream in(s);
  return parse_dataset(in, std::move(schema));
}

long ingestion_row(const std::string& s) {
  try {
    parse_text(s);
  } catch (const IngestionError& e) {
    return e.row();
  }
  ADD_FAILURE() << "no ingestion error for\n" << s;
  return -1;
}

const std::string kToy = "# dataset=toy measure=nominal\n"
                         "path,mode,lambda1,stress1,split\n"
                         "ut,uniaxial_tension,1.1,0.05,train\n"
                         "ut,uniaxial_tension,1.2,0.11,test\n"
                         "eb,equibiaxial,1.1,0.09,train\n";

std::string data_file(const char* name) { return std::string(GENCANN_DATA_DIR) + "/" + name + ".csv"; }

} // namespace

TEST(DataParse, ToyLayout) {
  const Dataset d = parse_text(kToy);
  EXPECT_EQ(d.name, "toy");
  ASSERT_EQ(d.paths.size(), 2u);
  EXPECT_EQ(d.paths[0].points.size(), 2u);
  EXPECT_EQ(d.paths[0].points[1].split, Split::test);
  EXPECT_EQ(d.paths[1].kind, LoadingKind::equibiaxial);
  EXPECT_TRUE(d.has_test_points());
}

TEST(DataParse, ErrorsCarryRowNumbers) {
  EXPECT_THROW(parse_text(""), IngestionError);
  EXPECT_EQ(ingestion_row(""), 1);
  EXPECT_EQ(ingestion_row("# dataset=toy measure=nominal\npath,mode,lambda1,stress1,split\n"
                          "ut,uniaxial_tension,1.1,0.05,train\nut,uniaxial_tension,1.2,train\n"),
            4);
  EXPECT_EQ(ingestion_row("# dataset=toy measure=nominal\npath,mode,lambda1,stress1,split\n"
                          "ut,uniaxial_tension,abc,0.05,train\n"),
            3);
  EXPECT_EQ(ingestion_row("# dataset=toy measure=nominal\npath,mode,lambda1,stress1,split\n"
                          "ut,uniaxial_tension,1.1,0.05,validate\n"),
            3);
  EXPECT_EQ(ingestion_row("# dataset=toy measure=nominal\npath,mode,lambda1,stress1,split\n"
                          "ut,uniaxial_tension,1.1,0.05,train\nut,equibiaxial,1.2,0.1,train\n"),
            4);
  EXPECT_EQ(ingestion_row("# dataset=toy measure=stiff\n"), 1);
  EXPECT_EQ(ingestion_row("# dataset=toy measure=cauchy\npath,lambda1\n"), 2);
  EXPECT_EQ(ingestion_row("# dataset=toy measure=nominal\npath,mode,lambda1,stress1,split\n"
                          "ut,uniaxial_tension,1e999,0.05,train\n"),
            3);
}

TEST(DataParse, MessageMentionsRow) {
  try {
    parse_text("# dataset=toy measure=nominal\npath,mode,lambda1,stress1,split\nut,uniaxial_tension,x,1,train\n");
    FAIL();
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
  }
}

TEST(DataParse, SchemaChecks) {
  EXPECT_THROW(parse_text(kToy, "treloar"), IngestionError);
  EXPECT_THROW(parse_text(kToy, "skin"), IngestionError);
  EXPECT_NO_THROW(parse_text(kToy, "unknown_name"));
}

TEST(DataParse, RoundTripIsLossless) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(1.0, 2.0), s(-1.0, 1.0);
  Dataset d;
  d.name = "random";
  d.measure = StressMeasure::cauchy;
  d.second_column = SecondColumn::lambda2;
  d.stress_columns = 2;
  for (int k = 0; k < 3; ++k) {
    LoadingPath p{"p" + std::to_string(k), LoadingKind::biaxial, {}};
    for (int i = 0; i < 10; ++i)
      p.points.push_back({u(rng), u(rng), {s(rng), s(rng) * 1e-7}, i % 3 ? Split::train : Split::test});
    d.paths.push_back(p);
  }
  const std::string text = write_dataset(d);
  const Dataset back = parse_text(text);
  ASSERT_EQ(back.paths.size(), d.paths.size());
  for (std::size_t k = 0; k < d.paths.size(); ++k)
    for (std::size_t i = 0; i < d.paths[k].points.size(); ++i) {
      const auto &a = d.paths[k].points[i], &b = back.paths[k].points[i];
      EXPECT_EQ(a.lambda1, b.lambda1);
      EXPECT_EQ(a.second, b.second);
      EXPECT_EQ(a.stress, b.stress);
      EXPECT_EQ(a.split, b.split);
    }
  EXPECT_EQ(write_dataset(back), text);
}

TEST(Oracle, ReferenceStateIsStressFree) {
  const auto s = synthetic_ground_truth(Tensor3::Identity(), OracleMaterial{}, 2);
  EXPECT_EQ(s[0], 0.0);
  EXPECT_LT(s.tensor.cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(OracleMaterial{}.energy(Tensor3::Identity()), 0.0);
}

TEST(Oracle, NeoHookeanUniaxial) {
  const OracleMaterial nh{0.3, 0.0, 0.0};
  const auto s = synthetic_ground_truth(deformation_gradient(LoadingMode::uniaxial(2.0)), nh, 2);
  EXPECT_NEAR(s[0], 2 * 0.3 * (2 - 0.25), 1e-14);
}

TEST(Oracle, EquibiaxialSymmetry) {
  for (double l : {0.8, 1.5, 3.0}) {
    const auto s = synthetic_ground_truth(deformation_gradient(LoadingMode::equibiaxial(l)), OracleMaterial{}, 2,
                                          StressMeasure::nominal, {{0, 0}, {1, 1}});
    EXPECT_NEAR(s[0], s[1], 1e-13 * std::abs(s[0]));
  }
}

TEST(Oracle, StressMatchesEnergyDerivative) {
  std::mt19937_64 rng(17);
  const OracleMaterial o;
  for (int k = 0; k < 100; ++k) {
    const Tensor3 F = gencann::testing::random_isochoric(rng, 0.4);
    const Tensor3 fd = gencann::testing::fd_gradient([&](const Tensor3& G) { return o.energy(G); }, F);
    EXPECT_LT(gencann::testing::max_rel_err(o.piola_iso(F), fd, 1e-10), 1e-6);
  }
  EXPECT_THROW(synthetic_ground_truth(2.0 * Tensor3::Identity(), o, 2), InvalidInput);
}

TEST(Oracle, DatasetShape) {
  const Dataset d = oracle_dataset(OracleMaterial{}, 3.0, 15);
  ASSERT_EQ(d.paths.size(), 3u);
  for (const auto& p : d.paths) {
    EXPECT_EQ(p.points.size(), 15u);
    EXPECT_EQ(p.points.front().lambda1, 1.0);
    EXPECT_DOUBLE_EQ(p.points.back().lambda1, 3.0);
  }
}

TEST(Plane, GridBoundariesAndReference) {
  const int n = 40;
  const auto g = invariant_plane_grid(3.0, n);
  ASSERT_EQ(g.size(), std::size_t(n * n));
  bool pure_shear = false;
  for (const auto& p : g) {
    EXPECT_NEAR(p.F.determinant(), 1.0, 1e-12);
    if (p.col == 0) EXPECT_NEAR(p.lambda2, 1.0 / std::sqrt(p.lambda1), 1e-15);
    if (p.col == n - 1) EXPECT_EQ(p.lambda2, p.lambda1);
    if (p.row > 0 && p.lambda2 == 1.0) pure_shear = true;
    if (p.row == 0) {
      EXPECT_NEAR(p.i1, 3.0, 1e-14);
      EXPECT_NEAR(p.i2, 3.0, 1e-14);
    }
  }
  EXPECT_TRUE(pure_shear);
  EXPECT_THROW(invariant_plane_grid(1.0, 10), InvalidInput);
  EXPECT_THROW(invariant_plane_grid(2.0, 1), InvalidInput);
}

TEST(Plane, SelfComparisonIsZero) {
  const OracleMaterial nh{0.5, 0.0, 0.0};
  const auto field = evaluate_plane(gencann::testing::neo_hookean_model(1.0), invariant_plane_grid(3.0, 13), nh);
  EXPECT_LT(field.max, 1e-12);
  for (const auto& e : field.points)
    if (e.point.row == 0) EXPECT_TRUE(e.reference);
}

TEST(Plane, HandSetOracleModel) {
  const OracleMaterial o;
  const auto model = gencann::testing::oracle_model(o);
  const auto field = evaluate_plane(model, invariant_plane_grid(3.0, 13), o);
  EXPECT_LT(field.max, 1e-6);
}

// The committed benchmark files.

TEST(Benchmarks, Brain) {
  const Dataset d = load_dataset(data_file("brain"), "brain");
  ASSERT_EQ(d.paths.size(), 3u);
  EXPECT_EQ(d.paths[0].name, "uniaxial_tension");
  EXPECT_EQ(d.paths[1].name, "uniaxial_compression");
  EXPECT_EQ(d.paths[2].name, "simple_shear");
  for (const auto& p : d.paths) EXPECT_EQ(p.points.size(), 17u);
}

TEST(Benchmarks, RubberSets) {
  for (const char* name : {"treloar", "synthetic_rubber"}) {
    const Dataset d = load_dataset(data_file(name), name);
    ASSERT_EQ(d.paths.size(), 3u);
    for (const auto& p : d.paths) {
      EXPECT_EQ(p.points.size(), 15u);
      EXPECT_GT(p.count(Split::train), 0u);
      EXPECT_GT(p.count(Split::test), 0u);
    }
  }
}

TEST(Benchmarks, Skin) {
  const Dataset d = load_dataset(data_file("skin"), "skin");
  ASSERT_EQ(d.paths.size(), 5u);
  EXPECT_EQ(d.point_count(), 402u);
  EXPECT_EQ(d.measure, StressMeasure::cauchy);
  for (const auto& p : d.paths)
    for (const auto& pt : p.points) ASSERT_EQ(pt.stress.size(), 2u);
  // strip-x, off-x, equibiaxial, off-y, strip-y
  const auto& sx = d.paths[0].points.back();
  EXPECT_EQ(sx.second, 1.0);
  const auto& ox = d.paths[1].points.back();
  EXPECT_NEAR(ox.second, std::sqrt(ox.lambda1), 1e-12);
  const auto& eb = d.paths[2].points.back();
  EXPECT_EQ(eb.second, eb.lambda1);
  const auto& oy = d.paths[3].points.back();
  EXPECT_NEAR(oy.lambda1, std::sqrt(oy.second), 1e-12);
  EXPECT_EQ(d.paths[4].points.back().lambda1, 1.0);
}

TEST(Benchmarks, LoadedStatesAreIsochoricAndRoundTrip) {
  for (const char* name : {"brain", "treloar", "synthetic_rubber", "skin"}) {
    const Dataset d = load_dataset(data_file(name), name);
    for (const auto& p : d.paths)
      for (const auto& pt : p.points)
        EXPECT_NEAR(deformation_gradient(loading_mode(d, p, pt)).determinant(), 1.0, 1e-12);
    std::ifstream in(data_file(name));
    std::stringstream raw;
    raw << in.rdbuf();
    EXPECT_EQ(write_dataset(d), raw.str()) << name;
  }
}

TEST(Benchmarks, MissingFile) {
  EXPECT_THROW(load_dataset(data_file("does_not_exist")), IngestionError);
}
