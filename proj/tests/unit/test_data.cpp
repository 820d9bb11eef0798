#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "iphs/data/dataset.hpp"
#include "iphs/error.hpp"
#include "iphs/gas/gas_piston.hpp"
#include "test_support.hpp"

using namespace iphs;
using namespace iphs::data;
using iphs::testing::Draw;

namespace {

class Decay : public core::DynamicsModel {
 public:
  std::size_t state_dim() const noexcept override { return 1; }
  std::size_t input_dim() const noexcept override { return 1; }
  core::StateVector rhs(std::span<const double> x, std::span<const double> u) const override {
    return {-x[0] + u[0]};
  }
};

Trajectory ramp(std::size_t samples, std::size_t n = 2, std::size_t m = 1) {
  Trajectory t;
  t.h = 0.5;
  for (std::size_t k = 0; k < samples; ++k) {
    std::vector<double> row(n);
    for (std::size_t d = 0; d < n; ++d) row[d] = static_cast<double>(k * 10 + d);
    t.states.push_back(row);
    if (k + 1 < samples) t.inputs.push_back(std::vector<double>(m, static_cast<double>(k)));
  }
  for (std::size_t d = 0; d < n; ++d) t.state_labels.push_back({"x" + std::to_string(d), "m"});
  for (std::size_t d = 0; d < m; ++d) t.input_labels.push_back({"u" + std::to_string(d), "N"});
  return t;
}

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "iphs_test_data";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST(Rk4, SingleStepOnDecay) {
  const Decay model;
  const double x0[] = {1.0};
  const auto traj = rk4_generate(model, x0, [](double) { return core::InputVector{0.0}; }, 0.1, 1);
  ASSERT_EQ(traj.samples(), 2u);
  // 1 - h + h^2/2 - h^3/6 + h^4/24 at h = 0.1
  EXPECT_NEAR(traj.states[1][0], 0.9048375, 1e-9);
}

TEST(Rk4, ObservedOrderIsFour) {
  const Decay model;
  const double x0[] = {1.0};
  const auto zero = [](double) { return core::InputVector{0.0}; };
  double errors[2];
  const double hs[] = {0.2, 0.1};
  for (int i = 0; i < 2; ++i) {
    const auto steps = static_cast<std::size_t>(std::lround(2.0 / hs[i]));
    const auto traj = rk4_generate(model, x0, zero, hs[i], steps);
    errors[i] = std::abs(traj.states.back()[0] - std::exp(-2.0));
  }
  const double order = std::log2(errors[0] / errors[1]);
  EXPECT_GE(order, 3.5);
  EXPECT_LE(order, 4.5);
}

TEST(Rk4, SubstepsMatchFinerGrid) {
  const Decay model;
  const double x0[] = {1.0};
  const auto forcing = [](double t) { return core::InputVector{std::sin(t)}; };
  const auto coarse = rk4_generate(model, x0, forcing, 0.1, 20, 4);
  const auto fine = rk4_generate(model, x0, forcing, 0.025, 80);
  for (std::size_t k = 0; k <= 20; ++k) EXPECT_NEAR(coarse.states[k][0], fine.states[4 * k][0], 1e-14);
  EXPECT_DOUBLE_EQ(coarse.inputs[3][0], std::sin(0.3));
}

TEST(Rk4, EnergyDriftOfUnforcedGasPiston) {
  const gas::GasPistonModel model{gas::GasPistonTruth{}};
  const double x0[] = {0.0, 0.001, 0.3, 0.0};
  const auto traj = rk4_generate(model, x0, [](double) { return core::InputVector{0.0}; }, 0.01, 10000, 10);
  const double h0 = model.hamiltonian(traj.states.front());
  const double h1 = model.hamiltonian(traj.states.back());
  EXPECT_LE(std::abs(h1 - h0) / std::abs(h0), 1e-6);
}

TEST(Rk4, BlowUpIsReported) {
  class Explode : public Decay {
    core::StateVector rhs(std::span<const double> x, std::span<const double>) const override {
      return {x[0] * x[0]};
    }
  };
  const Explode model;
  const double x0[] = {1.0};
  EXPECT_THROW(rk4_generate(model, x0, [](double) { return core::InputVector{0.0}; }, 0.5, 100), NumericError);
}

TEST(Noise, StandardDeviationMatchesFactor) {
  Draw draw(41);
  Trajectory t = ramp(20001, 2);
  for (auto& row : t.states) {
    row[0] = draw.normal(3.0);
    row[1] = 100.0 + std::sin(static_cast<double>(&row - &t.states[0]) * 0.01) * 5.0;
  }
  const auto noisy = add_noise(t, 0.2, 7);
  for (std::size_t d = 0; d < 2; ++d) {
    double mean_x = 0, mean_e = 0;
    const double n = static_cast<double>(t.samples());
    for (std::size_t k = 0; k < t.samples(); ++k) {
      mean_x += t.states[k][d] / n;
      mean_e += (noisy.states[k][d] - t.states[k][d]) / n;
    }
    double var_x = 0, var_e = 0;
    for (std::size_t k = 0; k < t.samples(); ++k) {
      var_x += std::pow(t.states[k][d] - mean_x, 2) / (n - 1);
      var_e += std::pow(noisy.states[k][d] - t.states[k][d] - mean_e, 2) / (n - 1);
    }
    EXPECT_NEAR(std::sqrt(var_e) / (0.2 * std::sqrt(var_x)), 1.0, 0.05) << "dim " << d;
  }
  EXPECT_EQ(noisy.inputs, t.inputs);
  EXPECT_EQ(add_noise(t, 0.2, 7).states, noisy.states);
}

TEST(Chunk, CountsAndSharedBoundaries) {
  const auto t = ramp(10000);
  const auto chunks = chunk(t, 250);
  ASSERT_EQ(chunks.size(), 40u);
  for (const auto& c : chunks) {
    EXPECT_EQ(c.samples(), 250u);
    EXPECT_EQ(c.steps(), 249u);
  }
  EXPECT_EQ(chunks[1].states.front(), chunks[0].states.back());
  EXPECT_EQ(chunks[3].metadata.at("chunk_start"), "747");
  EXPECT_DOUBLE_EQ(chunks[2].t0, t.time(498));
  EXPECT_EQ(chunk(t, 10000).size(), 1u);
  EXPECT_THROW(chunk(t, 1), Error);
  EXPECT_TRUE(chunk(t, 10001).empty());
}

TEST(Chunk, ConcatenationReproducesPrefix) {
  const auto t = ramp(1000);
  const auto chunks = chunk(t, 37);
  std::vector<std::vector<double>> states, inputs;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const auto& c = chunks[i];
    states.insert(states.end(), c.states.begin() + (i == 0 ? 0 : 1), c.states.end());
    inputs.insert(inputs.end(), c.inputs.begin(), c.inputs.end());
  }
  ASSERT_EQ(states.size(), chunks.size() * 36 + 1);
  for (std::size_t k = 0; k < states.size(); ++k) EXPECT_EQ(states[k], t.states[k]);
  for (std::size_t k = 0; k < inputs.size(); ++k) EXPECT_EQ(inputs[k], t.inputs[k]);
}

TEST(Split, WholeChunksDeterministic) {
  const auto chunks = chunk(ramp(10000), 250);
  const auto a = split_chunks(chunks, 0.8, 3);
  const auto b = split_chunks(chunks, 0.8, 3);
  EXPECT_EQ(a.train.size(), 32u);
  EXPECT_EQ(a.validation.size(), 8u);
  for (std::size_t i = 0; i < a.train.size(); ++i)
    EXPECT_EQ(a.train[i].metadata.at("chunk_start"), b.train[i].metadata.at("chunk_start"));
  std::set<std::string> seen;
  for (const auto* part : {&a.train, &a.validation})
    for (const auto& c : *part) EXPECT_TRUE(seen.insert(c.metadata.at("chunk_start")).second);
  EXPECT_EQ(seen.size(), 40u);
  const auto c = split_chunks(chunks, 0.8, 4);
  bool differs = false;
  for (std::size_t i = 0; i < c.train.size(); ++i)
    differs |= c.train[i].metadata.at("chunk_start") != a.train[i].metadata.at("chunk_start");
  EXPECT_TRUE(differs);
  EXPECT_THROW(split_chunks(chunks, 1.5, 0), Error);
}

TEST(Normalizer, RoundTripAndDegenerateColumns) {
  Draw draw(42);
  auto t = ramp(300, 3, 2);
  for (auto& row : t.states) {
    row[0] = draw.normal(50.0) + 1e4;
    row[2] = 7.0;
  }
  for (auto& row : t.inputs) row[1] = draw.uniform(-1, 1);
  const std::vector<Trajectory> set{t};
  const auto norm = Normalizer::fit(set);
  EXPECT_TRUE(norm.state_degenerate[2]);
  EXPECT_FALSE(norm.state_degenerate[0]);
  const auto z = norm.normalize(t);
  EXPECT_EQ(z.states[10][2], 7.0);
  const auto back = norm.denormalize(z);
  for (std::size_t k = 0; k < t.samples(); ++k)
    for (std::size_t d = 0; d < 3; ++d)
      EXPECT_NEAR(back.states[k][d], t.states[k][d], 1e-12 * std::max(1.0, std::abs(t.states[k][d])));
  for (std::size_t k = 0; k < t.steps(); ++k)
    for (std::size_t d = 0; d < 2; ++d) EXPECT_NEAR(back.inputs[k][d], t.inputs[k][d], 1e-12);

  std::map<std::string, std::string> meta;
  norm.to_metadata(meta);
  const auto again = Normalizer::from_metadata(meta);
  EXPECT_EQ(again.state_mean, norm.state_mean);
  EXPECT_EQ(again.input_std, norm.input_std);
  EXPECT_EQ(again.state_degenerate, norm.state_degenerate);
}

TEST(Csv, RoundTripIsBitExact) {
  Draw draw(43);
  auto t = ramp(50, 2, 3);
  for (auto& row : t.states)
    for (auto& v : row) v = draw.normal(1e3);
  for (auto& row : t.inputs)
    for (auto& v : row) v = draw.normal(1e-3);
  t.metadata["source"] = "unit";
  const auto path = temp_path("roundtrip.csv");
  write_dataset(path, t);
  const auto back = read_csv(path);
  EXPECT_EQ(back.states, t.states);
  EXPECT_EQ(back.inputs, t.inputs);
  EXPECT_DOUBLE_EQ(back.h, t.h);
  EXPECT_EQ(back.state_labels[1].header(), "x1[m]");
  EXPECT_EQ(back.metadata.at("source"), "unit");
}

TEST(Csv, MalformedRowNamesItsLine) {
  const auto path = temp_path("bad.csv");
  {
    std::ofstream out(path);
    out << "t[s],x0[m],u0[N]\n0,1,2\n0.5,abc,3\n1,4,\n";
  }
  const CsvSchema schema{{"x0[m]"}, {"u0[N]"}};
  try {
    (void)read_csv(path, schema);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 3u);
  }
}

TEST(Csv, HeaderWithoutUnitRejected) {
  const auto path = temp_path("nounit.csv");
  {
    std::ofstream out(path);
    out << "t[s],x0,u0[N]\n0,1,2\n0.5,2,\n";
  }
  EXPECT_THROW(read_csv(path, CsvSchema{{"x0"}, {"u0[N]"}}), ParseError);
  EXPECT_THROW(parse_label("T_zone1"), ParseError);
  EXPECT_EQ(parse_label("T_zone1[K]").unit, "K");
}

TEST(Format, NumbersRoundTrip) {
  Draw draw(44);
  for (int i = 0; i < 1000; ++i) {
    const double v = draw.normal(1.0) * std::pow(10.0, draw.uniform(-300, 300));
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_THROW(parse_double("1.0x"), ParseError);
  EXPECT_THROW(parse_double(""), ParseError);
}
