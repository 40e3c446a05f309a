#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "halfwave/experiments.hpp"
#include "halfwave/report.hpp"
#include "test_util.hpp"

using namespace halfwave;

namespace {

ExperimentConfig parse(const std::string& text, Experiment e = Experiment::Approximation) {
  std::istringstream in(text);
  return parse_config(in, default_config(e));
}

std::string csv_of(const SweepResult& r) {
  std::ostringstream out;
  write_csv(out, r);
  return out.str();
}

ExperimentConfig small_decoupling() {
  ExperimentConfig c = default_config(Experiment::Decoupling);
  c.grid = make_grid(16);
  c.eps_list = {0.2, 0.1, 0.05};
  c.horizon = horizon::FixedTime{5.0};
  return c;
}

}  // namespace

TEST(Config, ParsesKeysAndComments) {
  const ExperimentConfig c = parse(
      "# sweep\n"
      "experiment = besov\n"
      "grid = 32   # band limit\n"
      "eps = 0.4, 0.2,0.1\n"
      "s = 2\n"
      "horizon = log:0.5\n"
      "profile = single_mode_plus_constant:0.25\n"
      "seed = 9\n"
      "threads = 2\n"
      "richardson = false\n"
      "output_dir = results/x\n");
  EXPECT_EQ(c.experiment, Experiment::BesovBound);
  EXPECT_EQ(c.grid.max_mode, 32);
  EXPECT_EQ(c.grid.padded_len, make_grid(32).padded_len);
  EXPECT_EQ(c.eps_list, (std::vector<double>{0.4, 0.2, 0.1}));
  EXPECT_EQ(c.s, 2.0);
  EXPECT_DOUBLE_EQ(std::get<horizon::LogHorizon>(c.horizon).c, 0.5);
  EXPECT_DOUBLE_EQ(std::get<profile::SingleModePlusConstant>(c.profile).delta, 0.25);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.threads, 2);
  EXPECT_FALSE(c.richardson);
  EXPECT_EQ(c.output_dir, "results/x");
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse("bogus = 1\n"), config_error);
  EXPECT_THROW(parse("eps 0.1\n"), config_error);
  EXPECT_THROW(parse("s = abc\n"), config_error);
  EXPECT_THROW(parse("s = 1.5x\n"), config_error);
  EXPECT_THROW(parse("horizon = weekly:3\n"), config_error);
  EXPECT_THROW(parse("profile = gaussian:1\n"), config_error);
  EXPECT_THROW(parse("experiment = everything\n"), config_error);
  EXPECT_THROW(parse("grid = 0\n"), config_error);
  EXPECT_THROW(parse("grid = 8\npadded_len = 20\n"), config_error);
  try {
    parse("s = 1\n\nthreads = many\n");
    FAIL();
  } catch (const config_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Config, Validation) {
  ExperimentConfig c = default_config(Experiment::Approximation);
  EXPECT_NO_THROW(validate(c));
  c.eps_list = {0.1, 0.2};
  EXPECT_THROW(validate(c), config_error);
  c.eps_list = {};
  EXPECT_THROW(validate(c), config_error);
  c.eps_list = {0.1, -0.1};
  EXPECT_THROW(validate(c), config_error);
  c = default_config(Experiment::Approximation);
  c.s = 1.0;
  EXPECT_THROW(validate(c), config_error);
  c = default_config(Experiment::Inflation);
  c.deltas = {0.5, 1.0};
  EXPECT_THROW(validate(c), config_error);
  c = default_config(Experiment::NormalFormCheck);
  c.grid = make_grid(40);
  EXPECT_THROW(validate(c), config_error);
  c = default_config(Experiment::ResonanceAudit);
  c.resonance_box = 41;
  EXPECT_THROW(validate(c), config_error);
  // experiments without an eps sweep ignore the list
  c = default_config(Experiment::Strichartz);
  c.eps_list = {};
  EXPECT_NO_THROW(validate(c));
}

TEST(Horizon, Rules) {
  EXPECT_DOUBLE_EQ(horizon_time(horizon::FixedTime{7.0}, 0.1), 7.0);
  EXPECT_NEAR(horizon_time(horizon::InverseSquare{2.0}, 0.1), 200.0, 1e-9);
  EXPECT_NEAR(horizon_time(horizon::LogHorizon{1.0}, 0.1), 100.0 * std::log(10.0), 1e-9);
}

TEST(Profiles, SingleModePlusConstant) {
  const TorusField g = profile_field(profile::SingleModePlusConstant{0.5}, make_grid(8), 1);
  EXPECT_EQ(g[0], complex(0.5));
  EXPECT_EQ(g[1], complex(1.0));
  EXPECT_NEAR(norm(g, NormKind::L2()), std::sqrt(1.25), 1e-15);
}

TEST(Profiles, RandomDecayIsSeededAndNormalized) {
  ExperimentConfig c = default_config(Experiment::Approximation);
  c.grid = make_grid(32);
  c.amplitude = 0.7;
  const TorusField a = normalized_profile(c);
  EXPECT_NEAR(norm(a, NormKind::Hs(c.s)), 0.7, 1e-14);
  EXPECT_EQ(a, normalized_profile(c));
  for (int k = 1; k <= 8; ++k) EXPECT_NEAR(std::abs(a[k]) / std::abs(a[0]), std::pow(1.0 + k, -2.0), 1e-12);
  for (int k = 9; k <= 32; ++k) EXPECT_EQ(a[k], complex(0.0));
  for (int k = -32; k < 0; ++k) EXPECT_EQ(a[k], complex(0.0));
  c.seed = 2;
  EXPECT_FALSE(a == normalized_profile(c));
}

TEST(Profiles, CustomFile) {
  const auto path = std::filesystem::temp_directory_path() / "halfwave_profile_test.txt";
  {
    std::ofstream out(path);
    out << "# k re im\n0 0.5 0\n\n2 0 -1\n";
  }
  const TorusField g = profile_field(profile::Custom{path.string()}, make_grid(4), 0);
  EXPECT_EQ(g[0], complex(0.5));
  EXPECT_EQ(g[2], complex(0.0, -1.0));
  EXPECT_EQ(g[1], complex(0.0));
  {
    std::ofstream out(path);
    out << "9 1 0\n";
  }
  EXPECT_THROW(profile_field(profile::Custom{path.string()}, make_grid(4), 0), config_error);
  std::filesystem::remove(path);
  EXPECT_THROW(profile_field(profile::Custom{path.string()}, make_grid(4), 0), config_error);
}

TEST(ParallelMap, KeepsOrderAndPropagatesErrors) {
  const std::function<int(std::size_t)> sq = [](std::size_t i) { return static_cast<int>(i * i); };
  const auto out = parallel_map<int>(50, 4, sq);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
  const std::function<int(std::size_t)> bad = [](std::size_t i) -> int {
    if (i == 7) throw std::runtime_error("boom");
    return 0;
  };
  EXPECT_THROW(parallel_map<int>(20, 3, bad), std::runtime_error);
}

TEST(Strichartz, SingleModeExample) {
  // f = 1 + e^{ix}: mean of |f|^4 is 6 and ||f||_{H^{s/2}}^2 = 1 + 2^{s/2}.
  for (double s : {0.0, 0.25, 0.5}) EXPECT_NEAR(strichartz_ratio(1, s), 6.0 / std::pow(1.0 + std::pow(2.0, s / 2), 2), 1e-13);
  EXPECT_THROW(strichartz_ratio(0, 0.0), std::invalid_argument);
}

TEST(Strichartz, SmallSweep) {
  ExperimentConfig c = default_config(Experiment::Strichartz);
  c.n_list = {8, 16, 32, 64};
  const SweepResult r = run_strichartz(c);
  EXPECT_EQ(r.rows.size(), 12u);
  EXPECT_TRUE(r.pass());
  for (const auto& row : r.rows) EXPECT_EQ(row.dt, 0.0);
}

TEST(Resonances, SmallAuditPasses) {
  ExperimentConfig c = default_config(Experiment::ResonanceAudit);
  c.resonance_box = 6;
  const SweepResult r = run_resonances(c);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.rows.size(), 14u);
  EXPECT_EQ(r.rows[0].value, 1.0);  // K = 0: only (0,0,0,0)
}

TEST(Decoupling, DeterministicAcrossThreadCounts) {
  ExperimentConfig c = small_decoupling();
  c.threads = 1;
  const std::string one = csv_of(run_decoupling(c));
  c.threads = 3;
  const std::string three = csv_of(run_decoupling(c));
  EXPECT_EQ(one, three);
  EXPECT_EQ(one.substr(0, one.find('\n')), csv_header);
}

TEST(Decoupling, RowsCarryStepAndRichardson) {
  const SweepResult r = run_decoupling(small_decoupling());
  ASSERT_EQ(r.rows.size(), 3u);
  for (const auto& row : r.rows) {
    EXPECT_GT(row.dt, 0.0);
    EXPECT_GT(row.richardson, 0.0);
    EXPECT_LT(row.richardson, 1e-6);
    EXPECT_NEAR(row.horizon, 5.0, 1e-12);
    EXPECT_GT(row.value, 0.0);
  }
  ASSERT_NE(r.fit("slope"), nullptr);
  EXPECT_FALSE(r.numerical_failure());
}

TEST(Decoupling, RejectsNonAnalyticProfile) {
  const auto path = std::filesystem::temp_directory_path() / "halfwave_profile_neg.txt";
  {
    std::ofstream out(path);
    out << "-1 1 0\n";
  }
  ExperimentConfig c = small_decoupling();
  c.profile = profile::Custom{path.string()};
  EXPECT_THROW(run_decoupling(c), config_error);
  std::filesystem::remove(path);
}

TEST(Sweep, RichardsonFailureIsLoud) {
  ExperimentConfig c = small_decoupling();
  c.richardson_tolerance = 1e-18;
  const SweepResult r = run_decoupling(c);
  EXPECT_TRUE(r.numerical_failure());
  EXPECT_FALSE(r.pass());
}

TEST(Sweep, TimeBudgetFlagsPartialRows) {
  ExperimentConfig c = small_decoupling();
  c.horizon = horizon::FixedTime{1000.0};
  c.time_budget = 1e-9;
  const SweepResult r = run_decoupling(c);
  EXPECT_TRUE(r.partial);
  for (const auto& row : r.rows) {
    EXPECT_TRUE(row.partial);
    EXPECT_LT(row.horizon, 1000.0);
    EXPECT_EQ(row.richardson, 0.0);
  }
}

TEST(Approximation, GaugeBookkeepingAndSmallSweep) {
  ExperimentConfig c = default_config(Experiment::Approximation);
  c.grid = make_grid(16);
  c.eps_list = {0.4, 0.2, 0.1};
  const SweepResult r = run_approximation(c);
  bool saw_gap = false;
  for (const auto& ch : r.checks)
    if (ch.name == "gauge_gap") {
      saw_gap = true;
      EXPECT_TRUE(ch.pass) << ch.value;
    }
  EXPECT_TRUE(saw_gap);
  ASSERT_NE(r.fit("slope"), nullptr);
  EXPECT_GT(r.fit("slope")->fit.slope, 2.5);
}

TEST(Approximation, SzegoTransportIsTranslatedSzego) {
  const GridSpec g = make_grid(16);
  const TorusField w0 = halfwave::testing::random_decay(g, 8, 4, 0.6);
  StepperConfig cfg;
  cfg.dt = 0.005;
  const double T = 3.0;
  const TorusField w = evolve(problems::SzegoPlain{}, w0, T, cfg).state;
  const TorusField v = evolve(problems::SzegoTransport{1.0, 0.0}, w0, T, cfg).state;
  TorusField shifted = w;
  for (int k = 0; k <= 16; ++k) shifted[k] *= std::polar(1.0, -k * T);
  EXPECT_LT(max_coefficient_difference(v, shifted), 1e-8);
}

TEST(Spectrum, SingleModeIsExactlyConserved) {
  ExperimentConfig c = default_config(Experiment::SpectrumConservation);
  c.grid = make_grid(16);
  c.horizon = horizon::FixedTime{5.0};
  c.profile = profile::RandomDecay{50.0};  // numerically a single mode at k = 0
  const SweepResult r = run_spectrum(c);
  for (const auto& ch : r.checks) EXPECT_LT(ch.value, 1e-12) << ch.name;
}

TEST(Inflation, SmallRunHasRows) {
  ExperimentConfig c = default_config(Experiment::Inflation);
  c.grid = make_grid(128);
  c.richardson = false;
  const SweepResult r = run_inflation(c);
  EXPECT_EQ(r.rows.size(), 9u);
  // the pole parameter approaches the unit circle as delta shrinks
  std::vector<double> gaps;
  for (const auto& row : r.rows)
    if (row.series == "one_minus_p2") gaps.push_back(row.value);
  ASSERT_EQ(gaps.size(), 3u);
  EXPECT_GT(gaps[0], gaps[1]);
  EXPECT_GT(gaps[1], gaps[2]);
}

TEST(Report, CsvAndSummary) {
  SweepResult r;
  r.experiment = Experiment::Strichartz;
  r.rows.push_back({"s=0", 8, 0.5, 0, 0, 0, false, 1.5});
  r.rows.push_back({"a,b", 16, 0.25, 1, 0.01, 1e-9, true, 0.0});
  r.check("x", 1.0, 0.0, 2.0);
  const std::string csv = csv_of(r);
  EXPECT_EQ(csv,
            "series,x,value,horizon,dt,richardson,partial\n"
            "s=0,8,0.5,0,0,0,0\n"
            "\"a,b\",16,0.25,1,0.01,1.0000000000000001e-09,1\n");
  const auto j = summary_json(default_config(Experiment::Strichartz), r);
  EXPECT_EQ(j["experiment"], "strichartz");
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["checks"][0]["name"], "x");
  EXPECT_EQ(j["runtime_seconds"].size(), 1u);
}
