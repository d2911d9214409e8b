#include "test_util.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

using namespace subhmm;
using namespace subhmm::experiments;

namespace {

BenchmarkConfig small_config() {
  BenchmarkConfig cfg;
  cfg.systems = {"a1c1", "a3c3"};
  cfg.grid = {{500, 3}, {1500, 5}};
  cfg.replications = 6;
  cfg.outOfSampleLen = 200;
  cfg.horizons = {1, 2};
  cfg.seed = 99;
  cfg.threads = 1;
  return cfg;
}

}  // namespace

TEST(Config, JsonRoundTrip) {
  auto cfg = small_config();
  cfg.meanSource = MeanSource::Population;
  const auto back = config_from_json(config_to_json(cfg));
  EXPECT_EQ(back.systems, cfg.systems);
  ASSERT_EQ(back.grid.size(), 2u);
  EXPECT_EQ(back.grid[1].T, 1500);
  EXPECT_EQ(back.grid[1].k, 5);
  EXPECT_EQ(back.replications, 6);
  EXPECT_EQ(back.outOfSampleLen, 200);
  EXPECT_EQ(back.horizons, cfg.horizons);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.meanSource, MeanSource::Population);
}

TEST(Config, Defaults) {
  const auto cfg = config_from_json(io::parse_json(R"({"systems":["a2c2"],"grid":[[1000,5]]})", "c"));
  EXPECT_EQ(cfg.replications, 100);
  EXPECT_EQ(cfg.outOfSampleLen, 2000);
  EXPECT_EQ(cfg.burnIn, 50);
  EXPECT_EQ(cfg.horizons, std::vector<int>{1});
  EXPECT_EQ(cfg.meanSource, MeanSource::Training);
}

TEST(Config, Validation) {
  EXPECT_THROW(config_from_json(io::parse_json(R"({"systems":[],"grid":[[1000,5]]})", "c")), Error);
  EXPECT_THROW(config_from_json(io::parse_json(R"({"systems":["a1c1"],"grid":[]})", "c")), Error);
  EXPECT_THROW(config_from_json(io::parse_json(R"({"systems":["a1c1"],"grid":[[10,1]],"replications":0})", "c")),
               Error);
  EXPECT_THROW(config_from_json(io::parse_json(R"({"systems":["a1c1"],"grid":[[10,1]],"meanSource":"x"})", "c")),
               Error);
  EXPECT_THROW(config_from_json(io::parse_json(R"({"grid":[[10,1]]})", "c")), Error);
}

TEST(Benchmark, RejectsUnknownSystem) {
  auto cfg = small_config();
  cfg.systems = {"nope"};
  EXPECT_THROW(run_benchmark(cfg), Error);
}

TEST(Benchmark, RejectsHorizonBelowRankBudget) {
  // Three states, two symbols: k = 1 gives k(ell-1) = 1 < n-1 = 2.
  const auto path = std::filesystem::temp_directory_path() / "subhmm_three_state.json";
  io::write_text(path, R"({"n":3,"ell":2,"A":[[0.8,0.1,0.1],[0.1,0.8,0.1],[0.1,0.1,0.8]],)"
                       R"("C":[[0.9,0.5,0.1],[0.1,0.5,0.9]]})");
  auto cfg = small_config();
  cfg.systems = {path.string()};
  cfg.grid = {{500, 1}};
  EXPECT_THROW(run_benchmark(cfg), Error);
  cfg.grid = {{500, 2}};
  cfg.replications = 2;
  EXPECT_NO_THROW(run_benchmark(cfg));
  std::filesystem::remove(path);
}

TEST(Benchmark, SeedStreamsDisjoint) {
  BenchmarkConfig cfg;
  cfg.seed = 20090701;
  for (int r = 0; r < 1000; ++r)
    for (int q = 0; q < 1000; q += 37) EXPECT_NE(training_seed(cfg, r), evaluation_seed(cfg, q));
}

TEST(Benchmark, DeterministicAcrossThreadCounts) {
  auto cfg = small_config();
  const auto one = run_benchmark(cfg);
  cfg.threads = 4;
  const auto four = run_benchmark(cfg);
  ASSERT_EQ(one.cells.size(), 8u);
  ASSERT_EQ(four.cells.size(), 8u);
  for (std::size_t i = 0; i < one.cells.size(); ++i) {
    EXPECT_EQ(one.cells[i].meanErrVsLinear, four.cells[i].meanErrVsLinear);
    EXPECT_EQ(one.cells[i].meanErrVsOptimal, four.cells[i].meanErrVsOptimal);
    EXPECT_EQ(one.cells[i].perReplicationLinear, four.cells[i].perReplicationLinear);
  }
  EXPECT_EQ(report_csv(one), report_csv(four));
}

TEST(Benchmark, ReportShape) {
  const auto report = run_benchmark(small_config());
  for (const auto& c : report.cells) {
    EXPECT_GE(c.meanErrVsLinear, 0.0);
    EXPECT_GT(c.meanErrVsOptimal, 0.0);
    EXPECT_GE(c.stderrLinear, 0.0);
    EXPECT_EQ(c.replications + c.failed, 6);
    EXPECT_EQ(c.perReplicationLinear.size(), static_cast<std::size_t>(c.replications));
  }
  ASSERT_NE(report.find("a3c3", 1500, 5, 2), nullptr);
  EXPECT_EQ(report.find("a3c3", 1500, 6, 2), nullptr);

  std::istringstream csv(report_csv(report));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "system,T,k,m,err_lin,err_opt,stderr_lin,stderr_opt,neg_count");
  int rows = 0;
  while (std::getline(csv, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 8);
    ++rows;
  }
  EXPECT_EQ(rows, 8);

  const auto j = report_json(report);
  EXPECT_EQ(j.at("cells").size(), 8u);
  EXPECT_TRUE(j.contains("seedStreams"));
  EXPECT_EQ(j.at("config").at("seed"), 99u);
}

TEST(Benchmark, MeanMatchesReplicationAverage) {
  const auto report = run_benchmark(small_config());
  const auto* c = report.find("a1c1", 500, 3, 1);
  ASSERT_NE(c, nullptr);
  double s = 0.0;
  for (double v : c->perReplicationLinear) s += v;
  EXPECT_NEAR(c->meanErrVsLinear, s / c->replications, 1e-15);
}

TEST(Benchmark, FailedReplicationsAreCountedAndExcluded) {
  BenchmarkConfig cfg;
  cfg.systems = {"a1c1"};
  cfg.grid = {{1, 1}};  // a single observation cannot support a 2-state fit
  cfg.replications = 3;
  cfg.outOfSampleLen = 10;
  cfg.threads = 1;
  const auto report = run_benchmark(cfg);
  ASSERT_EQ(report.cells.size(), 1u);
  EXPECT_EQ(report.cells[0].failed, 3);
  EXPECT_EQ(report.cells[0].replications, 0);
  EXPECT_EQ(report.cells[0].failures.size(), 3u);
}

TEST(Benchmark, PopulationMeanSourceDiffers) {
  auto cfg = small_config();
  cfg.systems = {"a1c1"};
  cfg.grid = {{500, 3}};
  const auto training = run_benchmark(cfg);
  cfg.meanSource = MeanSource::Population;
  const auto population = run_benchmark(cfg);
  EXPECT_NE(training.cells[0].meanErrVsLinear, population.cells[0].meanErrVsLinear);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(1000, 4, [&](int i) { ++hits[static_cast<std::size_t>(i)]; });
  for (int h : hits) EXPECT_EQ(h, 1);
}
