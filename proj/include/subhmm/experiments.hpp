#pragma once

#include "subhmm/core.hpp"
#include "subhmm/estimator.hpp"
#include "subhmm/fixtures.hpp"
#include "subhmm/hmm.hpp"
#include "subhmm/io.hpp"
#include "subhmm/predictor.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace subhmm::experiments {

struct GridPoint {
  std::int64_t T = 0;
  int k = 0;
};

// Centering vector of the fitted predictor: the training sample mean, or
// the model's stationary mean Cpi (a diagnostic that isolates the
// contribution of mean estimation error).
enum class MeanSource { Training, Population };

struct BenchmarkConfig {
  std::vector<std::string> systems;  // fixture names or model file paths
  std::vector<GridPoint> grid;
  int replications = 100;
  int outOfSampleLen = 2000;
  int burnIn = 50;
  std::vector<int> horizons{1};
  std::uint64_t seed = 1;
  std::string outputPath = "bench";
  int threads = 0;  // 0: hardware concurrency
  MeanSource meanSource = MeanSource::Training;
};

inline std::string to_string(MeanSource s) { return s == MeanSource::Training ? "training" : "population"; }

inline MeanSource mean_source_from_string(const std::string& s) {
  if (s == "training") return MeanSource::Training;
  if (s == "population") return MeanSource::Population;
  throw Error(ErrorCode::InvalidArgument, "meanSource must be 'training' or 'population'");
}

/// Evaluation series use seeds offset by this constant so they never
/// coincide with training seeds (base + r) for any realistic base.
inline constexpr std::uint64_t kEvalSeedOffset = 0x5eed0000'00000000ULL;

inline std::uint64_t training_seed(const BenchmarkConfig& cfg, int r) { return cfg.seed + static_cast<std::uint64_t>(r); }
inline std::uint64_t evaluation_seed(const BenchmarkConfig& cfg, int r) {
  return cfg.seed + kEvalSeedOffset + static_cast<std::uint64_t>(r);
}

struct CellResult {
  std::string system;
  std::int64_t T = 0;
  int k = 0;
  int m = 1;
  double meanErrVsLinear = 0.0;
  double meanErrVsOptimal = 0.0;
  double stderrLinear = 0.0;
  double stderrOptimal = 0.0;
  std::int64_t negativeCount = 0;
  int replications = 0;  // successful
  int failed = 0;
  std::vector<std::string> failures;
  double wallSeconds = 0.0;
  std::vector<double> perReplicationLinear;
  std::vector<double> perReplicationOptimal;
};

struct BenchmarkReport {
  BenchmarkConfig config;
  std::vector<CellResult> cells;

  const CellResult* find(const std::string& system, std::int64_t T, int k, int m = 1) const {
    for (const auto& c : cells)
      if (c.system == system && c.T == T && c.k == k && c.m == m) return &c;
    return nullptr;
  }
};

inline void validate(const BenchmarkConfig& cfg) {
  detail::require(!cfg.systems.empty(), "config lists no systems");
  detail::require(!cfg.grid.empty(), "config grid is empty");
  detail::require(cfg.replications >= 1, "replications must be >= 1");
  detail::require(cfg.outOfSampleLen >= 1, "outOfSampleLen must be >= 1");
  detail::require(cfg.burnIn >= 0, "burnIn must be >= 0");
  detail::require(!cfg.horizons.empty(), "no prediction horizons");
  for (int m : cfg.horizons) detail::require(m >= 1, "horizons must be >= 1");
  for (const auto& g : cfg.grid) detail::require(g.T >= 1 && g.k >= 1, "grid entries need T >= 1 and k >= 1");
}

inline HmmModel resolve_system(const std::string& name) {
  if (fixtures::exists(name)) return fixtures::by_name(name);
  if (std::filesystem::exists(name)) return io::read_model(name);
  throw Error(ErrorCode::InvalidArgument, "unknown system '" + name + "'");
}

/// Runs `task(i)` for i in [0, count) on up to `threads` workers.
template <typename Task>
void parallel_for(int count, int threads, Task&& task) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

namespace internal {

struct ReplicationOutcome {
  bool ok = false;
  std::string error;
  std::vector<double> errLinear;   // per horizon, mean over time points
  std::vector<double> errOptimal;
  std::vector<std::int64_t> negatives;
};

inline ReplicationOutcome run_replication(const HmmModel& model, const std::shared_ptr<const LinearSystem>& truth,
                                          const BenchmarkConfig& cfg, GridPoint g, int r) {
  ReplicationOutcome out;
  const std::size_t nh = cfg.horizons.size();
  out.errLinear.assign(nh, 0.0);
  out.errOptimal.assign(nh, 0.0);
  out.negatives.assign(nh, 0);
  try {
    const auto train = simulate(model, g.T, training_seed(cfg, r));
    const auto est = subspace_fit(train.observations, model.ell(), model.n(), g.k);
    const auto evaluation = simulate(model, cfg.burnIn + cfg.outOfSampleLen, evaluation_seed(cfg, r));

    const Vector mean = cfg.meanSource == MeanSource::Training ? est.meanY : Vector(model.C() * stationary_info(model).pi);
    PredictorState fitted(std::make_shared<const LinearSystem>(est.Ahat, est.Chat, est.Khat, mean, true));
    PredictorState linear(truth);
    ForwardFilter filter(model);
    const auto& ys = evaluation.observations;
    for (std::size_t t = 0; t < ys.size(); ++t) {
      if (t >= static_cast<std::size_t>(cfg.burnIn)) {
        for (std::size_t h = 0; h < nh; ++h) {
          const int m = cfg.horizons[h];
          const auto est_pred = linear_predict(fitted, m);
          const auto lin_pred = linear_predict(linear, m);
          const Vector opt_pred = predict_from_posterior(model, filter.posterior(), m);
          out.errLinear[h] += l1_distance(est_pred.probs, lin_pred.probs);
          out.errOptimal[h] += l1_distance(est_pred.probs, opt_pred);
          if (est_pred.hasNegative) ++out.negatives[h];
        }
      }
      fitted = fitted.absorb(ys[t]);
      linear = linear.absorb(ys[t]);
      filter.absorb(ys[t]);
    }
    for (std::size_t h = 0; h < nh; ++h) {
      out.errLinear[h] /= cfg.outOfSampleLen;
      out.errOptimal[h] /= cfg.outOfSampleLen;
    }
    out.ok = true;
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace internal

/// For every (system, T, k): fit on simulated training data, then score the
/// fitted 1..m-step linear predictor against the true linear predictor and
/// the exact filter-based predictor along an independent evaluation series.
/// Replications run concurrently; aggregation is in replication order.
inline BenchmarkReport run_benchmark(const BenchmarkConfig& cfg) {
  validate(cfg);
  BenchmarkReport report;
  report.config = cfg;
  for (const auto& name : cfg.systems) {
    const HmmModel model = resolve_system(name);
    const auto truth = std::make_shared<const LinearSystem>(true_linear_system(model, riccati_gain(model)));
    for (const auto& g : cfg.grid) {
      detail::require(g.k * (model.ell() - 1) >= model.n() - 1,
                      "grid point k=" + std::to_string(g.k) + " cannot carry order n for " + name);
      const auto start = std::chrono::steady_clock::now();
      std::vector<internal::ReplicationOutcome> outcomes(static_cast<std::size_t>(cfg.replications));
      parallel_for(cfg.replications, cfg.threads,
                   [&](int r) { outcomes[static_cast<std::size_t>(r)] = internal::run_replication(model, truth, cfg, g, r); });
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

      for (std::size_t h = 0; h < cfg.horizons.size(); ++h) {
        CellResult cell;
        cell.system = name;
        cell.T = g.T;
        cell.k = g.k;
        cell.m = cfg.horizons[h];
        cell.wallSeconds = wall;
        for (std::size_t r = 0; r < outcomes.size(); ++r) {
          const auto& o = outcomes[r];
          if (!o.ok) {
            ++cell.failed;
            cell.failures.push_back("replication " + std::to_string(r) + ": " + o.error);
            continue;
          }
          cell.perReplicationLinear.push_back(o.errLinear[h]);
          cell.perReplicationOptimal.push_back(o.errOptimal[h]);
          cell.negativeCount += o.negatives[h];
        }
        cell.replications = static_cast<int>(cell.perReplicationLinear.size());
        cell.meanErrVsLinear = internal::mean_of(cell.perReplicationLinear);
        cell.meanErrVsOptimal = internal::mean_of(cell.perReplicationOptimal);
        cell.stderrLinear = internal::stderr_of(cell.perReplicationLinear);
        cell.stderrOptimal = internal::stderr_of(cell.perReplicationOptimal);
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

inline BenchmarkConfig config_from_json(const io::Json& j) {
  BenchmarkConfig cfg;
  try {
    cfg.systems = j.at("systems").get<std::vector<std::string>>();
    for (const auto& g : j.at("grid")) cfg.grid.push_back({g.at(0).get<std::int64_t>(), g.at(1).get<int>()});
    cfg.replications = j.value("replications", cfg.replications);
    cfg.outOfSampleLen = j.value("outOfSampleLen", cfg.outOfSampleLen);
    cfg.burnIn = j.value("burnIn", cfg.burnIn);
    cfg.horizons = j.value("horizons", cfg.horizons);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.outputPath = j.value("outputPath", cfg.outputPath);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("meanSource")) cfg.meanSource = mean_source_from_string(j.at("meanSource").get<std::string>());
  } catch (const io::Json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed benchmark config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

inline io::Json config_to_json(const BenchmarkConfig& cfg) {
  io::Json grid = io::Json::array();
  for (const auto& g : cfg.grid) grid.push_back({g.T, g.k});
  return io::Json{{"systems", cfg.systems},       {"grid", grid},
                  {"replications", cfg.replications}, {"outOfSampleLen", cfg.outOfSampleLen},
                  {"burnIn", cfg.burnIn},         {"horizons", cfg.horizons},
                  {"seed", cfg.seed},             {"outputPath", cfg.outputPath},
                  {"threads", cfg.threads},       {"meanSource", to_string(cfg.meanSource)}};
}

inline std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << std::fixed << v;
  return ss.str();
}

inline std::string report_csv(const BenchmarkReport& report) {
  std::string out = "system,T,k,m,err_lin,err_opt,stderr_lin,stderr_opt,neg_count\n";
  for (const auto& c : report.cells) {
    out += c.system + "," + std::to_string(c.T) + "," + std::to_string(c.k) + "," + std::to_string(c.m) + "," +
           format_double(c.meanErrVsLinear) + "," + format_double(c.meanErrVsOptimal) + "," +
           format_double(c.stderrLinear) + "," + format_double(c.stderrOptimal) + "," +
           std::to_string(c.negativeCount) + "\n";
  }
  return out;
}

inline io::Json report_json(const BenchmarkReport& report) {
  io::Json cells = io::Json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"system", c.system},
                     {"T", c.T},
                     {"k", c.k},
                     {"m", c.m},
                     {"meanErrVsLinear", c.meanErrVsLinear},
                     {"meanErrVsOptimal", c.meanErrVsOptimal},
                     {"stderrLinear", c.stderrLinear},
                     {"stderrOptimal", c.stderrOptimal},
                     {"negativeCount", c.negativeCount},
                     {"replications", c.replications},
                     {"failed", c.failed},
                     {"failures", c.failures},
                     {"wallSeconds", c.wallSeconds}});
  }
  return io::Json{{"config", config_to_json(report.config)},
                  {"seedStreams",
                   {{"training", "seed + r"}, {"evaluation", "seed + " + std::to_string(kEvalSeedOffset) + " + r"}}},
                  {"cells", cells}};
}

}  // namespace subhmm::experiments
