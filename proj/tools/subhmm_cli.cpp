// Command-line front end: simulate, fit, predict, bench and oracle.

#include "subhmm/subhmm.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <complex>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

using subhmm::io::Json;

int report_error(std::string_view code, const std::string& message, int status) {
  std::cerr << Json{{"error", code}, {"message", message}}.dump() << "\n";
  return status;
}

subhmm::HmmModel load_model(const std::string& spec) { return subhmm::experiments::resolve_system(spec); }

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    subhmm::io::write_text(path, text);
  }
}

Json sorted_spectrum(const subhmm::Matrix& m) {
  const Eigen::VectorXcd ev = m.eigenvalues();
  std::vector<std::complex<double>> v(ev.data(), ev.data() + ev.size());
  std::sort(v.begin(), v.end(), [](auto a, auto b) { return a.real() > b.real(); });
  Json out = Json::array();
  for (auto z : v) {
    if (std::abs(z.imag()) < 1e-12)
      out.push_back(z.real());
    else
      out.push_back({z.real(), z.imag()});
  }
  return out;
}

Json run_oracles() {
  using namespace subhmm;
  namespace io = subhmm::io;
  Json out;
  const auto a1 = fixtures::a1c1();
  const auto info1 = stationary_info(a1);
  out["a1c1"]["pi"] = io::vector_to_json(info1.pi);
  out["a1c1"]["S"] = io::matrix_to_json(info1.S);
  out["a1c1"]["R"] = io::matrix_to_json(info1.R);
  out["a1c1"]["crossCov0"] = io::matrix_to_json(cross_cov(a1, 0));
  out["a1c1"]["crossCov1"] = io::matrix_to_json(cross_cov(a1, 1));
  out["a1c1"]["gamma1Pinv"] = io::matrix_to_json(structured_pinv(theoretical_moments(a1, 1).G, 2, 1));
  out["a3c3"]["pi"] = io::vector_to_json(stationary_info(fixtures::a3c3()).pi);

  for (auto name : fixtures::kNames) {
    const auto model = fixtures::by_name(name);
    const auto gain = riccati_gain(model);
    Json& sys = out["systems"][std::string(name)];
    sys["eigA"] = sorted_spectrum(model.A());
    sys["eigClosedLoop"] = sorted_spectrum(model.A() - gain.K * model.C());
    sys["K"] = io::matrix_to_json(gain.K);
    sys["V"] = io::matrix_to_json(gain.V);
    sys["riccatiIterations"] = gain.iterations;
    sys["spectralRadiusJ"] = detail::spectral_radius(gain.J);
    const Matrix beta8 = beta_hat(theoretical_moments(model, 8));
    sys["betaSingularValuesK8"] = io::vector_to_json(truncated_svd(beta8, 0).allSigma.head(model.n() + 1));
    Json decay = Json::array();
    for (int k : {4, 8, 12, 16, 20}) {
      const auto tf = true_factors(model, gain.K, k);
      const Matrix beta = beta_hat(theoretical_moments(model, k));
      decay.push_back({k, detail::spectral_norm(beta - tf.O * tf.K)});
    }
    sys["betaMinusOKNorm"] = decay;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subspace estimation and linear prediction for finite hidden Markov models"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "simulate an observation sequence");
  std::string sim_model, sim_out;
  std::int64_t sim_len = 1000;
  std::uint64_t sim_seed = 1;
  sim->add_option("--model", sim_model, "fixture name (a1c1, a2c2, a3c3) or model JSON file")->required();
  sim->add_option("-T,--length", sim_len, "number of observations")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--out", sim_out, "output symbol file (default stdout)");

  auto* fit = app.add_subcommand("fit", "fit a system to a symbol file");
  std::string fit_in, fit_out;
  int fit_n = 2, fit_k = 8;
  fit->add_option("--symbols", fit_in, "input symbol file")->required();
  fit->add_option("-n,--order", fit_n, "number of hidden states")->check(CLI::PositiveNumber);
  fit->add_option("-k,--horizon", fit_k, "Hankel horizon")->check(CLI::PositiveNumber);
  fit->add_option("--out", fit_out, "output system file (default stdout)");

  auto* pred = app.add_subcommand("predict", "predictive distribution after a history");
  std::string pred_system, pred_history;
  int pred_m = 1;
  pred->add_option("--system", pred_system, "estimated system file, model file or fixture name")->required();
  pred->add_option("--history", pred_history, "symbol file with the observed history")->required();
  pred->add_option("-m,--horizon", pred_m, "steps ahead")->check(CLI::PositiveNumber);

  auto* bench = app.add_subcommand("bench", "run the prediction benchmark");
  std::string bench_config, bench_out;
  int bench_reps = 0, bench_threads = -1;
  bool paper_scale = false;
  bench->add_option("--config", bench_config, "benchmark config JSON")->required();
  bench->add_option("--out", bench_out, "output prefix (writes <prefix>.csv and <prefix>.json)");
  bench->add_option("--replications", bench_reps, "override replication count");
  bench->add_option("--threads", bench_threads, "worker threads (0 = all cores)");
  bench->add_flag("--paper-scale", paper_scale, "250 replications and 5000 evaluation points");

  app.add_subcommand("oracle", "print reference values computed from the bundled systems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("Usage", e.what(), 2);
  }

  try {
    if (sim->parsed()) {
      const auto model = load_model(sim_model);
      const auto traj = subhmm::simulate(model, sim_len, sim_seed);
      emit(sim_out, subhmm::io::format_symbols({model.ell(), traj.observations}));
    } else if (fit->parsed()) {
      const auto data = subhmm::io::read_symbols(fit_in);
      const auto est = subhmm::subspace_fit(data.symbols, data.ell, fit_n, fit_k);
      const Json doc = subhmm::io::system_to_json(est);
      emit(fit_out, doc.dump(2) + "\n");
      if (!fit_out.empty() && fit_out != "-") std::cout << doc.at("diagnostics").dump() << "\n";
    } else if (pred->parsed()) {
      const auto history = subhmm::io::read_symbols(pred_history);
      Json out{{"m", pred_m}};
      const bool is_file = std::filesystem::exists(pred_system);
      const Json doc = is_file ? subhmm::io::parse_json(subhmm::io::read_text(pred_system), pred_system) : Json{};
      if (is_file && doc.contains("K")) {
        auto sys = std::make_shared<const subhmm::LinearSystem>(subhmm::io::system_from_json(doc));
        if (sys->C.rows() != history.ell) return report_error("InvalidArgument", "alphabet mismatch", 1);
        const auto p = subhmm::linear_predict(subhmm::PredictorState(sys).absorb(history.symbols), pred_m);
        out["prediction"] = subhmm::io::vector_to_json(p.probs);
        out["hasNegative"] = p.hasNegative;
      } else {
        const auto model = is_file ? subhmm::io::model_from_json(doc) : load_model(pred_system);
        if (model.ell() != history.ell) return report_error("InvalidArgument", "alphabet mismatch", 1);
        auto sys = std::make_shared<const subhmm::LinearSystem>(
            subhmm::true_linear_system(model, subhmm::riccati_gain(model)));
        const auto lin = subhmm::linear_predict(subhmm::PredictorState(sys).absorb(history.symbols), pred_m);
        out["prediction"] = subhmm::io::vector_to_json(lin.probs);
        out["optimal"] = subhmm::io::vector_to_json(subhmm::optimal_predict(model, history.symbols, pred_m));
      }
      std::cout << out.dump() << "\n";
    } else if (bench->parsed()) {
      auto cfg = subhmm::experiments::config_from_json(
          subhmm::io::parse_json(subhmm::io::read_text(bench_config), bench_config));
      if (paper_scale) {
        cfg.replications = 250;
        cfg.outOfSampleLen = 5000;
      }
      if (bench_reps > 0) cfg.replications = bench_reps;
      if (bench_threads >= 0) cfg.threads = bench_threads;
      if (!bench_out.empty()) cfg.outputPath = bench_out;
      const auto report = subhmm::experiments::run_benchmark(cfg);
      const std::string csv = subhmm::experiments::report_csv(report);
      subhmm::io::write_text(cfg.outputPath + ".csv", csv);
      subhmm::io::write_text(cfg.outputPath + ".json", subhmm::experiments::report_json(report).dump(2) + "\n");
      std::cout << csv;
    } else {
      std::cout << run_oracles().dump(2) << "\n";
    }
  } catch (const subhmm::Error& e) {
    return report_error(subhmm::to_string(e.code()), e.what(), 1);
  } catch (const std::exception& e) {
    return report_error("Internal", e.what(), 1);
  }
  return 0;
}
