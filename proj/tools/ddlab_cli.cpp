// SPDX-License-Identifier: Apache-2.0
//
// ddlab run|tune|calibrate|mem <config> [--out DIR] [--budget N]

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "ddlab/bench.hpp"

namespace fs = std::filesystem;
using namespace ddlab;

namespace {

ExperimentConfig load_config(const std::string& path, const std::string& out) {
  ExperimentConfig cfg = ExperimentConfig::load(path);
  if (!out.empty()) cfg.output_dir = out;
  return cfg;
}

ProblemSpec first_problem(const ExperimentConfig& cfg) {
  ProblemSpec spec = cfg.problem;
  spec.frequency = cfg.frequencies.front();
  spec.subdomains = cfg.subdomain_counts.front();
  return spec;
}

std::ofstream open_out(const ExperimentConfig& cfg, const std::string& name) {
  const fs::path dir = cfg.output_dir.empty() ? fs::path(".") : fs::path(cfg.output_dir);
  fs::create_directories(dir);
  std::ofstream f(dir / name);
  if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
  return f;
}

int cmd_run(const ExperimentConfig& cfg) {
  const RunReport report = run_experiment(cfg, &std::cerr);
  write_csv(report, std::cout);
  return report.all_ok() ? 0 : 1;
}

int cmd_tune(const ExperimentConfig& cfg, int budget) {
  const Problem problem(first_problem(cfg));
  const KrylovConfig kc{cfg.tol, cfg.restart, cfg.max_iters, 0};
  int rc = 0;
  for (const Method m : cfg.methods) {
    for (const int order : {0, 2}) {
      try {
        ParamGrid grid = ParamGrid::standard(order);
        grid.budget = budget;
        const TuningResult r = optimize_params(problem, m, grid, kc);
        auto f = open_out(cfg, std::string("tune_") + to_string(m) + "_order" + std::to_string(order) + ".csv");
        write_tuning_csv(r, f);
        std::cout << to_string(m) << " order " << order << ": alpha=" << r.best.alpha_hat << " beta=" << r.best.beta_hat
                  << " iterations=" << r.best_iterations << '\n';
      } catch (const std::exception& e) {
        std::cerr << to_string(m) << " order " << order << ": " << e.what() << '\n';
        rc = 1;
      }
    }
  }
  return rc;
}

int cmd_calibrate(const ExperimentConfig& cfg) {
  const Problem problem(first_problem(cfg));
  const MultiVector source = problem.sources().leftCols(1);
  const MultiVector reference = factorize(problem.a()).solve(source);
  const KrylovConfig kc{cfg.tol, cfg.restart, cfg.max_iters, 0};
  int rc = 0;
  for (const Method m : cfg.methods) {
    try {
      TransmissionParams params = cfg.params;
      if (cfg.params_mode == "optimize") params = optimize_params(problem, m, ParamGrid::standard(2), kc).best;
      const CalibrationCurve curve = calibrate_criterion(problem, m, params, 1e-8, source, reference, cfg.restart,
                                                         cfg.max_iters);
      auto f = open_out(cfg, "calibration_" + curve.label + ".csv");
      write_calibration_csv(curve, f);
      std::vector<double> res, err;
      for (const auto& p : curve.points) {
        res.push_back(p.residual);
        err.push_back(p.error);
      }
      std::cout << curve.label << ": points=" << curve.points.size()
                << " spearman=" << (res.size() > 1 ? spearman(res, err) : 1.0)
                << " error@1e-4=" << error_at_residual(curve, 1e-4) << '\n';
    } catch (const std::exception& e) {
      std::cerr << to_string(m) << ": " << e.what() << '\n';
      rc = 1;
    }
  }
  return rc;
}

int cmd_mem(const ExperimentConfig& cfg) {
  auto f = open_out(cfg, "memory.csv");
  f.precision(17);
  f << "frequency,subdomains,method,batch,global_length,min_length,mean_length,max_length,"
       "min_krylov_mib,mean_krylov_mib,max_krylov_mib,total_factor_mib,total_peak_mib\n";
  for (const double freq : cfg.frequencies) {
    for (const int n : cfg.subdomain_counts) {
      ProblemSpec spec = cfg.problem;
      spec.frequency = freq;
      spec.subdomains = n;
      const Problem problem(spec);
      for (const Method m : cfg.methods) {
        std::unique_ptr<OrasContext> oras;
        std::unique_ptr<OsmContext> osm;
        if (m == Method::oras)
          oras = std::make_unique<OrasContext>(
              build_oras(problem.mesh(), problem.dofs(), problem.overlap(), problem.k(), cfg.params, problem.a()));
        else
          osm = std::make_unique<OsmContext>(
              build_osm(problem.mesh(), problem.dofs(), problem.partition(), problem.k(), cfg.params));
        for (const int b : cfg.batch_sizes) {
          const MemoryEstimate e = oras ? estimate_memory(*oras, b, cfg.restart, cfg.precision)
                                        : estimate_memory(*osm, b, cfg.restart, cfg.precision);
          f << freq << ',' << n << ',' << to_string(m) << ',' << b << ',' << e.global_length << ',' << e.min_length
            << ',' << e.mean_length << ',' << e.max_length << ',' << e.min_krylov_mib << ',' << e.mean_krylov_mib << ','
            << e.max_krylov_mib << ',' << to_mib(e.total_factor_bytes) << ',' << to_mib(e.total_peak_bytes) << '\n';
          std::cout << "f=" << freq << " N=" << n << ' ' << to_string(m) << " batch=" << b
                    << " krylov_length=" << e.global_length << " max_krylov_mib=" << e.max_krylov_mib << '\n';
        }
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Helmholtz domain decomposition laboratory"};
  app.require_subcommand(1);
  std::string config, out;
  int budget = 0;
  const auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "Experiment configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory");
    return sub;
  };
  auto* run = add("run", "Run the configured method comparison sweep");
  auto* tune = add("tune", "Grid-search transmission coefficients");
  tune->add_option("--budget", budget, "Iteration cap per candidate (0 keeps max_iters)")->check(CLI::NonNegativeNumber);
  auto* calibrate = add("calibrate", "Record residual-versus-error curves");
  auto* mem = add("mem", "Print memory estimates");
  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = load_config(config, out);
    if (*run) return cmd_run(cfg);
    if (*tune) return cmd_tune(cfg, budget);
    if (*calibrate) return cmd_calibrate(cfg);
    if (*mem) return cmd_mem(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
