// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration, memory model, run reports and the driver that
// executes a (frequency, subdomains, method, batch) sweep.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ddlab/oras.hpp"
#include "ddlab/osm.hpp"
#include "ddlab/tuning.hpp"

namespace ddlab {

enum class Precision { fp32, fp64 };
/// Bytes per complex scalar: 8 for fp32, 16 for fp64.
int bytes_per_scalar(Precision p);

struct ExperimentConfig {
  ProblemSpec problem;  // frequency and subdomains are overridden by the lists below
  std::vector<double> frequencies{1.0};
  std::vector<int> subdomain_counts{1};
  std::vector<Method> methods{Method::oras, Method::osm};
  std::string params_mode = "fixed";  // fixed | optimize
  TransmissionParams params = TransmissionParams::second(1.0, 0.0);
  std::vector<int> batch_sizes{1};
  double tol = 1e-4;
  int restart = 50;
  int max_iters = 1000;
  Precision precision = Precision::fp64;
  std::string output_dir;
  Index dof_cap = 200000;
  bool compare_direct = true;

  /// Flat "key = value" lines; '#' starts a comment; lists are comma-separated.
  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig load(const std::filesystem::path& path);
  void validate() const;
};

/// "1.5", "-2", "0.5+1i", "1-0.25i" or "0.5i".
Complex parse_complex(const std::string& text);

struct SubdomainMemory {
  Index local_length = 0;  // Krylov vector entries held by this subdomain
  std::size_t factor_bytes = 0;
  std::size_t peak_bytes = 0;
  std::size_t krylov_bytes = 0;
};

struct MemoryEstimate {
  std::vector<SubdomainMemory> subdomains;
  int width = 0;
  int restart = 0;
  int scalar_bytes = 0;
  std::size_t total_factor_bytes = 0;
  std::size_t total_peak_bytes = 0;
  std::size_t total_krylov_bytes = 0;
  Index global_length = 0;  // length of the vectors GMRES iterates on
  double min_krylov_mib = 0, mean_krylov_mib = 0, max_krylov_mib = 0;
  Index min_length = 0, max_length = 0;
  double mean_length = 0;
};

/// local_length * width * restart * bytes_per_scalar.
std::size_t krylov_bytes(Index local_length, int width, int restart, Precision precision);
double to_mib(std::size_t bytes);

/// ORAS: each subdomain holds its overlapping local vector.
MemoryEstimate estimate_memory(const OrasContext& ctx, int width, int restart, Precision precision);
/// OSM: each subdomain holds its outgoing interface segments.
MemoryEstimate estimate_memory(const OsmContext& ctx, int width, int restart, Precision precision);

struct ReportRow {
  double frequency = 0;
  Index dofs = 0;
  int subdomains = 0;
  std::string method;
  int batch = 0;
  int order = 0;
  Complex alpha_hat{0.0};
  Complex beta_hat{0.0};
  int iterations = 0;  // max over right-hand sides
  double mean_iterations = 0;
  double time_solve = 0;
  double time_ortho = 0;
  double time_spmm = 0;
  double time_total = 0;
  double core_seconds = 0;  // wall time x workers
  Index krylov_length = 0;
  double krylov_mib = 0;   // batch width x restart, configured precision, largest subdomain
  double factor_mib = 0;   // largest subdomain
  double peak_mib = 0;     // largest subdomain
  double l2_error = -1;    // vs direct solve; -1 when not computed
  std::string status = "ok";

  bool operator==(const ReportRow&) const = default;
};

struct RunReport {
  std::vector<ReportRow> rows;
  bool all_ok() const;
  bool operator==(const RunReport&) const = default;
};

void write_csv(const RunReport& report, std::ostream& out);
/// Throws std::runtime_error naming the path on I/O failure.
void write_csv(const RunReport& report, const std::filesystem::path& path);
RunReport parse_csv(std::istream& in);

/// Runs every combination; failures are recorded in the row status and the
/// sweep continues. Residual histories go to output_dir when set.
RunReport run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

}  // namespace ddlab
