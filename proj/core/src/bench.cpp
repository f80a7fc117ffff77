// SPDX-License-Identifier: Apache-2.0

#include "ddlab/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace ddlab {

int bytes_per_scalar(Precision p) { return p == Precision::fp32 ? 8 : 16; }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  std::size_t pos = 0;
  const long v = std::stol(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return static_cast<int>(v);
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& value, F convert) {
  std::vector<T> out;
  for (const auto& item : split_list(value)) out.push_back(convert(item));
  return out;
}

}  // namespace

Complex parse_complex(const std::string& text) {
  static const std::regex pure_imag(R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*i\s*$)");
  static const std::regex full(
      R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(?:([+-])\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*i)?\s*$)");
  std::smatch m;
  if (std::regex_match(text, m, pure_imag)) return {0.0, std::stod(m[1].str())};
  if (std::regex_match(text, m, full)) {
    const double re = std::stod(m[1].str());
    double im = 0.0;
    if (m[2].matched) im = (m[2].str() == "-" ? -1.0 : 1.0) * std::stod(m[3].str());
    return {re, im};
  }
  throw std::invalid_argument("not a complex number: '" + text + "'");
}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  ExperimentConfig cfg;
  std::string alpha = "1", beta = "0";
  int order = 2;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "model") cfg.problem.model = value;
      else if (key == "velocity") cfg.problem.velocity = to_double(value);
      else if (key == "lx") cfg.problem.lx = to_double(value);
      else if (key == "ly") cfg.problem.ly = to_double(value);
      else if (key == "frequencies") cfg.frequencies = parse_list<double>(value, to_double);
      else if (key == "order") cfg.problem.order = to_int(value);
      else if (key == "ppw") cfg.problem.ppw = to_double(value);
      else if (key == "nx") cfg.problem.nx = to_int(value);
      else if (key == "ny") cfg.problem.ny = to_int(value);
      else if (key == "partition") cfg.problem.partition = value;
      else if (key == "subdomains") cfg.subdomain_counts = parse_list<int>(value, to_int);
      else if (key == "subdomains_y") cfg.problem.subdomains_y = to_int(value);
      else if (key == "methods") cfg.methods = parse_list<Method>(value, parse_method);
      else if (key == "params") cfg.params_mode = value;
      else if (key == "transmission_order") order = to_int(value);
      else if (key == "alpha") alpha = value;
      else if (key == "beta") beta = value;
      else if (key == "sources") cfg.problem.sources = to_int(value);
      else if (key == "source_depth") cfg.problem.source_depth = to_double(value);
      else if (key == "batch") cfg.batch_sizes = parse_list<int>(value, to_int);
      else if (key == "tol") cfg.tol = to_double(value);
      else if (key == "restart") cfg.restart = to_int(value);
      else if (key == "max_iters") cfg.max_iters = to_int(value);
      else if (key == "precision") {
        if (value == "single") cfg.precision = Precision::fp32;
        else if (value == "double") cfg.precision = Precision::fp64;
        else throw std::invalid_argument("precision must be single or double");
      } else if (key == "output") cfg.output_dir = value;
      else if (key == "dof_cap") cfg.dof_cap = to_int(value);
      else if (key == "compare_direct") cfg.compare_direct = value == "true" || value == "1";
      else throw std::invalid_argument("unknown key");
    } catch (const std::exception& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + " (" + key + "): " + e.what());
    }
  }
  cfg.params = {order, parse_complex(alpha), order == 0 ? Complex(0.0) : parse_complex(beta)};
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return parse(in);
}

void ExperimentConfig::validate() const {
  if (frequencies.empty() || subdomain_counts.empty() || methods.empty() || batch_sizes.empty())
    throw std::invalid_argument("config: lists must be nonempty");
  for (const double f : frequencies)
    if (!(f > 0.0)) throw std::invalid_argument("config: frequencies must be positive");
  for (const int n : subdomain_counts)
    if (n < 1) throw std::invalid_argument("config: subdomain counts must be >= 1");
  for (const int b : batch_sizes)
    if (b < 1) throw std::invalid_argument("config: batch sizes must be >= 1");
  if (params_mode != "fixed" && params_mode != "optimize") throw std::invalid_argument("config: params must be fixed or optimize");
  params.validate();
  if (problem.sources < 1) throw std::invalid_argument("config: need at least one source");
  if (problem.source_depth > problem.ly) throw std::invalid_argument("config: sources must lie inside the domain");
  KrylovConfig{tol, restart, max_iters, 0}.validate();
}

// ---------------------------------------------------------------------------

std::size_t krylov_bytes(Index local_length, int width, int restart, Precision precision) {
  return static_cast<std::size_t>(local_length) * static_cast<std::size_t>(width) * static_cast<std::size_t>(restart) *
         static_cast<std::size_t>(bytes_per_scalar(precision));
}

double to_mib(std::size_t bytes) { return static_cast<double>(bytes) / (1024.0 * 1024.0); }

namespace {

void summarize(MemoryEstimate& m) {
  if (m.subdomains.empty()) return;
  double sum_len = 0, sum_mib = 0;
  m.min_length = m.max_length = m.subdomains.front().local_length;
  m.min_krylov_mib = m.max_krylov_mib = to_mib(m.subdomains.front().krylov_bytes);
  for (const auto& s : m.subdomains) {
    m.total_factor_bytes += s.factor_bytes;
    m.total_peak_bytes += s.peak_bytes;
    m.total_krylov_bytes += s.krylov_bytes;
    m.min_length = std::min(m.min_length, s.local_length);
    m.max_length = std::max(m.max_length, s.local_length);
    m.min_krylov_mib = std::min(m.min_krylov_mib, to_mib(s.krylov_bytes));
    m.max_krylov_mib = std::max(m.max_krylov_mib, to_mib(s.krylov_bytes));
    sum_len += static_cast<double>(s.local_length);
    sum_mib += to_mib(s.krylov_bytes);
  }
  m.mean_length = sum_len / static_cast<double>(m.subdomains.size());
  m.mean_krylov_mib = sum_mib / static_cast<double>(m.subdomains.size());
}

}  // namespace

MemoryEstimate estimate_memory(const OrasContext& ctx, int width, int restart, Precision precision) {
  MemoryEstimate m;
  m.width = width;
  m.restart = restart;
  m.scalar_bytes = bytes_per_scalar(precision);
  m.global_length = ctx.size;
  for (const auto& sub : ctx.subdomains) {
    SubdomainMemory s;
    s.local_length = sub.dofs.size();
    s.factor_bytes = sub.factor.factor_bytes();
    s.peak_bytes = sub.factor.peak_bytes();
    s.krylov_bytes = krylov_bytes(s.local_length, width, restart, precision);
    m.subdomains.push_back(s);
  }
  summarize(m);
  return m;
}

MemoryEstimate estimate_memory(const OsmContext& ctx, int width, int restart, Precision precision) {
  MemoryEstimate m;
  m.width = width;
  m.restart = restart;
  m.scalar_bytes = bytes_per_scalar(precision);
  m.global_length = ctx.layout.size();
  for (int i = 0; i < static_cast<int>(ctx.subdomains.size()); ++i) {
    const auto& sub = ctx.subdomains[static_cast<std::size_t>(i)];
    SubdomainMemory s;
    for (const auto& c : sub.couplings) {
      s.local_length += ctx.layout.segment(i, c.neighbor).length;
      s.factor_bytes += c.mass_factor.factor_bytes();
      s.peak_bytes = std::max(s.peak_bytes, c.mass_factor.peak_bytes());
    }
    s.factor_bytes += sub.factor.factor_bytes();
    s.peak_bytes = std::max(s.peak_bytes, sub.factor.peak_bytes());
    s.krylov_bytes = krylov_bytes(s.local_length, width, restart, precision);
    m.subdomains.push_back(s);
  }
  summarize(m);
  return m;
}

// ---------------------------------------------------------------------------

bool RunReport::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.status == "ok"; });
}

namespace {

constexpr const char* kHeader =
    "frequency,dofs,subdomains,method,batch,order,alpha_re,alpha_im,beta_re,beta_im,iterations,mean_iterations,"
    "time_solve,time_ortho,time_spmm,time_total,core_seconds,krylov_length,krylov_mib,factor_mib,peak_mib,l2_error,"
    "status";

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

}  // namespace

void write_csv(const RunReport& report, std::ostream& out) {
  const auto old = out.precision(17);
  out << kHeader << '\n';
  for (const auto& r : report.rows) {
    out << r.frequency << ',' << r.dofs << ',' << r.subdomains << ',' << r.method << ',' << r.batch << ',' << r.order
        << ',' << r.alpha_hat.real() << ',' << r.alpha_hat.imag() << ',' << r.beta_hat.real() << ','
        << r.beta_hat.imag() << ',' << r.iterations << ',' << r.mean_iterations << ',' << r.time_solve << ','
        << r.time_ortho << ',' << r.time_spmm << ',' << r.time_total << ',' << r.core_seconds << ','
        << r.krylov_length << ',' << r.krylov_mib << ',' << r.factor_mib << ',' << r.peak_mib << ',' << r.l2_error
        << ',' << sanitize(r.status) << '\n';
  }
  out.precision(old);
}

void write_csv(const RunReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
  write_csv(report, out);
  out.flush();
  if (!out) throw std::runtime_error("write_csv: write failed for " + path.string());
}

RunReport parse_csv(std::istream& in) {
  RunReport report;
  std::string line;
  if (!std::getline(in, line) || trim(line) != kHeader) throw std::invalid_argument("parse_csv: unexpected header");
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 23) throw std::invalid_argument("parse_csv: expected 23 fields, got " + std::to_string(f.size()));
    ReportRow r;
    r.frequency = std::stod(f[0]);
    r.dofs = std::stoll(f[1]);
    r.subdomains = std::stoi(f[2]);
    r.method = f[3];
    r.batch = std::stoi(f[4]);
    r.order = std::stoi(f[5]);
    r.alpha_hat = {std::stod(f[6]), std::stod(f[7])};
    r.beta_hat = {std::stod(f[8]), std::stod(f[9])};
    r.iterations = std::stoi(f[10]);
    r.mean_iterations = std::stod(f[11]);
    r.time_solve = std::stod(f[12]);
    r.time_ortho = std::stod(f[13]);
    r.time_spmm = std::stod(f[14]);
    r.time_total = std::stod(f[15]);
    r.core_seconds = std::stod(f[16]);
    r.krylov_length = std::stoll(f[17]);
    r.krylov_mib = std::stod(f[18]);
    r.factor_mib = std::stod(f[19]);
    r.peak_mib = std::stod(f[20]);
    r.l2_error = std::stod(f[21]);
    r.status = f[22];
    report.rows.push_back(std::move(r));
  }
  return report;
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

void fill_from_stats(ReportRow& row, const RunStats& st) {
  row.iterations = st.max_iterations();
  double sum = 0;
  for (const int it : st.iterations) sum += it;
  row.mean_iterations = st.iterations.empty() ? 0.0 : sum / static_cast<double>(st.iterations.size());
  row.time_solve = st.counters.seconds(CostCategory::local_solve);
  row.time_ortho = st.counters.seconds(CostCategory::orthogonalization);
  row.time_spmm = st.counters.seconds(CostCategory::spmm);
  row.time_total = st.wall_seconds;
  row.core_seconds = st.wall_seconds;  // one worker
  if (!st.all_converged()) {
    for (const auto s : st.status)
      if (s != ColumnStatus::converged) row.status = to_string(s);
  }
}

void fill_memory(ReportRow& row, const MemoryEstimate& m) {
  row.krylov_length = m.global_length;
  row.krylov_mib = m.max_krylov_mib;
  std::size_t factor = 0, peak = 0;
  for (const auto& s : m.subdomains) {
    factor = std::max(factor, s.factor_bytes);
    peak = std::max(peak, s.peak_bytes);
  }
  row.factor_mib = to_mib(factor);
  row.peak_mib = to_mib(peak);
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.validate();
  RunReport report;
  const auto note = [&](const std::string& s) {
    if (log != nullptr) *log << s << '\n';
  };
  if (!cfg.output_dir.empty()) std::filesystem::create_directories(cfg.output_dir);

  for (const double f : cfg.frequencies) {
    for (const int n : cfg.subdomain_counts) {
      ProblemSpec spec = cfg.problem;
      spec.frequency = f;
      spec.subdomains = n;
      ReportRow base;
      base.frequency = f;
      base.subdomains = n;
      const auto fail_all = [&](const std::string& status) {
        for (const Method m : cfg.methods)
          for (const int b : cfg.batch_sizes) {
            ReportRow row = base;
            row.method = to_string(m);
            row.batch = b;
            row.status = sanitize(status);
            report.rows.push_back(row);
          }
      };
      std::unique_ptr<Problem> problem;
      MultiVector reference;
      try {
        base.dofs = predicted_dofs(spec);
        if (base.dofs > cfg.dof_cap) {
          fail_all("error:dof_cap " + std::to_string(base.dofs) + " > " + std::to_string(cfg.dof_cap));
          continue;
        }
        problem = std::make_unique<Problem>(spec);
        base.dofs = problem->dofs().num_dofs();
        if (cfg.compare_direct) reference = factorize(problem->a()).solve(problem->sources());
      } catch (const std::exception& e) {
        fail_all(std::string("error:setup ") + e.what());
        continue;
      }
      note("f=" + fmt(f) + " N=" + std::to_string(n) + " dofs=" + std::to_string(base.dofs));

      for (const Method m : cfg.methods) {
        TransmissionParams params = cfg.params;
        KrylovConfig kc{cfg.tol, cfg.restart, cfg.max_iters, 0};
        try {
          if (cfg.params_mode == "optimize") {
            params = optimize_params(*problem, m, ParamGrid::standard(2), kc).best;
            note(std::string("  ") + to_string(m) + " optimized alpha=" + fmt(params.alpha_hat.real()) + "+" +
                 fmt(params.alpha_hat.imag()) + "i beta=" + fmt(params.beta_hat.real()) + "+" +
                 fmt(params.beta_hat.imag()) + "i");
          }
        } catch (const std::exception& e) {
          for (const int b : cfg.batch_sizes) {
            ReportRow row = base;
            row.method = to_string(m);
            row.batch = b;
            row.status = sanitize(std::string("error:optimize ") + e.what());
            report.rows.push_back(row);
          }
          continue;
        }
        std::unique_ptr<OrasContext> oras;
        std::unique_ptr<OsmContext> osm;
        std::string build_error;
        try {
          if (m == Method::oras)
            oras = std::make_unique<OrasContext>(
                build_oras(problem->mesh(), problem->dofs(), problem->overlap(), problem->k(), params, problem->a()));
          else
            osm = std::make_unique<OsmContext>(
                build_osm(problem->mesh(), problem->dofs(), problem->partition(), problem->k(), params));
        } catch (const std::exception& e) {
          build_error = e.what();
        }
        for (const int b : cfg.batch_sizes) {
          ReportRow row = base;
          row.method = to_string(m);
          row.batch = b;
          row.order = params.order;
          row.alpha_hat = params.alpha_hat;
          row.beta_hat = params.beta_hat;
          if (!build_error.empty()) {
            row.status = sanitize("error:build " + build_error);
            report.rows.push_back(row);
            continue;
          }
          try {
            kc.batch = b;
            MultiVector u;
            RunStats stats;
            if (m == Method::oras) {
              auto r = solve_oras(*oras, problem->sources(), kc);
              u = std::move(r.x);
              stats = std::move(r.stats);
              fill_memory(row, estimate_memory(*oras, b, cfg.restart, cfg.precision));
            } else {
              auto r = solve_osm(*osm, problem->sources(), kc);
              u = std::move(r.u);
              stats = std::move(r.stats);
              fill_memory(row, estimate_memory(*osm, b, cfg.restart, cfg.precision));
            }
            fill_from_stats(row, stats);
            if (cfg.compare_direct) {
              const auto errs = relative_errors(u, reference, &problem->mass());
              row.l2_error = *std::max_element(errs.begin(), errs.end());
            }
            if (!cfg.output_dir.empty()) {
              std::ostringstream name;
              name << "history_" << to_string(m) << "_order" << params.order << "_N" << n << "_f" << f << "_b" << b
                   << ".csv";
              std::ofstream hist(std::filesystem::path(cfg.output_dir) / name.str());
              if (!hist) throw std::runtime_error("cannot write " + name.str());
              write_histories(stats, hist);
            }
          } catch (const std::exception& e) {
            row.status = sanitize(std::string("error:solve ") + e.what());
          }
          note("  " + row.method + " batch=" + std::to_string(b) + " iterations=" + std::to_string(row.iterations) +
               " status=" + row.status);
          report.rows.push_back(row);
        }
      }
    }
  }
  if (!cfg.output_dir.empty()) write_csv(report, std::filesystem::path(cfg.output_dir) / "report.csv");
  return report;
}

}  // namespace ddlab
