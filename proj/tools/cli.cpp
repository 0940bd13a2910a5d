#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "aabtp/bench.hpp"
#include "aabtp/csv.hpp"
#include "aabtp/dataset.hpp"
#include "aabtp/error.hpp"
#include "aabtp/metrics.hpp"
#include "aabtp/posterior.hpp"
#include "aabtp/predict.hpp"
#include "aabtp/sampler.hpp"
#include "aabtp/simgen.hpp"

namespace aabtp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kOutDirEnv = "AABTP_OUT_DIR";

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& field : csv::split(text)) {
    if (!field.empty()) out.push_back(csv::parse_double(field, 0));
  }
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += csv::format(values[i]);
  }
  return out;
}

void write_manifest(const fs::path& dir, const std::string& subcommand, json parameters,
                    const std::vector<std::string>& outputs) {
  json m;
  m["tool"] = "aabtp";
  m["version"] = kVersion;
  m["subcommand"] = subcommand;
  m["parameters"] = std::move(parameters);
  m["outputs"] = outputs;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw InputError("cannot write " + (dir / "manifest.json").string());
  out << m.dump(2) << '\n';
}

json read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw InputError("missing " + (dir / "manifest.json").string());
  return json::parse(in);
}

fs::path prepare_out(const std::string& out) {
  fs::path dir(out.empty() ? "." : out);
  fs::create_directories(dir);
  return dir;
}

std::string default_out_dir() {
  const char* env = std::getenv(kOutDirEnv);
  return env && *env ? env : ".";
}

// ----------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  SimConfig sim;
  std::string doses = "0,0.375,0.75,1.5,3.0,4.5,6";
  std::size_t n_train = 0;
  std::uint64_t split_seed = 1;
  std::string out;
};

void run_simulate(SimulateArgs a) {
  a.sim.doses = parse_list(a.doses);
  const SimResult sim = generate(a.sim);
  const fs::path dir = prepare_out(a.out);
  std::vector<std::string> outputs = {"data.csv", "truth.csv"};
  write_csv(dir / "data.csv", sim.data);
  write_truth_csv(dir / "truth.csv", sim.truth);
  if (a.n_train > 0) {
    const auto [train, holdout] = split_holdout(sim.data, a.n_train, a.split_seed);
    write_csv(dir / "train.csv", train);
    write_csv(dir / "holdout.csv", holdout);
    outputs.insert(outputs.end(), {"train.csv", "holdout.csv"});
  }

  const SimConfig defaults;
  std::vector<std::string> unspecified;
  if (a.sim.hill_m == defaults.hill_m) unspecified.push_back("hill_m");
  if (a.sim.z_scale == defaults.z_scale) unspecified.push_back("z_scale");
  if (a.sim.noise_sd == defaults.noise_sd) unspecified.push_back("noise_sd");
  json p = {{"dim_s", a.sim.dim_s},       {"n_curves", a.sim.n_curves},
            {"doses", join(a.sim.doses)}, {"hill_m", a.sim.hill_m},
            {"z_scale", a.sim.z_scale},   {"noise_sd", a.sim.noise_sd},
            {"seed", a.sim.seed},         {"n_train", a.n_train},
            {"split_seed", a.split_seed}, {"assumed_defaults", unspecified}};
  write_manifest(dir, "simulate", p, outputs);
  std::cout << "simulate: " << sim.data.size() << " observations, " << a.sim.n_curves
            << " curves -> " << dir.string() << '\n';
}

// ----------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string data;
  ChainConfig chain;
  int sig_digits = kDefaultSigDigits;
  int chains = 1;
  bool standardize_s = false;
  std::string out;
};

void run_fit(FitArgs a) {
  Dataset data = load_csv(a.data);
  if (a.standardize_s) data.standardize_s();
  const DesignIndex idx = build_design(data, a.sig_digits);
  const fs::path dir = prepare_out(a.out);
  write_csv(dir / "train.csv", data);

  auto chains = run_chains(data, idx, a.chain, a.chains);
  std::vector<std::string> outputs = {"train.csv", "samples.csv"};
  if (chains.size() == 1) {
    write_traces(dir, chains.front());
    for (const auto& [name, series] : chains.front().traces) outputs.push_back("trace_" + name + ".csv");
  } else {
    for (std::size_t c = 0; c < chains.size(); ++c) {
      const fs::path sub = dir / ("chain_" + std::to_string(c + 1));
      fs::create_directories(sub);
      write_traces(sub, chains[c]);
      outputs.push_back(sub.filename().string() + "/trace_*.csv");
    }
  }
  const PosteriorSamples samples = merge_chains(std::move(chains));
  write_samples_csv(dir / "samples.csv", samples);

  const double basis = samples.empty() ? 0.0 : effective_basis_count(samples, 1.0);
  const auto& pr = a.chain.priors;
  json p = {{"data", a.data},
            {"K", pr.K},
            {"a1", pr.a1},
            {"omega_lower", pr.omega_lower},
            {"omega_upper", pr.omega_upper},
            {"theta_grid", join(pr.theta_grid)},
            {"tau_prior", {pr.tau_shape, pr.tau_rate}},
            {"nu_prior", {pr.nu_shape, pr.nu_rate}},
            {"n_iter", a.chain.n_iter},
            {"burn_in", a.chain.burn_in},
            {"thin", a.chain.thin},
            {"seed", a.chain.seed},
            {"rw_step", a.chain.rw_step},
            {"jitter", a.chain.jitter},
            {"parallel_f", a.chain.parallel_f},
            {"chains", a.chains},
            {"sig_digits", a.sig_digits},
            {"standardize_s", a.standardize_s}};
  json summary = {{"snapshots", samples.size()},
                  {"curves", idx.curve_count()},
                  {"grid_size", idx.grid_size()},
                  {"observations", idx.observation_count()},
                  {"effective_basis_count", basis},
                  {"omega_acceptance", samples.omega_acceptance}};
  p["summary"] = summary;
  write_manifest(dir, "fit", p, outputs);
  std::cout << "fit: " << samples.size() << " snapshots, effective basis count " << basis
            << " -> " << dir.string() << '\n';
}

// ----------------------------------------------------------------------------
// predict

struct Targets {
  std::vector<std::string> ids;
  Points s;
  std::optional<Dataset> data;
};

Targets read_targets(const std::string& path, int dim_s) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string header;
  std::getline(in, header);
  const auto cols = csv::split(header);
  Targets t;
  if (!cols.empty() && cols.back() == "y") {
    t.data = load_csv(path);
    const DesignIndex idx = build_design(*t.data, 15);
    t.ids = idx.curve_ids;
    t.s = idx.curves;
  } else {
    if (cols.size() != static_cast<std::size_t>(dim_s) + 1 || cols[0] != "curve_id") {
      throw ParseError("targets header must be curve_id,s1..s" + std::to_string(dim_s) +
                           " or a full dataset header",
                       1);
    }
    std::string line;
    std::size_t row = 1;
    std::vector<std::vector<double>> rows;
    std::set<std::string> seen;
    while (csv::next_line(in, line, row)) {
      const auto f = csv::split(line);
      if (f.size() != cols.size()) throw ParseError("wrong field count", row);
      if (!seen.insert(f[0]).second) throw ParseError("duplicate curve_id " + f[0], row);
      t.ids.push_back(f[0]);
      std::vector<double> s;
      for (int j = 0; j < dim_s; ++j) s.push_back(csv::parse_double(f[1 + j], row));
      rows.push_back(std::move(s));
    }
    t.s.resize(static_cast<Eigen::Index>(rows.size()), dim_s);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (int j = 0; j < dim_s; ++j) t.s(static_cast<Eigen::Index>(i), j) = rows[i][j];
  }
  if (t.s.cols() != dim_s) throw InputError("targets: s dimension does not match the fit");
  if (t.ids.empty()) throw InputError("targets: no curves");
  return t;
}

struct PredictArgs {
  std::string fit;
  std::string targets;
  std::string doses = "grid";
  double level = 0.9;
  bool noise = false;
  bool draws = false;
  std::string mode = "joint";
  double jitter = kDefaultJitter;
  std::uint64_t seed = 1;
  std::string out;
};

void run_predict(PredictArgs a) {
  const fs::path fit_dir(a.fit);
  const json manifest = read_manifest(fit_dir);
  const int sig_digits = manifest.at("parameters").at("sig_digits").get<int>();
  const Dataset train = load_csv(fit_dir / "train.csv");
  const DesignIndex idx = build_design(train, sig_digits);

  PosteriorSamples samples;
  samples.states = read_samples_csv(fit_dir / "samples.csv", &samples.iterations);
  const Targets targets = read_targets(a.targets, train.dim_s());

  std::optional<Points> new_d;
  if (a.doses == "observed") {
    if (!targets.data) throw InputError("--doses observed needs a targets file with d columns");
    new_d = build_design(*targets.data, sig_digits).grid;
  } else if (a.doses != "grid") {
    const auto values = parse_list(a.doses);
    if (train.dim_d() != 1) throw InputError("--doses list only supported for one-dimensional d");
    Points d(static_cast<Eigen::Index>(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i) d(static_cast<Eigen::Index>(i), 0) = values[i];
    new_d = d;
  }

  PredictOptions opts;
  opts.include_noise = a.noise;
  opts.jitter = a.jitter;
  opts.seed = a.seed;
  if (a.mode == "joint") {
    opts.mode = PredictMode::Joint;
  } else if (a.mode == "marginal") {
    opts.mode = PredictMode::Marginal;
  } else {
    throw InputError("--mode must be joint or marginal");
  }

  const PredictiveDraws draws = predict_surface(samples, idx, targets.s, new_d, opts);
  const auto summary = summarize(draws, a.level);
  const fs::path dir = prepare_out(a.out);
  {
    std::ofstream out(dir / "predictions.csv");
    out << "curve_id";
    for (int q = 1; q <= train.dim_d(); ++q) out << ",d" << q;
    out << ",mean,lower,upper\n";
    for (Eigen::Index j = 0; j < draws.target_count(); ++j) {
      out << targets.ids[static_cast<std::size_t>(draws.target_curve[static_cast<std::size_t>(j)])];
      for (Eigen::Index q = 0; q < draws.target_d.cols(); ++q) out << ',' << csv::format(draws.target_d(j, q));
      const auto& s = summary[static_cast<std::size_t>(j)];
      out << ',' << csv::format(s.mean) << ',' << csv::format(s.lower) << ',' << csv::format(s.upper) << '\n';
    }
  }
  std::vector<std::string> outputs = {"predictions.csv"};
  if (a.draws) {
    std::ofstream out(dir / "draws.csv");
    out << "snapshot,target,value\n";
    std::string buf;
    for (Eigen::Index t = 0; t < draws.draws.rows(); ++t) {
      buf.clear();
      for (Eigen::Index j = 0; j < draws.target_count(); ++j) {
        buf += std::to_string(t) + ',' + std::to_string(j) + ',' + csv::format(draws.draws(t, j)) + '\n';
      }
      out << buf;
    }
    outputs.push_back("draws.csv");
  }
  json p = {{"fit", a.fit},     {"targets", a.targets}, {"doses", a.doses},
            {"level", a.level}, {"noise", a.noise},     {"mode", a.mode},
            {"jitter", a.jitter}, {"seed", a.seed},     {"snapshots", samples.size()}};
  write_manifest(dir, "predict", p, outputs);
  std::cout << "predict: " << draws.target_count() << " targets x " << draws.draws.rows()
            << " draws -> " << dir.string() << '\n';
}

// ----------------------------------------------------------------------------
// evaluate

struct PredictionTable {
  std::vector<std::string> curve_id;
  std::vector<std::vector<double>> d;
  std::vector<IntervalSummary> summary;
};

PredictionTable read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  std::size_t row = 0;
  if (!csv::next_line(in, line, row)) throw ParseError("empty predictions file", 0);
  const auto header = csv::split(line);
  if (header.size() < 5 || header[0] != "curve_id" || header[header.size() - 3] != "mean") {
    throw ParseError("expected header curve_id,d1..dQ,mean,lower,upper", row);
  }
  const std::size_t Q = header.size() - 4;
  PredictionTable t;
  while (csv::next_line(in, line, row)) {
    const auto f = csv::split(line);
    if (f.size() != header.size()) throw ParseError("wrong field count", row);
    t.curve_id.push_back(f[0]);
    std::vector<double> d;
    for (std::size_t q = 0; q < Q; ++q) d.push_back(csv::parse_double(f[1 + q], row));
    t.d.push_back(std::move(d));
    t.summary.push_back({csv::parse_double(f[1 + Q], row), csv::parse_double(f[2 + Q], row),
                         csv::parse_double(f[3 + Q], row)});
  }
  return t;
}

Eigen::MatrixXd read_draws(const std::string& path, std::size_t targets) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  std::size_t row = 0;
  if (!csv::next_line(in, line, row) ||
      csv::split(line) != std::vector<std::string>{"snapshot", "target", "value"}) {
    throw ParseError("expected header snapshot,target,value", row);
  }
  std::vector<std::vector<double>> rows;
  while (csv::next_line(in, line, row)) {
    const auto f = csv::split(line);
    if (f.size() != 3) throw ParseError("expected 3 fields", row);
    const auto s = static_cast<std::size_t>(csv::parse_int(f[0], row));
    const auto j = static_cast<std::size_t>(csv::parse_int(f[1], row));
    if (j >= targets) throw ParseError("target index beyond the predictions table", row);
    if (s >= rows.size()) rows.resize(s + 1, std::vector<double>(targets, std::nan("")));
    rows[s][j] = csv::parse_double(f[2], row);
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(targets));
  for (std::size_t s = 0; s < rows.size(); ++s)
    for (std::size_t j = 0; j < targets; ++j) {
      if (std::isnan(rows[s][j])) throw ParseError("draws file is missing entries", 0);
      m(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = rows[s][j];
    }
  return m;
}

using TargetKey = std::pair<std::string, std::vector<double>>;

TargetKey key_of(const std::string& id, const std::vector<double>& d, int sig_digits) {
  std::vector<double> r;
  for (double v : d) r.push_back(round_significant(v, sig_digits));
  return {id, r};
}

struct EvaluateArgs {
  std::string predictions;
  std::string truth;
  std::string draws;
  std::string observations;
  std::string p = "0.05,0.10,0.15";
  double test_level = 0.9;
  int sig_digits = kDefaultSigDigits;
  std::string out;
};

void run_evaluate(EvaluateArgs a) {
  const PredictionTable pred = read_predictions(a.predictions);
  std::map<TargetKey, std::size_t> target_of;
  for (std::size_t j = 0; j < pred.curve_id.size(); ++j) {
    target_of.emplace(key_of(pred.curve_id[j], pred.d[j], a.sig_digits), j);
  }
  const fs::path dir = prepare_out(a.out);
  std::vector<std::string> outputs;
  json p = {{"predictions", a.predictions}, {"truth", a.truth}, {"draws", a.draws},
            {"observations", a.observations}, {"p", a.p}, {"test_level", a.test_level},
            {"sig_digits", a.sig_digits}};

  std::optional<Dataset> observations;
  if (!a.observations.empty()) observations = load_csv(a.observations);

  if (!a.truth.empty()) {
    // (prediction index, reference value) pairs
    std::vector<std::pair<std::size_t, double>> pairs;
    std::ifstream probe(a.truth);
    std::string header;
    std::getline(probe, header);
    const auto cols = csv::split(header);
    if (cols == std::vector<std::string>{"curve_id", "d", "h_true"}) {
      for (const auto& t : read_truth_csv(a.truth)) {
        const auto it = target_of.find(key_of(t.curve_id, {t.d}, a.sig_digits));
        if (it != target_of.end()) pairs.emplace_back(it->second, t.h);
      }
    } else {
      const Dataset ref = load_csv(a.truth);
      for (const auto& o : ref.rows()) {
        const auto it = target_of.find(key_of(o.curve_id, o.d, a.sig_digits));
        if (it != target_of.end()) pairs.emplace_back(it->second, o.y);
      }
    }
    if (pairs.empty()) throw InputError("evaluate: no truth rows match the predictions");
    std::vector<double> m, t;
    for (const auto& [j, v] : pairs) {
      m.push_back(pred.summary[j].mean);
      t.push_back(v);
    }
    const EvalReport r = evaluate(m, t);
    {
      std::ofstream out(dir / "report.csv");
      out << "metric,value\n"
          << "mspe," << csv::format(r.mspe) << '\n'
          << "mae," << csv::format(r.mae) << '\n'
          << "correlation," << csv::format(r.correlation) << '\n'
          << "n_targets," << r.n_targets << '\n';
    }
    outputs.push_back("report.csv");
    std::cout << "== evaluation ==\n"
              << "  targets      " << r.n_targets << '\n'
              << "  MSPE         " << r.mspe << '\n'
              << "  MAE          " << r.mae << '\n'
              << "  correlation  " << r.correlation << '\n';

    if (observations) {
      // Per-curve RMSPE with descriptor coordinates, for contour plots over s.
      std::map<std::string, std::pair<double, int>> sq;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double e = m[i] - t[i];
        auto& acc = sq[pred.curve_id[pairs[i].first]];
        acc.first += e * e;
        acc.second += 1;
      }
      std::ofstream out(dir / "rmspe_by_curve.csv");
      out << "curve_id";
      for (int j = 1; j <= observations->dim_s(); ++j) out << ",s" << j;
      out << ",rmspe\n";
      std::set<std::string> done;
      for (const auto& o : observations->rows()) {
        const auto it = sq.find(o.curve_id);
        if (it == sq.end() || !done.insert(o.curve_id).second) continue;
        out << o.curve_id;
        for (double v : o.s) out << ',' << csv::format(v);
        out << ',' << csv::format(std::sqrt(it->second.first / it->second.second)) << '\n';
      }
      outputs.push_back("rmspe_by_curve.csv");
    }
  }

  if (!a.draws.empty()) {
    if (!observations) throw InputError("--draws needs --observations");
    PredictiveDraws draws;
    draws.draws = read_draws(a.draws, pred.curve_id.size());
    std::vector<CurveObservations> groups;
    std::map<std::string, std::size_t> pos;
    for (const auto& o : observations->rows()) {
      const auto it = target_of.find(key_of(o.curve_id, o.d, a.sig_digits));
      if (it == target_of.end()) {
        throw InputError("evaluate: observation of curve '" + o.curve_id + "' has no prediction");
      }
      auto [g, inserted] = pos.emplace(o.curve_id, groups.size());
      if (inserted) groups.push_back({o.curve_id, {}, {}});
      groups[g->second].target.push_back(static_cast<Eigen::Index>(it->second));
      groups[g->second].y.push_back(o.y);
    }
    std::ofstream detail(dir / "coverage.csv");
    std::ofstream overall(dir / "coverage_summary.csv");
    detail << "p,curve_id,n_obs,count,critical_value,pass\n";
    overall << "p,test_level,curves,pass_fraction\n";
    std::cout << "== coverage (test level " << a.test_level << ") ==\n";
    for (double pv : parse_list(a.p)) {
      const CoverageResult c = coverage_check(draws, groups, pv, a.test_level);
      for (const auto& cc : c.curves) {
        detail << csv::format(pv) << ',' << cc.curve_id << ',' << cc.n_obs << ',' << cc.count << ','
               << cc.critical_value << ',' << (cc.pass ? 1 : 0) << '\n';
      }
      overall << csv::format(pv) << ',' << csv::format(a.test_level) << ',' << c.curves.size() << ','
              << csv::format(c.pass_fraction) << '\n';
      std::cout << "  p = " << pv << "  pass fraction " << c.pass_fraction << '\n';
    }
    outputs.insert(outputs.end(), {"coverage.csv", "coverage_summary.csv"});
  }
  if (outputs.empty()) throw InputError("evaluate: give --truth and/or --draws with --observations");
  write_manifest(dir, "evaluate", p, outputs);
}

// ----------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::string n = "100,200";
  int R = 7;
  int K = 15;
  int iterations = 5;
  int dense_n = 0;
  int dense_reps = 1;
  std::uint64_t seed = 1;
  std::string out;
};

void run_bench(BenchArgs a) {
  const fs::path dir = prepare_out(a.out);
  std::ofstream out(dir / "scaling.csv");
  out << "kind,n,R,K,seconds_per_iteration\n";
  std::cout << "kind        n      R   K   sec/iter\n";
  const auto line = [&](const char* kind, const IterationTiming& t) {
    out << kind << ',' << t.n << ',' << t.R << ',' << t.K << ',' << csv::format(t.seconds) << '\n';
    std::printf("%-10s %5d %4d %3d   %.6g\n", kind, t.n, t.R, t.K, t.seconds);
  };
  std::vector<IterationTiming> rows;
  for (double n : parse_list(a.n)) {
    rows.push_back(time_factorized_iteration(static_cast<int>(n), a.R, a.K, a.iterations, a.seed));
    line("factorized", rows.back());
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::printf("  n %d -> %d: time ratio %.3g\n", rows[i - 1].n, rows[i].n,
                rows[i].seconds / rows[i - 1].seconds);
  }
  if (a.dense_n > 0) {
    const auto fact = time_factorized_iteration(a.dense_n, a.R, a.K, a.iterations, a.seed);
    line("factorized", fact);
    const auto dense = time_dense_gp_iteration(a.dense_n, a.R, a.dense_reps, a.seed);
    line("dense_gp", dense);
    std::printf("  dense / factorized at n=%d: %.3g\n", a.dense_n, dense.seconds / fact.seconds);
  }
  json p = {{"n", a.n},           {"R", a.R},         {"K", a.K},
            {"iterations", a.iterations}, {"dense_n", a.dense_n},
            {"dense_reps", a.dense_reps}, {"seed", a.seed}};
  write_manifest(dir, "bench", p, {"scaling.csv"});
}

std::vector<std::string> with_config(std::vector<std::string> args) {
  std::string config;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (config.empty()) return args;
  const auto injected = config_arguments(config);
  // Right after the subcommand, so later command-line flags win.
  const std::size_t at = args.size() > 1 && args[1].rfind('-', 0) != 0 ? 2 : 1;
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(std::min(at, args.size())), injected.begin(),
              injected.end());
  return args;
}

}  // namespace

std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  std::vector<std::string> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    const auto blank = line.find_first_not_of(" \t\r");
    if (blank == std::string::npos) continue;
    if (eq == std::string::npos) throw ParseError("config: expected key = value", row);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("config: empty key", row);
    for (auto& c : key) {
      if (c == '_') c = '-';
    }
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

int run(const std::vector<std::string>& raw_args) {
  std::vector<std::string> args;
  try {
    args = with_config(raw_args);
  } catch (const std::exception& e) {
    std::cerr << "aabtp: " << e.what() << '\n';
    return 2;
  }

  CLI::App app{"Additive adaptive basis tensor product models: simulate, fit, predict, evaluate, bench"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  const std::string out_default = default_out_dir();

  SimulateArgs sim;
  sim.out = out_default;
  auto* s = app.add_subcommand("simulate", "Generate a synthetic dose-response benchmark");
  s->add_option("--dim-s", sim.sim.dim_s, "Descriptor dimension")->capture_default_str();
  s->add_option("--n-curves", sim.sim.n_curves, "Number of curves")->capture_default_str();
  s->add_option("--doses", sim.doses, "Comma-separated doses")->capture_default_str();
  s->add_option("--hill-m", sim.sim.hill_m, "Hill exponent")->capture_default_str();
  s->add_option("--z-scale", sim.sim.z_scale, "Latent GP kernel scale")->capture_default_str();
  s->add_option("--noise-sd", sim.sim.noise_sd, "Observation noise sd")->capture_default_str();
  s->add_option("--seed", sim.sim.seed, "Random seed")->capture_default_str();
  s->add_option("--n-train", sim.n_train, "Also write a train/holdout split with this many training curves");
  s->add_option("--split-seed", sim.split_seed, "Seed for the train/holdout split")->capture_default_str();
  s->add_option("--out", sim.out, "Output directory (env AABTP_OUT_DIR)")->capture_default_str();

  FitArgs fit;
  fit.out = out_default;
  auto* f = app.add_subcommand("fit", "Run the Gibbs sampler on a dataset");
  f->add_option("--data", fit.data, "Training dataset CSV")->required();
  f->add_option("-K,--K", fit.chain.priors.K, "Number of tensor-product components")->capture_default_str();
  f->add_option("--n-iter", fit.chain.n_iter, "Total sweeps")->capture_default_str();
  f->add_option("--burn-in", fit.chain.burn_in, "Discarded sweeps")->capture_default_str();
  f->add_option("--thin", fit.chain.thin, "Keep every thin-th sweep after burn-in")->capture_default_str();
  f->add_option("--seed", fit.chain.seed, "Random seed")->capture_default_str();
  f->add_option("--a1", fit.chain.priors.a1, "Shape of the delta_j gamma prior")->capture_default_str();
  f->add_option("--omega-lower", fit.chain.priors.omega_lower, "Lower omega bound")->capture_default_str();
  f->add_option("--omega-upper", fit.chain.priors.omega_upper, "Upper omega bound")->capture_default_str();
  f->add_option("--rw-step", fit.chain.rw_step, "omega random-walk sd")->capture_default_str();
  f->add_option("--jitter", fit.chain.jitter, "Relative diagonal jitter")->capture_default_str();
  f->add_option("--progress-every", fit.chain.progress_every, "Progress line interval (0 = off)")
      ->capture_default_str();
  f->add_flag("--parallel-f", fit.chain.parallel_f, "Draw all f_k concurrently from one residual snapshot");
  f->add_option("--sig-digits", fit.sig_digits, "Significant digits for rounding d")->capture_default_str();
  f->add_option("--chains", fit.chains, "Independent chains run concurrently")->capture_default_str();
  f->add_flag("--standardize-s", fit.standardize_s, "Standardize descriptor columns");
  f->add_option("--out", fit.out, "Output directory (env AABTP_OUT_DIR)")->capture_default_str();

  PredictArgs pr;
  pr.out = out_default;
  auto* p = app.add_subcommand("predict", "Posterior predictive draws for new curves");
  p->add_option("--fit", pr.fit, "Directory written by fit")->required();
  p->add_option("--targets", pr.targets, "Dataset CSV or curve_id,s1..sP CSV of new curves")->required();
  p->add_option("--doses", pr.doses, "grid | observed | comma-separated list")->capture_default_str();
  p->add_option("--level", pr.level, "Credible level of the interval")->capture_default_str();
  p->add_flag("--noise", pr.noise, "Add observation noise to the draws");
  p->add_flag("--draws", pr.draws, "Also write every draw");
  p->add_option("--mode", pr.mode, "joint | marginal")->capture_default_str();
  p->add_option("--jitter", pr.jitter, "Relative diagonal jitter")->capture_default_str();
  p->add_option("--seed", pr.seed, "Random seed")->capture_default_str();
  p->add_option("--out", pr.out, "Output directory (env AABTP_OUT_DIR)")->capture_default_str();

  EvaluateArgs ev;
  ev.out = out_default;
  auto* e = app.add_subcommand("evaluate", "Score predictions and check predictive coverage");
  e->add_option("--predictions", ev.predictions, "predictions.csv from predict")->required();
  e->add_option("--truth", ev.truth, "Truth CSV (curve_id,d,h_true) or dataset CSV");
  e->add_option("--draws", ev.draws, "draws.csv from predict (coverage check)");
  e->add_option("--observations", ev.observations, "Held-out dataset CSV");
  e->add_option("--p", ev.p, "Comma-separated tail probabilities")->capture_default_str();
  e->add_option("--test-level", ev.test_level, "Binomial critical level")->capture_default_str();
  e->add_option("--sig-digits", ev.sig_digits, "Significant digits for matching d")->capture_default_str();
  e->add_option("--out", ev.out, "Output directory (env AABTP_OUT_DIR)")->capture_default_str();

  BenchArgs b;
  b.out = out_default;
  auto* bn = app.add_subcommand("bench", "Time sampler sweeps and a dense GP iteration");
  bn->add_option("--n", b.n, "Comma-separated curve counts")->capture_default_str();
  bn->add_option("--R", b.R, "Shared doses per curve")->capture_default_str();
  bn->add_option("-K,--K", b.K, "Components")->capture_default_str();
  bn->add_option("--iterations", b.iterations, "Timed sweeps per setting")->capture_default_str();
  bn->add_option("--dense-n", b.dense_n, "Also compare with a dense GP at this n (0 = skip)")
      ->capture_default_str();
  bn->add_option("--dense-reps", b.dense_reps, "Dense GP repetitions")->capture_default_str();
  bn->add_option("--seed", b.seed, "Random seed")->capture_default_str();
  bn->add_option("--out", b.out, "Output directory (env AABTP_OUT_DIR)")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (s->parsed()) run_simulate(sim);
    if (f->parsed()) run_fit(fit);
    if (p->parsed()) run_predict(pr);
    if (e->parsed()) run_evaluate(ev);
    if (bn->parsed()) run_bench(b);
  } catch (const std::exception& err) {
    std::cerr << "aabtp: " << err.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace aabtp::cli
