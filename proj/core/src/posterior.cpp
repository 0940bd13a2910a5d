#include "aabtp/posterior.hpp"

#include <fstream>
#include <sstream>

#include "aabtp/csv.hpp"
#include "aabtp/error.hpp"

namespace aabtp {

double effective_basis_count(const PosteriorSamples& samples, double threshold) {
  if (!(threshold > 0.0)) throw InputError("effective_basis_count: threshold must be > 0");
  if (samples.empty()) throw InputError("effective_basis_count: no samples");
  double total = 0.0;
  for (const auto& s : samples.states) {
    total += static_cast<double>((mgp_variances(s).array() >= threshold).count());
  }
  return total / static_cast<double>(samples.size());
}

Eigen::VectorXd mean_mgp_variances(const PosteriorSamples& samples) {
  if (samples.empty()) throw InputError("mean_mgp_variances: no samples");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(samples.states.front().K());
  for (const auto& s : samples.states) sum += mgp_variances(s);
  return sum / static_cast<double>(samples.size());
}

void write_samples_csv(const std::filesystem::path& path, const PosteriorSamples& samples) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "snapshot,iteration,name,indices,value\n";
  std::string buf;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::ostringstream body;
    write_state_csv(body, samples.states[i]);
    const std::string prefix = std::to_string(i) + ',' +
                               std::to_string(i < samples.iterations.size() ? samples.iterations[i] : 0) + ',';
    std::istringstream lines(body.str());
    std::string line;
    std::getline(lines, line);  // header
    buf.clear();
    while (std::getline(lines, line)) {
      buf += prefix;
      buf += line;
      buf += '\n';
    }
    out << buf;
  }
}

std::vector<ModelState> read_samples_csv(const std::filesystem::path& path,
                                         std::vector<int>* iterations) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  std::size_t row = 0;
  if (!csv::next_line(in, line, row) ||
      csv::split(line) != std::vector<std::string>{"snapshot", "iteration", "name", "indices", "value"}) {
    throw ParseError("expected header snapshot,iteration,name,indices,value", row);
  }
  std::vector<ModelState> states;
  long current = -1;
  std::string block;
  const auto flush = [&] {
    if (current < 0) return;
    std::istringstream body(block);
    states.push_back(read_state_csv(body));
  };
  while (csv::next_line(in, line, row)) {
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos) throw ParseError("expected 5 fields", row);
    const long snap = csv::parse_int(std::string_view(line).substr(0, c1), row);
    if (snap != current) {
      if (snap != current + 1) throw ParseError("snapshots out of order", row);
      flush();
      current = snap;
      block = "name,indices,value\n";
      if (iterations) {
        iterations->push_back(static_cast<int>(
            csv::parse_int(std::string_view(line).substr(c1 + 1, c2 - c1 - 1), row)));
      }
    }
    block.append(line, c2 + 1);
    block += '\n';
  }
  flush();
  return states;
}

void write_traces(const std::filesystem::path& dir, const PosteriorSamples& samples) {
  for (const auto& [name, series] : samples.traces) {
    const auto path = dir / ("trace_" + name + ".csv");
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << "iteration,value\n";
    for (std::size_t t = 0; t < series.size(); ++t) {
      out << (t + 1) << ',' << csv::format(series[t]) << '\n';
    }
  }
}

PosteriorSamples merge_chains(std::vector<PosteriorSamples> chains) {
  if (chains.empty()) throw InputError("merge_chains: no chains");
  if (chains.size() == 1) return std::move(chains.front());
  PosteriorSamples out;
  out.priors = chains.front().priors;
  out.jitter = chains.front().jitter;
  double acceptance = 0.0;
  for (auto& c : chains) {
    out.states.insert(out.states.end(), std::make_move_iterator(c.states.begin()),
                      std::make_move_iterator(c.states.end()));
    out.iterations.insert(out.iterations.end(), c.iterations.begin(), c.iterations.end());
    acceptance += c.omega_acceptance;
  }
  out.omega_acceptance = acceptance / static_cast<double>(chains.size());
  return out;
}

}  // namespace aabtp
