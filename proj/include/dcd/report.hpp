#pragma once

// Run reports: per-interval metrics rows, counters, and the fixed-column CSV
// format they are exchanged in.

#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcd/rng.hpp"

namespace dcd {

// Shortest round-trippable decimal form.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline constexpr const char* kMetricsCsvHeader =
    "episode,updates,suite,solved_rate,block_count,shortest_path,solved_path_mean,"
    "action_lzw_mean,buffer_size,mean_buffer_score";

struct MetricsRow {
  long long episode = 0;
  long long updates = 0;
  std::string suite;
  double solved_rate = 0.0;
  double block_count = 0.0;     // mean over the training interval
  double shortest_path = 0.0;   // mean over the training interval
  std::optional<double> solved_path_mean;  // over solved episodes only
  double action_lzw_mean = 0.0;
  int buffer_size = 0;
  double mean_buffer_score = 0.0;
};

struct RunReport {
  int schema_version = 1;
  std::map<std::string, std::string> config_echo;
  long long episodes = 0;
  long long student_updates = 0;
  long long antagonist_updates = 0;
  long long generator_updates = 0;
  long long replay_episodes = 0;
  long long generate_episodes = 0;
  std::vector<MetricsRow> rows;
  std::map<std::string, double> final_solved_rates;
  double wall_clock_seconds = 0.0;

  // Content hash over everything except wall clock; equal configs and seeds
  // must produce equal fingerprints.
  std::uint64_t deterministic_fingerprint() const;
};

inline std::string format_metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream os;
  os << kMetricsCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.episode << ',' << r.updates << ',' << r.suite << ',' << format_double(r.solved_rate)
       << ',' << format_double(r.block_count) << ',' << format_double(r.shortest_path) << ','
       << (r.solved_path_mean ? format_double(*r.solved_path_mean) : std::string()) << ','
       << format_double(r.action_lzw_mean) << ',' << r.buffer_size << ','
       << format_double(r.mean_buffer_score) << '\n';
  }
  return os.str();
}

inline std::vector<MetricsRow> parse_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricsCsvHeader)
    throw std::invalid_argument("parse_metrics_csv: bad header");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.push_back("");
    if (fields.size() != 10) throw std::invalid_argument("parse_metrics_csv: wrong column count");
    MetricsRow r;
    r.episode = std::stoll(fields[0]);
    r.updates = std::stoll(fields[1]);
    r.suite = fields[2];
    r.solved_rate = std::stod(fields[3]);
    r.block_count = std::stod(fields[4]);
    r.shortest_path = std::stod(fields[5]);
    if (!fields[6].empty()) r.solved_path_mean = std::stod(fields[6]);
    r.action_lzw_mean = std::stod(fields[7]);
    r.buffer_size = std::stoi(fields[8]);
    r.mean_buffer_score = std::stod(fields[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::uint64_t RunReport::deterministic_fingerprint() const {
  std::ostringstream os;
  for (const auto& [k, v] : config_echo) os << k << '=' << v << ';';
  os << episodes << '|' << student_updates << '|' << antagonist_updates << '|'
     << generator_updates << '|' << replay_episodes << '|' << generate_episodes << '|';
  os << format_metrics_csv(rows);
  for (const auto& [k, v] : final_solved_rates) os << k << '=' << format_double(v) << ';';
  return fnv1a64(os.str());
}

}  // namespace dcd
