// Copyright 2026 The lorafair Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lorafair/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "lorafair/model.hpp"

namespace lorafair {
namespace {

constexpr int kFixedLeadingColumns = 2;  // round, participants

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const std::string& column) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("csv: cannot parse '" + s + "' in column " + column);
  }
  return v;
}

std::int64_t parse_int(const std::string& s, const std::string& column) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("csv: cannot parse '" + s + "' in column " + column);
  }
  return v;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " +
                               ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

Evaluation evaluate_weights(const Matrix& weights, std::span<const ClientDataset> test_sets) {
  Evaluation ev;
  for (const auto& set : test_sets) {
    if (set.size() == 0) throw std::invalid_argument("evaluate: empty test set");
    ev.per_domain_accuracy.push_back(accuracy(weights, set.inputs, set.labels));
    ev.per_domain_loss.push_back(softmax_cross_entropy(weights, set.inputs, set.labels).loss);
  }
  const auto n = static_cast<double>(test_sets.size());
  ev.average_accuracy =
      std::accumulate(ev.per_domain_accuracy.begin(), ev.per_domain_accuracy.end(), 0.0) / n;
  ev.average_loss = std::accumulate(ev.per_domain_loss.begin(), ev.per_domain_loss.end(), 0.0) / n;
  return ev;
}

Evaluation evaluate(const FrozenBase& base, const LoraPair& pair,
                    std::span<const ClientDataset> test_sets) {
  return evaluate_weights(merged_weights(base, pair), test_sets);
}

std::vector<std::string> csv_columns(std::size_t num_domains) {
  std::vector<std::string> cols{"round", "participants"};
  for (std::size_t m = 0; m < num_domains; ++m) cols.push_back("acc_domain_" + std::to_string(m));
  for (const char* c : {"average_accuracy", "train_loss", "test_loss", "uplink_floats",
                        "downlink_floats", "bias_cosine", "bias_frobenius", "solver_final_cosine",
                        "solver_regularizer_similarity", "solver_delta_norm", "solver_steps"}) {
    cols.emplace_back(c);
  }
  return cols;
}

std::string records_to_csv(std::span<const RoundRecord> records, std::size_t num_domains) {
  std::ostringstream out;
  const auto cols = csv_columns(num_domains);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    if (r.per_domain_accuracy.size() != num_domains) {
      throw std::invalid_argument("records_to_csv: record has " +
                                  std::to_string(r.per_domain_accuracy.size()) +
                                  " domain accuracies, expected " + std::to_string(num_domains));
    }
    out << r.round << ',' << r.participants;
    for (double a : r.per_domain_accuracy) out << ',' << format_double(a);
    out << ',' << format_double(r.average_accuracy) << ',' << format_double(r.train_loss) << ','
        << format_double(r.test_loss) << ',' << r.uplink_floats << ',' << r.downlink_floats << ','
        << format_double(r.bias_cosine) << ',' << format_double(r.bias_frobenius);
    if (r.solver) {
      out << ',' << format_double(r.solver->final_cosine) << ','
          << format_double(r.solver->regularizer_similarity) << ','
          << format_double(r.solver->delta_norm) << ',' << r.solver->steps;
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
  return out.str();
}

void write_csv(std::span<const RoundRecord> records, std::size_t num_domains,
               const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << records_to_csv(records, num_domains);
  finish_write(out, path);
}

std::vector<RoundRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header");
  const auto header = split_csv_line(line);
  const int fixed_tail = 11;
  const int num_domains = static_cast<int>(header.size()) - kFixedLeadingColumns - fixed_tail;
  if (num_domains < 0 || header != csv_columns(static_cast<std::size_t>(num_domains))) {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<RoundRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(f.size()));
    }
    RoundRecord r;
    std::size_t i = 0;
    r.round = static_cast<int>(parse_int(f[i], header[i]));
    ++i;
    r.participants = static_cast<int>(parse_int(f[i], header[i]));
    ++i;
    for (int m = 0; m < num_domains; ++m, ++i) r.per_domain_accuracy.push_back(parse_double(f[i], header[i]));
    r.average_accuracy = parse_double(f[i], header[i]); ++i;
    r.train_loss = parse_double(f[i], header[i]); ++i;
    r.test_loss = parse_double(f[i], header[i]); ++i;
    r.uplink_floats = parse_int(f[i], header[i]); ++i;
    r.downlink_floats = parse_int(f[i], header[i]); ++i;
    r.bias_cosine = parse_double(f[i], header[i]); ++i;
    r.bias_frobenius = parse_double(f[i], header[i]); ++i;
    if (!f[i].empty()) {
      SolverDiagnostics s;
      s.final_cosine = parse_double(f[i], header[i]);
      s.regularizer_similarity = parse_double(f[i + 1], header[i + 1]);
      s.delta_norm = parse_double(f[i + 2], header[i + 2]);
      s.steps = static_cast<int>(parse_int(f[i + 3], header[i + 3]));
      r.solver = s;
    }
    records.push_back(std::move(r));
  }
  return records;
}

nlohmann::json to_json(const RoundRecord& r) {
  nlohmann::json j{{"round", r.round},
                   {"participants", r.participants},
                   {"per_domain_accuracy", r.per_domain_accuracy},
                   {"average_accuracy", r.average_accuracy},
                   {"train_loss", r.train_loss},
                   {"test_loss", r.test_loss},
                   {"uplink_floats", r.uplink_floats},
                   {"downlink_floats", r.downlink_floats},
                   {"server_solve_seconds", r.server_solve_seconds},
                   {"client_train_seconds", r.client_train_seconds},
                   {"bias_cosine", r.bias_cosine},
                   {"bias_frobenius", r.bias_frobenius}};
  if (r.solver) {
    j["solver"] = {{"final_cosine", r.solver->final_cosine},
                   {"regularizer_similarity", r.solver->regularizer_similarity},
                   {"delta_norm", r.solver->delta_norm},
                   {"steps", r.solver->steps}};
  } else {
    j["solver"] = nullptr;
  }
  return j;
}

RoundRecord record_from_json(const nlohmann::json& j) {
  RoundRecord r;
  r.round = j.at("round").get<int>();
  r.participants = j.at("participants").get<int>();
  r.per_domain_accuracy = j.at("per_domain_accuracy").get<std::vector<double>>();
  r.average_accuracy = j.at("average_accuracy").get<double>();
  r.train_loss = j.at("train_loss").get<double>();
  r.test_loss = j.at("test_loss").get<double>();
  r.uplink_floats = j.at("uplink_floats").get<std::int64_t>();
  r.downlink_floats = j.at("downlink_floats").get<std::int64_t>();
  r.server_solve_seconds = j.at("server_solve_seconds").get<double>();
  r.client_train_seconds = j.at("client_train_seconds").get<double>();
  r.bias_cosine = j.at("bias_cosine").get<double>();
  r.bias_frobenius = j.at("bias_frobenius").get<double>();
  if (const auto& s = j.at("solver"); !s.is_null()) {
    r.solver = SolverDiagnostics{s.at("final_cosine").get<double>(),
                                 s.at("regularizer_similarity").get<double>(),
                                 s.at("delta_norm").get<double>(), s.at("steps").get<int>()};
  }
  return r;
}

nlohmann::json to_json(const RunSummary& s) {
  return {{"config", s.config},
          {"rounds", s.rounds},
          {"initial_per_domain_accuracy", s.initial_per_domain_accuracy},
          {"initial_average_accuracy", s.initial_average_accuracy},
          {"final_per_domain_accuracy", s.final_per_domain_accuracy},
          {"final_average_accuracy", s.final_average_accuracy},
          {"final_test_loss", s.final_test_loss},
          {"accuracy_trajectory", s.accuracy_trajectory},
          {"total_uplink_floats", s.total_uplink_floats},
          {"total_downlink_floats", s.total_downlink_floats},
          {"total_server_seconds", s.total_server_seconds},
          {"total_client_seconds", s.total_client_seconds}};
}

RunSummary summary_from_json(const nlohmann::json& j) {
  RunSummary s;
  s.config = j.at("config");
  s.rounds = j.at("rounds").get<int>();
  s.initial_per_domain_accuracy = j.at("initial_per_domain_accuracy").get<std::vector<double>>();
  s.initial_average_accuracy = j.at("initial_average_accuracy").get<double>();
  s.final_per_domain_accuracy = j.at("final_per_domain_accuracy").get<std::vector<double>>();
  s.final_average_accuracy = j.at("final_average_accuracy").get<double>();
  s.final_test_loss = j.at("final_test_loss").get<double>();
  s.accuracy_trajectory = j.at("accuracy_trajectory").get<std::vector<double>>();
  s.total_uplink_floats = j.at("total_uplink_floats").get<std::int64_t>();
  s.total_downlink_floats = j.at("total_downlink_floats").get<std::int64_t>();
  s.total_server_seconds = j.at("total_server_seconds").get<double>();
  s.total_client_seconds = j.at("total_client_seconds").get<double>();
  return s;
}

void write_json(std::span<const RoundRecord> records, const RunSummary& summary,
                const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["summary"] = to_json(summary);
  doc["records"] = nlohmann::json::array();
  for (const auto& r : records) doc["records"].push_back(to_json(r));
  auto out = open_for_write(path);
  out << doc.dump(2) << '\n';
  finish_write(out, path);
}

void emit(std::span<const RoundRecord> records, const RunSummary& summary,
          const std::filesystem::path& path, EmitFormat format) {
  const std::size_t num_domains = summary.final_per_domain_accuracy.size();
  switch (format) {
    case EmitFormat::kCsv:
      write_csv(records, num_domains, path);
      break;
    case EmitFormat::kJson:
      write_json(records, summary, path);
      break;
    case EmitFormat::kBoth: {
      auto csv = path;
      auto json = path;
      write_csv(records, num_domains, csv.replace_extension(".csv"));
      write_json(records, summary, json.replace_extension(".json"));
      break;
    }
  }
}

RunSummary summarize(std::span<const RoundRecord> records, const Evaluation& initial,
                     nlohmann::json config) {
  RunSummary s;
  s.config = std::move(config);
  s.rounds = static_cast<int>(records.size());
  s.initial_per_domain_accuracy = initial.per_domain_accuracy;
  s.initial_average_accuracy = initial.average_accuracy;
  s.final_per_domain_accuracy = initial.per_domain_accuracy;
  s.final_average_accuracy = initial.average_accuracy;
  s.final_test_loss = initial.average_loss;
  for (const auto& r : records) {
    s.accuracy_trajectory.push_back(r.average_accuracy);
    s.total_uplink_floats += r.uplink_floats;
    s.total_downlink_floats += r.downlink_floats * r.participants;
    s.total_server_seconds += r.server_solve_seconds;
    s.total_client_seconds += r.client_train_seconds;
  }
  if (!records.empty()) {
    s.final_per_domain_accuracy = records.back().per_domain_accuracy;
    s.final_average_accuracy = records.back().average_accuracy;
    s.final_test_loss = records.back().test_loss;
  }
  return s;
}

}  // namespace lorafair
