// Copyright 2026 The CDLM Workbench Authors
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
#include "cdlm/metrics.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cdlm/sudoku.h"

namespace cdlm {

void LocalizationRecord::Validate() const {
  const int n = static_cast<int>(confidences.size());
  if (error_set.empty()) throw std::invalid_argument("error set is empty");
  if (!IsSortedUnique(error_set) || error_set.front() < 0 ||
      error_set.back() >= n) {
    throw std::invalid_argument("error set must be sorted, unique, in range");
  }
}

double ConfidenceGap(const LocalizationRecord& rec) {
  rec.Validate();
  const int n = static_cast<int>(rec.confidences.size());
  if (static_cast<int>(rec.error_set.size()) == n) {
    throw std::invalid_argument("gap undefined: every position is an error");
  }
  double err = 0.0;
  double clean = 0.0;
  for (int i = 0; i < n; ++i) {
    (Contains(rec.error_set, i) ? err : clean) +=
        rec.confidences[static_cast<std::size_t>(i)];
  }
  const auto ne = static_cast<double>(rec.error_set.size());
  return clean / (n - ne) - err / ne;
}

double MeanConfidenceGap(const std::vector<LocalizationRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no records");
  double s = 0.0;
  for (const auto& r : records) s += ConfidenceGap(r);
  return s / static_cast<double>(records.size());
}

int HitAtK(const LocalizationRecord& rec, int k) {
  rec.Validate();
  const int n = static_cast<int>(rec.confidences.size());
  if (k < 1 || k > n) throw std::invalid_argument("k must lie in [1, n]");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&rec](int a, int b) {
    return rec.confidences[static_cast<std::size_t>(a)] <
           rec.confidences[static_cast<std::size_t>(b)];
  });
  for (int j = 0; j < k; ++j) {
    if (Contains(rec.error_set, order[static_cast<std::size_t>(j)])) return 1;
  }
  return 0;
}

double HitRate(const std::vector<LocalizationRecord>& records, int k) {
  if (records.empty()) throw std::invalid_argument("no records");
  double s = 0.0;
  for (const auto& r : records) s += HitAtK(r, k);
  return s / static_cast<double>(records.size());
}

RatioResult CleanNoiseRatio(const std::vector<LocalizationRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no records");
  RatioResult r;
  double clean = 0.0;
  double noisy = 0.0;
  for (const auto& rec : records) {
    rec.Validate();
    for (std::size_t i = 0; i < rec.confidences.size(); ++i) {
      if (Contains(rec.error_set, static_cast<int>(i))) {
        noisy += rec.confidences[i];
        ++r.noisy_count;
      } else {
        clean += rec.confidences[i];
        ++r.clean_count;
      }
    }
  }
  if (r.clean_count == 0) throw std::invalid_argument("no clean positions");
  r.clean_mean = clean / static_cast<double>(r.clean_count);
  r.noisy_mean = noisy / static_cast<double>(r.noisy_count);
  if (r.noisy_mean > 0.0) {
    r.ratio = r.clean_mean / r.noisy_mean;
  } else {
    r.infinite = true;
    r.ratio = std::numeric_limits<double>::infinity();
  }
  return r;
}

PassAtOneResult PassAtOne(const std::vector<crb::GradeRequest>& finals,
                          crb::GradingInterface& grader) {
  PassAtOneResult r;
  r.n = static_cast<int>(finals.size());
  if (r.n == 0) return r;
  for (const crb::GradeRequest& req : finals) {
    crb::GradeVerdict v;
    try {
      v = grader.Grade(req);
    } catch (const crb::GraderUnavailableError&) {
      ++r.grader_failures;
      continue;
    }
    switch (v.status) {
      case crb::GradeStatus::kPass:
        ++r.passed;
        break;
      case crb::GradeStatus::kTimeout:
        ++r.timeouts;
        break;
      case crb::GradeStatus::kError:
        ++r.errors;
        break;
      case crb::GradeStatus::kFail:
        break;
    }
  }
  r.rate = static_cast<double>(r.passed) / r.n;
  return r;
}

BoardAccuracyResult BoardAccuracy(const std::vector<TokenSequence>& finals,
                                  const std::vector<TokenSequence>& solutions,
                                  BoardAccuracyMode mode) {
  if (finals.size() != solutions.size()) {
    throw std::invalid_argument("finals and solutions differ in length");
  }
  BoardAccuracyResult r;
  r.n = static_cast<int>(finals.size());
  for (std::size_t i = 0; i < finals.size(); ++i) {
    if (finals[i].ContainsMask()) {
      ++r.residual_masks;
      continue;
    }
    const bool ok = mode == BoardAccuracyMode::kExactMatch
                        ? finals[i].tokens() == solutions[i].tokens()
                        : sudoku::IsSolution(finals[i]);
    if (ok) ++r.correct;
  }
  r.rate = r.n == 0 ? 0.0 : static_cast<double>(r.correct) / r.n;
  return r;
}

std::string FormatNumber(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Report::Report(std::vector<std::string> key_columns, std::string count_column)
    : key_columns_(std::move(key_columns)), count_column_(std::move(count_column)) {}

void Report::Add(const std::map<std::string, std::string>& keys,
                 const std::string& metric, double value, long long count) {
  for (const auto& [k, v] : keys) {
    if (std::find(key_columns_.begin(), key_columns_.end(), k) ==
        key_columns_.end()) {
      throw std::invalid_argument("unknown report key '" + k + "'");
    }
  }
  rows_.push_back({keys, metric, value, count});
}

void Report::Merge(const Report& other) {
  for (const Row& r : other.rows_) Add(r.keys, r.metric, r.value, r.count);
}

double Report::Get(const std::map<std::string, std::string>& keys,
                   const std::string& metric) const {
  const Row* found = nullptr;
  for (const Row& r : rows_) {
    if (r.metric != metric) continue;
    bool match = true;
    for (const auto& [k, v] : keys) {
      auto it = r.keys.find(k);
      if (it == r.keys.end() || it->second != v) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    if (found != nullptr) throw std::invalid_argument("ambiguous report lookup");
    found = &r;
  }
  if (found == nullptr) throw std::out_of_range("no report row for " + metric);
  return found->value;
}

std::string Report::ToCsv() const {
  std::ostringstream out;
  for (const auto& k : key_columns_) out << k << ',';
  out << "metric,value," << count_column_ << '\n';
  for (const Row& r : rows_) {
    for (const auto& k : key_columns_) {
      auto it = r.keys.find(k);
      if (it != r.keys.end()) out << it->second;
      out << ',';
    }
    out << r.metric << ',' << FormatNumber(r.value) << ',' << r.count << '\n';
  }
  return out.str();
}

nlohmann::json Report::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const Row& r : rows_) {
    nlohmann::json j = r.keys;
    j["metric"] = r.metric;
    if (std::isfinite(r.value)) {
      j["value"] = r.value;
    } else {
      j["value"] = r.value > 0 ? "inf" : (r.value < 0 ? "-inf" : "nan");
    }
    j[count_column_] = r.count;
    rows.push_back(std::move(j));
  }
  return {{"key_columns", key_columns_},
          {"count_column", count_column_},
          {"rows", rows}};
}

Report Report::FromCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty report");
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header[header.size() - 3] != "metric" ||
      header[header.size() - 2] != "value") {
    throw std::invalid_argument("report header must end in metric,value,<count>");
  }
  Report r(std::vector<std::string>(header.begin(), header.end() - 3),
           header.back());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream l(line);
    std::string cell;
    while (std::getline(l, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != header.size()) {
      throw std::invalid_argument("report row has the wrong number of cells");
    }
    std::map<std::string, std::string> keys;
    for (std::size_t i = 0; i + 3 < header.size(); ++i) {
      if (!cells[i].empty()) keys[header[i]] = cells[i];
    }
    r.Add(keys, cells[header.size() - 3], std::stod(cells[header.size() - 2]),
          std::stoll(cells.back()));
  }
  return r;
}

void Report::WriteCsv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << ToCsv();
}

void Report::WriteJson(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << ToJson().dump(2) << '\n';
}

Report SudokuReport() {
  return Report({"experiment", "noise_ratio", "editable_ratio", "mask_ratio", "step"},
                "n_boards");
}

Report CrbReport() {
  return Report({"experiment", "n_replace", "error_type", "T", "K"},
                "n_instances");
}

}  // namespace cdlm
