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
// Evaluation metrics and report tables.

#ifndef CDLM_METRICS_H_
#define CDLM_METRICS_H_

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cdlm/crb/grading.h"
#include "cdlm/sequence.h"

namespace cdlm {

struct LocalizationRecord {
  std::vector<double> confidences;
  PositionSet error_set;  // E

  // Throws std::invalid_argument unless E is nonempty, sorted and in range.
  void Validate() const;
};

// Mean clean confidence minus mean error confidence. Throws when E covers
// every position.
double ConfidenceGap(const LocalizationRecord& rec);
// Unweighted mean of per-record gaps.
double MeanConfidenceGap(const std::vector<LocalizationRecord>& records);

// 1 iff E meets the k lowest-confidence positions (ties by lower index).
int HitAtK(const LocalizationRecord& rec, int k);
double HitRate(const std::vector<LocalizationRecord>& records, int k);

struct RatioResult {
  double ratio = 0.0;
  bool infinite = false;  // pooled noisy mean was zero
  double clean_mean = 0.0;
  double noisy_mean = 0.0;
  long long clean_count = 0;
  long long noisy_count = 0;
};

// Pooled mean clean confidence over pooled mean noisy confidence.
RatioResult CleanNoiseRatio(const std::vector<LocalizationRecord>& records);

struct PassAtOneResult {
  double rate = 0.0;
  int n = 0;
  int passed = 0;
  int timeouts = 0;
  int errors = 0;
  // Items whose grading raised GraderUnavailableError; counted as fail.
  int grader_failures = 0;
};

PassAtOneResult PassAtOne(const std::vector<crb::GradeRequest>& finals,
                          crb::GradingInterface& grader);

enum class BoardAccuracyMode { kExactMatch, kConstraint };

struct BoardAccuracyResult {
  double rate = 0.0;
  int n = 0;
  int correct = 0;
  // Boards that still held a mask; always counted incorrect.
  int residual_masks = 0;
};

BoardAccuracyResult BoardAccuracy(
    const std::vector<TokenSequence>& finals,
    const std::vector<TokenSequence>& solutions,
    BoardAccuracyMode mode = BoardAccuracyMode::kExactMatch);

// Long-format metric table: grouping keys, metric name, value, item count.
class Report {
 public:
  // `key_columns` fixes the CSV column order; `count_column` names the
  // item-count column (e.g. "n_boards").
  Report(std::vector<std::string> key_columns, std::string count_column);

  void Add(const std::map<std::string, std::string>& keys,
           const std::string& metric, double value, long long count);
  void Merge(const Report& other);

  const std::vector<std::string>& key_columns() const { return key_columns_; }
  const std::string& count_column() const { return count_column_; }
  std::size_t size() const { return rows_.size(); }

  // Value of the unique row matching `keys` (subset match) and metric.
  double Get(const std::map<std::string, std::string>& keys,
             const std::string& metric) const;

  std::string ToCsv() const;
  nlohmann::json ToJson() const;
  static Report FromCsv(const std::string& text);
  void WriteCsv(const std::string& path) const;
  void WriteJson(const std::string& path) const;

  struct Row {
    std::map<std::string, std::string> keys;
    std::string metric;
    double value;
    long long count;
  };
  const std::vector<Row>& rows() const { return rows_; }

 private:
  std::vector<std::string> key_columns_;
  std::string count_column_;
  std::vector<Row> rows_;
};

// Shortest round-trip text for a metric value or grouping key.
std::string FormatNumber(double v);

Report SudokuReport();
Report CrbReport();

}  // namespace cdlm

#endif  // CDLM_METRICS_H_
