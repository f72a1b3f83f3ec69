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
// Grading interface: (code, tests, entry point, timeout) -> verdict.
//
// The JSONL wire format used by external graders is
//   request: {"id", "code", "tests", "entry_point", "timeout_s"}
//   verdict: {"id", "status": "pass"|"fail"|"timeout"|"error", "wall_ms",
//             "stderr_tail"}

#ifndef CDLM_CRB_GRADING_H_
#define CDLM_CRB_GRADING_H_

#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cdlm::crb {

enum class GradeStatus { kPass, kFail, kTimeout, kError };

std::string GradeStatusName(GradeStatus s);
GradeStatus ParseGradeStatus(const std::string& s);

struct GradeRequest {
  std::string id;
  std::string code;
  std::string tests;
  std::string entry_point;
  double timeout_s = 10.0;

  nlohmann::json ToJson() const;
  static GradeRequest FromJson(const nlohmann::json& j);
};

struct GradeVerdict {
  std::string id;
  GradeStatus status = GradeStatus::kError;
  double wall_ms = 0.0;
  std::string stderr_tail;

  bool passed() const { return status == GradeStatus::kPass; }
  nlohmann::json ToJson() const;
  static GradeVerdict FromJson(const nlohmann::json& j);
};

// Raised when the grader itself cannot be reached; distinct from a verdict.
class GraderUnavailableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GradingInterface {
 public:
  virtual ~GradingInterface() = default;
  // One verdict per request, in request order.
  virtual std::vector<GradeVerdict> GradeBatch(
      const std::vector<GradeRequest>& requests) = 0;

  GradeVerdict Grade(const GradeRequest& request);
};

// In-memory grader. The default rule passes exactly the programs registered
// as canonical (whitespace-insensitive at line ends); a custom rule may be
// supplied instead.
class StubGrader : public GradingInterface {
 public:
  using Rule = std::function<GradeStatus(const GradeRequest&)>;

  StubGrader() = default;
  explicit StubGrader(Rule rule) : rule_(std::move(rule)) {}

  // Registers `code` as a passing program for `entry_point` + `tests`.
  void AddCanonical(const std::string& code, const std::string& tests,
                    const std::string& entry_point);

  std::vector<GradeVerdict> GradeBatch(
      const std::vector<GradeRequest>& requests) override;

  int calls() const { return calls_; }

 private:
  Rule rule_;
  std::vector<std::string> canonical_;
  int calls_ = 0;
};

// Speaks the JSONL wire format to a grader subprocess on its stdin/stdout.
class ExternalGrader : public GradingInterface {
 public:
  explicit ExternalGrader(const std::string& command);
  ~ExternalGrader() override;
  ExternalGrader(const ExternalGrader&) = delete;
  ExternalGrader& operator=(const ExternalGrader&) = delete;

  std::vector<GradeVerdict> GradeBatch(
      const std::vector<GradeRequest>& requests) override;

 private:
  int pid_ = -1;
  std::FILE* to_child_ = nullptr;
  std::FILE* from_child_ = nullptr;
};

// Environment variable naming the external grader command.
inline constexpr const char* kGraderEnv = "CDLM_GRADER_CMD";

}  // namespace cdlm::crb

#endif  // CDLM_CRB_GRADING_H_
