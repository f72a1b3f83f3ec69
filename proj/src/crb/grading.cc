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
#include "cdlm/crb/grading.h"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <map>
#include <sstream>

namespace cdlm::crb {

namespace {

std::string NormalizeCode(const std::string& code) {
  std::istringstream in(code);
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' ||
                             line.back() == '\r')) {
      line.pop_back();
    }
    out += line;
    out += '\n';
  }
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

std::string CanonicalKey(const std::string& code, const std::string& tests,
                         const std::string& entry_point) {
  return entry_point + '\x1f' + tests + '\x1f' + NormalizeCode(code);
}

}  // namespace

std::string GradeStatusName(GradeStatus s) {
  switch (s) {
    case GradeStatus::kPass:
      return "pass";
    case GradeStatus::kFail:
      return "fail";
    case GradeStatus::kTimeout:
      return "timeout";
    case GradeStatus::kError:
      return "error";
  }
  return "error";
}

GradeStatus ParseGradeStatus(const std::string& s) {
  if (s == "pass") return GradeStatus::kPass;
  if (s == "fail") return GradeStatus::kFail;
  if (s == "timeout") return GradeStatus::kTimeout;
  if (s == "error") return GradeStatus::kError;
  throw std::invalid_argument("unknown grade status '" + s + "'");
}

nlohmann::json GradeRequest::ToJson() const {
  return {{"id", id},
          {"code", code},
          {"tests", tests},
          {"entry_point", entry_point},
          {"timeout_s", timeout_s}};
}

GradeRequest GradeRequest::FromJson(const nlohmann::json& j) {
  GradeRequest r;
  r.id = j.at("id").get<std::string>();
  r.code = j.at("code").get<std::string>();
  r.tests = j.at("tests").get<std::string>();
  r.entry_point = j.at("entry_point").get<std::string>();
  r.timeout_s = j.value("timeout_s", 10.0);
  if (!(r.timeout_s > 0.0)) throw std::invalid_argument("timeout_s must be > 0");
  return r;
}

nlohmann::json GradeVerdict::ToJson() const {
  return {{"id", id},
          {"status", GradeStatusName(status)},
          {"wall_ms", wall_ms},
          {"stderr_tail", stderr_tail}};
}

GradeVerdict GradeVerdict::FromJson(const nlohmann::json& j) {
  GradeVerdict v;
  v.id = j.at("id").get<std::string>();
  v.status = ParseGradeStatus(j.at("status").get<std::string>());
  v.wall_ms = j.value("wall_ms", 0.0);
  v.stderr_tail = j.value("stderr_tail", std::string());
  return v;
}

GradeVerdict GradingInterface::Grade(const GradeRequest& request) {
  std::vector<GradeVerdict> v = GradeBatch({request});
  if (v.size() != 1) throw GraderUnavailableError("grader returned no verdict");
  return v[0];
}

void StubGrader::AddCanonical(const std::string& code, const std::string& tests,
                              const std::string& entry_point) {
  canonical_.push_back(CanonicalKey(code, tests, entry_point));
}

std::vector<GradeVerdict> StubGrader::GradeBatch(
    const std::vector<GradeRequest>& requests) {
  std::vector<GradeVerdict> out;
  out.reserve(requests.size());
  for (const GradeRequest& r : requests) {
    ++calls_;
    GradeStatus s;
    if (rule_) {
      s = rule_(r);
    } else {
      const std::string key = CanonicalKey(r.code, r.tests, r.entry_point);
      s = GradeStatus::kFail;
      for (const std::string& c : canonical_) {
        if (c == key) s = GradeStatus::kPass;
      }
    }
    out.push_back({r.id, s, 0.0, ""});
  }
  return out;
}

ExternalGrader::ExternalGrader(const std::string& command) {
  int to_child[2];
  int from_child[2];
  if (pipe(to_child) != 0 || pipe(from_child) != 0) {
    throw GraderUnavailableError(std::string("pipe: ") + std::strerror(errno));
  }
  pid_ = fork();
  if (pid_ < 0) {
    throw GraderUnavailableError(std::string("fork: ") + std::strerror(errno));
  }
  if (pid_ == 0) {
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);
  to_child_ = fdopen(to_child[1], "w");
  from_child_ = fdopen(from_child[0], "r");
  if (to_child_ == nullptr || from_child_ == nullptr) {
    throw GraderUnavailableError("fdopen failed");
  }
  signal(SIGPIPE, SIG_IGN);
}

ExternalGrader::~ExternalGrader() {
  if (to_child_ != nullptr) std::fclose(to_child_);
  if (from_child_ != nullptr) std::fclose(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

std::vector<GradeVerdict> ExternalGrader::GradeBatch(
    const std::vector<GradeRequest>& requests) {
  for (const GradeRequest& r : requests) {
    const std::string line = r.ToJson().dump() + "\n";
    if (std::fwrite(line.data(), 1, line.size(), to_child_) != line.size()) {
      throw GraderUnavailableError("cannot write to grader");
    }
  }
  if (std::fflush(to_child_) != 0) {
    throw GraderUnavailableError("cannot write to grader");
  }
  std::map<std::string, GradeVerdict> by_id;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    std::string line;
    int ch;
    while ((ch = std::fgetc(from_child_)) != EOF && ch != '\n') {
      line.push_back(static_cast<char>(ch));
    }
    if (ch == EOF && line.empty()) {
      throw GraderUnavailableError("grader closed its output");
    }
    try {
      GradeVerdict v = GradeVerdict::FromJson(nlohmann::json::parse(line));
      by_id[v.id] = std::move(v);
    } catch (const std::exception& e) {
      throw GraderUnavailableError(std::string("malformed verdict: ") + e.what());
    }
  }
  std::vector<GradeVerdict> out;
  out.reserve(requests.size());
  for (const GradeRequest& r : requests) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) {
      throw GraderUnavailableError("no verdict for request " + r.id);
    }
    out.push_back(it->second);
  }
  return out;
}

}  // namespace cdlm::crb
